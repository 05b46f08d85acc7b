//! Reeb dynamics on star-shaped hypersurfaces of `R^{2n}`.
//!
//! The boundary is the level set `{H = 1}` of the 2-homogeneous function
//! `H(z) = (|z| / rho(z / |z|))^2`, and the Reeb field is `J grad H` with
//! `J(x, y) = (-y, x)` on each complex coordinate. Euler's identity makes
//! `lambda(R) = H`, which equals 1 on the boundary.

mod chords;
mod domain;
pub mod ode;

pub use chords::{
    find_chords, integrated_chord_period, transported_legendrian, ChordSearch, NumericalChord, TransportedTorus,
    DIST_TOL, GENUINE_SEPARATION,
};
pub use domain::{c1_distance, perturb, Bump, Perturbation, StarShapedDomain, DEFAULT_C1_SAMPLES};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use ode::{Dopri5, Dopri5Options};

/// Threshold on `|H - 1|` for points accepted as lying on the boundary.
pub const SURFACE_TOL: f64 = 1e-8;
/// Drift beyond which an integration is aborted.
pub const DRIFT_ABORT: f64 = 1e-6;

/// Liouville form `lambda = 1/2 sum (x_i dy_i - y_i dx_i)` at `z`, applied to `v`.
pub fn lambda_eval(z: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..z.len() / 2 {
        acc += z[2 * i] * v[2 * i + 1] - z[2 * i + 1] * v[2 * i];
    }
    0.5 * acc
}

/// Moment map `w_i = pi (x_i^2 + y_i^2)`.
pub fn moment(z: &[f64]) -> Vec<f64> {
    (0..z.len() / 2).map(|i| std::f64::consts::PI * (z[2 * i] * z[2 * i] + z[2 * i + 1] * z[2 * i + 1])).collect()
}

/// Angles `theta_i = atan2(y_i, x_i)`.
pub fn angles(z: &[f64]) -> Vec<f64> {
    (0..z.len() / 2).map(|i| z[2 * i + 1].atan2(z[2 * i])).collect()
}

/// The point with moment coordinates `w` and angles `theta`.
pub fn fiber_point(w: &[f64], theta: &[f64]) -> Vec<f64> {
    let mut z = Vec::with_capacity(2 * w.len());
    for (wi, ti) in w.iter().zip(theta) {
        let r = (wi / std::f64::consts::PI).sqrt();
        z.push(r * ti.cos());
        z.push(r * ti.sin());
    }
    z
}

fn rotate(g: &[f64]) -> Vec<f64> {
    let mut v = vec![0.0; g.len()];
    for i in 0..g.len() / 2 {
        v[2 * i] = -g[2 * i + 1];
        v[2 * i + 1] = g[2 * i];
    }
    v
}

/// Reeb vector field at a boundary point.
pub fn reeb_field(domain: &StarShapedDomain, z: &[f64]) -> Result<Vec<f64>> {
    let h = domain.hamiltonian(z)?;
    if (h - 1.0).abs() > SURFACE_TOL {
        return Err(Error::InvalidParameter(format!("point is off the boundary (|H - 1| = {:e})", (h - 1.0).abs())));
    }
    let mut v = rotate(&domain.hamiltonian_gradient(z)?);
    let mut l = lambda_eval(z, &v);
    if l < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
        l = -l;
    }
    if (l - 1.0).abs() > 1e-6 {
        return Err(Error::ModelInconsistency(format!("lambda(R) = {l} after sign fixing")));
    }
    Ok(v)
}

/// Hamiltonian vector field `J grad H`, defined off the boundary as well.
fn hamiltonian_field(domain: &StarShapedDomain, z: &[f64], out: &mut [f64]) {
    match domain.hamiltonian_gradient(z) {
        Ok(g) => {
            for i in 0..g.len() / 2 {
                out[2 * i] = -g[2 * i + 1];
                out[2 * i + 1] = g[2 * i];
            }
        }
        Err(_) => out.iter_mut().for_each(|x| *x = f64::NAN),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlowOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Rescale onto `{H = 1}` after every accepted step.
    pub project: bool,
    /// Keep every accepted step in [`Trajectory::samples`].
    pub record: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions { rtol: 1e-10, atol: 1e-12, project: false, record: true }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySample {
    pub t: f64,
    pub z: Vec<f64>,
    pub h: f64,
    pub lambda_r: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub end: Vec<f64>,
    pub duration: f64,
    /// `max |H - 1|` over accepted steps (before any projection).
    pub max_drift: f64,
    /// `max |lambda(z') - 1|` over accepted steps.
    pub max_lambda_defect: f64,
    /// Trapezoid-rule integral of `lambda(z')` over the trajectory.
    pub action: f64,
    pub steps_accepted: usize,
    pub steps_rejected: usize,
    pub projected: bool,
    /// Sum of `|scale - 1|` over the radial corrections.
    pub total_correction: f64,
}

impl Trajectory {
    /// CSV rows `t, x1, y1, x2, y2, H, lambdaR` (dimension 4).
    pub fn csv_rows(&self) -> Vec<[f64; 7]> {
        self.samples
            .iter()
            .filter(|s| s.z.len() == 4)
            .map(|s| [s.t, s.z[0], s.z[1], s.z[2], s.z[3], s.h, s.lambda_r])
            .collect()
    }
}

/// Integrates the Reeb flow from `z0` for time `duration`.
pub fn integrate_flow(domain: &StarShapedDomain, z0: &[f64], duration: f64, opts: &FlowOptions) -> Result<Trajectory> {
    let mut tracker = FlowTracker::start(domain, z0, duration, opts)?;
    tracker.advance(duration)?;
    Ok(tracker.finish())
}

type Field<'a> = Box<dyn FnMut(&[f64], &mut [f64]) + 'a>;

/// Stepwise Reeb-flow integration with drift monitoring.
pub(crate) struct FlowTracker<'a> {
    domain: &'a StarShapedDomain,
    stepper: Dopri5<Field<'a>>,
    opts: FlowOptions,
    traj: Trajectory,
    last_lambda: f64,
}

impl<'a> FlowTracker<'a> {
    pub(crate) fn start(domain: &'a StarShapedDomain, z0: &[f64], duration: f64, opts: &FlowOptions) -> Result<Self> {
        if !(duration > 0.0 && duration.is_finite()) {
            return Err(Error::InvalidParameter(format!("flow time must be positive, got {duration}")));
        }
        let h0 = domain.hamiltonian(z0)?;
        if (h0 - 1.0).abs() > SURFACE_TOL {
            return Err(Error::InvalidParameter(format!(
                "start point is off the boundary (|H - 1| = {:e})",
                (h0 - 1.0).abs()
            )));
        }
        let field: Field<'a> = Box::new(move |z, out| hamiltonian_field(domain, z, out));
        let stepper =
            Dopri5::new(field, z0, Dopri5Options { rtol: opts.rtol, atol: opts.atol, ..Dopri5Options::default() });
        let lambda0 = lambda_eval(z0, stepper.derivative());
        let mut traj = Trajectory {
            samples: Vec::new(),
            end: z0.to_vec(),
            duration: 0.0,
            max_drift: (h0 - 1.0).abs(),
            max_lambda_defect: (lambda0 - 1.0).abs(),
            action: 0.0,
            steps_accepted: 0,
            steps_rejected: 0,
            projected: opts.project,
            total_correction: 0.0,
        };
        if opts.record {
            traj.samples.push(TrajectorySample { t: 0.0, z: z0.to_vec(), h: h0, lambda_r: lambda0 });
        }
        Ok(FlowTracker { domain, stepper, opts: *opts, traj, last_lambda: lambda0 })
    }

    pub(crate) fn time(&self) -> f64 {
        self.stepper.t
    }

    pub(crate) fn state(&self) -> &[f64] {
        &self.stepper.y
    }

    /// Integrates up to time `t_end`, landing on it exactly.
    pub(crate) fn advance(&mut self, t_end: f64) -> Result<()> {
        while self.stepper.t < t_end {
            let t_prev = self.stepper.t;
            self.stepper.step(t_end)?;
            let z = self.stepper.y.clone();
            let h = self.domain.hamiltonian(&z)?;
            let drift = (h - 1.0).abs();
            if !(drift <= DRIFT_ABORT) {
                return Err(Error::DriftExceeded { t: self.stepper.t, drift });
            }
            self.traj.max_drift = self.traj.max_drift.max(drift);
            if self.opts.project {
                let c = 1.0 / h.sqrt();
                let zp: Vec<f64> = z.iter().map(|x| x * c).collect();
                self.traj.total_correction += (c - 1.0).abs();
                self.stepper.reset_state(&zp);
            }
            let z = &self.stepper.y;
            let lam = lambda_eval(z, self.stepper.derivative());
            self.traj.max_lambda_defect = self.traj.max_lambda_defect.max((lam - 1.0).abs());
            self.traj.action += 0.5 * (lam + self.last_lambda) * (self.stepper.t - t_prev);
            self.last_lambda = lam;
            if self.opts.record {
                let h_now = if self.opts.project { self.domain.hamiltonian(z)? } else { h };
                self.traj.samples.push(TrajectorySample { t: self.stepper.t, z: z.clone(), h: h_now, lambda_r: lam });
            }
        }
        Ok(())
    }

    pub(crate) fn finish(mut self) -> Trajectory {
        self.traj.end = self.stepper.y.clone();
        self.traj.duration = self.stepper.t;
        self.traj.steps_accepted = self.stepper.accepted;
        self.traj.steps_rejected = self.stepper.rejected;
        self.traj
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment_region::MomentRegion;
    use crate::toric_reeb::{reeb_angular_velocity, TorusFiber};
    use approx::assert_relative_eq;
    use std::f64::consts::{PI, TAU};

    fn toric(r: &MomentRegion) -> StarShapedDomain {
        StarShapedDomain::toric(r)
    }

    fn dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn lambda_examples() {
        assert_eq!(lambda_eval(&[1.0, 0.0, 0.0, 0.0], &[0.0, 1.0, 0.0, 0.0]), 0.5);
        let z = [0.3, -1.2, 0.7, 2.0];
        assert_eq!(lambda_eval(&z, &z), 0.0);
        assert_relative_eq!(lambda_eval(&[0.0, 1.0, 1.0, 0.0], &[-TAU, 0.0, 0.0, TAU]), TAU, epsilon = 1e-15);
    }

    #[test]
    fn hopf_field_on_the_ball() {
        let d = toric(&MomentRegion::ball(2, 1.0).unwrap());
        let z = [1.0 / PI.sqrt(), 0.0, 0.0, 0.0];
        let r = reeb_field(&d, &z).unwrap();
        assert_relative_eq!(r[1], TAU / PI.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(lambda_eval(&z, &r), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn reeb_field_matches_toric_angular_velocity() {
        let region = MomentRegion::ellipsoid(&[1.0, 2.0]).unwrap();
        let d = toric(&region);
        let w = [2.0 / 3.0, 2.0 / 3.0];
        let z = fiber_point(&w, &[0.4, 1.1]);
        let r = reeb_field(&d, &z).unwrap();
        let omega = reeb_angular_velocity(&TorusFiber::at(&region, &w).unwrap()).unwrap();
        for i in 0..2 {
            let (x, y) = (z[2 * i], z[2 * i + 1]);
            let theta_dot = (x * r[2 * i + 1] - y * r[2 * i]) / (x * x + y * y);
            assert!((theta_dot - omega[i]).abs() <= 1e-8);
        }
        assert_relative_eq!(omega[0], TAU, epsilon = 1e-12);
        assert_relative_eq!(omega[1], PI, epsilon = 1e-12);
    }

    #[test]
    fn off_surface_points_are_rejected() {
        let d = toric(&MomentRegion::ball(2, 1.0).unwrap());
        assert!(reeb_field(&d, &[1.0, 0.0, 0.0, 0.0]).is_err());
    }

    #[test]
    fn ball_orbits_have_period_one() {
        let d = toric(&MomentRegion::ball(2, 1.0).unwrap());
        let z0 = fiber_point(&[0.3, 0.7], &[0.2, 2.0]);
        let t = integrate_flow(&d, &z0, 1.0, &FlowOptions::default()).unwrap();
        assert!(dist(&t.end, &z0) <= 1e-8, "{}", dist(&t.end, &z0));
        assert!(t.max_drift <= 1e-7 && t.max_lambda_defect <= 1e-7);
        assert!((t.action - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn ellipsoid_axis_and_interior_orbits_close() {
        let d = toric(&MomentRegion::ellipsoid(&[1.0, 2.0]).unwrap());
        let z0 = fiber_point(&[1.0, 0.0], &[0.0, 0.0]);
        let t = integrate_flow(&d, &z0, 1.0, &FlowOptions::default()).unwrap();
        assert!(dist(&t.end, &z0) <= 1e-7);
        let z0 = fiber_point(&[2.0 / 3.0, 2.0 / 3.0], &[0.5, -0.3]);
        let t = integrate_flow(&d, &z0, 2.0, &FlowOptions::default()).unwrap();
        assert!(dist(&t.end, &z0) <= 1e-7);
        assert!((t.action - 2.0).abs() <= 1e-6);
    }

    #[test]
    fn projection_is_recorded() {
        let d = perturb(&toric(&MomentRegion::ellipsoid(&[1.0, 2.0]).unwrap()), 3, 0.02, 0.5, 3).unwrap();
        let z0 = d.project(&[0.3, 0.1, -0.2, 0.5]).unwrap();
        let opts = FlowOptions { project: true, ..FlowOptions::default() };
        let t = integrate_flow(&d, &z0, 3.0, &opts).unwrap();
        assert!(t.projected);
        assert!(t.total_correction < 1e-6);
        assert!(t.samples.iter().all(|s| (s.h - 1.0).abs() <= 1e-12));
        assert_eq!(t.csv_rows().len(), t.samples.len());
    }
}
