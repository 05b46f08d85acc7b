//! Legendrian tori carried to a star-shaped boundary, and a shooting search
//! for Reeb chords between points of such a torus.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::numerics::{self, dot, norm};
use crate::toric_reeb::LegendrianFiberTorus;

use super::{angles, fiber_point, lambda_eval, FlowOptions, FlowTracker, StarShapedDomain};

/// Endpoint distance under which a refined candidate counts as a chord.
pub const DIST_TOL: f64 = 1e-6;
/// Endpoint separation above which a chord is genuine (not a closed orbit).
pub const GENUINE_SEPARATION: f64 = 1e-4;

const TABLE_SIZE: usize = 512;
const DEFECT_SAMPLES: usize = 4096;

/// A Legendrian fiber torus radially projected onto a star-shaped boundary.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransportedTorus {
    pub source: LegendrianFiberTorus,
    /// `max |lambda(gamma')| / |gamma'|` over the sampled torus.
    pub legendrian_defect: f64,
    pub defect_samples: usize,
}

impl TransportedTorus {
    fn params_dim(&self) -> usize {
        self.source.m.len() - 1
    }

    /// The transported point at torus parameters `params`.
    pub fn point(&self, domain: &StarShapedDomain, params: &[f64]) -> Result<Vec<f64>> {
        let z = fiber_point(&self.source.fiber.w, &self.source.angles_at(params));
        domain.project(&z)
    }

    /// Derivative of the transported torus along tangent direction `k`.
    pub fn tangent(&self, domain: &StarShapedDomain, params: &[f64], k: usize) -> Result<Vec<f64>> {
        let theta = self.source.angles_at(params);
        let z = fiber_point(&self.source.fiber.w, &theta);
        let dir = &self.source.tangent_directions()[k];
        let mut dz = vec![0.0; z.len()];
        for i in 0..theta.len() {
            // d/dtheta (r cos, r sin) = (-y, x).
            dz[2 * i] = -z[2 * i + 1] * dir[i];
            dz[2 * i + 1] = z[2 * i] * dir[i];
        }
        let h = domain.hamiltonian(&z)?;
        let gh = domain.hamiltonian_gradient(&z)?;
        let a = 1.0 / h.sqrt();
        let b = dot(&gh, &dz) / (2.0 * h.powf(1.5));
        Ok(dz.iter().zip(&z).map(|(d, x)| a * d - b * x).collect())
    }
}

/// Projects `source` radially onto the boundary of `domain` and measures
/// how far the result is from Legendrian.
///
/// Radial rescaling `z -> c(z) z` multiplies `lambda` by `c^2` on vectors
/// tangent to the image, so an exactly Legendrian source stays Legendrian
/// and the reported defect is round-off.
pub fn transported_legendrian(domain: &StarShapedDomain, source: &LegendrianFiberTorus) -> Result<TransportedTorus> {
    if 2 * source.m.len() != domain.dim() {
        return Err(Error::DimensionMismatch { expected: domain.dim() / 2, got: source.m.len() });
    }
    let mut torus = TransportedTorus { source: source.clone(), legendrian_defect: 0.0, defect_samples: DEFECT_SAMPLES };
    let p = torus.params_dim();
    let mut defect: f64 = 0.0;
    for idx in 0..DEFECT_SAMPLES {
        let params: Vec<f64> = if p == 1 {
            vec![TAU * idx as f64 / DEFECT_SAMPLES as f64]
        } else {
            numerics::halton(idx as u64 + 1, p).into_iter().map(|u| TAU * u).collect()
        };
        let z = torus.point(domain, &params)?;
        for k in 0..p {
            let v = torus.tangent(domain, &params, k)?;
            defect = defect.max(lambda_eval(&z, &v).abs() / norm(&v));
        }
    }
    torus.legendrian_defect = defect;
    Ok(torus)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NumericalChord {
    pub start_param: f64,
    pub end_param: f64,
    pub start: Vec<f64>,
    pub end: Vec<f64>,
    pub period: f64,
    pub legendrian_defect: f64,
    pub surface_drift: f64,
    pub endpoint_distance: f64,
    pub genuine: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChordSearch {
    pub chords: Vec<NumericalChord>,
    pub t_max: f64,
    pub s_count: usize,
    pub t_count: usize,
    pub candidates_refined: usize,
    /// Set when nothing was found; absence is never claimed.
    pub message: Option<String>,
}

impl ChordSearch {
    pub fn minimal(&self) -> Option<&NumericalChord> {
        self.chords.first()
    }
}

/// Tabulated knot for nearest-point queries.
struct KnotTable<'a> {
    domain: &'a StarShapedDomain,
    torus: &'a TransportedTorus,
    params: Vec<f64>,
    points: Vec<Vec<f64>>,
}

impl<'a> KnotTable<'a> {
    fn new(domain: &'a StarShapedDomain, torus: &'a TransportedTorus) -> Result<Self> {
        let params: Vec<f64> = (0..TABLE_SIZE).map(|k| TAU * k as f64 / TABLE_SIZE as f64).collect();
        let points = params.iter().map(|&s| torus.point(domain, &[s])).collect::<Result<Vec<_>>>()?;
        Ok(KnotTable { domain, torus, params, points })
    }

    fn distance_at(&self, z: &[f64], s: f64) -> f64 {
        self.torus.point(self.domain, &[s]).map(|p| distance(z, &p)).unwrap_or(f64::INFINITY)
    }

    /// Distance from `z` to the knot and the parameter of the nearest point.
    fn nearest(&self, z: &[f64]) -> (f64, f64) {
        let (k, _) = self
            .points
            .iter()
            .map(|p| distance(z, p))
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("nonempty table");
        let step = TAU / TABLE_SIZE as f64;
        let center = self.params[k];
        let (s, d) = numerics::golden_section(|s| self.distance_at(z, s), center - step, center + step, 1e-13);
        (d, s.rem_euclid(TAU))
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

fn circular_gap(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

fn quiet() -> FlowOptions {
    FlowOptions { record: false, ..FlowOptions::default() }
}

/// Flows from the knot point at `s` for time `t`; returns the end point and drift.
fn shoot(domain: &StarShapedDomain, torus: &TransportedTorus, s: f64, t: f64) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let z0 = torus.point(domain, &[s])?;
    let mut tracker = FlowTracker::start(domain, &z0, t, &quiet())?;
    tracker.advance(t)?;
    let traj = tracker.finish();
    Ok((z0, traj.end, traj.max_drift))
}

/// Two-stage shooting search for Reeb chords of length at most `t_max`
/// with both ends on a transported Legendrian knot (dimension 4).
///
/// A coarse scan flows from `s_count` knot points and records the distance
/// to the knot at `t_count` times. Every local minimum below the scan
/// resolution, after the first local maximum of the distance, seeds a
/// Nelder-Mead refinement over `(s, T)`.
pub fn find_chords(
    domain: &StarShapedDomain,
    torus: &TransportedTorus,
    t_max: f64,
    grid: (usize, usize),
    exec: Execution,
) -> Result<ChordSearch> {
    if domain.dim() != 4 {
        return Err(Error::InvalidParameter(format!(
            "chord search is implemented for dimension 4 only, got {}",
            domain.dim()
        )));
    }
    let (s_count, t_count) = grid;
    if s_count == 0 || t_count < 3 || !(t_max > 0.0 && t_max.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "invalid chord search grid ({s_count}, {t_count}) or horizon {t_max}"
        )));
    }
    let table = KnotTable::new(domain, torus)?;
    let dt = t_max / t_count as f64;
    let speed = table
        .points
        .iter()
        .map(|z| super::reeb_field(domain, z).map(|r| norm(&r)))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let trigger = speed * dt;

    let starts: Vec<f64> = (0..s_count).map(|k| TAU * k as f64 / s_count as f64).collect();
    let scans = exec::map(exec, &starts, |&s| -> Result<Vec<(f64, f64)>> {
        let z0 = torus.point(domain, &[s])?;
        let mut tracker = FlowTracker::start(domain, &z0, t_max, &quiet())?;
        let mut dists = Vec::with_capacity(t_count);
        for j in 1..=t_count {
            tracker.advance(j as f64 * dt)?;
            dists.push(table.nearest(tracker.state()).0);
        }
        let mut seeds = Vec::new();
        let mut seen_max = false;
        for j in 1..t_count - 1 {
            if dists[j] > dists[j - 1] && dists[j] >= dists[j + 1] {
                seen_max = true;
            }
            if seen_max && dists[j] <= dists[j - 1] && dists[j] <= dists[j + 1] && dists[j] <= trigger {
                seeds.push((s, (j + 1) as f64 * dt));
            }
        }
        Ok(seeds)
    });
    let mut seeds = Vec::new();
    for scan in scans {
        seeds.extend(scan?);
    }

    let ds = TAU / s_count as f64;
    let refined = exec::map(exec, &seeds, |&(s0, t0)| -> Option<NumericalChord> {
        let objective = |p: &[f64]| -> f64 {
            if !(p[1] > 0.0) {
                return f64::INFINITY;
            }
            match shoot(domain, torus, p[0], p[1]) {
                Ok((_, end, _)) => table.nearest(&end).0.powi(2),
                Err(_) => f64::INFINITY,
            }
        };
        let best =
            numerics::nelder_mead(objective, &[s0, t0], &[0.25 * ds, 0.5 * dt], 1e-30, (0.01 * DIST_TOL).powi(2), 400);
        let (s, t) = (best.point[0].rem_euclid(TAU), best.point[1]);
        if t < dt {
            return None;
        }
        let (start, end, drift) = shoot(domain, torus, s, t).ok()?;
        let (d, end_param) = table.nearest(&end);
        (d <= DIST_TOL).then(|| NumericalChord {
            start_param: s,
            end_param,
            genuine: distance(&start, &end) > GENUINE_SEPARATION,
            start,
            end,
            period: t,
            legendrian_defect: torus.legendrian_defect,
            surface_drift: drift,
            endpoint_distance: d,
        })
    });

    let candidates_refined = seeds.len();
    let mut chords: Vec<NumericalChord> = refined.into_iter().flatten().collect();
    chords.sort_by(|a, b| a.period.total_cmp(&b.period).then(a.start_param.total_cmp(&b.start_param)));
    let mut unique: Vec<NumericalChord> = Vec::new();
    for c in chords {
        let duplicate = unique
            .iter()
            .any(|u| (u.period - c.period).abs() <= 1e-5 && circular_gap(u.start_param, c.start_param) <= 1e-4);
        if !duplicate {
            unique.push(c);
        }
    }
    let message = unique.is_empty().then(|| format!("no chord found up to T_max = {t_max}"));
    Ok(ChordSearch { chords: unique, t_max, s_count, t_count, candidates_refined, message })
}

/// Time for the integrated flow from the knot point at parameter `s` to
/// advance the phase `m . theta` by one full turn, found by tracking the
/// unwrapped angles and bisecting the last step.
pub fn integrated_chord_period(domain: &StarShapedDomain, torus: &LegendrianFiberTorus, s: f64) -> Result<f64> {
    let m: Vec<f64> = torus.m.iter().map(|&k| k as f64).collect();
    let z0 = domain.project(&fiber_point(&torus.fiber.w, &torus.angles_at(&[s])))?;
    let horizon = 100.0 * torus.scale.max(1.0);
    let mut tracker = FlowTracker::start(domain, &z0, horizon, &quiet())?;
    let mut theta = angles(&z0);
    let phase0 = dot(&m, &theta);
    let unwrap = |prev: &[f64], z: &[f64]| -> Vec<f64> {
        angles(z)
            .iter()
            .zip(prev)
            .map(|(a, p)| p + (a - p + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI)
            .collect()
    };
    loop {
        let t_prev = tracker.time();
        let z_prev = tracker.state().to_vec();
        let theta_prev = theta.clone();
        // Short sub-steps keep every angle increment below pi.
        tracker.advance((t_prev + 0.01 * torus.scale).min(horizon))?;
        theta = unwrap(&theta_prev, tracker.state());
        if dot(&m, &theta) - phase0 >= TAU {
            let gain = |tau: f64| -> f64 {
                if tau <= 0.0 {
                    return dot(&m, &theta_prev) - phase0 - TAU;
                }
                let mut sub = match FlowTracker::start(domain, &z_prev, tau, &quiet()) {
                    Ok(sub) => sub,
                    Err(_) => return f64::NAN,
                };
                if sub.advance(tau).is_err() {
                    return f64::NAN;
                }
                dot(&m, &unwrap(&theta_prev, sub.state())) - phase0 - TAU
            };
            let span = tracker.time() - t_prev;
            let tau = numerics::bisect(gain, 0.0, span, gain(0.0), 1e-15, 200);
            return Ok(t_prev + tau);
        }
        if tracker.time() >= horizon {
            return Err(Error::InvalidParameter(format!("phase did not complete a turn within {horizon}")));
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment_region::MomentRegion;
    use crate::starshaped_flow::{integrate_flow, perturb};
    use crate::toric_reeb::{legendrian_fiber, min_chord_period, reeb_angular_velocity};

    #[test]
    fn exact_torus_has_roundoff_defect() {
        let region = MomentRegion::ellipsoid(&[1.0, 2.0]).unwrap();
        let source = legendrian_fiber(&region, &[1, 1], 0.0).unwrap();
        let t = transported_legendrian(&StarShapedDomain::toric(&region), &source).unwrap();
        assert!(t.legendrian_defect <= 1e-10, "{}", t.legendrian_defect);
        let z = t.point(&StarShapedDomain::toric(&region), &[0.3]).unwrap();
        assert!((StarShapedDomain::toric(&region).hamiltonian(&z).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn radial_transport_stays_legendrian_under_perturbation() {
        let region = MomentRegion::ellipsoid(&[1.0, 2.0]).unwrap();
        let source = legendrian_fiber(&region, &[1, 1], 0.0).unwrap();
        for eta in [0.01, 0.02, 0.05] {
            let d = perturb(&StarShapedDomain::toric(&region), 17, eta, 0.5, 3).unwrap();
            let t = transported_legendrian(&d, &source).unwrap();
            assert!(t.legendrian_defect <= 1e-10, "eta {eta}: {}", t.legendrian_defect);
        }
    }

    #[test]
    fn tangent_matches_differences() {
        let region = MomentRegion::ellipsoid(&[1.0, 2.0]).unwrap();
        let d = perturb(&StarShapedDomain::toric(&region), 5, 0.05, 0.5, 3).unwrap();
        let t = transported_legendrian(&d, &legendrian_fiber(&region, &[1, 2], 0.7).unwrap()).unwrap();
        let h = 1e-6;
        let a = t.tangent(&d, &[1.1], 0).unwrap();
        let p = t.point(&d, &[1.1 + h]).unwrap();
        let q = t.point(&d, &[1.1 - h]).unwrap();
        for i in 0..4 {
            assert!((a[i] - (p[i] - q[i]) / (2.0 * h)).abs() < 1e-7);
        }
    }

    #[test]
    fn integrated_period_matches_closed_form() {
        let region = MomentRegion::ellipsoid(&[1.0, 2.0]).unwrap();
        let d = StarShapedDomain::toric(&region);
        for m in [[1i64, 1], [1, 2], [3, 1]] {
            let torus = legendrian_fiber(&region, &m, 0.2).unwrap();
            let closed = min_chord_period(&torus).unwrap().period;
            let numeric = integrated_chord_period(&d, &torus, 0.9).unwrap();
            assert!((closed - numeric).abs() <= 1e-6, "{m:?}: {closed} vs {numeric}");
        }
    }

    #[test]
    fn fiber_trajectory_follows_linear_angle_flow() {
        let region = MomentRegion::ellipsoid(&[1.0, 2.0]).unwrap();
        let d = StarShapedDomain::toric(&region);
        let torus = legendrian_fiber(&region, &[1, 1], 0.0).unwrap();
        let omega = reeb_angular_velocity(&torus.fiber).unwrap();
        let theta0 = [0.3, 1.7];
        let z0 = fiber_point(&torus.fiber.w, &theta0);
        let traj = integrate_flow(&d, &z0, 2.0, &FlowOptions::default()).unwrap();
        for sample in &traj.samples {
            let th = angles(&sample.z);
            for i in 0..2 {
                let expected = theta0[i] + omega[i] * sample.t;
                let gap = (th[i] - expected + std::f64::consts::PI).rem_euclid(TAU) - std::f64::consts::PI;
                assert!(gap.abs() <= 1e-6, "t = {}: {gap}", sample.t);
            }
        }
    }

    #[test]
    fn chord_search_on_the_ball() {
        let region = MomentRegion::ball(2, 1.0).unwrap();
        let d = StarShapedDomain::toric(&region);
        let t = transported_legendrian(&d, &legendrian_fiber(&region, &[1, 1], 0.0).unwrap()).unwrap();
        let found = find_chords(&d, &t, 1.2, (4, 120), Execution::default()).unwrap();
        let c = found.minimal().expect("a chord");
        assert!((c.period - 0.5).abs() <= 1e-6, "{}", c.period);
        assert!(c.genuine);
        assert!(c.endpoint_distance <= DIST_TOL);
    }

    #[test]
    fn chord_search_rejects_higher_dimension() {
        let region = MomentRegion::ball(3, 1.0).unwrap();
        let d = StarShapedDomain::toric(&region);
        let t = transported_legendrian(&d, &legendrian_fiber(&region, &[1, 1, 1], 0.0).unwrap()).unwrap();
        assert!(find_chords(&d, &t, 1.0, (4, 50), Execution::default()).is_err());
    }
}
