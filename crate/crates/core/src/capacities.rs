//! Gromov width, cube and Lagrangian capacities, minimal orbit period and
//! the gap between them, with a verdict report for the identities relating
//! them on monotone toric domains.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::moment_region::{self, MomentRegion, MonotonicityClass, MonotonicityReport};
use crate::numerics;
use crate::toric_reeb::{self, ChordSupremum, RationalFiber};

/// Tolerance for analytic cross-checks between independent pipelines.
pub const TOL_CLAIM: f64 = 1e-6;
/// Target accuracy of the local refinement in [`gromov_width`].
pub const GROMOV_REFINE_TOL: f64 = 1e-9;
pub const DEFAULT_ORBIT_HEIGHT: i64 = 50;
pub const DEFAULT_CHORD_HEIGHT: i64 = 20;
/// Ray samples for [`gromov_width`] in dimension 4.
pub const DEFAULT_GROMOV_GRID: usize = 10_000;

const REFINE_STARTS: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GromovWidth {
    pub value: f64,
    /// Boundary point minimizing `w_1 + ... + w_n`.
    pub witness: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LagrangianCapacity {
    pub value: f64,
    /// True in dimension 4, where the identification with the cube
    /// capacity needs no extra regularity assumption.
    pub assumption_free: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinOrbitPeriod {
    pub period: f64,
    pub witness: RationalFiber,
    pub height: i64,
    pub fibers_found: usize,
    pub skipped_directions: usize,
    /// The enumeration is an upper bound for `A_min`; it is trusted as a
    /// ground truth only on strictly monotone regions.
    pub strictly_monotone: bool,
}

fn gate(region: &MomentRegion, exec: Execution, what: &'static str) -> Result<MonotonicityReport> {
    let report = region.classify_monotonicity(moment_region::default_samples(region.dim()), exec)?;
    if !report.class.is_monotone() {
        return Err(Error::NotMonotone(what));
    }
    Ok(report)
}

/// Largest `R` with `R * simplex` inside `Omega`, as the minimum of
/// `w_1 + ... + w_n` over the boundary.
///
/// `grid` rays are scanned (evenly spaced in dimension 4, Halton points
/// otherwise, always including the axes), and the best few are refined by
/// coordinate descent on the ray angles.
pub fn gromov_width(region: &MomentRegion, grid: usize, exec: Execution) -> Result<GromovWidth> {
    gate(region, exec, "gromov_width")?;
    gromov_width_unchecked(region, grid, exec)
}

fn gromov_width_unchecked(region: &MomentRegion, grid: usize, exec: Execution) -> Result<GromovWidth> {
    let n = region.dim();
    if grid < DEFAULT_GROMOV_GRID {
        return Err(Error::InvalidParameter(format!(
            "gromov_width needs at least {DEFAULT_GROMOV_GRID} rays, got {grid}"
        )));
    }
    let mut rays: Vec<Vec<f64>> = if n == 2 {
        (0..grid).map(|k| vec![k as f64 / (grid - 1) as f64 * FRAC_PI_2]).collect()
    } else {
        (1..=grid as u64).map(|i| numerics::halton_angles(i, n)).collect()
    };
    for axis in 0..n {
        // Angles of e_axis: pi/2 up to the axis, then 0.
        rays.push((0..n - 1).map(|k| if k < axis { FRAC_PI_2 } else { 0.0 }).collect());
    }

    let sum_at = |angles: &[f64]| -> f64 {
        let d = numerics::orthant_direction(angles);
        region.boundary_point(&d).map(|w| w.iter().sum()).unwrap_or(f64::INFINITY)
    };
    let values = exec::map(exec, &rays, |a| sum_at(a));
    let mut order: Vec<usize> = (0..rays.len()).filter(|&i| values[i].is_finite()).collect();
    if order.is_empty() {
        return Err(Error::InvalidParameter("no ray reached the boundary".into()));
    }
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));

    let spacing = FRAC_PI_2 / (grid as f64).powf(1.0 / (n - 1) as f64);
    let starts: Vec<usize> = order.iter().take(REFINE_STARTS).cloned().collect();
    let refined = exec::map(exec, &starts, |&i| descend(&sum_at, rays[i].clone(), values[i], 2.0 * spacing));
    let (angles, value) = refined.into_iter().min_by(|a, b| a.1.total_cmp(&b.1)).expect("at least one start");
    let witness = region.boundary_point(&numerics::orthant_direction(&angles))?;
    Ok(GromovWidth { value, witness })
}

/// Coordinate descent with golden-section line searches on shrinking
/// brackets, clamped to `[0, pi/2]`.
fn descend<F: Fn(&[f64]) -> f64>(f: &F, mut x: Vec<f64>, mut fx: f64, mut radius: f64) -> (Vec<f64>, f64) {
    for _ in 0..200 {
        let before = fx;
        for i in 0..x.len() {
            let lo = (x[i] - radius).max(0.0);
            let hi = (x[i] + radius).min(FRAC_PI_2);
            let mut probe = x.clone();
            let mut line = |t: f64| {
                probe[i] = t;
                f(&probe)
            };
            let (t, ft) = numerics::golden_section(&mut line, lo, hi, 1e-13);
            let (t, ft) =
                [(t, ft), (lo, line(lo)), (hi, line(hi))].into_iter().min_by(|a, b| a.1.total_cmp(&b.1)).unwrap();
            if ft < fx {
                x[i] = t;
                fx = ft;
            }
        }
        let gain = before - fx;
        if gain <= 0.1 * GROMOV_REFINE_TOL * GROMOV_REFINE_TOL {
            radius *= 0.5;
            if radius < 1e-12 {
                break;
            }
        }
    }
    (x, fx)
}

/// The `t` with `G(t, ..., t) = 0`: the largest cube `[0, t]^n` inside `Omega`.
pub fn cube_capacity(region: &MomentRegion) -> Result<f64> {
    gate(region, Execution::default(), "cube_capacity")?;
    cube_capacity_unchecked(region)
}

fn cube_capacity_unchecked(region: &MomentRegion) -> Result<f64> {
    let w = region.boundary_point(&vec![1.0; region.dim()])?;
    Ok(w[0])
}

/// The Lagrangian capacity, identified with the cube capacity.
pub fn lagrangian_capacity(region: &MomentRegion) -> Result<LagrangianCapacity> {
    Ok(LagrangianCapacity { value: cube_capacity(region)?, assumption_free: region.dim() == 2 })
}

/// Smallest closed-orbit period over rational fibers of height at most
/// `height`.
pub fn min_orbit_period(region: &MomentRegion, height: i64, exec: Execution) -> Result<MinOrbitPeriod> {
    let report = gate(region, exec, "min_orbit_period")?;
    min_orbit_period_unchecked(region, height, exec, report.class)
}

fn min_orbit_period_unchecked(
    region: &MomentRegion,
    height: i64,
    exec: Execution,
    class: MonotonicityClass,
) -> Result<MinOrbitPeriod> {
    if height < 20 {
        return Err(Error::InvalidParameter(format!("height must be >= 20, got {height}")));
    }
    let enumeration = toric_reeb::enumerate_rational_fibers(region, height, exec)?;
    let witness =
        enumeration.minimum().cloned().ok_or_else(|| Error::InvalidParameter("no rational fiber found".into()))?;
    Ok(MinOrbitPeriod {
        period: witness.period,
        witness,
        height,
        fibers_found: enumeration.fibers.len(),
        skipped_directions: enumeration.skipped.len(),
        strictly_monotone: class == MonotonicityClass::StrictlyMonotone,
    })
}

/// `c_Gr - c_cube`, the largest admissible gap.
pub fn kappa_gap(region: &MomentRegion, exec: Execution) -> Result<f64> {
    gate(region, exec, "kappa_gap")?;
    Ok(gromov_width_unchecked(region, DEFAULT_GROMOV_GRID, exec)?.value - cube_capacity_unchecked(region)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Pass,
    Fail,
    NotApplicable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub detail: String,
}

impl Verdict {
    fn not_applicable(tolerance: f64, why: impl Into<String>) -> Self {
        Verdict { status: VerdictStatus::NotApplicable, residual: None, tolerance, detail: why.into() }
    }

    fn check(pass: bool, residual: f64, tolerance: f64, detail: String) -> Self {
        Verdict {
            status: if pass { VerdictStatus::Pass } else { VerdictStatus::Fail },
            residual: Some(residual),
            tolerance,
            detail,
        }
    }
}

/// Tolerances under which a report was computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    pub claim: f64,
    pub root: f64,
    pub axis: f64,
    pub monotonicity: f64,
    pub parallel_angle: f64,
    pub genuine_chord: f64,
    pub gromov_refine: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            claim: TOL_CLAIM,
            root: moment_region::TOL_ROOT,
            axis: moment_region::TOL_AXIS,
            monotonicity: moment_region::TOL_MONO,
            parallel_angle: toric_reeb::ANGLE_TOL,
            genuine_chord: toric_reeb::GENUINE_TOL,
            gromov_refine: GROMOV_REFINE_TOL,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    pub orbit_height: i64,
    pub chord_height: i64,
    pub gromov_grid: usize,
    pub tol_claim: f64,
    pub exec: Execution,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            orbit_height: DEFAULT_ORBIT_HEIGHT,
            chord_height: DEFAULT_CHORD_HEIGHT,
            gromov_grid: DEFAULT_GROMOV_GRID,
            tol_claim: TOL_CLAIM,
            exec: Execution::default(),
        }
    }
}

/// Capacities, minimal periods and verdicts for one region. Quantities are
/// `None` when the region is not monotone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapacityReport {
    pub label: String,
    pub dim: usize,
    pub c_gromov: Option<f64>,
    pub c_cube: Option<f64>,
    pub c_lagrangian: Option<f64>,
    pub lagrangian_assumption_free: bool,
    pub a_min_orbit: Option<f64>,
    pub sup_chord_min: Option<f64>,
    pub kappa: Option<f64>,
    pub monotonicity: MonotonicityReport,
    pub gromov_witness: Option<Vec<f64>>,
    pub orbit_witness: Option<RationalFiber>,
    pub chord_witness_m: Option<Vec<i64>>,
    pub orbit_height: i64,
    pub chord_height: i64,
    pub skipped_directions: usize,
    pub tolerances: Tolerances,
    pub verdicts: BTreeMap<String, Verdict>,
}

impl CapacityReport {
    /// True when no applicable verdict failed.
    pub fn all_applicable_pass(&self) -> bool {
        self.verdicts.values().all(|v| v.status != VerdictStatus::Fail)
    }
}

pub const VERDICT_NAMES: [&str; 5] =
    ["min_orbit_matches_gromov", "chord_sup_matches_cube", "chord_gap", "concave_identity", "counterexample_violation"];

/// Computes every capacity and period for `region` and checks the
/// identities between them.
pub fn verify_claims(region: &MomentRegion, opts: &VerifyOptions) -> Result<CapacityReport> {
    let exec = opts.exec;
    let tol = opts.tol_claim;
    let n = region.dim();
    let mono = region.classify_monotonicity(moment_region::default_samples(n), exec)?;
    let tolerances = Tolerances { claim: tol, ..Tolerances::default() };

    if !mono.class.is_monotone() {
        let why = "region is not monotone";
        let verdicts = VERDICT_NAMES.iter().map(|name| (name.to_string(), Verdict::not_applicable(tol, why))).collect();
        return Ok(CapacityReport {
            label: region.label().to_string(),
            dim: n,
            c_gromov: None,
            c_cube: None,
            c_lagrangian: None,
            lagrangian_assumption_free: n == 2,
            a_min_orbit: None,
            sup_chord_min: None,
            kappa: None,
            monotonicity: mono,
            gromov_witness: None,
            orbit_witness: None,
            chord_witness_m: None,
            orbit_height: opts.orbit_height,
            chord_height: opts.chord_height,
            skipped_directions: 0,
            tolerances,
            verdicts,
        });
    }

    let strict = mono.class == MonotonicityClass::StrictlyMonotone;
    let gromov = gromov_width_unchecked(region, opts.gromov_grid, exec)?;
    let cube = cube_capacity_unchecked(region)?;
    let orbit = min_orbit_period_unchecked(region, opts.orbit_height, exec, mono.class)?;
    let chords: ChordSupremum = toric_reeb::sup_chord_over_fibers(region, opts.chord_height, exec)?;
    let kappa = gromov.value - cube;
    let a_min = orbit.period;
    let sup = chords.value;

    let mut verdicts = BTreeMap::new();
    let strict_only = "requires a strictly monotone region";

    verdicts.insert(
        "min_orbit_matches_gromov".to_string(),
        if strict {
            let r = (a_min - gromov.value).abs();
            Verdict::check(r <= tol, r, tol, format!("A_min = {a_min}, c_Gr = {}", gromov.value))
        } else {
            Verdict::not_applicable(tol, strict_only)
        },
    );

    let r = (sup - cube).abs();
    verdicts.insert(
        "chord_sup_matches_cube".to_string(),
        Verdict::check(r <= tol, r, tol, format!("sup chord = {sup}, c_cube = {cube}")),
    );

    verdicts.insert(
        "chord_gap".to_string(),
        if strict {
            // Margin between A_min and the chord supremum must cover kappa.
            let r = sup + kappa - a_min;
            Verdict::check(
                kappa > tol && r <= tol,
                r,
                tol,
                format!("sup chord = {sup} < A_min = {a_min} with kappa = {kappa}"),
            )
        } else {
            Verdict::not_applicable(tol, strict_only)
        },
    );

    verdicts.insert(
        "concave_identity".to_string(),
        if region.is_symmetric_concave() {
            let r = (n as f64 * cube - gromov.value).abs();
            Verdict::check(r <= tol, r, tol, format!("{n} * c_cube = {}, c_Gr = {}", n as f64 * cube, gromov.value))
        } else {
            Verdict::not_applicable(tol, "only checked for permutation-symmetric concave builders")
        },
    );

    let observed = sup >= a_min;
    let expected = region.is_counterexample();
    verdicts.insert(
        "counterexample_violation".to_string(),
        Verdict::check(
            observed == expected,
            a_min - sup,
            tol,
            format!("violation observed = {observed}, expected = {expected}"),
        ),
    );

    Ok(CapacityReport {
        label: region.label().to_string(),
        dim: n,
        c_gromov: Some(gromov.value),
        c_cube: Some(cube),
        c_lagrangian: Some(cube),
        lagrangian_assumption_free: n == 2,
        a_min_orbit: Some(a_min),
        sup_chord_min: Some(sup),
        kappa: Some(kappa),
        monotonicity: mono,
        gromov_witness: Some(gromov.witness),
        skipped_directions: orbit.skipped_directions,
        orbit_witness: Some(orbit.witness),
        chord_witness_m: Some(chords.witness_m),
        orbit_height: opts.orbit_height,
        chord_height: opts.chord_height,
        tolerances,
        verdicts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn ex() -> Execution {
        Execution::default()
    }

    #[test]
    fn gromov_width_examples() {
        let g = gromov_width(&MomentRegion::ball(2, 1.0).unwrap(), DEFAULT_GROMOV_GRID, ex()).unwrap();
        assert_relative_eq!(g.value, 1.0, epsilon = 1e-9);
        let g = gromov_width(&MomentRegion::ellipsoid(&[1.0, 2.0]).unwrap(), DEFAULT_GROMOV_GRID, ex()).unwrap();
        assert_relative_eq!(g.value, 1.0, epsilon = 1e-9);
        assert_relative_eq!(g.witness[0], 1.0, epsilon = 1e-9);
        let g = gromov_width(&MomentRegion::concave_sqrt(2, 1.0).unwrap(), DEFAULT_GROMOV_GRID, ex()).unwrap();
        assert_relative_eq!(g.value, 0.5, epsilon = 1e-9);
        assert_relative_eq!(g.witness[0], 0.25, epsilon = 1e-5);
    }

    #[test]
    fn gromov_width_three_dimensional() {
        let g = gromov_width(&MomentRegion::concave_sqrt(3, 1.0).unwrap(), 20_000, ex()).unwrap();
        assert_relative_eq!(g.value, 1.0 / 3.0, epsilon = 1e-9);
        let g = gromov_width(&MomentRegion::ellipsoid(&[2.0, 1.0, 3.0]).unwrap(), 20_000, ex()).unwrap();
        assert_relative_eq!(g.value, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn gates_reject_non_monotone() {
        let skew = MomentRegion::skewed_quadric(2, 0.5).unwrap();
        assert!(matches!(gromov_width(&skew, DEFAULT_GROMOV_GRID, ex()), Err(Error::NotMonotone(_))));
        assert!(matches!(cube_capacity(&skew), Err(Error::NotMonotone(_))));
        assert!(matches!(kappa_gap(&skew, ex()), Err(Error::NotMonotone(_))));
        assert!(gromov_width(&MomentRegion::ball(2, 1.0).unwrap(), 100, ex()).is_err());
    }

    #[test]
    fn cube_and_lagrangian_examples() {
        assert_relative_eq!(cube_capacity(&MomentRegion::ball(2, 1.0).unwrap()).unwrap(), 0.5, epsilon = 1e-12);
        assert_relative_eq!(
            cube_capacity(&MomentRegion::ellipsoid(&[1.0, 2.0]).unwrap()).unwrap(),
            2.0 / 3.0,
            epsilon = 1e-12
        );
        for p in [1.0, 2.0, 4.0, 8.0, 16.0] {
            let r = MomentRegion::convex_power(2, 1.0, p).unwrap();
            assert_relative_eq!(cube_capacity(&r).unwrap(), 2f64.powf(-1.0 / p), epsilon = 1e-12);
        }
        let l = lagrangian_capacity(&MomentRegion::convex_power(2, 3.0, 16.0).unwrap()).unwrap();
        assert_relative_eq!(l.value, 3.0 * 2f64.powf(-1.0 / 16.0), epsilon = 1e-11);
        assert!(l.assumption_free);
        let l3 = lagrangian_capacity(&MomentRegion::ball(3, 1.0).unwrap()).unwrap();
        assert!(!l3.assumption_free);
        assert_relative_eq!(l3.value, 1.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn min_orbit_examples() {
        let r = min_orbit_period(&MomentRegion::ball(2, 1.0).unwrap(), 20, ex()).unwrap();
        assert_relative_eq!(r.period, 1.0, epsilon = 1e-12);
        let r = min_orbit_period(&MomentRegion::ellipsoid(&[1.0, 2.0]).unwrap(), 20, ex()).unwrap();
        assert_relative_eq!(r.period, 1.0, epsilon = 1e-12);
        assert_eq!(r.witness.m, vec![1, 0]);
        assert!(r.strictly_monotone);
        assert!(min_orbit_period(&MomentRegion::ball(2, 1.0).unwrap(), 10, ex()).is_err());
    }

    #[test]
    fn kappa_examples() {
        assert_relative_eq!(
            kappa_gap(&MomentRegion::ellipsoid(&[1.0, 2.0]).unwrap(), ex()).unwrap(),
            1.0 / 3.0,
            epsilon = 1e-9
        );
        assert_relative_eq!(kappa_gap(&MomentRegion::ball(2, 1.0).unwrap(), ex()).unwrap(), 0.5, epsilon = 1e-9);
        assert_relative_eq!(
            kappa_gap(&MomentRegion::convex_power(2, 1.0, 16.0).unwrap(), ex()).unwrap(),
            1.0 - 2f64.powf(-1.0 / 16.0),
            epsilon = 1e-9
        );
    }

    #[test]
    fn verify_ellipsoid() {
        let r = verify_claims(&MomentRegion::ellipsoid(&[1.0, 2.0]).unwrap(), &VerifyOptions::default()).unwrap();
        assert_eq!(r.verdicts["chord_gap"].status, VerdictStatus::Pass);
        assert_eq!(r.verdicts["min_orbit_matches_gromov"].status, VerdictStatus::Pass);
        assert_eq!(r.verdicts["chord_sup_matches_cube"].status, VerdictStatus::Pass);
        assert_eq!(r.verdicts["concave_identity"].status, VerdictStatus::NotApplicable);
        assert_eq!(r.verdicts["counterexample_violation"].status, VerdictStatus::Pass);
        assert_relative_eq!(r.kappa.unwrap(), 1.0 / 3.0, epsilon = 1e-9);
        assert!(r.all_applicable_pass());
    }

    #[test]
    fn verify_concave_identity() {
        let r = verify_claims(&MomentRegion::concave_sqrt(2, 1.0).unwrap(), &VerifyOptions::default()).unwrap();
        assert_eq!(r.verdicts["concave_identity"].status, VerdictStatus::Pass);
        assert!(r.all_applicable_pass());
    }

    #[test]
    fn verify_non_monotone_is_not_applicable() {
        let r = verify_claims(&MomentRegion::skewed_quadric(2, 0.5).unwrap(), &VerifyOptions::default()).unwrap();
        assert!(r.verdicts.values().all(|v| v.status == VerdictStatus::NotApplicable));
        assert!(r.c_gromov.is_none() && r.kappa.is_none());
    }
}
