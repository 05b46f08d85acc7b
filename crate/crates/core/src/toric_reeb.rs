//! Reeb dynamics on the boundary of a toric domain in action-angle form.
//!
//! Over a boundary point `w` of the moment image with outward normal `nu`,
//! the Reeb field is the linear flow `theta' = 2 pi nu~ / (w . nu~)` on the
//! torus `mu^{-1}(w)`, where `nu~` zeroes the entries of `nu` at vanishing
//! coordinates of `w`. Rational directions of `nu~` carry closed orbits;
//! tori `{m . theta = c}` inside fibers with `w` parallel to `m` are
//! Legendrian.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::moment_region::{self, tilde_normal, MomentRegion, TOL_AXIS};
use crate::numerics::{self, angle_defect, dot, norm};

/// Angular tolerance for "nu~ is parallel to m".
pub const ANGLE_TOL: f64 = 1e-9;
/// Largest lattice height tried when recognizing a rational direction.
pub const DEFAULT_DETECT_HEIGHT: i64 = 1000;
/// Tolerance of the lattice-membership test deciding chord genuineness.
pub const GENUINE_TOL: f64 = 1e-9;
/// Rays sampled on each two-dimensional face during fiber enumeration.
pub const FACE_SCAN_SAMPLES: usize = 4096;

/// A Lagrangian torus fiber `mu^{-1}(w)` over a boundary point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusFiber {
    pub w: Vec<f64>,
    pub nu: Vec<f64>,
    pub nu_tilde: Vec<f64>,
    /// Primitive integer vector parallel to `nu_tilde`, when one exists.
    pub primitive_dir: Option<Vec<i64>>,
    pub n_positive: usize,
}

impl TorusFiber {
    /// The fiber over `w`, recognizing rational `nu~` up to
    /// [`DEFAULT_DETECT_HEIGHT`].
    pub fn at(region: &MomentRegion, w: &[f64]) -> Result<Self> {
        let mut fiber = Self::bare(region, w)?;
        fiber.primitive_dir = primitive_direction(&fiber.nu_tilde, DEFAULT_DETECT_HEIGHT);
        Ok(fiber)
    }

    fn bare(region: &MomentRegion, w: &[f64]) -> Result<Self> {
        let nu = region.outward_normal(w)?;
        let nu_tilde = tilde_normal(w, &nu);
        if norm(&nu_tilde) == 0.0 {
            return Err(Error::DegenerateNormal(w.to_vec()));
        }
        Ok(TorusFiber {
            n_positive: w.iter().filter(|&&x| x > TOL_AXIS).count(),
            w: w.to_vec(),
            nu,
            nu_tilde,
            primitive_dir: None,
        })
    }

    fn with_direction(region: &MomentRegion, w: &[f64], m: &[i64]) -> Result<Self> {
        let mut fiber = Self::bare(region, w)?;
        fiber.primitive_dir = Some(m.to_vec());
        Ok(fiber)
    }

    /// `w . nu~`.
    pub fn pairing(&self) -> f64 {
        dot(&self.w, &self.nu_tilde)
    }
}

/// The primitive integer vector parallel to `v` (within [`ANGLE_TOL`]) with
/// entries bounded by `max_height`, if any.
///
/// Entries whose share of `|v|` is below the angular tolerance are
/// treated as zero.
pub fn primitive_direction(v: &[f64], max_height: i64) -> Option<Vec<i64>> {
    let size = norm(v);
    if size == 0.0 || !size.is_finite() {
        return None;
    }
    let cleaned: Vec<f64> = v.iter().map(|&x| if x.abs() <= ANGLE_TOL * size { 0.0 } else { x }).collect();
    let smallest = cleaned.iter().filter(|x| **x != 0.0).map(|x| x.abs()).fold(f64::INFINITY, f64::min);
    for k in 1..=max_height {
        let factor = k as f64 / smallest;
        let cand: Vec<f64> = cleaned.iter().map(|x| (x * factor).round()).collect();
        if cand.iter().any(|c| c.abs() > max_height as f64) {
            return None;
        }
        if angle_defect(&cand, &cleaned) <= ANGLE_TOL {
            return Some(cand.iter().map(|&c| c as i64).collect());
        }
    }
    None
}

/// Angular velocity `2 pi nu~ / (w . nu~)` of the Reeb flow on the fiber.
pub fn reeb_angular_velocity(fiber: &TorusFiber) -> Result<Vec<f64>> {
    let pairing = fiber.pairing();
    if !(pairing > 1e-14 * norm(&fiber.w) * norm(&fiber.nu_tilde)) {
        return Err(Error::DegeneratePairing(pairing));
    }
    Ok(fiber.nu_tilde.iter().map(|x| TAU * x / pairing).collect())
}

/// Period `w . m` of the closed orbits foliating a rational fiber.
pub fn closed_orbit_period(fiber: &TorusFiber) -> Option<f64> {
    fiber.primitive_dir.as_ref().map(|m| fiber.w.iter().zip(m).map(|(w, &k)| w * k as f64).sum())
}

/// How an enumerated fiber was located.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiberKind {
    /// All nonzero coordinates but one vanish.
    Axis,
    /// An isolated root of the normal-direction equation.
    Isolated,
    /// A sampled member of a boundary arc on which `nu~` stays parallel to
    /// `m`; the member with the smallest period is kept.
    Family,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RationalFiber {
    pub m: Vec<i64>,
    pub period: f64,
    pub kind: FiberKind,
    pub fiber: TorusFiber,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkippedDirection {
    pub m: Vec<i64>,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FiberEnumeration {
    pub height: i64,
    /// Sorted by `m` (lexicographically), then by period.
    pub fibers: Vec<RationalFiber>,
    pub skipped: Vec<SkippedDirection>,
}

impl FiberEnumeration {
    /// Fiber with the smallest period; ties go to the lexicographically
    /// smallest `m`.
    pub fn minimum(&self) -> Option<&RationalFiber> {
        self.fibers.iter().min_by(|a, b| a.period.total_cmp(&b.period).then_with(|| a.m.cmp(&b.m)))
    }
}

/// Nonnegative primitive integer vectors with sup-norm at most `height`, in
/// lexicographic order.
pub fn primitive_vectors(n: usize, height: i64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    let mut current = vec![0i64; n];
    loop {
        if current.iter().any(|&x| x != 0) {
            let g = current.iter().fold(0u64, |g, &x| numerics::gcd(g, x as u64));
            if g == 1 {
                out.push(current.clone());
            }
        }
        // Odometer increment from the last coordinate.
        let mut i = n;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if current[i] < height {
                current[i] += 1;
                for c in &mut current[i + 1..] {
                    *c = 0;
                }
                break;
            }
        }
    }
}

struct FaceSample {
    phi: f64,
    w: Vec<f64>,
    nu: Vec<f64>,
}

/// Boundary samples on the two-dimensional face spanned by `e_i, e_j`.
struct FaceScan {
    i: usize,
    j: usize,
    samples: Vec<Option<FaceSample>>,
}

impl FaceScan {
    fn new(region: &MomentRegion, i: usize, j: usize, count: usize, exec: Execution) -> Self {
        let phis: Vec<f64> = (0..count).map(|k| (k as f64 + 0.5) / count as f64 * FRAC_PI_2).collect();
        let samples = exec::map(exec, &phis, |&phi| face_sample(region, i, j, phi).ok());
        FaceScan { i, j, samples }
    }
}

fn face_direction(n: usize, i: usize, j: usize, phi: f64) -> Vec<f64> {
    let mut d = vec![0.0; n];
    d[i] = phi.cos();
    d[j] = phi.sin();
    d
}

fn face_sample(region: &MomentRegion, i: usize, j: usize, phi: f64) -> Result<FaceSample> {
    let w = region.boundary_point(&face_direction(region.dim(), i, j, phi))?;
    let nu = region.gradient(&w);
    Ok(FaceSample { phi, w, nu })
}

fn as_f64(m: &[i64]) -> Vec<f64> {
    m.iter().map(|&k| k as f64).collect()
}

fn period_of(w: &[f64], m: &[i64]) -> f64 {
    w.iter().zip(m).map(|(x, &k)| x * k as f64).sum()
}

fn restrict(v: &[f64], support: &[usize]) -> Vec<f64> {
    support.iter().map(|&i| v[i]).collect()
}

/// Locates the fibers whose modified normal is parallel to `m`.
fn fibers_for_direction(
    region: &MomentRegion,
    m: &[i64],
    scans: &BTreeMap<(usize, usize), FaceScan>,
) -> std::result::Result<Vec<RationalFiber>, String> {
    let n = region.dim();
    let support: Vec<usize> = (0..n).filter(|&i| m[i] != 0).collect();
    let mut found = Vec::new();
    let mut notes = Vec::new();

    match support.len() {
        1 => {
            let i = support[0];
            let mut e = vec![0.0; n];
            e[i] = 1.0;
            match region.boundary_point(&e).and_then(|w| TorusFiber::with_direction(region, &w, m)) {
                Ok(fiber) => {
                    found.push(RationalFiber { m: m.to_vec(), period: fiber.w[i], kind: FiberKind::Axis, fiber })
                }
                Err(e) => notes.push(format!("axis intercept failed: {e}")),
            }
            // Interior points of a 2-face whose normal is flat in the other
            // coordinate also carry orbits parallel to e_i.
            for scan in scans.values().filter(|s| s.i == i || s.j == i) {
                let other = if scan.i == i { scan.j } else { scan.i };
                let target = [if scan.i == i { 1.0 } else { 0.0 }, if scan.j == i { 1.0 } else { 0.0 }];
                let flags: Vec<bool> = scan
                    .samples
                    .iter()
                    .map(|s| {
                        s.as_ref().is_some_and(|s| {
                            s.w[other] > TOL_AXIS && angle_defect(&[s.nu[scan.i], s.nu[scan.j]], &target) <= ANGLE_TOL
                        })
                    })
                    .collect();
                collect_families(region, m, scan, &flags, &mut found);
            }
        }
        2 => {
            let scan = &scans[&(support[0], support[1])];
            let target = [m[scan.i] as f64, m[scan.j] as f64];
            let cross = |nu: &[f64]| {
                let a = [nu[scan.i], nu[scan.j]];
                (a[0] * target[1] - a[1] * target[0]) / (norm(&a) * norm(&target))
            };
            let parallel = |nu: &[f64]| angle_defect(&[nu[scan.i], nu[scan.j]], &target) <= ANGLE_TOL;
            let flags: Vec<bool> = scan.samples.iter().map(|s| s.as_ref().is_some_and(|s| parallel(&s.nu))).collect();
            collect_families(region, m, scan, &flags, &mut found);

            for k in 0..scan.samples.len().saturating_sub(1) {
                let (Some(a), Some(b)) = (&scan.samples[k], &scan.samples[k + 1]) else {
                    continue;
                };
                if flags[k] || flags[k + 1] {
                    continue;
                }
                let (ca, cb) = (cross(&a.nu), cross(&b.nu));
                if !(ca.is_finite() && cb.is_finite()) || (ca < 0.0) == (cb < 0.0) {
                    continue;
                }
                let eval = |phi: f64| -> f64 {
                    face_sample(region, scan.i, scan.j, phi).map(|s| cross(&s.nu)).unwrap_or(f64::NAN)
                };
                let phi = numerics::bisect(eval, a.phi, b.phi, ca, 1e-15, 80);
                match face_sample(region, scan.i, scan.j, phi) {
                    Ok(s) if parallel(&s.nu) => match TorusFiber::with_direction(region, &s.w, m) {
                        Ok(fiber) => found.push(RationalFiber {
                            m: m.to_vec(),
                            period: period_of(&fiber.w, m),
                            kind: FiberKind::Isolated,
                            fiber,
                        }),
                        Err(e) => notes.push(format!("root at phi={phi}: {e}")),
                    },
                    Ok(s) => notes.push(format!(
                        "sign change near phi={phi} did not converge (angle defect {:e})",
                        angle_defect(&restrict(&s.nu, &support), &as_f64(&restrict_i(m, &support)))
                    )),
                    Err(e) => notes.push(format!("root at phi={phi}: {e}")),
                }
            }
        }
        _ => {
            for w in lagrange_roots(region, m, &support) {
                match TorusFiber::with_direction(region, &w, m) {
                    Ok(fiber) => found.push(RationalFiber {
                        m: m.to_vec(),
                        period: period_of(&fiber.w, m),
                        kind: FiberKind::Isolated,
                        fiber,
                    }),
                    Err(e) => notes.push(e.to_string()),
                }
            }
        }
    }

    if found.is_empty() {
        let mut reason = "no boundary point with modified normal parallel to m".to_string();
        if !notes.is_empty() {
            reason.push_str("; ");
            reason.push_str(&notes.join("; "));
        }
        return Err(reason);
    }
    Ok(found)
}

fn restrict_i(m: &[i64], support: &[usize]) -> Vec<i64> {
    support.iter().map(|&i| m[i]).collect()
}

/// Adds one representative (smallest period) for every run of consecutive
/// flagged samples.
fn collect_families(region: &MomentRegion, m: &[i64], scan: &FaceScan, flags: &[bool], found: &mut Vec<RationalFiber>) {
    let mut k = 0;
    while k < flags.len() {
        if !flags[k] {
            k += 1;
            continue;
        }
        let start = k;
        while k < flags.len() && flags[k] {
            k += 1;
        }
        let best = (start..k)
            .filter_map(|idx| scan.samples[idx].as_ref())
            .min_by(|a, b| period_of(&a.w, m).total_cmp(&period_of(&b.w, m)));
        if let Some(sample) = best {
            if let Ok(fiber) = TorusFiber::with_direction(region, &sample.w, m) {
                found.push(RationalFiber {
                    m: m.to_vec(),
                    period: period_of(&fiber.w, m),
                    kind: FiberKind::Family,
                    fiber,
                });
            }
        }
    }
}

/// Damped Newton on `grad_S G(w) = lambda m_S, G(w) = 0` over the face
/// spanned by `support`, started from several rays.
fn lagrange_roots(region: &MomentRegion, m: &[i64], support: &[usize]) -> Vec<Vec<f64>> {
    let n = region.dim();
    let k = support.len();
    let m_s: Vec<f64> = support.iter().map(|&i| m[i] as f64).collect();
    let embed = |ws: &[f64]| -> Vec<f64> {
        let mut w = vec![0.0; n];
        for (slot, &i) in support.iter().enumerate() {
            w[i] = ws[slot].max(0.0);
        }
        w
    };
    let parallel_at = |w: &[f64]| angle_defect(&restrict(&region.gradient(w), support), &m_s) <= ANGLE_TOL;

    let mut seeds: Vec<Vec<f64>> = vec![m_s.clone(), vec![1.0; k]];
    for idx in 1..=6u64 {
        seeds.push(numerics::orthant_direction(&numerics::halton_angles(idx, k)));
    }

    let residual = |x: &[f64]| -> DVector<f64> {
        let w = embed(&x[..k]);
        let g = region.gradient(&w);
        let mut f = DVector::zeros(k + 1);
        for (slot, &i) in support.iter().enumerate() {
            f[slot] = g[i] - x[k] * m_s[slot];
        }
        f[k] = region.defining_function(&w);
        f
    };

    let mut roots: Vec<Vec<f64>> = Vec::new();
    for seed in seeds {
        let Ok(w0) = region.boundary_point(&embed(&seed)) else {
            continue;
        };
        if parallel_at(&w0) {
            roots.push(w0);
            continue;
        }
        let g0 = restrict(&region.gradient(&w0), support);
        let mut x: Vec<f64> = restrict(&w0, support);
        x.push(dot(&g0, &m_s) / dot(&m_s, &m_s));

        let mut f = residual(&x);
        for _ in 0..60 {
            let mut jac = DMatrix::zeros(k + 1, k + 1);
            let w = embed(&x[..k]);
            let g = region.gradient(&w);
            for (col, &i) in support.iter().enumerate() {
                let h = 1e-7 * x[col].abs().max(1e-3);
                let mut wp = w.clone();
                let mut wm = w.clone();
                wp[i] += h;
                wm[i] = (wm[i] - h).max(0.0);
                let span = wp[i] - wm[i];
                let gp = region.gradient(&wp);
                let gm = region.gradient(&wm);
                for (row, &r) in support.iter().enumerate() {
                    jac[(row, col)] = (gp[r] - gm[r]) / span;
                }
                jac[(k, col)] = g[i];
            }
            for row in 0..k {
                jac[(row, k)] = -m_s[row];
            }
            let Some(step) = jac.lu().solve(&(-&f)) else {
                break;
            };
            let mut alpha = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + alpha * d).collect();
                let ft = residual(&trial);
                if ft.norm() < f.norm() {
                    x = trial;
                    f = ft;
                    accepted = true;
                    break;
                }
                alpha *= 0.5;
            }
            if !accepted || f.norm() < 1e-15 {
                break;
            }
        }
        let w = embed(&x[..k]);
        if w.iter().enumerate().any(|(i, &v)| m[i] != 0 && v <= TOL_AXIS) {
            continue;
        }
        let Ok(w) = region.boundary_point(&w) else {
            continue;
        };
        if parallel_at(&w) && !roots.iter().any(|r| numerics::norm(&sub(r, &w)) < 1e-7) {
            roots.push(w);
        }
    }
    roots
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Closed-orbit families over all primitive directions of height at most
/// `height`, including axis fibers.
pub fn enumerate_rational_fibers(region: &MomentRegion, height: i64, exec: Execution) -> Result<FiberEnumeration> {
    if height < 1 {
        return Err(Error::InvalidParameter(format!("height must be >= 1, got {height}")));
    }
    let n = region.dim();
    let mut scans = BTreeMap::new();
    for i in 0..n {
        for j in (i + 1)..n {
            scans.insert((i, j), FaceScan::new(region, i, j, FACE_SCAN_SAMPLES, exec));
        }
    }
    let directions = primitive_vectors(n, height);
    let results = exec::map(exec, &directions, |m| fibers_for_direction(region, m, &scans));

    let mut fibers = Vec::new();
    let mut skipped = Vec::new();
    for (m, result) in directions.iter().zip(results) {
        match result {
            Ok(mut found) => {
                found.sort_by(|a, b| a.period.total_cmp(&b.period));
                fibers.extend(found);
            }
            Err(reason) => skipped.push(SkippedDirection { m: m.clone(), reason }),
        }
    }
    Ok(FiberEnumeration { height, fibers, skipped })
}

/// A Legendrian torus `{m . theta = phase}` inside the fiber over
/// `w = scale * m`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LegendrianFiberTorus {
    pub fiber: TorusFiber,
    /// Lattice direction of the torus; parallel to `fiber.w`.
    pub m: Vec<i64>,
    pub phase: f64,
    pub scale: f64,
}

impl LegendrianFiberTorus {
    /// An angle vector on the torus: `(phase / m_1, 0, ..., 0)`.
    pub fn base_angles(&self) -> Vec<f64> {
        let mut theta = vec![0.0; self.m.len()];
        theta[0] = self.phase / self.m[0] as f64;
        theta
    }

    /// Integer tangent directions `m_1 e_{k+1} - m_{k+1} e_1`, `k = 1..n-1`.
    ///
    /// In dimension 4 the single direction `(-m_2, m_1)` traverses the knot
    /// exactly once over a parameter interval of length `2 pi`.
    pub fn tangent_directions(&self) -> Vec<Vec<f64>> {
        let n = self.m.len();
        (1..n)
            .map(|k| {
                let mut v = vec![0.0; n];
                v[0] = -(self.m[k] as f64);
                v[k] = self.m[0] as f64;
                v
            })
            .collect()
    }

    /// Angles at torus parameters `params` (one per tangent direction).
    pub fn angles_at(&self, params: &[f64]) -> Vec<f64> {
        let mut theta = self.base_angles();
        for (p, dir) in params.iter().zip(self.tangent_directions()) {
            for (t, d) in theta.iter_mut().zip(&dir) {
                *t += p * d;
            }
        }
        theta
    }

    /// Wrapped defect of the torus equation at `theta`.
    pub fn phase_defect(&self, theta: &[f64]) -> f64 {
        wrap_to_pi(dot(&as_f64(&self.m), theta) - self.phase).abs()
    }
}

fn wrap_to_pi(x: f64) -> f64 {
    (x + PI).rem_euclid(TAU) - PI
}

/// The Legendrian torus `{m . theta = phase}` in the fiber on the ray through `m`.
pub fn legendrian_fiber(region: &MomentRegion, m: &[i64], phase: f64) -> Result<LegendrianFiberTorus> {
    if m.len() != region.dim() {
        return Err(Error::DimensionMismatch { expected: region.dim(), got: m.len() });
    }
    if m.iter().any(|&k| k <= 0) {
        return Err(Error::InvalidParameter(format!("Legendrian fiber needs strictly positive m, got {m:?}")));
    }
    if m.iter().fold(0u64, |g, &k| numerics::gcd(g, k as u64)) != 1 {
        return Err(Error::InvalidParameter(format!("m = {m:?} is not primitive")));
    }
    let w = region.boundary_point(&as_f64(m))?;
    let fiber = TorusFiber::at(region, &w)?;
    Ok(LegendrianFiberTorus { scale: w[0] / m[0] as f64, fiber, m: m.to_vec(), phase: phase.rem_euclid(TAU) })
}

/// A Reeb chord of the linear fiber flow with endpoints on a Legendrian torus.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChordRecord {
    pub start_angles: Vec<f64>,
    pub end_angles: Vec<f64>,
    pub period: f64,
    /// False when the chord closes up into a periodic orbit (`theta(T) = theta(0)`).
    pub genuine: bool,
    pub residual: f64,
}

/// The minimal chord from the torus base point.
pub fn min_chord_period(torus: &LegendrianFiberTorus) -> Result<ChordRecord> {
    min_chord_from(torus, &torus.base_angles())
}

/// The minimal chord starting at `start` on the torus.
///
/// The linear flow `theta(t) = theta0 + t * 2 pi nu~ / (w . nu~)` returns to
/// `{m . theta = c}` first at `T = (w . nu~) / (m . nu~)`, which equals the
/// fiber scale when `w = s m`.
pub fn min_chord_from(torus: &LegendrianFiberTorus, start: &[f64]) -> Result<ChordRecord> {
    let start_defect = torus.phase_defect(start);
    if start_defect > 1e-9 {
        return Err(Error::InvalidParameter(format!("start angles are off the torus (defect {start_defect:e})")));
    }
    let fiber = &torus.fiber;
    let omega = reeb_angular_velocity(fiber)?;
    let m = as_f64(&torus.m);
    let m_dot_nu = dot(&m, &fiber.nu_tilde);
    if m_dot_nu <= 0.0 {
        return Err(Error::DegeneratePairing(m_dot_nu));
    }
    let period = fiber.pairing() / m_dot_nu;
    let displacement: Vec<f64> = omega.iter().map(|o| o * period).collect();
    let end: Vec<f64> = start.iter().zip(&displacement).map(|(a, d)| (a + d).rem_euclid(TAU)).collect();
    let closes = displacement.iter().all(|d| {
        let turns = d / TAU;
        (turns - turns.round()).abs() <= GENUINE_TOL
    });
    let residual = torus.phase_defect(&end);
    Ok(ChordRecord { start_angles: start.to_vec(), end_angles: end, period, genuine: !closes, residual })
}

/// Supremum of the minimal chord period over Legendrian fiber tori.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChordSupremum {
    pub value: f64,
    pub witness_m: Vec<i64>,
    pub witness: TorusFiber,
    /// Best scale over real directions `d > 0` normalized by `min d_i = 1`.
    pub continuum_value: f64,
    pub continuum_direction: Vec<f64>,
    pub height: i64,
    /// Every enumerated `(m, minimal chord period)`, in lexicographic order.
    pub chord_periods: Vec<(Vec<i64>, f64)>,
}

/// Number of real directions sampled for the continuum relaxation.
pub const CONTINUUM_SAMPLES: usize = 2000;

/// Maximizes the Legendrian scale `s` over strictly positive primitive
/// directions of height at most `height`, plus a continuum relaxation.
pub fn sup_chord_over_fibers(region: &MomentRegion, height: i64, exec: Execution) -> Result<ChordSupremum> {
    if height < 10 {
        return Err(Error::InvalidParameter(format!("height must be >= 10, got {height}")));
    }
    let n = region.dim();
    let gate = region.classify_monotonicity(moment_region::default_samples(n), exec)?;
    if !gate.class.is_monotone() {
        return Err(Error::NotMonotone("sup_chord_over_fibers"));
    }
    let directions: Vec<Vec<i64>> =
        primitive_vectors(n, height).into_iter().filter(|m| m.iter().all(|&k| k > 0)).collect();
    let scales = exec::map(exec, &directions, |m| region.boundary_point(&as_f64(m)).map(|w| w[0] / m[0] as f64));
    let mut chord_periods = Vec::with_capacity(directions.len());
    for (m, s) in directions.iter().zip(scales) {
        chord_periods.push((m.clone(), s?));
    }
    // Strictly greater keeps the lexicographically first maximizer.
    let (best_m, best) = chord_periods.iter().fold((None::<&Vec<i64>>, f64::NEG_INFINITY), |(bm, bs), (m, s)| {
        if *s > bs {
            (Some(m), *s)
        } else {
            (bm, bs)
        }
    });
    let best_m = best_m.expect("height >= 10 yields directions").clone();

    let indices: Vec<u64> = (1..=CONTINUUM_SAMPLES as u64).collect();
    let continuum = exec::map(exec, &indices, |&i| {
        let d = numerics::orthant_direction(&numerics::halton_angles(i, n));
        let smallest = d.iter().cloned().fold(f64::INFINITY, f64::min);
        if smallest <= 1e-6 {
            return None;
        }
        let d: Vec<f64> = d.iter().map(|x| x / smallest).collect();
        region.boundary_point(&d).ok().map(|w| (w[0] / d[0], d))
    });
    let (continuum_value, continuum_direction) = continuum
        .into_iter()
        .flatten()
        .fold((f64::NEG_INFINITY, vec![]), |acc, (s, d)| if s > acc.0 { (s, d) } else { acc });

    let w = region.boundary_point(&as_f64(&best_m))?;
    let witness = TorusFiber::at(region, &w)?;
    Ok(ChordSupremum {
        value: best.max(continuum_value),
        witness_m: best_m,
        witness,
        continuum_value,
        continuum_direction,
        height,
        chord_periods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment_region::TOL_ROOT;
    use approx::assert_relative_eq;

    fn ball() -> MomentRegion {
        MomentRegion::ball(2, 1.0).unwrap()
    }
    fn ellipsoid() -> MomentRegion {
        MomentRegion::ellipsoid(&[1.0, 2.0]).unwrap()
    }

    #[test]
    fn angular_velocity_examples() {
        let f = TorusFiber::at(&ball(), &[0.5, 0.5]).unwrap();
        let v = reeb_angular_velocity(&f).unwrap();
        assert_relative_eq!(v[0], TAU, epsilon = 1e-14);
        assert_relative_eq!(v[1], TAU, epsilon = 1e-14);

        let f = TorusFiber::at(&ellipsoid(), &[2.0 / 3.0, 2.0 / 3.0]).unwrap();
        let v = reeb_angular_velocity(&f).unwrap();
        assert_relative_eq!(v[0], TAU, epsilon = 1e-14);
        assert_relative_eq!(v[1], PI, epsilon = 1e-14);

        let f = TorusFiber::at(&ellipsoid(), &[1.0, 0.0]).unwrap();
        assert_eq!(f.nu_tilde, vec![1.0, 0.0]);
        let v = reeb_angular_velocity(&f).unwrap();
        assert_relative_eq!(v[0], TAU, epsilon = 1e-14);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn angular_velocity_is_scale_invariant() {
        let f = TorusFiber::at(&ellipsoid(), &[0.3, 1.4]).unwrap();
        let base = reeb_angular_velocity(&f).unwrap();
        for s in [0.1, 10.0] {
            let mut g = f.clone();
            g.nu_tilde.iter_mut().for_each(|x| *x *= s);
            let v = reeb_angular_velocity(&g).unwrap();
            for (a, b) in base.iter().zip(&v) {
                assert_relative_eq!(a, b, max_relative = 1e-15);
            }
        }
    }

    #[test]
    fn degenerate_pairing_is_rejected() {
        let f = TorusFiber {
            w: vec![1.0, 0.0],
            nu: vec![0.0, 1.0],
            nu_tilde: vec![0.0, 0.0],
            primitive_dir: None,
            n_positive: 1,
        };
        assert!(matches!(reeb_angular_velocity(&f), Err(Error::DegeneratePairing(_))));
    }

    #[test]
    fn closed_orbit_period_examples() {
        let f = TorusFiber::at(&ball(), &[0.5, 0.5]).unwrap();
        assert_eq!(f.primitive_dir, Some(vec![1, 1]));
        assert_relative_eq!(closed_orbit_period(&f).unwrap(), 1.0);

        let f = TorusFiber::at(&ellipsoid(), &[0.3, 1.4]).unwrap();
        assert_eq!(f.primitive_dir, Some(vec![2, 1]));
        assert_relative_eq!(closed_orbit_period(&f).unwrap(), 2.0, epsilon = 1e-12);

        let mut f = f.clone();
        f.nu_tilde = vec![1.0, 2f64.sqrt()];
        f.primitive_dir = primitive_direction(&f.nu_tilde, DEFAULT_DETECT_HEIGHT);
        assert_eq!(closed_orbit_period(&f), None);
    }

    #[test]
    fn primitive_direction_recovers_lattice_vectors() {
        assert_eq!(primitive_direction(&[0.5, 0.25], 100), Some(vec![2, 1]));
        assert_eq!(primitive_direction(&[3.0, 0.0, 6.0], 100), Some(vec![1, 0, 2]));
        assert_eq!(primitive_direction(&[1.0, 1e-20], 100), Some(vec![1, 0]));
        assert_eq!(primitive_direction(&[1.0, PI], 1000), None);
    }

    #[test]
    fn primitive_vectors_small_cases() {
        let v = primitive_vectors(2, 2);
        assert_eq!(v, vec![vec![0, 1], vec![1, 0], vec![1, 1], vec![1, 2], vec![2, 1]]);
        // Count of primitive vectors in [0, h]^2 \ 0 matches a brute-force gcd filter.
        let h = 30;
        let brute = (0..=h)
            .flat_map(|a| (0..=h).map(move |b| (a, b)))
            .filter(|&(a, b)| (a, b) != (0, 0) && numerics::gcd(a, b) == 1)
            .count();
        assert_eq!(primitive_vectors(2, h as i64).len(), brute);
        let v3 = primitive_vectors(3, 1);
        assert_eq!(v3.len(), 7);
    }

    fn periods_by_m(e: &FiberEnumeration) -> BTreeMap<Vec<i64>, Vec<f64>> {
        let mut out: BTreeMap<Vec<i64>, Vec<f64>> = BTreeMap::new();
        for f in &e.fibers {
            out.entry(f.m.clone()).or_default().push(f.period);
        }
        out
    }

    #[test]
    fn enumeration_ball() {
        let e = enumerate_rational_fibers(&ball(), 3, Execution::default()).unwrap();
        let by_m = periods_by_m(&e);
        assert_eq!(by_m.keys().cloned().collect::<Vec<_>>(), vec![vec![0, 1], vec![1, 0], vec![1, 1]]);
        for periods in by_m.values() {
            for p in periods {
                assert_relative_eq!(*p, 1.0, epsilon = 1e-12);
            }
        }
        assert!(e.skipped.iter().all(|s| !s.reason.is_empty()));
    }

    #[test]
    fn enumeration_ellipsoid() {
        let e = enumerate_rational_fibers(&ellipsoid(), 3, Execution::default()).unwrap();
        let by_m = periods_by_m(&e);
        assert_eq!(by_m.keys().cloned().collect::<Vec<_>>(), vec![vec![0, 1], vec![1, 0], vec![2, 1]]);
        assert_relative_eq!(by_m[&vec![1, 0]][0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(by_m[&vec![0, 1]][0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(by_m[&vec![2, 1]][0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(e.minimum().unwrap().period, 1.0, epsilon = 1e-12);
        assert_eq!(e.minimum().unwrap().m, vec![1, 0]);
    }

    #[test]
    fn enumeration_concave_diagonal() {
        let conc = MomentRegion::concave_sqrt(2, 1.0).unwrap();
        let e = enumerate_rational_fibers(&conc, 2, Execution::default()).unwrap();
        let diag: Vec<&RationalFiber> = e.fibers.iter().filter(|f| f.m == vec![1, 1]).collect();
        assert_eq!(diag.len(), 1);
        assert_eq!(diag[0].kind, FiberKind::Isolated);
        assert_relative_eq!(diag[0].fiber.w[0], 0.25, epsilon = 1e-12);
        assert_relative_eq!(diag[0].fiber.w[1], 0.25, epsilon = 1e-12);
        assert_relative_eq!(diag[0].period, 0.5, epsilon = 1e-12);
        // m = (1, 2) sits where sqrt(w1) : sqrt(w2) = 2 : 1, period pq/(p+q) = 2/3.
        let f12 = e.fibers.iter().find(|f| f.m == vec![1, 2]).unwrap();
        assert_relative_eq!(f12.period, 2.0 / 3.0, epsilon = 1e-12);
    }

    #[test]
    fn enumeration_three_dimensional_ellipsoid() {
        let r = MomentRegion::ellipsoid(&[1.0, 2.0, 4.0]).unwrap();
        let e = enumerate_rational_fibers(&r, 4, Execution::default()).unwrap();
        let by_m = periods_by_m(&e);
        // nu = (1, 1/2, 1/4) ~ (4, 2, 1) on the open face; period w.m = 4.
        assert_relative_eq!(by_m[&vec![4, 2, 1]][0], 4.0, epsilon = 1e-10);
        assert_relative_eq!(by_m[&vec![2, 1, 0]][0], 2.0, epsilon = 1e-10);
        assert_relative_eq!(by_m[&vec![1, 0, 0]][0], 1.0, epsilon = 1e-10);
        assert_relative_eq!(e.minimum().unwrap().period, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn enumeration_three_dimensional_newton() {
        let conc = MomentRegion::concave_sqrt(3, 1.0).unwrap();
        let e = enumerate_rational_fibers(&conc, 2, Execution::default()).unwrap();
        let diag = e.fibers.iter().find(|f| f.m == vec![1, 1, 1]).unwrap();
        assert_eq!(diag.kind, FiberKind::Isolated);
        for x in &diag.fiber.w {
            assert_relative_eq!(*x, 1.0 / 9.0, epsilon = 1e-10);
        }
        assert_relative_eq!(diag.period, 1.0 / 3.0, epsilon = 1e-10);
    }

    #[test]
    fn enumeration_is_deterministic_across_modes() {
        let conc = MomentRegion::concave_sqrt(2, 1.0).unwrap();
        let a = enumerate_rational_fibers(&conc, 8, Execution::Sequential).unwrap();
        let b = enumerate_rational_fibers(&conc, 8, Execution::Parallel).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fiber_invariants_hold() {
        let conc = MomentRegion::concave_sqrt(2, 1.0).unwrap();
        let e = enumerate_rational_fibers(&conc, 10, Execution::default()).unwrap();
        for f in &e.fibers {
            assert!(conc.defining_function(&f.fiber.w).abs() <= TOL_ROOT);
            assert_eq!(f.fiber.nu_tilde, tilde_normal(&f.fiber.w, &f.fiber.nu));
            let m = f.fiber.primitive_dir.as_ref().unwrap();
            assert!(angle_defect(&f.fiber.nu_tilde, &as_f64(m)) <= ANGLE_TOL);
            assert_eq!(m.iter().fold(0u64, |g, &k| numerics::gcd(g, k as u64)), 1);
        }
    }

    #[test]
    fn legendrian_fiber_examples() {
        let t = legendrian_fiber(&ellipsoid(), &[1, 1], 0.0).unwrap();
        assert_relative_eq!(t.scale, 2.0 / 3.0, epsilon = 1e-12);
        let t = legendrian_fiber(&ball(), &[1, 1], 0.0).unwrap();
        assert_relative_eq!(t.scale, 0.5, epsilon = 1e-12);
        assert_relative_eq!(t.fiber.w[0], 0.5, epsilon = 1e-12);
        let t = legendrian_fiber(&ellipsoid(), &[1, 2], 1.0).unwrap();
        assert_relative_eq!(t.fiber.w[0], 0.5, epsilon = 1e-12);
        assert_relative_eq!(t.fiber.w[1], 1.0, epsilon = 1e-12);
        assert_relative_eq!(t.scale, 0.5, epsilon = 1e-12);

        assert!(legendrian_fiber(&ball(), &[1, 0], 0.0).is_err());
        assert!(legendrian_fiber(&ball(), &[2, 2], 0.0).is_err());
    }

    #[test]
    fn legendrian_tangents_lie_in_contact_kernel() {
        // lambda on the fiber is sum w_i dtheta_i / (2 pi); tangent directions are
        // orthogonal to m and hence to w = s m.
        let t = legendrian_fiber(&ellipsoid(), &[1, 2], 0.3).unwrap();
        for dir in t.tangent_directions() {
            assert!(dot(&t.fiber.w, &dir).abs() < 1e-12);
        }
        assert!(t.phase_defect(&t.angles_at(&[1.234])) < 1e-12);
    }

    #[test]
    fn min_chord_examples() {
        let t = legendrian_fiber(&ball(), &[1, 1], 0.0).unwrap();
        let c = min_chord_period(&t).unwrap();
        assert_relative_eq!(c.period, 0.5, epsilon = 1e-12);
        // Displacement (pi, pi) is not a lattice vector of 2 pi Z^2.
        assert!(c.genuine);
        assert!(c.residual <= 1e-9);

        let t = legendrian_fiber(&ellipsoid(), &[1, 1], 0.0).unwrap();
        let c = min_chord_period(&t).unwrap();
        assert_relative_eq!(c.period, 2.0 / 3.0, epsilon = 1e-12);
        assert!(c.genuine);

        let ce = MomentRegion::counterexample(0.1, 200.0, 16.0).unwrap();
        let t = legendrian_fiber(&ce, &[1, 1], 0.0).unwrap();
        let c = min_chord_period(&t).unwrap();
        assert!((c.period - 1.0).abs() < 1e-6, "{}", c.period);
    }

    #[test]
    fn chord_period_equals_scale_and_is_phase_independent() {
        let conc = MomentRegion::concave_sqrt(2, 1.0).unwrap();
        for m in [[1, 1], [1, 2], [3, 1], [2, 5]] {
            for phase in [0.0, 1.0, 4.0] {
                let t = legendrian_fiber(&conc, &m, phase).unwrap();
                let c = min_chord_period(&t).unwrap();
                assert_relative_eq!(c.period, t.scale, max_relative = 1e-12);
                let c2 = min_chord_from(&t, &t.angles_at(&[0.77])).unwrap();
                assert_relative_eq!(c2.period, c.period, max_relative = 1e-14);
                assert!(c.residual <= 1e-9 && c2.residual <= 1e-9);
            }
        }
    }

    #[test]
    fn closed_form_chord_matches_stepped_linear_flow() {
        // Independent route: march the linear angle flow in small steps and
        // bisect the first return of m . theta to the torus.
        let r = ellipsoid();
        for m in [[1i64, 1], [2, 1], [1, 3]] {
            let t = legendrian_fiber(&r, &m, 0.4).unwrap();
            let omega = reeb_angular_velocity(&t.fiber).unwrap();
            let rate = dot(&as_f64(&m), &omega);
            let start = t.base_angles();
            let phase_gain = |time: f64| {
                let theta: Vec<f64> = start.iter().zip(&omega).map(|(a, o)| a + time * o).collect();
                dot(&as_f64(&m), &theta) - t.phase - TAU
            };
            let dt = 1e-3;
            let mut time = dt;
            while phase_gain(time) < 0.0 {
                time += dt;
            }
            let root = numerics::bisect(phase_gain, time - dt, time, phase_gain(time - dt), 1e-15, 200);
            let closed = min_chord_period(&t).unwrap().period;
            assert!((root - closed).abs() <= 1e-12, "{root} vs {closed} (rate {rate})");
        }
    }

    #[test]
    fn genuineness_membership_test() {
        // Displacement T * omega = 2 pi nu~ / (m . nu~); it is a lattice vector
        // exactly when nu~ / (m . nu~) is integral.
        let mut t = legendrian_fiber(&ball(), &[1, 1], 0.0).unwrap();
        t.fiber.nu = vec![1.0, 0.0];
        t.fiber.nu_tilde = vec![1.0, 0.0];
        let c = min_chord_period(&t).unwrap();
        assert_relative_eq!(c.period, 0.5, epsilon = 1e-12);
        assert!(!c.genuine);
        for (a, b) in c.start_angles.iter().zip(&c.end_angles) {
            assert!(wrap_to_pi(a - b).abs() < 1e-12);
        }

        let t = legendrian_fiber(&ellipsoid(), &[2, 1], 0.0).unwrap();
        let c = min_chord_period(&t).unwrap();
        assert_relative_eq!(c.period, 0.4, epsilon = 1e-12);
        assert!(c.genuine);
    }

    #[test]
    fn sup_chord_examples() {
        let ex = Execution::default();
        let s = sup_chord_over_fibers(&ellipsoid(), 10, ex).unwrap();
        assert_relative_eq!(s.value, 2.0 / 3.0, epsilon = 1e-12);
        assert_eq!(s.witness_m, vec![1, 1]);
        let s = sup_chord_over_fibers(&ball(), 10, ex).unwrap();
        assert_relative_eq!(s.value, 0.5, epsilon = 1e-12);
        let p4 = MomentRegion::convex_power(2, 1.0, 4.0).unwrap();
        let s = sup_chord_over_fibers(&p4, 10, ex).unwrap();
        assert_relative_eq!(s.value, 2f64.powf(-0.25), epsilon = 1e-12);
        assert!(s.continuum_value <= s.value + 1e-12);

        let skew = MomentRegion::skewed_quadric(2, 0.5).unwrap();
        assert!(matches!(sup_chord_over_fibers(&skew, 10, ex), Err(Error::NotMonotone(_))));
        assert!(sup_chord_over_fibers(&ball(), 5, ex).is_err());
    }
}
