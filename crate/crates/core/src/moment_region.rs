//! Moment images `Omega` of toric domains as smooth implicit regions.
//!
//! A region is `{w in R^n_{>=0} : G(w) <= 0}` for an analytic defining
//! function `G`. Moment coordinates follow `w_i = pi |z_i|^2`, so every
//! length in moment space is an action.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::{self, Execution};
use crate::numerics::{self, dot, norm};

/// Residual allowed for `|G|` at a computed boundary point.
pub const TOL_ROOT: f64 = 1e-10;
/// Coordinates at or below this value are treated as lying on an axis.
pub const TOL_AXIS: f64 = 1e-8;
/// Threshold for normalized normal entries in the monotonicity test.
pub const TOL_MONO: f64 = 1e-7;
/// Contact order separating axis tangency from a genuinely flat boundary.
///
/// A smooth toric boundary meets the axis `w_i = 0` orthogonally, so the
/// normal entry `nu_i` tends to zero together with `w_i`. An entry is only
/// counted as degenerate when it is below `TOL_MONO * w_hat_i^FLATNESS_ORDER`,
/// which no power-law approach of order up to this value can reach.
pub const FLATNESS_ORDER: i32 = 16;
/// Gradients with smaller norm are rejected as degenerate.
pub const GRADIENT_FLOOR: f64 = 1e-12;
/// Fraction of each rectangle side that is rounded in the counterexample.
pub const COUNTEREXAMPLE_CORNER: f64 = 0.2;

const BOX_SLACK: f64 = 1.1;

/// Analytic family and parameters of a moment region.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builder", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// `{sum w_i <= radius}`, the moment image of `B^{2n}(radius)`.
    Ball { n: usize, radius: f64 },
    /// `{sum w_i / a_i <= 1}`.
    Ellipsoid { axes: Vec<f64> },
    /// `{sum sqrt(w_i / c) <= 1}`; a concave toric domain.
    ConcaveSqrt { n: usize, c: f64 },
    /// `{sum (w_i / a)^p <= 1}` with `p >= 1`; a convex toric domain.
    ConvexPower { n: usize, a: f64, p: f64 },
    /// Smoothed union of the thin rectangle `x <= epsilon, y <= 3` with the
    /// simplex `x + y <= 2`.
    Counterexample { epsilon: f64, beta: f64, q: f64 },
    /// `{sum w_i^2 - k sum_{i<j} w_i w_j <= 1}`; not monotone for `k > 0`.
    SkewedQuadric { n: usize, k: f64 },
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Ball { n, .. }
            | Shape::ConcaveSqrt { n, .. }
            | Shape::ConvexPower { n, .. }
            | Shape::SkewedQuadric { n, .. } => *n,
            Shape::Ellipsoid { axes } => axes.len(),
            Shape::Counterexample { .. } => 2,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let positive = |name: &str, v: f64| -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParameter(format!("{name} must be positive, got {v}")))
            }
        };
        let n = self.dim();
        if n < 2 {
            return bad(format!("dimension must be at least 2, got {n}"));
        }
        if n > 12 {
            return bad(format!("dimension {n} is not supported (max 12)"));
        }
        match self {
            Shape::Ball { radius, .. } => positive("radius", *radius),
            Shape::Ellipsoid { axes } => axes.iter().try_for_each(|&a| positive("axis", a)),
            Shape::ConcaveSqrt { c, .. } => positive("c", *c),
            Shape::ConvexPower { a, p, .. } => {
                positive("a", *a)?;
                if !(p.is_finite() && *p >= 1.0) {
                    return bad(format!("p must be >= 1, got {p}"));
                }
                Ok(())
            }
            Shape::Counterexample { epsilon, beta, q } => {
                positive("epsilon", *epsilon)?;
                if *epsilon >= 2.0 {
                    return bad(format!("epsilon must be < 2, got {epsilon}"));
                }
                if !(beta.is_finite() && *beta >= 10.0) {
                    return bad(format!("beta must be >= 10, got {beta}"));
                }
                if !(q.is_finite() && *q >= 8.0) {
                    return bad(format!("q must be >= 8, got {q}"));
                }
                Ok(())
            }
            Shape::SkewedQuadric { n, k } => {
                let upper = 2.0 / (*n as f64 - 1.0);
                if !(k.is_finite() && *k > -2.0 && *k < upper) {
                    return bad(format!("k must lie in (-2, {upper}), got {k}"));
                }
                Ok(())
            }
        }
    }

    fn label(&self) -> String {
        let list = |v: &[f64]| v.iter().map(|x| format!("{x}")).collect::<Vec<_>>().join(", ");
        match self {
            Shape::Ball { n, radius } => format!("ball(n={n}, R={radius})"),
            Shape::Ellipsoid { axes } => format!("ellipsoid({})", list(axes)),
            Shape::ConcaveSqrt { n, c } => format!("concave_sqrt(n={n}, c={c})"),
            Shape::ConvexPower { n, a, p } => format!("convex_power(n={n}, a={a}, p={p})"),
            Shape::Counterexample { epsilon, beta, q } => {
                format!("counterexample(epsilon={epsilon}, beta={beta}, q={q})")
            }
            Shape::SkewedQuadric { n, k } => format!("skewed_quadric(n={n}, k={k})"),
        }
    }

    fn bounding_box(&self) -> Vec<f64> {
        let n = self.dim();
        match self {
            Shape::Ball { radius, .. } => vec![radius * BOX_SLACK; n],
            Shape::Ellipsoid { axes } => axes.iter().map(|a| a * BOX_SLACK).collect(),
            Shape::ConcaveSqrt { c, .. } => vec![c * BOX_SLACK; n],
            Shape::ConvexPower { a, .. } => vec![a * BOX_SLACK; n],
            Shape::Counterexample { epsilon, beta, .. } => {
                // smin(G1, G2) <= 0 forces min(G1, G2) <= ln 2 / beta.
                let slack = std::f64::consts::LN_2 / beta;
                let x = (epsilon * (1.0 + COUNTEREXAMPLE_CORNER * slack)).max(2.0 * (1.0 + slack));
                let y = (3.0 * (1.0 + COUNTEREXAMPLE_CORNER * slack)).max(2.0 * (1.0 + slack));
                vec![x * BOX_SLACK, y * BOX_SLACK]
            }
            Shape::SkewedQuadric { n, k } => {
                let lambda_min = (1.0 + k / 2.0).min(1.0 - (*n as f64 - 1.0) * k / 2.0);
                vec![BOX_SLACK / lambda_min.sqrt(); *n]
            }
        }
    }

    fn value(&self, w: &[f64]) -> f64 {
        match self {
            Shape::Ball { radius, .. } => w.iter().sum::<f64>() / radius - 1.0,
            Shape::Ellipsoid { axes } => w.iter().zip(axes).map(|(x, a)| x / a).sum::<f64>() - 1.0,
            Shape::ConcaveSqrt { c, .. } => w.iter().map(|x| (x.max(0.0) / c).sqrt()).sum::<f64>() - 1.0,
            Shape::ConvexPower { a, p, .. } => w.iter().map(|x| (x.max(0.0) / a).powf(*p)).sum::<f64>() - 1.0,
            Shape::Counterexample { epsilon, beta, q } => {
                let (g1, _) = rounded_rectangle(w[0], w[1], *epsilon, *q);
                let g2 = 0.5 * (w[0] + w[1]) - 1.0;
                smooth_min(g1, g2, *beta).0
            }
            Shape::SkewedQuadric { k, .. } => skewed_form(w, *k) - 1.0,
        }
    }

    fn gradient(&self, w: &[f64]) -> Vec<f64> {
        match self {
            Shape::Ball { n, radius } => vec![1.0 / radius; *n],
            Shape::Ellipsoid { axes } => axes.iter().map(|a| 1.0 / a).collect(),
            Shape::ConcaveSqrt { c, .. } => w.iter().map(|x| 0.5 / (c * x.max(1e-300)).sqrt()).collect(),
            Shape::ConvexPower { a, p, .. } => w.iter().map(|x| p / a * (x.max(0.0) / a).powf(p - 1.0)).collect(),
            Shape::Counterexample { epsilon, beta, q } => {
                let (g1, grad1) = rounded_rectangle(w[0], w[1], *epsilon, *q);
                let g2 = 0.5 * (w[0] + w[1]) - 1.0;
                let (_, t1, t2) = smooth_min(g1, g2, *beta);
                vec![t1 * grad1[0] + t2 * 0.5, t1 * grad1[1] + t2 * 0.5]
            }
            Shape::SkewedQuadric { k, .. } => {
                let total: f64 = w.iter().sum();
                w.iter().map(|x| 2.0 * x - k * (total - x)).collect()
            }
        }
    }

    /// Closed-form Minkowski gauge where one exists.
    fn gauge(&self, w: &[f64]) -> Option<f64> {
        Some(match self {
            Shape::Ball { radius, .. } => w.iter().sum::<f64>() / radius,
            Shape::Ellipsoid { axes } => w.iter().zip(axes).map(|(x, a)| x / a).sum(),
            Shape::ConcaveSqrt { c, .. } => {
                let s: f64 = w.iter().map(|x| (x.max(0.0) / c).sqrt()).sum();
                s * s
            }
            Shape::ConvexPower { a, p, .. } => w.iter().map(|x| (x.max(0.0) / a).powf(*p)).sum::<f64>().powf(1.0 / p),
            Shape::SkewedQuadric { k, .. } => skewed_form(w, *k).max(0.0).sqrt(),
            Shape::Counterexample { .. } => return None,
        })
    }

    fn gauge_gradient(&self, w: &[f64]) -> Option<Vec<f64>> {
        Some(match self {
            Shape::Ball { .. } | Shape::Ellipsoid { .. } => self.gradient(w),
            Shape::ConcaveSqrt { c, .. } => {
                let s: f64 = w.iter().map(|x| (x.max(0.0) / c).sqrt()).sum();
                w.iter().map(|x| s / (c * x.max(1e-300)).sqrt()).collect()
            }
            Shape::ConvexPower { a, p, .. } => {
                let sum: f64 = w.iter().map(|x| (x.max(0.0) / a).powf(*p)).sum();
                let outer = sum.powf(1.0 / p - 1.0);
                w.iter().map(|x| outer * (x.max(0.0) / a).powf(p - 1.0) / a).collect()
            }
            Shape::SkewedQuadric { .. } => {
                let g = self.gauge(w)?;
                self.gradient(w).into_iter().map(|d| d / (2.0 * g)).collect()
            }
            Shape::Counterexample { .. } => return None,
        })
    }
}

fn skewed_form(w: &[f64], k: f64) -> f64 {
    let sq: f64 = w.iter().map(|x| x * x).sum();
    let total: f64 = w.iter().sum();
    let cross = 0.5 * (total * total - sq);
    sq - k * cross
}

/// Rounded rectangle `[0, epsilon] x [0, 3]` with flat sides and
/// `q`-norm corners; returns the defining function and its gradient.
fn rounded_rectangle(x: f64, y: f64, epsilon: f64, q: f64) -> (f64, [f64; 2]) {
    let rho = COUNTEREXAMPLE_CORNER;
    let u = x / epsilon;
    let v = y / 3.0;
    let a = (u - (1.0 - rho)).max(0.0);
    let b = (v - (1.0 - rho)).max(0.0);
    let m = a.max(b);
    if m == 0.0 {
        return (-1.0, [0.0, 0.0]);
    }
    // Scale by the larger entry to keep the q-th powers in range.
    let (ra, rb) = (a / m, b / m);
    let s = ra.powf(q) + rb.powf(q);
    let norm_q = m * s.powf(1.0 / q);
    let inner = s.powf(1.0 / q - 1.0);
    let da = inner * ra.powf(q - 1.0);
    let db = inner * rb.powf(q - 1.0);
    (norm_q / rho - 1.0, [da / (rho * epsilon), db / (rho * 3.0)])
}

/// Log-sum-exp smooth minimum and the convex weights of its gradient.
fn smooth_min(g1: f64, g2: f64, beta: f64) -> (f64, f64, f64) {
    let m = g1.min(g2);
    let e1 = (-beta * (g1 - m)).exp();
    let e2 = (-beta * (g2 - m)).exp();
    let total = e1 + e2;
    (m - total.ln() / beta, e1 / total, e2 / total)
}

/// A moment image `Omega` with its defining function and geometry.
///
/// Immutable after construction; every query is a pure function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentRegion {
    shape: Shape,
    scale: f64,
    bounding_box: Vec<f64>,
    label: String,
}

impl MomentRegion {
    pub fn from_shape(shape: Shape) -> Result<Self> {
        shape.validate()?;
        Ok(MomentRegion { bounding_box: shape.bounding_box(), label: shape.label(), shape, scale: 1.0 })
    }

    pub fn ball(n: usize, radius: f64) -> Result<Self> {
        Self::from_shape(Shape::Ball { n, radius })
    }

    pub fn ellipsoid(axes: &[f64]) -> Result<Self> {
        Self::from_shape(Shape::Ellipsoid { axes: axes.to_vec() })
    }

    pub fn concave_sqrt(n: usize, c: f64) -> Result<Self> {
        Self::from_shape(Shape::ConcaveSqrt { n, c })
    }

    pub fn convex_power(n: usize, a: f64, p: f64) -> Result<Self> {
        Self::from_shape(Shape::ConvexPower { n, a, p })
    }

    /// Smooth approximation of `{x <= epsilon, y <= 3} u {x + y <= 2}`.
    ///
    /// The rectangle keeps exactly flat sides away from its `q`-rounded
    /// corner, and the union is smoothed by a log-sum-exp minimum of
    /// sharpness `beta`.
    pub fn counterexample(epsilon: f64, beta: f64, q: f64) -> Result<Self> {
        Self::from_shape(Shape::Counterexample { epsilon, beta, q })
    }

    pub fn skewed_quadric(n: usize, k: f64) -> Result<Self> {
        Self::from_shape(Shape::SkewedQuadric { n, k })
    }

    /// The region `s * Omega`.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter(format!("scale must be positive, got {s}")));
        }
        let scale = self.scale * s;
        Ok(MomentRegion {
            shape: self.shape.clone(),
            scale,
            bounding_box: self.shape.bounding_box().iter().map(|b| b * scale).collect(),
            label: if scale == 1.0 { self.shape.label() } else { format!("{} scaled by {scale}", self.shape.label()) },
        })
    }

    pub fn dim(&self) -> usize {
        self.shape.dim()
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn bounding_box(&self) -> &[f64] {
        &self.bounding_box
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Builders whose moment image has convex complement and is symmetric
    /// under permutation of coordinates.
    pub fn is_symmetric_concave(&self) -> bool {
        matches!(self.shape, Shape::Ball { .. } | Shape::ConcaveSqrt { .. })
    }

    pub fn is_counterexample(&self) -> bool {
        matches!(self.shape, Shape::Counterexample { .. })
    }

    fn unscale(&self, w: &[f64]) -> Vec<f64> {
        w.iter().map(|x| x / self.scale).collect()
    }

    fn check_dim(&self, w: &[f64]) -> Result<()> {
        if w.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: w.len() });
        }
        Ok(())
    }

    /// The defining function `G`; no argument checks.
    pub fn defining_function(&self, w: &[f64]) -> f64 {
        self.shape.value(&self.unscale(w))
    }

    /// The analytic gradient of `G`; no argument checks.
    pub fn gradient(&self, w: &[f64]) -> Vec<f64> {
        self.shape.gradient(&self.unscale(w)).into_iter().map(|g| g / self.scale).collect()
    }

    /// Minkowski gauge `N` of `Omega` (1-homogeneous, `Omega = {N <= 1}`).
    pub fn gauge(&self, w: &[f64]) -> Result<f64> {
        if w.iter().all(|&x| x == 0.0) {
            return Ok(0.0);
        }
        match self.shape.gauge(w) {
            Some(g) => Ok(g / self.scale),
            None => self.gauge_by_ray(w),
        }
    }

    /// Gauge computed by ray root-finding, independent of the closed forms.
    pub fn gauge_by_ray(&self, w: &[f64]) -> Result<f64> {
        let b = self.boundary_point(w)?;
        Ok(norm(w) / norm(&b))
    }

    /// Gradient of the gauge: `grad G(b) / (grad G(b) . b)` at the boundary
    /// point `b` on the ray through `w`.
    pub fn gauge_gradient(&self, w: &[f64]) -> Result<Vec<f64>> {
        if let Some(g) = self.shape.gauge_gradient(w) {
            return Ok(g.into_iter().map(|d| d / self.scale).collect());
        }
        let b = self.boundary_point(w)?;
        let grad = self.gradient(&b);
        let pairing = dot(&grad, &b);
        if pairing <= 0.0 {
            return Err(Error::DegeneratePairing(pairing));
        }
        Ok(grad.into_iter().map(|d| d / pairing).collect())
    }

    /// Membership test `G(w) <= 0` (boundary points count as inside).
    pub fn contains(&self, w: &[f64]) -> Result<bool> {
        self.check_dim(w)?;
        if w.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::NegativeCoordinate(w.to_vec()));
        }
        Ok(self.defining_function(w) <= TOL_ROOT)
    }

    /// Intersection of the ray `t * direction`, `t > 0`, with the boundary.
    ///
    /// Bisection brackets the root inside the bounding box, then Newton's
    /// method (safeguarded by the bracket) polishes it to `|G| <= TOL_ROOT`.
    pub fn boundary_point(&self, direction: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(direction)?;
        if direction.iter().any(|&x| x < 0.0 || !x.is_finite()) {
            return Err(Error::NegativeCoordinate(direction.to_vec()));
        }
        if direction.iter().all(|&x| x == 0.0) {
            return Err(Error::InvalidParameter("direction must be nonzero".into()));
        }
        let bracket_err = || Error::Bracketing { direction: direction.to_vec() };
        let t_hi = direction
            .iter()
            .zip(&self.bounding_box)
            .filter(|(d, _)| **d > 0.0)
            .map(|(d, b)| b / d)
            .fold(f64::INFINITY, f64::min);
        let at = |t: f64| -> Vec<f64> { direction.iter().map(|d| t * d).collect() };
        let g = |t: f64| self.defining_function(&at(t));

        let g_lo = g(0.0);
        let g_hi = g(t_hi);
        if !(g_lo < 0.0 && g_hi > 0.0) {
            return Err(bracket_err());
        }

        let (mut lo, mut hi) = (0.0, t_hi);
        while hi - lo > 1e-6 * t_hi {
            let mid = 0.5 * (lo + hi);
            if g(mid) <= 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }

        let mut t = 0.5 * (lo + hi);
        for _ in 0..60 {
            let w = at(t);
            let f = self.defining_function(&w);
            if f.abs() <= 1e-15 {
                break;
            }
            if f < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let slope = dot(&self.gradient(&w), direction);
            let mut next = if slope > 0.0 && slope.is_finite() { t - f / slope } else { f64::NAN };
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - t).abs() <= 4.0 * f64::EPSILON * t {
                t = next;
                break;
            }
            t = next;
        }

        let w = at(t);
        let residual = self.defining_function(&w).abs();
        if residual > TOL_ROOT {
            return Err(Error::OffBoundary { point: w, residual });
        }
        Ok(w)
    }

    /// The unnormalized outward normal `grad G(w)` at a boundary point.
    pub fn outward_normal(&self, w: &[f64]) -> Result<Vec<f64>> {
        self.check_dim(w)?;
        let residual = self.defining_function(w).abs();
        if residual > TOL_ROOT {
            return Err(Error::OffBoundary { point: w.to_vec(), residual });
        }
        let grad = self.gradient(w);
        let size = norm(&grad);
        if !size.is_finite() || size < GRADIENT_FLOOR {
            return Err(Error::DegenerateNormal(w.to_vec()));
        }
        Ok(grad)
    }

    /// Boundary point and normal along the ray with the given angles.
    pub(crate) fn boundary_sample(&self, angles: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let d = numerics::orthant_direction(angles);
        let w = self.boundary_point(&d)?;
        let nu = self.gradient(&w);
        Ok((w, nu))
    }

    /// Classifies monotonicity by sampling `samples` boundary points in the
    /// open positive orthant. The result is sampled, not certified.
    pub fn classify_monotonicity(&self, samples: usize, exec: Execution) -> Result<MonotonicityReport> {
        if samples < 100 {
            return Err(Error::InvalidParameter(format!(
                "monotonicity classification needs at least 100 samples, got {samples}"
            )));
        }
        let n = self.dim();
        let indices: Vec<u64> = (1..=samples as u64).collect();
        let evaluated = exec::map(exec, &indices, |&i| {
            let angles = numerics::halton_angles(i, n);
            self.boundary_sample(&angles)
        });

        let mut used = 0usize;
        let mut most_negative: Option<(f64, usize)> = None;
        let mut flattest: Option<(f64, usize)> = None;
        let mut weakest: Option<(f64, usize)> = None;
        let mut points = Vec::with_capacity(evaluated.len());
        for sample in evaluated {
            let (w, nu) = sample?;
            if w.iter().any(|&x| x <= TOL_AXIS) {
                continue;
            }
            let idx = points.len();
            let nu_norm = norm(&nu);
            let w_norm = norm(&w);
            if !nu_norm.is_finite() || nu_norm < GRADIENT_FLOOR {
                return Err(Error::DegenerateNormal(w));
            }
            for i in 0..n {
                let nu_hat = nu[i] / nu_norm;
                let w_hat = w[i] / w_norm;
                if nu_hat < -TOL_MONO && most_negative.is_none_or(|(v, _)| nu_hat < v) {
                    most_negative = Some((nu_hat, idx));
                }
                if nu_hat >= -TOL_MONO && is_degenerate_entry(nu_hat, w_hat) {
                    let score = nu_hat / w_hat.powi(FLATNESS_ORDER);
                    if flattest.is_none_or(|(v, _)| score < v) {
                        flattest = Some((score, idx));
                    }
                }
                if weakest.is_none_or(|(v, _)| nu_hat < v) {
                    weakest = Some((nu_hat, idx));
                }
            }
            used += 1;
            points.push((w, nu));
        }
        if used == 0 {
            return Err(Error::InvalidParameter("no interior boundary samples".into()));
        }

        let (class, (_, idx)) = if let Some(neg) = most_negative {
            (MonotonicityClass::NotMonotone, neg)
        } else if let Some(flat) = flattest {
            (MonotonicityClass::MonotoneNotStrict, flat)
        } else {
            (MonotonicityClass::StrictlyMonotone, weakest.expect("at least one sample"))
        };
        let (w, nu) = points.swap_remove(idx);
        let min_entry = weakest.map(|(v, _)| v).unwrap_or(0.0);
        Ok(MonotonicityReport {
            class,
            witness_point: w,
            witness_normal: nu,
            min_normalized_entry: min_entry,
            samples: used,
            dynamically_convex: (n == 2).then_some(class == MonotonicityClass::StrictlyMonotone),
            certified: false,
            note: "sampled, not certified".to_string(),
        })
    }
}

/// Whether a normalized normal entry counts as zero at a point whose
/// normalized coordinate is `w_hat`.
pub fn is_degenerate_entry(nu_hat: f64, w_hat: f64) -> bool {
    nu_hat.abs() <= TOL_MONO * w_hat.powi(FLATNESS_ORDER)
}

/// The modified normal: entries are zeroed where the base point lies on a
/// coordinate hyperplane (`w_i <= TOL_AXIS`).
pub fn tilde_normal(w: &[f64], nu: &[f64]) -> Vec<f64> {
    w.iter().zip(nu).map(|(&wi, &ni)| if wi > TOL_AXIS { ni } else { 0.0 }).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MonotonicityClass {
    StrictlyMonotone,
    MonotoneNotStrict,
    NotMonotone,
}

impl MonotonicityClass {
    pub fn is_monotone(self) -> bool {
        self != MonotonicityClass::NotMonotone
    }
}

/// Result of [`MomentRegion::classify_monotonicity`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MonotonicityReport {
    pub class: MonotonicityClass,
    /// Boundary point exhibiting the class (the weakest normal for strictly
    /// monotone regions).
    pub witness_point: Vec<f64>,
    pub witness_normal: Vec<f64>,
    /// Smallest normalized normal entry over all samples.
    pub min_normalized_entry: f64,
    pub samples: usize,
    /// Only reported in dimension 4, where it coincides with strict monotonicity.
    pub dynamically_convex: Option<bool>,
    pub certified: bool,
    pub note: String,
}

/// Default ray count for the monotonicity gate used by the capacity routines.
pub const DEFAULT_MONO_SAMPLES: usize = 2000;

/// Sample count that keeps the angular spacing of the gate comparable in
/// every dimension.
pub fn default_samples(n: usize) -> usize {
    DEFAULT_MONO_SAMPLES * (n - 1)
}
