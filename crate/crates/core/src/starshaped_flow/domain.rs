//! Star-shaped domains given by a radial function over a toric base.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::moment_region::MomentRegion;
use crate::numerics::{dot, norm};

use super::moment;

/// One smooth bump `sign * phi(d(u, center) / width)` on the unit sphere,
/// with `phi(r) = exp(1 - 1 / (1 - r^2))` for `r < 1` and zero beyond.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bump {
    pub center: Vec<f64>,
    pub sign: f64,
}

/// A multiplicative factor `1 + amplitude * sum_j bump_j` on the radial function.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Perturbation {
    pub seed: u64,
    pub amplitude: f64,
    pub width: f64,
    pub bumps: Vec<Bump>,
}

fn profile(r: f64) -> (f64, f64) {
    // Returns phi(r) and phi'(r) / r (finite at r = 0).
    if r >= 1.0 {
        return (0.0, 0.0);
    }
    let s = 1.0 - r * r;
    let phi = (1.0 - 1.0 / s).exp();
    (phi, -2.0 * phi / (s * s))
}

impl Perturbation {
    /// Factor value and its tangential gradient at the unit vector `u`.
    fn eval(&self, u: &[f64], with_gradient: bool) -> (f64, Vec<f64>) {
        let mut value = 1.0;
        let mut grad = vec![0.0; if with_gradient { u.len() } else { 0 }];
        for bump in &self.bumps {
            let c = &bump.center;
            let cos_d = dot(u, c);
            let tangential: Vec<f64> = c.iter().zip(u).map(|(ci, ui)| ci - cos_d * ui).collect();
            let sin_d = norm(&tangential);
            let d = sin_d.atan2(cos_d);
            let r = d / self.width;
            let (phi, dphi_over_r) = profile(r);
            if phi == 0.0 {
                continue;
            }
            value += self.amplitude * bump.sign * phi;
            if with_gradient {
                // grad_S d = -(c - (u.c) u) / sin d, and phi'(r) dr = (phi'(r)/r) (d / width^2) dd.
                let ratio = if sin_d > 1e-12 { d / sin_d } else { 1.0 };
                let coef = -self.amplitude * bump.sign * dphi_over_r * ratio / (self.width * self.width);
                for (g, t) in grad.iter_mut().zip(&tangential) {
                    *g += coef * t;
                }
            }
        }
        (value, grad)
    }
}

/// A star-shaped domain `{ |z| <= rho(z / |z|) }` in `R^{2n}` whose radial
/// function is `radial_scale * f(u) * rho_base(u)`, where `rho_base` comes
/// from the toric domain over `base` and `f` is a product of bump factors.
///
/// Points use coordinates `(x_1, y_1, ..., x_n, y_n)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarShapedDomain {
    pub base: MomentRegion,
    pub radial_scale: f64,
    pub perturbations: Vec<Perturbation>,
    pub label: String,
}

impl StarShapedDomain {
    /// The toric domain `mu^{-1}(base)`.
    pub fn toric(base: &MomentRegion) -> Self {
        StarShapedDomain {
            label: format!("toric {}", base.label()),
            base: base.clone(),
            radial_scale: 1.0,
            perturbations: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        2 * self.base.dim()
    }

    pub fn is_toric(&self) -> bool {
        self.radial_scale == 1.0 && self.perturbations.is_empty()
    }

    /// The domain with radial function multiplied by `s`.
    pub fn dilated(&self, s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidParameter(format!("dilation must be positive, got {s}")));
        }
        let mut out = self.clone();
        out.radial_scale *= s;
        out.label = format!("{} dilated by {s}", self.label);
        Ok(out)
    }

    fn check(&self, z: &[f64]) -> Result<()> {
        if z.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: z.len() });
        }
        Ok(())
    }

    fn shape_factor(&self, u: &[f64], with_gradient: bool) -> (f64, Vec<f64>) {
        let mut value = 1.0;
        let mut grad = vec![0.0; if with_gradient { u.len() } else { 0 }];
        for p in &self.perturbations {
            let (v, g) = p.eval(u, with_gradient);
            for (acc, gi) in grad.iter_mut().zip(&g) {
                *acc = *acc * v + value * gi;
            }
            value *= v;
        }
        (value, grad)
    }

    fn base_hamiltonian(&self, z: &[f64]) -> Result<f64> {
        self.base.gauge(&moment(z))
    }

    fn base_gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        let w = moment(z);
        if w.iter().all(|&x| x == 0.0) {
            return Ok(vec![0.0; z.len()]);
        }
        let dn = self.base.gauge_gradient(&w)?;
        let mut g = vec![0.0; z.len()];
        for i in 0..w.len() {
            if w[i] > 0.0 {
                let c = 2.0 * std::f64::consts::PI * dn[i];
                g[2 * i] = c * z[2 * i];
                g[2 * i + 1] = c * z[2 * i + 1];
            }
        }
        Ok(g)
    }

    /// The 2-homogeneous Hamiltonian `H(z) = (|z| / rho(z / |z|))^2`, whose
    /// level set `{H = 1}` is the boundary.
    pub fn hamiltonian(&self, z: &[f64]) -> Result<f64> {
        self.check(z)?;
        let r = norm(z);
        if r == 0.0 {
            return Ok(0.0);
        }
        let hb = self.base_hamiltonian(z)?;
        if self.perturbations.is_empty() {
            return Ok(hb / (self.radial_scale * self.radial_scale));
        }
        let u: Vec<f64> = z.iter().map(|x| x / r).collect();
        let (f, _) = self.shape_factor(&u, false);
        Ok(hb / (self.radial_scale * f).powi(2))
    }

    /// Analytic gradient of [`hamiltonian`](Self::hamiltonian).
    pub fn hamiltonian_gradient(&self, z: &[f64]) -> Result<Vec<f64>> {
        self.check(z)?;
        let s2 = self.radial_scale * self.radial_scale;
        let gb = self.base_gradient(z)?;
        if self.perturbations.is_empty() {
            return Ok(gb.into_iter().map(|g| g / s2).collect());
        }
        let r = norm(z);
        if r == 0.0 {
            return Ok(vec![0.0; z.len()]);
        }
        let u: Vec<f64> = z.iter().map(|x| x / r).collect();
        let hb = self.base_hamiltonian(z)?;
        let (f, grad_f) = self.shape_factor(&u, true);
        // H = hb * g(u) with g = 1 / (s f)^2; grad of u -> g is (dg/df) grad_S f / |z|.
        let g = 1.0 / (s2 * f * f);
        let dg = -2.0 / (s2 * f * f * f);
        Ok(gb.iter().zip(&grad_f).map(|(b, df)| g * b + hb * dg * df / r).collect())
    }

    /// Central-difference gradient of the Hamiltonian.
    pub fn hamiltonian_gradient_fd(&self, z: &[f64], step: f64) -> Result<Vec<f64>> {
        let mut out = vec![0.0; z.len()];
        let mut p = z.to_vec();
        for i in 0..z.len() {
            p[i] = z[i] + step;
            let hp = self.hamiltonian(&p)?;
            p[i] = z[i] - step;
            let hm = self.hamiltonian(&p)?;
            p[i] = z[i];
            out[i] = (hp - hm) / (2.0 * step);
        }
        Ok(out)
    }

    /// Radial function `rho(u)` at a unit vector.
    pub fn radial(&self, u: &[f64]) -> Result<f64> {
        Ok(1.0 / self.hamiltonian(u)?.sqrt())
    }

    /// Tangential gradient of the radial function at a unit vector.
    pub fn radial_gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        // rho extends 0-homogeneously as H^{-1/2} |z|; at |z| = 1 the tangential
        // part of its gradient is -grad H / (2 H^{3/2}) projected onto T_u S.
        let h = self.hamiltonian(u)?;
        let gh = self.hamiltonian_gradient(u)?;
        let radial_part = dot(&gh, u);
        Ok(gh.iter().zip(u).map(|(g, ui)| -(g - radial_part * ui) / (2.0 * h.powf(1.5))).collect())
    }

    /// Radial projection `z / sqrt(H(z))` onto the boundary.
    pub fn project(&self, z: &[f64]) -> Result<Vec<f64>> {
        let h = self.hamiltonian(z)?;
        if !(h > 0.0) {
            return Err(Error::InvalidParameter("cannot project the origin".into()));
        }
        let c = 1.0 / h.sqrt();
        Ok(z.iter().map(|x| x * c).collect())
    }
}

/// Uniformly distributed unit vectors in `R^dim` from a seeded generator.
pub(crate) fn sphere_points(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| loop {
            let v: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let r = norm(&v);
            if r > 1e-12 {
                break v.into_iter().map(|x| x / r).collect();
            }
        })
        .collect()
}

/// Adds `count` bumps of height `amplitude` and geodesic radius `width` at
/// seeded random centers with seeded random signs.
///
/// Rejects parameters for which the factor could reach zero, i.e. when the
/// negative bumps could stack to `amplitude * (#negative) >= 1`.
pub fn perturb(
    domain: &StarShapedDomain,
    seed: u64,
    amplitude: f64,
    width: f64,
    count: usize,
) -> Result<StarShapedDomain> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidParameter(format!("amplitude must be >= 0, got {amplitude}")));
    }
    if !(width > 0.0 && width.is_finite()) {
        return Err(Error::InvalidParameter(format!("width must be > 0, got {width}")));
    }
    if count == 0 {
        return Err(Error::InvalidParameter("bump count must be >= 1".into()));
    }
    if amplitude == 0.0 {
        return Ok(domain.clone());
    }
    let centers = sphere_points(domain.dim(), count, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5bd1_e995);
    let bumps: Vec<Bump> = centers
        .into_iter()
        .map(|center| Bump { center, sign: if rng.random_bool(0.5) { 1.0 } else { -1.0 } })
        .collect();
    let negative = bumps.iter().filter(|b| b.sign < 0.0).count() as f64;
    if amplitude * negative >= 1.0 {
        return Err(Error::InvalidParameter(format!(
            "amplitude {amplitude} with {negative} negative bumps can make the radial function nonpositive"
        )));
    }
    let mut out = domain.clone();
    out.perturbations.push(Perturbation { seed, amplitude, width, bumps });
    out.label = format!("{} + bumps(seed={seed}, amplitude={amplitude}, width={width}, count={count})", domain.label);
    Ok(out)
}

/// Number of sphere samples used by [`c1_distance`] unless told otherwise.
pub const DEFAULT_C1_SAMPLES: usize = 4000;
const C1_SEED: u64 = 0x00c1_d157;

/// Sampled C^1 distance `max_u |rho_A - rho_B| + |grad_S (rho_A - rho_B)|`.
pub fn c1_distance(a: &StarShapedDomain, b: &StarShapedDomain, samples: usize) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch { expected: a.dim(), got: b.dim() });
    }
    let mut best: f64 = 0.0;
    for u in sphere_points(a.dim(), samples, C1_SEED) {
        let diff = a.radial(&u)? - b.radial(&u)?;
        let ga = a.radial_gradient(&u)?;
        let gb = b.radial_gradient(&u)?;
        let gdiff: Vec<f64> = ga.iter().zip(&gb).map(|(x, y)| x - y).collect();
        best = best.max(diff.abs() + norm(&gdiff));
    }
    Ok(best)
}
