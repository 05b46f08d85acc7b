//! Small numerical building blocks: low-discrepancy points, scalar root
//! finding, one-dimensional minimization and a Nelder-Mead simplex search.

use std::f64::consts::FRAC_PI_2;

const PRIMES: [u64; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

/// Radical inverse of `index` in the given base (van der Corput).
pub fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut factor = inv;
    let mut value = 0.0;
    while index > 0 {
        value += (index % base) as f64 * factor;
        index /= base;
        factor *= inv;
    }
    value
}

/// The `index`-th point of the Halton sequence in `[0, 1)^dim`.
///
/// Index 0 is the origin; callers that need interior points start at 1.
pub fn halton(index: u64, dim: usize) -> Vec<f64> {
    assert!(dim <= PRIMES.len(), "halton: dimension {dim} not supported");
    PRIMES[..dim].iter().map(|&p| radical_inverse(index, p)).collect()
}

/// Maps hyperspherical angles in `[0, pi/2]^(n-1)` to a unit vector in the
/// closed positive orthant of `R^n`.
pub fn orthant_direction(angles: &[f64]) -> Vec<f64> {
    let n = angles.len() + 1;
    let mut d = vec![0.0; n];
    let mut sin_prod = 1.0;
    for (i, &a) in angles.iter().enumerate() {
        d[i] = sin_prod * a.cos();
        sin_prod *= a.sin();
    }
    d[n - 1] = sin_prod;
    // Clean up the exact-zero cases so axis directions stay on the axes.
    for x in &mut d {
        if x.abs() < 1e-300 {
            *x = 0.0;
        }
        *x = x.max(0.0);
    }
    d
}

/// Angles of a low-discrepancy point, scaled to `[0, pi/2]`.
pub fn halton_angles(index: u64, dim: usize) -> Vec<f64> {
    halton(index, dim.saturating_sub(1)).into_iter().map(|u| u * FRAC_PI_2).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Sine of the angle between two nonzero vectors (0 when parallel and
/// co-oriented, up to 1; anti-parallel vectors report 1).
pub fn angle_defect(a: &[f64], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    if na == 0.0 || nb == 0.0 {
        return 1.0;
    }
    let c = dot(a, b) / (na * nb);
    if c <= 0.0 {
        return 1.0;
    }
    // |a x b|^2 = |a|^2|b|^2 - (a.b)^2, evaluated through the component form
    // to keep precision for nearly parallel vectors.
    let mut s2 = 0.0;
    for i in 0..a.len() {
        for j in (i + 1)..a.len() {
            let cross = a[i] * b[j] - a[j] * b[i];
            s2 += cross * cross;
        }
    }
    (s2.sqrt() / (na * nb)).min(1.0)
}

pub fn gcd(a: u64, b: u64) -> u64 {
    let (mut a, mut b) = (a, b);
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Bisection for a sign change of `f` on `[lo, hi]`, given the endpoint values.
///
/// Returns the midpoint of the final bracket; stops once the bracket is
/// narrower than `x_tol` or `max_iter` halvings have been made.
pub fn bisect<F: FnMut(f64) -> f64>(
    mut f: F,
    mut lo: f64,
    mut hi: f64,
    mut f_lo: f64,
    x_tol: f64,
    max_iter: usize,
) -> f64 {
    for _ in 0..max_iter {
        if (hi - lo).abs() <= x_tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid < 0.0) == (f_lo < 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section minimization of a unimodal `f` on `[a, b]`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, x_tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..200 {
        if (b - a).abs() <= x_tol {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Outcome of a Nelder-Mead search.
#[derive(Clone, Debug)]
pub struct SimplexMinimum {
    pub point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

/// Derivative-free Nelder-Mead minimization with standard coefficients.
///
/// `steps` gives the initial simplex edge along each coordinate. The search
/// stops when the spread of function values drops below `f_tol`, when the
/// best value drops below `f_target`, or after `max_evals` evaluations.
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    start: &[f64],
    steps: &[f64],
    f_tol: f64,
    f_target: f64,
    max_evals: usize,
) -> SimplexMinimum {
    let n = start.len();
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(start.to_vec());
    for i in 0..n {
        let mut p = start.to_vec();
        p[i] += steps[i];
        simplex.push(p);
    }
    let mut values: Vec<f64> = simplex.iter().map(|p| f(p)).collect();
    let mut evals = n + 1;

    loop {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();

        if values[0] <= f_target || (values[n] - values[0]).abs() <= f_tol || evals >= max_evals {
            break;
        }

        let mut centroid = vec![0.0; n];
        for p in &simplex[..n] {
            for (c, x) in centroid.iter_mut().zip(p) {
                *c += x / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> { centroid.iter().zip(&simplex[n]).map(|(c, w)| c + t * (w - c)).collect() };

        let reflected = along(-1.0);
        let f_r = f(&reflected);
        evals += 1;
        if f_r < values[0] {
            let expanded = along(-2.0);
            let f_e = f(&expanded);
            evals += 1;
            if f_e < f_r {
                simplex[n] = expanded;
                values[n] = f_e;
            } else {
                simplex[n] = reflected;
                values[n] = f_r;
            }
        } else if f_r < values[n - 1] {
            simplex[n] = reflected;
            values[n] = f_r;
        } else {
            let (contracted, f_c) = if f_r < values[n] {
                let p = along(-0.5);
                let v = f(&p);
                (p, v)
            } else {
                let p = along(0.5);
                let v = f(&p);
                (p, v)
            };
            evals += 1;
            if f_c < values[n].min(f_r) {
                simplex[n] = contracted;
                values[n] = f_c;
            } else {
                let best = simplex[0].clone();
                for i in 1..=n {
                    for (x, b) in simplex[i].iter_mut().zip(&best) {
                        *x = b + 0.5 * (*x - b);
                    }
                    values[i] = f(&simplex[i]);
                    evals += 1;
                }
            }
        }
    }

    SimplexMinimum { point: simplex[0].clone(), value: values[0], evaluations: evals }
}
