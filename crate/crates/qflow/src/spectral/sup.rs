//! Sup-norms by grid sampling with dyadic refinement and local Newton polish.
//!
//! The result is a lower bound for the true sup-norm; in practice it is
//! accurate to ~1e-14 once the grid resolves every local maximum.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{covariant_derivative, tensor_inner, TrigPoly, MAX_DIM};

const STABLE_TOL: f64 = 1e-12;
const MAX_GRID_POINTS: usize = 4_000_000;
const CANDIDATES: usize = 12;

/// Uniform grid on T^d with `n` points per axis, row-major.
pub fn grid_points(dim: usize, n: usize) -> Vec<[f64; MAX_DIM]> {
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let total = n.pow(dim as u32);
    (0..total)
        .map(|mut flat| {
            let mut x = [0.0; MAX_DIM];
            for a in (0..dim).rev() {
                x[a] = (flat % n) as f64 * h;
                flat /= n;
            }
            x
        })
        .collect()
}

/// Values of `f` on [`grid_points`]`(dim, n)`.
pub fn sample_grid(f: &TrigPoly, n: usize) -> Vec<Complex64> {
    let dim = f.dim();
    let h = 2.0 * std::f64::consts::PI / n as f64;
    let modes: Vec<_> = f.iter().collect();
    // phase[a][j][m] = e^{i k_a(m) x_j}
    let phase: Vec<Vec<Vec<Complex64>>> = (0..dim)
        .map(|a| {
            (0..n)
                .map(|j| {
                    modes
                        .iter()
                        .map(|(k, _)| Complex64::from_polar(1.0, k.get(a) as f64 * j as f64 * h))
                        .collect()
                })
                .collect()
        })
        .collect();
    let total = n.pow(dim as u32);
    let mut idx = vec![0usize; dim];
    let mut out = Vec::with_capacity(total);
    for flat in 0..total {
        let mut r = flat;
        for a in (0..dim).rev() {
            idx[a] = r % n;
            r /= n;
        }
        let v: Complex64 = modes
            .iter()
            .enumerate()
            .map(|(m, (_, c))| (0..dim).fold(*c, |acc, a| acc * phase[a][idx[a]][m]))
            .sum();
        out.push(v);
    }
    out
}

/// Value, gradient and Hessian of `|f|²` at `x`.
fn jet(f: &TrigPoly, x: &[f64]) -> (f64, DVector<f64>, DMatrix<f64>) {
    let d = f.dim();
    let mut v = Complex64::new(0.0, 0.0);
    let mut g = vec![Complex64::new(0.0, 0.0); d];
    let mut h = vec![Complex64::new(0.0, 0.0); d * d];
    for (k, c) in f.iter() {
        let phase: f64 = (0..d).map(|i| k.get(i) as f64 * x[i]).sum();
        let e = c * Complex64::from_polar(1.0, phase);
        v += e;
        for a in 0..d {
            let ka = k.get(a) as f64;
            g[a] += e * Complex64::new(0.0, ka);
            for b in 0..d {
                h[a * d + b] -= e * ka * k.get(b) as f64;
            }
        }
    }
    let val = v.norm_sqr();
    let grad = DVector::from_fn(d, |a, _| 2.0 * (v.conj() * g[a]).re);
    let hess = DMatrix::from_fn(d, d, |a, b| 2.0 * (g[a].conj() * g[b] + v.conj() * h[a * d + b]).re);
    (val, grad, hess)
}

/// Ascends `|f|²` from `x0` with damped Newton steps; never returns less than the start value.
fn polish(f: &TrigPoly, x0: &[f64]) -> f64 {
    let d = f.dim();
    let mut x: Vec<f64> = x0[..d].to_vec();
    let (mut best, mut grad, mut hess) = jet(f, &x);
    for _ in 0..60 {
        let step = match (-&hess).cholesky() {
            Some(ch) => ch.solve(&grad),
            None => {
                let scale = hess.iter().fold(1.0f64, |m, v| m.max(v.abs()));
                &grad / scale
            }
        };
        if step.norm() < 1e-15 {
            break;
        }
        let mut alpha = 1.0;
        let mut improved = false;
        while alpha > 1e-6 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(xi, si)| xi + alpha * si).collect();
            let (val, g2, h2) = jet(f, &trial);
            if val >= best {
                let gain = val - best;
                x = trial;
                best = val;
                grad = g2;
                hess = h2;
                improved = gain > 0.0;
                break;
            }
            alpha *= 0.5;
        }
        if !improved {
            break;
        }
    }
    best
}

fn local_maxima(vals: &[f64], dim: usize, n: usize) -> Vec<usize> {
    let stride: Vec<usize> = (0..dim).map(|a| n.pow((dim - 1 - a) as u32)).collect();
    let mut peaks: Vec<usize> = (0..vals.len())
        .filter(|&flat| {
            (0..dim).all(|a| {
                let coord = (flat / stride[a]) % n;
                let up = flat - coord * stride[a] + ((coord + 1) % n) * stride[a];
                let down = flat - coord * stride[a] + ((coord + n - 1) % n) * stride[a];
                vals[flat] >= vals[up] && vals[flat] >= vals[down]
            })
        })
        .collect();
    peaks.sort_by(|&a, &b| vals[b].total_cmp(&vals[a]));
    peaks.truncate(CANDIDATES);
    peaks
}

/// `sup_x |f(x)|`.
pub fn sup_norm(f: &TrigPoly) -> f64 {
    if f.is_empty() {
        return 0.0;
    }
    if f.degree() == 0 {
        return f.abs_sum();
    }
    let dim = f.dim();
    let mut n = (4 * f.degree() as usize + 4).max(8);
    let mut prev: Option<f64> = None;
    while n.pow(dim as u32) <= MAX_GRID_POINTS {
        let pts = grid_points(dim, n);
        let vals: Vec<f64> = sample_grid(f, n).iter().map(|v| v.norm_sqr()).collect();
        let grid_max = vals.iter().cloned().fold(0.0, f64::max);
        let best = local_maxima(&vals, dim, n)
            .into_iter()
            .map(|i| polish(f, &pts[i]))
            .fold(grid_max, f64::max)
            .sqrt();
        if let Some(p) = prev {
            if (best - p).abs() <= STABLE_TOL * best.max(1.0) {
                return best.max(p);
            }
            prev = Some(best.max(p));
        } else {
            prev = Some(best);
        }
        n *= 2;
    }
    prev.unwrap_or(0.0)
}

/// `sup_x ℓ(∇^k f)(x)` where `ℓ(T)² = ⟨T, T⟩` pointwise.
pub fn pointwise_length_sup(f: &TrigPoly, k: usize) -> f64 {
    let wide = f.with_cap(2 * f.degree().max(f.cap())).expect("widened cap holds every mode");
    let t = covariant_derivative(&wide, k);
    let sq = tensor_inner(&t, &t).expect("product fits the doubled cap");
    sup_norm(&sq).sqrt()
}
