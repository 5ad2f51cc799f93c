//! Residuals of the growth-bound identities on the flat torus.
//!
//! Each function returns a nonnegative residual (exact identities) or a
//! signed margin (inequalities, nonpositive when the bound holds).

use super::{covariant_derivative, grid_points, sample_grid, sup_norm, tensor_inner, TrigPoly};
use crate::error::Result;

/// `Δ(fg) - [fΔg + gΔf - 2 Σ_i ∂_i f ∂_i g]`, largest coefficient.
pub fn product_rule_residual(f: &TrigPoly, g: &TrigPoly) -> Result<f64> {
    let lhs = f.multiply(g)?.laplacian();
    let grad_pair = tensor_inner(&covariant_derivative(&f.conj(), 1), &covariant_derivative(g, 1))?;
    let rhs = &(&f.multiply(&g.laplacian())? + &g.multiply(&f.laplacian())?) - &grad_pair.scale_re(2.0);
    Ok(lhs.max_abs_diff(&rhs))
}

/// `Δ⟨∇^k f, ∇^k g⟩ - [⟨∇^kΔf, ∇^k g⟩ + ⟨∇^k f, ∇^kΔg⟩ - 2⟨∇^{k+1} f, ∇^{k+1} g⟩]`.
pub fn product_rule_tensor_residual(f: &TrigPoly, g: &TrigPoly, k: usize) -> Result<f64> {
    let nf = covariant_derivative(f, k);
    let ng = covariant_derivative(g, k);
    let lhs = tensor_inner(&nf, &ng)?.laplacian();
    let a = tensor_inner(&covariant_derivative(&f.laplacian(), k), &ng)?;
    let b = tensor_inner(&nf, &covariant_derivative(&g.laplacian(), k))?;
    let c = tensor_inner(&covariant_derivative(f, k + 1), &covariant_derivative(g, k + 1))?;
    let rhs = &(&a + &b) - &c.scale_re(2.0);
    Ok(lhs.max_abs_diff(&rhs))
}

/// `Δ∇^k f - ∇^k Δ f`, largest coefficient over all components.
pub fn commutator_residual(f: &TrigPoly, k: usize) -> f64 {
    let a = covariant_derivative(f, k).map(|c| c.laplacian());
    let b = covariant_derivative(&f.laplacian(), k);
    a.max_abs_diff(&b)
}

/// `max_x |Δf(x)| - √d ℓ(∇²f)(x)` over an `n`-point grid per axis.
pub fn laplacian_bound_margin(f: &TrigPoly, n: usize) -> f64 {
    let d = f.dim();
    let lap = sample_grid(&f.laplacian(), n);
    let hess = covariant_derivative(f, 2);
    let comps: Vec<Vec<_>> = hess.components().iter().map(|c| sample_grid(c, n)).collect();
    let root_d = (d as f64).sqrt();
    (0..grid_points(d, n).len())
        .map(|p| {
            let ell = comps.iter().map(|c| c[p].norm_sqr()).sum::<f64>().sqrt();
            lap[p].norm() - root_d * ell
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Measured `‖Δ^k f‖_∞` for `k = 1..=kmax` together with `C K^k`,
/// `K` the largest eigenvalue and `C = Σ|c_k|`.
pub fn laplacian_power_growth(f: &TrigPoly, kmax: usize) -> Vec<(f64, f64)> {
    let c = f.abs_sum();
    let big_k = f.max_eigenvalue() as f64;
    let mut g = f.clone();
    (1..=kmax)
        .map(|k| {
            g = g.laplacian();
            (sup_norm(&g), c * big_k.powi(k as i32))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ModeIndex;
    use num_complex::Complex64;

    fn sample() -> (TrigPoly, TrigPoly) {
        let f = TrigPoly::from_coeffs(
            2,
            8,
            [(ModeIndex::new(&[1, -2]), Complex64::new(0.3, 1.0)), (ModeIndex::new(&[0, 1]), Complex64::new(1.0, -0.2))],
        )
        .unwrap();
        let g = TrigPoly::from_coeffs(
            2,
            8,
            [(ModeIndex::new(&[2, 1]), Complex64::new(-0.7, 0.1)), (ModeIndex::new(&[-1, 0]), Complex64::new(0.4, 0.4))],
        )
        .unwrap();
        (f, g)
    }

    #[test]
    fn product_rules_hold() {
        let (f, g) = sample();
        assert!(product_rule_residual(&f, &g).unwrap() < 1e-12);
        for k in 0..=3 {
            assert!(product_rule_tensor_residual(&f, &g, k).unwrap() < 1e-10);
        }
    }

    #[test]
    fn plus_two_sign_fails() {
        let f = TrigPoly::cos(1, 4, 0, 1).unwrap();
        let lhs = f.multiply(&f).unwrap().laplacian();
        let grad = tensor_inner(&covariant_derivative(&f, 1), &covariant_derivative(&f, 1)).unwrap();
        let wrong = &f.multiply(&f.laplacian()).unwrap().scale_re(2.0) + &grad.scale_re(2.0);
        assert!(lhs.max_abs_diff(&wrong) > 0.1);
    }

    #[test]
    fn commutator_vanishes() {
        let (f, _) = sample();
        for k in 0..=3 {
            assert_eq!(commutator_residual(&f, k), 0.0);
        }
    }

    #[test]
    fn laplacian_bound_holds_on_grid() {
        let (f, g) = sample();
        assert!(laplacian_bound_margin(&f, 32) <= 1e-12);
        assert!(laplacian_bound_margin(&g, 32) <= 1e-12);
    }

    #[test]
    fn power_growth_bounded() {
        let (f, _) = sample();
        for (measured, bound) in laplacian_power_growth(&f, 8) {
            assert!(measured <= bound * (1.0 + 1e-12));
        }
    }
}
