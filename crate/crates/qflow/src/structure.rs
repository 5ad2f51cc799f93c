//! Structure maps of the Laplacian-generated flow.
//!
//! `L = -Δ/2`, `δ(f) = df`, `δ†(x)(a ⊗ ω) = a⟨dx, ω⟩` and `σ = 0`.
//! Together they form the structure matrix
//!
//! ```text
//! Θ(a) = | L(a)   δ†(a) |
//!        | δ(a)   0     |
//! ```
//!
//! acting on `H ⊗ (C ⊕ k₀)`.

use num_complex::Complex64;

use crate::error::Result;
use crate::spectral::{exterior_derivative, form_inner, k0_norm, pointwise_length_sup, sup_norm, OneForm, TrigPoly};

/// `L(x) = -Δx / 2`.
pub fn generator_l(x: &TrigPoly) -> TrigPoly {
    x.laplacian().scale_re(-0.5)
}

/// `δ(x) = dx`.
pub fn delta(x: &TrigPoly) -> OneForm {
    exterior_derivative(x)
}

/// `δ(x)†(a ⊗ ω) = a ⟨dx, ω⟩`.
pub fn delta_dagger(x: &TrigPoly, a: &TrigPoly, omega: &OneForm) -> Result<TrigPoly> {
    a.multiply(&form_inner(&delta(x), omega)?)
}

/// `⟨δx, δy⟩ - [L(x*y) - x*L(y) - L(x*)y]`, largest coefficient.
pub fn cocycle_residual(x: &TrigPoly, y: &TrigPoly) -> Result<f64> {
    let lhs = form_inner(&delta(x), &delta(y))?;
    let xs = x.conj();
    let rhs = &(&generator_l(&xs.multiply(y)?) - &xs.multiply(&generator_l(y))?) - &generator_l(&xs).multiply(y)?;
    Ok(lhs.max_abs_diff(&rhs))
}

/// Element of `H ⊗ (C ⊕ k₀)`: a scalar section and a form-valued section.
#[derive(Clone, Debug, PartialEq)]
pub struct AugmentedVector {
    pub scalar: TrigPoly,
    pub form: OneForm,
}

impl AugmentedVector {
    /// `ψ ⊗ (w ⊕ ω)`.
    pub fn simple(psi: &TrigPoly, w: Complex64, omega: &OneForm) -> Result<Self> {
        Ok(AugmentedVector { scalar: psi.scale(w), form: omega.mul_fn(psi)? })
    }

    pub fn zero(dim: usize, cap: i64) -> Self {
        AugmentedVector { scalar: TrigPoly::zero(dim, cap), form: OneForm::zero(dim, cap) }
    }

    /// `(‖scalar‖² + Σ_i ‖form_i‖²)^{1/2}` in `L²`.
    pub fn norm(&self) -> f64 {
        let s = self.scalar.l2_norm().powi(2);
        let f: f64 = self.form.components().iter().map(|c| c.l2_norm().powi(2)).sum();
        (s + f).sqrt()
    }

    pub fn is_zero(&self) -> bool {
        self.scalar.is_empty() && self.form.is_zero()
    }
}

/// `Θ(a) v`: scalar `L(a)s + Σ_i ∂_i a · F_i`, form `s · da`.
///
/// On `v = ψ ⊗ (w ⊕ ω)` with self-adjoint `ω` the scalar block equals
/// `L(a)ψw + ψ⟨ω, da⟩`.
pub fn theta_apply(a: &TrigPoly, v: &AugmentedVector) -> Result<AugmentedVector> {
    let da = delta(a);
    let mut scalar = generator_l(a).multiply(&v.scalar)?;
    for (g, f) in da.components().iter().zip(v.form.components()) {
        scalar = &scalar + &g.multiply(f)?;
    }
    let form = da.mul_fn(&v.scalar)?;
    Ok(AugmentedVector { scalar, form })
}

/// Kernel `K_L((a₁,a₂),(b₁,b₂)) = ⟨da₁, db₁⟩ a₂* b₂` (closed form).
pub fn kernel_eval(a1: &TrigPoly, a2: &TrigPoly, b1: &TrigPoly, b2: &TrigPoly) -> Result<TrigPoly> {
    form_inner(&delta(a1), &delta(b1))?.multiply(&a2.conj())?.multiply(b2)
}

/// Four-term defining expression
/// `L(f₁*f₂*g₂g₁) + f₁*L(f₂*g₂)g₁ - L(f₁*f₂*g₂)g₁ - f₁*L(f₂*g₂g₁)`.
pub fn kernel_eval_oracle(f1: &TrigPoly, f2: &TrigPoly, g1: &TrigPoly, g2: &TrigPoly) -> Result<TrigPoly> {
    let f1s = f1.conj();
    let u = f2.conj().multiply(g2)?;
    let t1 = generator_l(&f1s.multiply(&u)?.multiply(g1)?);
    let t2 = f1s.multiply(&generator_l(&u))?.multiply(g1)?;
    let t3 = generator_l(&f1s.multiply(&u)?).multiply(g1)?;
    let t4 = f1s.multiply(&generator_l(&u.multiply(g1)?))?;
    Ok(&(&(&t1 + &t2) - &t3) - &t4)
}

/// `Ψ(x) = L(x) + ⟨δ(x*), ξ⟩ + ⟨η, δ(x)⟩`.
pub fn psi_map(x: &TrigPoly, xi: &OneForm, eta: &OneForm) -> Result<TrigPoly> {
    let ann = form_inner(&delta(&x.conj()), xi)?;
    let cre = form_inner(eta, &delta(x))?;
    Ok(&(&generator_l(x) + &ann) + &cre)
}

/// `‖a‖_{W^{2,∞}} = ‖a‖_∞ + ‖ℓ(∇a)‖_∞ + ‖ℓ(∇²a)‖_∞`.
pub fn sobolev_w2inf_norm(a: &TrigPoly) -> f64 {
    sup_norm(a) + pointwise_length_sup(a, 1) + pointwise_length_sup(a, 2)
}

/// Element of `A ⊗ k₀^{⊗m}` in the normal form `a ⊗ ω₁ ⊗ … ⊗ ω_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseTensor {
    pub algebra: TrigPoly,
    pub legs: Vec<OneForm>,
}

impl NoiseTensor {
    /// `δ(x) = 1 ⊗ dx`.
    pub fn delta_of(x: &TrigPoly) -> Self {
        NoiseTensor { algebra: TrigPoly::one(x.dim(), x.cap()), legs: vec![delta(x)] }
    }

    /// `(δ ⊗ 1)(a ⊗ ω…) = 1 ⊗ da ⊗ ω…`.
    pub fn extend(&self) -> Self {
        let mut legs = vec![delta(&self.algebra)];
        legs.extend(self.legs.iter().cloned());
        NoiseTensor { algebra: TrigPoly::one(self.algebra.dim(), self.algebra.cap()), legs }
    }

    pub fn is_zero(&self) -> bool {
        self.algebra.is_empty() || self.legs.iter().any(|l| l.is_zero())
    }

    /// `‖a‖_{L²} Π ‖ω_i‖_{k₀}`.
    pub fn norm(&self) -> f64 {
        self.legs.iter().map(k0_norm).product::<f64>() * self.algebra.l2_norm()
    }
}

/// `δ²(x) = (δ ⊗ 1)(δ(x))`.
pub fn delta_squared(x: &TrigPoly) -> NoiseTensor {
    NoiseTensor::delta_of(x).extend()
}

/// Sup-norms of nested maps `Φ_{ξ_{i_n}} ∘ … ∘ Φ_{ξ_{i_1}}(x)` with
/// `Φ_ξ(y) = L(y) + ⟨δ(y*), ξ⟩`, and a least-squares geometric fit.
#[derive(Clone, Debug)]
pub struct NestedPhiGrowth {
    pub norms: Vec<f64>,
    /// Fitted per-step growth factor `2√d M²`.
    pub rate: f64,
    /// `M` recovered from the fitted rate.
    pub m: f64,
    /// Smallest `C` with `norms[n] ≤ C rate^n` for every measured `n`.
    pub c: f64,
}

pub fn nested_phi_growth(x: &TrigPoly, range: &[OneForm], word: &[usize]) -> Result<NestedPhiGrowth> {
    let d = x.dim() as f64;
    let zero = OneForm::zero(x.dim(), x.cap());
    let mut y = x.clone();
    let mut norms = vec![sup_norm(&y)];
    for &i in word {
        y = psi_map(&y, &range[i], &zero)?;
        norms.push(sup_norm(&y));
    }
    let pts: Vec<(f64, f64)> = norms
        .iter()
        .enumerate()
        .filter(|(_, v)| **v > 0.0)
        .map(|(n, v)| (n as f64, v.ln()))
        .collect();
    let rate = if pts.len() >= 2 {
        let n = pts.len() as f64;
        let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
        (sxy / sxx).exp()
    } else {
        0.0
    };
    let c = norms
        .iter()
        .enumerate()
        .map(|(n, v)| if rate > 0.0 { v / rate.powi(n as i32) } else { *v })
        .fold(0.0, f64::max);
    let m = (rate / (2.0 * d.sqrt())).sqrt();
    Ok(NestedPhiGrowth { norms, rate, m, c })
}

/// A-priori constant `M` for constant-coefficient ranges: with
/// `M ≥ max(1, |k|, |ξ|)` every step multiplies by at most `2√d M²`.
pub fn constant_range_m(x: &TrigPoly, range: &[OneForm]) -> f64 {
    let kx = (x.max_eigenvalue() as f64).sqrt();
    let xi = range
        .iter()
        .map(|w| w.mean().iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    1.0f64.max(kx).max(xi)
}
