use num_complex::Complex64;

use super::TrigPoly;
use crate::error::Result;

/// Differential one-form `Σ_i ω_i dx^i` in the global coframe.
#[derive(Clone, Debug, PartialEq)]
pub struct OneForm {
    components: Vec<TrigPoly>,
}

impl OneForm {
    pub fn new(components: Vec<TrigPoly>) -> Self {
        assert!(!components.is_empty(), "one-form needs at least one component");
        let dim = components[0].dim();
        assert_eq!(components.len(), dim, "one-form needs exactly d components");
        assert!(components.iter().all(|c| c.dim() == dim));
        OneForm { components }
    }

    pub fn zero(dim: usize, cap: i64) -> Self {
        OneForm { components: vec![TrigPoly::zero(dim, cap); dim] }
    }

    /// Constant-coefficient form `Σ_i c_i dx^i`.
    pub fn constant(dim: usize, cap: i64, c: &[Complex64]) -> Self {
        assert_eq!(c.len(), dim);
        OneForm { components: c.iter().map(|&ci| TrigPoly::constant(dim, cap, ci)).collect() }
    }

    /// Coordinate covector `dx^i`.
    pub fn coordinate(dim: usize, cap: i64, i: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); dim];
        c[i] = Complex64::new(1.0, 0.0);
        Self::constant(dim, cap, &c)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn cap(&self) -> i64 {
        self.components.iter().map(|c| c.cap()).max().unwrap_or(0)
    }

    pub fn components(&self) -> &[TrigPoly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &TrigPoly {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(|c| c.is_empty())
    }

    pub fn with_cap(&self, cap: i64) -> Result<Self> {
        Ok(OneForm { components: self.components.iter().map(|c| c.with_cap(cap)).collect::<Result<_>>()? })
    }

    pub fn map(&self, f: impl Fn(&TrigPoly) -> TrigPoly) -> OneForm {
        OneForm { components: self.components.iter().map(f).collect() }
    }

    pub fn scale(&self, s: Complex64) -> OneForm {
        self.map(|c| c.scale(s))
    }

    pub fn add(&self, other: &OneForm) -> OneForm {
        OneForm { components: self.components.iter().zip(&other.components).map(|(a, b)| a + b).collect() }
    }

    pub fn sub(&self, other: &OneForm) -> OneForm {
        OneForm { components: self.components.iter().zip(&other.components).map(|(a, b)| a - b).collect() }
    }

    /// Pointwise product `a ω`.
    pub fn mul_fn(&self, a: &TrigPoly) -> Result<OneForm> {
        Ok(OneForm { components: self.components.iter().map(|c| a.multiply(c)).collect::<Result<_>>()? })
    }

    /// Pointwise conjugate of every component.
    pub fn conj(&self) -> OneForm {
        self.map(|c| c.conj())
    }

    pub fn max_abs_diff(&self, other: &OneForm) -> f64 {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// Closedness test `∂_j ω_i = ∂_i ω_j`; on T^d exact forms pass it.
    pub fn is_closed(&self, tol: f64) -> bool {
        let d = self.dim();
        (0..d).all(|i| {
            (0..d).all(|j| self.components[i].partial(j).max_abs_diff(&self.components[j].partial(i)) <= tol)
        })
    }

    /// Zero-mode coefficients `(ω_i)_0`, the coframe average of the form.
    pub fn mean(&self) -> Vec<Complex64> {
        let z = super::ModeIndex::zero();
        self.components.iter().map(|c| c.coeff(&z)).collect()
    }
}

/// `df = Σ_i ∂_i f dx^i`.
pub fn exterior_derivative(f: &TrigPoly) -> OneForm {
    OneForm { components: (0..f.dim()).map(|i| f.partial(i)).collect() }
}

/// Pointwise pairing `Σ_i conj(ω_i) η_i`.
pub fn form_inner(omega: &OneForm, eta: &OneForm) -> Result<TrigPoly> {
    assert_eq!(omega.dim(), eta.dim(), "one-forms on different tori");
    let mut acc = TrigPoly::zero(omega.dim(), omega.cap().max(eta.cap()));
    for (a, b) in omega.components.iter().zip(&eta.components) {
        acc = &acc + &a.conj().multiply(b)?;
    }
    Ok(acc)
}

/// Noise-space pairing `∫_M form_inner(ω, η)`, exact by orthogonality.
pub fn k0_inner(omega: &OneForm, eta: &OneForm) -> Complex64 {
    omega.components.iter().zip(&eta.components).map(|(a, b)| a.l2_inner(b)).sum()
}

pub fn k0_norm(omega: &OneForm) -> f64 {
    k0_inner(omega, omega).re.max(0.0).sqrt()
}
