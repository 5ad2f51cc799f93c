//! Exact spectral calculus on the flat torus T^d = R^d / (2πZ)^d.
//!
//! Functions are finite Fourier sums `Σ c_k e^{i k·x}` ([`TrigPoly`]). The
//! Laplacian uses the nonnegative convention `Δ = -Σ ∂_i²`, so
//! `Δ e^{ik·x} = |k|² e^{ik·x}`. Pairings conjugate their first argument.

mod forms;
pub mod growth;
mod sup;
mod tensor;

pub use forms::{exterior_derivative, form_inner, k0_inner, k0_norm, OneForm};
pub use sup::{grid_points, pointwise_length_sup, sample_grid, sup_norm};
pub use tensor::{covariant_derivative, tensor_inner, CovariantTensor};

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest supported torus dimension.
pub const MAX_DIM: usize = 3;

/// Lattice point `k ∈ Z^d`, zero-padded to [`MAX_DIM`] entries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModeIndex(pub [i64; MAX_DIM]);

impl ModeIndex {
    pub fn new(k: &[i64]) -> Self {
        assert!(k.len() <= MAX_DIM, "mode vector longer than {MAX_DIM}");
        let mut m = [0; MAX_DIM];
        m[..k.len()].copy_from_slice(k);
        ModeIndex(m)
    }

    pub fn zero() -> Self {
        ModeIndex([0; MAX_DIM])
    }

    /// Unit vector along axis `i`, scaled by `n`.
    pub fn axis(i: usize, n: i64) -> Self {
        let mut m = [0; MAX_DIM];
        m[i] = n;
        ModeIndex(m)
    }

    /// Eigenvalue `|k|²` of the Laplacian on `e^{ik·x}`.
    pub fn norm_sq(&self) -> i64 {
        self.0.iter().map(|k| k * k).sum()
    }

    pub fn sup(&self) -> i64 {
        self.0.iter().map(|k| k.abs()).max().unwrap_or(0)
    }

    pub fn get(&self, i: usize) -> i64 {
        self.0[i]
    }

    pub fn as_vec(&self, dim: usize) -> Vec<i64> {
        self.0[..dim].to_vec()
    }
}

impl Add for ModeIndex {
    type Output = ModeIndex;
    fn add(self, o: ModeIndex) -> ModeIndex {
        let mut m = self.0;
        for (a, b) in m.iter_mut().zip(o.0) {
            *a += b;
        }
        ModeIndex(m)
    }
}

impl Neg for ModeIndex {
    type Output = ModeIndex;
    fn neg(self) -> ModeIndex {
        ModeIndex(self.0.map(|k| -k))
    }
}

/// The flat torus of dimension `d` with circumference 2π per coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TorusGeometry {
    dim: usize,
}

impl TorusGeometry {
    pub fn new(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::BadDimension(dim));
        }
        Ok(TorusGeometry { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// `(2π)^d`.
    pub fn volume(&self) -> f64 {
        (2.0 * PI).powi(self.dim as i32)
    }

    /// Christoffel symbols vanish and the Ricci tensor is zero.
    pub fn is_ricci_flat(&self) -> bool {
        true
    }
}

/// Element of the algebra of trigonometric polynomials on T^d.
///
/// Every stored mode satisfies `|k|_∞ ≤ cap`; operations that would leave
/// the cap return [`Error::CapExceeded`] instead of projecting.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    dim: usize,
    cap: i64,
    coeffs: BTreeMap<ModeIndex, Complex64>,
}

fn check_cap(k: &ModeIndex, dim: usize, cap: i64) -> Result<()> {
    if k.sup() > cap {
        Err(Error::CapExceeded { mode: k.as_vec(dim), cap })
    } else {
        Ok(())
    }
}

impl TrigPoly {
    pub fn zero(dim: usize, cap: i64) -> Self {
        assert!((1..=MAX_DIM).contains(&dim), "torus dimension {dim} unsupported");
        assert!(cap >= 0, "negative cap");
        TrigPoly { dim, cap, coeffs: BTreeMap::new() }
    }

    pub fn constant(dim: usize, cap: i64, c: Complex64) -> Self {
        let mut p = Self::zero(dim, cap);
        p.insert(ModeIndex::zero(), c);
        p
    }

    pub fn one(dim: usize, cap: i64) -> Self {
        Self::constant(dim, cap, Complex64::new(1.0, 0.0))
    }

    /// `c · e^{ik·x}`.
    pub fn mode(dim: usize, cap: i64, k: ModeIndex, c: Complex64) -> Result<Self> {
        let mut p = Self::zero(dim, cap);
        check_cap(&k, dim, cap)?;
        p.insert(k, c);
        Ok(p)
    }

    pub fn from_coeffs<I>(dim: usize, cap: i64, items: I) -> Result<Self>
    where
        I: IntoIterator<Item = (ModeIndex, Complex64)>,
    {
        let mut p = Self::zero(dim, cap);
        for (k, c) in items {
            check_cap(&k, dim, cap)?;
            p.insert(k, c);
        }
        Ok(p)
    }

    /// `cos(n x_axis)`.
    pub fn cos(dim: usize, cap: i64, axis: usize, n: i64) -> Result<Self> {
        let h = Complex64::new(0.5, 0.0);
        Self::from_coeffs(dim, cap, [(ModeIndex::axis(axis, n), h), (ModeIndex::axis(axis, -n), h)])
    }

    /// `sin(n x_axis)`.
    pub fn sin(dim: usize, cap: i64, axis: usize, n: i64) -> Result<Self> {
        let h = Complex64::new(0.0, 0.5);
        Self::from_coeffs(dim, cap, [(ModeIndex::axis(axis, n), -h), (ModeIndex::axis(axis, -n), h)])
    }

    fn insert(&mut self, k: ModeIndex, c: Complex64) {
        let e = self.coeffs.entry(k).or_insert(Complex64::new(0.0, 0.0));
        *e += c;
        if *e == Complex64::new(0.0, 0.0) {
            self.coeffs.remove(&k);
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> i64 {
        self.cap
    }

    pub fn geometry(&self) -> TorusGeometry {
        TorusGeometry { dim: self.dim }
    }

    /// Same coefficients under a different cap.
    pub fn with_cap(&self, cap: i64) -> Result<Self> {
        Self::from_coeffs(self.dim, cap, self.iter())
    }

    pub fn coeff(&self, k: &ModeIndex) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ModeIndex, Complex64)> + '_ {
        self.coeffs.iter().map(|(k, c)| (*k, *c))
    }

    pub fn modes(&self) -> impl Iterator<Item = ModeIndex> + '_ {
        self.coeffs.keys().copied()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `|k|_∞` among stored modes.
    pub fn degree(&self) -> i64 {
        self.coeffs.keys().map(|k| k.sup()).max().unwrap_or(0)
    }

    /// Largest Laplacian eigenvalue `|k|²` among stored modes.
    pub fn max_eigenvalue(&self) -> i64 {
        self.coeffs.keys().map(|k| k.norm_sq()).max().unwrap_or(0)
    }

    /// `Σ |c_k|`, an upper bound for the sup-norm.
    pub fn abs_sum(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm()).sum()
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.values().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest coefficient-wise deviation from `other`.
    pub fn max_abs_diff(&self, other: &TrigPoly) -> f64 {
        let diff = self - other;
        diff.coeffs.values().map(|c| c.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, s: Complex64) -> TrigPoly {
        let mut p = TrigPoly::zero(self.dim, self.cap);
        for (k, c) in self.iter() {
            p.insert(k, c * s);
        }
        p
    }

    pub fn scale_re(&self, s: f64) -> TrigPoly {
        self.scale(Complex64::new(s, 0.0))
    }

    /// Pointwise complex conjugate `f*`: `coeff(-k) ↦ conj(coeff(k))`.
    pub fn conj(&self) -> TrigPoly {
        let mut p = TrigPoly::zero(self.dim, self.cap);
        for (k, c) in self.iter() {
            p.insert(-k, c.conj());
        }
        p
    }

    pub fn is_self_adjoint(&self, tol: f64) -> bool {
        self.max_abs_diff(&self.conj()) <= tol
    }

    /// Mode-diagonal map `coeff(k) ↦ m(k) coeff(k)`.
    pub fn map_diag<F: Fn(&ModeIndex) -> Complex64>(&self, m: F) -> TrigPoly {
        let mut p = TrigPoly::zero(self.dim, self.cap);
        for (k, c) in self.iter() {
            p.insert(k, c * m(&k));
        }
        p
    }

    /// Coefficient convolution; fails if a product mode leaves the cap.
    pub fn multiply(&self, other: &TrigPoly) -> Result<TrigPoly> {
        assert_eq!(self.dim, other.dim, "torus dimension mismatch");
        let cap = self.cap.max(other.cap);
        let mut p = TrigPoly::zero(self.dim, cap);
        for (ka, ca) in self.iter() {
            for (kb, cb) in other.iter() {
                let k = ka + kb;
                check_cap(&k, self.dim, cap)?;
                p.insert(k, ca * cb);
            }
        }
        Ok(p)
    }

    /// `∂_i f`.
    pub fn partial(&self, i: usize) -> TrigPoly {
        assert!(i < self.dim, "axis {i} out of range");
        self.map_diag(|k| Complex64::new(0.0, k.get(i) as f64))
    }

    pub fn laplacian(&self) -> TrigPoly {
        self.map_diag(|k| Complex64::new(k.norm_sq() as f64, 0.0))
    }

    /// `coeff(k) ↦ e^{-t|k|²/c} coeff(k)`, with `c = 2` when halved.
    pub fn heat(&self, t: f64, halved: bool) -> TrigPoly {
        let c = if halved { 2.0 } else { 1.0 };
        self.map_diag(|k| Complex64::new((-t * k.norm_sq() as f64 / c).exp(), 0.0))
    }

    /// Value at a point of the torus.
    pub fn eval(&self, x: &[f64]) -> Complex64 {
        self.iter()
            .map(|(k, c)| {
                let phase: f64 = (0..self.dim).map(|i| k.get(i) as f64 * x[i]).sum();
                c * Complex64::from_polar(1.0, phase)
            })
            .sum()
    }

    /// Exact `L²(T^d)` pairing, conjugate-linear in `self`.
    pub fn l2_inner(&self, other: &TrigPoly) -> Complex64 {
        let vol = self.geometry().volume();
        let s: Complex64 = self.iter().map(|(k, c)| c.conj() * other.coeff(&k)).sum();
        s * vol
    }

    pub fn l2_norm(&self) -> f64 {
        (self.geometry().volume()).sqrt() * self.coeff_norm()
    }
}

fn combine(a: &TrigPoly, b: &TrigPoly, sign: f64) -> TrigPoly {
    assert_eq!(a.dim, b.dim, "torus dimension mismatch");
    let mut p = TrigPoly { dim: a.dim, cap: a.cap.max(b.cap), coeffs: a.coeffs.clone() };
    for (k, c) in b.iter() {
        p.insert(k, c * sign);
    }
    p
}

impl Add for &TrigPoly {
    type Output = TrigPoly;
    fn add(self, o: &TrigPoly) -> TrigPoly {
        combine(self, o, 1.0)
    }
}

impl Sub for &TrigPoly {
    type Output = TrigPoly;
    fn sub(self, o: &TrigPoly) -> TrigPoly {
        combine(self, o, -1.0)
    }
}

impl Neg for &TrigPoly {
    type Output = TrigPoly;
    fn neg(self) -> TrigPoly {
        self.scale_re(-1.0)
    }
}

impl Mul<Complex64> for &TrigPoly {
    type Output = TrigPoly;
    fn mul(self, s: Complex64) -> TrigPoly {
        self.scale(s)
    }
}

/// Product in the algebra; see [`TrigPoly::multiply`].
pub fn multiply(a: &TrigPoly, b: &TrigPoly) -> Result<TrigPoly> {
    a.multiply(b)
}

/// `Δ f` with nonnegative spectrum.
pub fn laplacian(f: &TrigPoly) -> TrigPoly {
    f.laplacian()
}

/// `(2π)^d Σ conj(f_k) g_k`.
pub fn l2_inner(f: &TrigPoly, g: &TrigPoly) -> Complex64 {
    f.l2_inner(g)
}

/// Heat semigroup `e^{-tΔ}` (or `e^{-tΔ/2}` when `halved`).
pub fn heat_semigroup_apply(t: f64, f: &TrigPoly, halved: bool) -> TrigPoly {
    assert!(t >= 0.0, "negative time");
    f.heat(t, halved)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn inverse_modes_multiply_to_one() {
        let a = TrigPoly::mode(1, 2, ModeIndex::new(&[1]), c(1.0, 0.0)).unwrap();
        let b = TrigPoly::mode(1, 2, ModeIndex::new(&[-1]), c(1.0, 0.0)).unwrap();
        assert_eq!(multiply(&a, &b).unwrap(), TrigPoly::one(1, 2));
    }

    #[test]
    fn two_cos_squared() {
        let f = TrigPoly::cos(1, 2, 0, 1).unwrap().scale_re(2.0);
        let sq = f.multiply(&f).unwrap();
        assert_eq!(sq.len(), 3);
        assert_eq!(sq.coeff(&ModeIndex::zero()), c(2.0, 0.0));
        assert_eq!(sq.coeff(&ModeIndex::new(&[2])), c(1.0, 0.0));
        assert_eq!(sq.coeff(&ModeIndex::new(&[-2])), c(1.0, 0.0));
    }

    #[test]
    fn product_outside_cap_is_rejected() {
        let a = TrigPoly::mode(1, 1, ModeIndex::new(&[1]), c(1.0, 0.0)).unwrap();
        let err = a.multiply(&a).unwrap_err();
        assert_eq!(err, Error::CapExceeded { mode: vec![2], cap: 1 });
    }

    #[test]
    fn laplacian_eigenvalues() {
        assert!(laplacian(&TrigPoly::one(1, 3)).is_empty());
        let e3 = TrigPoly::mode(1, 3, ModeIndex::new(&[3]), c(1.0, 0.0)).unwrap();
        assert_eq!(laplacian(&e3), e3.scale_re(9.0));
        let exy = TrigPoly::mode(2, 3, ModeIndex::new(&[1, 1]), c(1.0, 0.0)).unwrap();
        assert_eq!(laplacian(&exy), exy.scale_re(2.0));
    }

    #[test]
    fn l2_pairings() {
        let e1 = TrigPoly::mode(1, 2, ModeIndex::new(&[1]), c(1.0, 0.0)).unwrap();
        let e2 = TrigPoly::mode(1, 2, ModeIndex::new(&[2]), c(1.0, 0.0)).unwrap();
        assert!((l2_inner(&e1, &e1) - c(2.0 * PI, 0.0)).norm() < 1e-15);
        assert_eq!(l2_inner(&e1, &e2), c(0.0, 0.0));
        let ie1 = e1.scale(c(0.0, 1.0));
        assert!((l2_inner(&ie1, &e1) - c(0.0, -2.0 * PI)).norm() < 1e-15);
    }

    #[test]
    fn heat_semigroup() {
        let f = TrigPoly::from_coeffs(
            1,
            4,
            [(ModeIndex::new(&[0]), c(1.0, 0.0)), (ModeIndex::new(&[3]), c(0.5, -1.0))],
        )
        .unwrap();
        assert_eq!(heat_semigroup_apply(0.0, &f, true), f);
        let h = heat_semigroup_apply(0.7, &f, true);
        assert!((h.coeff(&ModeIndex::new(&[3])) - c(0.5, -1.0) * (-0.7f64 * 9.0 / 2.0).exp()).norm() < 1e-15);
        let a = heat_semigroup_apply(2.0, &f, true);
        let b = heat_semigroup_apply(1.0, &f, false);
        assert!(a.max_abs_diff(&b) < 1e-16);
    }

    #[test]
    fn self_adjointness() {
        assert!(TrigPoly::cos(2, 3, 1, 2).unwrap().is_self_adjoint(0.0));
        let e1 = TrigPoly::mode(1, 2, ModeIndex::new(&[1]), c(1.0, 0.0)).unwrap();
        assert!(!e1.is_self_adjoint(1e-12));
    }

    #[test]
    fn geometry() {
        let g = TorusGeometry::new(2).unwrap();
        assert!((g.volume() - 4.0 * PI * PI).abs() < 1e-12);
        assert!(g.is_ricci_flat());
        assert_eq!(TorusGeometry::new(4), Err(Error::BadDimension(4)));
    }

    #[test]
    fn eval_matches_closed_form() {
        let f = TrigPoly::cos(1, 1, 0, 1).unwrap();
        let x = 0.3;
        assert!((f.eval(&[x]) - c(x.cos(), 0.0)).norm() < 1e-15);
        let s = TrigPoly::sin(2, 2, 1, 2).unwrap();
        assert!((s.eval(&[0.1, 0.4]) - c((0.8f64).sin(), 0.0)).norm() < 1e-15);
    }
}
