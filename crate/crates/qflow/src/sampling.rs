//! Seeded random inputs for the verification suites.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;

use crate::fock::SimpleNoisePath;
use crate::spectral::{ModeIndex, OneForm, TrigPoly};
use crate::structure::AugmentedVector;

pub fn complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

pub fn mode(rng: &mut impl Rng, dim: usize, radius: i64) -> ModeIndex {
    let k: Vec<i64> = (0..dim).map(|_| rng.gen_range(-radius..=radius)).collect();
    ModeIndex::new(&k)
}

/// Up to `max_modes` random modes with `|k|_∞ ≤ radius` and coefficients in the unit square.
pub fn poly(rng: &mut impl Rng, dim: usize, cap: i64, radius: i64, max_modes: usize) -> TrigPoly {
    let n = rng.gen_range(1..=max_modes);
    let items: Vec<_> = (0..n).map(|_| (mode(rng, dim, radius), complex(rng))).collect();
    TrigPoly::from_coeffs(dim, cap, items).expect("radius within cap")
}

/// `(p + p*)/2` for a random `p`.
pub fn self_adjoint_poly(rng: &mut impl Rng, dim: usize, cap: i64, radius: i64, max_modes: usize) -> TrigPoly {
    let p = poly(rng, dim, cap, radius, max_modes);
    (&p + &p.conj()).scale_re(0.5)
}

pub fn one_form(rng: &mut impl Rng, dim: usize, cap: i64, radius: i64, max_modes: usize) -> OneForm {
    OneForm::new((0..dim).map(|_| poly(rng, dim, cap, radius, max_modes)).collect())
}

/// Constant-coefficient form with entries in the unit square, scaled by `scale`.
pub fn constant_form(rng: &mut impl Rng, dim: usize, cap: i64, scale: f64) -> OneForm {
    let c: Vec<Complex64> = (0..dim).map(|_| complex(rng) * scale).collect();
    OneForm::constant(dim, cap, &c)
}

/// `ψ ⊗ (w ⊕ ω)` normalized to unit norm.
pub fn augmented_unit(rng: &mut impl Rng, dim: usize, cap: i64, radius: i64) -> AugmentedVector {
    let psi = poly(rng, dim, cap, radius, 3);
    let omega = one_form(rng, dim, cap, radius, 2);
    let scalar = psi.scale(complex(rng));
    let form = omega.mul_fn(&psi).expect("radius within half the cap");
    let n = (scalar.l2_norm().powi(2) + form.components().iter().map(|c| c.l2_norm().powi(2)).sum::<f64>()).sqrt();
    let s = Complex64::new(1.0 / n.max(f64::MIN_POSITIVE), 0.0);
    AugmentedVector { scalar: scalar.scale(s), form: form.scale(s) }
}

/// Piecewise path on `[0, horizon]` with `pieces` random breakpoints and
/// values from `value`.
pub fn path<R: Rng>(
    rng: &mut R,
    horizon: f64,
    pieces: usize,
    mut value: impl FnMut(&mut R) -> OneForm,
) -> SimpleNoisePath {
    let mut breaks: Vec<f64> = (1..pieces).map(|_| rng.gen_range(0.1..0.9) * horizon).collect();
    breaks.extend([0.0, horizon]);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let values = (1..breaks.len()).map(|_| value(rng)).collect();
    SimpleNoisePath::new(breaks, values)
}

/// Dense matrix with entries in the unit square.
pub fn matrix(rng: &mut impl Rng, n: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(n, n, |_, _| complex(rng))
}
