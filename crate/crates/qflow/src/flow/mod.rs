//! Matrix elements of the flow `j_t` against exponential vectors.
//!
//! For piecewise-constant paths `f, g` the matrix element
//! `⟨u E(g), j_t(x) v E(f)⟩` reduces to
//! `e^{⟨g,f⟩} ⟨u, (E₁ ∘ … ∘ E_m)(x) v⟩` with `E_j = exp(τ_j Ψ_j)` and
//! `Ψ_j = L + ⟨δ(·*), f_j⟩ + ⟨g_j, δ(·)⟩`. The earliest interval is
//! outermost, so `E_m` acts on `x` first.
//!
//! Two evaluators are provided: dense matrix exponentials on the mode space
//! reached from `x` ([`texp_matrix_element`]) and the Picard series
//! ([`picard_terms`]), whose order-`n` term collects the Taylor terms
//! `(τ_j Ψ_j)^{r_j}/r_j!` with `Σ r_j = n`.

mod engine;

pub use engine::{
    factorization_residual, fock_picard_apply, fock_picard_apply_in, positivity_probe, positivity_probe_with,
    FactorizationReport, FlowVector, PositivityReport, DEPTH_LOSS_TOL,
};

use std::collections::{BTreeMap, VecDeque};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::Result;
use crate::fock::{frame_form, merged_mesh, noise_inner, SimpleNoisePath};
use crate::spectral::{k0_inner, ModeIndex, OneForm, TrigPoly};
use crate::structure::psi_map;

/// How a noise value `ω ∈ k₀` enters `Ψ`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Coupling {
    /// Through its frame projection `Σ_i ⟨ε_i, ω⟩_{k₀} dx^i`, with
    /// `δ(x) = Σ_i ∂_i x ⊗ ε_i`. This is the Brownian translation flow.
    #[default]
    Frame,
    /// Pointwise pairing with `ω` itself.
    Pointwise,
}

/// `⟨ε_i, ω⟩_{k₀}` for each frame direction.
pub fn frame_coupling(omega: &OneForm) -> Vec<Complex64> {
    let (d, cap) = (omega.dim(), omega.cap());
    (0..d).map(|i| k0_inner(&frame_form(d, cap, i), omega)).collect()
}

#[derive(Clone, Debug)]
pub struct FlowProblem {
    pub x: TrigPoly,
    pub u: TrigPoly,
    pub v: TrigPoly,
    pub f: SimpleNoisePath,
    pub g: SimpleNoisePath,
    pub horizon: f64,
    pub coupling: Coupling,
}

/// One constant piece of the generator.
#[derive(Clone, Debug)]
pub struct Step {
    pub start: f64,
    pub tau: f64,
    pub xi: OneForm,
    pub eta: OneForm,
}

impl FlowProblem {
    pub fn new(x: TrigPoly, u: TrigPoly, v: TrigPoly, f: SimpleNoisePath, g: SimpleNoisePath, horizon: f64) -> Self {
        assert!(horizon >= 0.0);
        FlowProblem { x, u, v, f, g, horizon, coupling: Coupling::Frame }
    }

    /// `f = g = 0`.
    pub fn vacuum(x: TrigPoly, u: TrigPoly, v: TrigPoly, t: f64) -> Self {
        let (d, cap) = (x.dim(), x.cap());
        Self::new(x, u, v, SimpleNoisePath::zero(d, cap), SimpleNoisePath::zero(d, cap), t)
    }

    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }

    fn coupled(&self, omega: Option<&OneForm>) -> OneForm {
        let (d, cap) = (self.x.dim(), self.x.cap());
        match (omega, self.coupling) {
            (None, _) => OneForm::zero(d, cap),
            (Some(w), Coupling::Frame) => OneForm::constant(d, cap, &frame_coupling(w)),
            (Some(w), Coupling::Pointwise) => w.clone(),
        }
    }

    /// Constant pieces of `(f, g)` on `[0, horizon]`, in time order.
    pub fn steps(&self) -> Vec<Step> {
        let mesh = merged_mesh(
            self.f.breakpoints().iter().chain(self.g.breakpoints()).copied().chain([0.0, self.horizon]),
        );
        mesh.windows(2)
            .filter(|w| w[1] <= self.horizon && w[0] >= 0.0)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                Step {
                    start: w[0],
                    tau: w[1] - w[0],
                    xi: self.coupled(self.f.value_at(mid)),
                    eta: self.coupled(self.g.value_at(mid)),
                }
            })
            .collect()
    }

    /// `e^{⟨g, f⟩}`.
    pub fn prefactor(&self) -> Complex64 {
        noise_inner(&self.g, &self.f).exp()
    }

    /// `B_f`: largest frame coupling of any value of `f` or `g`.
    pub fn b_f(&self) -> f64 {
        self.f
            .values()
            .iter()
            .chain(self.g.values())
            .flat_map(frame_coupling)
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }
}

/// Dense form of a problem on the mode space reached from `x`.
struct Assembled {
    modes: Vec<ModeIndex>,
    steps: Vec<(f64, DMatrix<Complex64>)>,
    x: DVector<Complex64>,
}

fn assemble(p: &FlowProblem) -> Result<Assembled> {
    let steps = p.steps();
    let (d, cap) = (p.x.dim(), p.x.cap());
    let one = Complex64::new(1.0, 0.0);
    let mut index: BTreeMap<ModeIndex, usize> = BTreeMap::new();
    let mut modes = Vec::new();
    let mut columns: Vec<Vec<TrigPoly>> = Vec::new();
    let mut queue: VecDeque<ModeIndex> = p.x.modes().collect();
    for k in &queue {
        index.insert(*k, modes.len());
        modes.push(*k);
    }
    while let Some(k) = queue.pop_front() {
        let e = TrigPoly::mode(d, cap, k, one)?;
        let mut col = Vec::with_capacity(steps.len());
        for s in &steps {
            let img = psi_map(&e, &s.xi, &s.eta)?;
            for m in img.modes() {
                if let std::collections::btree_map::Entry::Vacant(slot) = index.entry(m) {
                    slot.insert(modes.len());
                    modes.push(m);
                    queue.push_back(m);
                }
            }
            col.push(img);
        }
        columns.push(col);
    }
    let n = modes.len();
    let mats = steps
        .iter()
        .enumerate()
        .map(|(j, s)| {
            let m = DMatrix::from_fn(n, n, |r, c| columns[c][j].coeff(&modes[r]));
            (s.tau, m)
        })
        .collect();
    let x = DVector::from_iterator(n, modes.iter().map(|k| p.x.coeff(k)));
    Ok(Assembled { modes, steps: mats, x })
}

fn to_poly(p: &FlowProblem, modes: &[ModeIndex], y: &DVector<Complex64>) -> Result<TrigPoly> {
    TrigPoly::from_coeffs(p.x.dim(), p.x.cap(), modes.iter().copied().zip(y.iter().copied()))
}

/// `⟨u, y v⟩_{L²}`, uncapped.
pub fn triple_pairing(u: &TrigPoly, y: &TrigPoly, v: &TrigPoly) -> Complex64 {
    let vol = y.geometry().volume();
    let mut acc = Complex64::new(0.0, 0.0);
    for (k, yk) in y.iter() {
        for (l, vl) in v.iter() {
            acc += u.coeff(&(k + l)).conj() * yk * vl;
        }
    }
    acc * vol
}

/// `exp(τ₁Ψ₁) ⋯ exp(τ_mΨ_m)`.
pub fn ordered_exp(steps: &[(f64, DMatrix<Complex64>)]) -> DMatrix<Complex64> {
    let n = steps.first().map_or(0, |s| s.1.nrows());
    steps.iter().fold(DMatrix::identity(n, n), |acc, (tau, m)| acc * (m * Complex64::new(*tau, 0.0)).exp())
}

/// Graded Picard terms `M_0 x, …, M_{n_max} x` with
/// `M_n = Σ_{r₁+…+r_m=n} Π_j (τ_jΨ_j)^{r_j}/r_j!` (earliest factor leftmost).
pub fn graded_picard(steps: &[(f64, DMatrix<Complex64>)], x: &DVector<Complex64>, n_max: usize) -> Vec<DVector<Complex64>> {
    let mut graded: Vec<DVector<Complex64>> = vec![DVector::zeros(x.len()); n_max + 1];
    graded[0] = x.clone();
    for (tau, m) in steps.iter().rev() {
        let a = m * Complex64::new(*tau, 0.0);
        let mut next: Vec<DVector<Complex64>> = vec![DVector::zeros(x.len()); n_max + 1];
        for (q, s) in graded.iter().enumerate() {
            let mut term = s.clone();
            for r in 0..=(n_max - q) {
                if r > 0 {
                    term = &a * term / Complex64::new(r as f64, 0.0);
                }
                next[q + r] += &term;
            }
        }
        graded = next;
    }
    graded
}

/// `(E₁ ∘ … ∘ E_m)(x)`.
pub fn evolve(p: &FlowProblem) -> Result<TrigPoly> {
    let a = assemble(p)?;
    if a.modes.is_empty() {
        return Ok(TrigPoly::zero(p.x.dim(), p.x.cap()));
    }
    let y = if a.steps.is_empty() { a.x.clone() } else { ordered_exp(&a.steps) * &a.x };
    to_poly(p, &a.modes, &y)
}

/// `⟨u E(g), j_t(x) v E(f)⟩` by dense matrix exponentials.
pub fn texp_matrix_element(p: &FlowProblem) -> Result<Complex64> {
    Ok(p.prefactor() * triple_pairing(&p.u, &evolve(p)?, &p.v))
}

/// `⟨u E(0), j_t(x) v E(0)⟩`.
pub fn vacuum_expectation(x: &TrigPoly, u: &TrigPoly, v: &TrigPoly, t: f64) -> Result<Complex64> {
    texp_matrix_element(&FlowProblem::vacuum(x.clone(), u.clone(), v.clone(), t))
}

/// Picard terms with their a-priori bounds.
#[derive(Clone, Debug)]
pub struct PicardSeries {
    /// Order-`n` matrix elements.
    pub terms: Vec<Complex64>,
    /// `‖M_n x‖_{L²}`.
    pub term_norms: Vec<f64>,
    /// `|e^{⟨g,f⟩}| ‖u v*‖_{L²}`.
    pub pairing_scale: f64,
    pub x_norm: f64,
    /// `K = Σ_j τ_j ‖Ψ_j‖`.
    pub rate: f64,
    /// `t · max_j ‖Ψ_j‖`.
    pub step_rate: f64,
    pub b_f: f64,
}

impl PicardSeries {
    pub fn partial_sum(&self, n: usize) -> Complex64 {
        self.terms.iter().take(n + 1).sum()
    }

    /// `‖x‖ Kⁿ/n!`, bounding `term_norms[n]`.
    pub fn norm_bound(&self, n: usize) -> f64 {
        self.x_norm * (0..n).fold(1.0, |acc, q| acc * self.rate / (q + 1) as f64)
    }

    /// Bound on `|Σ_{q>n} terms[q]|`.
    pub fn tail_after(&self, n: usize) -> f64 {
        let mut term = self.norm_bound(n);
        let mut sum = 0.0;
        let mut q = n;
        loop {
            q += 1;
            term *= self.rate / q as f64;
            sum += term;
            if term <= sum * 1e-17 || term == 0.0 || q > n + 10_000 {
                return self.pairing_scale * sum;
            }
        }
    }

    /// `‖M_{n+1}x‖ ≤ step_rate ‖M_n x‖/(n+1)` for every computed `n`.
    pub fn decay_holds(&self, rel_tol: f64) -> bool {
        self.term_norms.windows(2).enumerate().all(|(n, w)| {
            w[1] <= self.step_rate * w[0] / (n + 1) as f64 * (1.0 + rel_tol) + f64::EPSILON * self.x_norm
        })
    }
}

fn l2_of(modes_dim: usize, y: &DVector<Complex64>) -> f64 {
    (2.0 * std::f64::consts::PI).powf(modes_dim as f64 / 2.0) * y.norm()
}

/// Picard terms of order `0..=n_max`.
pub fn picard_terms(p: &FlowProblem, n_max: usize) -> Result<PicardSeries> {
    let a = assemble(p)?;
    let d = p.x.dim();
    let pre = p.prefactor();
    let graded = graded_picard(&a.steps, &a.x, n_max);
    let mut terms = Vec::with_capacity(n_max + 1);
    let mut term_norms = Vec::with_capacity(n_max + 1);
    for y in &graded {
        term_norms.push(l2_of(d, y));
        let poly = to_poly(p, &a.modes, y)?;
        terms.push(pre * triple_pairing(&p.u, &poly, &p.v));
    }
    let norms: Vec<f64> = a
        .steps
        .iter()
        .map(|(_, m)| if m.nrows() == 0 { 0.0 } else { m.singular_values().max() })
        .collect();
    let rate = a.steps.iter().zip(&norms).map(|((tau, _), n)| tau * n).sum();
    let step_rate = p.horizon * norms.iter().cloned().fold(0.0, f64::max);
    let wide = 2 * p.u.degree().max(p.v.degree()).max(1);
    let uv = p.u.with_cap(wide)?.multiply(&p.v.with_cap(wide)?.conj())?;
    Ok(PicardSeries {
        terms,
        term_norms,
        pairing_scale: pre.norm() * uv.l2_norm(),
        x_norm: p.x.l2_norm(),
        rate,
        step_rate,
        b_f: p.b_f(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;
    use crate::spectral::exterior_derivative;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn heat_example() {
        let cos = TrigPoly::cos(1, 4, 0, 1).unwrap();
        let v = vacuum_expectation(&cos, &cos, &TrigPoly::one(1, 4), 1.0).unwrap();
        assert!((v - c((-0.5f64).exp() * PI, 0.0)).norm() < 1e-12);
        assert!((v.re - 1.905472264730).abs() < 1e-11);
    }

    #[test]
    fn plane_wave_example() {
        let e2 = TrigPoly::mode(1, 4, ModeIndex::new(&[2]), c(1.0, 0.0)).unwrap();
        let v = vacuum_expectation(&e2, &e2, &TrigPoly::one(1, 4), 1.0).unwrap();
        assert!((v - c((-2.0f64).exp() * 2.0 * PI, 0.0)).norm() < 1e-12);
        assert!((v.re - 0.850336663175).abs() < 1e-11);
    }

    #[test]
    fn unital_and_time_zero() {
        let u = TrigPoly::cos(2, 3, 1, 1).unwrap();
        let v = &TrigPoly::one(2, 3) + &TrigPoly::sin(2, 3, 0, 1).unwrap();
        let one = TrigPoly::one(2, 3);
        let f = SimpleNoisePath::indicator(0.0, 0.5, OneForm::coordinate(2, 3, 0).scale(c(0.1, 0.2)));
        let g = SimpleNoisePath::indicator(0.25, 1.0, OneForm::coordinate(2, 3, 1).scale(c(-0.3, 0.0)));
        let p = FlowProblem::new(one, u.clone(), v.clone(), f, g, 1.0);
        let got = texp_matrix_element(&p).unwrap();
        assert!((got - p.prefactor() * u.l2_inner(&v)).norm() < 1e-12);
        let x = TrigPoly::cos(2, 3, 0, 2).unwrap();
        let at0 = vacuum_expectation(&x, &u, &v, 0.0).unwrap();
        assert!((at0 - triple_pairing(&u, &x, &v)).norm() < 1e-13);
    }

    #[test]
    fn picard_low_orders() {
        let x = TrigPoly::cos(1, 4, 0, 1).unwrap();
        let u = &x + &TrigPoly::one(1, 4);
        let v = TrigPoly::sin(1, 4, 0, 1).unwrap();
        let w = OneForm::coordinate(1, 4, 0).scale(c(0.4, 0.0));
        let f = SimpleNoisePath::indicator(0.0, 0.7, w.clone());
        let g = SimpleNoisePath::indicator(0.0, 0.7, w.scale(c(0.0, 1.0)));
        let p = FlowProblem::new(x.clone(), u.clone(), v.clone(), f, g, 0.7);
        let s = picard_terms(&p, 12).unwrap();
        assert!((s.terms[0] - p.prefactor() * triple_pairing(&u, &x, &v)).norm() < 1e-13);
        let step = &p.steps()[0];
        let psi = psi_map(&x, &step.xi, &step.eta).unwrap();
        let expected = p.prefactor() * c(0.7, 0.0) * triple_pairing(&u, &psi, &v);
        assert!((s.terms[1] - expected).norm() < 1e-13);
        let exact = texp_matrix_element(&p).unwrap();
        assert!((s.partial_sum(8) - exact).norm() <= s.tail_after(8) + 1e-13);
        assert!(s.decay_holds(1e-12));
    }

    #[test]
    fn matrix_picard_matches_ordered_exp_on_noncommuting_steps() {
        let a = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        let b = DMatrix::from_row_slice(2, 2, &[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let steps = vec![(0.6, a.clone()), (0.9, b.clone())];
        let x = DVector::from_vec(vec![c(1.0, 0.0), c(0.5, -0.5)]);
        let exact = ordered_exp(&steps) * &x;
        let sum = graded_picard(&steps, &x, 30).into_iter().fold(DVector::zeros(2), |acc, t| acc + t);
        assert!((exact - sum).norm() < 1e-14);
        let swapped = ordered_exp(&[(0.9, b), (0.6, a)]) * &x;
        assert!((ordered_exp(&steps) * &x - swapped).norm() > 0.1);
    }

    #[test]
    fn frame_coupling_of_coordinate_form() {
        let c0 = frame_coupling(&OneForm::coordinate(2, 1, 1));
        assert!(c0[0].norm() < 1e-15);
        assert!((c0[1].re - 2.0 * PI).abs() < 1e-13);
        let dcos = exterior_derivative(&TrigPoly::cos(1, 2, 0, 1).unwrap());
        assert!(frame_coupling(&dcos)[0].norm() < 1e-15);
    }

    #[test]
    fn pointwise_coupling_escapes_cap() {
        let x = TrigPoly::cos(1, 3, 0, 1).unwrap();
        let dcos = exterior_derivative(&TrigPoly::cos(1, 3, 0, 1).unwrap());
        let f = SimpleNoisePath::indicator(0.0, 1.0, dcos);
        let p = FlowProblem::new(x, TrigPoly::one(1, 3), TrigPoly::one(1, 3), f, SimpleNoisePath::zero(1, 3), 1.0)
            .with_coupling(Coupling::Pointwise);
        assert!(matches!(texp_matrix_element(&p), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn pointwise_equals_frame_for_constant_forms() {
        let x = &TrigPoly::cos(1, 3, 0, 1).unwrap() + &TrigPoly::sin(1, 3, 0, 2).unwrap();
        let w = OneForm::coordinate(1, 3, 0).scale(c(0.2, -0.1));
        // Frame coupling of `c dx` is `(2π)^{1/2} c`.
        let f_frame = SimpleNoisePath::indicator(0.0, 0.5, w.scale(c((2.0 * PI).powf(-0.5), 0.0)));
        let f_point = SimpleNoisePath::indicator(0.0, 0.5, w);
        let mk = |f: &SimpleNoisePath, cp| {
            FlowProblem::new(x.clone(), x.clone(), TrigPoly::one(1, 3), f.clone(), SimpleNoisePath::zero(1, 3), 0.5)
                .with_coupling(cp)
        };
        let a = texp_matrix_element(&mk(&f_frame, Coupling::Frame)).unwrap();
        let b = texp_matrix_element(&mk(&f_point, Coupling::Pointwise)).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm().max(1.0));
    }
}
