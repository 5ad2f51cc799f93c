//! Explicit truncated-Fock representation of `J_t(x ⊗ E(f)) v`.
//!
//! On interval `j` a plane wave `e_k` picks up the scalar generator
//! `μ_{kj} = -|k|²/2 + i Σ_i k_i ⟨ε_i, f_j⟩` (from `I_L` and `a_δ`) and the
//! creation vector `h_{kj} = i k √τ_j` on the frame slots of that interval
//! (from `a_δ†`). The order-`r` contribution of an interval is
//! `Σ_{p+m=r} (τμ)^p/p! · a†(h)^m/m!`.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{frame_coupling, texp_matrix_element, FlowProblem};
use crate::error::{Error, Result};
use crate::fock::{
    creation_apply, exp_tail, exp_tail_complex, exponential_vector_of, fock_inner, frame_form, FockVector, NoiseBasis,
    SimpleNoisePath,
};
use crate::spectral::{k0_inner, sup_norm, ModeIndex, OneForm, TrigPoly};

/// Largest tolerated relative norm lost to the depth cut.
pub const DEPTH_LOSS_TOL: f64 = 0.5;

/// Element `Σ_k e_k ⊗ Φ_k` of `L²(T^d) ⊗ Γ`.
#[derive(Clone, Debug)]
pub struct FlowVector {
    dim: usize,
    modes: BTreeMap<ModeIndex, FockVector>,
    series_error: f64,
    /// Dropped depth tails `c (1 - P_N) E(w)` attached to output mode `l`.
    tails: Vec<(ModeIndex, Complex64, Vec<Complex64>)>,
    depth: usize,
}

impl FlowVector {
    /// `v ⊗ φ`.
    pub fn from_product(v: &TrigPoly, phi: &FockVector) -> Self {
        let modes = v.iter().map(|(k, c)| (k, phi.scale(c))).collect();
        FlowVector { dim: v.dim(), modes, series_error: 0.0, tails: Vec::new(), depth: phi.depth() }
    }

    pub fn modes(&self) -> impl Iterator<Item = (&ModeIndex, &FockVector)> {
        self.modes.iter()
    }

    /// Bound on the distance, inside levels `≤ N`, to the untruncated vector.
    pub fn series_error(&self) -> f64 {
        self.series_error
    }

    /// Exact norm of the part above level `N` of the untruncated vector.
    pub fn depth_tail_norm(&self) -> f64 {
        let vol = (2.0 * std::f64::consts::PI).powi(self.dim as i32);
        let mut acc = Complex64::new(0.0, 0.0);
        for (l, c, w) in &self.tails {
            for (l2, c2, w2) in &self.tails {
                if l == l2 {
                    let z: Complex64 = w.iter().zip(w2).map(|(a, b)| a.conj() * b).sum();
                    acc += c.conj() * c2 * exp_tail_complex(z, self.depth);
                }
            }
        }
        (acc.re.max(0.0) * vol).sqrt()
    }

    /// Bound on the distance to the untruncated vector.
    pub fn error_bound(&self) -> f64 {
        self.series_error + self.depth_tail_norm()
    }

    pub fn inner(&self, other: &FlowVector) -> Result<Complex64> {
        let vol = (2.0 * std::f64::consts::PI).powi(self.dim as i32);
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, a) in &self.modes {
            if let Some(b) = other.modes.get(k) {
                acc += fock_inner(a, b)?;
            }
        }
        Ok(acc * vol)
    }

    pub fn norm(&self) -> f64 {
        self.inner(self).map(|c| c.re.max(0.0).sqrt()).unwrap_or(0.0)
    }
}

fn frame_slots_ok(basis: &NoiseBasis, dim: usize, cap: i64) -> bool {
    basis.forms().len() >= dim
        && (0..dim).all(|i| {
            let e = frame_form(dim, cap, i);
            (k0_inner(&basis.forms()[i], &e) - Complex64::new(1.0, 0.0)).norm() < 1e-12
        })
}

/// `J_t^{(≤ n_max)}(x ⊗ E(f)) v` for `problem.x, problem.f, problem.v`.
pub fn fock_picard_apply(p: &FlowProblem, n_max: usize, depth: usize) -> Result<FlowVector> {
    let basis = NoiseBasis::for_paths(p.x.dim(), p.x.cap(), &[&p.f], p.horizon);
    fock_picard_apply_in(&basis, &p.x, &p.f, &p.v, p.horizon, n_max, depth)
}

/// As [`fock_picard_apply`], over a given basis whose first forms are the
/// frame `ε_1..ε_d` and whose mesh contains `t`.
pub fn fock_picard_apply_in(
    basis: &NoiseBasis,
    x: &TrigPoly,
    f: &SimpleNoisePath,
    v: &TrigPoly,
    t: f64,
    n_max: usize,
    depth: usize,
) -> Result<FlowVector> {
    let d = x.dim();
    if !frame_slots_ok(basis, d, x.cap()) {
        return Err(Error::BasisMismatch);
    }
    let fcoef = basis.expand(f)?;
    let ef = exponential_vector_of(basis, &fcoef, depth);
    let f_sq: f64 = fcoef.iter().map(|c| c.norm_sqr()).sum();
    let intervals: Vec<(usize, f64, Vec<Complex64>)> = (0..basis.intervals())
        .filter_map(|j| {
            let (a, b) = basis.interval(j);
            (b <= t * (1.0 + 1e-14) + 1e-300).then(|| {
                let c = f.value_at(0.5 * (a + b)).map_or(vec![Complex64::new(0.0, 0.0); d], frame_coupling);
                (j, b - a, c)
            })
        })
        .collect();
    let v_norm = v.l2_norm();
    let mut out: BTreeMap<ModeIndex, FockVector> = BTreeMap::new();
    let mut series_error = 0.0;
    let mut tails = Vec::new();
    for (k, xk) in x.iter() {
        let kv: Vec<f64> = (0..d).map(|i| k.get(i) as f64).collect();
        let ksq: f64 = kv.iter().map(|a| a * a).sum();
        let mut graded = vec![FockVector::zero(basis, depth); n_max + 1];
        graded[0] = ef.clone();
        let mut alpha = Complex64::new(0.0, 0.0);
        let mut h_total = vec![Complex64::new(0.0, 0.0); basis.len()];
        for (j, tau, c) in intervals.iter().rev() {
            let mu = Complex64::new(-0.5 * ksq, 0.0)
                + Complex64::new(0.0, 1.0) * kv.iter().zip(c).map(|(ki, ci)| ci * *ki).sum::<Complex64>();
            let mut h = vec![Complex64::new(0.0, 0.0); basis.len()];
            for (i, ki) in kv.iter().enumerate() {
                h[basis.index(*j, i)] = Complex64::new(0.0, ki * tau.sqrt());
            }
            for (a, b) in h_total.iter_mut().zip(&h) {
                *a += b;
            }
            let tmu = mu * tau;
            alpha += tmu;
            let mut next = vec![FockVector::zero(basis, depth); n_max + 1];
            for (q, s) in graded.iter().enumerate() {
                if s.norm() == 0.0 {
                    continue;
                }
                let mut created = s.clone();
                for m in 0..=depth.min(n_max - q) {
                    if m > 0 {
                        created = creation_apply(&h, &created).scale(Complex64::new(1.0 / m as f64, 0.0));
                    }
                    let mut coef = Complex64::new(1.0, 0.0);
                    for p in 0..=(n_max - q - m) {
                        if p > 0 {
                            coef *= tmu / p as f64;
                        }
                        next[q + p + m].add_scaled(&created, coef);
                    }
                }
            }
            graded = next;
        }
        let mut phi = FockVector::zero(basis, depth);
        for s in &graded {
            phi.add_scaled(s, Complex64::new(1.0, 0.0));
        }

        let h_norm = h_total.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        let fh_sq: f64 = fcoef.iter().zip(&h_total).map(|(a, b)| (a + b).norm_sqr()).sum();
        let depth_tail = exp_tail(fh_sq, depth);
        let rel_loss = (depth_tail / fh_sq.exp()).sqrt();
        if rel_loss > DEPTH_LOSS_TOL {
            return Err(Error::DepthExceeded { depth, loss: rel_loss, tol: DEPTH_LOSS_TOL });
        }
        series_error += xk.norm() * v_norm * series_tail(alpha.norm(), h_norm, n_max, depth) * (0.5 * f_sq).exp();

        let w: Vec<Complex64> = fcoef.iter().zip(&h_total).map(|(a, b)| a + b).collect();
        for (l, vl) in v.iter() {
            out.entry(k + l).or_insert_with(|| FockVector::zero(basis, depth)).add_scaled(&phi, xk * vl);
            tails.push((k + l, xk * vl * alpha.exp(), w.clone()));
        }
    }
    Ok(FlowVector { dim: d, modes: out, series_error, tails, depth })
}

/// `Σ_{p+m>n, m≤N} a^p/p! · β_m` with `β_m = √(N!/(N-m)!) bᵐ/m!`.
fn series_tail(a: f64, b: f64, n: usize, depth: usize) -> f64 {
    let mut beta = 1.0;
    let mut total = 0.0;
    for m in 0..=depth {
        if m > 0 {
            beta *= ((depth - m + 1) as f64).sqrt() * b / m as f64;
        }
        let p_tail = if m > n { a.exp() } else { exp_tail(a, n - m) };
        total += beta * p_tail;
    }
    total
}

#[derive(Clone, Debug)]
pub struct FactorizationReport {
    /// `⟨J_t(a₁⊗E f₁)v₁, J_t(a₂⊗E f₂)v₂⟩` from the Fock engine.
    pub lhs: Complex64,
    /// `⟨v₁ E f₁, J_t(a₁*a₂ ⊗ E f₂) v₂⟩` from the matrix exponential.
    pub rhs: Complex64,
    pub residual: f64,
    pub bound: f64,
}

#[allow(clippy::too_many_arguments)]
pub fn factorization_residual(
    a1: &TrigPoly,
    a2: &TrigPoly,
    f1: &SimpleNoisePath,
    f2: &SimpleNoisePath,
    v1: &TrigPoly,
    v2: &TrigPoly,
    t: f64,
    n_max: usize,
    depth: usize,
) -> Result<FactorizationReport> {
    let basis = NoiseBasis::for_paths(a1.dim(), a1.cap().max(a2.cap()), &[f1, f2], t);
    let j1 = fock_picard_apply_in(&basis, a1, f1, v1, t, n_max, depth)?;
    let j2 = fock_picard_apply_in(&basis, a2, f2, v2, t, n_max, depth)?;
    let lhs = j1.inner(&j2)?;
    let wide = a1.cap().max(a2.cap()).max(a1.degree() + a2.degree());
    let x = a1.with_cap(wide)?.conj().multiply(&a2.with_cap(wide)?)?;
    let rhs = texp_matrix_element(&FlowProblem::new(x, v1.clone(), v2.clone(), f2.clone(), f1.clone(), t))?;
    let (s1, s2) = (j1.series_error(), j2.series_error());
    let bound = s1 * j2.norm() + s2 * j1.norm() + s1 * s2 + j1.depth_tail_norm() * j2.depth_tail_norm()
        + 1e-12 * (1.0 + rhs.norm());
    Ok(FactorizationReport { lhs, rhs, residual: (lhs - rhs).norm(), bound })
}

#[derive(Clone, Debug)]
pub struct PositivityReport {
    pub samples: usize,
    /// `min Re⟨θ, j_t(x)θ⟩ / ‖θ‖²`.
    pub min_pairing: f64,
    /// `max ‖j_t(x)θ‖ / ‖θ‖`.
    pub max_ratio: f64,
    pub sup_norm: f64,
    pub max_error: f64,
}

/// Probe with seed 0, depth 3 and Picard order 12.
pub fn positivity_probe(x: &TrigPoly, t: f64, samples: usize) -> Result<PositivityReport> {
    positivity_probe_with(x, t, samples, 0, 3, 12)
}

fn random_c(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn random_path(rng: &mut ChaCha8Rng, dim: usize, cap: i64, t: f64) -> SimpleNoisePath {
    let pieces = rng.gen_range(1..=3);
    let mut breaks: Vec<f64> = (1..pieces).map(|_| rng.gen_range(0.05..0.95) * t).collect();
    breaks.extend([0.0, t]);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let values: Vec<OneForm> = (1..breaks.len())
        .map(|_| {
            OneForm::new(
                (0..dim)
                    .map(|i| {
                        let c = TrigPoly::constant(dim, cap, random_c(rng));
                        let w = TrigPoly::cos(dim, cap.max(1), i, 1).expect("unit mode fits");
                        &c + &w.scale(random_c(rng))
                    })
                    .collect(),
            )
        })
        .collect();
    let path = SimpleNoisePath::new(breaks, values);
    let target = rng.gen_range(0.001..0.01);
    path.scale(Complex64::new((target / path.norm_sq()).sqrt(), 0.0))
}

/// Samples `θ = v E(f)` with `‖f‖² ≤ 0.01` and pairs them against `j_t(x)θ`.
pub fn positivity_probe_with(
    x: &TrigPoly,
    t: f64,
    samples: usize,
    seed: u64,
    depth: usize,
    n_max: usize,
) -> Result<PositivityReport> {
    if !x.is_self_adjoint(1e-12) {
        return Err(Error::NotPositive("element is not self-adjoint".into()));
    }
    let top = x.abs_sum();
    let min = top - sup_norm(&(&TrigPoly::constant(x.dim(), x.cap(), Complex64::new(top, 0.0)) - x));
    if min < -1e-12 {
        return Err(Error::NotPositive(format!("minimum {min:.6e} below zero")));
    }
    let (d, cap) = (x.dim(), x.cap().max(1));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report =
        PositivityReport { samples, min_pairing: f64::INFINITY, max_ratio: 0.0, sup_norm: sup_norm(x), max_error: 0.0 };
    for _ in 0..samples {
        let n_modes = rng.gen_range(1..=3);
        let v = TrigPoly::from_coeffs(
            d,
            cap,
            (0..n_modes).map(|_| {
                let k: Vec<i64> = (0..d).map(|_| rng.gen_range(-1..=1)).collect();
                (ModeIndex::new(&k), random_c(&mut rng))
            }),
        )?;
        if v.is_empty() {
            continue;
        }
        let f = random_path(&mut rng, d, cap, t);
        let basis = NoiseBasis::for_paths(d, cap, &[&f], t);
        let theta = FlowVector::from_product(&v, &exponential_vector_of(&basis, &basis.expand(&f)?, depth));
        let j = fock_picard_apply_in(&basis, x, &f, &v, t, n_max, depth)?;
        let nt = theta.norm();
        let pairing = theta.inner(&j)?.re / (nt * nt);
        report.min_pairing = report.min_pairing.min(pairing);
        report.max_ratio = report.max_ratio.max(j.norm() / nt);
        report.max_error = report.max_error.max(j.error_bound() / nt);
    }
    Ok(report)
}
