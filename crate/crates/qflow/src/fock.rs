//! Truncated boson Fock space over simple noise paths.
//!
//! The one-particle space is spanned by `1_{[t_j, t_{j+1})}/√τ_j ⊗ ω_b`
//! for a time mesh `t_0 < … < t_m` and a `k₀`-orthonormal family of
//! one-forms `ω_b`. Level-`n` amplitudes are symmetric tensors stored by
//! sorted index tuples.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{k0_inner, k0_norm, OneForm};

const ORTHO_DROP: f64 = 1e-10;
const BASIS_RESIDUAL_TOL: f64 = 1e-10;
const MESH_MERGE_TOL: f64 = 1e-14;

/// Piecewise-constant `k₀`-valued path with finite range; zero outside
/// `[t_0, t_m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct SimpleNoisePath {
    dim: usize,
    cap: i64,
    breaks: Vec<f64>,
    values: Vec<OneForm>,
}

impl SimpleNoisePath {
    pub fn new(breaks: Vec<f64>, values: Vec<OneForm>) -> Self {
        assert!(!values.is_empty(), "use SimpleNoisePath::zero for the empty path");
        assert_eq!(breaks.len(), values.len() + 1, "one value per mesh interval");
        assert!(breaks.windows(2).all(|w| w[0] < w[1]), "mesh must be increasing");
        assert!(breaks[0] >= 0.0);
        let dim = values[0].dim();
        assert!(values.iter().all(|v| v.dim() == dim));
        let cap = values.iter().map(|v| v.cap()).max().unwrap_or(0);
        SimpleNoisePath { dim, cap, breaks, values }
    }

    pub fn zero(dim: usize, cap: i64) -> Self {
        SimpleNoisePath { dim, cap, breaks: Vec::new(), values: Vec::new() }
    }

    /// `ω · 1_{[a, b)}`.
    pub fn indicator(a: f64, b: f64, omega: OneForm) -> Self {
        Self::new(vec![a, b], vec![omega])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cap(&self) -> i64 {
        self.cap
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[OneForm] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| v.is_zero())
    }

    /// `f(s)`, or `None` off the support.
    pub fn value_at(&self, s: f64) -> Option<&OneForm> {
        let i = self.breaks.partition_point(|&b| b <= s);
        if i == 0 || i >= self.breaks.len() {
            None
        } else {
            Some(&self.values[i - 1])
        }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        SimpleNoisePath {
            dim: self.dim,
            cap: self.cap,
            breaks: self.breaks.clone(),
            values: self.values.iter().map(|v| v.scale(c)).collect(),
        }
    }

    /// `‖f‖² = ∫ ‖f(s)‖²_{k₀} ds`.
    pub fn norm_sq(&self) -> f64 {
        noise_inner(self, self).re
    }
}

/// Sorted union of the given points, merging near-duplicates.
pub fn merged_mesh(points: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut pts: Vec<f64> = points.into_iter().collect();
    pts.sort_by(f64::total_cmp);
    let mut out: Vec<f64> = Vec::with_capacity(pts.len());
    for p in pts {
        match out.last() {
            Some(&q) if (p - q).abs() <= MESH_MERGE_TOL * q.abs().max(1.0) => {}
            _ => out.push(p),
        }
    }
    out
}

/// `∫₀^∞ ⟨f(s), g(s)⟩_{k₀} ds`, exact on the merged mesh.
pub fn noise_inner(f: &SimpleNoisePath, g: &SimpleNoisePath) -> Complex64 {
    let mesh = merged_mesh(f.breaks.iter().chain(&g.breaks).copied());
    mesh.windows(2)
        .filter_map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            match (f.value_at(mid), g.value_at(mid)) {
                (Some(a), Some(b)) => Some(k0_inner(a, b) * (w[1] - w[0])),
                _ => None,
            }
        })
        .sum()
}

/// `ε_i = dx^i / (2π)^{d/2}`, orthonormal in `k₀`.
pub fn frame_form(dim: usize, cap: i64, i: usize) -> OneForm {
    let s = (2.0 * std::f64::consts::PI).powf(-(dim as f64) / 2.0);
    OneForm::coordinate(dim, cap, i).scale(Complex64::new(s, 0.0))
}

/// Finite orthonormal one-particle basis.
#[derive(Clone, Debug)]
pub struct NoiseBasis {
    mesh: Vec<f64>,
    forms: Vec<OneForm>,
    tag: u64,
}

impl NoiseBasis {
    /// Gram–Schmidt over `candidates` in `k₀`; dependent candidates are dropped.
    pub fn new(mesh: Vec<f64>, candidates: &[OneForm]) -> Self {
        assert!(mesh.len() >= 2 && mesh.windows(2).all(|w| w[0] < w[1]), "mesh needs an interval");
        let mut forms: Vec<OneForm> = Vec::new();
        for c in candidates {
            let n0 = k0_norm(c);
            if n0 == 0.0 {
                continue;
            }
            let mut w = c.clone();
            for _ in 0..2 {
                for e in &forms {
                    w = w.sub(&e.scale(k0_inner(e, &w)));
                }
            }
            let n = k0_norm(&w);
            if n > ORTHO_DROP * n0 {
                forms.push(w.scale(Complex64::new(1.0 / n, 0.0)));
            }
        }
        let mut h = DefaultHasher::new();
        for t in &mesh {
            t.to_bits().hash(&mut h);
        }
        for f in &forms {
            for c in f.components() {
                for (k, v) in c.iter() {
                    k.hash(&mut h);
                    v.re.to_bits().hash(&mut h);
                    v.im.to_bits().hash(&mut h);
                }
            }
        }
        NoiseBasis { mesh, forms, tag: h.finish() }
    }

    /// Frame forms first, then every value of every path; mesh is the union
    /// of all breakpoints together with `0` and `horizon`.
    pub fn for_paths(dim: usize, cap: i64, paths: &[&SimpleNoisePath], horizon: f64) -> Self {
        let mesh = merged_mesh(
            paths.iter().flat_map(|p| p.breaks.iter().copied()).chain([0.0, horizon]),
        );
        let mut candidates: Vec<OneForm> = (0..dim).map(|i| frame_form(dim, cap, i)).collect();
        for p in paths {
            candidates.extend(p.values.iter().cloned());
        }
        Self::new(mesh, &candidates)
    }

    pub fn mesh(&self) -> &[f64] {
        &self.mesh
    }

    pub fn forms(&self) -> &[OneForm] {
        &self.forms
    }

    pub fn tag(&self) -> u64 {
        self.tag
    }

    pub fn intervals(&self) -> usize {
        self.mesh.len() - 1
    }

    pub fn interval(&self, j: usize) -> (f64, f64) {
        (self.mesh[j], self.mesh[j + 1])
    }

    /// One-particle dimension `m × |forms|`.
    pub fn len(&self) -> usize {
        self.intervals() * self.forms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, interval: usize, form: usize) -> usize {
        interval * self.forms.len() + form
    }

    /// Coefficients `√τ_j ⟨ω_b, f_j⟩` of a path.
    pub fn expand(&self, f: &SimpleNoisePath) -> Result<Vec<Complex64>> {
        let mut coeffs = vec![Complex64::new(0.0, 0.0); self.len()];
        for j in 0..self.intervals() {
            let (a, b) = self.interval(j);
            if let Some(v) = f.value_at(0.5 * (a + b)) {
                let tau = (b - a).sqrt();
                for (bi, w) in self.forms.iter().enumerate() {
                    coeffs[self.index(j, bi)] = k0_inner(w, v) * tau;
                }
            }
        }
        let residual = self.residual(f, &coeffs);
        if residual > BASIS_RESIDUAL_TOL * f.norm_sq().sqrt().max(1.0) {
            return Err(Error::BasisDeficient { residual });
        }
        Ok(coeffs)
    }

    fn residual(&self, f: &SimpleNoisePath, coeffs: &[Complex64]) -> f64 {
        let mesh = merged_mesh(f.breaks.iter().chain(&self.mesh).copied());
        let zero = OneForm::zero(f.dim, f.cap);
        let mut total = 0.0;
        for w in mesh.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let target = f.value_at(mid).unwrap_or(&zero);
            let j = self.mesh.partition_point(|&t| t <= mid);
            let approx = if j == 0 || j >= self.mesh.len() {
                zero.clone()
            } else {
                let (a, b) = self.interval(j - 1);
                let s = 1.0 / (b - a).sqrt();
                self.forms.iter().enumerate().fold(zero.clone(), |acc, (bi, e)| {
                    acc.add(&e.scale(coeffs[self.index(j - 1, bi)] * s))
                })
            };
            total += k0_norm(&target.sub(&approx)).powi(2) * (w[1] - w[0]);
        }
        total.sqrt()
    }
}

/// Truncated symmetric Fock vector.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    tag: u64,
    modes: usize,
    levels: Vec<BTreeMap<Vec<u16>, Complex64>>,
    loss: f64,
}

fn multiplicity(idx: &[u16]) -> f64 {
    let mut m = factorial(idx.len());
    let mut run = 1;
    for w in idx.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            m /= factorial(run);
            run = 1;
        }
    }
    if !idx.is_empty() {
        m /= factorial(run);
    }
    m
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl FockVector {
    pub fn zero(basis: &NoiseBasis, depth: usize) -> Self {
        FockVector { tag: basis.tag, modes: basis.len(), levels: vec![BTreeMap::new(); depth + 1], loss: 0.0 }
    }

    /// `Ω = (1, 0, 0, …)`.
    pub fn vacuum(basis: &NoiseBasis, depth: usize) -> Self {
        let mut v = Self::zero(basis, depth);
        v.levels[0].insert(Vec::new(), Complex64::new(1.0, 0.0));
        v
    }

    /// Level-one vector `u`.
    pub fn one_particle(basis: &NoiseBasis, depth: usize, u: &[Complex64]) -> Self {
        assert!(depth >= 1);
        let mut v = Self::zero(basis, depth);
        for (i, c) in u.iter().enumerate() {
            if *c != Complex64::new(0.0, 0.0) {
                v.levels[1].insert(vec![i as u16], *c);
            }
        }
        v
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn tag(&self) -> u64 {
        self.tag
    }

    pub fn level(&self, n: usize) -> &BTreeMap<Vec<u16>, Complex64> {
        &self.levels[n]
    }

    /// Symmetric tensor entry at any index ordering.
    pub fn entry(&self, idx: &[u16]) -> Complex64 {
        let mut key = idx.to_vec();
        key.sort_unstable();
        self.levels.get(idx.len()).and_then(|l| l.get(&key)).copied().unwrap_or_default()
    }

    /// Norm of the part pushed past the top level so far.
    pub fn truncation_loss(&self) -> f64 {
        self.loss
    }

    pub fn level_norm_sq(&self, n: usize) -> f64 {
        self.levels[n].iter().map(|(k, v)| multiplicity(k) * v.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        (0..self.levels.len()).map(|n| self.level_norm_sq(n)).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for l in &mut out.levels {
            for v in l.values_mut() {
                *v *= c;
            }
        }
        out.loss *= c.norm();
        out
    }

    /// `self += c · other`.
    pub fn add_scaled(&mut self, other: &FockVector, c: Complex64) {
        assert_eq!(self.tag, other.tag, "fock vectors over different bases");
        for (n, l) in other.levels.iter().enumerate().take(self.levels.len()) {
            for (k, v) in l {
                *self.levels[n].entry(k.clone()).or_default() += c * v;
            }
        }
        self.loss += c.norm() * other.loss;
    }
}

/// Exponential vector `⊕_n (n!)^{-1/2} u^{⊗n}` truncated at `depth`,
/// with the truncation loss set to the exact norm of the dropped tail.
pub fn exponential_vector_of(basis: &NoiseBasis, u: &[Complex64], depth: usize) -> FockVector {
    let support: Vec<u16> = (0..u.len()).filter(|&i| u[i].norm() > 0.0).map(|i| i as u16).collect();
    let mut v = FockVector::vacuum(basis, depth);
    let mut idx = Vec::new();
    for n in 1..=depth {
        let inv = 1.0 / factorial(n).sqrt();
        fill_multisets(&support, n, 0, &mut idx, &mut |key| {
            let c: Complex64 = key.iter().map(|&i| u[i as usize]).product();
            v.levels[n].insert(key.to_vec(), c * inv);
        });
    }
    let a: f64 = u.iter().map(|c| c.norm_sqr()).sum();
    v.loss = exp_tail(a, depth).sqrt();
    v
}

fn fill_multisets(support: &[u16], n: usize, start: usize, idx: &mut Vec<u16>, f: &mut impl FnMut(&[u16])) {
    if idx.len() == n {
        f(idx);
        return;
    }
    for s in start..support.len() {
        idx.push(support[s]);
        fill_multisets(support, n, s, idx, f);
        idx.pop();
    }
}

/// `E(f)` for a path expanded in `basis`.
pub fn exponential_vector(basis: &NoiseBasis, f: &SimpleNoisePath, depth: usize) -> Result<FockVector> {
    Ok(exponential_vector_of(basis, &basis.expand(f)?, depth))
}

/// `Σ_{n>N} aⁿ/n!`, summed directly.
pub fn exp_tail(a: f64, depth: usize) -> f64 {
    let mut term = 1.0;
    for n in 1..=depth {
        term *= a / n as f64;
    }
    let mut sum = 0.0;
    let mut n = depth;
    loop {
        n += 1;
        term *= a / n as f64;
        sum += term;
        if term <= sum * 1e-17 || term == 0.0 || n > depth + 10_000 {
            return sum;
        }
    }
}

/// `Σ_{n>N} zⁿ/n!` for complex `z`; the pairing of two truncation tails.
pub fn exp_tail_complex(z: Complex64, depth: usize) -> Complex64 {
    let mut term = Complex64::new(1.0, 0.0);
    for n in 1..=depth {
        term *= z / n as f64;
    }
    let mut sum = Complex64::new(0.0, 0.0);
    let mut n = depth;
    loop {
        n += 1;
        term *= z / n as f64;
        sum += term;
        if term.norm() <= sum.norm() * 1e-17 || term.norm() == 0.0 || n > depth + 10_000 {
            return sum;
        }
    }
}

/// Reported bound `a^{N+1} e^a / (N+1)!` on [`exp_tail`].
pub fn exp_truncation_bound(a: f64, depth: usize) -> f64 {
    a.powi(depth as i32 + 1) * a.exp() / factorial(depth + 1)
}

/// `a†(u) v`; the component pushed above the top level is dropped and
/// its norm added to the truncation loss.
pub fn creation_apply(u: &[Complex64], v: &FockVector) -> FockVector {
    assert_eq!(u.len(), v.modes, "one-particle vector has wrong length");
    let depth = v.depth();
    let mut out = FockVector { tag: v.tag, modes: v.modes, levels: vec![BTreeMap::new(); depth + 1], loss: v.loss };
    let mut top: BTreeMap<Vec<u16>, Complex64> = BTreeMap::new();
    let nz: Vec<(u16, Complex64)> =
        u.iter().enumerate().filter(|(_, c)| c.norm() > 0.0).map(|(i, c)| (i as u16, *c)).collect();
    for n in 0..=depth {
        let scale = 1.0 / ((n + 1) as f64).sqrt();
        let target = if n < depth { &mut out.levels[n + 1] } else { &mut top };
        for (key, t) in &v.levels[n] {
            for &(i, ui) in &nz {
                let pos = key.partition_point(|&x| x <= i);
                let mut new_key = key.clone();
                new_key.insert(pos, i);
                let count = new_key.iter().filter(|&&x| x == i).count() as f64;
                *target.entry(new_key).or_default() += ui * t * (count * scale);
            }
        }
    }
    let dropped: f64 = top.iter().map(|(k, v)| multiplicity(k) * v.norm_sqr()).sum();
    out.loss += dropped.sqrt();
    out
}

/// `a(u) v`, conjugate-linear in `u`.
pub fn annihilation_apply(u: &[Complex64], v: &FockVector) -> FockVector {
    assert_eq!(u.len(), v.modes, "one-particle vector has wrong length");
    let depth = v.depth();
    let mut out = FockVector { tag: v.tag, modes: v.modes, levels: vec![BTreeMap::new(); depth + 1], loss: v.loss };
    for n in 1..=depth {
        let scale = (n as f64).sqrt();
        for (key, t) in &v.levels[n] {
            let mut prev = None;
            for (p, &i) in key.iter().enumerate() {
                if prev == Some(i) {
                    continue;
                }
                prev = Some(i);
                let ui = u[i as usize];
                if ui.norm() == 0.0 {
                    continue;
                }
                let mut rest = key.clone();
                rest.remove(p);
                *out.levels[n - 1].entry(rest).or_default() += ui.conj() * t * scale;
            }
        }
    }
    out
}

/// `⟨v, w⟩`, conjugate-linear in `v`.
pub fn fock_inner(v: &FockVector, w: &FockVector) -> Result<Complex64> {
    if v.tag != w.tag || v.modes != w.modes {
        return Err(Error::BasisMismatch);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (lv, lw) in v.levels.iter().zip(&w.levels) {
        for (k, a) in lv {
            if let Some(b) = lw.get(k) {
                acc += a.conj() * b * multiplicity(k);
            }
        }
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{exterior_derivative, TrigPoly};
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn dcos() -> OneForm {
        exterior_derivative(&TrigPoly::cos(1, 4, 0, 1).unwrap())
    }

    #[test]
    fn noise_inner_examples() {
        let g = SimpleNoisePath::indicator(0.0, 1.0, dcos());
        assert_eq!(noise_inner(&SimpleNoisePath::zero(1, 4), &g), c(0.0, 0.0));
        assert!((noise_inner(&g, &g) - c(PI, 0.0)).norm() < 1e-14);
        let w = OneForm::coordinate(1, 4, 0);
        let f = SimpleNoisePath::indicator(0.0, 2.0, w.clone());
        let h = SimpleNoisePath::indicator(1.0, 3.0, w.clone());
        let expected = k0_inner(&w, &w);
        assert!((noise_inner(&f, &h) - expected).norm() < 1e-13);
    }

    #[test]
    fn basis_is_orthonormal() {
        let f = SimpleNoisePath::new(
            vec![0.0, 0.5, 1.5],
            vec![dcos(), OneForm::coordinate(1, 4, 0).add(&dcos().scale(c(0.3, 0.1)))],
        );
        let b = NoiseBasis::for_paths(1, 4, &[&f], 2.0);
        assert_eq!(b.forms().len(), 2);
        assert_eq!(b.intervals(), 3);
        for (i, e) in b.forms().iter().enumerate() {
            for (j, w) in b.forms().iter().enumerate() {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((k0_inner(e, w) - c(expected, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn expansion_preserves_inner_products() {
        let f = SimpleNoisePath::new(vec![0.0, 0.5, 1.5], vec![dcos(), OneForm::coordinate(1, 4, 0)]);
        let g = SimpleNoisePath::indicator(0.25, 1.0, dcos().scale(c(0.0, 2.0)));
        let b = NoiseBasis::for_paths(1, 4, &[&f, &g], 1.5);
        let cf = b.expand(&f).unwrap();
        let cg = b.expand(&g).unwrap();
        let dot: Complex64 = cf.iter().zip(&cg).map(|(a, b)| a.conj() * b).sum();
        assert!((dot - noise_inner(&f, &g)).norm() < 1e-12);
    }

    #[test]
    fn missing_form_is_deficient() {
        let f = SimpleNoisePath::indicator(0.0, 1.0, dcos());
        let b = NoiseBasis::for_paths(1, 4, &[], 1.0);
        assert!(matches!(b.expand(&f), Err(Error::BasisDeficient { .. })));
    }

    #[test]
    fn misaligned_mesh_is_deficient() {
        let w = OneForm::coordinate(1, 4, 0);
        let f = SimpleNoisePath::indicator(0.0, 0.5, w.clone());
        let b = NoiseBasis::new(vec![0.0, 1.0], &[w]);
        assert!(matches!(b.expand(&f), Err(Error::BasisDeficient { .. })));
    }

    #[test]
    fn exponential_of_zero_is_vacuum() {
        let b = NoiseBasis::for_paths(1, 4, &[], 1.0);
        let e = exponential_vector(&b, &SimpleNoisePath::zero(1, 4), 4).unwrap();
        assert_eq!(e, FockVector::vacuum(&b, 4));
    }

    #[test]
    fn depth_zero_exponential() {
        let f = SimpleNoisePath::indicator(0.0, 1.0, dcos().scale(c(0.3, 0.0)));
        let b = NoiseBasis::for_paths(1, 4, &[&f], 1.0);
        let e = exponential_vector(&b, &f, 0).unwrap();
        assert_eq!(e, {
            let mut v = FockVector::vacuum(&b, 0);
            v.loss = e.loss;
            v
        });
        let a = f.norm_sq();
        assert!((e.truncation_loss().powi(2) - (a.exp() - 1.0)).abs() < 1e-14);
        assert!(exp_truncation_bound(a, 0) >= a.exp() - 1.0);
    }

    #[test]
    fn exponential_pairing_within_bound() {
        let f = SimpleNoisePath::new(
            vec![0.0, 0.5, 1.0],
            vec![dcos().scale(c(0.2, 0.1)), OneForm::coordinate(1, 4, 0).scale(c(0.0, 0.15))],
        );
        let g = SimpleNoisePath::indicator(0.0, 1.0, dcos().scale(c(-0.1, 0.3)));
        let b = NoiseBasis::for_paths(1, 4, &[&f, &g], 1.0);
        let ef = exponential_vector(&b, &f, 6).unwrap();
        let eg = exponential_vector(&b, &g, 6).unwrap();
        let diff = (fock_inner(&ef, &eg).unwrap() - noise_inner(&f, &g).exp()).norm();
        let a = (f.norm_sq() * g.norm_sq()).sqrt();
        assert!(diff <= exp_truncation_bound(a, 6));
        let self_diff = (fock_inner(&ef, &ef).unwrap().re - f.norm_sq().exp()).abs();
        assert!(self_diff <= exp_truncation_bound(f.norm_sq(), 6));
    }

    #[test]
    fn ladder_on_vacuum() {
        let b = NoiseBasis::new(vec![0.0, 1.0, 2.0], &[OneForm::coordinate(1, 2, 0)]);
        let vac = FockVector::vacuum(&b, 3);
        let u = vec![c(1.0, 2.0), c(0.0, -1.0)];
        let w = vec![c(0.5, 0.0), c(2.0, 1.0)];
        assert_eq!(annihilation_apply(&u, &vac).norm(), 0.0);
        let one = creation_apply(&u, &vac);
        assert_eq!(one, FockVector::one_particle(&b, 3, &u));
        let lhs = &annihilation_apply(&u, &creation_apply(&w, &vac));
        let mut comm = lhs.clone();
        comm.add_scaled(&creation_apply(&w, &annihilation_apply(&u, &vac)), c(-1.0, 0.0));
        let uw: Complex64 = u.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
        let mut expected = vac.scale(uw);
        expected.add_scaled(&comm, c(-1.0, 0.0));
        assert!(expected.norm() < 1e-15);
    }

    #[test]
    fn creation_norms() {
        let b = NoiseBasis::new(vec![0.0, 1.0], &[OneForm::coordinate(1, 2, 0)]);
        let u = vec![c(1.0, 0.0)];
        let mut v = FockVector::vacuum(&b, 4);
        for n in 1..=4 {
            v = creation_apply(&u, &v);
            assert!((v.norm() - factorial(n).sqrt()).abs() < 1e-12);
        }
        let over = creation_apply(&u, &v);
        assert_eq!(over.norm(), 0.0);
        assert!((over.truncation_loss() - factorial(5).sqrt()).abs() < 1e-9);
    }

    #[test]
    fn mismatched_bases_rejected() {
        let b1 = NoiseBasis::new(vec![0.0, 1.0], &[OneForm::coordinate(1, 2, 0)]);
        let b2 = NoiseBasis::new(vec![0.0, 2.0], &[OneForm::coordinate(1, 2, 0)]);
        let r = fock_inner(&FockVector::vacuum(&b1, 2), &FockVector::vacuum(&b2, 2));
        assert_eq!(r, Err(Error::BasisMismatch));
    }
}
