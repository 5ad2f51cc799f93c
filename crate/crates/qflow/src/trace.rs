//! Heat traces and the bosonic spectral action on flat tori.
//!
//! Eigenvalues of `Δ` on `T^d` are `|k|²`, `k ∈ Z^d`; the cutoff `z`
//! bounds `|k|`. The flow realizes `e^{-tΔ/2}`, so heat quantities at time
//! `t` are read from the flow at time `2t`.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::flow::vacuum_expectation;
use crate::spectral::{ModeIndex, TorusGeometry, TrigPoly};

/// Lattice points `|k| ≤ z` of `Z^d`, ordered by decreasing `|k|²`.
#[derive(Clone, Debug)]
pub struct SpectrumSlice {
    pub dim: usize,
    pub z: f64,
    modes: Vec<ModeIndex>,
}

impl SpectrumSlice {
    pub fn new(dim: usize, z: f64) -> Result<Self> {
        TorusGeometry::new(dim)?;
        let r = z.max(0.0).floor() as i64;
        let z_sq = z * z;
        let mut modes = Vec::new();
        let mut k = vec![-r; dim];
        loop {
            let m = ModeIndex::new(&k);
            if (m.norm_sq() as f64) <= z_sq {
                modes.push(m);
            }
            let mut a = 0;
            while a < dim {
                k[a] += 1;
                if k[a] <= r {
                    break;
                }
                k[a] = -r;
                a += 1;
            }
            if a == dim {
                break;
            }
        }
        modes.sort_by(|a, b| b.norm_sq().cmp(&a.norm_sq()).then(a.cmp(b)));
        Ok(SpectrumSlice { dim, z, modes })
    }

    pub fn modes(&self) -> &[ModeIndex] {
        &self.modes
    }

    /// `N(z)² = #{k : |k| ≤ z}`.
    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    /// `(|k|², multiplicity)` by decreasing eigenvalue.
    pub fn shells(&self) -> Vec<(i64, usize)> {
        let mut out: Vec<(i64, usize)> = Vec::new();
        for m in &self.modes {
            let e = m.norm_sq();
            match out.last_mut() {
                Some((last, c)) if *last == e => *c += 1,
                _ => out.push((e, 1)),
            }
        }
        out
    }
}

/// `(|k|², multiplicity)` for `|k| ≤ z` by decreasing eigenvalue, counted by
/// convolving one-dimensional square counts rather than listing lattice points.
pub fn shell_counts(dim: usize, z: f64) -> Result<Vec<(i64, usize)>> {
    TorusGeometry::new(dim)?;
    let r = z.max(0.0).floor() as i64;
    let top = (z * z).floor() as usize;
    let mut counts = vec![0usize; top + 1];
    counts[0] = 1;
    for _ in 0..dim {
        let mut next = vec![0usize; top + 1];
        for (e, &c) in counts.iter().enumerate().filter(|(_, c)| **c > 0) {
            for n in -r..=r {
                let e2 = e + (n * n) as usize;
                if e2 <= top {
                    next[e2] += c;
                }
            }
        }
        counts = next;
    }
    Ok(counts.into_iter().enumerate().rev().filter(|(_, c)| *c > 0).map(|(e, c)| (e as i64, c)).collect())
}

/// `Σ_{|k|≤z} e^{-t|k|²}`, summed from the smallest terms up.
pub fn heat_trace_direct(dim: usize, t: f64, z: f64) -> Result<f64> {
    assert!(t > 0.0);
    Ok(shell_counts(dim, z)?.iter().map(|&(e, c)| c as f64 * (-t * e as f64).exp()).sum())
}

/// Bound on `Σ_{|k|>z} e^{-t|k|²}` over `Z^d`.
pub fn gaussian_tail_bound(dim: usize, t: f64, z: f64) -> f64 {
    // |k| > z forces |k|_∞ > m with m = ⌊z/√d⌋.
    let m = (z / (dim as f64).sqrt()).floor();
    let q = (-t * (2.0 * m + 3.0)).exp();
    let one_dim_tail = 2.0 * (-t * (m + 1.0).powi(2)).exp() / (1.0 - q);
    let theta = 1.0 + 2.0 * (-t).exp() / (1.0 - (-3.0 * t).exp());
    dim as f64 * theta.powi(dim as i32 - 1) * one_dim_tail
}

/// Smallest integer cutoff whose Gaussian tail is below `eps`.
pub fn auto_cutoff(dim: usize, t: f64, eps: f64) -> f64 {
    let mut z = 0.0;
    while gaussian_tail_bound(dim, t, z) >= eps {
        z += 1.0;
    }
    z
}

/// `Σ_{|k|≤z} ⟨φ_k, j_{2t}(φ_k) 1⟩ / ‖φ_k‖²`, one flow evaluation per mode.
pub fn heat_trace_via_flow(dim: usize, cap: i64, t: f64, z: f64) -> Result<f64> {
    let slice = SpectrumSlice::new(dim, z)?;
    let one = TrigPoly::one(dim, cap);
    let norm_sq = TorusGeometry::new(dim)?.volume();
    let values: Vec<Result<f64>> = slice
        .modes()
        .par_iter()
        .map(|k| {
            let phi = TrigPoly::mode(dim, cap, *k, Complex64::new(1.0, 0.0))?;
            Ok(vacuum_expectation(&phi, &phi, &one, 2.0 * t)?.re / norm_sq)
        })
        .collect();
    values.into_iter().sum()
}

/// `(π/t)^{d/2} (Σ_n e^{-π²n²/t})^d`, the Poisson resummation.
pub fn theta_reference(dim: usize, t: f64) -> f64 {
    assert!(t > 0.0);
    let pi = std::f64::consts::PI;
    let mut factor = 1.0;
    let mut n = 1.0;
    loop {
        let term = 2.0 * (-pi * pi * n * n / t).exp();
        factor += term;
        if term < 1e-18 * factor {
            break;
        }
        n += 1.0;
    }
    ((pi / t).sqrt() * factor).powi(dim as i32)
}

/// Spinor rank `2^{⌊d/2⌋}`.
pub fn spinor_rank(dim: usize) -> usize {
    1 << (dim / 2)
}

/// `rank · Σ_{|k|≤z} e^{-|k|²/Λ²}`.
pub fn spectral_action(dim: usize, lambda: f64, z: f64) -> Result<f64> {
    assert!(lambda > 0.0);
    Ok(spinor_rank(dim) as f64 * heat_trace_direct(dim, lambda.powi(-2), z)?)
}

/// [`spectral_action`] with the cutoff chosen so the dropped tail is below `1e-14`.
pub fn spectral_action_auto(dim: usize, lambda: f64) -> Result<f64> {
    let t = lambda.powi(-2);
    spectral_action(dim, lambda, auto_cutoff(dim, t, 1e-14))
}

/// Least-squares fit of `log S = log C + s log Λ`.
#[derive(Clone, Debug)]
pub struct WeylFit {
    pub slope: f64,
    pub prefactor: f64,
    /// `rank · vol(T^d) / (4π)^{d/2}`.
    pub expected_prefactor: f64,
}

impl WeylFit {
    pub fn prefactor_rel_err(&self) -> f64 {
        (self.prefactor / self.expected_prefactor - 1.0).abs()
    }
}

pub fn weyl_fit(dim: usize, lambdas: &[f64]) -> Result<WeylFit> {
    let pts: Vec<(f64, f64)> =
        lambdas.iter().map(|&l| Ok((l.ln(), spectral_action_auto(dim, l)?.ln()))).collect::<Result<_>>()?;
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let slope = sxy / sxx;
    let vol = TorusGeometry::new(dim)?.volume();
    Ok(WeylFit {
        slope,
        prefactor: (my - slope * mx).exp(),
        expected_prefactor: spinor_rank(dim) as f64 * vol / (4.0 * std::f64::consts::PI).powf(dim as f64 / 2.0),
    })
}

/// Section of `End(C^r)` over `T^d`, row-major `r × r` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixFunction {
    rank: usize,
    entries: Vec<TrigPoly>,
}

impl MatrixFunction {
    pub fn new(rank: usize, entries: Vec<TrigPoly>) -> Result<Self> {
        if entries.len() != rank * rank {
            return Err(Error::DimMismatch { left: entries.len(), right: rank * rank });
        }
        Ok(MatrixFunction { rank, entries })
    }

    /// `f · 1_End`.
    pub fn scalar(f: &TrigPoly, rank: usize) -> Self {
        let zero = TrigPoly::zero(f.dim(), f.cap());
        let entries = (0..rank * rank).map(|i| if i % (rank + 1) == 0 { f.clone() } else { zero.clone() }).collect();
        MatrixFunction { rank, entries }
    }

    /// `f · E_{ab}`.
    pub fn unit(f: &TrigPoly, rank: usize, a: usize, b: usize) -> Self {
        let zero = TrigPoly::zero(f.dim(), f.cap());
        let mut entries = vec![zero; rank * rank];
        entries[a * rank + b] = f.clone();
        MatrixFunction { rank, entries }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn entry(&self, a: usize, b: usize) -> &TrigPoly {
        &self.entries[a * self.rank + b]
    }

    pub fn map(&self, f: impl Fn(&TrigPoly) -> TrigPoly) -> Self {
        MatrixFunction { rank: self.rank, entries: self.entries.iter().map(f).collect() }
    }

    /// `∫ tr(A* B)`.
    pub fn hs_inner(&self, other: &MatrixFunction) -> Complex64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| a.l2_inner(b)).sum()
    }

    pub fn max_abs_diff(&self, other: &MatrixFunction) -> f64 {
        self.entries.iter().zip(&other.entries).map(|(a, b)| a.max_abs_diff(b)).fold(0.0, f64::max)
    }
}

/// `Δ^End` for the trivial flat connection: entrywise `Δ`.
pub fn endomorphism_laplacian(m: &MatrixFunction) -> MatrixFunction {
    m.map(|e| e.laplacian())
}

/// Trace of `e^{-tΔ^End}` restricted to `H_φ = {f ⊗ E₁₁}` with `|k| ≤ z`.
pub fn parallel_trace_extract(dim: usize, t: f64, rank: usize, z: f64) -> Result<f64> {
    assert!(rank >= 1);
    let slice = SpectrumSlice::new(dim, z)?;
    let cap = z.floor() as i64;
    let values: Vec<Result<f64>> = slice
        .modes()
        .par_iter()
        .map(|k| {
            let phi = TrigPoly::mode(dim, cap, *k, Complex64::new(1.0, 0.0))?;
            let m = MatrixFunction::unit(&phi, rank, 0, 0);
            let evolved = m.map(|e| e.heat(t, false));
            Ok(m.hs_inner(&evolved).re / m.hs_inner(&m).re)
        })
        .collect();
    values.into_iter().sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn direct_examples() {
        assert!((heat_trace_direct(1, 1.0, 6.0).unwrap() - 1.772637205).abs() < 1e-9);
        assert!((heat_trace_direct(2, 1.0, 6.0).unwrap() - 1.772637205f64.powi(2)).abs() < 1e-8);
        assert!((heat_trace_direct(1, 200.0, 6.0).unwrap() - 1.0).abs() < 1e-80);
    }

    #[test]
    fn shell_counts_match_slice() {
        for (d, z) in [(1, 5.0), (2, 6.5), (3, 4.2)] {
            assert_eq!(shell_counts(d, z).unwrap(), SpectrumSlice::new(d, z).unwrap().shells());
        }
    }

    #[test]
    fn slice_counts() {
        assert_eq!(SpectrumSlice::new(1, 6.0).unwrap().mode_count(), 13);
        assert_eq!(SpectrumSlice::new(2, 1.0).unwrap().mode_count(), 5);
        assert_eq!(SpectrumSlice::new(2, 2.0_f64.sqrt()).unwrap().mode_count(), 9);
        assert_eq!(SpectrumSlice::new(3, 1.0).unwrap().mode_count(), 7);
    }

    #[test]
    fn flow_examples() {
        assert!((heat_trace_via_flow(1, 6, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        assert!((heat_trace_via_flow(1, 6, 1.0, 6.0).unwrap() - 1.772637205).abs() < 1e-9);
        assert!((heat_trace_via_flow(2, 3, 1e-12, 3.0).unwrap() - 29.0).abs() < 1e-9);
    }

    #[test]
    fn flow_requires_cap() {
        assert!(matches!(heat_trace_via_flow(1, 3, 1.0, 6.0), Err(Error::CapExceeded { .. })));
    }

    #[test]
    fn theta_examples() {
        assert!((theta_reference(1, 0.05) - 7.926654595).abs() < 1e-9);
        assert!((theta_reference(1, 1.0) - 1.772637205).abs() < 1e-9);
        assert!((theta_reference(2, 0.1) - 31.41593).abs() < 1e-5);
        assert!((theta_reference(2, 0.1) / (PI / 0.1) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn theta_matches_direct_with_auto_cutoff() {
        for d in 1..=2 {
            for t in [0.05, 0.1, 0.5, 1.0] {
                let z = auto_cutoff(d, t, 1e-12);
                let diff = (heat_trace_direct(d, t, z).unwrap() - theta_reference(d, t)).abs();
                assert!(diff <= 1e-10, "d={d} t={t} diff={diff}");
            }
        }
    }

    #[test]
    fn tail_bound_is_a_bound() {
        for d in 1..=3 {
            for z in [0.0, 1.5, 3.0] {
                let t = 0.3;
                let tail = heat_trace_direct(d, t, 40.0).unwrap() - heat_trace_direct(d, t, z).unwrap();
                assert!(tail <= gaussian_tail_bound(d, t, z) * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn action_examples() {
        assert!((spectral_action(1, 1.0, 6.0).unwrap() - 1.772637205).abs() < 1e-9);
        let s = spectral_action(2, 10f64.sqrt(), 40.0).unwrap();
        assert!((s - 2.0 * 31.41593).abs() < 1e-4);
        assert!((spectral_action(2, 1e-3, 5.0).unwrap() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn weyl_scaling() {
        let lambdas: Vec<f64> = (0..=6).map(|i| 5.0 + 2.5 * i as f64).collect();
        for d in 1..=2 {
            let fit = weyl_fit(d, &lambdas).unwrap();
            assert!((fit.slope - d as f64).abs() < 0.01);
            assert!(fit.prefactor_rel_err() < 0.01);
        }
    }

    #[test]
    fn endomorphism_examples() {
        let f = &TrigPoly::cos(1, 3, 0, 2).unwrap() + &TrigPoly::sin(1, 3, 0, 1).unwrap();
        let m = MatrixFunction::scalar(&f, 3);
        assert_eq!(endomorphism_laplacian(&m), MatrixFunction::scalar(&f.laplacian(), 3));
        let c = TrigPoly::one(1, 3);
        let off = MatrixFunction::unit(&c, 2, 0, 1);
        assert!(endomorphism_laplacian(&off).max_abs_diff(&MatrixFunction::unit(&TrigPoly::zero(1, 3), 2, 0, 1)) == 0.0);
        for r in 1..=3 {
            assert!((parallel_trace_extract(1, 1.0, r, 6.0).unwrap() - 1.772637205).abs() < 1e-9);
        }
    }
}
