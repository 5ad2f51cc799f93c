
use super::TrigPoly;
use crate::error::{Error, Result};

/// Rank-`k` covariant tensor field with components indexed by `[d]^k`.
///
/// Components are stored row-major: multi-index `(i₁, …, i_k)` sits at
/// `Σ i_j d^{k-j}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CovariantTensor {
    rank: usize,
    dim: usize,
    components: Vec<TrigPoly>,
}

impl CovariantTensor {
    pub fn from_components(rank: usize, dim: usize, components: Vec<TrigPoly>) -> Self {
        assert_eq!(components.len(), dim.pow(rank as u32), "component count");
        CovariantTensor { rank, dim, components }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn components(&self) -> &[TrigPoly] {
        &self.components
    }

    pub fn component(&self, index: &[usize]) -> &TrigPoly {
        assert_eq!(index.len(), self.rank, "index length");
        let flat = index.iter().fold(0, |acc, &i| acc * self.dim + i);
        &self.components[flat]
    }

    /// Applies a linear map to every component.
    pub fn map(&self, f: impl Fn(&TrigPoly) -> TrigPoly) -> CovariantTensor {
        CovariantTensor {
            rank: self.rank,
            dim: self.dim,
            components: self.components.iter().map(f).collect(),
        }
    }

    /// Largest coefficient deviation over all components.
    pub fn max_abs_diff(&self, other: &CovariantTensor) -> f64 {
        assert_eq!(self.rank, other.rank);
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    /// True when components agree under every transposition of indices.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.components.len();
        (0..n).all(|flat| {
            let idx = unflatten(flat, self.rank, self.dim);
            let mut sorted = idx.clone();
            sorted.sort_unstable();
            self.component(&idx).max_abs_diff(self.component(&sorted)) <= tol
        })
    }
}

fn unflatten(mut flat: usize, rank: usize, dim: usize) -> Vec<usize> {
    let mut idx = vec![0; rank];
    for slot in idx.iter_mut().rev() {
        *slot = flat % dim;
        flat /= dim;
    }
    idx
}

/// `(∇^k f)_{i₁…i_k} = ∂_{i₁}⋯∂_{i_k} f`; Christoffel symbols vanish on the flat torus.
pub fn covariant_derivative(f: &TrigPoly, k: usize) -> CovariantTensor {
    let dim = f.dim();
    let components = (0..dim.pow(k as u32))
        .map(|flat| {
            unflatten(flat, k, dim)
                .iter()
                .fold(f.clone(), |acc, &i| acc.partial(i))
        })
        .collect();
    CovariantTensor { rank: k, dim, components }
}

/// Pointwise full contraction `Σ_I conj(s_I) t_I`.
pub fn tensor_inner(s: &CovariantTensor, t: &CovariantTensor) -> Result<TrigPoly> {
    if s.rank != t.rank {
        return Err(Error::RankMismatch { left: s.rank, right: t.rank });
    }
    if s.dim != t.dim {
        return Err(Error::DimMismatch { left: s.dim, right: t.dim });
    }
    let cap = s.components[0].cap().max(t.components[0].cap());
    let mut acc = TrigPoly::zero(s.dim, cap);
    for (a, b) in s.components.iter().zip(&t.components) {
        acc = &acc + &a.conj().multiply(b)?;
    }
    Ok(acc)
}
