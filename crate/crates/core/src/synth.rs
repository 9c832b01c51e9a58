//! Synthetic tensors `T = Q·S` with a known structured core.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::pattern::{pattern_v, pattern_vsym};
use crate::random::{gaussian_tensor, haar_orthogonal};
use crate::tensor::{DenseTensor, OrthTuple, SymTensor};

/// Smallest gap between consecutive diagonal entries of a sampled core.
pub const DIAGONAL_GAP: f64 = 0.1;

#[derive(Debug, Clone)]
pub struct Instance {
    pub q: OrthTuple,
    pub core: DenseTensor,
    pub tensor: DenseTensor,
    pub symmetric: bool,
}

impl Instance {
    /// Diagonal of the core, decreasing.
    pub fn diagonal(&self) -> Vec<f64> {
        let d = self.core.order();
        let n1 = self.core.shape()[0];
        (0..n1).map(|j| self.core.get(&vec![j; d])).collect()
    }
}

/// `count` standard Gaussian values, redrawn until they are positive and
/// strictly decreasing with gaps of at least [`DIAGONAL_GAP`].
pub fn sorted_diagonal<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut v: Vec<f64> = (0..count).map(|_| rng.sample(StandardNormal)).collect();
        v.sort_by(|a, b| b.total_cmp(a));
        let positive = v.last().is_none_or(|&x| x > 0.0);
        if positive && v.windows(2).all(|w| w[0] - w[1] >= DIAGONAL_GAP) {
            return v;
        }
    }
}

/// Core in `V` with Gaussian free entries and a sorted positive diagonal.
pub fn sample_core<R: Rng + ?Sized>(shape: &[usize], rng: &mut R) -> Result<DenseTensor> {
    let mut s = pattern_v(shape)?.project(&gaussian_tensor(shape, rng))?;
    set_diagonal(&mut s, &sorted_diagonal(shape[0], rng));
    Ok(s)
}

/// Symmetric core in `V_sym`: a symmetrized Gaussian tensor projected onto
/// the pattern, with a sorted positive diagonal.
pub fn sample_sym_core<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> Result<SymTensor> {
    let raw = SymTensor::symmetrize(&gaussian_tensor(&vec![n; d], rng))?;
    let mut s = pattern_vsym(n, d)?.project(raw.as_dense())?;
    set_diagonal(&mut s, &sorted_diagonal(n, rng));
    SymTensor::symmetrize(&s)
}

fn set_diagonal(s: &mut DenseTensor, diag: &[f64]) {
    let d = s.order();
    for (j, v) in diag.iter().enumerate() {
        s.set(&vec![j; d], *v);
    }
}

/// `Q·S` with Haar-random `Q`. In the symmetric case `shape` must be
/// `n^d` and one `Q` acts on every mode.
pub fn sample_instance<R: Rng + ?Sized>(shape: &[usize], symmetric: bool, rng: &mut R) -> Result<Instance> {
    if symmetric {
        if shape.iter().any(|&n| n != shape[0]) {
            return Err(Error::InvalidShape {
                shape: shape.to_vec(),
                reason: "symmetric instances need equal dimensions".into(),
            });
        }
        let core = sample_sym_core(shape[0], shape.len(), rng)?.into_dense();
        let q = OrthTuple::replicated(&haar_orthogonal(shape[0], rng), shape.len());
        let tensor = SymTensor::symmetrize(&q.act(&core)?)?.into_dense();
        Ok(Instance { q, core, tensor, symmetric })
    } else {
        let core = sample_core(shape, rng)?;
        let q = OrthTuple::from_matrices_unchecked(shape.iter().map(|&n| haar_orthogonal(n, rng)).collect());
        let tensor = q.act(&core)?;
        Ok(Instance { q, core, tensor, symmetric })
    }
}
