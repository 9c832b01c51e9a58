//! Structured Tucker decomposition `T = Q·S` with `S` in the pattern
//! subspace, and its symmetric counterpart `T = Q•S`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::manifold::{minimize, ObjectiveSpec, OptResult, OptimizerConfig};
use crate::pattern::PatternIndexSet;
use crate::tensor::{DenseTensor, OrthTuple, SymTensor};

/// Consecutive normalized diagonal entries closer than this are reported
/// as non-generic.
pub const GENERICITY_GAP: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct StructuredDecomposition {
    pub q: OrthTuple,
    pub core: DenseTensor,
    /// Diagonal entries `S_{j,…,j}` for `j < n_1`, in normalized order.
    pub singular_values: Vec<f64>,
    /// Column `j` of every `Q_k`, for `j < n_1`.
    pub tuples: Vec<Vec<DVector<f64>>>,
    /// `‖T − Q·S‖ / ‖T‖`, zero for the zero tensor.
    pub residual: f64,
    pub symmetric: bool,
    pub non_generic: bool,
    pub converged: bool,
    pub iterations: usize,
    pub best_start: usize,
}

impl StructuredDecomposition {
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.non_generic {
            out.push("non-generic: uniqueness not guaranteed".to_string());
        }
        if !self.converged {
            out.push("optimizer stopped before the gradient tolerance was met".to_string());
        }
        out
    }
}

pub fn reconstruct(dec: &StructuredDecomposition) -> Result<DenseTensor> {
    dec.q.act(&dec.core)
}

/// Relabels the leading `n_1` basis indices so that the diagonal is sorted
/// and, where the sign can be moved, nonnegative. `Q·S` is unchanged.
///
/// Non-symmetric: sort by `|S_jj…|` descending (ties by index), then flip the
/// sign of mode-0 column `j` wherever the diagonal is negative. Symmetric:
/// one shared relabeling; for odd order negate first, then sort descending by
/// signed value.
pub fn normalize(q: &OrthTuple, s: &DenseTensor, symmetric: bool) -> Result<(OrthTuple, DenseTensor)> {
    if q.sizes() != s.shape() {
        return Err(Error::ShapeMismatch {
            left: q.sizes(),
            right: s.shape().to_vec(),
        });
    }
    let d = s.order();
    let n1 = s.shape().iter().copied().min().unwrap_or(0);
    let diag = |t: &DenseTensor, j: usize| t.get(&vec![j; d]);

    let mut mats: Vec<DMatrix<f64>> = q.matrices().to_vec();
    let mut core = s.clone();

    let flip_modes: Vec<usize> = if symmetric { (0..d).collect() } else { vec![0] };
    let may_flip = !symmetric || d % 2 == 1;
    if may_flip {
        for j in 0..n1 {
            if diag(&core, j) < 0.0 {
                for &k in &flip_modes {
                    mats[k].column_mut(j).neg_mut();
                }
                let data = core.as_mut_slice();
                let strides = strides(s.shape());
                for (off, v) in data.iter_mut().enumerate() {
                    let hits = flip_modes.iter().filter(|&&k| (off / strides[k]) % s.shape()[k] == j).count();
                    if hits % 2 == 1 {
                        *v = -*v;
                    }
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n1).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (diag(&core, a), diag(&core, b));
        y.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let relabel = |i: usize| if i < n1 { order[i] } else { i };
    let permuted = DenseTensor::from_fn(s.shape(), |idx| {
        let src: Vec<usize> = idx.iter().map(|&i| relabel(i)).collect();
        core.get(&src)
    })?;
    let mats = mats
        .iter()
        .map(|m| DMatrix::from_fn(m.nrows(), m.ncols(), |r, c| m[(r, relabel(c))]))
        .collect();
    Ok((OrthTuple::from_matrices_unchecked(mats), permuted))
}

fn strides(shape: &[usize]) -> Vec<usize> {
    let mut s = vec![1; shape.len()];
    for k in (0..shape.len().saturating_sub(1)).rev() {
        s[k] = s[k + 1] * shape[k + 1];
    }
    s
}

fn assemble(
    target: &DenseTensor,
    pattern: &PatternIndexSet,
    opt: OptResult,
    symmetric: bool,
) -> Result<StructuredDecomposition> {
    let raw = pattern.project(&opt.q.transpose().act(target)?)?;
    let (q, core) = normalize(&opt.q, &raw, symmetric)?;
    let d = core.order();
    let n1 = core.shape().iter().copied().min().unwrap_or(0);
    let singular_values: Vec<f64> = (0..n1).map(|j| core.get(&vec![j; d])).collect();
    let tuples = (0..n1)
        .map(|j| q.matrices().iter().map(|m| m.column(j).into_owned()).collect())
        .collect();
    let non_generic = singular_values
        .windows(2)
        .any(|w| (w[0] - w[1]).abs() < GENERICITY_GAP);
    let norm = target.norm();
    let residual = if norm == 0.0 {
        0.0
    } else {
        target.sub(&q.act(&core)?)?.norm() / norm
    };
    Ok(StructuredDecomposition {
        q,
        core,
        singular_values,
        tuples,
        residual,
        symmetric,
        non_generic,
        converged: opt.converged,
        iterations: opt.iterations,
        best_start: opt.best_start,
    })
}

fn run(spec: ObjectiveSpec, config: &OptimizerConfig) -> Result<StructuredDecomposition> {
    let opt = minimize(&spec, config)?;
    assemble(spec.target(), spec.pattern(), opt, spec.symmetric())
}

/// Requires the shape sorted ascending.
pub fn decompose(t: &DenseTensor, config: &OptimizerConfig) -> Result<StructuredDecomposition> {
    run(ObjectiveSpec::structured(t.clone(), false)?, config)
}

pub fn decompose_sym(t: &SymTensor, config: &OptimizerConfig) -> Result<StructuredDecomposition> {
    run(ObjectiveSpec::structured(t.as_dense().clone(), true)?, config)
}

/// Fit with a diagonal core.
pub fn decompose_odeco(t: &DenseTensor, symmetric: bool, config: &OptimizerConfig) -> Result<StructuredDecomposition> {
    run(ObjectiveSpec::odeco(t.clone(), symmetric)?, config)
}

/// Largest column error between the first `cols` columns of `a` and `b`
/// after optimally matching columns up to sign and permutation.
pub fn column_match_error(a: &DMatrix<f64>, b: &DMatrix<f64>, cols: usize) -> f64 {
    let mut used = vec![false; cols];
    let mut worst: f64 = 0.0;
    for i in 0..cols {
        let ai = a.column(i);
        let mut best = f64::INFINITY;
        let mut pick = None;
        for (j, taken) in used.iter().enumerate() {
            if *taken {
                continue;
            }
            let bj = b.column(j);
            let err = (&ai - &bj).amax().min((&ai + &bj).amax());
            if err < best {
                best = err;
                pick = Some(j);
            }
        }
        if let Some(j) = pick {
            used[j] = true;
        }
        worst = worst.max(best);
    }
    worst
}
