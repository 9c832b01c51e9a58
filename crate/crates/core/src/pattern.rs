//! Coordinate sparsity patterns `V`, `V_sym`, `V_diag` and `V^⊥`.
//!
//! A coordinate is *near-diagonal* when it sits at Hamming distance one from
//! some diagonal coordinate `(j, …, j)` with `j < n_1`. Tensors in `V` vanish
//! on every near-diagonal coordinate, tensors in `V^⊥` vanish everywhere else.

use std::fmt;

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor, MultiIndex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    V,
    VSym,
    VDiag,
    VPerp,
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PatternKind::V => "V",
            PatternKind::VSym => "V_sym",
            PatternKind::VDiag => "V_diag",
            PatternKind::VPerp => "V_perp",
        };
        f.write_str(s)
    }
}

/// For `V`/`V_sym` the stored indices are the coordinates forced to zero, for
/// `V_diag`/`V_perp` they are the coordinates allowed to be nonzero.
#[derive(Debug, Clone, PartialEq)]
pub struct PatternIndexSet {
    shape: Vec<usize>,
    kind: PatternKind,
    indices: Vec<Vec<usize>>,
    forced: Vec<bool>,
}

/// Hamming distance between two multi-indices.
pub fn hamming(a: &[usize], b: &[usize]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

fn is_near_diagonal(idx: &[usize], n1: usize) -> bool {
    let d = idx.len();
    // A diagonal at distance one shares d − 1 ≥ 1 coordinates with idx, so
    // its value is idx[0] or idx[1].
    debug_assert!(d >= 2);
    [idx[0], idx[1]]
        .iter()
        .any(|&j| j < n1 && idx.iter().filter(|&&i| i != j).count() == 1)
}

fn is_diagonal(idx: &[usize]) -> bool {
    idx.iter().all(|&i| i == idx[0])
}

fn validate(shape: &[usize], require_sorted: bool) -> Result<()> {
    if shape.len() < 2 {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: "patterns need order d >= 2".into(),
        });
    }
    if shape.iter().any(|&n| n < 2) {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: "patterns need every n_k >= 2".into(),
        });
    }
    if require_sorted && shape.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: "dimensions must be non-decreasing; permute the modes first".into(),
        });
    }
    Ok(())
}

impl PatternIndexSet {
    fn build(shape: &[usize], kind: PatternKind, forced_at: impl Fn(&[usize]) -> bool) -> Self {
        let lists_forced = matches!(kind, PatternKind::V | PatternKind::VSym);
        let mut forced = Vec::with_capacity(shape.iter().product());
        let mut indices = Vec::new();
        for idx in MultiIndex::new(shape) {
            let f = forced_at(&idx);
            if f == lists_forced {
                indices.push(idx);
            }
            forced.push(f);
        }
        PatternIndexSet {
            shape: shape.to_vec(),
            kind,
            indices,
            forced,
        }
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn kind(&self) -> PatternKind {
        self.kind
    }

    /// Sorted (row-major) multi-indices; meaning depends on [`PatternKind`].
    pub fn indices(&self) -> &[Vec<usize>] {
        &self.indices
    }

    /// Per-offset flag: true when the coordinate must vanish.
    pub fn forced_mask(&self) -> &[bool] {
        &self.forced
    }

    pub fn is_forced(&self, index: &[usize]) -> bool {
        self.forced[crate::tensor::ravel(index, &self.shape)]
    }

    pub fn forced_count(&self) -> usize {
        self.forced.iter().filter(|&&f| f).count()
    }

    /// Dimension of the admissible subspace (number of free coordinates).
    pub fn dim(&self) -> usize {
        self.forced.len() - self.forced_count()
    }

    fn check(&self, t: &DenseTensor) -> Result<()> {
        if t.shape() != self.shape.as_slice() {
            return Err(Error::ShapeMismatch {
                left: t.shape().to_vec(),
                right: self.shape.clone(),
            });
        }
        Ok(())
    }

    /// Nearest admissible tensor: zeroes every forced coordinate.
    pub fn project(&self, t: &DenseTensor) -> Result<DenseTensor> {
        self.check(t)?;
        let mut out = t.clone();
        for (v, &f) in out.as_mut_slice().iter_mut().zip(&self.forced) {
            if f {
                *v = 0.0;
            }
        }
        Ok(out)
    }

    /// Residual `t − project(t)`: keeps only the forced coordinates.
    pub fn project_complement(&self, t: &DenseTensor) -> Result<DenseTensor> {
        self.check(t)?;
        let mut out = t.clone();
        for (v, &f) in out.as_mut_slice().iter_mut().zip(&self.forced) {
            if !f {
                *v = 0.0;
            }
        }
        Ok(out)
    }

    pub fn distance_sq(&self, t: &DenseTensor) -> Result<f64> {
        self.check(t)?;
        Ok(t.as_slice()
            .iter()
            .zip(&self.forced)
            .filter(|(_, &f)| f)
            .map(|(v, _)| v * v)
            .sum())
    }

    pub fn distance(&self, t: &DenseTensor) -> Result<f64> {
        Ok(self.distance_sq(t)?.sqrt())
    }

    /// Indices rendered 1-based, e.g. `112`, or `1,1,10` when some
    /// dimension exceeds 9.
    pub fn render_one_based(&self) -> Vec<String> {
        let wide = self.shape.iter().any(|&n| n > 9);
        self.indices
            .iter()
            .map(|idx| {
                let parts: Vec<String> = idx.iter().map(|i| (i + 1).to_string()).collect();
                if wide {
                    parts.join(",")
                } else {
                    parts.concat()
                }
            })
            .collect()
    }
}

/// Zero pattern of `V` for a shape with `n_1 ≤ ⋯ ≤ n_d`.
pub fn pattern_v(shape: &[usize]) -> Result<PatternIndexSet> {
    validate(shape, true)?;
    let n1 = shape[0];
    Ok(PatternIndexSet::build(shape, PatternKind::V, |idx| {
        is_near_diagonal(idx, n1)
    }))
}

/// Zero pattern forcing only the neighbours of the first `count` diagonal
/// positions. With `count = 1` its zero set is the singular vector tuples
/// stored as the first columns.
pub fn pattern_leading(shape: &[usize], count: usize) -> Result<PatternIndexSet> {
    validate(shape, false)?;
    if count > shape.iter().copied().min().unwrap_or(0) {
        return Err(Error::InvalidArgument(format!(
            "{count} diagonal positions do not fit in shape {shape:?}"
        )));
    }
    Ok(PatternIndexSet::build(shape, PatternKind::V, |idx| {
        is_near_diagonal(idx, count)
    }))
}

/// Zero pattern of `V_sym = V ∩ S^d(R^n)`, stored on the full `n^d` array.
pub fn pattern_vsym(n: usize, d: usize) -> Result<PatternIndexSet> {
    let shape = vec![n; d];
    validate(&shape, true)?;
    Ok(PatternIndexSet::build(&shape, PatternKind::VSym, |idx| {
        is_near_diagonal(idx, n)
    }))
}

/// Allowed set of `V_diag`: the diagonal coordinates.
pub fn pattern_vdiag(shape: &[usize]) -> Result<PatternIndexSet> {
    validate(shape, false)?;
    Ok(PatternIndexSet::build(shape, PatternKind::VDiag, |idx| {
        !is_diagonal(idx)
    }))
}

/// Allowed set of `V^⊥`: exactly the near-diagonal coordinates.
pub fn pattern_vperp(shape: &[usize]) -> Result<PatternIndexSet> {
    validate(shape, true)?;
    let n1 = shape[0];
    Ok(PatternIndexSet::build(shape, PatternKind::VPerp, |idx| {
        !is_near_diagonal(idx, n1)
    }))
}

/// `Σ_k n_1 (n_k − 1)` subtracted from the ambient dimension; equals
/// `dim V` for `d ≥ 3`.
pub fn dim_v_formula(shape: &[usize]) -> usize {
    let n1 = shape[0];
    let total: usize = shape.iter().product();
    total.saturating_sub(shape.iter().map(|&n| n1 * (n - 1)).sum::<usize>())
}
