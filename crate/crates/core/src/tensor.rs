//! Dense d-way tensors, the multilinear change of basis and symmetric tensors.
//!
//! Storage is row-major with the last index varying fastest. Modes are
//! addressed 0-based throughout the library.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Numerical slack used wherever exact algebra meets floating point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    /// Bound on `max |QᵀQ − I|` for a matrix to count as orthogonal.
    pub orthogonality: f64,
    /// Absolute bound on `|T_i − T_σ(i)|` for a tensor to count as symmetric.
    pub symmetry: f64,
    /// Generic entrywise equality slack.
    pub equality: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            orthogonality: 1e-10,
            symmetry: 1e-12,
            equality: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

fn check_shape(shape: &[usize]) -> Result<()> {
    if shape.len() < 2 {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: "order must be at least 2".into(),
        });
    }
    if shape.iter().any(|&n| n == 0) {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: "every mode needs at least one index".into(),
        });
    }
    Ok(())
}

impl DenseTensor {
    pub fn new(shape: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        check_shape(&shape)?;
        let expected: usize = shape.iter().product();
        if data.len() != expected {
            return Err(Error::ValueCount {
                expected,
                found: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                index: unravel(pos, &shape),
            });
        }
        Ok(DenseTensor { shape, data })
    }

    pub fn zeros(shape: &[usize]) -> Result<Self> {
        check_shape(shape)?;
        Ok(DenseTensor {
            shape: shape.to_vec(),
            data: vec![0.0; shape.iter().product()],
        })
    }

    pub fn from_fn(shape: &[usize], mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let mut t = Self::zeros(shape)?;
        for (pos, idx) in MultiIndex::new(shape).enumerate() {
            t.data[pos] = f(&idx);
        }
        Ok(t)
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn order(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn offset(&self, index: &[usize]) -> usize {
        ravel(index, &self.shape)
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let pos = self.offset(index);
        self.data[pos] = value;
    }

    /// Iterator over all multi-indices in storage order.
    pub fn indices(&self) -> MultiIndex {
        MultiIndex::new(&self.shape)
    }

    fn same_shape(&self, other: &DenseTensor) -> Result<()> {
        if self.shape != other.shape {
            return Err(Error::ShapeMismatch {
                left: self.shape.clone(),
                right: other.shape.clone(),
            });
        }
        Ok(())
    }

    pub fn inner(&self, other: &DenseTensor) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn sub(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.same_shape(other)?;
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn add(&self, other: &DenseTensor) -> Result<DenseTensor> {
        self.same_shape(other)?;
        Ok(DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn scale(&self, c: f64) -> DenseTensor {
        DenseTensor {
            shape: self.shape.clone(),
            data: self.data.iter().map(|v| c * v).collect(),
        }
    }

    pub fn max_abs_diff(&self, other: &DenseTensor) -> Result<f64> {
        self.same_shape(other)?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }
}

pub(crate) fn ravel(index: &[usize], shape: &[usize]) -> usize {
    debug_assert_eq!(index.len(), shape.len());
    index
        .iter()
        .zip(shape)
        .fold(0, |acc, (&i, &n)| {
            debug_assert!(i < n);
            acc * n + i
        })
}

pub(crate) fn unravel(mut pos: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        idx[k] = pos % shape[k];
        pos /= shape[k];
    }
    idx
}

/// Row-major multi-index enumeration.
#[derive(Debug, Clone)]
pub struct MultiIndex {
    shape: Vec<usize>,
    next: Option<Vec<usize>>,
}

impl MultiIndex {
    pub fn new(shape: &[usize]) -> Self {
        let next = if shape.iter().all(|&n| n > 0) {
            Some(vec![0; shape.len()])
        } else {
            None
        };
        MultiIndex {
            shape: shape.to_vec(),
            next,
        }
    }
}

impl Iterator for MultiIndex {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        let mut k = succ.len();
        loop {
            if k == 0 {
                break;
            }
            k -= 1;
            succ[k] += 1;
            if succ[k] < self.shape[k] {
                self.next = Some(succ);
                break;
            }
            succ[k] = 0;
        }
        Some(current)
    }
}

/// Mode-`mode` product: replaces index `j` of that mode by `Σ_j m[i, j] T[.., j, ..]`.
pub fn mode_product(t: &DenseTensor, mode: usize, m: &DMatrix<f64>) -> Result<DenseTensor> {
    let d = t.order();
    if mode >= d {
        return Err(Error::ModeOutOfRange { mode, order: d });
    }
    let n = t.shape[mode];
    if m.ncols() != n {
        return Err(Error::ModeMismatch {
            mode,
            expected: n,
            found: m.ncols(),
        });
    }
    let outer: usize = t.shape[..mode].iter().product();
    let inner: usize = t.shape[mode + 1..].iter().product();
    let rows = m.nrows();
    let mut shape = t.shape.clone();
    shape[mode] = rows;
    let mut out = vec![0.0; outer * rows * inner];
    for o in 0..outer {
        let src = &t.data[o * n * inner..(o + 1) * n * inner];
        let dst = &mut out[o * rows * inner..(o + 1) * rows * inner];
        for i in 0..rows {
            let row = &mut dst[i * inner..(i + 1) * inner];
            for j in 0..n {
                let c = m[(i, j)];
                if c == 0.0 {
                    continue;
                }
                let col = &src[j * inner..(j + 1) * inner];
                for (r, s) in row.iter_mut().zip(col) {
                    *r += c * s;
                }
            }
        }
    }
    Ok(DenseTensor { shape, data: out })
}

/// `(Q_1, …, Q_d)·T` computed as successive mode products. The matrices may
/// be rectangular (`m_k × n_k`).
pub fn group_action(mats: &[DMatrix<f64>], t: &DenseTensor) -> Result<DenseTensor> {
    if mats.len() != t.order() {
        return Err(Error::InvalidArgument(format!(
            "{} matrices supplied for an order-{} tensor",
            mats.len(),
            t.order()
        )));
    }
    for (k, m) in mats.iter().enumerate() {
        if m.ncols() != t.shape[k] {
            return Err(Error::ModeMismatch {
                mode: k,
                expected: t.shape[k],
                found: m.ncols(),
            });
        }
    }
    let mut out = t.clone();
    for (k, m) in mats.iter().enumerate() {
        out = mode_product(&out, k, m)?;
    }
    Ok(out)
}

/// Principal flattening: rows indexed by `i_mode`, columns by the remaining
/// indices in row-major order.
pub fn flatten(t: &DenseTensor, mode: usize) -> Result<DMatrix<f64>> {
    let d = t.order();
    if mode >= d {
        return Err(Error::ModeOutOfRange { mode, order: d });
    }
    let n = t.shape[mode];
    let outer: usize = t.shape[..mode].iter().product();
    let inner: usize = t.shape[mode + 1..].iter().product();
    let mut m = DMatrix::zeros(n, outer * inner);
    for o in 0..outer {
        for i in 0..n {
            for r in 0..inner {
                m[(i, o * inner + r)] = t.data[(o * n + i) * inner + r];
            }
        }
    }
    Ok(m)
}

pub fn unflatten(m: &DMatrix<f64>, shape: &[usize], mode: usize) -> Result<DenseTensor> {
    check_shape(shape)?;
    if mode >= shape.len() {
        return Err(Error::ModeOutOfRange {
            mode,
            order: shape.len(),
        });
    }
    let n = shape[mode];
    let outer: usize = shape[..mode].iter().product();
    let inner: usize = shape[mode + 1..].iter().product();
    if m.nrows() != n || m.ncols() != outer * inner {
        return Err(Error::InvalidArgument(format!(
            "a {}x{} matrix cannot be folded into shape {:?} along mode {}",
            m.nrows(),
            m.ncols(),
            shape,
            mode
        )));
    }
    let mut data = vec![0.0; n * outer * inner];
    for o in 0..outer {
        for i in 0..n {
            for r in 0..inner {
                data[(o * n + i) * inner + r] = m[(i, o * inner + r)];
            }
        }
    }
    DenseTensor::new(shape.to_vec(), data)
}

/// `x⁽¹⁾ ⊗ ⋯ ⊗ x⁽ᵈ⁾`.
pub fn rank_one(vectors: &[DVector<f64>]) -> Result<DenseTensor> {
    let shape: Vec<usize> = vectors.iter().map(|v| v.len()).collect();
    DenseTensor::from_fn(&shape, |idx| {
        idx.iter()
            .zip(vectors)
            .map(|(&i, v)| v[i])
            .product::<f64>()
    })
}

/// Contracts `t` with `vectors[k]` in every mode except `mode`.
pub fn contract_all_but(t: &DenseTensor, vectors: &[DVector<f64>], mode: usize) -> Result<DVector<f64>> {
    let d = t.order();
    if mode >= d {
        return Err(Error::ModeOutOfRange { mode, order: d });
    }
    if vectors.len() != d {
        return Err(Error::InvalidArgument(format!(
            "{} vectors supplied for an order-{} tensor",
            vectors.len(),
            d
        )));
    }
    for (k, v) in vectors.iter().enumerate() {
        if v.len() != t.shape[k] {
            return Err(Error::ModeMismatch {
                mode: k,
                expected: t.shape[k],
                found: v.len(),
            });
        }
    }
    let mut out = vec![0.0; t.shape[mode]];
    for (pos, idx) in t.indices().enumerate() {
        let mut w = t.data[pos];
        if w == 0.0 {
            continue;
        }
        for (k, &i) in idx.iter().enumerate() {
            if k != mode {
                w *= vectors[k][i];
            }
        }
        out[idx[mode]] += w;
    }
    Ok(DVector::from_vec(out))
}

/// Full contraction `T(x⁽¹⁾, …, x⁽ᵈ⁾)`.
pub fn contract_all(t: &DenseTensor, vectors: &[DVector<f64>]) -> Result<f64> {
    let last = t.order() - 1;
    let partial = contract_all_but(t, vectors, last)?;
    Ok(partial.dot(&vectors[last]))
}

fn orthogonality_defect(q: &DMatrix<f64>) -> f64 {
    let g = q.transpose() * q;
    let mut worst: f64 = 0.0;
    for i in 0..g.nrows() {
        for j in 0..g.ncols() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((g[(i, j)] - target).abs());
        }
    }
    worst
}

/// A tuple `(Q_1, …, Q_d)` of square orthogonal matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthTuple {
    mats: Vec<DMatrix<f64>>,
}

impl OrthTuple {
    pub fn new(mats: Vec<DMatrix<f64>>, tol: &Tolerances) -> Result<Self> {
        Self::with_tolerance(mats, tol.orthogonality)
    }

    pub fn with_tolerance(mats: Vec<DMatrix<f64>>, tol: f64) -> Result<Self> {
        for (k, q) in mats.iter().enumerate() {
            if !q.is_square() {
                return Err(Error::InvalidArgument(format!(
                    "matrix {} is {}x{}, expected square",
                    k,
                    q.nrows(),
                    q.ncols()
                )));
            }
            let defect = orthogonality_defect(q);
            if !(defect <= tol) {
                return Err(Error::NotOrthogonal { mode: k, defect });
            }
        }
        Ok(OrthTuple { mats })
    }

    /// Wraps matrices without the orthogonality check.
    pub fn from_matrices_unchecked(mats: Vec<DMatrix<f64>>) -> Self {
        OrthTuple { mats }
    }

    pub fn identity(sizes: &[usize]) -> Self {
        OrthTuple {
            mats: sizes.iter().map(|&n| DMatrix::identity(n, n)).collect(),
        }
    }

    /// The symmetric action uses a single matrix in every mode.
    pub fn replicated(q: &DMatrix<f64>, order: usize) -> Self {
        OrthTuple {
            mats: vec![q.clone(); order],
        }
    }

    pub fn matrices(&self) -> &[DMatrix<f64>] {
        &self.mats
    }

    pub fn into_matrices(self) -> Vec<DMatrix<f64>> {
        self.mats
    }

    pub fn order(&self) -> usize {
        self.mats.len()
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.mats.iter().map(|q| q.nrows()).collect()
    }

    pub fn transpose(&self) -> OrthTuple {
        OrthTuple {
            mats: self.mats.iter().map(|q| q.transpose()).collect(),
        }
    }

    /// Entrywise product `(Q_1 P_1, …, Q_d P_d)`.
    pub fn compose(&self, other: &OrthTuple) -> Result<OrthTuple> {
        if self.order() != other.order() {
            return Err(Error::InvalidArgument("tuples of different length".into()));
        }
        Ok(OrthTuple {
            mats: self.mats.iter().zip(&other.mats).map(|(a, b)| a * b).collect(),
        })
    }

    pub fn act(&self, t: &DenseTensor) -> Result<DenseTensor> {
        group_action(&self.mats, t)
    }

    pub fn max_orthogonality_defect(&self) -> f64 {
        self.mats.iter().map(orthogonality_defect).fold(0.0, f64::max)
    }
}

/// A tensor in `S^d(R^n)` stored densely.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTensor {
    tensor: DenseTensor,
}

fn permutations(d: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; d], &mut out);
    out
}

impl SymTensor {
    /// Validates symmetry: every permutation for order ≤ 4, 200 random
    /// (index, permutation) probes above that.
    pub fn new(tensor: DenseTensor, tol: &Tolerances) -> Result<Self> {
        let n = tensor.shape[0];
        if tensor.shape.iter().any(|&m| m != n) {
            return Err(Error::InvalidShape {
                shape: tensor.shape.clone(),
                reason: "a symmetric tensor needs equal dimensions".into(),
            });
        }
        let d = tensor.order();
        let check = |idx: &[usize], perm: &[usize]| -> Result<()> {
            let permuted: Vec<usize> = perm.iter().map(|&p| idx[p]).collect();
            let deviation = (tensor.get(idx) - tensor.get(&permuted)).abs();
            if deviation > tol.symmetry {
                return Err(Error::NotSymmetric {
                    index: idx.to_vec(),
                    deviation,
                });
            }
            Ok(())
        };
        if d <= 4 {
            let perms = permutations(d);
            for idx in tensor.indices() {
                for perm in &perms {
                    check(&idx, perm)?;
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
            let mut perm: Vec<usize> = (0..d).collect();
            for _ in 0..200 {
                let idx: Vec<usize> = (0..d).map(|_| rng.random_range(0..n)).collect();
                perm.shuffle(&mut rng);
                check(&idx, &perm)?;
            }
        }
        Ok(SymTensor { tensor })
    }

    /// Orthogonal projection onto `S^d(R^n)`: averages each orbit of
    /// permuted coordinates.
    pub fn symmetrize(tensor: &DenseTensor) -> Result<Self> {
        let n = tensor.shape[0];
        if tensor.shape.iter().any(|&m| m != n) {
            return Err(Error::InvalidShape {
                shape: tensor.shape.clone(),
                reason: "a symmetric tensor needs equal dimensions".into(),
            });
        }
        let mut sums: HashMap<Vec<usize>, (f64, usize)> = HashMap::new();
        for (pos, idx) in tensor.indices().enumerate() {
            let mut key = idx;
            key.sort_unstable();
            let e = sums.entry(key).or_insert((0.0, 0));
            e.0 += tensor.data[pos];
            e.1 += 1;
        }
        let out = DenseTensor::from_fn(&tensor.shape, |idx| {
            let mut key = idx.to_vec();
            key.sort_unstable();
            let (s, c) = sums[&key];
            s / c as f64
        })?;
        Ok(SymTensor { tensor: out })
    }

    pub fn dim(&self) -> usize {
        self.tensor.shape[0]
    }

    pub fn order(&self) -> usize {
        self.tensor.order()
    }

    pub fn as_dense(&self) -> &DenseTensor {
        &self.tensor
    }

    pub fn into_dense(self) -> DenseTensor {
        self.tensor
    }
}

/// `Q • T = (Q, …, Q)·T`.
pub fn sym_action(q: &DMatrix<f64>, t: &SymTensor, tol: &Tolerances) -> Result<SymTensor> {
    let n = t.dim();
    if q.nrows() != n || q.ncols() != n {
        return Err(Error::ModeMismatch {
            mode: 0,
            expected: n,
            found: q.ncols(),
        });
    }
    let mats = vec![q.clone(); t.order()];
    let out = group_action(&mats, t.as_dense())?;
    let scale = out.max_abs().max(1.0);
    let local = Tolerances {
        symmetry: tol.symmetry * scale * 1e3,
        ..*tol
    };
    SymTensor::new(out, &local).map_err(|e| Error::Consistency(format!("symmetric action lost symmetry: {e}")))
}
