//! Singular vector tuple certificates, the binary `2×2×2` and `2×2×2×2`
//! enumerations, and the matrix `M_Q` governing `(Q·V) ∩ V`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::numerical_rank;
use crate::tensor::{contract_all, contract_all_but, DenseTensor};

/// Relative singular-value threshold used for every rank of `M_Q`.
pub const RANK_TOLERANCE: f64 = 1e-8;

/// Unit vectors `x^(1), …, x^(d)` with an optional singular value.
#[derive(Debug, Clone, PartialEq)]
pub struct SvTuple {
    pub vectors: Vec<DVector<f64>>,
    pub value: Option<f64>,
}

impl SvTuple {
    /// Normalizes every vector. Zero vectors are rejected.
    pub fn new(vectors: Vec<DVector<f64>>) -> Result<Self> {
        let vectors = vectors
            .into_iter()
            .enumerate()
            .map(|(k, v)| {
                let n = v.norm();
                if n == 0.0 || !n.is_finite() {
                    Err(Error::InvalidArgument(format!("vector {k} of the tuple has norm {n}")))
                } else {
                    Ok(v / n)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(SvTuple { vectors, value: None })
    }

    pub fn with_value(mut self, value: f64) -> Self {
        self.value = Some(value);
        self
    }

    pub fn order(&self) -> usize {
        self.vectors.len()
    }

    /// Equal up to the sign of each vector, within `tol` entrywise.
    pub fn same_direction(&self, other: &SvTuple, tol: f64) -> bool {
        self.vectors.len() == other.vectors.len()
            && self
                .vectors
                .iter()
                .zip(&other.vectors)
                .all(|(a, b)| a.len() == b.len() && ((a - b).amax() <= tol || (a + b).amax() <= tol))
    }

    /// Every pair of corresponding vectors is orthogonal within `tol`.
    pub fn orthogonal_to(&self, other: &SvTuple, tol: f64) -> bool {
        self.vectors.iter().zip(&other.vectors).all(|(a, b)| a.dot(b).abs() <= tol)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    /// Full contraction `T(x^(1), …, x^(d))`.
    pub value: f64,
    /// `max_k ‖T(x^(1), …, ·_k, …, x^(d)) − value·x^(k)‖`.
    pub residual: f64,
    /// Whether some input vector had to be rescaled to unit norm.
    pub normalized: bool,
}

pub fn svt_residual(t: &DenseTensor, vectors: &[DVector<f64>]) -> Result<Residual> {
    if vectors.len() != t.order() {
        return Err(Error::InvalidArgument(format!(
            "{} vectors for an order-{} tensor",
            vectors.len(),
            t.order()
        )));
    }
    let normalized = vectors.iter().any(|v| (v.norm() - 1.0).abs() > 1e-10);
    if normalized {
        log::warn!("tuple vectors are not unit norm; normalizing");
    }
    let tuple = SvTuple::new(vectors.to_vec())?;
    let xs = &tuple.vectors;
    let value = contract_all(t, xs)?;
    let mut residual: f64 = 0.0;
    for (k, x) in xs.iter().enumerate() {
        let partial = contract_all_but(t, xs, k)?;
        residual = residual.max((partial - x * value).norm());
    }
    Ok(Residual {
        value,
        residual,
        normalized,
    })
}

/// `λ_0 e_0^{⊗3} + λ_1 e_1^{⊗3}`.
pub fn odeco222(lambda0: f64, lambda1: f64) -> DenseTensor {
    let mut t = DenseTensor::zeros(&[2, 2, 2]).expect("valid shape");
    t.set(&[0, 0, 0], lambda0);
    t.set(&[1, 1, 1], lambda1);
    t
}

/// The six singular vector tuples, up to scaling, of
/// `λ_0 e_0^{⊗3} + λ_1 e_1^{⊗3}`, each normalized and carrying its value.
pub fn odeco222_tuples(lambda0: f64, lambda1: f64) -> Result<Vec<SvTuple>> {
    if lambda0 == 0.0 || lambda1 == 0.0 || !lambda0.is_finite() || !lambda1.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "both diagonal values must be nonzero and finite, got ({lambda0}, {lambda1})"
        )));
    }
    let v = |a: f64, b: f64| DVector::from_vec(vec![a, b]);
    let plus = v(lambda1, lambda0);
    let minus = v(lambda1, -lambda0);
    let raw = vec![
        vec![v(1.0, 0.0), v(1.0, 0.0), v(1.0, 0.0)],
        vec![v(0.0, 1.0), v(0.0, 1.0), v(0.0, 1.0)],
        vec![plus.clone(), plus.clone(), plus.clone()],
        vec![plus.clone(), minus.clone(), minus.clone()],
        vec![minus.clone(), plus.clone(), minus.clone()],
        vec![minus.clone(), minus, plus],
    ];
    let t = odeco222(lambda0, lambda1);
    raw.into_iter()
        .map(|vs| {
            let tuple = SvTuple::new(vs)?;
            let value = contract_all(&t, &tuple.vectors)?;
            Ok(tuple.with_value(value))
        })
        .collect()
}

/// Pairs `(i, j)`, `i < j`, of tuples that are orthogonal in every mode.
pub fn orthogonal_pairs(tuples: &[SvTuple], tol: f64) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..tuples.len() {
        for j in i + 1..tuples.len() {
            if tuples[i].orthogonal_to(&tuples[j], tol) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Exhaustive search for singular vector tuples of a `2×2×2` tensor.
///
/// The second and third vectors sweep a grid of angles in `[0, π)` with the
/// given pitch; the first vector is taken parallel to `T(·, v, w)`. Grid
/// cells that are local minima of the residual are refined by compass
/// search, and the distinct tuples with residual below `accept` are returned.
pub fn grid_search_222(t: &DenseTensor, pitch: f64, accept: f64) -> Result<Vec<SvTuple>> {
    if t.shape() != [2, 2, 2] {
        return Err(Error::InvalidShape {
            shape: t.shape().to_vec(),
            reason: "grid search covers 2×2×2 tensors only".into(),
        });
    }
    let steps = (std::f64::consts::PI / pitch).ceil() as usize;
    let h = std::f64::consts::PI / steps as f64;
    let data: [f64; 8] = t.as_slice().try_into().expect("eight entries");
    let eval = |a: f64, b: f64| residual_222(&data, a, b);

    let grid: Vec<f64> = (0..steps * steps)
        .map(|c| eval((c / steps) as f64 * h, (c % steps) as f64 * h))
        .collect();
    let at = |i: usize, j: usize| grid[(i % steps) * steps + (j % steps)];

    let mut found: Vec<SvTuple> = Vec::new();
    for i in 0..steps {
        for j in 0..steps {
            let r = at(i, j);
            let is_min = (0..3).all(|di| {
                (0..3).all(|dj| (di == 1 && dj == 1) || r <= at(i + steps + di - 1, j + steps + dj - 1))
            });
            if !is_min || r > 1e3 * h {
                continue;
            }
            let (a, b, res) = refine_222(&data, i as f64 * h, j as f64 * h);
            if res > accept {
                continue;
            }
            let (sa, ca) = a.sin_cos();
            let (sb, cb) = b.sin_cos();
            let v = DVector::from_vec(vec![ca, sa]);
            let w = DVector::from_vec(vec![cb, sb]);
            let u = contract_all_but(t, &[v.clone(), v.clone(), w.clone()], 0)?;
            let tuple = SvTuple::new(vec![u, v, w])?;
            if !found.iter().any(|f| f.same_direction(&tuple, 1e-6)) {
                let value = contract_all(t, &tuple.vectors)?;
                found.push(tuple.with_value(value));
            }
        }
    }
    Ok(found)
}

fn residual_222(t: &[f64; 8], a: f64, b: f64) -> f64 {
    residual_vec_222(t, a, b)
        .map(|r| r.chunks(2).map(|c| c[0].hypot(c[1])).fold(0.0, f64::max))
        .unwrap_or(f64::INFINITY)
}

/// Stacked `T(…, ·_k, …) − λ x^(k)` for `k = 0, 1, 2`.
fn residual_vec_222(t: &[f64; 8], a: f64, b: f64) -> Option<[f64; 6]> {
    let (v1, v0) = a.sin_cos();
    let (w1, w0) = b.sin_cos();
    let get = |i: usize, j: usize, k: usize| t[4 * i + 2 * j + k];
    let v = [v0, v1];
    let w = [w0, w1];
    let mut u = [0.0; 2];
    for (i, ui) in u.iter_mut().enumerate() {
        for j in 0..2 {
            for k in 0..2 {
                *ui += get(i, j, k) * v[j] * w[k];
            }
        }
    }
    let nu = u[0].hypot(u[1]);
    if nu == 0.0 {
        return None;
    }
    u = [u[0] / nu, u[1] / nu];
    let xs = [u, v, w];
    let mut lam = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                lam += get(i, j, k) * u[i] * v[j] * w[k];
            }
        }
    }
    let mut out = [0.0; 6];
    for mode in 0..3 {
        for c in 0..2 {
            let mut s = 0.0;
            for p in 0..2 {
                for q in 0..2 {
                    let idx = match mode {
                        0 => [c, p, q],
                        1 => [p, c, q],
                        _ => [p, q, c],
                    };
                    let coef: f64 = (0..3).filter(|&m| m != mode).map(|m| xs[m][idx[m]]).product();
                    s += get(idx[0], idx[1], idx[2]) * coef;
                }
            }
            out[2 * mode + c] = s - lam * xs[mode][c];
        }
    }
    Some(out)
}

/// Gauss-Newton on the residual vector with a finite-difference Jacobian.
fn refine_222(t: &[f64; 8], mut a: f64, mut b: f64) -> (f64, f64, f64) {
    let sq = |r: &[f64; 6]| r.iter().map(|x| x * x).sum::<f64>();
    for _ in 0..100 {
        let Some(r) = residual_vec_222(t, a, b) else { break };
        let f0 = sq(&r);
        if f0 < 1e-32 {
            break;
        }
        let eps = 1e-7;
        let (Some(ra), Some(rb)) = (residual_vec_222(t, a + eps, b), residual_vec_222(t, a, b + eps)) else {
            break;
        };
        let ja: Vec<f64> = (0..6).map(|i| (ra[i] - r[i]) / eps).collect();
        let jb: Vec<f64> = (0..6).map(|i| (rb[i] - r[i]) / eps).collect();
        let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(p, q)| p * q).sum::<f64>();
        let mut damping = 1e-12 * (dot(&ja, &ja) + dot(&jb, &jb));
        let (g0, g1) = (dot(&ja, &r), dot(&jb, &r));
        let mut improved = false;
        for _ in 0..40 {
            let (m00, m01, m11) = (dot(&ja, &ja) + damping, dot(&ja, &jb), dot(&jb, &jb) + damping);
            let det = m00 * m11 - m01 * m01;
            if det.abs() > 0.0 {
                let da = -(m11 * g0 - m01 * g1) / det;
                let db = -(m00 * g1 - m01 * g0) / det;
                if let Some(rn) = residual_vec_222(t, a + da, b + db) {
                    if sq(&rn) < f0 {
                        a += da;
                        b += db;
                        improved = true;
                        break;
                    }
                }
            }
            damping = (damping * 10.0).max(1e-16);
        }
        if !improved {
            break;
        }
    }
    (a, b, residual_222(t, a, b))
}

/// Bases of a `2×2×2×2` tensor obtained from `{x_0, x_1}` by exchanging the
/// labels of two complementary pairs of modes. The input basis comes first.
pub fn four_bases(basis: &[SvTuple; 2]) -> Result<[[SvTuple; 2]; 4]> {
    for tuple in basis {
        if tuple.order() != 4 || tuple.vectors.iter().any(|v| v.len() != 2) {
            return Err(Error::InvalidArgument("four_bases needs tuples of four vectors in R^2".into()));
        }
    }
    for k in 0..4 {
        if basis[0].vectors[k].dot(&basis[1].vectors[k]).abs() > 1e-10 {
            return Err(Error::NotOrthogonalTuples { mode: k });
        }
    }
    let pick = |labels: [usize; 4]| SvTuple {
        vectors: (0..4).map(|k| basis[labels[k]].vectors[k].clone()).collect(),
        value: None,
    };
    let swapped = |labels: [usize; 4]| [pick(labels), pick(labels.map(|l| 1 - l))];
    Ok([
        [basis[0].clone(), basis[1].clone()],
        swapped([0, 0, 1, 1]),
        swapped([0, 1, 0, 1]),
        swapped([0, 1, 1, 0]),
    ])
}

/// Whether two bases consist of the same tuples up to order and signs.
pub fn same_basis(a: &[SvTuple; 2], b: &[SvTuple; 2], tol: f64) -> bool {
    (a[0].same_direction(&b[0], tol) && a[1].same_direction(&b[1], tol))
        || (a[0].same_direction(&b[1], tol) && a[1].same_direction(&b[0], tol))
}

/// The candidate bases `{(e_{i_k})_k, (e_{1−i_k})_k}` of a binary tensor,
/// one for each string `i` with `i_1 = 0`.
pub fn binary_label_bases(d: usize) -> Vec<(Vec<u8>, [SvTuple; 2])> {
    let e = |b: u8| {
        let mut v = DVector::zeros(2);
        v[b as usize] = 1.0;
        v
    };
    (0..1usize << (d - 1))
        .map(|m| {
            let bits: Vec<u8> = (0..d).map(|k| ((m >> (d - 1 - k)) & 1) as u8).collect();
            let first = SvTuple {
                vectors: bits.iter().map(|&b| e(b)).collect(),
                value: None,
            };
            let second = SvTuple {
                vectors: bits.iter().map(|&b| e(1 - b)).collect(),
                value: None,
            };
            (bits, [first, second])
        })
        .collect()
}

/// Binary string of `i` with `d` digits, most significant first.
pub fn bits(i: usize, d: usize) -> Vec<u8> {
    (0..d).map(|k| ((i >> (d - 1 - k)) & 1) as u8).collect()
}

pub fn render_bits(b: &[u8]) -> String {
    b.iter().map(|&x| char::from(b'0' + x)).collect()
}

fn weight(i: usize) -> usize {
    i.count_ones() as usize
}

/// `M_Q`: rows are binary strings of weight outside `{1, d−1}`, columns the
/// strings of weight in `{1, d−1}`, both in increasing numeric order.
#[derive(Debug, Clone, PartialEq)]
pub struct MqMatrix {
    pub order: usize,
    pub rows: Vec<usize>,
    pub cols: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

impl MqMatrix {
    pub fn rank(&self) -> usize {
        numerical_rank(&self.matrix, RANK_TOLERANCE)
    }

    pub fn row_labels(&self) -> Vec<String> {
        self.rows.iter().map(|&i| render_bits(&bits(i, self.order))).collect()
    }

    pub fn col_labels(&self) -> Vec<String> {
        self.cols.iter().map(|&i| render_bits(&bits(i, self.order))).collect()
    }
}

fn check_binary(q: &[DMatrix<f64>]) -> Result<()> {
    if q.len() < 2 {
        return Err(Error::InvalidArgument("M_Q needs at least two modes".into()));
    }
    for (k, m) in q.iter().enumerate() {
        if m.nrows() != 2 || m.ncols() != 2 {
            return Err(Error::ModeMismatch {
                mode: k,
                expected: 2,
                found: m.nrows().max(m.ncols()),
            });
        }
    }
    Ok(())
}

pub fn build_mq(q: &[DMatrix<f64>]) -> Result<MqMatrix> {
    check_binary(q)?;
    let d = q.len();
    let near = |i: usize| {
        let w = weight(i);
        w == 1 || w == d - 1
    };
    let rows: Vec<usize> = (0..1usize << d).filter(|&i| !near(i)).collect();
    let cols: Vec<usize> = (0..1usize << d).filter(|&i| near(i)).collect();
    let matrix = DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
        let (i, j) = (bits(rows[r], d), bits(cols[c], d));
        (0..d).map(|k| q[k][(i[k] as usize, j[k] as usize)]).product()
    });
    Ok(MqMatrix {
        order: d,
        rows,
        cols,
        matrix,
    })
}

pub fn rank_mq(m: &MqMatrix) -> usize {
    m.rank()
}

/// `i(Q)`: `0` where `Q_k` is a signed diagonal matrix and `1` where it is a
/// signed anti-diagonal matrix.
pub fn i_q(q: &[DMatrix<f64>]) -> Result<Vec<u8>> {
    check_binary(q)?;
    let unit = |x: f64| (x.abs() - 1.0).abs() <= 1e-12;
    let zero = |x: f64| x.abs() <= 1e-12;
    q.iter()
        .enumerate()
        .map(|(k, m)| {
            if unit(m[(0, 0)]) && unit(m[(1, 1)]) && zero(m[(0, 1)]) && zero(m[(1, 0)]) {
                Ok(0)
            } else if zero(m[(0, 0)]) && zero(m[(1, 1)]) && unit(m[(0, 1)]) && unit(m[(1, 0)]) {
                Ok(1)
            } else {
                Err(Error::NotSignedPermutation { mode: k })
            }
        })
        .collect()
}

/// Rank of `M_Q` predicted from `|i(Q)|` for `Q` in the signed permutations.
pub fn expected_rank(d: usize, w: usize) -> usize {
    if d == 4 {
        if w % 2 == 0 {
            0
        } else {
            2 * d
        }
    } else if w == 0 || w == d {
        0
    } else if w == 2 || w + 2 == d {
        2 * d - 4
    } else {
        2 * d
    }
}

/// Reduced matrix for `Q` acting on every mode of a symmetric tensor: one row
/// of `M_(Q,…,Q)` per weight in `{0, 2, …, d−2, d}` with the columns of
/// equal weight summed. Columns are weights `1` and `d − 1`.
pub fn reduced_sym_mq(q: &DMatrix<f64>, d: usize) -> Result<DMatrix<f64>> {
    if d < 3 {
        return Err(Error::InvalidArgument(format!("order {d} < 3")));
    }
    let mq = build_mq(&vec![q.clone(); d])?;
    let weights: Vec<usize> = (0..=d).filter(|&w| w != 1 && w != d - 1).collect();
    let mut out = DMatrix::zeros(weights.len(), 2);
    for (r, &w) in weights.iter().enumerate() {
        let row = mq.rows.iter().position(|&i| weight(i) == w).expect("every weight occurs");
        for (c, &j) in mq.cols.iter().enumerate() {
            let col = if weight(j) == 1 { 0 } else { 1 };
            out[(r, col)] += mq.matrix[(row, c)];
        }
    }
    Ok(out)
}

/// The eight matrices `±(1/√2)·[[±1, ±1], [±1, ±1]]` that are orthogonal.
pub fn hadamard_type() -> Vec<DMatrix<f64>> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let base = [
        [1.0, 1.0, 1.0, -1.0],
        [1.0, 1.0, -1.0, 1.0],
        [-1.0, 1.0, 1.0, 1.0],
        [1.0, -1.0, 1.0, 1.0],
    ];
    let mut out = Vec::new();
    for b in base {
        for sign in [1.0, -1.0] {
            out.push(DMatrix::from_row_slice(2, 2, &b.map(|x| sign * s * x)));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodimRow {
    pub pattern: Vec<u8>,
    pub expected: usize,
    pub measured: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SymCodimRow {
    pub matrix: DMatrix<f64>,
    pub expected: usize,
    pub measured: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CodimReport {
    pub order: usize,
    pub rows: Vec<CodimRow>,
    pub symmetric: Vec<SymCodimRow>,
}

impl CodimReport {
    pub fn all_match(&self) -> bool {
        self.rows.iter().all(|r| r.expected == r.measured) && self.symmetric.iter().all(|r| r.expected == r.measured)
    }

    /// `(weight, expected, measured ranks seen)` per weight class.
    pub fn by_weight(&self) -> Vec<(usize, usize, Vec<usize>)> {
        let mut out: Vec<(usize, usize, Vec<usize>)> = (0..=self.order)
            .map(|w| (w, expected_rank(self.order, w), Vec::new()))
            .collect();
        for r in &self.rows {
            let w = r.pattern.iter().filter(|&&b| b == 1).count();
            if !out[w].2.contains(&r.measured) {
                out[w].2.push(r.measured);
            }
        }
        out
    }
}

/// Ranks of `M_Q` for every `Q ∈ {±I, ±P}^d` indexed by its pattern `i(Q)`,
/// alternating signs across modes, against the predicted table; plus the
/// reduced symmetric rank for the eight Hadamard-type matrices.
pub fn codim_table_check(d: usize) -> Result<CodimReport> {
    if !(4..=8).contains(&d) {
        return Err(Error::InvalidArgument(format!("codim table covers 4 <= d <= 8, got {d}")));
    }
    let id = DMatrix::<f64>::identity(2, 2);
    let swap = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
    let mut rows = Vec::with_capacity(1 << d);
    for m in 0..1usize << d {
        let pattern = bits(m, d);
        let q: Vec<DMatrix<f64>> = pattern
            .iter()
            .enumerate()
            .map(|(k, &b)| {
                let base = if b == 1 { &swap } else { &id };
                if k % 2 == 1 {
                    -base
                } else {
                    base.clone()
                }
            })
            .collect();
        debug_assert_eq!(i_q(&q)?, pattern);
        let w = weight(m);
        rows.push(CodimRow {
            expected: expected_rank(d, w),
            measured: build_mq(&q)?.rank(),
            pattern,
        });
    }
    let symmetric = hadamard_type()
        .into_iter()
        .map(|q| {
            let measured = numerical_rank(&reduced_sym_mq(&q, d)?, RANK_TOLERANCE);
            let expected = if d == 4 || d == 6 { 1 } else { 2 };
            Ok(SymCodimRow {
                matrix: q,
                expected,
                measured,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CodimReport { order: d, rows, symmetric })
}
