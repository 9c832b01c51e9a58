//! Implicit equation of the closure of the binary symmetric set
//! `SO(2)•V_sym ⊂ S^d(R²)` and dimension checks by Jacobian rank.
//!
//! Membership is the quotient `Res_z(F(z), z^d F(−1/z)) / (F(i)F(−i))` of a
//! Sylvester resultant, evaluated either over exact rationals or in `f64`.

use std::fmt::Debug;
use std::ops::Neg;

use nalgebra::DMatrix;
use num::bigint::BigInt;
use num::traits::{Num, One, Signed, ToPrimitive, Zero};
use num::BigRational;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::numerical_rank;
use crate::pattern::{pattern_v, pattern_vsym};
use crate::random::{gaussian_tensor, haar_orthogonal};
use crate::tensor::{group_action, DenseTensor, SymTensor, Tolerances};

/// Default cap on arithmetic operations for one resultant.
pub const DEFAULT_BUDGET: usize = 10_000_000;

/// Threshold on the scale-normalized value for the floating verdict.
pub const MEMBERSHIP_TOLERANCE: f64 = 1e-8;

/// Scalars the polynomial routines run over.
pub trait Coeff: Num + Clone + Neg<Output = Self> + Debug {
    fn from_int(i: i64) -> Self;
    /// Magnitude used to choose elimination pivots.
    fn pivot_size(&self) -> f64;
    fn to_f64(&self) -> f64;
}

impl Coeff for f64 {
    fn from_int(i: i64) -> Self {
        i as f64
    }
    fn pivot_size(&self) -> f64 {
        self.abs()
    }
    fn to_f64(&self) -> f64 {
        *self
    }
}

impl Coeff for BigRational {
    fn from_int(i: i64) -> Self {
        BigRational::from_integer(BigInt::from(i))
    }
    fn pivot_size(&self) -> f64 {
        if self.is_zero() {
            0.0
        } else {
            1.0
        }
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
}

fn binomial(n: usize, k: usize) -> i64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1i64, |acc, i| acc * (n - i) as i64 / (i + 1) as i64)
}

/// Coefficients in ascending order. The vector length fixes the formal
/// degree, which may exceed the actual degree after cancellation.
#[derive(Debug, Clone, PartialEq)]
pub struct UniPoly<C> {
    pub coeffs: Vec<C>,
}

impl<C: Coeff> UniPoly<C> {
    pub fn new(coeffs: Vec<C>) -> Self {
        UniPoly { coeffs }
    }

    pub fn formal_degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    /// Coefficient of the formal leading term.
    pub fn leading(&self) -> C {
        self.coeffs.last().cloned().unwrap_or_else(C::zero)
    }

    /// Actual degree, `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    pub fn eval(&self, z: &C) -> C {
        self.coeffs
            .iter()
            .rev()
            .fold(C::zero(), |acc, c| acc * z.clone() + c.clone())
    }

    /// `|f(i)|² = f(i) f(−i)` for real coefficients.
    pub fn abs_sq_at_i(&self) -> C {
        let mut re = C::zero();
        let mut im = C::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            let term = if (k / 2) % 2 == 0 { c.clone() } else { -c.clone() };
            if k % 2 == 0 {
                re = re + term;
            } else {
                im = im + term;
            }
        }
        re.clone() * re + im.clone() * im
    }
}

/// `F(z) = Σ_k ((k+1)C(d,k+1) t_{k+1} − (d−k+1)C(d,k−1) t_{k−1}) z^k`.
pub fn f_poly<C: Coeff>(t: &[C]) -> Result<UniPoly<C>> {
    let d = check_order(t.len())?;
    let at = |k: isize| -> C {
        if k < 0 || k as usize > d {
            C::zero()
        } else {
            t[k as usize].clone()
        }
    };
    let coeffs = (0..=d)
        .map(|k| {
            let up = if k < d { (k as i64 + 1) * binomial(d, k + 1) } else { 0 };
            let down = if k > 0 { (d - k + 1) as i64 * binomial(d, k - 1) } else { 0 };
            C::from_int(up) * at(k as isize + 1) - C::from_int(down) * at(k as isize - 1)
        })
        .collect();
    Ok(UniPoly::new(coeffs))
}

fn check_order(len: usize) -> Result<usize> {
    if len < 4 {
        return Err(Error::InvalidArgument(format!(
            "binary symmetric coordinates need order d >= 3, got {} values",
            len
        )));
    }
    Ok(len - 1)
}

/// `z^d f(−1/z)`: coefficient `k` is `(−1)^{d−k}` times coefficient `d − k` of `f`.
pub fn reversal<C: Coeff>(f: &UniPoly<C>, d: usize) -> Result<UniPoly<C>> {
    if f.formal_degree() > d {
        return Err(Error::InvalidArgument(format!(
            "polynomial of formal degree {} reversed at degree {d}",
            f.formal_degree()
        )));
    }
    let coeffs = (0..=d)
        .map(|k| {
            let c = f.coeffs.get(d - k).cloned().unwrap_or_else(C::zero);
            if (d - k) % 2 == 0 {
                c
            } else {
                -c
            }
        })
        .collect();
    Ok(UniPoly::new(coeffs))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Resultant<C> {
    pub value: C,
    /// Both inputs were zero.
    pub degenerate: bool,
}

/// Determinant of the Sylvester matrix built from the formal degrees.
///
/// Elimination counts one operation per multiply-subtract and stops with
/// [`Error::BudgetExhausted`] once `budget` is reached.
pub fn sylvester_resultant<C: Coeff>(f: &UniPoly<C>, g: &UniPoly<C>, budget: usize) -> Result<Resultant<C>> {
    if f.is_zero() && g.is_zero() {
        return Ok(Resultant {
            value: C::zero(),
            degenerate: true,
        });
    }
    let (m, n) = (f.formal_degree(), g.formal_degree());
    let size = m + n;
    if size == 0 {
        return Ok(Resultant {
            value: C::one(),
            degenerate: false,
        });
    }
    let mut a = vec![vec![C::zero(); size]; size];
    for r in 0..n {
        for (k, c) in f.coeffs.iter().rev().enumerate() {
            a[r][r + k] = c.clone();
        }
    }
    for r in 0..m {
        for (k, c) in g.coeffs.iter().rev().enumerate() {
            a[n + r][r + k] = c.clone();
        }
    }
    Ok(Resultant {
        value: determinant(a, budget)?,
        degenerate: false,
    })
}

fn determinant<C: Coeff>(mut a: Vec<Vec<C>>, budget: usize) -> Result<C> {
    let size = a.len();
    let mut ops = 0usize;
    let mut det = C::one();
    for col in 0..size {
        let pivot = (col..size)
            .max_by(|&x, &y| a[x][col].pivot_size().total_cmp(&a[y][col].pivot_size()))
            .expect("non-empty range");
        if a[pivot][col].is_zero() {
            return Ok(C::zero());
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        let p = a[col][col].clone();
        det = det * p.clone();
        for r in col + 1..size {
            if a[r][col].is_zero() {
                continue;
            }
            let factor = a[r][col].clone() / p.clone();
            for c in col..size {
                let delta = factor.clone() * a[col][c].clone();
                a[r][c] = a[r][c].clone() - delta;
            }
            ops += size - col;
            if ops > budget {
                return Err(Error::BudgetExhausted(budget));
            }
        }
    }
    Ok(det)
}

/// Coordinates `t_0, …, t_d` of a tensor in `S^d(R²)` with `T_i = t_{|i|}`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinarySymCoords {
    pub t: Vec<f64>,
}

impl BinarySymCoords {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        check_order(t.len())?;
        Ok(BinarySymCoords { t })
    }

    pub fn order(&self) -> usize {
        self.t.len() - 1
    }

    pub fn from_sym(s: &SymTensor) -> Result<Self> {
        if s.dim() != 2 {
            return Err(Error::InvalidShape {
                shape: s.as_dense().shape().to_vec(),
                reason: "binary coordinates need dimension 2".into(),
            });
        }
        let d = s.order();
        let t = (0..=d)
            .map(|k| {
                let idx: Vec<usize> = (0..d).map(|j| usize::from(j >= d - k)).collect();
                s.as_dense().get(&idx)
            })
            .collect();
        BinarySymCoords::new(t)
    }

    pub fn to_sym(&self) -> SymTensor {
        let d = self.order();
        let dense = DenseTensor::from_fn(&vec![2; d], |i| self.t[i.iter().sum::<usize>()]).expect("valid shape");
        SymTensor::new(dense, &Tolerances::default()).expect("symmetric by construction")
    }

    /// `‖T‖² = Σ_k C(d,k) t_k²`.
    pub fn norm_sq(&self) -> f64 {
        let d = self.order();
        self.t
            .iter()
            .enumerate()
            .map(|(k, x)| binomial(d, k) as f64 * x * x)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Membership<C> {
    /// `Res / (F(i)F(−i))`, zero when a flag is raised.
    pub value: C,
    pub resultant: C,
    pub denominator: C,
    /// `F` vanishes identically.
    pub zero_polynomial: bool,
    /// `F(i)F(−i) = 0` with a nonzero resultant.
    pub special_locus: bool,
}

pub fn membership_value<C: Coeff>(t: &[C], budget: usize) -> Result<Membership<C>> {
    let d = check_order(t.len())?;
    let f = f_poly(t)?;
    if f.is_zero() {
        return Ok(Membership {
            value: C::zero(),
            resultant: C::zero(),
            denominator: C::zero(),
            zero_polynomial: true,
            special_locus: false,
        });
    }
    let g = reversal(&f, d)?;
    let resultant = sylvester_resultant(&f, &g, budget)?.value;
    let denominator = f.abs_sq_at_i();
    if denominator.is_zero() {
        return Ok(Membership {
            value: C::zero(),
            special_locus: !resultant.is_zero(),
            resultant,
            denominator,
            zero_polynomial: false,
        });
    }
    Ok(Membership {
        value: resultant.clone() / denominator.clone(),
        resultant,
        denominator,
        zero_polynomial: false,
        special_locus: false,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloatMembership {
    pub raw: Membership<f64>,
    /// `r / ‖T‖^{2(d−1)}`.
    pub normalized: f64,
    pub member: bool,
}

pub fn membership_float(coords: &BinarySymCoords) -> Result<FloatMembership> {
    let d = coords.order();
    let raw = membership_value(&coords.t, DEFAULT_BUDGET)?;
    let scale = coords.norm_sq().powi(d as i32 - 1);
    let normalized = if scale > 0.0 { raw.value / scale } else { 0.0 };
    let member = raw.zero_polynomial || normalized.abs() <= MEMBERSHIP_TOLERANCE;
    Ok(FloatMembership { raw, normalized, member })
}

/// Exact decimal or fraction such as `-1.25`, `3/7` or `2e-3`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidArgument(format!("not a rational number: {s:?}"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(BigRational::new(n, d));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(p) => (&s[..p], s[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, body) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || !int.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("{int}{frac}").parse().map_err(|_| bad())?;
    let scale = exp - frac.len() as i32;
    let ten = BigInt::from(10);
    let mut value = if scale >= 0 {
        BigRational::from_integer(digits * num::pow(ten, scale as usize))
    } else {
        BigRational::new(digits, num::pow(ten, (-scale) as usize))
    };
    if neg {
        value = -value;
    }
    Ok(value)
}

/// Exact square root of a rational, if it is a perfect square.
pub fn rational_sqrt(x: &BigRational) -> Option<BigRational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| BigRational::new(n, d))
}

/// Square root of a polynomial with exact rational coefficients, if any.
pub fn poly_sqrt(p: &UniPoly<BigRational>) -> Option<UniPoly<BigRational>> {
    let deg = p.degree()?;
    if deg % 2 == 1 {
        return None;
    }
    let half = deg / 2;
    let lead = rational_sqrt(&p.coeffs[deg])?;
    let two = BigRational::from_int(2);
    // root coefficients from the top down: r_{half-j}
    let mut top: Vec<BigRational> = vec![lead.clone()];
    for j in 1..=half {
        let mut acc = p.coeffs[deg - j].clone();
        for i in 1..j {
            acc -= top[i].clone() * top[j - i].clone();
        }
        top.push(acc / (two.clone() * lead.clone()));
    }
    let root = UniPoly::new(top.into_iter().rev().collect());
    let square = poly_mul(&root, &root);
    let same = (0..=deg.max(square.formal_degree())).all(|k| {
        let a = p.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero);
        let b = square.coeffs.get(k).cloned().unwrap_or_else(BigRational::zero);
        a == b
    });
    same.then_some(root)
}

pub fn poly_mul<C: Coeff>(a: &UniPoly<C>, b: &UniPoly<C>) -> UniPoly<C> {
    let mut out = vec![C::zero(); a.coeffs.len() + b.coeffs.len() - 1];
    for (i, x) in a.coeffs.iter().enumerate() {
        for (j, y) in b.coeffs.iter().enumerate() {
            out[i + j] = out[i + j].clone() + x.clone() * y.clone();
        }
    }
    UniPoly::new(out)
}

/// Coefficients of the interpolating polynomial through `(x_k, y_k)`.
pub fn interpolate(xs: &[BigRational], ys: &[BigRational]) -> UniPoly<BigRational> {
    let n = xs.len();
    let mut div = ys.to_vec();
    for level in 1..n {
        for i in (level..n).rev() {
            div[i] = (div[i].clone() - div[i - 1].clone()) / (xs[i].clone() - xs[i - level].clone());
        }
    }
    let mut poly = UniPoly::new(vec![div[n - 1].clone()]);
    for i in (0..n - 1).rev() {
        let shifted = poly_mul(&poly, &UniPoly::new(vec![-xs[i].clone(), BigRational::one()]));
        let mut coeffs = shifted.coeffs;
        coeffs[0] += div[i].clone();
        poly = UniPoly::new(coeffs);
    }
    poly
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeReport {
    pub order: usize,
    /// Degree of the membership value restricted to a random rational line.
    pub degree: usize,
    /// Degree of the exact square root of `(−1)^d` times the restriction.
    pub root_degree: Option<usize>,
    /// Lines discarded because a sample hit a flagged locus.
    pub resampled: usize,
}

/// Restricts the membership value to random lines `t⁰ + s·t¹` with small
/// integer entries and reads off the degree by exact interpolation.
pub fn degree_check<R: Rng + ?Sized>(d: usize, rng: &mut R, budget: usize) -> Result<DegreeReport> {
    if !(3..=8).contains(&d) {
        return Err(Error::InvalidArgument(format!("degree check covers 3 <= d <= 8, got {d}")));
    }
    let samples = 2 * d + 2;
    let mut resampled = 0;
    for _ in 0..100 {
        let base: Vec<i64> = (0..=d).map(|_| rng.random_range(-9..=9)).collect();
        let dir: Vec<i64> = (0..=d).map(|_| rng.random_range(-9..=9)).collect();
        let xs: Vec<BigRational> = (0..samples as i64).map(BigRational::from_int).collect();
        let mut ys = Vec::with_capacity(samples);
        let mut flagged = false;
        for s in &xs {
            let t: Vec<BigRational> = base
                .iter()
                .zip(&dir)
                .map(|(&a, &b)| BigRational::from_int(a) + s.clone() * BigRational::from_int(b))
                .collect();
            let m = membership_value(&t, budget)?;
            if m.zero_polynomial || m.special_locus || m.denominator.is_zero() {
                flagged = true;
                break;
            }
            ys.push(m.value);
        }
        if flagged {
            resampled += 1;
            continue;
        }
        let restricted = interpolate(&xs, &ys);
        let Some(degree) = restricted.degree() else {
            resampled += 1;
            continue;
        };
        let signed = if d % 2 == 1 {
            UniPoly::new(restricted.coeffs.iter().map(|c| -c.clone()).collect())
        } else {
            restricted
        };
        let root_degree = poly_sqrt(&signed).and_then(|r| r.degree());
        return Ok(DegreeReport {
            order: d,
            degree,
            root_degree,
            resampled,
        });
    }
    Err(Error::Consistency("no admissible line found for the degree check".into()))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DimReport {
    pub expected: usize,
    pub measured: usize,
    pub ambient: usize,
}

/// Dimension predicted for the closure of `O(n_1)×⋯×O(n_d)·V`, or of
/// `O(n)•V_sym` when `symmetric`. Order 2 gives the full ambient space.
pub fn expected_dim(shape: &[usize], symmetric: bool) -> Result<usize> {
    if shape.len() < 2 || shape.contains(&0) {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: "need order >= 2 and positive dimensions".into(),
        });
    }
    let d = shape.len();
    let c2 = |n: usize| n * n.saturating_sub(1) / 2;
    if symmetric {
        let n = shape[0];
        if shape.iter().any(|&m| m != n) {
            return Err(Error::InvalidShape {
                shape: shape.to_vec(),
                reason: "symmetric dimension needs equal sizes".into(),
            });
        }
        let ambient = binomial(n + d - 1, d) as usize;
        Ok(if d == 2 { ambient } else { ambient - c2(n) })
    } else {
        let product: usize = shape.iter().product();
        let n1 = *shape.iter().min().expect("non-empty");
        Ok(if d == 2 { product } else { product - d * c2(n1) })
    }
}

/// Compares [`expected_dim`] with the rank of the Jacobian of
/// `(Q, S) ↦ Q·S` at a random point, built from skew tangent directions of
/// each orthogonal factor and a basis of the pattern space.
pub fn dim_check<R: Rng + ?Sized>(shape: &[usize], symmetric: bool, rng: &mut R) -> Result<DimReport> {
    let expected = expected_dim(shape, symmetric)?;
    let mut sorted = shape.to_vec();
    sorted.sort_unstable();
    let product: usize = sorted.iter().product();
    if product > 4096 {
        return Err(Error::InvalidShape {
            shape: shape.to_vec(),
            reason: "Jacobian check limited to 4096 entries".into(),
        });
    }
    let d = sorted.len();
    let (pattern, core, mats) = if symmetric {
        let n = sorted[0];
        let pattern = pattern_vsym(n, d)?;
        let core = pattern.project(SymTensor::symmetrize(&gaussian_tensor(&sorted, rng))?.as_dense())?;
        let q = haar_orthogonal(n, rng);
        (pattern, core, vec![q; d])
    } else {
        let pattern = pattern_v(&sorted)?;
        let core = pattern.project(&gaussian_tensor(&sorted, rng))?;
        let mats: Vec<DMatrix<f64>> = sorted.iter().map(|&n| haar_orthogonal(n, rng)).collect();
        (pattern, core, mats)
    };

    let mut columns: Vec<Vec<f64>> = Vec::new();
    let skew_basis = |n: usize| {
        let mut out = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                let mut e = DMatrix::zeros(n, n);
                e[(a, b)] = 1.0;
                e[(b, a)] = -1.0;
                out.push(e);
            }
        }
        out
    };
    let moved = |k: usize, e: &DMatrix<f64>| -> Result<DenseTensor> {
        let mut m = mats.clone();
        m[k] = &mats[k] * e;
        group_action(&m, &core)
    };
    if symmetric {
        for e in skew_basis(sorted[0]) {
            let mut acc = DenseTensor::zeros(&sorted)?;
            for k in 0..d {
                acc = acc.add(&moved(k, &e)?)?;
            }
            columns.push(acc.into_vec());
        }
        let mut seen = std::collections::HashSet::new();
        for idx in core.indices() {
            let mut key = idx.clone();
            key.sort_unstable();
            if pattern.is_forced(&idx) || !seen.insert(key) {
                continue;
            }
            let mut unit = DenseTensor::zeros(&sorted)?;
            unit.set(&idx, 1.0);
            let sym = SymTensor::symmetrize(&unit)?;
            columns.push(group_action(&mats, sym.as_dense())?.into_vec());
        }
    } else {
        for (k, &n) in sorted.iter().enumerate() {
            for e in skew_basis(n) {
                columns.push(moved(k, &e)?.into_vec());
            }
        }
        for idx in core.indices() {
            if pattern.is_forced(&idx) {
                continue;
            }
            let mut unit = DenseTensor::zeros(&sorted)?;
            unit.set(&idx, 1.0);
            columns.push(group_action(&mats, &unit)?.into_vec());
        }
    }
    let jac = DMatrix::from_fn(product, columns.len(), |r, c| columns[c][r]);
    let ambient = if symmetric {
        binomial(sorted[0] + d - 1, d) as usize
    } else {
        product
    };
    Ok(DimReport {
        expected,
        measured: numerical_rank(&jac, 1e-8),
        ambient,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn qs(v: &[i64]) -> Vec<BigRational> {
        v.iter().map(|&x| BigRational::from_int(x)).collect()
    }

    #[test]
    fn f_poly_at_order_three() {
        let t = [1.5, -2.0, 0.25, 3.0];
        let f = f_poly(&t).unwrap();
        let (t0, t1, t2, t3) = (t[0], t[1], t[2], t[3]);
        assert_eq!(f.coeffs, vec![3.0 * t1, 6.0 * t2 - 3.0 * t0, 3.0 * t3 - 6.0 * t1, -3.0 * t2]);
        assert!(f_poly(&[0.0; 5]).unwrap().is_zero());
        let f = f_poly(&[2.0, 0.0, 1.0, 0.0, -1.0]).unwrap();
        assert_eq!(f.coeffs[0], 0.0);
        assert_eq!(f.leading(), 0.0);
        assert_eq!(f.formal_degree(), 4);
    }

    #[test]
    fn reversal_evaluates() {
        let f = UniPoly::new(vec![1.0, -2.0, 0.5, 3.0, 4.0]);
        let g = reversal(&f, 4).unwrap();
        assert!((g.eval(&2.0) / 16.0 - f.eval(&-0.5)).abs() < 1e-12);
        let back = reversal(&g, 4).unwrap();
        assert_eq!(back, f);
        let z3 = UniPoly::new(vec![0.0, 0.0, 0.0, 1.0]);
        assert_eq!(reversal(&z3, 3).unwrap().coeffs, vec![-1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn resultant_small_cases() {
        let f = UniPoly::new(qs(&[-1, 1]));
        let g = UniPoly::new(qs(&[1, 1]));
        assert_eq!(sylvester_resultant(&f, &f, DEFAULT_BUDGET).unwrap().value, BigRational::zero());
        assert_eq!(sylvester_resultant(&f, &g, DEFAULT_BUDGET).unwrap().value, BigRational::from_int(2));
        let zero = UniPoly::new(qs(&[0, 0]));
        assert!(sylvester_resultant(&zero, &zero, DEFAULT_BUDGET).unwrap().degenerate);
    }

    #[test]
    fn resultant_matches_root_product() {
        // f = (x-1)(x-2)(x+3), g = 2(x-1/2)(x+1)(x-4)
        let f = poly_mul(&poly_mul(&UniPoly::new(vec![-1.0, 1.0]), &UniPoly::new(vec![-2.0, 1.0])), &UniPoly::new(vec![3.0, 1.0]));
        let g = poly_mul(&poly_mul(&UniPoly::new(vec![-1.0, 2.0]), &UniPoly::new(vec![1.0, 1.0])), &UniPoly::new(vec![-4.0, 1.0]));
        let mut expected = 8.0;
        for a in [1.0, 2.0, -3.0] {
            for b in [0.5, -1.0, 4.0] {
                expected *= a - b;
            }
        }
        let r = sylvester_resultant(&f, &g, DEFAULT_BUDGET).unwrap().value;
        assert!((r - expected).abs() <= 1e-10 * expected.abs());
    }

    #[test]
    fn budget_is_enforced() {
        let f = UniPoly::new(qs(&[1, 2, 3, 4, 5]));
        let g = UniPoly::new(qs(&[5, -1, 2, 0, 1]));
        assert!(matches!(sylvester_resultant(&f, &g, 3), Err(Error::BudgetExhausted(3))));
    }

    #[test]
    fn order_three_matches_quadric() {
        let mut rng = ChaCha8Rng::seed_from_u64(80);
        for _ in 0..20 {
            let t: Vec<BigRational> = (0..4).map(|_| q(rng.random_range(-20..20), rng.random_range(1..7))).collect();
            let m = membership_value(&t, DEFAULT_BUDGET).unwrap();
            let quad = t[1].clone() * t[1].clone() - t[0].clone() * t[2].clone() + t[2].clone() * t[2].clone()
                - t[1].clone() * t[3].clone();
            assert_eq!(m.value.is_zero(), quad.is_zero());
            // (−1)^d r is a square, proportional to the quadric squared
            if !quad.is_zero() {
                let ratio = -m.value / (quad.clone() * quad);
                assert!(rational_sqrt(&ratio).is_some(), "{ratio}");
            }
        }
    }

    #[test]
    fn denominator_matches_form_coefficients() {
        let t = [1.0, -0.5, 2.0, 0.75, -1.25, 0.5];
        let d = 5;
        let f = f_poly(&t).unwrap();
        let a: Vec<f64> = (0..=d).map(|k| binomial(d, k) as f64 * t[k]).collect();
        let even: f64 = (0..=d / 2).map(|k| if k % 2 == 0 { a[2 * k] } else { -a[2 * k] }).sum();
        let odd: f64 = (0..=(d - 1) / 2).map(|k| if k % 2 == 0 { a[2 * k + 1] } else { -a[2 * k + 1] }).sum();
        let expected = (d * d) as f64 * (even * even + odd * odd);
        assert!((f.abs_sq_at_i() - expected).abs() <= 1e-12 * expected);
    }

    #[test]
    fn coordinates_round_trip() {
        let c = BinarySymCoords::new(vec![1.0, 2.0, -1.0, 0.5]).unwrap();
        let s = c.to_sym();
        assert_eq!(BinarySymCoords::from_sym(&s).unwrap(), c);
        assert!((s.as_dense().norm().powi(2) - c.norm_sq()).abs() < 1e-12);
        assert!(BinarySymCoords::new(vec![1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn rotated_pattern_tensors_are_members() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        for d in 3..7 {
            let pattern = pattern_vsym(2, d).unwrap();
            let s = SymTensor::symmetrize(&pattern.project(&gaussian_tensor(&vec![2; d], &mut rng)).unwrap()).unwrap();
            let rot = haar_orthogonal(2, &mut rng);
            let t = crate::tensor::sym_action(&rot, &s, &Tolerances::default()).unwrap();
            let m = membership_float(&BinarySymCoords::from_sym(&t).unwrap()).unwrap();
            assert!(m.member, "d = {d}: {}", m.normalized);
            let generic = SymTensor::symmetrize(&gaussian_tensor(&vec![2; d], &mut rng)).unwrap();
            let m = membership_float(&BinarySymCoords::from_sym(&generic).unwrap()).unwrap();
            assert!(!m.member);
        }
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("-1.25").unwrap(), q(-5, 4));
        assert_eq!(parse_rational("3/6").unwrap(), q(1, 2));
        assert_eq!(parse_rational("2e-3").unwrap(), q(1, 500));
        assert_eq!(parse_rational("7").unwrap(), q(7, 1));
        assert_eq!(parse_rational(".5").unwrap(), q(1, 2));
        for bad in ["", "x", "1/0", "1.2.3", "-"] {
            assert!(parse_rational(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn square_roots() {
        let p = poly_mul(&UniPoly::new(vec![q(1, 2), q(-3, 1), q(2, 3)]), &UniPoly::new(vec![q(1, 2), q(-3, 1), q(2, 3)]));
        assert_eq!(poly_sqrt(&p).unwrap().degree(), Some(2));
        let mut bumped = p.clone();
        bumped.coeffs[1] += BigRational::one();
        assert!(poly_sqrt(&bumped).is_none());
        assert!(rational_sqrt(&q(9, 4)).is_some());
        assert!(rational_sqrt(&q(2, 1)).is_none());
    }

    #[test]
    fn interpolation_recovers_polynomial() {
        let p = UniPoly::new(vec![q(1, 3), q(-2, 1), q(0, 1), q(5, 7)]);
        let xs: Vec<BigRational> = (0..6).map(BigRational::from_int).collect();
        let ys: Vec<BigRational> = xs.iter().map(|x| p.eval(x)).collect();
        let back = interpolate(&xs, &ys);
        assert_eq!(back.degree(), Some(3));
        for k in 0..4 {
            assert_eq!(back.coeffs[k], p.coeffs[k]);
        }
    }

    #[test]
    fn degree_at_low_orders() {
        let mut rng = ChaCha8Rng::seed_from_u64(82);
        for d in 3..6 {
            let report = degree_check(d, &mut rng, DEFAULT_BUDGET).unwrap();
            assert_eq!(report.degree, 2 * (d - 1));
            assert_eq!(report.root_degree, Some(d - 1));
        }
    }

    #[test]
    fn dimension_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(83);
        let r = dim_check(&[3, 3, 3], false, &mut rng).unwrap();
        assert_eq!((r.expected, r.measured), (18, 18));
        let r = dim_check(&[3, 3, 3], true, &mut rng).unwrap();
        assert_eq!((r.expected, r.measured), (7, 7));
        let r = dim_check(&[2, 3], false, &mut rng).unwrap();
        assert_eq!((r.expected, r.measured), (6, 6));
        let r = dim_check(&[3, 3], true, &mut rng).unwrap();
        assert_eq!((r.expected, r.measured), (6, 6));
    }
}
