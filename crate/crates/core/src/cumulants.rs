//! Sample cumulant tensors of orders 2, 3 and 4 from k-statistics.

use std::io::Read;
use std::path::Path;

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::tensor::{group_action, DenseTensor, SymTensor};

/// Observations in rows, variables in columns.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    data: DMatrix<f64>,
    labels: Option<Vec<String>>,
}

impl SampleMatrix {
    pub fn new(data: DMatrix<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        if data.ncols() == 0 || data.nrows() == 0 {
            return Err(Error::InvalidArgument("sample matrix is empty".into()));
        }
        if let Some(l) = &labels {
            if l.len() != data.ncols() {
                return Err(Error::ValueCount {
                    expected: data.ncols(),
                    found: l.len(),
                });
            }
        }
        if let Some(p) = data.iter().position(|x| !x.is_finite()) {
            let (r, c) = (p % data.nrows(), p / data.nrows());
            return Err(Error::NonFinite { index: vec![r, c] });
        }
        Ok(SampleMatrix { data, labels })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::Parse {
                line: bad + 1,
                message: format!("expected {n} values, found {}", rows[bad].len()),
            });
        }
        SampleMatrix::new(DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]), None)
    }

    pub fn observations(&self) -> usize {
        self.data.nrows()
    }

    pub fn variables(&self) -> usize {
        self.data.ncols()
    }

    pub fn data(&self) -> &DMatrix<f64> {
        &self.data
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// Rows mapped by `x ↦ A x`.
    pub fn transform(&self, a: &DMatrix<f64>) -> Result<SampleMatrix> {
        if a.ncols() != self.variables() {
            return Err(Error::ModeMismatch {
                mode: 1,
                expected: self.variables(),
                found: a.ncols(),
            });
        }
        SampleMatrix::new(&self.data * a.transpose(), None)
    }

    fn centered(&self) -> DMatrix<f64> {
        let m = self.observations();
        let mut out = self.data.clone();
        for j in 0..self.variables() {
            let mean = neumaier(self.data.column(j).iter().copied()) / m as f64;
            out.column_mut(j).add_scalar_mut(-mean);
        }
        out
    }
}

/// Comma-separated numbers; a first row that does not parse is taken as
/// column labels.
pub fn read_csv<R: Read>(reader: R) -> Result<SampleMatrix> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut labels: Option<Vec<String>> = None;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in rdr.records().enumerate() {
        let record = record?;
        let line = record.position().map_or(r as u64 + 1, |p| p.line()) as usize;
        let parsed: std::result::Result<Vec<f64>, usize> = record
            .iter()
            .enumerate()
            .map(|(c, field)| field.parse::<f64>().map_err(|_| c))
            .collect();
        match parsed {
            Ok(values) => {
                if let Some(c) = values.iter().position(|x| !x.is_finite()) {
                    return Err(Error::Parse {
                        line,
                        message: format!("non-finite value in column {}", c + 1),
                    });
                }
                rows.push(values)
            }
            Err(_) if r == 0 => labels = Some(record.iter().map(str::to_string).collect()),
            Err(c) => {
                return Err(Error::Parse {
                    line,
                    message: format!("column {}: {:?} is not a number", c + 1, &record[c]),
                })
            }
        }
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            message: "no numeric rows".into(),
        });
    }
    let mut sample = SampleMatrix::from_rows(&rows).map_err(|e| match (e, labels.is_some()) {
        (Error::Parse { line, message }, true) => Error::Parse { line: line + 1, message },
        (e, _) => e,
    })?;
    if let Some(l) = labels {
        if l.len() != sample.variables() {
            return Err(Error::Parse {
                line: 1,
                message: format!("{} labels for {} columns", l.len(), sample.variables()),
            });
        }
        sample.labels = Some(l);
    }
    Ok(sample)
}

pub fn read_csv_file(path: &Path) -> Result<SampleMatrix> {
    let file = std::fs::File::open(path)?;
    read_csv(file)
}

/// Compensated (Neumaier) summation.
pub fn neumaier(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in values {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

fn sorted_multisets(n: usize, d: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; d];
    loop {
        out.push(cur.clone());
        let Some(k) = (0..d).rev().find(|&k| cur[k] + 1 < n) else {
            return out;
        };
        let v = cur[k] + 1;
        for x in &mut cur[k..] {
            *x = v;
        }
    }
}

/// k-statistic tensor of order 2, 3 or 4, symmetric by construction.
pub fn cumulant_tensor(sample: &SampleMatrix, order: usize) -> Result<SymTensor> {
    if !(2..=4).contains(&order) {
        return Err(Error::InvalidArgument(format!("cumulant order must be 2, 3 or 4, got {order}")));
    }
    let m = sample.observations();
    if m < order + 1 {
        return Err(Error::InvalidArgument(format!(
            "order-{order} cumulants need at least {} observations, got {m}",
            order + 1
        )));
    }
    let n = sample.variables();
    let x = sample.centered();
    for j in 0..n {
        if x.column(j).iter().all(|&v| v == 0.0) {
            log::warn!("column {} has zero variance", j + 1);
        }
    }
    let mf = m as f64;
    let cols: Vec<Vec<f64>> = (0..n).map(|j| x.column(j).iter().copied().collect()).collect();
    let moment = |idx: &[usize]| neumaier((0..m).map(|r| idx.iter().map(|&j| cols[j][r]).product::<f64>())) / mf;

    let cov: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| moment(&[i, j])).collect()).collect();
    let keys = sorted_multisets(n, order);
    let values: Vec<f64> = keys
        .par_iter()
        .map(|idx| match order {
            2 => mf / (mf - 1.0) * cov[idx[0]][idx[1]],
            3 => mf * mf / ((mf - 1.0) * (mf - 2.0)) * moment(idx),
            _ => {
                let (i, j, k, l) = (idx[0], idx[1], idx[2], idx[3]);
                let pairs = cov[i][j] * cov[k][l] + cov[i][k] * cov[j][l] + cov[i][l] * cov[j][k];
                mf * mf / ((mf - 1.0) * (mf - 2.0) * (mf - 3.0)) * ((mf + 1.0) * moment(idx) - (mf - 1.0) * pairs)
            }
        })
        .collect();

    let mut t = DenseTensor::zeros(&vec![n; order])?;
    let mut lookup = std::collections::HashMap::with_capacity(keys.len());
    for (key, v) in keys.into_iter().zip(values) {
        lookup.insert(key, v);
    }
    let all: Vec<Vec<usize>> = t.indices().collect();
    for idx in all {
        let mut key = idx.clone();
        key.sort_unstable();
        t.set(&idx, lookup[&key]);
    }
    SymTensor::new(t, &Default::default())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivarianceReport {
    pub order: usize,
    /// Largest entrywise difference relative to the largest expected entry.
    pub relative_error: f64,
}

impl EquivarianceReport {
    pub fn passes(&self, tol: f64) -> bool {
        self.relative_error <= tol
    }
}

/// Compares the cumulants of the transformed sample with `(A,…,A)` applied
/// to the cumulants of the original sample.
pub fn affine_equivariance_check(sample: &SampleMatrix, a: &DMatrix<f64>, order: usize) -> Result<EquivarianceReport> {
    if a.nrows() != a.ncols() || a.clone().try_inverse().is_none() {
        return Err(Error::InvalidArgument("transformation must be square and invertible".into()));
    }
    let direct = cumulant_tensor(&sample.transform(a)?, order)?;
    let base = cumulant_tensor(sample, order)?;
    let expected = group_action(&vec![a.clone(); order], base.as_dense())?;
    let scale = expected.max_abs().max(f64::MIN_POSITIVE);
    Ok(EquivarianceReport {
        order,
        relative_error: direct.as_dense().max_abs_diff(&expected)? / scale,
    })
}

/// `‖K_d‖ / ‖K_2‖^{d/2}`.
pub fn normalized_cumulant_norm(sample: &SampleMatrix, order: usize) -> Result<f64> {
    let k2 = cumulant_tensor(sample, 2)?.as_dense().norm();
    let kd = cumulant_tensor(sample, order)?.as_dense().norm();
    Ok(kd / k2.powf(order as f64 / 2.0))
}

/// The normalized cumulant norm on `reps` bootstrap resamples.
pub fn bootstrap_normalized_norm<R: Rng + ?Sized>(
    sample: &SampleMatrix,
    order: usize,
    reps: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let m = sample.observations();
    (0..reps)
        .map(|_| {
            let rows: Vec<usize> = (0..m).map(|_| rng.random_range(0..m)).collect();
            let resampled = SampleMatrix::new(sample.data.select_rows(rows.iter()), None)?;
            normalized_cumulant_norm(&resampled, order)
        })
        .collect()
}
