use nalgebra::DMatrix;

/// Q factor of a square matrix with the convention `diag(R) > 0`. Returns
/// `None` when some `|R_ii|` is negligible relative to the largest.
pub fn qr_positive(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.ncols();
    let qr = a.clone().qr();
    let r = qr.r();
    let mut q = qr.q();
    let scale = (0..n).map(|i| r[(i, i)].abs()).fold(0.0, f64::max);
    if !(scale > 0.0) {
        return None;
    }
    for j in 0..n {
        let rjj = r[(j, j)];
        if rjj.abs() <= 1e-12 * scale {
            return None;
        }
        if rjj < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    Some(q)
}

/// Numerical rank with a threshold relative to the largest singular value.
pub fn numerical_rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let sv = m.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * smax).count()
}

pub fn skew(a: &DMatrix<f64>) -> DMatrix<f64> {
    (a - a.transpose()) * 0.5
}
