//! Seeded sampling helpers shared by the optimizer, the generators and tests.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::qr_positive;
use crate::tensor::DenseTensor;

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_tensor<R: Rng + ?Sized>(shape: &[usize], rng: &mut R) -> DenseTensor {
    let len = shape.iter().product();
    let data = (0..len).map(|_| rng.sample(StandardNormal)).collect();
    DenseTensor::new(shape.to_vec(), data).expect("valid shape")
}

/// Haar-distributed element of O(n): Q factor of a Gaussian matrix with the
/// triangular factor's diagonal made positive.
pub fn haar_orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DMatrix<f64> {
    loop {
        let g = gaussian_matrix(n, n, rng);
        if let Some(q) = qr_positive(&g) {
            return q;
        }
    }
}
