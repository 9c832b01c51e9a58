//! Tensors with an orthogonal basis of singular vector tuples.
//!
//! A tensor `T` has such a basis exactly when an orthogonal change of basis
//! `Q` brings it into the coordinate subspace `V` of tensors that vanish at
//! Hamming distance one from the diagonal. This crate computes the
//! structured Tucker decomposition `T = Q·S` with `S ∈ V` by Riemannian
//! gradient descent and ships the supporting certificates.

pub mod cumulants;
pub mod decomposition;
pub mod error;
pub mod linalg;
pub mod manifold;
pub mod pattern;
pub mod random;
pub mod spectral;
pub mod synth;
pub mod tensor;
pub mod tns;
pub mod variety;

pub use error::{Error, Result};
pub use pattern::{PatternIndexSet, PatternKind};
pub use tensor::{DenseTensor, OrthTuple, SymTensor, Tolerances};
