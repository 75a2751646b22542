//! Dense linear algebra kernel: complex matrices, Hermitian spectral calculus,
//! exponentials, tensor operations and non-normal eigenproblems.

mod eig;
mod expm;
mod hermitian;
mod matrix;
pub mod quad;
pub mod random;
mod tensor;

pub use eig::{
    eigenvalues, general_eig, hungarian_pairing, multiset_distance, spectral_projector_contour, EigCluster,
    GeneralEig,
};
pub use expm::{balance, expm, expm_balanced, expm_general, expm_multiply};
pub use hermitian::{
    herm_eig, matrix_fn, trace_product, DensityMatrix, HermEig, HermitianOperator, MatrixFn,
};
pub use matrix::{ComplexMatrix, MatrixDump};
pub use tensor::{embed, kron, partial_trace_first, partial_trace_second, unvec, vec_row_major};

pub type C64 = num_complex::Complex64;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };
