//! Dense and banded Hermitian linear algebra.

pub mod banded;
pub mod dense;
pub mod lanczos;

pub use banded::{BandedHermitian, LdlFactor};
pub use dense::{axpy, cholesky, cholesky_solve, dot, eigh, eigvalsh, hpd_solve, norm, DMat};
pub use lanczos::{lowest_eigenpairs, HermitianOp, KrylovOptions};
