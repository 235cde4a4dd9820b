//! Numerical and exact-symbolic kernels for spectral inequalities of the
//! two-dimensional Landau operator.
//!
//! The crate is `no_std` (with `alloc`). File formats, the command-line
//! front end and parallel sweep orchestration live in the `magbern` crate.

#![no_std]
// `num_traits::Float` is needed without std, but becomes redundant when a
// dependent enables std float methods through feature unification
#![allow(unused_imports)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod algebra;
pub mod control;
pub mod error;
pub mod geometry;
pub mod inequality;
pub mod landau;
pub mod lattice;
pub mod linalg;
pub mod quad;
pub mod random;
pub mod stats;

pub use error::{Error, ErrorKind, Result};
pub use num_complex::Complex64;
