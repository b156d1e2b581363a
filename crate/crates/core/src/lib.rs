//! Spectral analysis of the operator matrix
//!
//! ```text
//!     | w0     H01    0   |
//! H = | H01*   w1     H12 |   on  C + L2(Omega) + L2_sym(Omega^2),
//!     | 0      H12*   w2  |
//! ```
//!
//! with `Omega = (-a, a)^d`, `H01 f = int v0 f`, `(H12 f)(x) = int v1(x, y) f(x, y) dy`.
//! The crate discretizes `H` by tensor quadrature, locates the essential
//! spectrum through the Schur-complement symbol `Delta(x; z)`, counts bound
//! states via the Birman-Schwinger operator, and estimates the local exponents
//! that decide whether the discrete spectrum below the essential spectrum is
//! finite.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod expr;
pub mod finiteness;
pub mod grid;
pub mod linalg;
pub mod model;
pub mod operators;
pub mod report;
pub mod schur;
pub mod spectra;
pub mod table;
pub mod verify;

pub use error::{Error, Result};
pub use grid::{Grid, PairGrid, QuadratureRule};
pub use linalg::HermitianMatrix;
pub use model::{builtin, load_model, BuiltinModel, ModelSpec};
pub use operators::DiscreteBlocks;
