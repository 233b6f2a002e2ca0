//! Computational workbench for q-positivity in finite-dimensional
//! symmetrically self-dual (SSD) spaces.
//!
//! A space is `R^n` with a symmetric matrix `S` defining the pairing
//! `⌊b, c⌋ = bᵀ S c` and the quadratic form `q(b) = ½ bᵀ S b`. On top of that
//! the crate evaluates Fitzpatrick-type functions `Φ_A`, their intrinsic
//! conjugates, polar sets `A^π`, and decides maximality and premaximality for
//! point sets and affine sets. Concrete models (monotone, Hilbert, Lipschitz)
//! live in [`ssdb`], [`lipschitz`] and [`hilbert`].
//!
//! Every decision returns a [`Verdict`]. A `Fails` verdict always carries a
//! witness that can be re-checked; verdicts obtained from grid searches carry
//! the resolution they were certified at.

pub mod affine;
pub mod error;
pub mod exec;
pub mod fitzpatrick;
pub mod gen;
pub mod hilbert;
pub mod lipschitz;
pub mod maximality;
pub mod minimal;
pub mod numerics;
pub mod space;
pub mod ssdb;
pub mod suite;
pub mod tol;
pub mod verdict;

pub use error::{QposError, Result};
pub use exec::Exec;
pub use space::{PointSet, SsdSpace};
pub use verdict::{Status, Verdict, Witness};

/// Dense column vector used throughout.
pub type Vector = nalgebra::DVector<f64>;
/// Dense matrix used throughout.
pub type Matrix = nalgebra::DMatrix<f64>;
