//! Dense numerics used by every certification routine: symmetric
//! eigen-decomposition, a simplex LP over convex-combination weights,
//! quadratic forms restricted to subspaces, and a grid/multistart maximizer.

pub mod grid;
pub mod linalg;
pub mod lp;
pub mod quad;

pub use grid::{grid_multistart_max, grid_multistart_max_with, grid_scan_max, BoxGrid, GridMax};
pub use linalg::{sym_eigen, SymEigen};
pub use lp::{lp_min, LpOutcome, SimplexLp};
pub use quad::{min_q_over_affine, psd_on_subspace, AffineMin};
