//! Finite-difference Newton solver for the elliptic Toda equation
//! `(e^U)_tt + U_xx + U_yy = 0` on Dirichlet boxes.

pub mod grid;
pub mod io;
pub mod linear;
pub mod metric_report;
pub mod solver;

pub use grid::{Boundary, GridSpec};
pub use solver::{discrete_residual, solve, GridSolution, Init, SolveFailure, SolveOptions};
