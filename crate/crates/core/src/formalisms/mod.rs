//! Metric constructions from potentials and the maps between them.

pub mod legendre;
pub mod pullback;
pub mod sigma;
pub mod slice;
pub mod u;
pub mod w;
