//! Exact computations around local sign decompositions of rank-two
//! symplectic self-dual representations of `G_{Q_p}`.

pub mod cli;
pub mod epsilon;
pub mod lagrangian_mr;
pub mod linalg;
pub mod oracles;
pub mod padic_core;
pub mod phigamma;
pub mod series;
pub mod unit_characters;
