//! Exact computer algebra for Lusztig root vectors of `U_q(sl_{n+1})` and the
//! covariant differential calculi they define on quantum flag manifolds.

pub mod calculus;
pub mod freealg;
pub mod linalg;
pub mod oq;
pub mod parse;
pub mod scalars;
pub mod uqsl;
pub mod weyl;

pub use scalars::RatQ;
