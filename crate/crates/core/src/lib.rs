//! Exact computations on the p-adic hyperbolic discs `D_alpha`: the quadratic
//! form `xz - y^2`, square classes and norm groups, Hilbert distances in closed
//! form and by brute force over the dual cone, the projection to the
//! Bruhat-Tits tree, and the p-adic triangle with its hexagonal shadow.

pub mod classes;
pub mod disc;
pub mod error;
pub mod geometry;
pub mod oracle;
pub mod padic;
pub mod sampling;
pub mod tree;
pub mod triangle;

pub use error::{Error, Result};
