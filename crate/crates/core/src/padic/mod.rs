//! Exact rational arithmetic with p-adic valuations.
//!
//! Every decision procedure here (valuations, square classes, Legendre and
//! Hilbert symbols) works on exact rationals. Only square roots produce
//! finite-precision data, carried by [`PadicApprox`] and the mixed
//! [`Qp`] number type.

mod approx;
mod context;
mod haar;
mod qp;
mod rational;
mod square_class;
mod symbols;

pub use approx::{hensel_sqrt, PadicApprox};
pub use context::{with_precision_escalation, PadicContext, MIN_PRECISION, PRECISION_CAP};
pub use haar::{
    ball_exponent, haar_ball_measure, measure_of, smallest_symmetric_ball, RadiusExponent,
};
pub use qp::Qp;
pub(crate) use rational::residue_mod;
pub use rational::{
    format_rational, int_valuation, norm, parse_rational, power_of_p, rat, unit_part, valuation,
    Rational,
};
pub use square_class::SquareClass;
pub use symbols::{hilbert_symbol, hilbert_symbol_classes, legendre, smallest_nonresidue};
