use std::fmt;

use num_traits::{One, Zero};

use super::approx::{rational_sqrt, PadicApprox};
use super::rational::{format_rational, valuation, Rational};
use super::{hensel_sqrt, PadicContext, SquareClass};
use crate::error::{Error, Result};

/// An element of `Q_p` that is either known exactly or only to finite
/// precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Qp {
    Exact(Rational),
    Approx(PadicApprox),
}

impl From<Rational> for Qp {
    fn from(x: Rational) -> Self {
        Qp::Exact(x)
    }
}

impl Qp {
    pub fn zero() -> Self {
        Qp::Exact(Rational::zero())
    }

    pub fn one() -> Self {
        Qp::Exact(Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Qp::Exact(x) if x.is_zero())
    }

    pub fn as_exact(&self) -> Option<&Rational> {
        match self {
            Qp::Exact(x) => Some(x),
            Qp::Approx(_) => None,
        }
    }

    /// `None` for zero. Approximate values are never zero.
    pub fn valuation(&self, ctx: &PadicContext) -> Option<i64> {
        match self {
            Qp::Exact(x) => valuation(x, ctx),
            Qp::Approx(a) => Some(a.valuation()),
        }
    }

    /// Whether the value is compatible with the rational `x`.
    pub fn agrees_with(&self, x: &Rational, ctx: &PadicContext) -> bool {
        match self {
            Qp::Exact(y) => y == x,
            Qp::Approx(a) => a.agrees_with(x, ctx),
        }
    }

    /// Approximates an exact nonzero value to the absolute precision `abs`.
    fn approximate(x: &Rational, abs: i64, ctx: &PadicContext) -> PadicApprox {
        let v = valuation(x, ctx).expect("nonzero");
        let digits = (abs - v).max(1) as u32;
        PadicApprox::from_rational(x, digits, ctx).expect("nonzero")
    }

    pub fn add(&self, other: &Self, ctx: &PadicContext) -> Result<Self> {
        match (self, other) {
            (Qp::Exact(a), Qp::Exact(b)) => Ok(Qp::Exact(a + b)),
            (x, y) if x.is_zero() => Ok(y.clone()),
            (x, y) if y.is_zero() => Ok(x.clone()),
            (Qp::Approx(a), Qp::Approx(b)) => a.add(b).map(Qp::Approx),
            (Qp::Approx(a), Qp::Exact(b)) | (Qp::Exact(b), Qp::Approx(a)) => {
                let b = Self::approximate(b, a.absolute_precision(), ctx);
                a.add(&b).map(Qp::Approx)
            }
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Qp::Exact(a) => Qp::Exact(-a),
            Qp::Approx(a) => Qp::Approx(a.neg()),
        }
    }

    pub fn sub(&self, other: &Self, ctx: &PadicContext) -> Result<Self> {
        self.add(&other.neg(), ctx)
    }

    pub fn mul(&self, other: &Self, ctx: &PadicContext) -> Self {
        match (self, other) {
            (Qp::Exact(a), Qp::Exact(b)) => Qp::Exact(a * b),
            (x, _) | (_, x) if x.is_zero() => Qp::zero(),
            (Qp::Approx(a), Qp::Approx(b)) => Qp::Approx(a.mul(b)),
            (Qp::Approx(a), Qp::Exact(b)) | (Qp::Exact(b), Qp::Approx(a)) => {
                let b = PadicApprox::from_rational(b, a.digits(), ctx).expect("nonzero");
                Qp::Approx(a.mul(&b))
            }
        }
    }

    pub fn inv(&self) -> Result<Self> {
        match self {
            Qp::Exact(a) if a.is_zero() => Err(Error::ZeroInput),
            Qp::Exact(a) => Ok(Qp::Exact(a.recip())),
            Qp::Approx(a) => Ok(Qp::Approx(a.inv())),
        }
    }

    pub fn div(&self, other: &Self, ctx: &PadicContext) -> Result<Self> {
        Ok(self.mul(&other.inv()?, ctx))
    }

    pub fn scale(&self, k: &Rational, ctx: &PadicContext) -> Self {
        self.mul(&Qp::Exact(k.clone()), ctx)
    }

    /// Square root: exact when the input is a rational square, otherwise a
    /// Hensel lift at the context precision.
    pub fn sqrt(&self, ctx: &PadicContext) -> Result<Self> {
        match self {
            Qp::Exact(x) if x.is_zero() => Ok(Qp::zero()),
            Qp::Exact(x) => {
                if !SquareClass::of(x, ctx)?.is_square() {
                    return Err(Error::NotASquare);
                }
                Ok(match rational_sqrt(x) {
                    Some(r) => Qp::Exact(r),
                    None => Qp::Approx(hensel_sqrt(x, ctx)?),
                })
            }
            Qp::Approx(a) => a.sqrt().map(Qp::Approx),
        }
    }
}

impl fmt::Display for Qp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Qp::Exact(x) => f.write_str(&format_rational(x)),
            Qp::Approx(a) => a.fmt(f),
        }
    }
}
