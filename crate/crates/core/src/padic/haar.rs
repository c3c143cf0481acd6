use std::fmt;

use num_bigint::BigInt;
use num_traits::One;

use super::rational::{power_of_p, Rational};
use super::{PadicContext, Qp};
use crate::error::{Error, Result};

/// Radius exponent `t` of the symmetric ball
/// `{x : |x - 1| <= p^t, |1/x - 1| <= p^t}`; `NegInfinity` is the ball `{1}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RadiusExponent {
    NegInfinity,
    Finite(i64),
}

impl fmt::Display for RadiusExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RadiusExponent::NegInfinity => f.write_str("-inf"),
            RadiusExponent::Finite(t) => write!(f, "{t}"),
        }
    }
}

/// Haar measure of the symmetric ball of radius `p^t`, normalized by
/// `mu(Z_p^*) = 1`: `t + 1` for `t >= 0`, `p^(t+1) / (p - 1)` for `t < 0`.
pub fn haar_ball_measure(t: i64, ctx: &PadicContext) -> Rational {
    if t >= 0 {
        Rational::from_integer(BigInt::from(t + 1))
    } else {
        power_of_p(t + 1, ctx) / Rational::from_integer(BigInt::from(ctx.p() - 1))
    }
}

/// [`haar_ball_measure`], with measure 0 for the degenerate ball `{1}`.
pub fn measure_of(t: RadiusExponent, ctx: &PadicContext) -> Rational {
    match t {
        RadiusExponent::NegInfinity => Rational::from_integer(BigInt::from(0)),
        RadiusExponent::Finite(t) => haar_ball_measure(t, ctx),
    }
}

/// Radius exponent of the smallest symmetric ball containing `x`.
pub fn ball_exponent(x: &Qp, ctx: &PadicContext) -> Result<RadiusExponent> {
    let v = x.valuation(ctx).ok_or(Error::ZeroValue)?;
    if v != 0 {
        return Ok(RadiusExponent::Finite(v.abs()));
    }
    // for a unit, |1/x - 1| = |1 - x|
    let d = x.sub(&Qp::Exact(Rational::one()), ctx)?;
    Ok(match d.valuation(ctx) {
        None => RadiusExponent::NegInfinity,
        Some(w) => RadiusExponent::Finite(-w),
    })
}

/// Radius exponent of the smallest symmetric ball containing all `values`.
pub fn smallest_symmetric_ball<'a>(
    values: impl IntoIterator<Item = &'a Qp>,
    ctx: &PadicContext,
) -> Result<RadiusExponent> {
    let mut t = RadiusExponent::NegInfinity;
    for x in values {
        t = t.max(ball_exponent(x, ctx)?);
    }
    Ok(t)
}
