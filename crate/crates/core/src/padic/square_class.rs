use std::fmt;

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::context::pow_mod;
use super::rational::{power_of_p, residue_mod, unit_part, valuation, Rational};
use super::symbols::smallest_nonresidue;
use super::{PadicContext, Qp};
use crate::error::{Error, Result};

/// An element of `Q_p^* / (Q_p^*)^2`.
///
/// For odd `p` the unit component is `0` (square unit) or `1` (non-square
/// unit). For `p = 2` it is the residue of the unit part modulo 8.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SquareClass {
    p: u64,
    odd_valuation: bool,
    unit: u8,
}

impl SquareClass {
    pub fn of(x: &Rational, ctx: &PadicContext) -> Result<Self> {
        let v = valuation(x, ctx).ok_or(Error::ZeroInput)?;
        let u = unit_part(x, ctx);
        let unit = if ctx.is_odd() {
            let r = residue_mod(&u, ctx.prime()).to_u64().expect("residue fits");
            u8::from(pow_mod(r, (ctx.p() - 1) / 2, ctx.p()) != 1)
        } else {
            residue_mod(&u, &BigInt::from(8))
                .to_u8()
                .expect("residue fits")
        };
        Ok(Self {
            p: ctx.p(),
            odd_valuation: v.rem_euclid(2) == 1,
            unit,
        })
    }

    /// [`SquareClass::of`] for a machine integer.
    pub fn of_int(n: i128, ctx: &PadicContext) -> Result<Self> {
        if n == 0 {
            return Err(Error::ZeroInput);
        }
        let p = i128::from(ctx.p());
        let (mut u, mut v) = (n, 0u32);
        while u % p == 0 {
            u /= p;
            v += 1;
        }
        let unit = if ctx.is_odd() {
            let r = u.rem_euclid(p) as u64;
            u8::from(pow_mod(r, (ctx.p() - 1) / 2, ctx.p()) != 1)
        } else {
            u.rem_euclid(8) as u8
        };
        Ok(Self {
            p: ctx.p(),
            odd_valuation: v % 2 == 1,
            unit,
        })
    }

    /// Class of a possibly approximate value; `p = 2` needs three known digits.
    pub fn of_qp(x: &Qp, ctx: &PadicContext) -> Result<Self> {
        let a = match x {
            Qp::Exact(x) => return Self::of(x, ctx),
            Qp::Approx(a) => a,
        };
        let unit = if ctx.is_odd() {
            let r = (a.unit_digits() % ctx.prime())
                .to_u64()
                .expect("residue fits");
            u8::from(pow_mod(r, (ctx.p() - 1) / 2, ctx.p()) != 1)
        } else {
            if a.digits() < 3 {
                return Err(Error::PrecisionExhausted { digits: a.digits() });
            }
            (a.unit_digits() % 8u32).to_u8().expect("residue fits")
        };
        Ok(Self {
            p: ctx.p(),
            odd_valuation: a.valuation().rem_euclid(2) == 1,
            unit,
        })
    }

    pub fn one(ctx: &PadicContext) -> Self {
        Self {
            p: ctx.p(),
            odd_valuation: false,
            unit: if ctx.is_odd() { 0 } else { 1 },
        }
    }

    /// All 4 (odd p) or 8 (p = 2) classes, in label order.
    pub fn all(ctx: &PadicContext) -> Vec<Self> {
        let units: &[u8] = if ctx.is_odd() { &[0, 1] } else { &[1, 7, 5, 3] };
        [false, true]
            .iter()
            .flat_map(|&odd_valuation| {
                units.iter().map(move |&unit| Self {
                    p: ctx.p(),
                    odd_valuation,
                    unit,
                })
            })
            .collect()
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn has_odd_valuation(&self) -> bool {
        self.odd_valuation
    }

    pub fn is_square(&self) -> bool {
        !self.odd_valuation && self.unit == if self.p == 2 { 1 } else { 0 }
    }

    pub fn mul(self, other: Self) -> Self {
        debug_assert_eq!(self.p, other.p);
        let unit = if self.p == 2 {
            (self.unit * other.unit) % 8
        } else {
            self.unit ^ other.unit
        };
        Self {
            p: self.p,
            odd_valuation: self.odd_valuation ^ other.odd_valuation,
            unit,
        }
    }

    /// The canonical representative: `1`, `eps`, `p`, `eps*p` for odd p;
    /// `±1, ±5, ±2, ±10` for p = 2.
    pub fn representative(&self, ctx: &PadicContext) -> Rational {
        let unit = if self.p == 2 {
            match self.unit {
                1 => 1,
                7 => -1,
                5 => 5,
                _ => -5,
            }
        } else if self.unit == 0 {
            1
        } else {
            smallest_nonresidue(self.p) as i64
        };
        let base = Rational::from_integer(BigInt::from(unit));
        if self.odd_valuation {
            base * power_of_p(1, ctx)
        } else {
            base
        }
    }

    pub fn label(&self) -> &'static str {
        match (self.p == 2, self.odd_valuation, self.unit) {
            (false, false, 0) => "1",
            (false, false, _) => "eps",
            (false, true, 0) => "p",
            (false, true, _) => "eps*p",
            (true, false, 1) => "1",
            (true, false, 7) => "-1",
            (true, false, 5) => "5",
            (true, false, _) => "-5",
            (true, true, 1) => "2",
            (true, true, 7) => "-2",
            (true, true, 5) => "10",
            (true, true, _) => "-10",
        }
    }

    /// Parses a class label, or any nonzero rational (taking its class).
    pub fn parse(label: &str, ctx: &PadicContext) -> Result<Self> {
        let label = label.trim();
        if ctx.is_odd() {
            let by_label = Self::all(ctx).into_iter().find(|c| c.label() == label);
            if let Some(c) = by_label {
                return Ok(c);
            }
        }
        let x = super::rational::parse_rational(label)?;
        if x.is_zero() {
            return Err(Error::ZeroInput);
        }
        Self::of(&x, ctx)
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}
