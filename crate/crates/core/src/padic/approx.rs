use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::context::pow_mod;
use super::rational::{mod_inverse, residue_mod, unit_part, valuation, Rational};
use super::PadicContext;
use crate::error::{Error, Result};

/// `p^valuation * unit + O(p^(valuation + digits))`, with `0 < unit < p^digits`
/// coprime to `p`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicApprox {
    p: u64,
    valuation: i64,
    unit: BigInt,
    digits: u32,
}

impl PadicApprox {
    fn modulus(p: u64, digits: u32) -> BigInt {
        num_traits::pow(BigInt::from(p), digits as usize)
    }

    fn normalized(p: u64, valuation: i64, unit: BigInt, digits: u32) -> Self {
        let unit = unit.mod_floor(&Self::modulus(p, digits));
        debug_assert!(!unit.is_multiple_of(&BigInt::from(p)));
        Self {
            p,
            valuation,
            unit,
            digits,
        }
    }

    /// Reduction of a nonzero rational to `digits` significant digits.
    pub fn from_rational(x: &Rational, digits: u32, ctx: &PadicContext) -> Result<Self> {
        let v = valuation(x, ctx).ok_or(Error::ZeroInput)?;
        let u = residue_mod(&unit_part(x, ctx), &Self::modulus(ctx.p(), digits));
        Ok(Self::normalized(ctx.p(), v, u, digits))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn valuation(&self) -> i64 {
        self.valuation
    }

    pub fn unit_digits(&self) -> &BigInt {
        &self.unit
    }

    pub fn digits(&self) -> u32 {
        self.digits
    }

    /// Absolute precision: the value is known modulo `p^absolute_precision`.
    pub fn absolute_precision(&self) -> i64 {
        self.valuation + self.digits as i64
    }

    /// Whether `x` is congruent to this value at the known precision.
    pub fn agrees_with(&self, x: &Rational, ctx: &PadicContext) -> bool {
        match valuation(x, ctx) {
            None => false,
            Some(v) if v != self.valuation => false,
            Some(_) => {
                let m = Self::modulus(self.p, self.digits);
                residue_mod(&unit_part(x, ctx), &m) == self.unit
            }
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let digits = self.digits.min(other.digits);
        Self::normalized(
            self.p,
            self.valuation + other.valuation,
            &self.unit * &other.unit,
            digits,
        )
    }

    pub fn inv(&self) -> Self {
        let m = Self::modulus(self.p, self.digits);
        let u = mod_inverse(&self.unit, &m).expect("unit is invertible");
        Self::normalized(self.p, -self.valuation, u, self.digits)
    }

    pub fn neg(&self) -> Self {
        Self::normalized(self.p, self.valuation, -&self.unit, self.digits)
    }

    /// Sum; fails when the known digits cancel completely.
    pub fn add(&self, other: &Self) -> Result<Self> {
        let abs = self.absolute_precision().min(other.absolute_precision());
        let low = self.valuation.min(other.valuation);
        if abs <= low {
            return Err(Error::PrecisionExhausted {
                digits: self.digits.min(other.digits),
            });
        }
        let p = BigInt::from(self.p);
        let shift = |x: &Self| &x.unit * num_traits::pow(p.clone(), (x.valuation - low) as usize);
        let total =
            (shift(self) + shift(other)).mod_floor(&Self::modulus(self.p, (abs - low) as u32));
        if total.is_zero() {
            return Err(Error::PrecisionExhausted {
                digits: self.digits.min(other.digits),
            });
        }
        let mut k = 0i64;
        let mut unit = total;
        while unit.is_multiple_of(&p) {
            unit /= &p;
            k += 1;
        }
        let valuation = low + k;
        Ok(Self::normalized(
            self.p,
            valuation,
            unit,
            (abs - valuation) as u32,
        ))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    /// Square root, if the value is a square at the known precision.
    pub fn sqrt(&self) -> Result<Self> {
        if self.valuation % 2 != 0 {
            return Err(Error::NotASquare);
        }
        let room = if self.p == 2 { 3 } else { 1 };
        if self.digits < room {
            return Err(Error::PrecisionExhausted {
                digits: self.digits,
            });
        }
        // a root mod p^(N-1) (p = 2: mod 2^(N-2)) is determined by u mod p^N
        let out_digits = if self.p == 2 {
            self.digits - 2
        } else {
            self.digits
        };
        let r = unit_sqrt(&self.unit, self.p, out_digits.max(1))?;
        Ok(Self::normalized(
            self.p,
            self.valuation / 2,
            r,
            out_digits.max(1),
        ))
    }
}

impl fmt::Display for PadicApprox {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.valuation == 0 {
            write!(f, "{}", self.unit)?;
        } else {
            write!(f, "{}*{}^{}", self.unit, self.p, self.valuation)?;
        }
        write!(f, " + O({}^{})", self.p, self.absolute_precision())
    }
}

/// Square root of a unit modulo `p^digits`, with the canonical choice of sign:
/// smallest first digit, then smallest second digit. This choice is
/// independent of the precision.
fn unit_sqrt(u: &BigInt, p: u64, digits: u32) -> Result<BigInt> {
    let m = PadicApprox::modulus(p, digits);
    let root = if p == 2 {
        let target = digits + 2;
        let modulus = PadicApprox::modulus(2, target);
        let u = u.mod_floor(&modulus);
        if (&u % 8u32) != BigInt::one() {
            return Err(Error::NotASquare);
        }
        let mut r = BigInt::one();
        for k in 3..target {
            let check = PadicApprox::modulus(2, k + 1);
            if !(&r * &r - &u).is_multiple_of(&check) {
                r += BigInt::one() << (k - 1);
            }
        }
        r
    } else {
        let u0 = (u % BigInt::from(p)).to_u64().expect("residue fits");
        if pow_mod(u0, (p - 1) / 2, p) != 1 {
            return Err(Error::NotASquare);
        }
        let mut r = BigInt::from(tonelli_shanks(u0, p));
        let mut known = 1u32;
        while known < digits {
            known = (known * 2).min(digits);
            let mk = PadicApprox::modulus(p, known);
            let inv = mod_inverse(&(BigInt::from(2) * &r), &mk).expect("2r is a unit");
            r = (&r - (&r * &r - u) * inv).mod_floor(&mk);
        }
        r
    };
    let r = root.mod_floor(&m);
    let other = (-&r).mod_floor(&m);
    let (pb, pb2) = (BigInt::from(p), BigInt::from(p * p));
    let key = |x: &BigInt| (x.mod_floor(&pb), x.mod_floor(&pb2));
    Ok(if key(&other) < key(&r) { other } else { r })
}

fn tonelli_shanks(n: u64, p: u64) -> u64 {
    if n == 0 {
        return 0;
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % p as u128) as u64;
    let (mut q, mut s) = (p - 1, 0u32);
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let z = (2..p)
        .find(|&z| pow_mod(z, (p - 1) / 2, p) == p - 1)
        .expect("non-residue");
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(n, q, p);
    let mut r = pow_mod(n, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut t2 = t;
        while t2 != 1 {
            t2 = mul(t2, t2);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul(b, b);
        t = mul(t, c);
        r = mul(r, b);
    }
    r
}

/// Square root of a nonzero rational square in `Q_p`, to `ctx.precision()`
/// significant digits: `r^2 = x mod p^(v(x) + N)`.
pub fn hensel_sqrt(x: &Rational, ctx: &PadicContext) -> Result<PadicApprox> {
    let v = valuation(x, ctx).ok_or(Error::ZeroInput)?;
    if v % 2 != 0 {
        return Err(Error::NotASquare);
    }
    let n = ctx.precision();
    let extra = if ctx.is_odd() { 0 } else { 2 };
    let u = residue_mod(
        &unit_part(x, ctx),
        &PadicApprox::modulus(ctx.p(), n + extra),
    );
    let r = unit_sqrt(&u, ctx.p(), n)?;
    Ok(PadicApprox::normalized(ctx.p(), v / 2, r, n))
}

/// Exact square root of a rational, when it is a rational square.
pub(crate) fn rational_sqrt(x: &Rational) -> Option<Rational> {
    if x.is_negative() {
        return None;
    }
    let n = x.numer().sqrt();
    let d = x.denom().sqrt();
    (&n * &n == *x.numer() && &d * &d == *x.denom()).then(|| Rational::new(n, d))
}
