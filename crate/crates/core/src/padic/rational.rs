use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::PadicContext;
use crate::error::{Error, Result};

/// Exact rational numbers, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Shorthand for `n/d`.
pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// `v_p(n)`, or `None` for `n = 0`.
pub fn int_valuation(n: &BigInt, p: &BigInt) -> Option<i64> {
    if n.is_zero() {
        return None;
    }
    let mut k = 0;
    let mut m = n.clone();
    loop {
        let (q, r) = m.div_rem(p);
        if !r.is_zero() {
            return Some(k);
        }
        m = q;
        k += 1;
    }
}

/// `v_p(x)`; `None` stands for `+infinity` (x = 0).
pub fn valuation(x: &Rational, ctx: &PadicContext) -> Option<i64> {
    let p = ctx.prime();
    let num = int_valuation(x.numer(), p)?;
    // lowest terms: at most one of numerator and denominator is divisible by p
    let den = int_valuation(x.denom(), p).unwrap_or(0);
    Some(num - den)
}

/// `x / p^{v_p(x)}`, a p-adic unit. Zero for zero.
pub fn unit_part(x: &Rational, ctx: &PadicContext) -> Rational {
    match valuation(x, ctx) {
        None => Rational::zero(),
        Some(v) => x * power_of_p(-v, ctx),
    }
}

/// `|x|_p = p^{-v_p(x)}`, with `|0| = 0`.
pub fn norm(x: &Rational, ctx: &PadicContext) -> Rational {
    match valuation(x, ctx) {
        None => Rational::zero(),
        Some(v) => power_of_p(-v, ctx),
    }
}

/// `p^k` as a rational, for any integer `k`.
pub fn power_of_p(k: i64, ctx: &PadicContext) -> Rational {
    let mag = ctx.pow(k.unsigned_abs() as u32);
    if k >= 0 {
        Rational::from_integer(mag)
    } else {
        Rational::new(BigInt::one(), mag)
    }
}

/// Parses `"n"` or `"n/d"`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Parse(s.to_string());
    match s.split_once('/') {
        None => s
            .parse::<BigInt>()
            .map(Rational::from_integer)
            .map_err(|_| bad()),
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
    }
}

/// `"n"` for integers, `"n/d"` otherwise.
pub fn format_rational(x: &Rational) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Residue of a p-integral rational modulo `m` (denominator coprime to `m`).
pub(crate) fn residue_mod(x: &Rational, m: &BigInt) -> BigInt {
    let den_inv = mod_inverse(&x.denom().mod_floor(m), m).expect("denominator is a unit");
    (x.numer().mod_floor(m) * den_inv).mod_floor(m)
}

pub(crate) fn mod_inverse(a: &BigInt, m: &BigInt) -> Option<BigInt> {
    let g = a.extended_gcd(m);
    if !g.gcd.abs().is_one() {
        return None;
    }
    Some(g.x.mod_floor(m))
}
