use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use super::context::pow_mod;
use super::rational::Rational;
use super::{PadicContext, SquareClass};
use crate::error::Result;

/// Legendre symbol `(a | p)` for an odd prime `p`: 0, 1 or -1.
pub fn legendre(a: &BigInt, p: u64) -> i8 {
    let r = a
        .mod_floor(&BigInt::from(p))
        .to_u64()
        .expect("residue fits");
    match pow_mod(r, (p - 1) / 2, p) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// Smallest positive quadratic non-residue modulo an odd prime.
pub fn smallest_nonresidue(p: u64) -> u64 {
    (2..p)
        .find(|&e| pow_mod(e, (p - 1) / 2, p) == p - 1)
        .expect("odd primes have non-residues")
}

/// Hilbert symbol `(a, b)_p`: `+1` iff `z^2 = a x^2 + b y^2` has a nonzero
/// solution in `Q_p`.
pub fn hilbert_symbol(a: &Rational, b: &Rational, ctx: &PadicContext) -> Result<i8> {
    Ok(hilbert_symbol_classes(
        SquareClass::of(a, ctx)?,
        SquareClass::of(b, ctx)?,
        ctx,
    ))
}

/// The Hilbert symbol depends only on the square classes.
pub fn hilbert_symbol_classes(a: SquareClass, b: SquareClass, ctx: &PadicContext) -> i8 {
    let (ra, rb) = (a.representative(ctx), b.representative(ctx));
    let (alpha, beta) = (
        u64::from(a.has_odd_valuation()),
        u64::from(b.has_odd_valuation()),
    );
    let p = ctx.p();
    // units: representatives divided by p when of odd valuation
    let unit = |r: &Rational, odd: u64| -> i64 {
        let n = r.numer().to_i64().expect("small representative");
        if odd == 1 {
            n / p as i64
        } else {
            n
        }
    };
    let (u, v) = (unit(&ra, alpha), unit(&rb, beta));
    if p != 2 {
        let mut sign = 1i8;
        if alpha * beta * ((p - 1) / 2) % 2 == 1 {
            sign = -sign;
        }
        if beta == 1 {
            sign *= legendre(&BigInt::from(u), p);
        }
        if alpha == 1 {
            sign *= legendre(&BigInt::from(v), p);
        }
        sign
    } else {
        let eps = |x: i64| ((x.rem_euclid(8) - 1) / 2) as u64 % 2;
        let omega = |x: i64| {
            let r = x.rem_euclid(8);
            ((r * r - 1) / 8) as u64 % 2
        };
        let e = eps(u) * eps(v) + alpha * omega(v) + beta * omega(u);
        if e % 2 == 0 {
            1
        } else {
            -1
        }
    }
}
