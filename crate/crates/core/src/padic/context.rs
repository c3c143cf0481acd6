use num_bigint::BigInt;
use num_traits::Pow;

use crate::error::{Error, Result};

/// Smallest accepted working precision, in p-adic digits.
pub const MIN_PRECISION: u32 = 8;

/// Precision escalation stops at this many digits.
pub const PRECISION_CAP: u32 = 1 << 12;

/// The prime, the working precision for approximate results, and (implicitly)
/// the Haar normalization `mu(Z_p^*) = 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PadicContext {
    p: u64,
    precision: u32,
    prime: BigInt,
}

impl PadicContext {
    pub fn new(p: u64, precision: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if precision < MIN_PRECISION {
            return Err(Error::PrecisionTooLow(precision));
        }
        Ok(Self {
            p,
            precision,
            prime: BigInt::from(p),
        })
    }

    /// Context with 32 digits of working precision.
    pub fn with_prime(p: u64) -> Result<Self> {
        Self::new(p, 32)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn prime(&self) -> &BigInt {
        &self.prime
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_odd(&self) -> bool {
        self.p != 2
    }

    /// Same prime, different precision (clamped to the accepted range).
    pub fn with_precision(&self, precision: u32) -> Self {
        Self {
            precision: precision.clamp(MIN_PRECISION, PRECISION_CAP),
            ..self.clone()
        }
    }

    /// `p^k` as a big integer.
    pub fn pow(&self, k: u32) -> BigInt {
        Pow::pow(&self.prime, k)
    }
}

/// Runs `f`, doubling the working precision on [`Error::PrecisionExhausted`]
/// until it succeeds or [`PRECISION_CAP`] is reached.
pub fn with_precision_escalation<T>(
    ctx: &PadicContext,
    mut f: impl FnMut(&PadicContext) -> Result<T>,
) -> Result<T> {
    let mut current = ctx.clone();
    loop {
        match f(&current) {
            Err(Error::PrecisionExhausted { .. }) if current.precision < PRECISION_CAP => {
                current = current.with_precision(current.precision.saturating_mul(2));
            }
            other => return other,
        }
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub(crate) fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for 64-bit integers.
pub(crate) fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    const SMALL: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    for q in SMALL {
        if n.is_multiple_of(q) {
            return n == q;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in SMALL {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}
