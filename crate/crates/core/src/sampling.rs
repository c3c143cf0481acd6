//! Seeded random generators for test corpora: disc points built from normal
//! forms, group elements of bounded height and words in `SO(Q)`.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rand::Rng;

use crate::classes::AlphaClass;
use crate::disc::DiscPoint;
use crate::geometry::{adjoint, Pgl2, So3, Vec3};
use crate::padic::{power_of_p, PadicContext, Rational};
use crate::triangle::{in_triangle, TrianglePoint};

/// Bounds on the generated data.
#[derive(Clone, Copy, Debug)]
pub struct Height {
    /// Bound on small integers.
    pub int: i64,
    /// Bound on the exponents of `p` mixed into entries.
    pub exp: i64,
}

impl Default for Height {
    fn default() -> Self {
        Self { int: 6, exp: 2 }
    }
}

fn r(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn random_rational<R: Rng>(rng: &mut R, h: Height, ctx: &PadicContext) -> Rational {
    let num = rng.gen_range(-h.int..=h.int);
    let den = rng.gen_range(1..=h.int);
    r(num) / r(den) * power_of_p(rng.gen_range(-h.exp..=h.exp), ctx)
}

pub fn random_nonzero_rational<R: Rng>(rng: &mut R, h: Height, ctx: &PadicContext) -> Rational {
    loop {
        let x = random_rational(rng, h, ctx);
        if !x.is_zero() {
            return x;
        }
    }
}

/// A small integer entry, multiplied by `p^k` one time in three.
fn entry<R: Rng>(rng: &mut R, h: Height, ctx: &PadicContext) -> Rational {
    let base = r(rng.gen_range(-h.int..=h.int));
    if rng.gen_ratio(1, 3) {
        base * power_of_p(rng.gen_range(-h.exp..=h.exp), ctx)
    } else {
        base
    }
}

pub fn random_pgl2<R: Rng>(rng: &mut R, h: Height, ctx: &PadicContext) -> Pgl2 {
    loop {
        let [a, b, c, d] = std::array::from_fn(|_| entry(rng, h, ctx));
        if let Ok(g) = Pgl2::new(a, b, c, d) {
            return g;
        }
    }
}

/// `s = ±(a/b) p^k` with `a, b` prime to `p`.
pub fn random_normal_parameter<R: Rng>(rng: &mut R, h: Height, ctx: &PadicContext) -> Rational {
    let p = ctx.p() as i64;
    let unit = |rng: &mut R| loop {
        let u = rng.gen_range(1..=h.int.max(p + 1));
        if u % p != 0 {
            return r(u);
        }
    };
    let sign = if rng.gen_bool(0.5) { 1 } else { -1 };
    r(sign) * unit(rng) / unit(rng) * power_of_p(rng.gen_range(-h.exp..=h.exp), ctx)
}

/// `g . (alpha s^2, 0, 1)` for random `s` and `g`; members of the disc by
/// construction.
pub fn random_disc_point<R: Rng>(
    rng: &mut R,
    alpha: &AlphaClass,
    h: Height,
    ctx: &PadicContext,
) -> DiscPoint {
    let s = random_normal_parameter(rng, h, ctx);
    let g = random_pgl2(rng, h, ctx);
    let v = Vec3::new(alpha.rep() * &s * &s, r(0), r(1));
    DiscPoint::new(g.congruence(&v), alpha, ctx).expect("isometries preserve the disc")
}

/// A point on the standard long line `{(alpha x^2, 0, 1)}`.
pub fn random_standard_line_point<R: Rng>(
    rng: &mut R,
    alpha: &AlphaClass,
    h: Height,
    ctx: &PadicContext,
) -> DiscPoint {
    let x = random_normal_parameter(rng, h, ctx);
    DiscPoint::new(Vec3::new(alpha.rep() * &x * &x, r(0), r(1)), alpha, ctx).expect("in the disc")
}

/// A point `((1 - ay) alpha, y, 1 + ay)` on a short line through `v_alpha`,
/// with `a` a unit and `|y| <= p^-exp`. That family can miss the short lines
/// for `p = 2`, so after a few misses any disc point on a short line is taken.
pub fn random_short_partner<R: Rng>(
    rng: &mut R,
    alpha: &AlphaClass,
    h: Height,
    ctx: &PadicContext,
) -> DiscPoint {
    let base = DiscPoint::base(alpha);
    for attempt in 0.. {
        let w = if attempt < 64 {
            let a = random_normal_parameter(rng, Height { exp: 0, ..h }, ctx);
            let y = random_normal_parameter(rng, h, ctx).abs() * power_of_p(h.exp, ctx);
            let ay = &a * &y;
            let v2 = Vec3::new((r(1) - &ay) * alpha.rep(), y, r(1) + ay);
            match DiscPoint::new(v2, alpha, ctx) {
                Ok(w) => w,
                Err(_) => continue,
            }
        } else {
            random_disc_point(rng, alpha, h, ctx)
        };
        if crate::disc::classify_line(&base, &w, ctx) == Ok(crate::disc::LineKind::Short) {
            return w;
        }
    }
    unreachable!("the loop only exits by returning")
}

/// `g . v_alpha` and `g . w` for `w` from [`random_short_partner`].
pub fn random_short_pair<R: Rng>(
    rng: &mut R,
    alpha: &AlphaClass,
    h: Height,
    ctx: &PadicContext,
) -> (DiscPoint, DiscPoint) {
    let g = random_pgl2(rng, h, ctx);
    let w = random_short_partner(rng, alpha, h, ctx);
    (DiscPoint::base(alpha).transform(&g), w.transform(&g))
}

/// A point of the triangle with exponents in `[-3, 3]`, or those of `near`,
/// and square units close to 1 mixed in.
pub fn random_triangle_point<R: Rng>(
    rng: &mut R,
    near: Option<&TrianglePoint>,
    ctx: &PadicContext,
) -> TrianglePoint {
    let p = ctx.p() as i64;
    let unit = |rng: &mut R| loop {
        let u = rng.gen_range(1..4 * p);
        if u % p != 0 {
            let t = r(1) + power_of_p(rng.gen_range(0..3), ctx) * r(rng.gen_range(0..p));
            return r(u * u) * &t * &t;
        }
    };
    let (n1, n2) = match near {
        Some(q) => (q.n1(), q.n2()),
        None => (rng.gen_range(-3..=3), rng.gen_range(-3..=3)),
    };
    let y = power_of_p(rng.gen_range(-2..=2), ctx) * r(rng.gen_range(1..20));
    let v = Vec3::new(
        power_of_p(n1, ctx) * unit(rng) * &y,
        y.clone(),
        power_of_p(n2, ctx) * unit(rng) * &y,
    );
    in_triangle(&v, ctx)
        .expect("nonzero")
        .expect("square units")
}

/// A word of `len` random generators `n_minus`, `h`, `n_plus` and `Ad(g)`.
pub fn random_so3_word<R: Rng>(rng: &mut R, len: usize, h: Height, ctx: &PadicContext) -> So3 {
    let mut m = So3::identity();
    for _ in 0..len {
        let factor = match rng.gen_range(0..4) {
            0 => So3::n_minus(&random_rational(rng, h, ctx)),
            1 => So3::n_plus(&random_rational(rng, h, ctx)),
            2 => So3::h(&random_nonzero_rational(rng, h, ctx)).expect("nonzero"),
            _ => adjoint(&random_pgl2(rng, h, ctx)).expect("invertible"),
        };
        m = &m * &factor;
    }
    m
}
