//! Admissible square classes (those not containing -1) and their norm groups
//! `K_alpha = {alpha x^2 + y^2}`, the "positive numbers" of each disc.

use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::padic::{
    hilbert_symbol_classes, power_of_p, PadicContext, RadiusExponent, Rational, SquareClass,
};

/// A square class `alpha` with `-1 ∉ alpha`, with its canonical
/// representative of valuation 0 or 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AlphaClass {
    cls: SquareClass,
    rep: Rational,
}

impl AlphaClass {
    pub fn new(cls: SquareClass, ctx: &PadicContext) -> Result<Self> {
        let minus_one = SquareClass::of(&Rational::from_integer(BigInt::from(-1)), ctx)?;
        if cls == minus_one {
            return Err(Error::NotAdmissible(cls.label().to_string()));
        }
        Ok(Self {
            cls,
            rep: cls.representative(ctx),
        })
    }

    pub fn parse(label: &str, ctx: &PadicContext) -> Result<Self> {
        Self::new(SquareClass::parse(label, ctx)?, ctx)
    }

    pub fn class(&self) -> SquareClass {
        self.cls
    }

    pub fn rep(&self) -> &Rational {
        &self.rep
    }

    pub fn has_odd_valuation(&self) -> bool {
        self.cls.has_odd_valuation()
    }

    pub fn label(&self) -> &'static str {
        self.cls.label()
    }

    pub fn norm_group(&self) -> NormGroup {
        NormGroup {
            alpha: self.clone(),
        }
    }
}

impl fmt::Display for AlphaClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// All admissible classes: 3 for odd `p`, 7 for `p = 2`.
pub fn admissible_classes(ctx: &PadicContext) -> Vec<AlphaClass> {
    SquareClass::all(ctx)
        .into_iter()
        .filter_map(|c| AlphaClass::new(c, ctx).ok())
        .collect()
}

/// The norm group `K_alpha` of `Q_p(sqrt(-alpha))`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormGroup {
    alpha: AlphaClass,
}

impl NormGroup {
    pub fn alpha(&self) -> &AlphaClass {
        &self.alpha
    }

    fn minus_alpha(&self, ctx: &PadicContext) -> SquareClass {
        let minus_one =
            SquareClass::of(&Rational::from_integer(BigInt::from(-1)), ctx).expect("nonzero");
        minus_one.mul(self.alpha.cls)
    }

    pub fn contains_class(&self, z: SquareClass, ctx: &PadicContext) -> bool {
        hilbert_symbol_classes(self.minus_alpha(ctx), z, ctx) == 1
    }

    /// Whether `z` is of the form `alpha x^2 + y^2`.
    pub fn contains(&self, z: &Rational, ctx: &PadicContext) -> Result<bool> {
        Ok(self.contains_class(SquareClass::of(z, ctx)?, ctx))
    }

    pub fn contains_minus_one(&self, ctx: &PadicContext) -> bool {
        let minus_one =
            SquareClass::of(&Rational::from_integer(BigInt::from(-1)), ctx).expect("nonzero");
        self.contains_class(minus_one, ctx)
    }

    /// Measure of `B ∩ K_alpha` for the symmetric ball `B` of radius `p^t`,
    /// with `mu(Z_p^*) = 1`. Each shell `p^k Z_p^*` contributes the fraction of
    /// its unit classes lying in `K_alpha`.
    pub fn ball_measure(&self, t: RadiusExponent, ctx: &PadicContext) -> Rational {
        let t = match t {
            RadiusExponent::NegInfinity => return Rational::zero(),
            RadiusExponent::Finite(t) => t,
        };
        let units: Vec<i64> = if ctx.is_odd() {
            vec![1, crate::padic::smallest_nonresidue(ctx.p()) as i64]
        } else {
            vec![1, 3, 5, 7]
        };
        let fraction = |shift: i64, filter: &dyn Fn(i64) -> bool| {
            let chosen: Vec<i64> = units.iter().copied().filter(|&u| filter(u)).collect();
            let inside = chosen
                .iter()
                .filter(|&&u| {
                    let z = power_of_p(shift, ctx) * Rational::from_integer(BigInt::from(u));
                    self.contains(&z, ctx).expect("nonzero")
                })
                .count();
            Rational::new(BigInt::from(inside), BigInt::from(units.len()))
        };
        if t >= 0 {
            (-t..=t).map(|k| fraction(k, &|_| true)).sum()
        } else {
            // the ball is 1 + p^m Z_p, of measure p^(1-m)/(p-1); for odd p it
            // consists of squares, for p = 2 only of the units = 1 mod 2^m
            let m = -t;
            let full = crate::padic::haar_ball_measure(t, ctx);
            if ctx.is_odd() || m >= 3 {
                full
            } else {
                let modulus = 1i64 << m;
                let share = fraction(0, &|u| u % modulus == 1);
                let classes = units.iter().filter(|&&u| u % modulus == 1).count();
                full * share * Rational::new(BigInt::from(units.len()), BigInt::from(classes))
            }
        }
    }
}

pub fn in_k(z: &Rational, alpha: &AlphaClass, ctx: &PadicContext) -> Result<bool> {
    alpha.norm_group().contains(z, ctx)
}

pub fn minus_one_in_k(alpha: &AlphaClass, ctx: &PadicContext) -> bool {
    alpha.norm_group().contains_minus_one(ctx)
}

/// Number of sheets of the hyperboloid `SO(Q).v_beta`: one iff `-1 ∈ beta`.
pub fn hyperboloid_sheets(beta: SquareClass, ctx: &PadicContext) -> u8 {
    let minus_one =
        SquareClass::of(&Rational::from_integer(BigInt::from(-1)), ctx).expect("nonzero");
    if beta == minus_one {
        1
    } else {
        2
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::rat;

    fn ctx(p: u64) -> PadicContext {
        PadicContext::with_prime(p).unwrap()
    }

    fn labels(p: u64) -> Vec<&'static str> {
        admissible_classes(&ctx(p))
            .iter()
            .map(|a| a.label())
            .collect()
    }

    #[test]
    fn admissible_lists() {
        assert_eq!(labels(5), vec!["eps", "p", "eps*p"]);
        assert_eq!(labels(7), vec!["1", "p", "eps*p"]);
        assert_eq!(labels(2).len(), 7);
        assert!(!labels(2).contains(&"-1"));
    }

    #[test]
    fn membership_examples() {
        let c = ctx(5);
        let eps = AlphaClass::parse("eps", &c).unwrap();
        assert!(in_k(&rat(-1, 1), &eps, &c).unwrap());
        assert!(!in_k(&rat(5, 1), &eps, &c).unwrap());
        assert!(in_k(&rat(49, 1), &eps, &c).unwrap());
        assert!(minus_one_in_k(&eps, &c));
        let c7 = ctx(7);
        assert!(minus_one_in_k(&AlphaClass::parse("1", &c7).unwrap(), &c7));
        let c3 = ctx(3);
        assert!(!minus_one_in_k(&AlphaClass::parse("p", &c3).unwrap(), &c3));
        assert!(matches!(
            AlphaClass::parse("1", &c),
            Err(Error::NotAdmissible(_))
        ));
    }

    #[test]
    fn sheets() {
        let c5 = ctx(5);
        assert_eq!(
            hyperboloid_sheets(SquareClass::parse("1", &c5).unwrap(), &c5),
            1
        );
        assert_eq!(
            hyperboloid_sheets(SquareClass::parse("eps", &c5).unwrap(), &c5),
            2
        );
        let c7 = ctx(7);
        assert_eq!(
            hyperboloid_sheets(SquareClass::parse("eps", &c7).unwrap(), &c7),
            1
        );
    }

    #[test]
    fn ball_measures_in_k() {
        let c = ctx(5);
        let even = AlphaClass::parse("eps", &c).unwrap().norm_group();
        let odd = AlphaClass::parse("p", &c).unwrap().norm_group();
        let f = RadiusExponent::Finite;
        assert_eq!(even.ball_measure(f(2), &c), rat(3, 1));
        assert_eq!(even.ball_measure(f(0), &c), rat(1, 1));
        assert_eq!(odd.ball_measure(f(2), &c), rat(5, 2));
        assert_eq!(odd.ball_measure(f(0), &c), rat(1, 2));
        assert_eq!(odd.ball_measure(f(-1), &c), rat(1, 4));
        assert_eq!(
            even.ball_measure(RadiusExponent::NegInfinity, &c),
            rat(0, 1)
        );
    }
}
