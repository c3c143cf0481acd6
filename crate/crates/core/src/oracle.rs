//! Definition-level Hilbert distance: the smallest symmetric ball containing
//! the cross-ratios `[phi, phi', v, w]` over a finite sample of the dual.
//!
//! Nothing here uses the closed forms of [`crate::disc`]; the two are
//! compared in the test suites.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use crate::classes::AlphaClass;
use crate::disc::in_disc;
use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::padic::{int_valuation, valuation, PadicContext, RadiusExponent, Rational, SquareClass};

/// `[phi, phi', v, v2] = phi(v2)/phi(v) * phi'(v)/phi'(v2)` with
/// `phi = B(phi_vec, .)`.
pub fn cross_ratio(phi_vec: &Vec3, phi2_vec: &Vec3, v: &Vec3, v2: &Vec3) -> Result<Rational> {
    let den1 = phi_vec.bpolar(v);
    let den2 = phi2_vec.bpolar(v2);
    if den1.is_zero() || den2.is_zero() {
        return Err(Error::ZeroDenominator);
    }
    Ok(phi_vec.bpolar(v2) / den1 * phi2_vec.bpolar(v) / den2)
}

/// A sampled dual vector with small integer entries.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DualVector(pub [i128; 3]);

impl DualVector {
    pub fn to_vec3(self) -> Vec3 {
        let c = self.0.map(|e| Rational::from_integer(BigInt::from(e)));
        let [x, y, z] = c;
        Vec3::new(x, y, z)
    }
}

/// Cone points `(a^2, ab, b^2)` for `[a:b]` in `P^1(Z/p^d)`.
#[derive(Clone, Debug)]
pub struct DualSample {
    pub depth: u32,
    pub points: Vec<DualVector>,
}

fn cone_point(a: i128, b: i128) -> DualVector {
    DualVector([a * a, a * b, b * b])
}

/// Samples of the dual `C_alpha` (up to `K_alpha`-scaling the same set of
/// projective points for every `alpha`) over the charts `[1:b]` and
/// `[p a':1]`, which together cover `P^1(Z/p^d)`. Samples are nested in `d`.
pub fn sample_dual(depth: u32, ctx: &PadicContext) -> DualSample {
    assert!(depth >= 1, "sampling depth must be positive");
    let p = ctx.p() as i128;
    let q = p.pow(depth);
    let mut points: Vec<DualVector> = (0..q).map(|b| cone_point(1, b)).collect();
    points.extend((0..q / p).map(|a| cone_point(p * a, 1)));
    DualSample { depth, points }
}

/// Residue arithmetic modulo `p^L` with `p^L < 2^63`; valuations below `L`
/// are exact, larger ones fall back to big integers.
struct Residues {
    p: u64,
    m: u64,
}

impl Residues {
    fn new(p: u64) -> Self {
        let mut m = p;
        while let Some(next) = m.checked_mul(p).filter(|&x| x < 1 << 62) {
            m = next;
        }
        Self { p, m }
    }

    fn reduce(&self, x: &BigInt) -> u64 {
        x.mod_floor(&BigInt::from(self.m))
            .to_u64()
            .expect("reduced")
    }

    fn reduce_small(&self, x: i128) -> u64 {
        x.rem_euclid(self.m as i128) as u64
    }

    fn mul(&self, a: u64, b: u64) -> u64 {
        ((a as u128 * b as u128) % self.m as u128) as u64
    }

    fn sub(&self, a: u64, b: u64) -> u64 {
        (a + self.m - b) % self.m
    }

    /// `B(w, v)` modulo `p^L` for residues `v`.
    fn pairing(&self, w: &DualVector, v: &[u64; 3]) -> u64 {
        let w = w.0.map(|e| self.reduce_small(e));
        let a = self.mul(w[0], v[2]);
        let b = self.mul(w[2], v[0]);
        let c = self.mul(self.mul(2, w[1]), v[1]);
        self.sub((a + b) % self.m, c)
    }

    /// Valuation of a residue, or `None` when it vanishes modulo `p^L`.
    fn valuation(&self, mut x: u64) -> Option<i64> {
        if x == 0 {
            return None;
        }
        let mut k = 0;
        while x.is_multiple_of(self.p) {
            x /= self.p;
            k += 1;
        }
        Some(k)
    }
}

fn exact_pairing(w: &DualVector, v: &[BigInt; 3]) -> BigInt {
    let w = w.0.map(BigInt::from);
    &w[0] * &v[2] + &w[2] * &v[0] - BigInt::from(2) * &w[1] * &v[1]
}

/// Pairing data of one functional: residues and exact valuations of
/// `N = B(w, v2)` and `D = B(w, v)`.
struct Pairing {
    w: DualVector,
    n: u64,
    d: u64,
    vd: i64,
}

/// Radius exponent of the smallest symmetric ball containing all
/// cross-ratios `f_i / f_j` with `f_i = B(w_i, v2) / B(w_i, v)`.
fn cross_ratio_exponent<'a>(
    sample: impl Iterator<Item = &'a DualVector>,
    v: &Vec3,
    v2: &Vec3,
    ctx: &PadicContext,
) -> RadiusExponent {
    let res = Residues::new(ctx.p());
    let (ev, ev2) = (v.primitive(), v2.primitive());
    let (rv, rv2) = (
        ev.each_ref().map(|x| res.reduce(x)),
        ev2.each_ref().map(|x| res.reduce(x)),
    );
    let p = ctx.prime();
    let exact_val = |w: &DualVector, e: &[BigInt; 3]| int_valuation(&exact_pairing(w, e), p);

    let mut refs: HashMap<i64, Pairing> = HashMap::new();
    let mut t = RadiusExponent::NegInfinity;
    let (mut vmin, mut vmax) = (i64::MAX, i64::MIN);
    for w in sample {
        let (n, d) = (res.pairing(w, &rv2), res.pairing(w, &rv));
        let vn = match res.valuation(n) {
            Some(k) => k,
            None => match exact_val(w, &ev2) {
                Some(k) => k,
                None => continue,
            },
        };
        let vd = match res.valuation(d) {
            Some(k) => k,
            None => match exact_val(w, &ev) {
                Some(k) => k,
                None => continue,
            },
        };
        let val = vn - vd;
        vmin = vmin.min(val);
        vmax = vmax.max(val);
        let cur = Pairing { w: *w, n, d, vd };
        let Some(r) = refs.get(&val) else {
            refs.insert(val, cur);
            continue;
        };
        // v(f - f_ref) = v(N D_ref - N_ref D) - v(D) - v(D_ref)
        let cross = res.sub(res.mul(cur.n, r.d), res.mul(r.n, cur.d));
        let vc = match res.valuation(cross) {
            Some(k) => Some(k),
            None => {
                let (n1, d1) = (exact_pairing(&cur.w, &ev2), exact_pairing(&cur.w, &ev));
                let (n0, d0) = (exact_pairing(&r.w, &ev2), exact_pairing(&r.w, &ev));
                int_valuation(&(n1 * d0 - n0 * d1), p)
            }
        };
        if let Some(vc) = vc {
            t = t.max(RadiusExponent::Finite(val - (vc - cur.vd - r.vd)));
        }
    }
    if vmin < vmax {
        t = t.max(RadiusExponent::Finite(vmax - vmin));
    }
    t
}

/// Result of the sampled distance at a given depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleDistance {
    pub value: Rational,
    pub exponent: RadiusExponent,
    pub depth_used: u32,
    /// Whether the value at `depth_used - 1` was the same.
    pub stable: bool,
}

fn check_points(v: &Vec3, v2: &Vec3, alpha: &AlphaClass, ctx: &PadicContext) -> Result<()> {
    if !in_disc(v, alpha, ctx)? || !in_disc(v2, alpha, ctx)? {
        return Err(Error::NotInDisc);
    }
    Ok(())
}

/// The measure in `K_alpha` of the smallest symmetric ball containing the
/// cross-ratios over the depth-`d` sample.
fn value_at(
    v: &Vec3,
    v2: &Vec3,
    alpha: &AlphaClass,
    depth: u32,
    ctx: &PadicContext,
) -> (RadiusExponent, Rational) {
    let sample = sample_dual(depth, ctx);
    let t = cross_ratio_exponent(sample.points.iter(), v, v2, ctx);
    (t, alpha.norm_group().ball_measure(t, ctx))
}

pub fn oracle_distance(
    v: &Vec3,
    v2: &Vec3,
    alpha: &AlphaClass,
    depth: u32,
    ctx: &PadicContext,
) -> Result<OracleDistance> {
    check_points(v, v2, alpha, ctx)?;
    let depth = depth.max(1);
    let (exponent, value) = value_at(v, v2, alpha, depth, ctx);
    let stable = depth > 1 && value_at(v, v2, alpha, depth - 1, ctx).1 == value;
    Ok(OracleDistance {
        value,
        exponent,
        depth_used: depth,
        stable,
    })
}

/// How far `v` sits from the base point: with `n = floor(v(Q/z^2) / 2)` and
/// `c = y/z`, the tree distance from `Z_p^2` to the lattice spanned by
/// `(p^n, 0)` and `(c, 1)`.
pub fn location_height(v: &Vec3, ctx: &PadicContext) -> i64 {
    let z2 = &v.z * &v.z;
    if z2.is_zero() {
        return 0;
    }
    let n = valuation(&(v.q() / z2), ctx).map_or(0, |k| k.div_euclid(2));
    let vc = valuation(&(&v.y / &v.z), ctx).unwrap_or(i64::MAX);
    n - 2 * n.min(vc).min(0)
}

/// Depth at which escalation starts: two more than the larger
/// [`location_height`]. On every corpus checked, the sample of depth
/// `height + 1` already attains the limit value; the bound is empirical.
pub fn starting_depth(v: &Vec3, v2: &Vec3, ctx: &PadicContext) -> u32 {
    let h = location_height(v, ctx).max(location_height(v2, ctx));
    (h.max(0) as u32 + 2).max(2)
}

/// Escalates the depth from [`starting_depth`] until two consecutive values
/// agree, up to `max_depth`.
pub fn stabilized_oracle_distance(
    v: &Vec3,
    v2: &Vec3,
    alpha: &AlphaClass,
    max_depth: u32,
    ctx: &PadicContext,
) -> Result<OracleDistance> {
    check_points(v, v2, alpha, ctx)?;
    let mut depth = starting_depth(v, v2, ctx).min(max_depth.max(2));
    let mut value = value_at(v, v2, alpha, depth - 1, ctx).1;
    loop {
        let (exponent, next) = value_at(v, v2, alpha, depth, ctx);
        let stable = next == value;
        value = next;
        if stable || depth >= max_depth {
            return Ok(OracleDistance {
                value,
                exponent,
                depth_used: depth,
                stable,
            });
        }
        depth += 1;
    }
}

/// Whether `B(v, w) ∈ K_alpha` for every sampled cone point `w`: a finite
/// necessary condition for `v ∈ D_alpha`, sufficient once deep enough.
pub fn oracle_in_dual_check(v: &Vec3, alpha: &AlphaClass, depth: u32, ctx: &PadicContext) -> bool {
    oracle_in_dual_check_with(&sample_dual(depth.max(1), ctx), v, alpha, ctx)
}

/// [`oracle_in_dual_check`] against a prebuilt sample.
pub fn oracle_in_dual_check_with(
    sample: &DualSample,
    v: &Vec3,
    alpha: &AlphaClass,
    ctx: &PadicContext,
) -> bool {
    if v.is_zero() {
        return false;
    }
    // an isotropic v pairs to zero with its own direction (a^2, ab, b^2) of
    // the semi-cone, which no chart sample need contain
    if v.q().is_zero() {
        return false;
    }
    let k = alpha.norm_group();
    let ev = v.primitive();
    // v = scale * ev
    let (coord, prim) = v
        .coords()
        .into_iter()
        .zip(&ev)
        .find(|(c, _)| !c.is_zero())
        .expect("nonzero vector");
    let scale =
        SquareClass::of(&(coord / Rational::from_integer(prim.clone())), ctx).expect("nonzero");
    let allowed: Vec<SquareClass> = SquareClass::all(ctx)
        .into_iter()
        .filter(|c| k.contains_class(scale.mul(*c), ctx))
        .collect();
    let small: Option<Vec<i128>> = ev.iter().map(|x| x.to_i64().map(i128::from)).collect();
    sample.points.iter().all(|w| {
        let cls = match &small {
            // |w_i| < 2^62 and |v_i| < 2^63, so the products fit
            Some(e) => {
                let [a, b, c] = w.0;
                let (x, y, z) = (e[0], e[1], e[2]);
                a.checked_mul(z)
                    .and_then(|t| c.checked_mul(x).and_then(|u| t.checked_add(u)))
                    .and_then(|t| {
                        b.checked_mul(y)
                            .and_then(|u| u.checked_mul(2))
                            .and_then(|u| t.checked_sub(u))
                    })
                    .map(|n| SquareClass::of_int(n, ctx))
                    .unwrap_or_else(|| {
                        SquareClass::of(&Rational::from_integer(exact_pairing(w, &ev)), ctx)
                    })
            }
            None => SquareClass::of(&Rational::from_integer(exact_pairing(w, &ev)), ctx),
        };
        cls.is_ok_and(|c| allowed.contains(&c))
    })
}

/// Depth at which [`oracle_in_dual_check`] resolves `v`.
pub fn dual_check_depth(v: &Vec3, ctx: &PadicContext) -> u32 {
    let vals: Vec<i64> = v
        .primitive()
        .iter()
        .filter_map(|c| int_valuation(c, ctx.prime()))
        .collect();
    let spread = vals.iter().max().unwrap_or(&0) - vals.iter().min().unwrap_or(&0);
    (spread as u32 + 2).max(3)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::{ball_exponent, rat, Qp};

    fn setup() -> (PadicContext, AlphaClass) {
        let ctx = PadicContext::with_prime(5).unwrap();
        let alpha = AlphaClass::parse("eps", &ctx).unwrap();
        (ctx, alpha)
    }

    /// All ordered pairs, exact rationals.
    fn naive_exponent(
        sample: &DualSample,
        v: &Vec3,
        v2: &Vec3,
        ctx: &PadicContext,
    ) -> RadiusExponent {
        let fs: Vec<Rational> = sample
            .points
            .iter()
            .map(|w| w.to_vec3())
            .filter(|w| !w.bpolar(v).is_zero() && !w.bpolar(v2).is_zero())
            .map(|w| w.bpolar(v2) / w.bpolar(v))
            .collect();
        let mut t = RadiusExponent::NegInfinity;
        for a in &fs {
            for b in &fs {
                t = t.max(ball_exponent(&Qp::Exact(a / b), ctx).unwrap());
            }
        }
        t
    }

    #[test]
    fn cross_ratio_examples() {
        let (ctx, alpha) = setup();
        let _ = ctx;
        let (phi, phi2) = (Vec3::from_ints(1, 0, 0), Vec3::from_ints(0, 0, 1));
        let a = alpha.rep().clone();
        let v = Vec3::new(a.clone(), rat(0, 1), rat(1, 1));
        let x = rat(5, 3);
        let w = Vec3::new(&a * &x * &x, rat(0, 1), rat(1, 1));
        let cr = cross_ratio(&phi, &phi2, &v, &w).unwrap();
        assert_eq!(cr, (&x * &x).recip());
        assert_eq!(cross_ratio(&phi2, &phi, &v, &w).unwrap(), &x * &x);
        assert_eq!(cross_ratio(&phi, &phi, &v, &w).unwrap(), rat(1, 1));
        let scaled = cross_ratio(&phi.scale(&rat(7, 1)), &phi2, &v.scale(&rat(-3, 1)), &w).unwrap();
        assert_eq!(scaled, cr);
        let iso = Vec3::from_ints(1, 0, 0);
        assert_eq!(
            cross_ratio(&phi, &phi2, &iso, &w),
            Err(Error::ZeroDenominator)
        );
    }

    #[test]
    fn cocycle() {
        let (phi, phi2) = (Vec3::from_ints(1, 2, 4), Vec3::from_ints(9, -3, 1));
        let x = Vec3::from_ints(2, 0, 1);
        let y = Vec3::from_ints(-18, 5, 11);
        let z = Vec3::from_ints(50, 1, 3);
        let lhs =
            cross_ratio(&phi, &phi2, &x, &y).unwrap() * cross_ratio(&phi, &phi2, &y, &z).unwrap();
        assert_eq!(lhs, cross_ratio(&phi, &phi2, &x, &z).unwrap());
    }

    #[test]
    fn sample_sizes() {
        let c3 = PadicContext::with_prime(3).unwrap();
        assert_eq!(sample_dual(1, &c3).points.len(), 4);
        assert_eq!(sample_dual(2, &c3).points.len(), 12);
        let s = sample_dual(3, &c3);
        let pts: Vec<Vec3> = s.points.iter().map(|w| w.to_vec3()).collect();
        assert!(pts.contains(&Vec3::from_ints(1, 0, 0)) && pts.contains(&Vec3::from_ints(0, 0, 1)));
        for w in &pts {
            let cls = crate::geometry::semicone_classify(w, &c3).unwrap();
            assert_eq!(cls.map(|c| c.is_square()), Some(true));
        }
    }

    #[test]
    fn spec_pairs() {
        let (ctx, alpha) = setup();
        let v = Vec3::from_ints(2, 0, 1);
        let long = oracle_distance(&v, &Vec3::from_ints(50, 0, 1), &alpha, 3, &ctx).unwrap();
        assert_eq!(long.value, rat(3, 1));
        assert!(long.stable);
        let short = oracle_distance(&v, &Vec3::from_ints(-18, 5, 11), &alpha, 3, &ctx).unwrap();
        assert_eq!(short.value, rat(1, 4));
        assert_eq!(
            oracle_distance(&v, &v, &alpha, 3, &ctx).unwrap().value,
            rat(0, 1)
        );
        assert_eq!(
            oracle_distance(&v, &Vec3::from_ints(1, 0, 1), &alpha, 3, &ctx),
            Err(Error::NotInDisc)
        );
    }

    #[test]
    fn fast_path_matches_naive() {
        let (ctx, _) = setup();
        let pts = [
            Vec3::from_ints(2, 0, 1),
            Vec3::from_ints(50, 0, 1),
            Vec3::from_ints(-18, 5, 11),
            Vec3::from_ints(2 * 625, 3, 1),
            Vec3::from_ints(7, 1, 3),
        ];
        for depth in 1..=3 {
            let s = sample_dual(depth, &ctx);
            for v in &pts {
                for w in &pts {
                    assert_eq!(
                        cross_ratio_exponent(s.points.iter(), v, w, &ctx),
                        naive_exponent(&s, v, w, &ctx),
                        "{v} {w} at depth {depth}"
                    );
                }
            }
        }
    }

    #[test]
    fn monotone_in_depth() {
        let (ctx, alpha) = setup();
        let (v, w) = (Vec3::from_ints(7, 1, 3), Vec3::from_ints(-18, 5, 11));
        let values: Vec<Rational> = (1..=5)
            .map(|d| value_at(&v, &w, &alpha, d, &ctx).1)
            .collect();
        assert!(values.windows(2).all(|p| p[0] <= p[1]));
    }

    #[test]
    fn dual_check_examples() {
        let (ctx, alpha) = setup();
        let base = Vec3::new(alpha.rep().clone(), rat(0, 1), rat(1, 1));
        for d in 1..=4 {
            assert!(oracle_in_dual_check(&base, &alpha, d, &ctx));
        }
        // scaling by y = 5, which is not in K_eps
        assert!(!oracle_in_dual_check(
            &base.scale(&rat(5, 1)),
            &alpha,
            1,
            &ctx
        ));
        assert!(!oracle_in_dual_check(
            &Vec3::from_ints(1, 0, 0),
            &alpha,
            1,
            &ctx
        ));
        assert!(!oracle_in_dual_check(
            &Vec3::from_ints(1, 0, 1),
            &alpha,
            3,
            &ctx
        ));
    }
}
