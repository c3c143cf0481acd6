//! The hyperbolic discs `D_alpha`: membership, lines, multiplicative and
//! additive Hilbert distances, normal forms, stabilizers and circles.
//!
//! A vector `v` lies in `D_alpha` iff `Q(v) ∈ alpha` and `x ∈ K_alpha`. Its
//! pairing with the dual cone vector `(a^2, ab, b^2)` is the binary form
//! `x b^2 - 2y ab + z a^2` of determinant `Q(v)`, which is anisotropic and
//! takes values in `x K_alpha`; this turns the universally quantified duality
//! condition into a finite test.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::classes::AlphaClass;
use crate::error::{Error, Result};
use crate::geometry::{Mat3, Pgl2, Vec3};
use crate::padic::{
    haar_ball_measure, smallest_symmetric_ball, valuation, with_precision_escalation, PadicContext,
    Qp, RadiusExponent, Rational, SquareClass,
};

fn r(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// A vector with possibly approximate coordinates.
pub type QpVec3 = [Qp; 3];

pub fn qp_vec(v: &Vec3) -> QpVec3 {
    [
        Qp::Exact(v.x.clone()),
        Qp::Exact(v.y.clone()),
        Qp::Exact(v.z.clone()),
    ]
}

fn qp_combine(terms: &[(&Qp, &Vec3)], ctx: &PadicContext) -> Result<QpVec3> {
    let mut out = [Qp::zero(), Qp::zero(), Qp::zero()];
    for (k, v) in terms {
        for (slot, c) in out.iter_mut().zip(v.coords()) {
            *slot = slot.add(&k.scale(c, ctx), ctx)?;
        }
    }
    Ok(out)
}

/// `B(v, w)` for an exact `v`.
pub fn bpolar_qp(v: &Vec3, w: &QpVec3, ctx: &PadicContext) -> Result<Qp> {
    let a = w[2].scale(&v.x, ctx);
    let b = w[0].scale(&v.z, ctx);
    let c = w[1].scale(&(r(-2) * &v.y), ctx);
    a.add(&b, ctx)?.add(&c, ctx)
}

/// Whether two possibly approximate vectors agree to the known precision.
pub fn qp_vec_agree(a: &QpVec3, b: &QpVec3, ctx: &PadicContext) -> bool {
    a.iter().zip(b).all(|(x, y)| match x.sub(y, ctx) {
        Ok(d) => d.is_zero(),
        Err(Error::PrecisionExhausted { .. }) => true,
        Err(_) => false,
    })
}

/// A point of `D_alpha`, certified on construction.
#[derive(Clone, Debug)]
pub struct DiscPoint {
    v: Vec3,
    alpha: AlphaClass,
}

impl DiscPoint {
    pub fn new(v: Vec3, alpha: &AlphaClass, ctx: &PadicContext) -> Result<Self> {
        if !in_disc(&v, alpha, ctx)? {
            return Err(Error::NotInDisc);
        }
        let z_ok = alpha.norm_group().contains(&v.z, ctx)?;
        assert!(z_ok, "z-coordinate of a disc point lies in K_alpha");
        Ok(Self {
            v,
            alpha: alpha.clone(),
        })
    }

    /// The base point `v_alpha = (alpha, 0, 1)`.
    pub fn base(alpha: &AlphaClass) -> Self {
        Self {
            v: Vec3::new(alpha.rep().clone(), r(0), r(1)),
            alpha: alpha.clone(),
        }
    }

    pub fn vec(&self) -> &Vec3 {
        &self.v
    }

    pub fn alpha(&self) -> &AlphaClass {
        &self.alpha
    }

    pub fn same_point(&self, other: &DiscPoint, ctx: &PadicContext) -> bool {
        same_sphere_point(&self.v, &other.v, &self.alpha, ctx)
    }

    /// Image under the isometry `g` (acting by `g S g^T`).
    pub fn transform(&self, g: &Pgl2) -> DiscPoint {
        DiscPoint {
            v: g.congruence(&self.v),
            alpha: self.alpha.clone(),
        }
    }
}

pub fn in_disc(v: &Vec3, alpha: &AlphaClass, ctx: &PadicContext) -> Result<bool> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    let q = v.q();
    if q.is_zero() || v.x.is_zero() {
        return Ok(false);
    }
    Ok(SquareClass::of(&q, ctx)? == alpha.class() && alpha.norm_group().contains(&v.x, ctx)?)
}

/// Equality in the sphere `(Q_p^3 - 0) / K_alpha`.
pub fn same_sphere_point(v: &Vec3, w: &Vec3, alpha: &AlphaClass, ctx: &PadicContext) -> bool {
    match v.ratio_to(w) {
        Some(mu) if !mu.is_zero() => alpha.norm_group().contains(&mu, ctx).unwrap_or(false),
        _ => false,
    }
}

/// The dual of `D_alpha`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DualKind {
    /// The semi-cone `C_alpha`.
    ConeOnly,
    /// `D_alpha ∪ C_alpha`.
    ConeAndDisc,
}

/// A point `w ∈ D_alpha` with `B(v_alpha, w) ∉ K_alpha`, found by a search
/// over small integer vectors. Such a `w` is not in the dual, and since the
/// isometries act transitively on the disc, no disc point is.
pub fn disc_dual_witness(alpha: &AlphaClass, ctx: &PadicContext) -> Option<Vec3> {
    let k = alpha.norm_group();
    let bound = 4 * ctx.p() as i64;
    let base = DiscPoint::base(alpha);
    for x in 1..=bound {
        for z in 1..=bound {
            for y in 0..=bound {
                let w = Vec3::from_ints(x, y, z);
                if !in_disc(&w, alpha, ctx).unwrap_or(false) {
                    continue;
                }
                let b = base.v.bpolar(&w);
                if b.is_zero() || !k.contains(&b, ctx).expect("nonzero") {
                    return Some(w);
                }
            }
        }
    }
    None
}

/// `ConeAndDisc` exactly when [`disc_dual_witness`] finds nothing; for odd
/// `p` up to 11 it finds a witness for every admissible class.
pub fn dual_description(alpha: &AlphaClass, ctx: &PadicContext) -> DualKind {
    match disc_dual_witness(alpha, ctx) {
        Some(_) => DualKind::ConeOnly,
        None => DualKind::ConeAndDisc,
    }
}

/// `R = B(v, w)^2 / (4 Q(v) Q(w))`, the complete projective invariant of a pair.
pub fn invariant(v: &Vec3, w: &Vec3) -> Rational {
    let b = v.bpolar(w);
    &b * &b / (r(4) * v.q() * w.q())
}

/// `B(v, w)^2 - 4 Q(v) Q(w)`: zero iff the points coincide, a nonzero square
/// iff the line through them is long.
pub fn line_discriminant(v: &Vec3, w: &Vec3) -> Rational {
    let b = v.bpolar(w);
    &b * &b - r(4) * v.q() * w.q()
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LineKind {
    /// Meets the isotropic cone in the two given points of the semi-cone,
    /// scaled to `(1, b, b^2)` or `(0, 0, 1)`.
    Long {
        ends: [QpVec3; 2],
    },
    Short,
}

fn check_pair(v: &DiscPoint, w: &DiscPoint) -> Result<()> {
    if v.alpha != w.alpha {
        return Err(Error::AlphaMismatch);
    }
    Ok(())
}

pub fn classify_line(v: &DiscPoint, w: &DiscPoint, ctx: &PadicContext) -> Result<LineKind> {
    check_pair(v, w)?;
    let disc = line_discriminant(&v.v, &w.v);
    if disc.is_zero() {
        return Err(Error::SamePoint);
    }
    if !SquareClass::of(&disc, ctx)?.is_square() {
        return Ok(LineKind::Short);
    }
    // Q(s v + w) = Q(v) s^2 + B s + Q(w) vanishes at s = (-B ± sqrt(disc)) / 2Q(v)
    let root = Qp::Exact(disc).sqrt(ctx)?;
    let b = v.v.bpolar(&w.v);
    let two_q = r(2) * v.v.q();
    let one = Qp::one();
    let mut ends = Vec::with_capacity(2);
    for sign in [1, -1] {
        let s = Qp::Exact(-&b)
            .add(&root.scale(&r(sign), ctx), ctx)?
            .scale(&two_q.recip(), ctx);
        let e = qp_combine(&[(&s, &v.v), (&one, &w.v)], ctx)?;
        // scale to (a^2, ab, b^2) with a ∈ {0, 1}
        let lead = if e[0].is_zero() { &e[2] } else { &e[0] };
        let e = [
            e[0].div(lead, ctx)?,
            e[1].div(lead, ctx)?,
            e[2].div(lead, ctx)?,
        ];
        ends.push(e);
    }
    let ends: [QpVec3; 2] = ends.try_into().expect("two ends");
    Ok(LineKind::Long { ends })
}

/// The multiplicative distance `{lambda, 1/lambda}` of two points on a long
/// line, with its exact invariant and the radius exponent of the smallest
/// symmetric ball containing `lambda`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultDistance {
    pub invariant: Rational,
    pub lambda: Qp,
    pub lambda_inv: Qp,
    pub exponent: RadiusExponent,
}

pub fn mult_distance(v: &DiscPoint, w: &DiscPoint, ctx: &PadicContext) -> Result<MultDistance> {
    with_precision_escalation(ctx, |ctx| {
        let ends = match classify_line(v, w, ctx)? {
            LineKind::Long { ends } => ends,
            LineKind::Short => return Err(Error::NotLongLine),
        };
        let phi = |e: &QpVec3, x: &Vec3| bpolar_qp(x, e, ctx);
        // [phi, phi', v, w] = phi(w)/phi(v) * phi'(v)/phi'(w)
        let num = phi(&ends[0], &w.v)?.mul(&phi(&ends[1], &v.v)?, ctx);
        let den = phi(&ends[0], &v.v)?.mul(&phi(&ends[1], &w.v)?, ctx);
        let lambda = num.div(&den, ctx)?;
        let lambda_inv = lambda.inv()?;
        let exponent = smallest_symmetric_ball([&lambda, &lambda_inv], ctx)?;
        Ok(MultDistance {
            invariant: invariant(&v.v, &w.v),
            lambda,
            lambda_inv,
            exponent,
        })
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LineShape {
    Same,
    Long,
    Short,
}

/// Exact radius exponent of the smallest symmetric ball containing the
/// cross-ratios of a pair, read off the invariant `R` (odd `p` only).
///
/// Long lines: in the normal frame `R = (1 + x^2)^2 / 4x^2`, so the exponent is
/// `-v(R)` when `|x| != 1` and `-v(R - 1)/2` otherwise. Short lines: `(R - 1)
/// alpha` plays the role of `y^2` in the normal form `((1 - ay) alpha, y, 1 + ay)`.
pub fn distance_exponent(
    v: &DiscPoint,
    w: &DiscPoint,
    ctx: &PadicContext,
) -> Result<(LineShape, RadiusExponent)> {
    check_pair(v, w)?;
    if !ctx.is_odd() {
        return Err(Error::OddPOnly);
    }
    let disc = line_discriminant(&v.v, &w.v);
    if disc.is_zero() {
        return Ok((LineShape::Same, RadiusExponent::NegInfinity));
    }
    let rr = invariant(&v.v, &w.v);
    let t_minus_one = &rr - r(1);
    let val = |x: &Rational| valuation(x, ctx).expect("nonzero");
    if SquareClass::of(&disc, ctx)?.is_square() {
        let vr = val(&rr);
        let t = if vr < 0 { -vr } else { -val(&t_minus_one) / 2 };
        Ok((LineShape::Long, RadiusExponent::Finite(t)))
    } else {
        let vy = val(&(t_minus_one * v.alpha.rep()));
        let t = if vy <= 0 { 0 } else { -(vy / 2) };
        Ok((LineShape::Short, RadiusExponent::Finite(t)))
    }
}

/// Distance for a ball exponent: `t + 1` (`t + 1/2` when `alpha` has odd
/// valuation) for `t >= 0`, `p^(t+1)/(p-1)` for `t < 0`.
pub fn closed_form_measure(t: RadiusExponent, alpha: &AlphaClass, ctx: &PadicContext) -> Rational {
    match t {
        RadiusExponent::NegInfinity => Rational::zero(),
        RadiusExponent::Finite(t) if t >= 0 && alpha.has_odd_valuation() => {
            r(t) + Rational::new(BigInt::one(), BigInt::from(2))
        }
        RadiusExponent::Finite(t) => haar_ball_measure(t, ctx),
    }
}

/// The Hilbert distance in closed form (odd `p`).
pub fn hilbert_distance(v: &DiscPoint, w: &DiscPoint, ctx: &PadicContext) -> Result<Rational> {
    let (_, t) = distance_exponent(v, w, ctx)?;
    Ok(closed_form_measure(t, &v.alpha, ctx))
}

pub fn same_ultrametric_locus(v: &DiscPoint, w: &DiscPoint, ctx: &PadicContext) -> Result<bool> {
    Ok(hilbert_distance(v, w, ctx)? <= r(1))
}

/// `v = z * shear . (alpha s^2, 0, 1)` with `shear = [[1, y/z], [0, 1]]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub shear: Pgl2,
    pub scale: Rational,
    pub alpha_s2: Rational,
}

impl NormalForm {
    pub fn normal_point(&self) -> Vec3 {
        Vec3::new(self.alpha_s2.clone(), r(0), r(1))
    }

    /// `s^2 = alpha_s2 / alpha`.
    pub fn s_squared(&self, alpha: &AlphaClass) -> Rational {
        &self.alpha_s2 / alpha.rep()
    }

    pub fn s(&self, alpha: &AlphaClass, ctx: &PadicContext) -> Result<Qp> {
        Qp::Exact(self.s_squared(alpha)).sqrt(ctx)
    }

    /// `v(s)`, which is all the tree projection needs.
    pub fn s_valuation(&self, alpha: &AlphaClass, ctx: &PadicContext) -> i64 {
        valuation(&self.s_squared(alpha), ctx).expect("nonzero") / 2
    }
}

pub fn reduce_to_normal_form(v: &DiscPoint, ctx: &PadicContext) -> Result<NormalForm> {
    let _ = ctx;
    let vec = &v.v;
    let scale = vec.z.clone();
    let shear = Pgl2::new(r(1), &vec.y / &scale, r(0), r(1))?;
    let alpha_s2 = vec.q() / (&scale * &scale);
    Ok(NormalForm {
        shear,
        scale,
        alpha_s2,
    })
}

/// Whether `v` lies in the `K_alpha Ad(PSL_2)`-orbit of `v_alpha`: this holds
/// iff the normal-form parameter `s` lies in `±K_alpha`.
pub fn in_base_orbit(v: &DiscPoint, ctx: &PadicContext) -> Result<bool> {
    with_precision_escalation(ctx, |ctx| {
        let nf = reduce_to_normal_form(v, ctx)?;
        let s = nf.s(&v.alpha, ctx)?;
        let k = v.alpha.norm_group();
        let cls = SquareClass::of_qp(&s, ctx)?;
        let minus = SquareClass::of(&r(-1), ctx)?;
        Ok(k.contains_class(cls, ctx) || k.contains_class(cls.mul(minus), ctx))
    })
}

/// Element `[[a, -alpha c], [c, a]]` of the stabilizer of `v_alpha`, with
/// `a = (1 - alpha m^2)/(1 + alpha m^2)`, `c = 2m/(1 + alpha m^2)`.
pub fn stabilizer_element(alpha: &AlphaClass, m: &Rational) -> Pgl2 {
    let am2 = alpha.rep() * m * m;
    let den = r(1) + &am2;
    let a = (r(1) - &am2) / &den;
    let c = r(2) * m / &den;
    Pgl2::new(a.clone(), -(alpha.rep() * &c), c, a).expect("determinant one")
}

/// Element `[[a, alpha c], [c, -a]]` with `a^2 + alpha c^2 = -1`, which maps
/// `v_alpha` to `-v_alpha`; exists iff `-1 - alpha c^2` is a square.
pub fn twisted_stabilizer_element(
    alpha: &AlphaClass,
    c: &Rational,
    ctx: &PadicContext,
) -> Result<[Qp; 4]> {
    let a2 = r(-1) - alpha.rep() * c * c;
    let a = Qp::Exact(a2).sqrt(ctx)?;
    Ok([
        a.clone(),
        Qp::Exact(alpha.rep() * c),
        Qp::Exact(c.clone()),
        a.neg(),
    ])
}

/// The circle `{w : D(v, w) = {r, 1/r}}`, stored through the invariant
/// `R = (r + 2 + 1/r) / 4`.
#[derive(Clone, Debug)]
pub struct Circle {
    pub center: DiscPoint,
    pub invariant: Rational,
}

impl Circle {
    pub fn from_radius(center: &DiscPoint, radius: &Rational) -> Result<Self> {
        if radius.is_zero() || radius.is_one() {
            return Err(Error::DegenerateRadii);
        }
        let invariant = (radius + r(2) + radius.recip()) / r(4);
        Ok(Self {
            center: center.clone(),
            invariant,
        })
    }

    pub fn from_invariant(center: &DiscPoint, invariant: Rational) -> Result<Self> {
        if invariant.is_zero() || invariant.is_one() {
            return Err(Error::DegenerateRadii);
        }
        Ok(Self {
            center: center.clone(),
            invariant,
        })
    }

    /// The circle through `w`, when `(center, w)` is a long line.
    pub fn through(center: &DiscPoint, w: &DiscPoint, ctx: &PadicContext) -> Result<Self> {
        let disc = line_discriminant(&center.v, &w.v);
        if disc.is_zero() {
            return Err(Error::SamePoint);
        }
        if !SquareClass::of(&disc, ctx)?.is_square() {
            return Err(Error::NotLongLine);
        }
        Self::from_invariant(center, invariant(&center.v, &w.v))
    }

    pub fn contains(&self, w: &DiscPoint, ctx: &PadicContext) -> Result<bool> {
        check_pair(&self.center, w)?;
        let disc = line_discriminant(&self.center.v, &w.v);
        if disc.is_zero() {
            return Ok(false);
        }
        if !SquareClass::of(&disc, ctx)?.is_square() {
            return Err(Error::NotLongLine);
        }
        Ok(invariant(&self.center.v, &w.v) == self.invariant)
    }
}

pub fn circle_contains(
    center: &DiscPoint,
    radius: &Rational,
    w: &DiscPoint,
    ctx: &PadicContext,
) -> Result<bool> {
    Circle::from_radius(center, radius)?.contains(w, ctx)
}

/// A point found by [`circle_intersection`], with the exact data certifying
/// it: `Q(v)` and the pairings `B(c_i, v)`.
#[derive(Clone, Debug)]
pub struct CirclePoint {
    pub coords: QpVec3,
    pub q: Qp,
    pub pairings: [Qp; 2],
}

impl CirclePoint {
    pub fn exact(&self) -> Option<Vec3> {
        match &self.coords {
            [Qp::Exact(x), Qp::Exact(y), Qp::Exact(z)] => {
                Some(Vec3::new(x.clone(), y.clone(), z.clone()))
            }
            _ => None,
        }
    }
}

impl CirclePoint {
    /// Recomputes `Q(v)` and `B(c, v)` from the coordinates alone and checks
    /// membership in the disc and in `circle`, to the working precision.
    pub fn lies_on(&self, circle: &Circle, ctx: &PadicContext) -> Result<bool> {
        let [x, y, z] = &self.coords;
        let alpha = &circle.center.alpha;
        let q = x.mul(z, ctx).sub(&y.mul(y, ctx), ctx)?;
        if q.is_zero() || x.is_zero() || SquareClass::of_qp(&q, ctx)? != alpha.class() {
            return Ok(false);
        }
        if !alpha
            .norm_group()
            .contains_class(SquareClass::of_qp(x, ctx)?, ctx)
        {
            return Ok(false);
        }
        let b = bpolar_qp(&circle.center.v, &self.coords, ctx)?;
        let b2 = b.mul(&b, ctx);
        let rho = &circle.invariant;
        let long = b2.scale(&((rho - r(1)) / rho), ctx);
        if long.is_zero() || !SquareClass::of_qp(&long, ctx)?.is_square() {
            return Ok(false);
        }
        let ratio = b2.div(&q.scale(&(r(4) * circle.center.v.q()), ctx), ctx)?;
        Ok(ratio.agrees_with(rho, ctx))
    }
}

/// `M w` for an exact matrix and a possibly approximate vector.
pub fn apply_mat_qp(m: &Mat3, w: &QpVec3, ctx: &PadicContext) -> Result<QpVec3> {
    let mut out = [Qp::zero(), Qp::zero(), Qp::zero()];
    for (slot, row) in out.iter_mut().zip(&m.0) {
        for (c, wj) in row.iter().zip(w) {
            *slot = slot.add(&wj.scale(c, ctx), ctx)?;
        }
    }
    Ok(out)
}

/// The vector `n` with `B(n, c1) = B(n, c2) = 0`.
pub fn polar_normal(c1: &Vec3, c2: &Vec3) -> Vec3 {
    // with P the Gram matrix of B, P n is orthogonal to c1 and c2
    let c = c1.cross(c2);
    Vec3::new(c.z.clone(), &c.y / r(-2), c.x.clone())
}

/// The reflection `v -> v - B(v, n)/Q(n) n` fixing the plane of `c1`, `c2`.
pub fn reflection_fixing(c1: &Vec3, c2: &Vec3) -> Mat3 {
    let n = polar_normal(c1, c2);
    let qn = n.q();
    let basis = [
        Vec3::from_ints(1, 0, 0),
        Vec3::from_ints(0, 1, 0),
        Vec3::from_ints(0, 0, 1),
    ];
    let cols: Vec<Vec3> = basis
        .iter()
        .map(|e| e.add(&n.scale(&(-e.bpolar(&n) / &qn))))
        .collect();
    Mat3(std::array::from_fn(|i| {
        std::array::from_fn(|j| cols[j].coords()[i].clone())
    }))
}

/// Intersection of two circles whose centers span a long line, each point
/// scaled to `x = 1`. There are at most four points, paired by
/// [`reflection_fixing`] the centers; more than two occur only when
/// `-1 ∈ K_alpha`.
pub fn circle_intersection(
    first: &Circle,
    second: &Circle,
    ctx: &PadicContext,
) -> Result<Vec<CirclePoint>> {
    check_pair(&first.center, &second.center)?;
    let (c1, c2) = (&first.center.v, &second.center.v);
    match classify_line(&first.center, &second.center, ctx)? {
        LineKind::Long { .. } => {}
        LineKind::Short => return Err(Error::NotLongLine),
    }
    with_precision_escalation(ctx, |ctx| {
        circle_intersection_at(first, second, c1, c2, ctx)
    })
}

fn circle_intersection_at(
    first: &Circle,
    second: &Circle,
    c1: &Vec3,
    c2: &Vec3,
    ctx: &PadicContext,
) -> Result<Vec<CirclePoint>> {
    let alpha = &first.center.alpha;
    let (q1, q2, b12) = (c1.q(), c2.q(), c1.bpolar(c2));
    let (rho1, rho2) = (&first.invariant, &second.invariant);
    let n = polar_normal(c1, c2);
    let qn = n.q();
    // B(c1, v)^2 / B(c2, v)^2 = rho1 Q1 / (rho2 Q2) =: sigma^2
    let ratio = rho1 * &q1 / (rho2 * &q2);
    let sigma = match Qp::Exact(ratio).sqrt(ctx) {
        Ok(s) => s,
        Err(Error::NotASquare) => return Ok(Vec::new()),
        Err(e) => return Err(e),
    };
    let mut points: Vec<CirclePoint> = Vec::new();
    for sigma in [sigma.clone(), sigma.neg()] {
        // v = a c1 + b c2 + c n with B(c1, v) = sigma B(c2, v)
        let a = sigma
            .scale(&(r(2) * &q2), ctx)
            .sub(&Qp::Exact(b12.clone()), ctx)?;
        let b = Qp::Exact(r(2) * &q1).sub(&sigma.scale(&b12, ctx), ctx)?;
        if a.is_zero() && b.is_zero() {
            continue;
        }
        let b1 = a.scale(&(r(2) * &q1), ctx).add(&b.scale(&b12, ctx), ctx)?;
        let b2 = a.scale(&b12, ctx).add(&b.scale(&(r(2) * &q2), ctx), ctx)?;
        let qu = a
            .mul(&a, ctx)
            .scale(&q1, ctx)
            .add(&a.mul(&b, ctx).scale(&b12, ctx), ctx)?
            .add(&b.mul(&b, ctx).scale(&q2, ctx), ctx)?;
        // Q(v) = B(c1, v)^2 / (4 rho1 Q1) fixes c^2 Q(n)
        let qv = b1.mul(&b1, ctx).scale(&(r(4) * rho1 * &q1).recip(), ctx);
        let c2n = match qv.sub(&qu, ctx) {
            Ok(x) => x.scale(&qn.recip(), ctx),
            Err(Error::PrecisionExhausted { .. }) => Qp::zero(),
            Err(e) => return Err(e),
        };
        let c = match c2n.sqrt(ctx) {
            Ok(c) => c,
            Err(Error::NotASquare) => continue,
            Err(e) => return Err(e),
        };
        if qv.is_zero() || SquareClass::of_qp(&qv, ctx)? != alpha.class() {
            continue;
        }
        let signs: &[i64] = if c.is_zero() { &[1] } else { &[1, -1] };
        for &sc in signs {
            let cc = c.scale(&r(sc), ctx);
            let coords = qp_combine(&[(&a, c1), (&b, c2), (&cc, &n)], ctx)?;
            if coords[0].is_zero() {
                continue;
            }
            // v / x is the representative with x = 1 ∈ K_alpha
            let x = coords[0].clone();
            let coords = [Qp::one(), coords[1].div(&x, ctx)?, coords[2].div(&x, ctx)?];
            let pairings = [b1.div(&x, ctx)?, b2.div(&x, ctx)?];
            let qv = qv.div(&x.mul(&x, ctx), ctx)?;
            // both lines to the centers must be long
            let long = |b: &Qp, rho: &Rational| -> Result<bool> {
                let d = b.mul(b, ctx).scale(&((rho - r(1)) / rho), ctx);
                Ok(!d.is_zero() && SquareClass::of_qp(&d, ctx)?.is_square())
            };
            if !long(&pairings[0], rho1)? || !long(&pairings[1], rho2)? {
                continue;
            }
            if points.iter().any(|p| qp_vec_agree(&p.coords, &coords, ctx)) {
                continue;
            }
            points.push(CirclePoint {
                coords,
                q: qv,
                pairings,
            });
        }
    }
    Ok(points)
}

/// Orthogonality of two directions in `v^⊥` at a base point.
pub fn orthogonal_lines(base: &DiscPoint, dir1: &Vec3, dir2: &Vec3) -> Result<bool> {
    for d in [dir1, dir2] {
        if d.is_zero() {
            return Err(Error::ZeroVector);
        }
        if !base.v.bpolar(d).is_zero() {
            return Err(Error::NotInPerp);
        }
    }
    Ok(dir1.bpolar(dir2).is_zero())
}

/// Helper for samplers: `alpha s^2` as a disc point scaled to `z = 1`.
pub fn normal_point(alpha: &AlphaClass, s: &Rational) -> Vec3 {
    Vec3::new(alpha.rep() * s * s, r(0), r(1))
}
