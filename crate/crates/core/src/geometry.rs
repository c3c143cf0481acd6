//! The quadratic form `Q(x, y, z) = xz - y^2`, its polar form, and the
//! adjoint action of `PGL(2, Q_p)` on symmetric matrices `[[x, y], [y, z]]`.

use std::fmt;
use std::ops::Mul;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::padic::{format_rational, parse_rational, PadicContext, Rational, SquareClass};

fn r(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Vec3 {
    pub x: Rational,
    pub y: Rational,
    pub z: Rational,
}

impl Vec3 {
    pub fn new(x: Rational, y: Rational, z: Rational) -> Self {
        Self { x, y, z }
    }

    pub fn from_ints(x: i64, y: i64, z: i64) -> Self {
        Self::new(r(x), r(y), r(z))
    }

    pub fn coords(&self) -> [&Rational; 3] {
        [&self.x, &self.y, &self.z]
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero() && self.z.is_zero()
    }

    /// `Q(v) = xz - y^2`.
    pub fn q(&self) -> Rational {
        &self.x * &self.z - &self.y * &self.y
    }

    /// Polar form `B(v, w) = xz' + x'z - 2yy'`, so that `B(v, v) = 2Q(v)`.
    pub fn bpolar(&self, w: &Vec3) -> Rational {
        &self.x * &w.z + &w.x * &self.z - r(2) * &self.y * &w.y
    }

    pub fn scale(&self, k: &Rational) -> Vec3 {
        Vec3::new(&self.x * k, &self.y * k, &self.z * k)
    }

    pub fn add(&self, w: &Vec3) -> Vec3 {
        Vec3::new(&self.x + &w.x, &self.y + &w.y, &self.z + &w.z)
    }

    pub fn cross(&self, w: &Vec3) -> Vec3 {
        Vec3::new(
            &self.y * &w.z - &self.z * &w.y,
            &self.z * &w.x - &self.x * &w.z,
            &self.x * &w.y - &self.y * &w.x,
        )
    }

    pub fn is_proportional(&self, w: &Vec3) -> bool {
        self.cross(w).is_zero()
    }

    /// `mu` with `w = mu * self`, when the vectors are proportional.
    pub fn ratio_to(&self, w: &Vec3) -> Option<Rational> {
        if !self.is_proportional(w) {
            return None;
        }
        self.coords()
            .into_iter()
            .zip(w.coords())
            .find(|(a, _)| !a.is_zero())
            .map(|(a, b)| b / a)
    }

    /// Positive multiple with coprime integer coordinates.
    pub fn primitive(&self) -> [BigInt; 3] {
        let lcm = self
            .coords()
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self
            .coords()
            .iter()
            .map(|c| (*c * Rational::from_integer(lcm.clone())).to_integer())
            .collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        let g = if g.is_zero() { BigInt::one() } else { g };
        [&ints[0] / &g, &ints[1] / &g, &ints[2] / &g]
    }

    /// Parses `"x,y,z"` with rational coordinates.
    pub fn parse(s: &str) -> Result<Vec3> {
        let parts: Vec<&str> = s.split(',').collect();
        if parts.len() != 3 {
            return Err(Error::Parse(s.to_string()));
        }
        Ok(Vec3::new(
            parse_rational(parts[0])?,
            parse_rational(parts[1])?,
            parse_rational(parts[2])?,
        ))
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{},{},{}",
            format_rational(&self.x),
            format_rational(&self.y),
            format_rational(&self.z)
        )
    }
}

/// An invertible 2x2 matrix `[[a, b], [c, d]]`, compared up to scalars.
#[derive(Clone, Debug)]
pub struct Pgl2 {
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

impl Pgl2 {
    pub fn new(a: Rational, b: Rational, c: Rational, d: Rational) -> Result<Self> {
        let g = Self { a, b, c, d };
        if g.det().is_zero() {
            return Err(Error::SingularMatrix);
        }
        Ok(g)
    }

    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Result<Self> {
        Self::new(r(a), r(b), r(c), r(d))
    }

    pub fn identity() -> Self {
        Self {
            a: r(1),
            b: r(0),
            c: r(0),
            d: r(1),
        }
    }

    pub fn det(&self) -> Rational {
        &self.a * &self.d - &self.b * &self.c
    }

    pub fn inverse(&self) -> Self {
        Self {
            a: self.d.clone(),
            b: -&self.b,
            c: -&self.c,
            d: self.a.clone(),
        }
    }

    /// Action on a column vector.
    pub fn apply(&self, u: &Rational, v: &Rational) -> (Rational, Rational) {
        (&self.a * u + &self.b * v, &self.c * u + &self.d * v)
    }

    /// `g S g^T` for `S = [[x, y], [y, z]]`; this is `det(g) Ad(g)`, the action
    /// of `g` as an isometry of the discs.
    pub fn congruence(&self, v: &Vec3) -> Vec3 {
        let (a, b, c, d) = (&self.a, &self.b, &self.c, &self.d);
        let two = r(2);
        Vec3::new(
            a * a * &v.x + &two * a * b * &v.y + b * b * &v.z,
            a * c * &v.x + (a * d + b * c) * &v.y + b * d * &v.z,
            c * c * &v.x + &two * c * d * &v.y + d * d * &v.z,
        )
    }
}

impl PartialEq for Pgl2 {
    fn eq(&self, o: &Self) -> bool {
        let pairs = [
            (&self.a, &o.a),
            (&self.b, &o.b),
            (&self.c, &o.c),
            (&self.d, &o.d),
        ];
        pairs
            .iter()
            .all(|(x, y)| pairs.iter().all(|(u, w)| *x * *w == *u * *y))
    }
}

impl Eq for Pgl2 {}

impl Mul for &Pgl2 {
    type Output = Pgl2;

    fn mul(self, o: &Pgl2) -> Pgl2 {
        Pgl2 {
            a: &self.a * &o.a + &self.b * &o.c,
            b: &self.a * &o.b + &self.b * &o.d,
            c: &self.c * &o.a + &self.d * &o.c,
            d: &self.c * &o.b + &self.d * &o.d,
        }
    }
}

impl fmt::Display for Pgl2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[[{},{}],[{},{}]]",
            format_rational(&self.a),
            format_rational(&self.b),
            format_rational(&self.c),
            format_rational(&self.d)
        )
    }
}

/// A 3x3 rational matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mat3(pub [[Rational; 3]; 3]);

impl Mat3 {
    pub fn identity() -> Self {
        Self::diag(r(1), r(1), r(1))
    }

    pub fn diag(a: Rational, b: Rational, c: Rational) -> Self {
        Mat3([[a, r(0), r(0)], [r(0), b, r(0)], [r(0), r(0), c]])
    }

    pub fn transpose(&self) -> Self {
        let m = &self.0;
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| m[j][i].clone())
        }))
    }

    pub fn det(&self) -> Rational {
        let m = &self.0;
        &m[0][0] * (&m[1][1] * &m[2][2] - &m[1][2] * &m[2][1])
            - &m[0][1] * (&m[1][0] * &m[2][2] - &m[1][2] * &m[2][0])
            + &m[0][2] * (&m[1][0] * &m[2][1] - &m[1][1] * &m[2][0])
    }

    pub fn inverse(&self) -> Result<Self> {
        let det = self.det();
        if det.is_zero() {
            return Err(Error::SingularMatrix);
        }
        let m = &self.0;
        let cof = |i: usize, j: usize| {
            let rows: Vec<usize> = (0..3).filter(|&k| k != i).collect();
            let cols: Vec<usize> = (0..3).filter(|&k| k != j).collect();
            let minor = &m[rows[0]][cols[0]] * &m[rows[1]][cols[1]]
                - &m[rows[0]][cols[1]] * &m[rows[1]][cols[0]];
            if (i + j).is_multiple_of(2) {
                minor
            } else {
                -minor
            }
        };
        // inverse = adjugate / det, adjugate = transposed cofactors
        Ok(Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| cof(j, i) / &det)
        })))
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        let m = &self.0;
        let row = |i: usize| &m[i][0] * &v.x + &m[i][1] * &v.y + &m[i][2] * &v.z;
        Vec3::new(row(0), row(1), row(2))
    }

    pub fn column(&self, j: usize) -> Vec3 {
        Vec3::new(
            self.0[0][j].clone(),
            self.0[1][j].clone(),
            self.0[2][j].clone(),
        )
    }
}

impl Mul for &Mat3 {
    type Output = Mat3;

    fn mul(self, o: &Mat3) -> Mat3 {
        Mat3(std::array::from_fn(|i| {
            std::array::from_fn(|j| (0..3).fold(r(0), |acc, k| acc + &self.0[i][k] * &o.0[k][j]))
        }))
    }
}

impl fmt::Display for Mat3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .0
            .iter()
            .map(|row| {
                let cells: Vec<String> = row.iter().map(format_rational).collect();
                format!("[{}]", cells.join(","))
            })
            .collect();
        write!(f, "[{}]", rows.join(","))
    }
}

/// Gram matrix of `2Q` in the coordinates `(x, y, z)`.
pub fn gram() -> Mat3 {
    Mat3([[r(0), r(0), r(1)], [r(0), r(-2), r(0)], [r(1), r(0), r(0)]])
}

/// An element of `SO(Q)`, validated on construction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct So3(Mat3);

impl So3 {
    pub fn new(m: Mat3) -> Result<Self> {
        let p = gram();
        if &(&m.transpose() * &p) * &m != p || !m.det().is_one() {
            return Err(Error::NotInSOQ);
        }
        Ok(So3(m))
    }

    pub fn identity() -> Self {
        So3(Mat3::identity())
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn apply(&self, v: &Vec3) -> Vec3 {
        self.0.apply(v)
    }

    pub fn inverse(&self) -> Self {
        So3(self.0.inverse().expect("SO(Q) elements are invertible"))
    }

    /// Lower unipotent `Ad([[1, 0], [v, 1]])`.
    pub fn n_minus(v: &Rational) -> Self {
        So3(Mat3([
            [r(1), r(0), r(0)],
            [v.clone(), r(1), r(0)],
            [v * v, r(2) * v, r(1)],
        ]))
    }

    /// Upper unipotent `Ad([[1, w], [0, 1]])`, the stabilizer shape of `(1, 0, 0)`.
    pub fn n_plus(w: &Rational) -> Self {
        So3(Mat3([
            [r(1), r(2) * w, w * w],
            [r(0), r(1), w.clone()],
            [r(0), r(0), r(1)],
        ]))
    }

    /// Torus element `diag(x, 1, 1/x) = Ad(diag(x, 1))`.
    pub fn h(x: &Rational) -> Result<Self> {
        if x.is_zero() {
            return Err(Error::SingularMatrix);
        }
        Ok(So3(Mat3::diag(x.clone(), r(1), x.recip())))
    }

    pub fn is_n_minus(&self) -> bool {
        *self == So3::n_minus(&self.0 .0[1][0])
    }

    pub fn is_n_plus(&self) -> bool {
        *self == So3::n_plus(&self.0 .0[1][2])
    }

    pub fn is_h(&self) -> bool {
        let x = &self.0 .0[0][0];
        !x.is_zero() && *self == So3::h(x).expect("nonzero")
    }
}

impl Mul for &So3 {
    type Output = So3;

    fn mul(self, o: &So3) -> So3 {
        So3(&self.0 * &o.0)
    }
}

/// The adjoint representation `g -> (S -> g S g^T / det g)`.
pub fn adjoint(g: &Pgl2) -> Result<So3> {
    let det = g.det();
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let cols = [
        Vec3::from_ints(1, 0, 0),
        Vec3::from_ints(0, 1, 0),
        Vec3::from_ints(0, 0, 1),
    ]
    .map(|e| g.congruence(&e).scale(&det.recip()));
    Ok(So3(Mat3(std::array::from_fn(|i| {
        std::array::from_fn(|j| cols[j].coords()[i].clone())
    }))))
}

/// The isometric action `det(g) Ad(g) v = g S g^T`.
pub fn isom_action(g: &Pgl2, v: &Vec3) -> Result<Vec3> {
    if g.det().is_zero() {
        return Err(Error::SingularMatrix);
    }
    Ok(g.congruence(v))
}

/// For an isotropic vector, the class `beta` with `x, z` in `beta ∪ {0}`;
/// `None` when `Q(v) != 0`.
pub fn semicone_classify(v: &Vec3, ctx: &PadicContext) -> Result<Option<SquareClass>> {
    if v.is_zero() {
        return Err(Error::ZeroVector);
    }
    if !v.q().is_zero() {
        return Ok(None);
    }
    // xz = y^2, so x and z share their class when both are nonzero
    let outer = if v.x.is_zero() { &v.z } else { &v.x };
    SquareClass::of(outer, ctx).map(Some)
}

/// `M = n_minus * h * n_plus`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Iwasawa {
    pub n_minus: So3,
    pub h: So3,
    pub n_plus: So3,
}

impl Iwasawa {
    pub fn product(&self) -> So3 {
        &(&self.n_minus * &self.h) * &self.n_plus
    }
}

/// Decomposes `M` in `N^- H N^+` by matching the image of `(1, 0, 0)`.
pub fn iwasawa_decompose(m: &So3) -> Result<Iwasawa> {
    let m = So3::new(m.matrix().clone())?;
    let image = m.matrix().column(0);
    if image.x.is_zero() {
        return Err(Error::ChartFailure);
    }
    let v = &image.y / &image.x;
    let n_minus = So3::n_minus(&v);
    let h = So3::h(&image.x)?;
    let n_plus = &(&n_minus * &h).inverse() * &m;
    if !n_plus.is_n_plus() {
        return Err(Error::NotInSOQ);
    }
    Ok(Iwasawa { n_minus, h, n_plus })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::padic::rat;

    #[test]
    fn form_values() {
        assert_eq!(Vec3::from_ints(1, 0, 0).q(), rat(0, 1));
        assert_eq!(Vec3::from_ints(2, 0, 1).q(), rat(2, 1));
        assert_eq!(Vec3::from_ints(-18, 5, 11).q(), rat(-223, 1));
        let va = Vec3::from_ints(2, 0, 1);
        assert_eq!(va.bpolar(&Vec3::from_ints(9, 6, 4)), rat(2 * 4 + 9, 1));
        assert_eq!(va.bpolar(&Vec3::from_ints(1, 0, 0)), rat(1, 1));
    }

    #[test]
    fn adjoint_of_torus() {
        let g = Pgl2::new(rat(3, 2), rat(0, 1), rat(0, 1), rat(1, 1)).unwrap();
        let m = adjoint(&g).unwrap();
        assert_eq!(m, So3::h(&rat(3, 2)).unwrap());
        assert_eq!(
            m.apply(&Vec3::from_ints(2, 0, 1)),
            Vec3::new(rat(3, 1), rat(0, 1), rat(2, 3))
        );
        assert!(m.is_h());
        assert_eq!(adjoint(&Pgl2::identity()).unwrap(), So3::identity());
    }

    #[test]
    fn singular_rejected() {
        assert!(matches!(
            Pgl2::from_ints(1, 2, 2, 4),
            Err(Error::SingularMatrix)
        ));
    }

    #[test]
    fn semicones() {
        let c = PadicContext::with_prime(5).unwrap();
        assert_eq!(
            semicone_classify(&Vec3::from_ints(4, 2, 1), &c)
                .unwrap()
                .unwrap()
                .label(),
            "1"
        );
        assert_eq!(
            semicone_classify(&Vec3::from_ints(0, 0, 7), &c)
                .unwrap()
                .unwrap()
                .label(),
            "eps"
        );
        assert_eq!(
            semicone_classify(&Vec3::from_ints(2, 0, 1), &c).unwrap(),
            None
        );
        assert_eq!(
            semicone_classify(&Vec3::from_ints(0, 0, 0), &c),
            Err(Error::ZeroVector)
        );
    }

    #[test]
    fn iwasawa_trivial_cases() {
        let id = iwasawa_decompose(&So3::identity()).unwrap();
        assert_eq!(id.n_minus, So3::identity());
        assert_eq!(id.h, So3::identity());
        assert_eq!(id.n_plus, So3::identity());
        let h = So3::h(&rat(5, 7)).unwrap();
        let d = iwasawa_decompose(&h).unwrap();
        assert_eq!(d.h, h);
        assert_eq!(d.n_minus, So3::identity());
    }

    #[test]
    fn iwasawa_chart_failure() {
        // Ad of the Weyl element [[0, 1], [1, 0]] sends (1, 0, 0) to (0, 0, -1) up to scalar
        let w = adjoint(&Pgl2::from_ints(0, 1, 1, 0).unwrap()).unwrap();
        assert_eq!(iwasawa_decompose(&w), Err(Error::ChartFailure));
        let bad = So3(Mat3::diag(rat(2, 1), rat(1, 1), rat(1, 1)));
        assert_eq!(iwasawa_decompose(&bad), Err(Error::NotInSOQ));
    }

    #[test]
    fn parse_and_primitive() {
        let v = Vec3::parse("1/2, -3, 6/4").unwrap();
        assert_eq!(v, Vec3::new(rat(1, 2), rat(-3, 1), rat(3, 2)));
        assert_eq!(v.to_string(), "1/2,-3,3/2");
        let p = v.primitive();
        assert_eq!(p, [BigInt::from(1), BigInt::from(-6), BigInt::from(3)]);
        assert!(Vec3::parse("1,2").is_err());
    }
}
