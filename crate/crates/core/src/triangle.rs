//! The triangle `T_H` for `H` the squares of `Q_p`: points `[x:y:z]` whose
//! coordinate ratios have square unit parts, its Hilbert distance, and the
//! projection to the hexagonal lattice `Z[j]`.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::padic::{
    haar_ball_measure, measure_of, power_of_p, smallest_symmetric_ball, unit_part, valuation,
    PadicContext, Qp, Rational, SquareClass,
};

/// `[p^n1 u1 : 1 : p^n2 u2]` with `u1`, `u2` square units.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrianglePoint {
    n1: i64,
    n2: i64,
    u1: Rational,
    u2: Rational,
}

impl TrianglePoint {
    pub fn n1(&self) -> i64 {
        self.n1
    }

    pub fn n2(&self) -> i64 {
        self.n2
    }

    pub fn units(&self) -> (&Rational, &Rational) {
        (&self.u1, &self.u2)
    }

    pub fn coords(&self, ctx: &PadicContext) -> [Rational; 3] {
        [
            power_of_p(self.n1, ctx) * &self.u1,
            Rational::from_integer(BigInt::from(1)),
            power_of_p(self.n2, ctx) * &self.u2,
        ]
    }
}

impl fmt::Display for TrianglePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[p^{}*{} : 1 : p^{}*{}]",
            self.n1, self.u1, self.n2, self.u2
        )
    }
}

/// `Ok(None)` when some coordinate ratio has a non-square unit part.
pub fn in_triangle(v: &Vec3, ctx: &PadicContext) -> Result<Option<TrianglePoint>> {
    if v.x.is_zero() || v.y.is_zero() || v.z.is_zero() {
        return Err(Error::ZeroCoordinate);
    }
    let split = |r: Rational| {
        let n = valuation(&r, ctx).expect("nonzero");
        let u = unit_part(&r, ctx);
        let square = SquareClass::of(&u, ctx).expect("nonzero").is_square();
        square.then_some((n, u))
    };
    let (Some((n1, u1)), Some((n2, u2))) = (split(&v.x / &v.y), split(&v.z / &v.y)) else {
        return Ok(None);
    };
    Ok(Some(TrianglePoint { n1, n2, u1, u2 }))
}

/// The nine cross-ratios `[e_i, e_j, P1, P2]` over the coordinate forms.
pub fn cross_ratios(p1: &TrianglePoint, p2: &TrianglePoint, ctx: &PadicContext) -> Vec<Rational> {
    let (a, b) = (p1.coords(ctx), p2.coords(ctx));
    let mut out = Vec::with_capacity(9);
    for i in 0..3 {
        for j in 0..3 {
            out.push(&b[i] / &a[i] * (&a[j] / &b[j]));
        }
    }
    out
}

/// The smallest symmetric ball around the nine cross-ratios, measured. The
/// dual is finite so this is exact.
pub fn triangle_oracle_distance(
    p1: &TrianglePoint,
    p2: &TrianglePoint,
    ctx: &PadicContext,
) -> Rational {
    let values: Vec<Qp> = cross_ratios(p1, p2, ctx)
        .into_iter()
        .map(Qp::Exact)
        .collect();
    let t = smallest_symmetric_ball(&values, ctx).expect("nonzero cross-ratios");
    measure_of(t, ctx)
}

/// `max(|N|, |M|, |N - M|) + 1` off the diagonal `N = M = 0`, where the
/// oracle gives a value at most 1.
pub fn triangle_distance(p1: &TrianglePoint, p2: &TrianglePoint, ctx: &PadicContext) -> Rational {
    let h = hex_distance(hex_project(p1), hex_project(p2));
    if h == 0 {
        triangle_oracle_distance(p1, p2, ctx)
    } else {
        haar_ball_measure(h, ctx)
    }
}

/// `m1 + m2 j` in `Z[j]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HexPoint {
    pub m1: i64,
    pub m2: i64,
}

impl HexPoint {
    pub fn new(m1: i64, m2: i64) -> Self {
        Self { m1, m2 }
    }

    pub fn norm(&self) -> i64 {
        self.m1
            .abs()
            .max(self.m2.abs())
            .max((self.m1 - self.m2).abs())
    }
}

impl fmt::Display for HexPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.m1, self.m2)
    }
}

pub fn hex_project(p: &TrianglePoint) -> HexPoint {
    HexPoint::new(p.n1, p.n2)
}

pub fn hex_distance(h1: HexPoint, h2: HexPoint) -> i64 {
    HexPoint::new(h1.m1 - h2.m1, h1.m2 - h2.m2).norm()
}

/// The hex image of the closed ball of the given radius. Only the exponents
/// matter once the radius is at least 1, so one point per exponent pair is
/// tried.
pub fn ball_hex_image(
    center: &TrianglePoint,
    radius: &Rational,
    ctx: &PadicContext,
) -> BTreeSet<HexPoint> {
    let reach = radius
        .ceil()
        .to_integer()
        .try_into()
        .unwrap_or(i64::MAX)
        .max(1);
    let one = Rational::from_integer(BigInt::from(1));
    let mut image = BTreeSet::new();
    for d1 in -reach..=reach {
        for d2 in -reach..=reach {
            let q = TrianglePoint {
                n1: center.n1 + d1,
                n2: center.n2 + d2,
                u1: one.clone(),
                u2: one.clone(),
            };
            if &triangle_distance(center, &q, ctx) <= radius {
                image.insert(hex_project(&q));
            }
        }
    }
    image
}

/// Rows of `Z[j]` from top to bottom. Marked cells print `*`, the
/// origin of the window `o` when unmarked.
pub fn render_hex_text(marked: &BTreeSet<HexPoint>, center: HexPoint, half_width: i64) -> String {
    let mut out = String::new();
    for dm2 in (-half_width..=half_width).rev() {
        // j = -1/2 + i sqrt(3)/2: a cell sits at x = m1 - m2/2
        let indent = (half_width - dm2) as usize;
        out.push_str(&" ".repeat(indent));
        let cells: Vec<&str> = (-half_width..=half_width)
            .map(|dm1| {
                let h = HexPoint::new(center.m1 + dm1, center.m2 + dm2);
                if marked.contains(&h) {
                    "*"
                } else if h == center {
                    "o"
                } else {
                    "."
                }
            })
            .collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}

/// SVG rendering of the same grid: hexagonal cells, marked ones filled.
pub fn render_hex_svg(marked: &BTreeSet<HexPoint>, center: HexPoint, half_width: i64) -> String {
    let size = 20.0f64;
    let w = size * 3f64.sqrt();
    let span = (2 * half_width + 1) as f64;
    let (width, height) = (w * (span + 1.0) * 1.5, size * 1.5 * (span + 1.0) * 1.5);
    let mut out = format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{width:.0}\" height=\"{height:.0}\">\n"
    );
    for dm2 in -half_width..=half_width {
        for dm1 in -2 * half_width..=2 * half_width {
            let h = HexPoint::new(center.m1 + dm1, center.m2 + dm2);
            if hex_distance(h, center) > half_width {
                continue;
            }
            let cx = width / 2.0 + w * (dm1 as f64 - dm2 as f64 / 2.0);
            let cy = height / 2.0 - size * 1.5 * dm2 as f64;
            let corners: Vec<String> = (0..6)
                .map(|k| {
                    let a = std::f64::consts::PI / 3.0 * k as f64 + std::f64::consts::PI / 6.0;
                    format!("{:.2},{:.2}", cx + size * a.cos(), cy + size * a.sin())
                })
                .collect();
            let fill = if marked.contains(&h) {
                "#4a7ab7"
            } else {
                "none"
            };
            out += &format!(
                "  <polygon points=\"{}\" fill=\"{fill}\" stroke=\"black\"><title>{h}</title></polygon>\n",
                corners.join(" ")
            );
        }
    }
    out.push_str("</svg>\n");
    out
}
