//! The Bruhat-Tits tree of `PGL(2, Q_p)` and the projection of the discs of
//! even-valuation `alpha` onto it.
//!
//! A vertex is a lattice class, stored as the basis `(p^n, 0), (c, 1)` with
//! `0 <= c < p^n` a `p`-adic digit expansion truncated below `p^n`.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;
use std::ops::RangeInclusive;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;

use crate::disc::{qp_vec_agree, DiscPoint, LineKind, QpVec3};
use crate::error::{Error, Result};
use crate::geometry::Pgl2;
use crate::padic::{
    format_rational, power_of_p, residue_mod, valuation, PadicContext, Qp, Rational,
};

fn r(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// `c mod p^n Z_p`, as a rational in `[0, p^n)` with a power of `p` as
/// denominator.
fn reduce_mod_power(c: &Qp, n: i64, ctx: &PadicContext) -> Result<Rational> {
    let v = match c.valuation(ctx) {
        None => return Ok(Rational::zero()),
        Some(v) if v >= n => return Ok(Rational::zero()),
        Some(v) => v,
    };
    // c = u p^v with u a unit; keep n - v digits of u
    let keep = (n - v) as u32;
    let modulus = ctx.pow(keep);
    let digits = match c {
        Qp::Exact(x) => residue_mod(&(x * power_of_p(-v, ctx)), &modulus),
        Qp::Approx(a) => {
            if a.digits() < keep {
                return Err(Error::PrecisionExhausted { digits: a.digits() });
            }
            a.unit_digits().mod_floor(&modulus)
        }
    };
    Ok(Rational::from_integer(digits) * power_of_p(v, ctx))
}

/// A vertex of the tree.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeVertex {
    n: i64,
    c: Rational,
}

impl TreeVertex {
    /// The class of `Z_p^2`.
    pub fn base() -> Self {
        Self {
            n: 0,
            c: Rational::zero(),
        }
    }

    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn c(&self) -> &Rational {
        &self.c
    }

    /// The lattice spanned by the columns of `[[a, b], [c, d]]`.
    pub fn from_basis(m: [[Rational; 2]; 2], ctx: &PadicContext) -> Result<Self> {
        let q = m.map(|row| row.map(Qp::Exact));
        Self::from_qp_basis(&q, ctx)
    }

    /// As [`TreeVertex::from_basis`], for approximate entries.
    pub fn from_qp_basis(m: &[[Qp; 2]; 2], ctx: &PadicContext) -> Result<Self> {
        let cols = [[&m[0][0], &m[1][0]], [&m[0][1], &m[1][1]]];
        let bottom = |i: usize| cols[i][1].valuation(ctx);
        let pivot = match (bottom(0), bottom(1)) {
            (None, None) => return Err(Error::SingularBasis),
            (Some(_), None) => 0,
            (None, Some(_)) => 1,
            (Some(a), Some(b)) => usize::from(b < a),
        };
        let [py, pe] = cols[pivot];
        let [ox, of] = cols[1 - pivot];
        // clear the bottom entry of the other column, then divide by the pivot
        let x = ox.sub(&of.mul(py, ctx).div(pe, ctx)?, ctx)?;
        if x.is_zero() {
            return Err(Error::SingularBasis);
        }
        let n = x.div(pe, ctx)?.valuation(ctx).expect("nonzero");
        let c = reduce_mod_power(&py.div(pe, ctx)?, n, ctx)?;
        Ok(Self { n, c })
    }

    pub fn basis(&self, ctx: &PadicContext) -> [[Rational; 2]; 2] {
        [[power_of_p(self.n, ctx), self.c.clone()], [r(0), r(1)]]
    }

    /// `[[p^n,c],[0,1]]` with the entries written out.
    pub fn label(&self, ctx: &PadicContext) -> String {
        format!(
            "[[{},{}],[0,1]]",
            format_rational(&power_of_p(self.n, ctx)),
            format_rational(&self.c)
        )
    }

    /// The image lattice `g L`.
    pub fn transform(&self, g: &Pgl2, ctx: &PadicContext) -> TreeVertex {
        let [[a, b], [c, d]] = self.basis(ctx);
        let m = [
            [&g.a * &a + &g.b * &c, &g.a * &b + &g.b * &d],
            [&g.c * &a + &g.d * &c, &g.c * &b + &g.d * &d],
        ];
        Self::from_basis(m, ctx).expect("invertible image")
    }
}

fn inverse_times(u: &[[Rational; 2]; 2], w: &[[Rational; 2]; 2]) -> [[Rational; 2]; 2] {
    let det = &u[0][0] * &u[1][1] - &u[0][1] * &u[1][0];
    let inv = [
        [&u[1][1] / &det, -&u[0][1] / &det],
        [-&u[1][0] / &det, &u[0][0] / &det],
    ];
    std::array::from_fn(|i| std::array::from_fn(|j| &inv[i][0] * &w[0][j] + &inv[i][1] * &w[1][j]))
}

/// `|e1 - e2|` for the elementary divisors `p^e1, p^e2` of `U^-1 W`.
pub fn tree_distance(u: &TreeVertex, w: &TreeVertex, ctx: &PadicContext) -> Result<u64> {
    let m = inverse_times(&u.basis(ctx), &w.basis(ctx));
    let det = &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0];
    let vdet = valuation(&det, ctx).ok_or(Error::SingularBasis)?;
    let vmin = m
        .iter()
        .flatten()
        .filter_map(|x| valuation(x, ctx))
        .min()
        .ok_or(Error::SingularBasis)?;
    Ok((vdet - 2 * vmin) as u64)
}

/// The `p + 1` classes of index-`p` sublattices: `<p e1, e2 + j e1>` for
/// `0 <= j < p`, and `<e1, p e2>`.
pub fn neighbors(u: &TreeVertex, ctx: &PadicContext) -> Vec<TreeVertex> {
    let [[a, b], [c, d]] = u.basis(ctx);
    let p = r(ctx.p() as i64);
    let mut out: Vec<TreeVertex> = (0..ctx.p() as i64)
        .map(|j| {
            let j = r(j);
            let m = [[&p * &a, &b + &j * &a], [&p * &c, &d + &j * &c]];
            TreeVertex::from_basis(m, ctx).expect("sublattice")
        })
        .collect();
    let m = [[a, &p * &b], [c, &p * &d]];
    out.push(TreeVertex::from_basis(m, ctx).expect("sublattice"));
    out
}

/// All vertices within `radius` of `center`, in breadth-first order, with the
/// tree edges between them.
pub fn ball(
    center: &TreeVertex,
    radius: u32,
    ctx: &PadicContext,
) -> (Vec<TreeVertex>, Vec<(usize, usize)>) {
    let mut vertices = vec![center.clone()];
    let mut edges = Vec::new();
    let mut seen: BTreeSet<TreeVertex> = BTreeSet::from([center.clone()]);
    let mut queue = VecDeque::from([(0usize, 0u32)]);
    while let Some((i, depth)) = queue.pop_front() {
        if depth == radius {
            continue;
        }
        for nb in neighbors(&vertices[i], ctx) {
            if seen.insert(nb.clone()) {
                vertices.push(nb);
                edges.push((i, vertices.len() - 1));
                queue.push_back((vertices.len() - 1, depth + 1));
            }
        }
    }
    (vertices, edges)
}

/// Graphviz rendering of [`ball`], labelled by canonical bases.
pub fn to_dot(center: &TreeVertex, radius: u32, ctx: &PadicContext) -> String {
    let (vertices, edges) = ball(center, radius, ctx);
    let labels: Vec<String> = vertices.iter().map(|v| v.label(ctx)).collect();
    let mut out = format!("graph bruhat_tits_p{} {{\n", ctx.p());
    for (v, l) in vertices.iter().zip(&labels) {
        let d = tree_distance(center, v, ctx).expect("valid vertices");
        out += &format!("  \"{l}\" [distance={d}];\n");
    }
    for (i, j) in edges {
        out += &format!("  \"{}\" -- \"{}\";\n", labels[i], labels[j]);
    }
    out.push_str("}\n");
    out
}

/// A point `[a:b]` of `P^1(Q_p)`, normalized to `[1:b]` or `[0:1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryPoint {
    a: Qp,
    b: Qp,
}

impl BoundaryPoint {
    pub fn new(a: Qp, b: Qp, ctx: &PadicContext) -> Result<Self> {
        if a.is_zero() && b.is_zero() {
            return Err(Error::ZeroVector);
        }
        if a.is_zero() {
            return Ok(Self {
                a: Qp::zero(),
                b: Qp::one(),
            });
        }
        Ok(Self {
            b: b.div(&a, ctx)?,
            a: Qp::one(),
        })
    }

    pub fn coords(&self) -> (&Qp, &Qp) {
        (&self.a, &self.b)
    }

    /// The image of the cone point `K_alpha (a^2, ab, b^2)`.
    pub fn from_cone_vector(w: &QpVec3, ctx: &PadicContext) -> Result<Self> {
        if w[0].is_zero() {
            return Self::new(w[1].clone(), w[2].clone(), ctx);
        }
        Self::new(w[0].clone(), w[1].clone(), ctx)
    }

    /// The cone point `(a^2, ab, b^2)`.
    pub fn cone_vector(&self, ctx: &PadicContext) -> QpVec3 {
        [
            self.a.mul(&self.a, ctx),
            self.a.mul(&self.b, ctx),
            self.b.mul(&self.b, ctx),
        ]
    }

    /// Equality to the working precision.
    pub fn agrees(&self, other: &BoundaryPoint, ctx: &PadicContext) -> bool {
        let z = Qp::zero();
        qp_vec_agree(
            &[self.a.clone(), self.b.clone(), z.clone()],
            &[other.a.clone(), other.b.clone(), z],
            ctx,
        )
    }

    /// Moebius action `[a:b] -> [g (a, b)]`.
    pub fn transform(&self, g: &Pgl2, ctx: &PadicContext) -> Result<BoundaryPoint> {
        let a = self.a.scale(&g.a, ctx).add(&self.b.scale(&g.b, ctx), ctx)?;
        let b = self.a.scale(&g.c, ctx).add(&self.b.scale(&g.d, ctx), ctx)?;
        Self::new(a, b, ctx)
    }
}

impl fmt::Display for BoundaryPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}:{}]", self.a, self.b)
    }
}

pub fn boundary_of_long_line(
    line: &LineKind,
    ctx: &PadicContext,
) -> Result<(BoundaryPoint, BoundaryPoint)> {
    match line {
        LineKind::Short => Err(Error::NotLongLine),
        LineKind::Long { ends } => Ok((
            BoundaryPoint::from_cone_vector(&ends[0], ctx)?,
            BoundaryPoint::from_cone_vector(&ends[1], ctx)?,
        )),
    }
}

/// The vertices `Z_p p^k v1 + Z_p v2` for `k` in `range`, consecutive ones
/// adjacent.
pub fn geodesic_vertices(
    b1: &BoundaryPoint,
    b2: &BoundaryPoint,
    range: RangeInclusive<i64>,
    ctx: &PadicContext,
) -> Result<Vec<TreeVertex>> {
    if b1.agrees(b2, ctx) {
        return Err(Error::EqualBoundaryPoints);
    }
    range
        .map(|k| {
            let pk = power_of_p(k, ctx);
            let m = [
                [b1.a.scale(&pk, ctx), b2.a.clone()],
                [b1.b.scale(&pk, ctx), b2.b.clone()],
            ];
            TreeVertex::from_qp_basis(&m, ctx)
        })
        .collect()
}

/// `pi(v)`: the lattice `<(s, 0), (0, 1)>` of the normal form `(alpha s^2, 0, 1)`
/// pushed forward by the shear `[[1, y/z], [0, 1]]`.
pub fn project(v: &DiscPoint, ctx: &PadicContext) -> Result<TreeVertex> {
    if !ctx.is_odd() {
        return Err(Error::OddPOnly);
    }
    let alpha = v.alpha();
    if alpha.has_odd_valuation() {
        return Err(Error::OddValuationAlpha);
    }
    let w = v.vec();
    let s2 = w.q() / (&w.z * &w.z * alpha.rep());
    let n = valuation(&s2, ctx).expect("nonzero") / 2;
    let m = [[power_of_p(n, ctx), &w.y / &w.z], [r(0), r(1)]];
    TreeVertex::from_basis(m, ctx)
}

impl TreeVertex {
    /// Whether the class is in the `PSL(2, Q_p)`-orbit of `Z_p^2`.
    pub fn even(&self) -> bool {
        self.n.is_even()
    }
}
