//! Seeded property suites, one per library module.

use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use hyperdisc::classes::{admissible_classes, AlphaClass};
use hyperdisc::disc::{distance_exponent, hilbert_distance, in_disc, DiscPoint, LineShape};
use hyperdisc::geometry::{adjoint, iwasawa_decompose, Vec3};
use hyperdisc::oracle::{
    dual_check_depth, oracle_in_dual_check_with, sample_dual, stabilized_oracle_distance,
};
use hyperdisc::padic::{
    haar_ball_measure, hensel_sqrt, hilbert_symbol, rat, valuation, PadicContext, RadiusExponent,
    Rational, SquareClass,
};
use hyperdisc::sampling::{
    random_disc_point, random_nonzero_rational, random_pgl2, random_short_pair, random_so3_word,
    random_triangle_point, Height,
};
use hyperdisc::tree::{ball, neighbors, project, tree_distance, TreeVertex};
use hyperdisc::triangle::{
    ball_hex_image, hex_distance, hex_project, triangle_distance, triangle_oracle_distance,
};
use hyperdisc::Error;

use crate::Suite;

const H: Height = Height { int: 6, exp: 1 };
const ORACLE_MAX_DEPTH: u32 = 14;

#[derive(Serialize, Clone, Copy, Debug, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Serialize, Debug)]
pub struct Check {
    pub suite: &'static str,
    pub property: &'static str,
    pub cases: usize,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Serialize, Debug)]
pub struct Report {
    pub p: u64,
    pub seed: u64,
    pub checks: Vec<Check>,
    pub passed: usize,
    pub failures: usize,
    pub skipped: usize,
}

impl Report {
    pub fn plain(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skip => "SKIP",
            };
            s += &format!("{tag}  {}: {} ({} cases)", c.suite, c.property, c.cases);
            if let Some(d) = &c.detail {
                s += &format!(": {d}");
            }
            s.push('\n');
        }
        s += &format!(
            "{} properties: {} passed, {} failed, {} skipped (p = {}, seed {})\n",
            self.checks.len(),
            self.passed,
            self.failures,
            self.skipped,
            self.p,
            self.seed
        );
        s
    }
}

type CaseResult = Result<(), String>;

/// Collects checks for one suite; each property gets its own generator so
/// that suites produce the same results alone and inside `all`.
struct Runner<'a> {
    suite: &'static str,
    seed: u64,
    ctx: &'a PadicContext,
    checks: Vec<Check>,
}

impl<'a> Runner<'a> {
    fn rng(&self, property: &str) -> ChaCha8Rng {
        let salt = property
            .bytes()
            .chain(self.suite.bytes())
            .fold(0xcbf2_9ce4_8422_2325u64, |h, b| {
                (h ^ u64::from(b)).wrapping_mul(0x100_0000_01b3)
            });
        ChaCha8Rng::seed_from_u64(self.seed ^ salt)
    }

    fn check(
        &mut self,
        property: &'static str,
        cases: usize,
        mut case: impl FnMut(&mut ChaCha8Rng, usize) -> CaseResult,
    ) {
        let mut rng = self.rng(property);
        let mut detail = None;
        for i in 0..cases {
            if let Err(msg) = case(&mut rng, i) {
                detail = Some(format!("case {i}: {msg}"));
                break;
            }
        }
        self.checks.push(Check {
            suite: self.suite,
            property,
            cases,
            status: if detail.is_some() {
                Status::Fail
            } else {
                Status::Pass
            },
            detail,
        });
    }

    fn skip(&mut self, property: &'static str, reason: &str) {
        self.checks.push(Check {
            suite: self.suite,
            property,
            cases: 0,
            status: Status::Skip,
            detail: Some(reason.to_string()),
        });
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> CaseResult {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e(err: Error) -> String {
    err.to_string()
}

pub fn run(ctx: &PadicContext, suite: Suite, cases: usize, seed: u64, inject: bool) -> Report {
    let selected: Vec<Suite> = match suite {
        Suite::All => vec![
            Suite::Padic,
            Suite::Classgroups,
            Suite::Geometry,
            Suite::Disc,
            Suite::Oracle,
            Suite::Tree,
            Suite::Triangle,
        ],
        s => vec![s],
    };
    let mut checks = Vec::new();
    for s in selected {
        let name = match s {
            Suite::Padic => "padic",
            Suite::Classgroups => "classgroups",
            Suite::Geometry => "geometry",
            Suite::Disc => "disc",
            Suite::Oracle => "oracle",
            Suite::Tree => "tree",
            Suite::Triangle => "triangle",
            Suite::All => unreachable!("expanded above"),
        };
        let mut r = Runner {
            suite: name,
            seed,
            ctx,
            checks: Vec::new(),
        };
        match s {
            Suite::Padic => padic(&mut r, cases),
            Suite::Classgroups => classgroups(&mut r, cases),
            Suite::Geometry => geometry(&mut r, cases),
            Suite::Disc => disc(&mut r, cases, inject),
            Suite::Oracle => oracle(&mut r, cases),
            Suite::Tree => tree(&mut r, cases),
            Suite::Triangle => triangle(&mut r, cases),
            Suite::All => unreachable!("expanded above"),
        }
        checks.extend(r.checks);
    }
    let count = |st| checks.iter().filter(|c| c.status == st).count();
    Report {
        p: ctx.p(),
        seed,
        passed: count(Status::Pass),
        failures: count(Status::Fail),
        skipped: count(Status::Skip),
        checks,
    }
}

fn padic(r: &mut Runner, cases: usize) {
    let ctx = r.ctx.clone();
    let c = &ctx;
    r.check("valuation is additive", cases, |rng, _| {
        let (x, y) = (
            random_nonzero_rational(rng, H, c),
            random_nonzero_rational(rng, H, c),
        );
        let (vx, vy, vxy) = (valuation(&x, c), valuation(&y, c), valuation(&(&x * &y), c));
        ensure(vxy == Some(vx.unwrap() + vy.unwrap()), || {
            format!("x={x} y={y}")
        })
    });
    r.check("square class is multiplicative", cases, |rng, _| {
        let (x, y) = (
            random_nonzero_rational(rng, H, c),
            random_nonzero_rational(rng, H, c),
        );
        let lhs = SquareClass::of(&(&x * &y), c).map_err(e)?;
        let rhs = SquareClass::of(&x, c)
            .map_err(e)?
            .mul(SquareClass::of(&y, c).map_err(e)?);
        ensure(lhs == rhs, || format!("x={x} y={y}: {lhs} vs {rhs}"))
    });
    r.check("classes of x^2 times representatives", cases, |rng, _| {
        let x = random_nonzero_rational(rng, H, c);
        SquareClass::all(c).into_iter().try_for_each(|cls| {
            let got = SquareClass::of(&(&x * &x * cls.representative(c)), c).map_err(e)?;
            ensure(got == cls, || format!("x={x} class {cls}: got {got}"))
        })
    });
    r.check("hensel square roots square back", cases, |rng, _| {
        let x = random_nonzero_rational(rng, H, c);
        let sq = &x * &x;
        let s = hensel_sqrt(&sq, c).map_err(e)?;
        ensure(s.mul(&s).agrees_with(&sq, c), || format!("x={x}"))
    });
    r.check(
        "hilbert symbol is symmetric and bimultiplicative",
        cases,
        |rng, _| {
            let [a, b, d] = std::array::from_fn(|_| random_nonzero_rational(rng, H, c));
            let h = |x: &Rational, y: &Rational| hilbert_symbol(x, y, c).map_err(e);
            ensure(h(&a, &b)? == h(&b, &a)?, || format!("a={a} b={b}"))?;
            ensure(h(&a, &(&b * &d))? == h(&a, &b)? * h(&a, &d)?, || {
                format!("a={a} b={b} c={d}")
            })?;
            ensure(h(&a, &-&a)? == 1, || format!("(a, -a) != 1 for a={a}"))
        },
    );
    // for p = 2 the radii 1/2 and 1 both have measure 1
    r.check("haar measure of balls is monotone", 1, |_, _| {
        (-6..6).try_for_each(|t| {
            ensure(
                haar_ball_measure(t, c) <= haar_ball_measure(t + 1, c),
                || format!("t={t}"),
            )
        })
    });
}

fn classgroups(r: &mut Runner, cases: usize) {
    let ctx = r.ctx.clone();
    let c = &ctx;
    let (classes, discs) = if c.is_odd() { (4, 3) } else { (8, 7) };
    r.check("class counts", 1, |_, _| {
        let n = SquareClass::all(c).len();
        let a = admissible_classes(c).len();
        ensure(n == classes && a == discs, || {
            format!("{n} classes, {a} admissible")
        })
    });
    r.check("norm groups have index two", 1, |_, _| {
        admissible_classes(c).iter().try_for_each(|alpha| {
            let k = alpha.norm_group();
            let inside = SquareClass::all(c)
                .into_iter()
                .filter(|z| k.contains_class(*z, c))
                .count();
            ensure(2 * inside == classes, || {
                format!("alpha={alpha}: {inside} classes in K")
            })
        })
    });
    r.check("alpha x^2 + y^2 lies in K", cases, |rng, _| {
        admissible_classes(c).iter().try_for_each(|alpha| {
            let (x, y) = (
                random_nonzero_rational(rng, H, c),
                random_nonzero_rational(rng, H, c),
            );
            let z = alpha.rep() * &x * &x + &y * &y;
            if z.is_zero() {
                return Ok(());
            }
            let inside = alpha.norm_group().contains(&z, c).map_err(e)?;
            ensure(inside, || format!("alpha={alpha} x={x} y={y}"))
        })
    });
}

fn geometry(r: &mut Runner, cases: usize) {
    let ctx = r.ctx.clone();
    let c = &ctx;
    r.check("congruence scales Q by det^2", cases, |rng, _| {
        let g = random_pgl2(rng, H, c);
        let v = Vec3::new(
            random_nonzero_rational(rng, H, c),
            random_nonzero_rational(rng, H, c),
            random_nonzero_rational(rng, H, c),
        );
        let det = g.det();
        ensure(g.congruence(&v).q() == &det * &det * v.q(), || {
            format!("g={g:?} v={v}")
        })
    });
    r.check("adjoint action preserves Q", cases, |rng, _| {
        let g = random_pgl2(rng, H, c);
        let v = Vec3::new(
            random_nonzero_rational(rng, H, c),
            random_nonzero_rational(rng, H, c),
            random_nonzero_rational(rng, H, c),
        );
        let m = adjoint(&g).map_err(e)?;
        ensure(m.apply(&v).q() == v.q(), || format!("g={g:?} v={v}"))
    });
    r.check("Iwasawa factors multiply back", cases, |rng, _| loop {
        let m = random_so3_word(rng, 4, H, c);
        match iwasawa_decompose(&m) {
            Err(Error::ChartFailure) => continue,
            Err(err) => return Err(e(err)),
            Ok(f) => {
                let shapes = f.n_minus.is_n_minus() && f.h.is_h() && f.n_plus.is_n_plus();
                return ensure(shapes && f.product() == m, || format!("M={m:?}"));
            }
        }
    });
}

fn pair(
    rng: &mut ChaCha8Rng,
    i: usize,
    alpha: &AlphaClass,
    c: &PadicContext,
) -> (DiscPoint, DiscPoint) {
    if i.is_multiple_of(2) {
        random_short_pair(rng, alpha, H, c)
    } else {
        (
            random_disc_point(rng, alpha, H, c),
            random_disc_point(rng, alpha, H, c),
        )
    }
}

fn disc(r: &mut Runner, cases: usize, inject: bool) {
    let ctx = r.ctx.clone();
    let c = &ctx;
    let classes = admissible_classes(c);
    r.check("disc points pass the membership test", cases, |rng, i| {
        let alpha = &classes[i % classes.len()];
        let v = random_disc_point(rng, alpha, H, c);
        let g = random_pgl2(rng, H, c);
        ensure(in_disc(v.transform(&g).vec(), alpha, c).map_err(e)?, || {
            format!("v={}", v.vec())
        })
    });
    if !c.is_odd() {
        for property in [
            "closed form equals the oracle",
            "isometry invariance",
            "symmetry",
        ] {
            r.skip(property, "the closed form needs an odd prime");
        }
        return;
    }
    // the negative control shifts every constant by one ball
    let closed = |v: &DiscPoint, w: &DiscPoint| -> Result<Rational, String> {
        let d = hilbert_distance(v, w, c).map_err(e)?;
        if !inject {
            return Ok(d);
        }
        let (shape, t) = distance_exponent(v, w, c).map_err(e)?;
        Ok(match (shape, t) {
            (LineShape::Same, _) | (_, RadiusExponent::NegInfinity) => d,
            (_, RadiusExponent::Finite(t)) => haar_ball_measure(t + 1, c),
        })
    };
    r.check("closed form equals the oracle", cases, |rng, i| {
        let alpha = &classes[i % classes.len()];
        let (v, w) = pair(rng, i, alpha, c);
        let d = closed(&v, &w)?;
        let o =
            stabilized_oracle_distance(v.vec(), w.vec(), alpha, ORACLE_MAX_DEPTH, c).map_err(e)?;
        ensure(o.value == d, || {
            format!(
                "alpha={alpha} v=({}) w=({}): closed form {d}, oracle {} at depth {}",
                v.vec(),
                w.vec(),
                o.value,
                o.depth_used
            )
        })
    });
    r.check("isometry invariance", cases, |rng, i| {
        let alpha = &classes[i % classes.len()];
        let (v, w) = pair(rng, i, alpha, c);
        let g = random_pgl2(rng, H, c);
        let (d, dg) = (closed(&v, &w)?, closed(&v.transform(&g), &w.transform(&g))?);
        ensure(d == dg, || {
            format!("alpha={alpha} v=({}) w=({}) g={g:?}", v.vec(), w.vec())
        })
    });
    r.check("symmetry", cases, |rng, i| {
        let alpha = &classes[i % classes.len()];
        let (v, w) = pair(rng, i, alpha, c);
        ensure(closed(&v, &w)? == closed(&w, &v)?, || {
            format!("v=({}) w=({})", v.vec(), w.vec())
        })
    });
}

fn oracle(r: &mut Runner, cases: usize) {
    let ctx = r.ctx.clone();
    let c = &ctx;
    let classes = admissible_classes(c);
    // keep samples below ~10^5 cone points
    let cap = (11.5 / (c.p() as f64).ln()).floor() as u32;
    let samples: Vec<_> = (0..=cap).map(|d| sample_dual(d.max(1), c)).collect();
    r.check("dual check agrees with membership", cases, |rng, i| {
        let alpha = &classes[i % classes.len()];
        let p = c.p() as i64;
        let v = loop {
            let v = if rng.gen_bool(0.5) {
                random_disc_point(rng, alpha, Height { int: 4, exp: 1 }, c)
                    .vec()
                    .clone()
            } else {
                Vec3::from_ints(
                    rng.gen_range(-p * p..=p * p),
                    rng.gen_range(-p * p..=p * p),
                    rng.gen_range(-p * p..=p * p),
                )
            };
            if !v.is_zero() && dual_check_depth(&v, c) <= cap {
                break v;
            }
        };
        let depth = dual_check_depth(&v, c) as usize;
        let truth = in_disc(&v, alpha, c).map_err(e)?;
        let got = oracle_in_dual_check_with(&samples[depth], &v, alpha, c);
        ensure(got == truth, || {
            format!("alpha={alpha} v={v}: in_disc {truth}, dual check {got}")
        })
    });
    r.check(
        "oracle distance is symmetric and stable",
        cases.min(50),
        |rng, i| {
            let alpha = &classes[i % classes.len()];
            let (v, w) = pair(rng, i, alpha, c);
            let a = stabilized_oracle_distance(v.vec(), w.vec(), alpha, ORACLE_MAX_DEPTH, c)
                .map_err(e)?;
            let b = stabilized_oracle_distance(w.vec(), v.vec(), alpha, ORACLE_MAX_DEPTH, c)
                .map_err(e)?;
            ensure(a.stable && a.value == b.value, || {
                format!(
                    "alpha={alpha} v=({}) w=({}): {} vs {}",
                    v.vec(),
                    w.vec(),
                    a.value,
                    b.value
                )
            })
        },
    );
}

fn tree(r: &mut Runner, cases: usize) {
    let ctx = r.ctx.clone();
    let c = &ctx;
    r.check("radius-2 ball is exhaustive", 1, |_, _| {
        let p = c.p() as usize;
        let (vertices, edges) = ball(&TreeVertex::base(), 2, c);
        ensure(vertices.len() == 1 + (p + 1) + (p + 1) * p, || {
            format!("{} vertices", vertices.len())
        })?;
        ensure(edges.len() == vertices.len() - 1, || {
            format!("{} edges", edges.len())
        })?;
        vertices.iter().try_for_each(|u| {
            let nb = neighbors(u, c);
            ensure(nb.len() == p + 1, || {
                format!("{} has {} neighbours", u.label(c), nb.len())
            })?;
            nb.iter().try_for_each(|w| {
                ensure(tree_distance(u, w, c).map_err(e)? == 1, || {
                    format!("{} {}", u.label(c), w.label(c))
                })
            })
        })
    });
    if !c.is_odd() {
        for property in ["projection halves distances", "projection is covariant"] {
            r.skip(property, "the projection needs an odd prime");
        }
        return;
    }
    let even: Vec<AlphaClass> = admissible_classes(c)
        .into_iter()
        .filter(|a| !a.has_odd_valuation())
        .collect();
    r.check("projection halves distances", cases, |rng, i| {
        let alpha = &even[i % even.len()];
        let (v, w) = pair(rng, i, alpha, c);
        let d = hilbert_distance(&v, &w, c).map_err(e)?;
        let half = (d.clone() / rat(2, 1)).floor().to_integer();
        let td = tree_distance(&project(&v, c).map_err(e)?, &project(&w, c).map_err(e)?, c)
            .map_err(e)?;
        ensure(BigInt::from(td) == half, || {
            format!("v=({}) w=({}): d={d}, tree distance {td}", v.vec(), w.vec())
        })
    });
    r.check("projection is covariant", cases, |rng, i| {
        let alpha = &even[i % even.len()];
        let v = random_disc_point(rng, alpha, H, c);
        let g = random_pgl2(rng, H, c);
        let lhs = project(&v.transform(&g), c).map_err(e)?;
        let rhs = project(&v, c).map_err(e)?.transform(&g, c);
        ensure(lhs == rhs, || format!("v=({}) g={g:?}", v.vec()))
    });
}

fn triangle(r: &mut Runner, cases: usize) {
    let ctx = r.ctx.clone();
    let c = &ctx;
    r.check("formula equals the three-form oracle", cases, |rng, i| {
        let a = random_triangle_point(rng, None, c);
        let b = random_triangle_point(rng, (i % 3 == 0).then_some(&a), c);
        let (d, o) = (
            triangle_distance(&a, &b, c),
            triangle_oracle_distance(&a, &b, c),
        );
        ensure(d == o, || format!("{a} {b}: formula {d}, oracle {o}"))
    });
    r.check("hex distance is d - 1 off the diagonal", cases, |rng, _| {
        let (a, b) = (
            random_triangle_point(rng, None, c),
            random_triangle_point(rng, None, c),
        );
        let d = triangle_distance(&a, &b, c);
        let h = hex_distance(hex_project(&a), hex_project(&b));
        if d <= Rational::one() {
            return ensure(h == 0, || format!("{a} {b}: d={d}, hex {h}"));
        }
        ensure(d == Rational::from_integer(BigInt::from(h + 1)), || {
            format!("{a} {b}: d={d}, hex {h}")
        })
    });
    r.check("radius-2 ball covers the unit hexagon", 1, |rng, _| {
        let o = random_triangle_point(rng, None, c);
        let image = ball_hex_image(&o, &rat(2, 1), c);
        let centre = hex_project(&o);
        ensure(
            image.len() == 7 && image.iter().all(|h| hex_distance(*h, centre) <= 1),
            || format!("{} hex points", image.len()),
        )
    });
}
