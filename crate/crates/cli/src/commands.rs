use std::path::Path;

use num_bigint::BigInt;
use serde::Serialize;

use hyperdisc::classes::{admissible_classes, minus_one_in_k, AlphaClass};
use hyperdisc::disc::{
    closed_form_measure, distance_exponent, dual_description, in_base_orbit, in_disc,
    reduce_to_normal_form, DiscPoint, DualKind, LineShape,
};
use hyperdisc::geometry::Vec3;
use hyperdisc::oracle::{oracle_distance, stabilized_oracle_distance};
use hyperdisc::padic::{
    format_rational, hilbert_symbol, legendre, parse_rational, power_of_p, valuation, PadicContext,
    RadiusExponent, Rational, SquareClass,
};
use hyperdisc::tree::{project, to_dot, tree_distance, TreeVertex};
use hyperdisc::triangle::{
    ball_hex_image, hex_distance, hex_project, in_triangle, render_hex_svg, render_hex_text,
    triangle_distance, TrianglePoint,
};
use hyperdisc::Error;

use crate::{suites, Cli, CliError, Command, Common, Format, TreeCommand, TriangleCommand};

/// Depth cap for the stabilized oracle when `--depth` is not given.
const ORACLE_MAX_DEPTH: u32 = 14;

type Out = Result<String, CliError>;

pub fn run(cli: &Cli) -> Out {
    let common = &cli.common;
    match &cli.command {
        Command::Classify { value } => classify(common, value),
        Command::Symbol { a, b } => symbol(common, a, b.as_deref()),
        Command::Disc { point: None } => disc_list(common),
        Command::Disc { point: Some(v) } => disc_point(common, v),
        Command::Distance { v, w, oracle } => distance(common, v, w, *oracle),
        Command::Tree(t) => tree(common, t),
        Command::Triangle(t) => triangle(common, t),
        Command::Verify {
            suite,
            cases,
            inject_wrong_constant,
        } => {
            let ctx = common.ctx()?;
            let report = suites::run(&ctx, *suite, *cases, common.seed, *inject_wrong_constant);
            let text = render(common.format, &report, || report.plain())?;
            match report.failures {
                0 => Ok(text),
                failures => {
                    print!("{text}");
                    Err(CliError::Failures { failures })
                }
            }
        }
    }
}

fn render<T: Serialize>(format: Format, value: &T, plain: impl FnOnce() -> String) -> Out {
    match format {
        Format::Plain => Ok(plain()),
        Format::Json => serde_json::to_string_pretty(value)
            .map(|s| s + "\n")
            .map_err(|e| CliError::Other(e.to_string())),
    }
}

fn alpha(common: &Common, ctx: &PadicContext) -> Result<AlphaClass, CliError> {
    let label = common
        .alpha
        .as_deref()
        .ok_or_else(|| CliError::Usage("missing --alpha <class-label>".into()))?;
    Ok(AlphaClass::parse(label, ctx)?)
}

fn write_or_return(text: String, output: Option<&Path>) -> Out {
    match output {
        Some(path) => {
            std::fs::write(path, text)?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(text),
    }
}

#[derive(Serialize)]
struct Classified {
    p: u64,
    value: String,
    class: &'static str,
    valuation: i64,
    square: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    in_k: Option<bool>,
}

fn classify(common: &Common, value: &str) -> Out {
    let ctx = common.ctx()?;
    let x = parse_rational(value)?;
    let cls = SquareClass::of(&x, &ctx)?;
    let in_k = match common.alpha {
        Some(_) => Some(alpha(common, &ctx)?.norm_group().contains_class(cls, &ctx)),
        None => None,
    };
    let out = Classified {
        p: ctx.p(),
        value: format_rational(&x),
        class: cls.label(),
        valuation: valuation(&x, &ctx).expect("nonzero"),
        square: cls.is_square(),
        in_k,
    };
    render(common.format, &out, || match in_k {
        Some(k) => format!("{}\nin K: {k}\n", out.class),
        None => format!("{}\n", out.class),
    })
}

#[derive(Serialize)]
struct SymbolOut {
    p: u64,
    a: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    b: Option<String>,
    kind: &'static str,
    value: i8,
}

fn symbol(common: &Common, a: &str, b: Option<&str>) -> Out {
    let ctx = common.ctx()?;
    let x = parse_rational(a)?;
    let out = match b {
        Some(b) => {
            let y = parse_rational(b)?;
            SymbolOut {
                p: ctx.p(),
                a: format_rational(&x),
                b: Some(format_rational(&y)),
                kind: "hilbert",
                value: hilbert_symbol(&x, &y, &ctx)?,
            }
        }
        None => {
            if !ctx.is_odd() || !x.is_integer() {
                return Err(CliError::Usage(
                    "the Legendre symbol needs an odd prime and an integer".into(),
                ));
            }
            SymbolOut {
                p: ctx.p(),
                a: format_rational(&x),
                b: None,
                kind: "legendre",
                value: legendre(x.numer(), ctx.p()),
            }
        }
    };
    render(common.format, &out, || format!("{}\n", out.value))
}

#[derive(Serialize)]
struct ClassInfo {
    alpha: &'static str,
    representative: String,
    minus_one_in_k: bool,
    orbits: u8,
    dual: &'static str,
}

fn disc_list(common: &Common) -> Out {
    let ctx = common.ctx()?;
    let rows: Vec<ClassInfo> = admissible_classes(&ctx)
        .iter()
        .map(|a| {
            let minus = minus_one_in_k(a, &ctx);
            ClassInfo {
                alpha: a.label(),
                representative: format_rational(a.rep()),
                minus_one_in_k: minus,
                orbits: if minus { 2 } else { 1 },
                dual: match dual_description(a, &ctx) {
                    DualKind::ConeOnly => "cone",
                    DualKind::ConeAndDisc => "cone+disc",
                },
            }
        })
        .collect();
    render(common.format, &rows, || {
        let mut s = format!(
            "{:<7} {:>4} {:>6} {:>6}  dual\n",
            "alpha", "rep", "-1inK", "orbits"
        );
        for r in &rows {
            s += &format!(
                "{:<7} {:>4} {:>6} {:>6}  {}\n",
                r.alpha, r.representative, r.minus_one_in_k, r.orbits, r.dual
            );
        }
        s
    })
}

#[derive(Serialize)]
struct Membership {
    p: u64,
    alpha: &'static str,
    point: String,
    in_disc: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    q_class: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_s2: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    base_orbit: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    vertex: Option<String>,
}

fn disc_point(common: &Common, point: &str) -> Out {
    let ctx = common.ctx()?;
    let alpha = alpha(common, &ctx)?;
    let v = Vec3::parse(point)?;
    let mut out = Membership {
        p: ctx.p(),
        alpha: alpha.label(),
        point: v.to_string(),
        in_disc: in_disc(&v, &alpha, &ctx)?,
        q_class: None,
        alpha_s2: None,
        base_orbit: None,
        vertex: None,
    };
    if out.in_disc {
        let d = DiscPoint::new(v.clone(), &alpha, &ctx)?;
        out.q_class = Some(SquareClass::of(&v.q(), &ctx)?.label());
        out.alpha_s2 = Some(format_rational(&reduce_to_normal_form(&d, &ctx)?.alpha_s2));
        out.base_orbit = Some(in_base_orbit(&d, &ctx)?);
        out.vertex = project(&d, &ctx).ok().map(|t| t.label(&ctx));
    }
    render(common.format, &out, || {
        let mut s = format!("in disc: {}\n", out.in_disc);
        if let (Some(q), Some(s2), Some(orbit)) = (&out.q_class, &out.alpha_s2, out.base_orbit) {
            s += &format!("Q class: {q}\nnormal form: ({s2},0,1)\nbase orbit: {orbit}\n");
        }
        if let Some(t) = &out.vertex {
            s += &format!("tree vertex: {t}\n");
        }
        s
    })
}

#[derive(Serialize)]
struct DistanceOut {
    p: u64,
    alpha: &'static str,
    v: String,
    w: String,
    method: &'static str,
    value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    line: Option<&'static str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    exponent: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    remark_unverified: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    depth_used: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stable: Option<bool>,
}

fn exponent_value(t: RadiusExponent) -> Option<i64> {
    match t {
        RadiusExponent::Finite(t) => Some(t),
        RadiusExponent::NegInfinity => None,
    }
}

fn distance(common: &Common, v: &str, w: &str, oracle: bool) -> Out {
    let ctx = common.ctx()?;
    let alpha = alpha(common, &ctx)?;
    let (v, w) = (Vec3::parse(v)?, Vec3::parse(w)?);
    let (dv, dw) = (
        DiscPoint::new(v.clone(), &alpha, &ctx)?,
        DiscPoint::new(w.clone(), &alpha, &ctx)?,
    );
    let mut out = DistanceOut {
        p: ctx.p(),
        alpha: alpha.label(),
        v: v.to_string(),
        w: w.to_string(),
        method: "closed-form",
        value: String::new(),
        line: None,
        exponent: None,
        remark_unverified: None,
        depth_used: None,
        stable: None,
    };
    if oracle || !ctx.is_odd() {
        if !oracle {
            eprintln!("hyperdisc: warning: no closed form for p = 2, using the sampled oracle");
        }
        let od = match common.depth {
            Some(d) => oracle_distance(&v, &w, &alpha, d, &ctx)?,
            None => stabilized_oracle_distance(&v, &w, &alpha, ORACLE_MAX_DEPTH, &ctx)?,
        };
        out.method = "oracle";
        out.value = format_rational(&od.value);
        out.exponent = exponent_value(od.exponent);
        out.depth_used = Some(od.depth_used);
        out.stable = Some(od.stable);
    } else {
        let (shape, t) = distance_exponent(&dv, &dw, &ctx)?;
        out.value = format_rational(&closed_form_measure(t, &alpha, &ctx));
        out.line = Some(match shape {
            LineShape::Same => "same",
            LineShape::Long => "long",
            LineShape::Short => "short",
        });
        out.exponent = exponent_value(t);
        // the odd-valuation constants are only established for |y| = 1 on short lines
        let unverified = alpha.has_odd_valuation()
            && shape == LineShape::Short
            && matches!(t, RadiusExponent::Finite(t) if t < 0);
        if unverified {
            eprintln!("hyperdisc: warning: the short-line constant for odd-valuation alpha with |y| < 1 is only confirmed by the oracle");
        }
        out.remark_unverified = Some(unverified);
    }
    render(common.format, &out, || format!("{}\n", out.value))
}

fn parse_vertex(s: &str, ctx: &PadicContext) -> Result<TreeVertex, CliError> {
    let bad = || CliError::Usage(format!("cannot parse vertex {s:?}"));
    let trimmed = s.trim();
    if trimmed.starts_with('[') {
        let entries: Vec<Rational> = trimmed
            .split([',', '[', ']'])
            .filter(|t| !t.trim().is_empty())
            .map(parse_rational)
            .collect::<Result<_, _>>()?;
        let [a, b, c, d]: [Rational; 4] = entries.try_into().map_err(|_| bad())?;
        return Ok(TreeVertex::from_basis([[a, b], [c, d]], ctx)?);
    }
    let (n, c) = trimmed.split_once(',').ok_or_else(bad)?;
    let n: i64 = n.trim().parse().map_err(|_| bad())?;
    let c = parse_rational(c)?;
    let one = Rational::from_integer(BigInt::from(1));
    let zero = Rational::from_integer(BigInt::from(0));
    Ok(TreeVertex::from_basis(
        [[power_of_p(n, ctx), c], [zero, one]],
        ctx,
    )?)
}

#[derive(Serialize)]
struct DotOut {
    center: String,
    radius: u32,
    dot: String,
}

#[derive(Serialize)]
struct Projected {
    point: String,
    vertex: String,
    n: i64,
    c: String,
}

#[derive(Serialize)]
struct TreeDistanceOut {
    u: String,
    w: String,
    distance: u64,
}

fn tree(common: &Common, cmd: &TreeCommand) -> Out {
    let ctx = common.ctx()?;
    match cmd {
        TreeCommand::ExportDot {
            center,
            radius,
            output,
        } => {
            let c = parse_vertex(center, &ctx)?;
            let dot = to_dot(&c, *radius, &ctx);
            let out = DotOut {
                center: c.label(&ctx),
                radius: *radius,
                dot: dot.clone(),
            };
            let text = render(common.format, &out, || dot)?;
            write_or_return(text, output.as_deref())
        }
        TreeCommand::Project { points } => {
            let alpha = alpha(common, &ctx)?;
            let rows = points
                .iter()
                .map(|s| {
                    let v = Vec3::parse(s)?;
                    let t = project(&DiscPoint::new(v.clone(), &alpha, &ctx)?, &ctx)?;
                    Ok(Projected {
                        point: v.to_string(),
                        vertex: t.label(&ctx),
                        n: t.n(),
                        c: format_rational(t.c()),
                    })
                })
                .collect::<Result<Vec<_>, Error>>()?;
            render(common.format, &rows, || {
                rows.iter()
                    .map(|r| format!("{} -> {}\n", r.point, r.vertex))
                    .collect()
            })
        }
        TreeCommand::Distance { u, w } => {
            let (a, b) = (parse_vertex(u, &ctx)?, parse_vertex(w, &ctx)?);
            let out = TreeDistanceOut {
                u: a.label(&ctx),
                w: b.label(&ctx),
                distance: tree_distance(&a, &b, &ctx)?,
            };
            render(common.format, &out, || format!("{}\n", out.distance))
        }
    }
}

fn parse_triangle_point(s: &str, ctx: &PadicContext) -> Result<TrianglePoint, CliError> {
    let v = Vec3::parse(s)?;
    in_triangle(&v, ctx)?.ok_or_else(|| {
        CliError::Other(format!(
            "{v} is not in the triangle: a coordinate ratio has a non-square unit part"
        ))
    })
}

#[derive(Serialize)]
struct TriangleDistanceOut {
    p: u64,
    v: String,
    w: String,
    value: String,
    hex_v: [i64; 2],
    hex_w: [i64; 2],
    hex_distance: i64,
}

#[derive(Serialize)]
struct HexmapOut {
    center: String,
    radius: String,
    hex_points: Vec<[i64; 2]>,
    render: String,
}

fn triangle(common: &Common, cmd: &TriangleCommand) -> Out {
    let ctx = common.ctx()?;
    match cmd {
        TriangleCommand::Distance { v, w } => {
            let (a, b) = (
                parse_triangle_point(v, &ctx)?,
                parse_triangle_point(w, &ctx)?,
            );
            let (ha, hb) = (hex_project(&a), hex_project(&b));
            let out = TriangleDistanceOut {
                p: ctx.p(),
                v: v.clone(),
                w: w.clone(),
                value: format_rational(&triangle_distance(&a, &b, &ctx)),
                hex_v: [ha.m1, ha.m2],
                hex_w: [hb.m1, hb.m2],
                hex_distance: hex_distance(ha, hb),
            };
            render(common.format, &out, || format!("{}\n", out.value))
        }
        TriangleCommand::Hexmap {
            center,
            radius,
            svg,
            output,
        } => {
            let c = parse_triangle_point(center, &ctx)?;
            let r = parse_rational(radius)?;
            if r < Rational::from_integer(BigInt::from(0)) {
                return Err(CliError::Usage("negative radius".into()));
            }
            let image = ball_hex_image(&c, &r, &ctx);
            let half_width = r.ceil().to_integer().try_into().unwrap_or(0i64) + 1;
            let hc = hex_project(&c);
            let picture = if *svg {
                render_hex_svg(&image, hc, half_width)
            } else {
                render_hex_text(&image, hc, half_width)
            };
            let out = HexmapOut {
                center: center.clone(),
                radius: format_rational(&r),
                hex_points: image.iter().map(|h| [h.m1, h.m2]).collect(),
                render: picture.clone(),
            };
            let text = render(common.format, &out, || picture)?;
            write_or_return(text, output.as_deref())
        }
    }
}
