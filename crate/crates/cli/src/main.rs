mod io;
mod render;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use lelek::dynamics::{find_sup_one_tail, transitive_point_H, verify, Detail, Mode, VerifyParams, DEFAULT_CYLINDER_CAP, DEFAULT_TAIL_BUDGET};
use lelek::fans::{make_star, Fan};
use lelek::mahavier::{mahavier_product_capped, SegmentComplex, DEFAULT_CAP};
use lelek::ns_fan::{check_arc_intersections, construct_ns_fan, schedule};
use lelek::quotients::{
    base_fan, degree_from_spec, degree_report, distinguish, quotient_fan, star_legs, GluingSpec, IndexSequence, QuotientFan,
};
use lelek::rational::{parse_q, to_pq, Q};
use lelek::relations::{full_relation, identity_relation, make_F_rrho, make_H, make_HR, never_connect, PLRelation};
use serde::Serialize;
use serde_json::Value as Json;

use crate::io::{emit, read_json, to_json};
use crate::render::{complex_drawing, fan_drawing, svg, ColorBy, RenderSpec};

/// Exit status for a false verdict.
const EXIT_FALSE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAPACITY: u8 = 3;

#[derive(Parser)]
#[command(name = "lelek", version, about = "Closed-relation dynamics, Mahavier products and Lelek-like fans in exact arithmetic")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build piecewise-affine relations.
    Relation {
        #[command(subcommand)]
        action: RelationCmd,
    },
    /// Enumerate finite Mahavier products.
    Mahavier {
        #[command(subcommand)]
        action: MahavierCmd,
    },
    /// Check transitivity or mixing at a finite scale. Exit 0 when the verdict holds, 1 otherwise.
    Verify(VerifyArgs),
    /// Emit a prefix of a point with dense orbit in the extended system.
    TransitivePoint(TransitivePointArgs),
    /// Greedy orbit under x -> r x, x -> rho x whose sup approaches 1.
    SupOneTail(SupTailArgs),
    /// Quotient fans indexed by sequences with i_n in {2n-1, 2n}.
    Family {
        #[command(subcommand)]
        action: FamilyCmd,
    },
    /// Fans whose legs are limits of arcs.
    NsFan {
        #[command(subcommand)]
        action: NsFanCmd,
    },
    /// Draw a 2D projection of a complex or fan as SVG.
    Render(RenderArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Frho,
    #[value(name = "H")]
    H,
    #[value(name = "HR")]
    Hr,
    Identity,
    Full,
}

#[derive(Subcommand)]
enum RelationCmd {
    Make {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, value_parser = parse_rational)]
        r: Option<Q>,
        #[arg(long, value_parser = parse_rational)]
        rho: Option<Q>,
        /// Number of unit components of the extended space.
        #[arg(long)]
        kmax: Option<usize>,
        /// Base relation for --kind HR.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Branch count for --kind full.
        #[arg(long, default_value_t = 4)]
        pieces: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MahavierCmd {
    Build {
        #[arg(long)]
        relation: PathBuf,
        #[arg(long)]
        depth: usize,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Transitive,
    Mixing,
}

#[derive(Clone, Copy, ValueEnum)]
enum DetailArg {
    Failures,
    All,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    relation: PathBuf,
    #[arg(long, value_enum)]
    mode: ModeArg,
    #[arg(long)]
    depth: usize,
    /// Cell width, of the form 1/2^p.
    #[arg(long, value_parser = parse_rational)]
    epsilon: Q,
    #[arg(long)]
    horizon: usize,
    #[arg(long, value_enum, default_value_t = DetailArg::Failures)]
    detail: DetailArg,
    #[arg(long, default_value_t = DEFAULT_CYLINDER_CAP)]
    cap: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TransitivePointArgs {
    /// The base relation R on [0, 1].
    #[arg(long)]
    relation: PathBuf,
    /// An R-orbit x_1, x_2, .. as comma-separated rationals.
    #[arg(long)]
    x: String,
    #[arg(long)]
    len: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SupTailArgs {
    #[arg(long, value_parser = parse_rational)]
    s: Q,
    #[arg(long, value_parser = parse_rational)]
    r: Q,
    #[arg(long, value_parser = parse_rational)]
    rho: Q,
    #[arg(long, value_parser = parse_rational)]
    tol: Q,
    #[arg(long, default_value_t = DEFAULT_TAIL_BUDGET)]
    max_len: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BaseArgs {
    /// Relation whose product supplies the base fan; F_{r,rho} when absent.
    #[arg(long)]
    relation: Option<PathBuf>,
    #[arg(long, value_parser = parse_rational, default_value = "1/2")]
    r: Q,
    #[arg(long, value_parser = parse_rational, default_value = "3")]
    rho: Q,
    #[arg(long, default_value_t = 2)]
    depth: usize,
    /// Triple placement as JSON; evenly spaced triples when absent.
    #[arg(long)]
    gluing: Option<PathBuf>,
}

#[derive(Subcommand)]
enum FamilyCmd {
    Build {
        #[arg(long, value_parser = parse_index)]
        index: IndexSequence,
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Degrees of the glued star legs, optionally recovered from approximants.
    Degrees {
        #[arg(value_parser = parse_index)]
        index: IndexSequence,
        #[command(flatten)]
        base: BaseArgs,
        #[arg(long)]
        detect: bool,
        #[arg(long, default_value_t = 8)]
        approximants: usize,
        #[arg(long, value_parser = parse_rational, default_value = "1/16")]
        tol: Q,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// First position where two index prefixes differ, with the degrees there.
    Distinguish {
        #[arg(value_parser = parse_index)]
        a: IndexSequence,
        #[arg(value_parser = parse_index)]
        b: IndexSequence,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum NsFanCmd {
    Construct {
        /// Use the planar star with this many legs as F.
        #[arg(long, conflicts_with = "fan", required_unless_present = "fan")]
        star: Option<usize>,
        /// Fan JSON in dimension 2 or 3.
        #[arg(long)]
        fan: Option<PathBuf>,
        #[arg(long)]
        n_max: usize,
        /// Largest number of product coordinates allowed.
        #[arg(long, default_value_t = 4096)]
        budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct RenderArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Product indices for complexes, 1-based positions for fans.
    #[arg(long, value_parser = parse_coords)]
    coords: (i64, i64),
    #[arg(long, default_value_t = 800)]
    width: u32,
    #[arg(long, default_value_t = 800)]
    height: u32,
    #[arg(long, default_value_t = 20)]
    margin: u32,
    #[arg(long, value_parser = parse_rational, default_value = "1")]
    stroke: Q,
    #[arg(long, value_enum, default_value_t = ColorBy::WordLength)]
    color_by: ColorBy,
}

fn parse_rational(s: &str) -> std::result::Result<Q, String> {
    parse_q(s).map_err(|e| e.to_string())
}

fn parse_index(s: &str) -> std::result::Result<IndexSequence, String> {
    IndexSequence::parse(s).map_err(|e| e.to_string())
}

fn parse_coords(s: &str) -> std::result::Result<(i64, i64), String> {
    let (a, b) = s.split_once(',').ok_or("expected i,j")?;
    let p = |t: &str| t.trim().parse::<i64>().map_err(|e| format!("{t:?}: {e}"));
    let (i, j) = (p(a)?, p(b)?);
    if i == j {
        return Err("the two coordinates must differ".into());
    }
    Ok((i, j))
}

fn load_relation(path: &Path) -> Result<PLRelation> {
    let rel: PLRelation = read_json(path)?;
    Ok(rel.validated()?)
}

fn warn_if_connecting(r: &Q, rho: &Q) -> Result<()> {
    let nc = never_connect(r, rho)?;
    if !nc.never_connect {
        eprintln!("warning: r = {} and rho = {} fail the never-connect condition; orbits under the two maps meet", to_pq(r), to_pq(rho));
    }
    Ok(())
}

fn need<'a>(v: &'a Option<Q>, flag: &str) -> Result<&'a Q> {
    v.as_ref().with_context(|| format!("--{flag} is required for this kind"))
}

fn relation_make(kind: Kind, r: &Option<Q>, rho: &Option<Q>, kmax: Option<usize>, input: &Option<PathBuf>, pieces: usize) -> Result<PLRelation> {
    Ok(match kind {
        Kind::Frho => {
            let (r, rho) = (need(r, "r")?, need(rho, "rho")?);
            warn_if_connecting(r, rho)?;
            make_F_rrho(r, rho)?
        }
        Kind::H => {
            let (r, rho) = (need(r, "r")?, need(rho, "rho")?);
            let k = kmax.context("--kmax is required for --kind H")?;
            warn_if_connecting(r, rho)?;
            make_H(r, rho, k)?
        }
        Kind::Hr => {
            let k = kmax.context("--kmax is required for --kind HR")?;
            let base = match input {
                Some(p) => load_relation(p)?,
                None => {
                    let (r, rho) = (need(r, "r")?, need(rho, "rho")?);
                    warn_if_connecting(r, rho)?;
                    make_F_rrho(r, rho)?
                }
            };
            make_HR(&base, k)?
        }
        Kind::Identity => identity_relation(),
        Kind::Full => full_relation(pieces)?,
    })
}

fn quotient_from(idx: &IndexSequence, base: &BaseArgs) -> Result<QuotientFan> {
    let rel = match &base.relation {
        Some(p) => load_relation(p)?,
        None => make_F_rrho(&base.r, &base.rho)?,
    };
    let fan = base_fan(&rel, base.depth)?;
    let spec = match &base.gluing {
        Some(p) => read_json::<GluingSpec>(p)?.validated()?,
        None => GluingSpec::default_for(idx),
    };
    let star = star_legs(&fan, idx.len())?;
    Ok(quotient_fan(&fan, &star, idx, &spec)?)
}

#[derive(Serialize)]
struct Degrees {
    index: IndexSequence,
    degrees: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detection: Option<lelek::quotients::DegreeReport>,
}

#[derive(Serialize)]
struct NsReport {
    n_max: usize,
    schedule: Vec<u64>,
    dim: usize,
    distances: Vec<String>,
    nonincreasing_from: usize,
    arcs_meet_only_at_top: bool,
    fan: Fan,
}

fn render_input(path: &Path, spec: &RenderSpec) -> Result<String> {
    let raw: Json = read_json(path)?;
    let obj = raw.as_object().context("render input must be a JSON object")?;
    let drawing = if obj.contains_key("segments") {
        let cx: SegmentComplex = serde_json::from_value(raw).context("reading a complex")?;
        complex_drawing(&cx, spec)?
    } else if obj.contains_key("legs") {
        let fan: Fan = serde_json::from_value(raw).context("reading a fan")?;
        fan_drawing(&fan, spec)?
    } else if let Some(inner) = obj.get("fan") {
        // quotient fans and ns-fan reports carry the drawable fan under "fan"
        let fan: Fan = serde_json::from_value(inner.clone()).context("reading a fan")?;
        fan_drawing(&fan, spec)?
    } else {
        bail!("{} is neither a complex nor a fan", path.display());
    };
    svg(&drawing, spec)
}

/// Runs one command; the flag is the verdict for `verify`.
fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Relation { action: RelationCmd::Make { kind, r, rho, kmax, input, pieces, out } } => {
            let rel = relation_make(kind, &r, &rho, kmax, &input, pieces)?;
            emit(out.as_ref(), &to_json(&rel)?)?;
        }
        Command::Mahavier { action: MahavierCmd::Build { relation, depth, cap, out } } => {
            let rel = load_relation(&relation)?;
            let cx = mahavier_product_capped(&rel, depth, cap)?;
            emit(out.as_ref(), &to_json(&cx)?)?;
        }
        Command::Verify(a) => {
            let rel = load_relation(&a.relation)?;
            let mut params = VerifyParams::new(a.depth, a.epsilon, a.horizon);
            params.cap = a.cap;
            params.detail = match a.detail {
                DetailArg::Failures => Detail::Failures,
                DetailArg::All => Detail::All,
            };
            let mode = match a.mode {
                ModeArg::Transitive => Mode::Transitive,
                ModeArg::Mixing => Mode::Mixing,
            };
            let report = verify(&rel, &params, mode)?;
            emit(a.out.as_ref(), &to_json(&report)?)?;
            return Ok(report.verdict);
        }
        Command::TransitivePoint(a) => {
            let rel = load_relation(&a.relation)?;
            let x = a.x.split(',').map(|t| parse_q(t.trim())).collect::<lelek::Result<Vec<_>>>()?;
            let coords = transitive_point_H(&x, &rel, a.len)?;
            let strings: Vec<String> = coords.iter().map(to_pq).collect();
            emit(a.out.as_ref(), &to_json(&strings)?)?;
        }
        Command::SupOneTail(a) => {
            let tail = find_sup_one_tail(&a.s, &a.r, &a.rho, &a.tol, a.max_len)?;
            emit(a.out.as_ref(), &to_json(&tail)?)?;
        }
        Command::Family { action } => match action {
            FamilyCmd::Build { index, base, out } => {
                let qf = quotient_from(&index, &base)?;
                emit(out.as_ref(), &to_json(&qf)?)?;
            }
            FamilyCmd::Degrees { index, base, detect, approximants, tol, out } => {
                let spec = match &base.gluing {
                    Some(p) => read_json::<GluingSpec>(p)?.validated()?,
                    None => GluingSpec::default_for(&index),
                };
                spec.check_against(&index)?;
                let degrees = (1..=index.len()).map(|n| degree_from_spec(&spec, n)).collect::<lelek::Result<Vec<_>>>()?;
                let detection = if detect {
                    let qf = quotient_from(&index, &base)?;
                    Some(degree_report(&qf, approximants, &tol)?)
                } else {
                    None
                };
                emit(out.as_ref(), &to_json(&Degrees { index, degrees, detection })?)?;
            }
            FamilyCmd::Distinguish { a, b, out } => {
                let d = distinguish(&a, &b)?;
                emit(out.as_ref(), &to_json(&d)?)?;
            }
        },
        Command::NsFan { action: NsFanCmd::Construct { star, fan, n_max, budget, out } } => {
            let f = match (star, fan) {
                (Some(n), _) => make_star(n)?,
                (None, Some(p)) => read_json::<Fan>(&p)?,
                (None, None) => bail!("one of --star or --fan is required"),
            };
            f.validate()?;
            let ns = construct_ns_fan(&f, n_max, budget)?;
            let report = NsReport {
                n_max,
                schedule: (1..=n_max as u64).map(schedule).collect(),
                dim: ns.layout.dim(),
                distances: ns.distances.iter().map(to_pq).collect(),
                nonincreasing_from: ns.nonincreasing_from,
                arcs_meet_only_at_top: check_arc_intersections(&ns),
                fan: ns.fan,
            };
            emit(out.as_ref(), &to_json(&report)?)?;
        }
        Command::Render(a) => {
            let spec = RenderSpec {
                width: a.width,
                height: a.height,
                margin: a.margin,
                stroke: a.stroke,
                coords: a.coords,
                color_by: a.color_by,
            };
            spec.validate()?;
            let text = render_input(&a.input, &spec)?;
            emit(Some(&a.out), &text)?;
        }
    }
    Ok(true)
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<lelek::Error>()) {
        Some(lelek::Error::Capacity { .. } | lelek::Error::Budget { .. }) => EXIT_CAPACITY,
        _ => EXIT_INPUT,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(EXIT_FALSE),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
