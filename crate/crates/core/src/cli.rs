//! Command-line front end.
//!
//! Exit codes: 0 when the checked property holds, 1 when it fails (with a
//! counterexample in the report), 2 on input errors. Reports are JSON with
//! sorted keys; every number is an integer or a `"num/den"` string.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num::bigint::BigUint;
use serde::Deserialize;
use serde_json::{json, Value};

use crate::backforth::{almost_isometry, MatchOutcome, MatchPlan};
use crate::cantor::{self, GapForm, Incomparability, Transform};
use crate::chain::{self, ChainDescriptor, ChainedSpace, DecodeMode};
use crate::error::{Error, Result};
use crate::extension::{extend_one_point, realize_type};
use crate::graph::{path_completion, WeightedGraph};
use crate::io::{self, MapFile};
use crate::metric::{distortion, is_ultrametric, spectrum, validate_metric, PartialMap};
use crate::rational::Rat;
use crate::urysohn::{self, UrysohnLevels};

pub const BUDGET_ENV: &str = "URYKIT_BUDGET";

#[derive(Parser, Debug)]
#[command(name = "urykit", version, about = "Exact finite metric geometry toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the metric axioms of a space file.
    Validate { space: PathBuf },
    /// Shortest-path metric of a weighted graph file.
    Complete {
        graph: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Add one point realizing a type file over a space.
    Realize {
        space: PathBuf,
        r#type: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extend a partial map by one source point, keeping distortion below theta.
    Extend {
        #[arg(long)]
        source: PathBuf,
        #[arg(long)]
        target: PathBuf,
        #[arg(long)]
        map: PathBuf,
        #[arg(long, value_parser = parse_rat)]
        theta: Rat,
        /// Source point to add; defaults to the last point.
        #[arg(long)]
        point: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Distance spectrum and ultrametric test.
    Spectrum { space: PathBuf },
    #[command(subcommand)]
    Urysohn(UrysohnCmd),
    /// Back-and-forth lambda-bi-Lipschitz matching.
    Match {
        #[arg(long, value_parser = parse_rat)]
        lambda: Rat,
        #[arg(long)]
        points: usize,
        x: PathBuf,
        y: PathBuf,
    },
    #[command(subcommand)]
    Cantor(CantorCmd),
    #[command(subcommand)]
    Chain(ChainCmd),
}

#[derive(Subcommand, Debug)]
enum UrysohnCmd {
    /// Write A0.json..An.json.
    Build {
        #[arg(long)]
        levels: usize,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Sampled (non-faithful) mode for the last level: number of types.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Check that level n+1 realizes every rational type over level n.
    Check {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = ".")]
        dir: PathBuf,
        #[arg(long)]
        budget: Option<usize>,
    },
}

#[derive(Args, Debug)]
struct LevelArgs {
    #[arg(long = "A", value_delimiter = ',')]
    a: Vec<usize>,
    #[arg(long)]
    depth: usize,
    #[arg(long, default_value_t = 2)]
    base: u32,
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum CantorCmd {
    /// Truncated branch space of a level set.
    Build {
        #[command(flatten)]
        levels: LevelArgs,
        /// Also report the middle-third line embedding (base 3 only).
        #[arg(long)]
        line: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spectrum-gap incomparability certificate for D_A versus D_B.
    Certify {
        #[command(flatten)]
        levels: LevelArgs,
        #[arg(long = "B", value_delimiter = ',')]
        b: Vec<usize>,
        #[arg(long)]
        n: u64,
    },
    /// Gap condition between two integer sets.
    Gap {
        #[arg(long = "A", value_delimiter = ',')]
        a: Vec<usize>,
        #[arg(long = "B", value_delimiter = ',')]
        b: Vec<usize>,
        #[arg(long)]
        n: u64,
        #[arg(long, value_enum, default_value_t = FormArg::Difference)]
        form: FormArg,
        #[arg(long, value_enum, default_value_t = TransformArg::Raw)]
        transform: TransformArg,
        #[arg(long)]
        search_bound: Option<u64>,
    },
    /// Seeded almost disjoint family, optionally transformed and gap-checked.
    Family {
        #[arg(long)]
        count: usize,
        #[arg(long)]
        bound: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = TransformArg::Raw)]
        transform: TransformArg,
        #[arg(long, value_enum)]
        form: Option<FormArg>,
        #[arg(long, default_value_t = 1)]
        n: u64,
    },
}

#[derive(Subcommand, Debug)]
enum ChainCmd {
    /// Code an index set into a chained ultrametric.
    Encode {
        #[arg(long = "A", value_delimiter = ',')]
        a: Vec<usize>,
        /// Number of ratio positions; defaults to max(A) + 1.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long = "K")]
        k: u64,
        /// Defaults to 16K^6.
        #[arg(long, value_parser = parse_rat)]
        gap: Option<Rat>,
        #[arg(long)]
        budget: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Read the coded set back from a chained space.
    Decode {
        #[arg(long, value_enum)]
        mode: ModeArg,
        #[arg(long = "K")]
        k: u64,
        space: PathBuf,
        #[arg(long)]
        chain: Option<PathBuf>,
    },
    /// Seeded chain-respecting K-bi-Lipschitz image of a chained space.
    Perturb {
        #[arg(long = "K")]
        k: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        space: PathBuf,
        #[arg(long)]
        chain: Option<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check the transfer inequalities for a map between chained spaces.
    Verify {
        src: PathBuf,
        dst: PathBuf,
        map: PathBuf,
        #[arg(long = "K")]
        k: u64,
        #[arg(long)]
        src_chain: Option<PathBuf>,
        #[arg(long)]
        dst_chain: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormArg {
    Ratio,
    Difference,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum TransformArg {
    Raw,
    Square,
    Factorial,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Source,
    Image,
}

impl From<FormArg> for GapForm {
    fn from(f: FormArg) -> GapForm {
        match f {
            FormArg::Ratio => GapForm::Ratio,
            FormArg::Difference => GapForm::Difference,
        }
    }
}

impl From<TransformArg> for Transform {
    fn from(t: TransformArg) -> Transform {
        match t {
            TransformArg::Raw => Transform::Raw,
            TransformArg::Square => Transform::Square,
            TransformArg::Factorial => Transform::Factorial,
        }
    }
}

fn parse_rat(s: &str) -> std::result::Result<Rat, String> {
    Rat::parse_lenient(s).map_err(|e| e.to_string())
}

/// Graph file: `{"labels": [...], "edges": [[u, v, "w"], ...]}`.
#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphFile {
    labels: Vec<String>,
    edges: Vec<(usize, usize, Rat)>,
}

/// Outcome of a command: exit code and JSON report.
pub struct Outcome {
    pub code: i32,
    pub report: Value,
}

impl Outcome {
    fn holds(ok: bool, report: Value) -> Self {
        Outcome { code: if ok { 0 } else { 1 }, report }
    }
}

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// code and everything meant for standard output.
pub fn run<I, T>(argv: I) -> (i32, String)
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            return (code, e.render().to_string());
        }
    };
    match dispatch(cli.command) {
        Ok(out) => (out.code, render(&out.report)),
        Err(e) => (2, render(&json!({ "error": e.to_string() }))),
    }
}

fn render(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json renders");
    s.push('\n');
    s
}

fn budget(flag: Option<usize>, default: usize) -> Result<usize> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var(BUDGET_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| Error::malformed(format!("{BUDGET_ENV}={v:?} is not an integer"))),
        Err(_) => Ok(default),
    }
}

fn to_value<T: serde::Serialize>(t: &T) -> Value {
    serde_json::to_value(t).expect("report serializes")
}

fn chain_path(space: &Path, explicit: Option<PathBuf>) -> PathBuf {
    explicit.unwrap_or_else(|| {
        let stem = space.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
        space.with_file_name(format!("{stem}.chain.json"))
    })
}

fn read_chained(space: &Path, chain: Option<PathBuf>) -> Result<ChainedSpace> {
    let s = io::read_space(space)?;
    let desc: ChainDescriptor = io::read_json(&chain_path(space, chain))?;
    ChainedSpace::from_descriptor(s, desc)
}

fn write_chained(cs: &ChainedSpace, dir: &Path, stem: &str) -> Result<()> {
    create_dir(dir)?;
    io::write_space(cs.space(), &dir.join(format!("{stem}.json")))?;
    let desc = serde_json::to_string(&cs.descriptor())? + "\n";
    io::write_text(&dir.join(format!("{stem}.chain.json")), &desc)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.display().to_string(), source })
}

fn int_set(xs: &[usize]) -> cantor::IntSet {
    xs.iter().map(|&x| BigUint::from(x)).collect()
}

fn level_set(xs: &[usize]) -> cantor::LevelSet {
    xs.iter().copied().collect()
}

fn dispatch(cmd: Command) -> Result<Outcome> {
    match cmd {
        Command::Validate { space } => {
            let report = validate_metric(&io::read_space(&space)?);
            Ok(Outcome::holds(report.ok, to_value(&report)))
        }
        Command::Complete { graph, out } => {
            let g: GraphFile = io::read_json(&graph)?;
            let space = path_completion(&WeightedGraph::new(g.labels, g.edges)?)?;
            if let Some(out) = out {
                io::write_space(&space, &out)?;
            }
            Ok(Outcome::holds(true, json!({ "labels": space.labels(), "d": to_value(&space.matrix()) })))
        }
        Command::Realize { space, r#type, out } => {
            let s = io::read_space(&space)?;
            let t: String = std::fs::read_to_string(&r#type)
                .map_err(|source| Error::Io { path: r#type.display().to_string(), source })?;
            let extended = realize_type(&s, &io::type_from_json(&t)?)?;
            if let Some(out) = out {
                io::write_space(&extended, &out)?;
            }
            Ok(Outcome::holds(true, json!({ "points": extended.len(), "new_point": s.len() })))
        }
        Command::Extend { source, target, map, theta, point, out } => {
            let x = Arc::new(io::read_space(&source)?);
            let y = Arc::new(io::read_space(&target)?);
            let pairs: MapFile = io::read_json(&map)?;
            let point = point.unwrap_or(x.len().saturating_sub(1));
            let m = PartialMap::new(x, y, pairs.pairs)?;
            let ext = extend_one_point(&m, point, &theta)?;
            if let Some(out) = out {
                io::write_space(&ext.map.target, &out)?;
            }
            Ok(Outcome::holds(
                true,
                json!({
                    "lambda": ext.lambda,
                    "new_point": ext.new_point,
                    "pairs": ext.map.pairs(),
                    "distortion": distortion(&ext.map),
                    "target": { "labels": ext.map.target.labels(), "d": to_value(&ext.map.target.matrix()) },
                }),
            ))
        }
        Command::Spectrum { space } => {
            let s = io::read_space(&space)?;
            Ok(Outcome::holds(true, json!({ "spectrum": spectrum(&s), "ultrametric": is_ultrametric(&s) })))
        }
        Command::Urysohn(cmd) => urysohn_cmd(cmd),
        Command::Match { lambda, points, x, y } => {
            let x = Arc::new(io::read_space(&x)?);
            let y = Arc::new(io::read_space(&y)?);
            let plan = MatchPlan::geometric(lambda.clone(), points);
            match almost_isometry(x, y, &plan)? {
                MatchOutcome::Success { map, distortion } => Ok(Outcome::holds(
                    true,
                    json!({ "result": "success", "lambda": lambda, "pairs": map.pairs(), "distortion": distortion }),
                )),
                MatchOutcome::Failure(f) => {
                    Ok(Outcome::holds(false, json!({ "result": "failure", "lambda": lambda, "failure": to_value(&f) })))
                }
            }
        }
        Command::Cantor(cmd) => cantor_cmd(cmd),
        Command::Chain(cmd) => chain_cmd(cmd),
    }
}

fn urysohn_cmd(cmd: UrysohnCmd) -> Result<Outcome> {
    match cmd {
        UrysohnCmd::Build { levels, budget: b, out, sample, seed } => {
            let b = budget(b, urysohn::DEFAULT_POINT_BUDGET)?;
            let mut built = UrysohnLevels::singleton();
            for n in 0..levels {
                built = match sample {
                    Some(s) if n + 1 == levels => urysohn::build_level_sampled(&built, s, seed, b)?,
                    _ => urysohn::build_level(&built, b)?,
                };
            }
            create_dir(&out)?;
            let mut rows = Vec::new();
            for n in 0..built.len() {
                io::write_space(&built.level(n), &out.join(format!("A{n}.json")))?;
                rows.push(json!({ "n": n, "points": built.level_size(n), "faithful": built.is_faithful(n) }));
            }
            Ok(Outcome::holds(true, json!({ "levels": rows, "budget": b })))
        }
        UrysohnCmd::Check { n, dir, budget: b } => {
            let b = budget(b, urysohn::DEFAULT_POINT_BUDGET)?;
            let levels =
                (0..=n + 1).map(|i| io::read_space(&dir.join(format!("A{i}.json")))).collect::<Result<Vec<_>>>()?;
            let levels = UrysohnLevels::from_levels(levels)?;
            match urysohn::check_level_property(&levels, n, b)? {
                None => Ok(Outcome::holds(true, json!({ "ok": true, "n": n }))),
                Some(t) => Ok(Outcome::holds(false, json!({ "ok": false, "n": n, "unrealized": { "p": t.p } }))),
            }
        }
    }
}

fn cantor_cmd(cmd: CantorCmd) -> Result<Outcome> {
    match cmd {
        CantorCmd::Build { levels, line, out } => {
            let b = budget(levels.budget, cantor::DEFAULT_BRANCH_BUDGET)?;
            let bs = cantor::branch_space(&level_set(&levels.a), levels.depth, levels.base, b)?;
            let space = bs.to_space();
            if let Some(out) = out {
                io::write_space(&space, &out)?;
            }
            let mut report = json!({
                "depth": levels.depth,
                "base": levels.base,
                "levels": bs.levels(),
                "points": bs.len(),
                "spectrum": spectrum(&space),
                "ultrametric": is_ultrametric(&space),
            });
            if line {
                let emb = cantor::embed_cantor_into_line(&bs)?;
                report["line"] = to_value(&emb);
            }
            Ok(Outcome::holds(true, report))
        }
        CantorCmd::Certify { levels, b, n } => {
            let budget = budget(levels.budget, cantor::DEFAULT_BRANCH_BUDGET)?;
            let cert = cantor::incomparability_certificate(
                &level_set(&levels.a),
                &level_set(&b),
                n,
                levels.base,
                levels.depth,
                budget,
            )?;
            let ok = matches!(&cert, Incomparability::Certificate { check, .. } if check.ok);
            Ok(Outcome::holds(ok, to_value(&cert)))
        }
        CantorCmd::Gap { a, b, n, form, transform, search_bound } => {
            let t: Transform = transform.into();
            let a = cantor::gap_transform(&int_set(&a), t, cantor::DEFAULT_MAGNITUDE_BITS)?;
            let b = cantor::gap_transform(&int_set(&b), t, cantor::DEFAULT_MAGNITUDE_BITS)?;
            let bound = match search_bound {
                Some(s) => BigUint::from(s),
                None => a.iter().chain(&b).max().cloned().unwrap_or_default(),
            };
            let k = cantor::check_gap_condition(&a, &b, n, form.into(), &bound);
            let report = json!({
                "n": n,
                "form": to_value(&GapForm::from(form)),
                "transform": to_value(&t),
                "k": k.as_ref().map(|k| k.to_string()),
                "result": if k.is_some() { "found" } else { "not_found" },
            });
            Ok(Outcome::holds(k.is_some(), report))
        }
        CantorCmd::Family { count, bound, seed, transform, form, n } => {
            let fam = cantor::ad_family(count, bound, seed)?;
            let fam = match Transform::from(transform) {
                Transform::Raw => fam,
                t => fam.transformed(t, cantor::DEFAULT_MAGNITUDE_BITS)?,
            };
            let mut report = json!({
                "transform": to_value(&fam.transform),
                "members": fam.members.iter().map(|m| m.iter().map(|x| x.to_string()).collect::<Vec<_>>()).collect::<Vec<_>>(),
                "intersections": fam.intersections.iter().map(|i| json!({
                    "i": i.i, "j": i.j, "common": i.common.iter().map(|x| x.to_string()).collect::<Vec<_>>()
                })).collect::<Vec<_>>(),
            });
            let mut ok = true;
            if let Some(form) = form {
                let mut checks = Vec::new();
                for i in 0..fam.members.len() {
                    for j in i + 1..fam.members.len() {
                        let (a, b) = (&fam.members[i], &fam.members[j]);
                        let top = a.iter().chain(b).max().cloned().unwrap_or_default();
                        let k = cantor::check_gap_condition(a, b, n, form.into(), &top);
                        ok &= k.is_some();
                        checks.push(json!({ "i": i, "j": j, "k": k.map(|k| k.to_string()) }));
                    }
                }
                report["gap_checks"] = Value::Array(checks);
                report["n"] = json!(n);
                report["form"] = to_value(&GapForm::from(form));
            }
            Ok(Outcome::holds(ok, report))
        }
    }
}

fn chain_report(cs: &ChainedSpace, k: u64) -> Value {
    let eps = chain::epsilon_sequence(cs);
    json!({
        "eps": eps,
        "ratios": chain::ratios(&eps),
        "phi_set": chain::phi_set(&eps, k),
        "theta": to_value(&chain::theta_check(&eps, k)),
        "ultrametric": is_ultrametric(cs.space()),
    })
}

fn chain_cmd(cmd: ChainCmd) -> Result<Outcome> {
    match cmd {
        ChainCmd::Encode { a, m, k, gap, budget: b, out } => {
            let set: BTreeSet<usize> = a.iter().copied().collect();
            let m = m.unwrap_or_else(|| set.iter().max().map_or(0, |x| x + 1));
            let gap = gap.unwrap_or_else(|| chain::default_gap(k));
            let b = budget(b, chain::DEFAULT_DEPTH_BUDGET)?;
            let cs = chain::encode_set(&set, m, k, &gap, b)?;
            write_chained(&cs, &out, "space")?;
            let mut report = chain_report(&cs, k);
            report["gap"] = to_value(&gap);
            report["m"] = json!(m);
            Ok(Outcome::holds(true, report))
        }
        ChainCmd::Decode { mode, k, space, chain: c } => {
            let cs = read_chained(&space, c)?;
            let mode = match mode {
                ModeArg::Source => DecodeMode::Source,
                ModeArg::Image => DecodeMode::Image,
            };
            let mut report = chain_report(&cs, k);
            report["set"] = to_value(&chain::decode_set(&cs, k, mode));
            report["mode"] = to_value(&mode);
            Ok(Outcome::holds(true, report))
        }
        ChainCmd::Perturb { k, seed, space, chain: c, out } => {
            let cs = read_chained(&space, c)?;
            let (dst, map) = chain::random_transfer(&cs, k, seed)?;
            write_chained(&dst, &out, "image")?;
            let text = serde_json::to_string(&MapFile { pairs: map.pairs().to_vec() })? + "\n";
            io::write_text(&out.join("map.json"), &text)?;
            Ok(Outcome::holds(
                true,
                json!({ "k": k, "seed": seed, "pairs": map.pairs(), "distortion": distortion(&map) }),
            ))
        }
        ChainCmd::Verify { src, dst, map, k, src_chain, dst_chain } => {
            let s = read_chained(&src, src_chain)?;
            let d = read_chained(&dst, dst_chain)?;
            let pairs: MapFile = io::read_json(&map)?;
            let f = PartialMap::new(Arc::new(s.space().clone()), Arc::new(d.space().clone()), pairs.pairs)?;
            let report = chain::verify_transfer(&s, &d, &f, k)?;
            Ok(Outcome::holds(report.all_hold, to_value(&report)))
        }
    }
}
