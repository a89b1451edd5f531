//! Command-line interface: construct systems, analyze potentials, scan
//! erasures, decide feasibility, simulate channels and merge reports.
//!
//! Exit codes: 0 success, 1 validation error (bad flags, malformed inputs,
//! invalid systems), 2 internal numerical inconsistency.

use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::{json, Value};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use reconlab::erasures::{self, CrossCorrelationReport, ErasureReport};
use reconlab::feasibility::{self, FeasibilityVerdict, OracleConfig};
use reconlab::potential::{self, ConvexFn, PotentialReport};
use reconlab::sim::{self, LossModel, SimConfig};
use reconlab::systems::CLASSIFY_TOL;
use reconlab::{constructors, Error, Field, GaugeNorm, ReconSystem};

#[derive(Parser)]
#[command(
    name = "reconlab",
    about = "Analysis and verification of reconstruction systems for packet-erasure channels",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a system and write it as JSON.
    Construct(ConstructArgs),
    /// Potential bounds, classification and cross-correlation table.
    Analyze(AnalyzeArgs),
    /// Exact worst-case erasure errors for p lost packets.
    ErasureScan(ErasureScanArgs),
    /// Existence of protocols with prescribed weights or spectra.
    Feasible(FeasibleArgs),
    /// Monte-Carlo or adversarial erasure-channel simulation.
    Simulate(SimulateArgs),
    /// Merge JSON reports into a markdown (and optional CSV) summary.
    Report(ReportArgs),
}

#[derive(Args)]
struct ConstructArgs {
    /// dft | random-protocol | random-system
    #[arg(long)]
    kind: String,
    #[arg(long)]
    m: usize,
    #[arg(long)]
    l: usize,
    /// Rank multiplier for the dft construction (d = k*l).
    #[arg(long)]
    k: Option<usize>,
    /// Signal dimension for the random constructions.
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// complex (default) or real; real dft needs a power-of-two m.
    #[arg(long, default_value = "complex")]
    field: String,
    /// Output path for the system JSON.
    #[arg(short, long)]
    output: PathBuf,
}

#[derive(Args)]
struct AnalyzeArgs {
    /// System JSON file.
    system: PathBuf,
    /// Comma-separated norm specs (op, tr, fro, p:<x>, kyfan:<k>).
    #[arg(long, default_value = "tr,fro,op")]
    norms: String,
    /// Comma-separated convex functions (square, cube, xlog1p).
    #[arg(long, default_value = "square,cube,xlog1p")]
    fs: String,
    /// Output path; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ErasureScanArgs {
    /// System JSON file.
    system: PathBuf,
    /// Loss counts to scan, comma-separated.
    #[arg(long, default_value = "1,2")]
    p: String,
    /// Comma-separated norm specs.
    #[arg(long, default_value = "op")]
    norm: String,
    /// Include the full per-pattern table.
    #[arg(long)]
    table: bool,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct FeasibleArgs {
    /// Signal dimension d.
    #[arg(long)]
    d: usize,
    /// Packet dimension l (default rank for every block).
    #[arg(long)]
    l: Option<usize>,
    /// Comma-separated projective weights w_i.
    #[arg(long)]
    weights: Option<String>,
    /// Comma-separated projection ranks t_i (defaults to l for every block).
    #[arg(long)]
    ranks: Option<String>,
    /// JSON file with a list of block spectra (arrays of non-negative reals).
    #[arg(long)]
    spectra: Option<PathBuf>,
    /// Attempt budget for the constructive oracle (0 disables it).
    #[arg(long, default_value_t = 0)]
    oracle: usize,
    #[arg(long)]
    seed: Option<u64>,
    /// Inequality tolerance.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// System JSON file.
    system: PathBuf,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    /// uniform:<p> | bernoulli:<q> | adversarial:<p>
    #[arg(long, default_value = "uniform:1")]
    loss: String,
    /// Norm spec for the theoretical bound columns.
    #[arg(long, default_value = "op")]
    norm: String,
    #[arg(long)]
    seed: Option<u64>,
    /// Output path for the JSON report; stdout when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Optional per-trial CSV (trial,pattern,error,bound,slack).
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// JSON reports produced by the other subcommands.
    inputs: Vec<PathBuf>,
    /// Markdown output path.
    #[arg(short, long)]
    output: PathBuf,
    /// Optional flat CSV (file,kind,metric,value).
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version are successes, everything else is a usage error
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Internal(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Construct(args) => construct(args),
        Command::Analyze(args) => analyze(args),
        Command::ErasureScan(args) => erasure_scan(args),
        Command::Feasible(args) => feasible(args),
        Command::Simulate(args) => simulate(args),
        Command::Report(args) => report(args),
    }
}

/// Seed resolution: flag, then RECONLAB_SEED, then 0.
fn resolve_seed(flag: Option<u64>) -> Result<u64, Error> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var("RECONLAB_SEED") {
        Ok(text) => text.trim().parse().map_err(|_| {
            Error::InvalidArgument(format!("RECONLAB_SEED is not an integer: `{text}`"))
        }),
        Err(_) => Ok(0),
    }
}

fn parse_list<T, F>(text: &str, what: &str, parse: F) -> Result<Vec<T>, Error>
where
    F: Fn(&str) -> Result<T, Error>,
{
    let items: Result<Vec<T>, Error> = text
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(parse)
        .collect();
    let items = items?;
    if items.is_empty() {
        return Err(Error::InvalidArgument(format!("empty {what} list")));
    }
    Ok(items)
}

fn parse_norms(text: &str) -> Result<Vec<GaugeNorm>, Error> {
    parse_list(text, "norm", GaugeNorm::parse)
}

fn emit(value: &impl Serialize, output: Option<&Path>) -> Result<(), Error> {
    let text = serde_json::to_string_pretty(value)?;
    match output {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn construct(args: ConstructArgs) -> Result<(), Error> {
    let field = match args.field.to_ascii_lowercase().as_str() {
        "complex" => Field::Complex,
        "real" => Field::Real,
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown field `{other}` (expected complex or real)"
            )))
        }
    };
    let sys = match args.kind.as_str() {
        "dft" => {
            let k = args
                .k
                .ok_or_else(|| Error::InvalidArgument("the dft construction needs --k".into()))?;
            match field {
                Field::Complex => constructors::dft_uwp(args.m, args.l, k)?,
                Field::Real => constructors::hadamard_uwp(args.m, args.l, k)?,
            }
        }
        "random-protocol" | "random-system" => {
            if field == Field::Real {
                return Err(Error::InvalidArgument(
                    "random constructions are complex; use --field complex".into(),
                ));
            }
            let d = args
                .d
                .ok_or_else(|| Error::InvalidArgument(format!("--kind {} needs --d", args.kind)))?;
            let seed = resolve_seed(args.seed)?;
            if args.kind == "random-protocol" {
                constructors::random_protocol(args.m, args.l, d, seed)?
            } else {
                constructors::random_system(args.m, args.l, d, seed)?
            }
        }
        other => {
            return Err(Error::InvalidArgument(format!(
                "unknown construction `{other}` (expected dft, random-protocol or random-system)"
            )))
        }
    };
    for w in sys.shape().protocol_regime_warnings() {
        eprintln!("warning: {w}");
    }
    sys.save(&args.output)?;
    eprintln!(
        "wrote ({},{},{}) system to {}",
        sys.shape().m,
        sys.shape().l,
        sys.shape().d,
        args.output.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct AnalysisDoc {
    kind: &'static str,
    system: Value,
    classification: reconlab::systems::Classification,
    general: PotentialReport,
    uniform_weight: PotentialReport,
    cross_correlation: Vec<CrossCorrelationReport>,
    warnings: Vec<String>,
}

fn shape_json(sys: &ReconSystem) -> Value {
    let s = sys.shape();
    json!({"m": s.m, "l": s.l, "d": s.d})
}

fn analyze(args: AnalyzeArgs) -> Result<(), Error> {
    let sys = ReconSystem::load(&args.system)?;
    let norms = parse_norms(&args.norms)?;
    let fs: Vec<ConvexFn> = parse_list(&args.fs, "convex function", ConvexFn::parse)?;
    let general = potential::check_general_optimality(&sys, &norms, &fs)?;
    let uniform_weight = potential::check_uwp_optimality(&sys, &norms, &fs)?;
    let cross_correlation = (1..=sys.shape().m)
        .map(|i| erasures::lemma_identities(&sys, i))
        .collect::<Result<Vec<_>, _>>()?;
    let doc = AnalysisDoc {
        kind: "analysis",
        system: shape_json(&sys),
        classification: sys.classify(CLASSIFY_TOL),
        general,
        uniform_weight,
        cross_correlation,
        warnings: sys.shape().protocol_regime_warnings(),
    };
    emit(&doc, args.output.as_deref())
}

#[derive(Serialize)]
struct ErasureScanDoc {
    kind: &'static str,
    system: Value,
    in_class_c: bool,
    two_uniform: bool,
    reports: Vec<ErasureReport>,
}

fn erasure_scan(args: ErasureScanArgs) -> Result<(), Error> {
    let sys = ReconSystem::load(&args.system)?;
    let norms = parse_norms(&args.norm)?;
    let ps: Vec<usize> = parse_list(&args.p, "loss count", |s| {
        s.parse()
            .map_err(|_| Error::InvalidArgument(format!("bad loss count `{s}`")))
    })?;
    let mut reports = Vec::new();
    for &p in &ps {
        for &psi in &norms {
            reports.push(erasures::worst_case_error_detailed(&sys, p, psi, args.table)?);
        }
    }
    let doc = ErasureScanDoc {
        kind: "erasure-scan",
        system: shape_json(&sys),
        in_class_c: erasures::in_class_c(&sys, 1e-9).unwrap_or(false),
        two_uniform: erasures::is_two_uniform(&sys, CLASSIFY_TOL).unwrap_or(false),
        reports,
    };
    emit(&doc, args.output.as_deref())
}

#[derive(Serialize)]
struct FeasibilityDoc {
    kind: &'static str,
    d: usize,
    weights: Option<Vec<f64>>,
    ranks: Option<Vec<usize>>,
    spectra: Vec<Vec<f64>>,
    q_fundamental: Option<FeasibilityVerdict>,
    klyachko: FeasibilityVerdict,
    violated_pretty: Vec<String>,
    oracle: Option<Value>,
}

fn feasible(args: FeasibleArgs) -> Result<(), Error> {
    let (weights, ranks, spectra): (Option<Vec<f64>>, Option<Vec<usize>>, Vec<Vec<f64>>) =
        match (&args.weights, &args.spectra) {
            (Some(wtext), None) => {
                let w = parse_list(wtext, "weight", |s| {
                    s.parse()
                        .map_err(|_| Error::InvalidArgument(format!("bad weight `{s}`")))
                })?;
                let l = args.l.unwrap_or(1);
                let ranks = match &args.ranks {
                    Some(rtext) => parse_list(rtext, "rank", |s| {
                        s.parse()
                            .map_err(|_| Error::InvalidArgument(format!("bad rank `{s}`")))
                    })?,
                    None => vec![l; w.len()],
                };
                if ranks.len() != w.len() {
                    return Err(Error::DimensionMismatch(format!(
                        "{} weights but {} ranks",
                        w.len(),
                        ranks.len()
                    )));
                }
                let spectra = w.iter().zip(&ranks).map(|(&wi, &ti)| vec![wi; ti]).collect();
                (Some(w), Some(ranks), spectra)
            }
            (None, Some(path)) => {
                let text = std::fs::read_to_string(path)?;
                let spectra: Vec<Vec<f64>> = serde_json::from_str(&text)?;
                (None, None, spectra)
            }
            _ => {
                return Err(Error::InvalidArgument(
                    "provide exactly one of --weights or --spectra".into(),
                ))
            }
        };

    let q_fundamental = match (&weights, &ranks) {
        (Some(w), Some(t)) => Some(feasibility::q_fundamental_check(w, t, args.d, args.tol)?),
        _ => None,
    };
    let klyachko = feasibility::protocol_feasible(&spectra, args.d, args.tol)?;
    let mut violated_pretty: Vec<String> =
        klyachko.violated.iter().map(ToString::to_string).collect();
    if let Some(qf) = &q_fundamental {
        violated_pretty.extend(qf.violated.iter().map(ToString::to_string));
    }

    let oracle = if args.oracle > 0 {
        let seed = resolve_seed(args.seed)?;
        match feasibility::numeric_oracle(&spectra, args.d, OracleConfig::new(args.oracle, seed)) {
            Ok(out) => Some(serde_json::to_value(&out)?),
            // a trace violation is already reported by the checkers
            Err(Error::InvalidArgument(msg)) => Some(json!({ "skipped": msg })),
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let doc = FeasibilityDoc {
        kind: "feasibility",
        d: args.d,
        weights,
        ranks,
        spectra,
        q_fundamental,
        klyachko,
        violated_pretty,
        oracle,
    };
    emit(&doc, args.output.as_deref())
}

fn parse_loss(text: &str) -> Result<LossModel, Error> {
    let (kind, value) = text
        .split_once(':')
        .ok_or_else(|| Error::InvalidArgument(format!("loss spec `{text}` needs kind:value")))?;
    match kind {
        "uniform" => Ok(LossModel::UniformP {
            p: value
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad loss count `{value}`")))?,
        }),
        "bernoulli" => Ok(LossModel::Bernoulli {
            q: value
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad loss probability `{value}`")))?,
        }),
        "adversarial" => Ok(LossModel::AdversarialScan {
            p: value
                .parse()
                .map_err(|_| Error::InvalidArgument(format!("bad loss count `{value}`")))?,
        }),
        other => Err(Error::InvalidArgument(format!(
            "unknown loss model `{other}` (expected uniform, bernoulli or adversarial)"
        ))),
    }
}

#[derive(Serialize)]
struct SimulationDoc {
    kind: &'static str,
    system: Value,
    #[serde(flatten)]
    report: sim::SimReport,
}

fn simulate(args: SimulateArgs) -> Result<(), Error> {
    let sys = ReconSystem::load(&args.system)?;
    let config = SimConfig {
        trials: args.trials,
        loss: parse_loss(&args.loss)?,
        norm: GaugeNorm::parse(&args.norm)?,
        seed: resolve_seed(args.seed)?,
    };
    let run = sim::simulate(&sys, &config)?;
    if let Some(csv_path) = &args.csv {
        let file = std::fs::File::create(csv_path)?;
        sim::write_trials_csv(&run.records, std::io::BufWriter::new(file))?;
    }
    let doc = SimulationDoc {
        kind: "simulation",
        system: shape_json(&sys),
        report: run.report,
    };
    emit(&doc, args.output.as_deref())
}

/// Key metrics extracted from one report document for the flat summary.
fn summarize(value: &Value) -> (String, Vec<(String, String)>) {
    let kind = value
        .get("kind")
        .and_then(Value::as_str)
        .unwrap_or("unknown")
        .to_string();
    let mut rows = Vec::new();
    let mut push = |metric: &str, v: Option<&Value>| {
        if let Some(v) = v {
            rows.push((metric.to_string(), v.to_string()));
        }
    };
    match kind.as_str() {
        "analysis" => {
            push("is_protocol", value.pointer("/classification/is_protocol"));
            push("is_uwp", value.pointer("/classification/is_uwp"));
            push("is_rank_l", value.pointer("/classification/is_rank_l"));
            push("potential_trace", value.pointer("/general/trace"));
            push(
                "submajorization_holds",
                value.pointer("/general/submajorization_holds"),
            );
            push(
                "equality_certificate",
                value.pointer("/general/equality_certificate"),
            );
        }
        "erasure-scan" => {
            push("in_class_c", value.get("in_class_c"));
            push("two_uniform", value.get("two_uniform"));
            if let Some(reports) = value.get("reports").and_then(Value::as_array) {
                for r in reports {
                    let label = format!(
                        "e{}[{}]",
                        r.get("p").and_then(Value::as_u64).unwrap_or(0),
                        r.get("norm").and_then(Value::as_str).unwrap_or("?")
                    );
                    if let Some(w) = r.get("worst_error") {
                        rows.push((label, w.to_string()));
                    }
                }
            }
        }
        "feasibility" => {
            push("feasible", value.pointer("/klyachko/feasible"));
            push("trace_ok", value.pointer("/klyachko/trace_ok"));
            push("oracle_found", value.pointer("/oracle/found"));
        }
        "simulation" => {
            push("trials", value.get("trials"));
            push("empirical_max", value.get("empirical_max"));
            push("empirical_mean", value.get("empirical_mean"));
        }
        _ => {}
    }
    (kind, rows)
}

fn report(args: ReportArgs) -> Result<(), Error> {
    if args.inputs.is_empty() {
        return Err(Error::InvalidArgument("no input reports given".into()));
    }
    let mut md = String::from("# reconlab summary\n");
    let mut csv = String::from("file,kind,metric,value\n");
    for path in &args.inputs {
        let text = std::fs::read_to_string(path)?;
        let value: Value = serde_json::from_str(&text)?;
        let name = path.display().to_string();
        let (kind, rows) = summarize(&value);
        md.push_str(&format!("\n## {name} ({kind})\n\n"));
        if rows.is_empty() {
            md.push_str("no recognized metrics\n");
        } else {
            md.push_str("| metric | value |\n|---|---|\n");
            for (metric, v) in &rows {
                md.push_str(&format!("| {metric} | {v} |\n"));
                csv.push_str(&format!("{name},{kind},{metric},{v}\n"));
            }
        }
    }
    std::fs::write(&args.output, md)?;
    if let Some(csv_path) = &args.csv {
        std::fs::write(csv_path, csv)?;
    }
    Ok(())
}
