//! `cmsimple`: reports, convergence tables and the hub-family demo for
//! simplicity of configuration-model multigraphs.

mod render;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cmsimple::confmodel::{project, sample_configuration};
use cmsimple::degseq::{generate, DegreeSource};
use cmsimple::exact::{self, DEFAULT_CAP};
use cmsimple::mc::{self, chunk_rng, McConfig, DEFAULT_CONFIDENCE, DEFAULT_SAMPLES};
use cmsimple::{asympt, DegreeSequence, Error};
use serde_json::{json, Value};

#[derive(Parser, Debug)]
#[command(
    name = "cmsimple",
    version,
    about = "Probability that a configuration-model multigraph is simple"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Degree statistics, asymptotic formulas, and optionally exact and Monte Carlo values.
    Report(ReportArgs),
    /// Monte Carlo estimates for regular(n, d) over a list of sizes, next to the limiting formulas.
    Convergence(ConvergenceArgs),
    /// Monte Carlo estimates for a hub of degree k padded with degree-1 vertices.
    Dichotomy(DichotomyArgs),
}

#[derive(Args, Debug)]
#[group(id = "source", required = true, multiple = false)]
struct SourceArgs {
    /// Degree file: one integer per line, '#' comments allowed.
    #[arg(long, value_name = "FILE", group = "source")]
    degrees: Option<PathBuf>,
    /// The d-regular sequence on n vertices.
    #[arg(long, num_args = 2, value_names = ["N", "D"], group = "source")]
    regular: Option<Vec<u64>>,
    /// Inline degree list such as "3,3,3,3".
    #[arg(long, value_name = "LIST", group = "source")]
    literal: Option<String>,
}

#[derive(Args, Debug, Clone)]
struct McArgs {
    /// Random seed; identical seeds give byte-identical output.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Worker threads for sampling (0 = all available). Results do not depend on it.
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Confidence level of the Wilson interval.
    #[arg(long, default_value_t = DEFAULT_CONFIDENCE)]
    confidence: f64,
    /// Record wall-clock time in the output (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args, Debug, Clone)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Format {
    Json,
    Csv,
    Text,
}

impl Format {
    fn name(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Csv => "csv",
            Format::Text => "text",
        }
    }
}

#[derive(Args, Debug)]
struct ReportArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Run a Monte Carlo estimate with this many samples (omitted: no sampling).
    #[arg(long, value_name = "K")]
    samples: Option<u64>,
    #[command(flatten)]
    mc: McArgs,
    /// Enumerate all configurations for exact rational values.
    #[arg(long)]
    exact: bool,
    /// Largest edge count allowed for --exact.
    #[arg(long, value_name = "M", default_value_t = DEFAULT_CAP)]
    cap: u64,
    /// Include one sampled multigraph in "L v count" / "E v w count" form.
    #[arg(long)]
    dump: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct ConvergenceArgs {
    /// Common degree of the regular sequences.
    #[arg(long)]
    d: u32,
    /// Vertex counts, comma separated.
    #[arg(long, value_delimiter = ',', required = true)]
    sizes: Vec<usize>,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args, Debug)]
struct DichotomyArgs {
    /// Hub degrees, comma separated.
    #[arg(long, value_delimiter = ',', num_args = 0..)]
    hubs: Vec<u32>,
    /// Edge count shared by every member of the family.
    #[arg(long, default_value_t = 256)]
    edges: u64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: u64,
    #[command(flatten)]
    mc: McArgs,
    #[command(flatten)]
    output: OutputArgs,
}

/// A failure with its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::CapExceeded { .. } => 3,
            Error::Invariant(_) | Error::Inconsistent(_) => 4,
            _ => 2,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn input_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: message.into(),
    }
}

fn invariant(message: impl Into<String>) -> Failure {
    Failure {
        code: 4,
        message: message.into(),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (output, result) = match &cli.command {
        Command::Report(a) => (&a.output, report(a)),
        Command::Convergence(a) => (&a.output, convergence(a)),
        Command::Dichotomy(a) => (&a.output, dichotomy(a)),
    };
    match result.and_then(|doc| emit(output, &doc)) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

/// A rendered document plus the exit code it should produce.
struct Document {
    body: Value,
    /// Name of the array of rows in table documents.
    table: Option<&'static str>,
    code: u8,
}

fn emit(output: &OutputArgs, doc: &Document) -> Result<u8, Failure> {
    let text = match (output.format, doc.table) {
        (Format::Json, _) => render::json(&doc.body),
        (Format::Csv, Some(key)) => render::table_csv(&doc.body, key),
        (Format::Text, Some(key)) => render::table_text(&doc.body, key),
        (Format::Csv, None) => render::flat_csv(&doc.body),
        (Format::Text, None) => render::flat_text(&doc.body),
    };
    match &output.out {
        Some(path) => fs::write(path, text)
            .map_err(|e| input_error(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(doc.code)
}

fn source_of(args: &SourceArgs) -> Result<(DegreeSource, Value), Failure> {
    if let Some(path) = &args.degrees {
        return Ok((
            DegreeSource::File(path.clone()),
            json!({ "kind": "file", "path": path.display().to_string() }),
        ));
    }
    if let Some(v) = &args.regular {
        let n = usize::try_from(v[0]).map_err(|_| input_error("--regular N is too large"))?;
        let d = u32::try_from(v[1]).map_err(|_| input_error("--regular D is too large"))?;
        return Ok((
            DegreeSource::Regular { n, d },
            json!({ "kind": "regular", "n": n, "d": d }),
        ));
    }
    let text = args.literal.clone().unwrap_or_default();
    Ok((
        DegreeSource::Literal(text.clone()),
        json!({ "kind": "literal", "degrees": text }),
    ))
}

fn mc_config(samples: u64, mc: &McArgs) -> McConfig {
    McConfig {
        timing: mc.timing,
        confidence: mc.confidence,
        ..McConfig::new(samples, mc.seed).workers(mc.workers)
    }
}

fn meta(command: &str, mc: &McArgs, output: &OutputArgs, extra: Value) -> Value {
    let mut m = json!({
        "tool": "cmsimple",
        "version": env!("CARGO_PKG_VERSION"),
        "command": command,
        "seed": mc.seed,
        "workers": mc.workers,
        "confidence": mc.confidence,
        "format": output.format.name(),
    });
    if let (Value::Object(m), Value::Object(extra)) = (&mut m, extra) {
        m.extend(extra);
    }
    m
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize infallibly")
}

fn report(a: &ReportArgs) -> Result<Document, Failure> {
    let (source, source_meta) = source_of(&a.source)?;
    let ds = generate(&source)?;
    if a.samples == Some(0) {
        return Err(input_error("--samples must be at least 1"));
    }
    let asymptotic = asympt::report(&ds)?;
    let mut body = json!({
        "meta": meta("report", &a.mc, &a.output, json!({
            "source": source_meta,
            "samples": a.samples,
            "cap": a.cap,
            "exact": a.exact,
        })),
        "degree_stats": to_value(&asymptotic.stats),
        "asymptotic": to_value(&asymptotic),
    });
    if a.exact {
        body["exact"] = exact_section(&ds, a.cap)?;
    }
    if let Some(samples) = a.samples {
        let est = mc::estimate(&ds, &mc_config(samples, &a.mc))?;
        body["monte_carlo"] = to_value(&est);
    }
    if a.dump {
        // A stream no estimate uses, so the dump never shadows a chunk.
        let mut rng = chunk_rng(a.mc.seed, u64::MAX);
        let cfg = sample_configuration(&ds, &mut rng)?;
        body["dump"] = Value::String(project(&ds, &cfg)?.dump());
    }
    Ok(Document {
        body,
        table: None,
        code: 0,
    })
}

/// Exact values, cross-checked against the closed forms before they are emitted.
fn exact_section(ds: &DegreeSequence, cap: u64) -> Result<Value, Failure> {
    let r = exact::exact_p_simple(ds, cap)?;
    r.check()?;
    let closed = exact::exact_e_ytilde(ds)?;
    if closed != r.e_ytilde {
        return Err(invariant(format!(
            "E Ỹ by enumeration {} differs from the closed form {closed}",
            r.e_ytilde
        )));
    }
    let count = exact::count_from_report(ds, &r)?;
    let mut v = to_value(&r);
    v["p_simple_value"] = json!(r.p_simple_f64());
    v["simple_graphs"] = Value::String(count.to_string());
    v["gap_bound"] = to_value(&cmsimple::json::RationalJson::from(
        &exact::bound_y_ytilde_gap(ds)?,
    ));
    Ok(v)
}

fn estimate_row(ds: &DegreeSequence, cfg: &McConfig) -> Result<Value, Failure> {
    let est = mc::estimate(ds, cfg)?;
    let mut row = json!({
        "p_hat": est.p_hat,
        "ci_low": est.ci_low,
        "ci_high": est.ci_high,
        "successes": est.successes,
    });
    if let Some(t) = est.elapsed_secs {
        row["elapsed_secs"] = json!(t);
    }
    Ok(row)
}

fn convergence(a: &ConvergenceArgs) -> Result<Document, Failure> {
    if a.samples == 0 {
        return Err(input_error("--samples must be at least 1"));
    }
    let cfg = mc_config(a.samples, &a.mc);
    let mut rows = Vec::new();
    let mut failed = false;
    for &n in &a.sizes {
        let row = DegreeSequence::regular(n, a.d)
            .map_err(Failure::from)
            .and_then(|ds| {
                let poisson = asympt::p_simple_poisson(&ds)?;
                let t2a = asympt::p_simple_t2a(&ds)?;
                let mut row = estimate_row(&ds, &cfg)?;
                let p_hat = row["p_hat"].as_f64().unwrap_or(f64::NAN);
                row["poisson"] = json!(poisson);
                row["t2a"] = json!(t2a);
                row["gap"] = json!((p_hat - poisson).abs());
                Ok(row)
            });
        let mut row = row.unwrap_or_else(|f| {
            failed = true;
            json!({ "error": f.message })
        });
        row["n"] = json!(n);
        rows.push(row);
    }
    let body = json!({
        "meta": meta("convergence", &a.mc, &a.output, json!({ "d": a.d, "samples": a.samples })),
        "columns": ["n", "p_hat", "ci_low", "ci_high", "poisson", "t2a", "gap", "error"],
        "rows": rows,
    });
    Ok(Document {
        body,
        table: Some("rows"),
        code: if failed { 2 } else { 0 },
    })
}

fn dichotomy(a: &DichotomyArgs) -> Result<Document, Failure> {
    if a.hubs.is_empty() {
        return Err(input_error("--hubs needs at least one hub degree"));
    }
    if a.samples == 0 {
        return Err(input_error("--samples must be at least 1"));
    }
    let cfg = mc_config(a.samples, &a.mc);
    let mut rows = Vec::new();
    for &k in &a.hubs {
        let ds = DegreeSequence::hub_with_leaves(k, a.edges)?;
        let diag = asympt::dichotomy_diagnostic(&ds)?;
        let (upper, _) = asympt::bounds(&ds)?;
        let mut row = estimate_row(&ds, &cfg)?;
        row["k"] = json!(k);
        row["ratio"] = json!(diag.ratio);
        row["verdict"] = to_value(&diag.verdict);
        row["upper_bound_j1"] = json!(upper);
        rows.push(row);
    }
    let thresholds = asympt::DichotomyThresholds::default();
    let body = json!({
        "meta": meta("dichotomy", &a.mc, &a.output, json!({
            "edges": a.edges,
            "samples": a.samples,
            "thresholds": to_value(&thresholds),
        })),
        "columns": ["k", "ratio", "verdict", "p_hat", "ci_low", "ci_high", "upper_bound_j1"],
        "rows": rows,
    });
    Ok(Document {
        body,
        table: Some("rows"),
        code: 0,
    })
}
