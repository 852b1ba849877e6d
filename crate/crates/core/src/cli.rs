//! The `ccit` command-line tool.
//!
//! Every subcommand writes machine-readable output to stdout (or `--out`) and
//! one-line diagnostics to stderr. Exit codes: 0 when the command ran, 2 for
//! usage errors, 3 for data errors. A CI or not-CI verdict is part of the
//! output and never changes the exit code.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgAction, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::ci_test::{ccit_bootstrap, n_test_for, Decision, Tau, Variant, DEFAULT_BOOTSTRAPS};
use crate::classifier::GbtParams;
use crate::data::{load_csv, ColSpec, Table};
use crate::eval::{run_benchmark, run_graph_benchmark, BenchConfig, Family, GraphBenchConfig};
use crate::relations::{bundled_graph, gen_ci_relations, gen_nonci_relations, CausalGraph, DEFAULT_COND_SIZE, DEFAULT_NONCI_COUNT};
use crate::synthetic::{gen_pnl, PnlConfig, DEFAULT_VAR_ETA};
use crate::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ccit", version, about = "Classifier-based conditional independence testing")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Test X ⫫ Y | Z on columns of a CSV file and print the result as JSON.
    Test(TestArgs),
    /// Run a labeled benchmark and report ROC AUC as JSON.
    Bench(BenchArgs),
    /// Generate a post-nonlinear dataset (CSV) plus a JSON sidecar.
    Gen(GenArgs),
    /// Emit ground-truth CI and non-CI relations of a causal graph as JSON lines.
    Relations(RelationsArgs),
}

#[derive(Debug, Args)]
struct GbtArgs {
    /// Boosting rounds.
    #[arg(long, default_value_t = GbtParams::default().rounds)]
    rounds: usize,
    /// Maximum tree depth.
    #[arg(long, default_value_t = GbtParams::default().max_depth)]
    max_depth: usize,
    /// Shrinkage applied to every tree.
    #[arg(long, default_value_t = GbtParams::default().learning_rate)]
    learning_rate: f64,
    /// Minimum number of rows in a leaf.
    #[arg(long, default_value_t = GbtParams::default().min_leaf)]
    min_leaf: usize,
    /// L2 penalty on leaf weights.
    #[arg(long = "l2", default_value_t = GbtParams::default().l2_reg)]
    l2_reg: f64,
}

impl GbtArgs {
    fn params(&self) -> GbtParams {
        GbtParams {
            rounds: self.rounds,
            max_depth: self.max_depth,
            learning_rate: self.learning_rate,
            min_leaf: self.min_leaf,
            l2_reg: self.l2_reg,
        }
    }
}

#[derive(Debug, Args)]
struct TestArgs {
    /// CSV file with a header row.
    #[arg(long)]
    data: PathBuf,
    /// X columns: names, 0-based indices, or a range `a..b`, comma-separated.
    #[arg(long)]
    x: String,
    /// Y columns, same syntax as --x.
    #[arg(long)]
    y: String,
    /// Z columns, same syntax as --x.
    #[arg(long)]
    z: String,
    /// Number of bootstrap runs to average.
    #[arg(long = "B", default_value_t = DEFAULT_BOOTSTRAPS)]
    bootstraps: usize,
    /// Decision threshold: a nonnegative number or `auto` for 1/sqrt(n_test).
    #[arg(long, default_value = "auto")]
    tau: Tau,
    /// Test variant: v1 (plain) or v2 (bias-corrected).
    #[arg(long, default_value = "v2")]
    variant: Variant,
    #[command(flatten)]
    gbt: GbtArgs,
    /// Seed for every random choice.
    #[arg(long)]
    seed: u64,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Preset {
    /// n=1000, dz 1,5,20, 40 datasets, B=10.
    Desk,
    /// n=1000, dz 1,5,10,20,30,50,70, 300 datasets, B=50 (hours).
    Full,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Benchmark family.
    #[arg(long, value_enum, default_value = "pnl")]
    family: FamilyArg,
    /// Base configuration; explicit flags override it. Defaults to desk.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// Comma-separated list of Z dimensions (pnl).
    #[arg(long, value_delimiter = ',')]
    dz: Option<Vec<usize>>,
    /// Rows per dataset (pnl).
    #[arg(long)]
    n: Option<usize>,
    /// Datasets per dimension, half CI and half not (pnl).
    #[arg(long)]
    datasets: Option<usize>,
    /// Bootstrap runs per dataset.
    #[arg(long = "B")]
    bootstraps: Option<usize>,
    /// Decision threshold: a nonnegative number or `auto`.
    #[arg(long, default_value = "auto")]
    tau: Tau,
    /// Test variant.
    #[arg(long, default_value = "v2")]
    variant: Variant,
    #[command(flatten)]
    gbt: GbtArgs,
    /// Causal graph file, or `bundled:<name>` (graph).
    #[arg(long)]
    graph: Option<String>,
    /// CSV whose columns are named after the graph nodes (graph).
    #[arg(long)]
    data: Option<PathBuf>,
    /// Number of non-CI relations (graph).
    #[arg(long, default_value_t = DEFAULT_NONCI_COUNT)]
    nonci: usize,
    /// Conditioning-set size of non-CI relations (graph).
    #[arg(long, default_value_t = DEFAULT_COND_SIZE)]
    cond_size: usize,
    /// Seed for every random choice.
    #[arg(long)]
    seed: u64,
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long)]
    jobs: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write `d_z,auc` rows to this CSV (pnl).
    #[arg(long)]
    auc_csv: Option<PathBuf>,
    /// Include per-dataset wall-clock times (makes output non-reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FamilyArg {
    Pnl,
    Graph,
}

#[derive(Debug, Args)]
struct GenArgs {
    /// Number of rows.
    #[arg(long)]
    n: usize,
    /// Dimension of Z.
    #[arg(long)]
    dz: usize,
    /// Generate the dependent family (`--dependent` or `--dependent=false`).
    #[arg(long, num_args = 0..=1, default_value_t = false, default_missing_value = "true", action = ArgAction::Set)]
    dependent: bool,
    /// Noise variance.
    #[arg(long, default_value_t = DEFAULT_VAR_ETA)]
    var_eta: f64,
    /// Seed for every random choice.
    #[arg(long)]
    seed: u64,
    /// CSV path. The sidecar goes next to it with a `.json` extension.
    #[arg(long)]
    out: PathBuf,
    /// Overwrite existing files.
    #[arg(long)]
    force: bool,
}

#[derive(Debug, Args)]
struct RelationsArgs {
    /// Causal graph file, or `bundled:<name>`.
    #[arg(long)]
    graph: String,
    /// Number of non-CI relations.
    #[arg(long, default_value_t = DEFAULT_NONCI_COUNT)]
    nonci: usize,
    /// Conditioning-set size of non-CI relations.
    #[arg(long, default_value_t = DEFAULT_COND_SIZE)]
    cond_size: usize,
    /// Seed for the non-CI draws.
    #[arg(long)]
    seed: u64,
    /// Write the JSON lines here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failed command: the exit code and a one-line message.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn data(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_DATA,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParam(_) | Error::ColSpec(_) | Error::OverlappingAssignment(_) => EXIT_USAGE,
            _ => EXIT_DATA,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = std::result::Result<(), Failure>;

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = write!(stderr, "{text}");
                EXIT_USAGE
            } else {
                let _ = write!(stdout, "{text}");
                EXIT_OK
            };
        }
    };
    let result = match cli.command {
        Command::Test(a) => with_jobs(a.jobs, || cmd_test(&a)).and_then(|text| emit(&a.out, &text, stdout)),
        Command::Bench(a) => with_jobs(a.jobs, || cmd_bench(&a)).and_then(|text| emit(&a.out, &text, stdout)),
        Command::Gen(a) => cmd_gen(&a),
        Command::Relations(a) => cmd_relations(&a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn with_jobs<T: Send>(
    jobs: Option<usize>,
    f: impl FnOnce() -> std::result::Result<T, Failure> + Send,
) -> std::result::Result<T, Failure> {
    match jobs {
        None => f(),
        Some(0) => Err(Failure::usage("--jobs must be positive")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Failure::usage(format!("cannot start {n} worker threads: {e}")))?
            .install(f),
    }
}

fn emit(out: &Option<PathBuf>, text: &str, stdout: &mut dyn Write) -> CmdResult {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::data(format!("cannot write {}: {e}", path.display()))),
        None => stdout
            .write_all(text.as_bytes())
            .map_err(|e| Failure::data(format!("cannot write to stdout: {e}"))),
    }
}

fn checked_params(gbt: &GbtArgs) -> std::result::Result<GbtParams, Failure> {
    let params = gbt.params();
    params.validate()?;
    Ok(params)
}

fn cmd_test(a: &TestArgs) -> std::result::Result<String, Failure> {
    let params = checked_params(&a.gbt)?;
    if a.bootstraps == 0 {
        return Err(Failure::usage("--B must be positive"));
    }
    let colspec = ColSpec::parse(&a.x, &a.y, &a.z)?;
    let data = load_csv(&a.data, &colspec)?;
    let tau = a.tau.resolve(n_test_for(data.len()))?;
    let result = ccit_bootstrap(&data, a.bootstraps, tau, a.variant, &params, a.seed)?;
    Ok(result.to_json()? + "\n")
}

fn load_graph(spec: &str) -> std::result::Result<CausalGraph, Failure> {
    if let Some(name) = spec.strip_prefix("bundled:") {
        return bundled_graph(name).map_err(|e| Failure::usage(e.to_string()));
    }
    let text = fs::read_to_string(spec).map_err(|e| Failure::data(format!("cannot read {spec}: {e}")))?;
    CausalGraph::parse(&text).map_err(|e| Failure::data(format!("{spec}: {e}")))
}

fn cmd_bench(a: &BenchArgs) -> std::result::Result<String, Failure> {
    let params = checked_params(&a.gbt)?;
    match a.family {
        FamilyArg::Pnl => {
            let base = match a.preset.unwrap_or(Preset::Desk) {
                Preset::Desk => BenchConfig::desk(a.seed),
                Preset::Full => BenchConfig::full(a.seed),
            };
            let config = BenchConfig {
                family: Family::Pnl,
                n: a.n.unwrap_or(base.n),
                d_z: a.dz.clone().unwrap_or(base.d_z),
                datasets: a.datasets.unwrap_or(base.datasets),
                bootstraps: a.bootstraps.unwrap_or(base.bootstraps),
                variant: a.variant,
                tau: a.tau,
                params,
                seed: a.seed,
            };
            config.validate()?;
            let mut report = run_benchmark(&config)?;
            if !a.timings {
                report.strip_timings();
            }
            if let Some(path) = &a.auc_csv {
                fs::write(path, report.auc_csv())
                    .map_err(|e| Failure::data(format!("cannot write {}: {e}", path.display())))?;
            }
            Ok(report.to_json()? + "\n")
        }
        FamilyArg::Graph => {
            let graph_spec = a
                .graph
                .as_deref()
                .ok_or_else(|| Failure::usage("--family graph needs --graph"))?;
            let data = a
                .data
                .as_ref()
                .ok_or_else(|| Failure::usage("--family graph needs --data"))?;
            let graph = load_graph(graph_spec)?;
            let table = Table::load_csv(data)?;
            let config = GraphBenchConfig {
                graph: graph_spec.to_string(),
                nonci: a.nonci,
                cond_size: a.cond_size,
                bootstraps: a.bootstraps.unwrap_or(DEFAULT_BOOTSTRAPS),
                variant: a.variant,
                tau: a.tau,
                params,
                seed: a.seed,
            };
            let mut report = run_graph_benchmark(&table, &graph, &config)?;
            if !a.timings {
                report.strip_timings();
            }
            Ok(report.to_json()? + "\n")
        }
    }
}

/// `data.csv` → `data.json`; a path without extension gets `.json` appended.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    if csv.extension().is_some() {
        csv.with_extension("json")
    } else {
        let mut s = csv.as_os_str().to_owned();
        s.push(".json");
        PathBuf::from(s)
    }
}

#[derive(Serialize)]
struct Sidecar<'a> {
    #[serde(flatten)]
    config: &'a PnlConfig,
    ground_truth: Decision,
}

fn cmd_gen(a: &GenArgs) -> CmdResult {
    let config = PnlConfig::new(a.n, a.dz, a.dependent, a.seed)?.with_var_eta(a.var_eta);
    let sidecar = sidecar_path(&a.out);
    if sidecar == a.out {
        return Err(Failure::usage("--out must not end in .json"));
    }
    if !a.force {
        for p in [&a.out, &sidecar] {
            if p.exists() {
                return Err(Failure::data(format!(
                    "{} exists; pass --force to overwrite",
                    p.display()
                )));
            }
        }
    }
    let (data, truth) = gen_pnl(&config)?;

    let write_err = |p: &Path, e: &dyn std::fmt::Display| Failure::data(format!("cannot write {}: {e}", p.display()));
    let mut w = csv::Writer::from_path(&a.out).map_err(|e| write_err(&a.out, &e))?;
    let mut header = vec!["x0".to_string(), "y0".to_string()];
    header.extend((0..a.dz).map(|k| format!("z{k}")));
    w.write_record(&header).map_err(|e| write_err(&a.out, &e))?;
    for row in data.rows() {
        w.write_record(row.iter().map(|v| v.to_string()))
            .map_err(|e| write_err(&a.out, &e))?;
    }
    w.flush().map_err(|e| write_err(&a.out, &e))?;

    let meta = serde_json::to_string_pretty(&Sidecar {
        config: &config,
        ground_truth: truth,
    })
    .map_err(Error::from)?;
    fs::write(&sidecar, meta + "\n").map_err(|e| write_err(&sidecar, &e))
}

fn cmd_relations(a: &RelationsArgs, stdout: &mut dyn Write) -> CmdResult {
    let graph = load_graph(&a.graph)?;
    let mut relations = gen_ci_relations(&graph);
    if a.nonci > 0 {
        relations.extend(gen_nonci_relations(&graph, a.nonci, a.cond_size, a.seed).map_err(|e| Failure::usage(e.to_string()))?);
    }
    let mut text = String::new();
    for r in &relations {
        text.push_str(&serde_json::to_string(r).map_err(Error::from)?);
        text.push('\n');
    }
    emit(&a.out, &text, stdout)
}
