//! Command-line front end: `run`, `curve` and `verify`.
//!
//! Settings come from an optional TOML file given with `--config`, then the
//! `GOSSIPBENCH_SEED` environment variable, then command-line flags, each
//! layer overriding the previous one. Exit codes: 0 success, 1 configuration
//! error, 2 bound violation.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Mode, Placement, PlacementMode, Simulation};
use crate::experiments::battery::{run_battery, BatteryRow, Fault, Profile};
use crate::experiments::{growth_curve, monte_carlo, ExperimentError, GrowthCurve, Summary, TrialConfig};
use crate::gfield::{Field, FieldKind};
use crate::graph::{parse_graph, DiGraph, FamilySpec};
use crate::protocols::ProtocolSpec;

pub const SEED_ENV: &str = "GOSSIPBENCH_SEED";
pub const RUN_CSV_HEADER: &str = "trial,seed,n,m,protocol,mode,covered,delay,transmissions";
pub const CURVE_CSV_HEADER: &str = "n,protocol,trials,q25,median,q75,median_over_n";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_BOUND_VIOLATION: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error(transparent)]
    Experiment(#[from] ExperimentError),
}

fn invalid(msg: impl std::fmt::Display) -> CliError {
    CliError::ConfigInvalid(msg.to_string())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum ProtocolName {
    For,
    Nca,
    Fwr,
    ToyAlpha,
    ToyTwice,
}

/// Settings for `gossipbench run`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Family spec such as `ring:32`; exclusive with `graph_file`.
    pub graph: Option<FamilySpec>,
    pub graph_file: Option<PathBuf>,
    pub protocol: ProtocolName,
    pub alpha: f64,
    pub recv_suppress: bool,
    pub mode: Mode,
    pub m: usize,
    pub placement: PlacementMode,
    pub field: FieldKind,
    pub t: usize,
    pub seed: u64,
    pub trials: usize,
    /// Rounds or ticks per trial; derived from `budget_factor` when unset.
    pub budget: Option<u64>,
    pub budget_factor: u64,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            graph: None,
            graph_file: None,
            protocol: ProtocolName::Fwr,
            alpha: 0.5,
            recv_suppress: false,
            mode: Mode::Async,
            m: 1,
            placement: PlacementMode::SingleSource(0),
            field: FieldKind::GF256,
            t: crate::engine::DEFAULT_PAYLOAD_LEN,
            seed: 0,
            trials: 1,
            budget: None,
            budget_factor: 16,
            csv: None,
            json: None,
        }
    }
}

fn protocol_spec(name: ProtocolName, alpha: f64, recv_suppress: bool, fault: Option<Fault>) -> ProtocolSpec {
    match name {
        ProtocolName::For => ProtocolSpec::For,
        ProtocolName::Nca => ProtocolSpec::Nca,
        ProtocolName::Fwr => ProtocolSpec::Fwr { recv_suppress, drop_sent_log: fault == Some(Fault::DropSentLog) },
        ProtocolName::ToyAlpha => ProtocolSpec::ToyAlpha { alpha },
        ProtocolName::ToyTwice => ProtocolSpec::ToyTwice,
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(invalid)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn protocol_spec(&self) -> ProtocolSpec {
        protocol_spec(self.protocol, self.alpha, self.recv_suppress, None)
    }

    pub fn load_graph(&self) -> Result<(DiGraph, String), CliError> {
        match (&self.graph, &self.graph_file) {
            (Some(spec), None) => Ok((spec.generate().map_err(invalid)?, spec.to_string())),
            (None, Some(path)) => {
                let text = read(path)?;
                Ok((parse_graph(&text).map_err(invalid)?, path.display().to_string()))
            }
            (Some(_), Some(_)) => Err(invalid("give either a graph spec or a graph file, not both")),
            (None, None) => Err(invalid("a graph is required (--graph or --graph-file)")),
        }
    }

    /// Checks everything that can be checked without running a trial.
    pub fn validate(&self, g: &DiGraph, protocol: ProtocolSpec) -> Result<TrialConfig, CliError> {
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.m == 0 {
            return Err(invalid("m must be at least 1"));
        }
        if self.t == 0 {
            return Err(invalid("t must be at least 1"));
        }
        if self.budget == Some(0) {
            return Err(invalid("budget must be at least 1"));
        }
        protocol.validate().map_err(invalid)?;
        let field = Field::new(self.field).map_err(invalid)?;
        let probe_seed = crate::engine::trial_seed(self.seed, 0);
        let placement = Placement::resolve(&self.placement, g, self.m, probe_seed).map_err(invalid)?;
        Simulation::new(g, protocol, &field, self.t, &placement, probe_seed).map_err(invalid)?;
        Ok(TrialConfig {
            protocol,
            mode: self.mode,
            m: self.m,
            placement: self.placement.clone(),
            field: self.field,
            payload_len: self.t,
            master_seed: self.seed,
            trials: self.trials,
            budget: Some(self.budget.unwrap_or_else(|| crate::experiments::default_budget(g, self.m, self.budget_factor))),
            jobs: None,
        })
    }
}

/// Settings for `gossipbench curve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveConfig {
    /// Family whose size is replaced by each entry of `sizes`.
    pub family: Option<FamilySpec>,
    pub protocol: ProtocolName,
    pub recv_suppress: bool,
    pub sizes: Vec<usize>,
    pub trials: usize,
    pub budget_factor: u64,
    pub seed: u64,
    pub csv: Option<PathBuf>,
    pub json: Option<PathBuf>,
}

impl Default for CurveConfig {
    fn default() -> Self {
        Self {
            family: None,
            protocol: ProtocolName::Fwr,
            recv_suppress: false,
            sizes: Vec::new(),
            trials: 200,
            budget_factor: 16,
            seed: 0,
            csv: None,
            json: None,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gossipbench", version, about = "Multi-rumor gossip simulator and bound checker")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run seeded trials on one graph and write one row per trial.
    Run(RunArgs),
    /// Transmissions-to-cover across a ladder of sizes of one family.
    Curve(CurveArgs),
    /// Run the built-in verification battery.
    Verify(VerifyArgs),
}

#[derive(Debug, Args)]
struct Common {
    /// TOML file with default settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed [env: GOSSIPBENCH_SEED].
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads for independent trials.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    /// chain:N, ring:N, tree:Q:D[:pure], torus:RxC, complete:N, regular:N:D[:SEED]
    #[arg(long)]
    graph: Option<String>,
    /// Edge-list file: vertex count, then one `u v` per line.
    #[arg(long)]
    graph_file: Option<PathBuf>,
    #[arg(long, value_enum)]
    protocol: Option<ProtocolName>,
    /// sync or async.
    #[arg(long)]
    mode: Option<String>,
    #[arg(long)]
    m: Option<usize>,
    /// single:V, random, random:SEED or explicit:V1,V2,...
    #[arg(long)]
    placement: Option<String>,
    /// gf2, gf16, gf256 or gfP for a prime P.
    #[arg(long)]
    field: Option<String>,
    /// Payload length.
    #[arg(long)]
    t: Option<usize>,
    #[arg(long)]
    alpha: Option<f64>,
    /// fwr: also suppress the pair (rumor, port back to the sender) on receipt.
    #[arg(long)]
    recv_suppress: bool,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    budget_factor: Option<u64>,
    #[arg(long, hide = true, value_enum)]
    inject_fault: Option<FaultArg>,
}

#[derive(Debug, Args)]
struct CurveArgs {
    #[command(flatten)]
    common: Common,
    /// Family spec; its size is replaced by each ladder entry.
    #[arg(long)]
    family: Option<String>,
    #[arg(long, value_enum)]
    protocol: Option<ProtocolName>,
    #[arg(long)]
    recv_suppress: bool,
    /// Comma-separated ascending sizes.
    #[arg(long, value_delimiter = ',')]
    sizes: Option<Vec<usize>>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    budget_factor: Option<u64>,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Smaller graphs and fewer trials.
    #[arg(long)]
    quick: bool,
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    json: Option<PathBuf>,
    #[arg(long, hide = true, value_enum)]
    inject_fault: Option<FaultArg>,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum FaultArg {
    DropSentLog,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Self {
        match f {
            FaultArg::DropSentLog => Fault::DropSentLog,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn env_seed() -> Result<Option<u64>, CliError> {
    match std::env::var(SEED_ENV) {
        Ok(s) => s.trim().parse().map(Some).map_err(|_| invalid(format!("{SEED_ENV} is not a u64: {s}"))),
        Err(std::env::VarError::NotPresent) => Ok(None),
        Err(e) => Err(invalid(e)),
    }
}

fn parsed<T: std::str::FromStr>(flag: &str, value: Option<String>) -> Result<Option<T>, CliError>
where
    T::Err: std::fmt::Display,
{
    value
        .map(|v| v.parse::<T>().map_err(|e| invalid(format!("--{flag}: {e}"))))
        .transpose()
}

fn layered<T: serde::de::DeserializeOwned + Default>(path: &Option<PathBuf>) -> Result<T, CliError> {
    match path {
        Some(p) => toml::from_str(&read(p)?).map_err(|e| invalid(format!("{}: {e}", p.display()))),
        None => Ok(T::default()),
    }
}

fn resolve_run(args: RunArgs) -> Result<RunConfig, CliError> {
    let mut cfg: RunConfig = layered(&args.common.config)?;
    if let Some(seed) = env_seed()? {
        cfg.seed = seed;
    }
    if let Some(spec) = parsed::<FamilySpec>("graph", args.graph)? {
        cfg.graph = Some(spec);
        cfg.graph_file = None;
    }
    if let Some(path) = args.graph_file {
        cfg.graph_file = Some(path);
        cfg.graph = None;
    }
    cfg.protocol = args.protocol.unwrap_or(cfg.protocol);
    cfg.mode = parsed("mode", args.mode)?.unwrap_or(cfg.mode);
    cfg.m = args.m.unwrap_or(cfg.m);
    cfg.placement = parsed("placement", args.placement)?.unwrap_or(cfg.placement);
    cfg.field = parsed("field", args.field)?.unwrap_or(cfg.field);
    cfg.t = args.t.unwrap_or(cfg.t);
    cfg.alpha = args.alpha.unwrap_or(cfg.alpha);
    cfg.recv_suppress |= args.recv_suppress;
    cfg.seed = args.common.seed.unwrap_or(cfg.seed);
    cfg.trials = args.trials.unwrap_or(cfg.trials);
    cfg.budget = args.budget.or(cfg.budget);
    cfg.budget_factor = args.budget_factor.unwrap_or(cfg.budget_factor);
    cfg.csv = args.common.csv.or(cfg.csv);
    cfg.json = args.common.json.or(cfg.json);
    Ok(cfg)
}

fn resolve_curve(args: CurveArgs) -> Result<CurveConfig, CliError> {
    let mut cfg: CurveConfig = layered(&args.common.config)?;
    if let Some(seed) = env_seed()? {
        cfg.seed = seed;
    }
    cfg.family = parsed("family", args.family)?.or(cfg.family);
    cfg.protocol = args.protocol.unwrap_or(cfg.protocol);
    cfg.recv_suppress |= args.recv_suppress;
    cfg.sizes = args.sizes.unwrap_or(cfg.sizes);
    cfg.trials = args.trials.unwrap_or(cfg.trials);
    cfg.budget_factor = args.budget_factor.unwrap_or(cfg.budget_factor);
    cfg.seed = args.common.seed.unwrap_or(cfg.seed);
    cfg.csv = args.common.csv.or(cfg.csv);
    cfg.json = args.common.json.or(cfg.json);
    Ok(cfg)
}

/// CSV rows for a batch of trials, header included.
pub fn run_csv(summary: &Summary) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in &summary.records {
        w.serialize(r).expect("in-memory write");
    }
    let mut bytes = w.into_inner().expect("in-memory write");
    if summary.records.is_empty() {
        bytes = format!("{RUN_CSV_HEADER}\n").into_bytes();
    }
    String::from_utf8(bytes).expect("utf-8")
}

pub fn curve_csv(curve: &GrowthCurve) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CURVE_CSV_HEADER.split(',')).expect("in-memory write");
    for p in &curve.points {
        w.write_record([
            p.n.to_string(),
            p.protocol.clone(),
            p.trials.to_string(),
            p.q25.to_string(),
            p.median.to_string(),
            p.q75.to_string(),
            p.median_over_n.to_string(),
        ])
        .expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn emit(out: &mut dyn Write, csv_path: &Option<PathBuf>, json_path: &Option<PathBuf>, csv: &str, json: &str) -> Result<(), CliError> {
    match csv_path {
        Some(p) => write(p, csv)?,
        None if json_path.is_none() => out.write_all(csv.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })?,
        None => {}
    }
    if let Some(p) = json_path {
        write(p, json)?;
    }
    Ok(())
}

/// Executes a resolved `run` configuration and returns its summary.
pub fn execute_run(cfg: &RunConfig, fault: Option<Fault>) -> Result<Summary, CliError> {
    let (g, label) = cfg.load_graph()?;
    let protocol = protocol_spec(cfg.protocol, cfg.alpha, cfg.recv_suppress, fault);
    let trial_cfg = cfg.validate(&g, protocol)?;
    Ok(monte_carlo(&g, &label, &trial_cfg)?)
}

pub fn execute_curve(cfg: &CurveConfig) -> Result<GrowthCurve, CliError> {
    let family = cfg.family.as_ref().ok_or_else(|| invalid("a family is required (--family)"))?;
    if cfg.sizes.len() < 2 {
        return Err(invalid("a curve needs at least two sizes"));
    }
    let protocol = protocol_spec(cfg.protocol, 0.5, cfg.recv_suppress, None);
    if protocol.is_toy() {
        return Err(invalid("toy protocols only run on the two-vertex graph"));
    }
    growth_curve(family, &protocol, &cfg.sizes, cfg.trials, cfg.budget_factor, cfg.seed).map_err(|e| match e {
        ExperimentError::ConfigInvalid(msg) => invalid(msg),
        other => CliError::Experiment(other),
    })
}

pub fn verify_table(rows: &[BatteryRow]) -> String {
    let width = rows.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut s = String::new();
    for r in rows {
        let verdict = if r.passed { "PASS" } else { "FAIL" };
        s.push_str(&format!("{:<width$}  {verdict}  n={:<6} {}\n", r.name, r.samples, r.detail));
    }
    let failed = rows.iter().filter(|r| !r.passed).count();
    s.push_str(&format!("{} checks, {failed} failed\n", rows.len()));
    s
}

fn with_jobs<T: Send>(jobs: Option<usize>, work: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    match jobs {
        None => Ok(work()),
        Some(0) => Err(invalid("--jobs must be at least 1")),
        Some(j) => rayon::ThreadPoolBuilder::new().num_threads(j).build().map(|p| p.install(work)).map_err(invalid),
    }
}

fn dispatch(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Run(args) => {
            let jobs = args.common.jobs;
            let fault = args.inject_fault.map(Fault::from);
            let cfg = resolve_run(args)?;
            let summary = with_jobs(jobs, || execute_run(&cfg, fault))??;
            emit(out, &cfg.csv, &cfg.json, &run_csv(&summary), &to_json(&summary))?;
            let _ = writeln!(
                err,
                "{} trials, covering_rate {:.4}, {} bound violations",
                summary.trials,
                summary.covering_rate,
                summary.bound_violations.len()
            );
            for report in summary.bound_violations.iter().take(5) {
                for c in report.failures() {
                    let _ = writeln!(err, "seed {}: {} observed {} {} {}", report.run.seed, c.name, c.observed, c.relation, c.theoretical);
                }
            }
            Ok(if summary.bound_violations.is_empty() { EXIT_OK } else { EXIT_BOUND_VIOLATION })
        }
        Command::Curve(args) => {
            let jobs = args.common.jobs;
            let cfg = resolve_curve(args)?;
            let curve = with_jobs(jobs, || execute_curve(&cfg))??;
            emit(out, &cfg.csv, &cfg.json, &curve_csv(&curve), &to_json(&curve))?;
            Ok(EXIT_OK)
        }
        Command::Verify(args) => {
            let profile = if args.quick { Profile::Quick } else { Profile::Full };
            let fault = args.inject_fault.map(Fault::from);
            let rows = with_jobs(args.jobs, || run_battery(profile, fault))??;
            let _ = out.write_all(verify_table(&rows).as_bytes());
            if let Some(p) = &args.json {
                write(p, &to_json(&rows))?;
            }
            Ok(if rows.iter().all(|r| r.passed) { EXIT_OK } else { EXIT_BOUND_VIOLATION })
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    let name = match &cli.command {
        Command::Run(_) => "run",
        Command::Curve(_) => "curve",
        Command::Verify(_) => "verify",
    };
    match dispatch(cli, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if let CliError::ConfigInvalid(_) = e {
                let mut cmd = Cli::command();
                cmd.build();
                if let Some(sub) = cmd.find_subcommand_mut(name) {
                    let _ = writeln!(err, "\n{}\n\nFor more information, try 'gossipbench {name} --help'.", sub.render_usage());
                }
            }
            EXIT_CONFIG
        }
    }
}
