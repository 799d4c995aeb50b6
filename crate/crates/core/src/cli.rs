//! Command-line front end.
//!
//! Every subcommand that writes an artifact also writes
//! `<artifact>.manifest.json`, recording the argument vector, the parsed
//! parameters, seeds, the crate version, wall-clock time and the SHA-256 of
//! each output. Payload files carry no timestamps, so re-running the recorded
//! argument vector reproduces them byte for byte.
//!
//! Exit codes: 0 success, 1 usage or input error, 2 numerical failure,
//! 3 non-convergence under `--strict`.

use std::ffi::OsString;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::alist::{export_alist, import_alist};
use crate::bp::Schedule;
use crate::channel::{ebn0_db_from_sigma, sigma_from_ebn0_db, ChannelModel};
use crate::code::{rates, terminate, TannerGraph};
use crate::de::{run_de, BecEngine, DeConfig, DeEngine, DeTrace, DensityEngine, Grid, Layout};
use crate::ensemble::{design_rate, sample_ensemble, EnsembleParams};
use crate::error::{Error, Result};
use crate::fmt::Csv;
use crate::montecarlo::{self, CodeSampling, MonteCarloConfig};
use crate::threshold::{
    self, bisect_threshold, l_for_target_rate, rescale_ebn0, Certificate, EngineChoice, ThresholdQuery,
};
use crate::window::{profile_updates, run_windowed, WindowConfig, WindowReport};

pub const MANIFEST_SCHEMA: &str = "ldpcc.run_manifest/1";
pub const DE_TRACE_SCHEMA: &str = "ldpcc.de_trace/1";
pub const GRAPH_SCHEMA: &str = "ldpcc.tanner_graph/1";
pub const CODE_SUMMARY_SCHEMA: &str = "ldpcc.code_summary/1";

/// Directory used for outputs when `--out` is not given.
pub const OUT_DIR_ENV: &str = "LDPCC_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_NUMERICAL: i32 = 2;
pub const EXIT_NOT_CONVERGED: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "ldpcc",
    version,
    about = "Terminated LDPC convolutional codes: construction, decoding and density evolution"
)]
pub struct Cli {
    /// Key-value file (`key = value` per line) supplying defaults for flags
    /// not given on the command line.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Exit with status 3 when a run does not converge.
    #[arg(long, global = true)]
    pub strict: bool,
    /// Worker threads for Monte-Carlo frames.
    #[arg(long, global = true, value_name = "N")]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(tag = "subcommand", rename_all = "snake_case")]
pub enum Command {
    /// Sample and terminate a code; write its parity-check matrix as alist.
    Construct(ConstructArgs),
    /// Monte-Carlo BER/FER of belief-propagation decoding.
    Simulate(SimulateArgs),
    /// Position-dependent density evolution with the parallel schedule.
    De(DeArgs),
    /// Density evolution with the sliding-window schedule.
    Window(WindowArgs),
    /// Bisect the channel parameter for the decoding threshold.
    Threshold(ThresholdArgs),
    /// Convert between artifact formats.
    Export(ExportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelArg {
    Bec,
    Awgn,
}

#[derive(Debug, Args, Serialize)]
pub struct ConstructArgs {
    #[arg(long = "J", visible_alias = "j")]
    pub j: usize,
    #[arg(long = "M", visible_alias = "m")]
    pub m: usize,
    #[arg(long = "L", visible_alias = "l")]
    pub l: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Also compute the GF(2) rank and structural rate (dense, cubic cost).
    #[arg(long)]
    pub rank: bool,
    #[arg(long)]
    pub girth: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct SimulateArgs {
    #[arg(long = "J", visible_alias = "j")]
    pub j: usize,
    #[arg(long = "M", visible_alias = "m")]
    pub m: usize,
    #[arg(long = "L", visible_alias = "l")]
    pub l: usize,
    #[arg(long, value_enum)]
    pub channel: ChannelArg,
    /// Erasure probability or Eb/N0 in dB; comma-separated for a sweep.
    #[arg(long, value_delimiter = ',', required = true)]
    pub param: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 100)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// `parallel` or `window:W`.
    #[arg(long, default_value = "parallel", value_parser = parse_schedule)]
    pub schedule: ScheduleArg,
    /// A-posteriori LLR magnitude that lets the decoding window advance.
    #[arg(long, default_value_t = 20.0)]
    pub target_llr: f64,
    /// Draw a fresh code for every frame.
    #[arg(long)]
    pub per_frame_codes: bool,
    /// Send encoded random information instead of the all-zero word.
    #[arg(long)]
    pub random_info: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleArg {
    Parallel,
    Window { width: usize },
}

fn parse_schedule(s: &str) -> std::result::Result<ScheduleArg, String> {
    if s == "parallel" {
        return Ok(ScheduleArg::Parallel);
    }
    match s.strip_prefix("window:").map(str::parse::<usize>) {
        Some(Ok(width)) if width > 0 => Ok(ScheduleArg::Window { width }),
        _ => Err(format!("expected `parallel` or `window:W` with W >= 1, got `{s}`")),
    }
}

/// Channel selection shared by the analysis subcommands.
#[derive(Debug, Args, Serialize)]
pub struct ChannelOpts {
    #[arg(long, value_enum)]
    pub channel: ChannelArg,
    #[arg(long, conflicts_with_all = ["ebn0_db", "sigma"])]
    pub epsilon: Option<f64>,
    #[arg(long, conflicts_with = "sigma", allow_hyphen_values = true)]
    pub ebn0_db: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    /// Rate used to convert Eb/N0 to a noise deviation; defaults to the
    /// design rate (1/2 for the block ensemble).
    #[arg(long)]
    pub rate: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct GridOpts {
    /// LLR quantization step.
    #[arg(long, default_value_t = 0.01)]
    pub delta: f64,
    /// LLR magnitude where the grid saturates.
    #[arg(long, default_value_t = 30.0)]
    pub rmax: f64,
}

impl GridOpts {
    fn grid(&self) -> Result<Grid> {
        Grid::new(self.delta, self.rmax)
    }
}

#[derive(Debug, Args, Serialize)]
pub struct DeArgs {
    #[arg(long = "J", visible_alias = "j")]
    pub j: usize,
    /// Termination length; omit for the single-position block ensemble.
    #[arg(long = "L", visible_alias = "l")]
    pub l: Option<usize>,
    #[command(flatten)]
    pub channel: ChannelOpts,
    #[command(flatten)]
    pub grid: GridOpts,
    /// Parallel iterations allowed.
    #[arg(long, default_value_t = 100_000)]
    pub max_updates: usize,
    /// Per-level `P_b` snapshot every this many iterations (0 disables).
    #[arg(long, default_value_t = 0)]
    pub pb_stride: usize,
    /// Continue after breakout until `B_max` is at most this value.
    #[arg(long)]
    pub target_bmax: Option<f64>,
    #[arg(long, default_value_t = 1e-13)]
    pub stagnation_tol: f64,
    /// Update every level instead of mirroring about the center.
    #[arg(long)]
    pub no_mirror: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct WindowArgs {
    #[arg(long = "J", visible_alias = "j")]
    pub j: usize,
    #[arg(long = "L", visible_alias = "l")]
    pub l: usize,
    #[arg(long = "W", visible_alias = "w")]
    pub w: usize,
    /// Shift target; defaults to half the breakout value.
    #[arg(long = "B0", visible_alias = "b0")]
    pub b0: Option<f64>,
    #[command(flatten)]
    pub channel: ChannelOpts,
    #[command(flatten)]
    pub grid: GridOpts,
    #[arg(long, default_value_t = 10_000)]
    pub per_position_budget: usize,
    /// Total sweep budget.
    #[arg(long)]
    pub max_updates: Option<usize>,
    #[arg(long, default_value_t = 1e-13)]
    pub stagnation_tol: f64,
    /// Levels whose `P_b` is traced, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub sample_levels: Vec<usize>,
    /// Also write the level traces as CSV.
    #[arg(long)]
    pub traces_csv: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CertificateArg {
    Breakout,
    Practical,
}

#[derive(Debug, Args, Serialize)]
pub struct ThresholdArgs {
    #[arg(long, value_enum)]
    pub channel: ChannelArg,
    #[arg(long = "J", visible_alias = "j")]
    pub j: usize,
    /// Termination length; with neither this nor `--target-rate` the block
    /// ensemble is analysed.
    #[arg(long = "L", visible_alias = "l", conflicts_with = "target_rate")]
    pub l: Option<usize>,
    /// Smallest `L` whose design rate reaches this value.
    #[arg(long)]
    pub target_rate: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    /// `parallel` or `window:W`.
    #[arg(long, default_value = "parallel", value_parser = parse_schedule)]
    pub engine: ScheduleArg,
    #[arg(long, value_enum, default_value = "breakout")]
    pub certificate: CertificateArg,
    #[command(flatten)]
    pub grid: GridOpts,
    #[arg(long, default_value_t = 100_000)]
    pub max_updates: usize,
    #[arg(long, default_value_t = 1e-13)]
    pub stagnation_tol: f64,
    #[arg(long = "B0", visible_alias = "b0")]
    pub b0: Option<f64>,
    #[arg(long, default_value_t = 10_000)]
    pub per_position_budget: usize,
    /// Also report the threshold in Eb/N0 at this rate for the same noise
    /// deviation.
    #[arg(long)]
    pub report_rate: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExportFormat {
    /// Tanner graph as alist.
    Alist,
    /// Tanner graph as JSON.
    Json,
    /// Main table of a JSON result as CSV.
    Csv,
    /// Per-level `P_b` snapshots of a density-evolution trace as CSV.
    PbCsv,
}

#[derive(Debug, Args, Serialize)]
pub struct ExportArgs {
    /// An alist file or a JSON artifact written by another subcommand.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum)]
    pub to: ExportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match expand_config(argv) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_USAGE;
        }
    };
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let recorded: Vec<String> = argv.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let outcome = match cli.jobs {
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| execute(&cli, &recorded)),
            Err(e) => Err(Error::InvalidParams(e.to_string())),
        },
        None => execute(&cli, &recorded),
    };
    match outcome {
        Ok(converged) if !converged && cli.strict => EXIT_NOT_CONVERGED,
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for a failed command.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) | Error::GridTooSmall(_) | Error::TerminationSingular { .. } => EXIT_NUMERICAL,
        _ => EXIT_USAGE,
    }
}

/// Appends `--key value` for every config entry whose flag is absent from
/// `argv`. Boolean flags take `true` or `false`.
pub fn expand_config(mut argv: Vec<OsString>) -> Result<Vec<OsString>> {
    let strs: Vec<String> = argv.iter().map(|a| a.to_string_lossy().into_owned()).collect();
    let path = strs.iter().enumerate().find_map(|(i, a)| {
        if a == "--config" {
            strs.get(i + 1).cloned()
        } else {
            a.strip_prefix("--config=").map(str::to_owned)
        }
    });
    let Some(path) = path else { return Ok(argv) };
    let text = fs::read_to_string(&path).map_err(|e| Error::InvalidParams(format!("config {path}: {e}")))?;
    for (key, value) in parse_config(&text)? {
        let flag = format!("--{key}");
        let present = strs.iter().any(|a| *a == flag || a.starts_with(&format!("{flag}=")));
        if present {
            continue;
        }
        match value.as_str() {
            "true" => argv.push(flag.into()),
            "false" => {}
            _ => argv.push(format!("{flag}={value}").into()),
        }
    }
    Ok(argv)
}

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(Error::InvalidParams(format!("config line {}: expected `key = value`", i + 1)));
        };
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || k.starts_with('-') {
            return Err(Error::InvalidParams(format!("config line {}: bad key `{k}`", i + 1)));
        }
        out.push((k.to_owned(), v.to_owned()));
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OutputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunManifest {
    pub schema: String,
    pub subcommand: String,
    /// Arguments after the program name, with config-file defaults expanded.
    pub argv: Vec<String>,
    pub parameters: Value,
    pub seeds: Vec<u64>,
    pub version: String,
    pub grid: Option<Grid>,
    pub started_unix: f64,
    pub wall_clock_seconds: f64,
    pub outputs: Vec<OutputDigest>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Path of the manifest written next to `output`.
pub fn manifest_path(output: &Path) -> PathBuf {
    let mut s = output.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

struct Session<'a> {
    subcommand: &'static str,
    argv: &'a [String],
    parameters: Value,
    seeds: Vec<u64>,
    grid: Option<Grid>,
    started: Instant,
    started_unix: f64,
    outputs: Vec<(PathBuf, String)>,
}

impl<'a> Session<'a> {
    fn new(subcommand: &'static str, argv: &'a [String], parameters: Value) -> Self {
        let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs_f64()).unwrap_or(0.0);
        Session {
            subcommand,
            argv,
            parameters,
            seeds: Vec::new(),
            grid: None,
            started: Instant::now(),
            started_unix,
            outputs: Vec::new(),
        }
    }

    fn write(&mut self, path: &Path, bytes: &[u8]) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir)?;
        }
        fs::write(path, bytes)?;
        self.outputs.push((path.to_owned(), sha256_hex(bytes)));
        Ok(())
    }

    fn finish(self) -> Result<()> {
        let Some((primary, _)) = self.outputs.first() else { return Ok(()) };
        let manifest = RunManifest {
            schema: MANIFEST_SCHEMA.into(),
            subcommand: self.subcommand.into(),
            argv: self.argv.to_vec(),
            parameters: self.parameters,
            seeds: self.seeds,
            version: env!("CARGO_PKG_VERSION").into(),
            grid: self.grid,
            started_unix: self.started_unix,
            wall_clock_seconds: self.started.elapsed().as_secs_f64(),
            outputs: self
                .outputs
                .iter()
                .map(|(p, d)| OutputDigest { path: p.display().to_string(), sha256: d.clone() })
                .collect(),
        };
        let path = manifest_path(primary);
        fs::write(path, to_json(&manifest)?)?;
        Ok(())
    }
}

fn to_json<T: Serialize>(value: &T) -> Result<Vec<u8>> {
    let mut v = serde_json::to_vec_pretty(value)?;
    v.push(b'\n');
    Ok(v)
}

/// Adds a `schema` field in front of a serialized object.
fn with_schema<T: Serialize>(schema: &str, body: &T) -> Result<Value> {
    let mut map = serde_json::Map::new();
    map.insert("schema".into(), Value::String(schema.into()));
    match serde_json::to_value(body)? {
        Value::Object(rest) => map.extend(rest),
        other => {
            map.insert("value".into(), other);
        }
    }
    Ok(Value::Object(map))
}

fn output_path(out: &Option<PathBuf>, default_name: &str) -> PathBuf {
    match out {
        Some(p) => p.clone(),
        None => match std::env::var_os(OUT_DIR_ENV) {
            Some(dir) => PathBuf::from(dir).join(default_name),
            None => PathBuf::from(default_name),
        },
    }
}

/// Returns whether the run converged (always true for commands without a
/// convergence verdict).
fn execute(cli: &Cli, argv: &[String]) -> Result<bool> {
    let parameters = serde_json::to_value(&cli.command)?;
    match &cli.command {
        Command::Construct(a) => construct(a, Session::new("construct", argv, parameters)),
        Command::Simulate(a) => simulate(a, Session::new("simulate", argv, parameters)),
        Command::De(a) => de(a, Session::new("de", argv, parameters)),
        Command::Window(a) => window(a, Session::new("window", argv, parameters)),
        Command::Threshold(a) => threshold_cmd(a, Session::new("threshold", argv, parameters)),
        Command::Export(a) => export(a, Session::new("export", argv, parameters)),
    }
}

fn construct(a: &ConstructArgs, mut s: Session) -> Result<bool> {
    let params = EnsembleParams::new(a.j, a.m, a.l)?;
    let code = terminate(&sample_ensemble(params, a.seed)?)?;
    s.seeds.push(a.seed);
    let out = output_path(&a.out, "code.alist");
    s.write(&out, export_alist(&code.graph).as_bytes())?;
    let summary = json!({
        "schema": CODE_SUMMARY_SCHEMA,
        "params": params,
        "seed": a.seed,
        "n": code.n(),
        "checks": code.n_checks(),
        "design_rate": params.design_rate(),
        "degree_profile": code.degree_profile(),
        "rates": if a.rank { Some(rates(&code)) } else { None },
        "girth": if a.girth { Some(code.girth()) } else { None },
    });
    let _ = writeln!(std::io::stdout(), "{}", serde_json::to_string_pretty(&summary)?);
    s.finish()?;
    Ok(true)
}

fn simulate(a: &SimulateArgs, mut s: Session) -> Result<bool> {
    let params = EnsembleParams::new(a.j, a.m, a.l)?;
    let family = match a.channel {
        ChannelArg::Bec => montecarlo::ChannelFamily::Bec,
        ChannelArg::Awgn => montecarlo::ChannelFamily::AwgnEbN0Db,
    };
    let mut cfg = MonteCarloConfig::new(params, family, a.param.clone(), a.trials);
    cfg.max_iters = a.max_iters;
    cfg.seed = a.seed;
    cfg.random_info = a.random_info;
    cfg.sampling = if a.per_frame_codes { CodeSampling::PerFrame } else { CodeSampling::Fixed };
    cfg.schedule = match a.schedule {
        ScheduleArg::Parallel => Schedule::Parallel,
        ScheduleArg::Window { width } => Schedule::OnDemandWindow { width, target_llr: a.target_llr },
    };
    s.seeds.push(a.seed);
    let table = montecarlo::monte_carlo(&cfg)?;
    let out = output_path(&a.out, "results.csv");
    s.write(&out, table.to_csv().as_bytes())?;
    s.finish()?;
    Ok(true)
}

fn channel_for(opts: &ChannelOpts, rate: f64) -> Result<ChannelModel> {
    let ch = match opts.channel {
        ChannelArg::Bec => match opts.epsilon {
            Some(epsilon) => ChannelModel::Bec { epsilon },
            None => return Err(Error::InvalidParams("--channel bec needs --epsilon".into())),
        },
        ChannelArg::Awgn => match (opts.ebn0_db, opts.sigma) {
            (Some(db), None) => ChannelModel::BiAwgn { sigma: sigma_from_ebn0_db(db, opts.rate.unwrap_or(rate)) },
            (None, Some(sigma)) => ChannelModel::BiAwgn { sigma },
            _ => return Err(Error::InvalidParams("--channel awgn needs --ebn0-db or --sigma".into())),
        },
    };
    ch.validate()?;
    Ok(ch)
}

/// Builds the engine for `channel` and runs `f` on it.
fn with_engine<R>(
    lay: Layout,
    channel: ChannelModel,
    grid: Grid,
    f: impl FnOnce(&mut dyn DeEngine) -> Result<R>,
) -> Result<R> {
    match channel {
        ChannelModel::Bec { epsilon } => f(&mut BecEngine::new(lay, epsilon)?),
        _ => f(&mut DensityEngine::new(lay, channel, grid)?),
    }
}

#[derive(Serialize)]
struct DeOutput<'a> {
    j: usize,
    l: Option<usize>,
    channel: ChannelModel,
    ebn0_db: Option<f64>,
    rate: f64,
    grid: Option<Grid>,
    config: &'a DeConfig,
    trace: &'a DeTrace,
}

fn de(a: &DeArgs, mut s: Session) -> Result<bool> {
    let (lay, rate) = match a.l {
        Some(l) => (Layout::terminated(a.j, l)?, design_rate(a.j, l)),
        None => (Layout::block(a.j)?, 0.5),
    };
    let channel = channel_for(&a.channel, rate)?;
    let grid = match channel {
        ChannelModel::Bec { .. } => None,
        _ => Some(a.grid.grid()?),
    };
    s.grid = grid;
    let cfg = DeConfig {
        max_iters: a.max_updates,
        target_bmax: a.target_bmax,
        pb_stride: a.pb_stride,
        stagnation_tol: a.stagnation_tol,
        mirror: !a.no_mirror,
        ..DeConfig::default()
    };
    let trace = with_engine(lay, channel, grid.unwrap_or_default(), |e| run_de(e, &cfg))?;
    let ebn0_db = match channel {
        ChannelModel::BiAwgn { sigma } => Some(ebn0_db_from_sigma(sigma, a.channel.rate.unwrap_or(rate))),
        _ => None,
    };
    let body = DeOutput { j: a.j, l: a.l, channel, ebn0_db, rate, grid, config: &cfg, trace: &trace };
    let out = output_path(&a.out, "trace.json");
    s.write(&out, &to_json(&with_schema(DE_TRACE_SCHEMA, &body)?)?)?;
    s.finish()?;
    Ok(trace.verdict.is_certified())
}

#[derive(Serialize)]
struct WindowOutput<'a> {
    j: usize,
    l: usize,
    channel: ChannelModel,
    grid: Option<Grid>,
    config: &'a WindowConfig,
    plateau: crate::window::PlateauStats,
    report: &'a WindowReport,
}

fn window(a: &WindowArgs, mut s: Session) -> Result<bool> {
    let lay = Layout::terminated(a.j, a.l)?;
    let channel = channel_for(&a.channel, design_rate(a.j, a.l))?;
    let grid = match channel {
        ChannelModel::Bec { .. } => None,
        _ => Some(a.grid.grid()?),
    };
    s.grid = grid;
    let cfg = WindowConfig {
        width: a.w,
        b0: a.b0,
        per_position_budget: a.per_position_budget,
        max_total_sweeps: a.max_updates.unwrap_or(usize::MAX),
        stagnation_tol: a.stagnation_tol,
        sampled_levels: a.sample_levels.clone(),
    };
    let report = with_engine(lay, channel, grid.unwrap_or_default(), |e| run_windowed(e, &cfg))?;
    let body = WindowOutput {
        j: a.j,
        l: a.l,
        channel,
        grid,
        config: &cfg,
        plateau: profile_updates(&report),
        report: &report,
    };
    let out = output_path(&a.out, "report.json");
    s.write(&out, &to_json(&with_schema(crate::window::WINDOW_REPORT_SCHEMA, &body)?)?)?;
    if let Some(path) = &a.traces_csv {
        s.write(path, report.traces_csv().as_bytes())?;
    }
    s.finish()?;
    Ok(report.completed())
}

#[derive(Serialize)]
struct ThresholdOutput<'a> {
    query: &'a ThresholdQuery,
    result: &'a threshold::ThresholdResult,
    rescaled: Option<Rescaled>,
}

#[derive(Serialize)]
struct Rescaled {
    rate: f64,
    ebn0_db: f64,
}

fn threshold_cmd(a: &ThresholdArgs, mut s: Session) -> Result<bool> {
    let l = match (a.l, a.target_rate) {
        (Some(l), _) => Some(l),
        (None, Some(r)) => Some(l_for_target_rate(a.j, r)?),
        (None, None) => None,
    };
    let family = match a.channel {
        ChannelArg::Bec => threshold::ChannelFamily::Bec,
        ChannelArg::Awgn => threshold::ChannelFamily::AwgnEbN0Db,
    };
    let mut q = ThresholdQuery::new(a.j, l, family);
    q.lo = a.lo.unwrap_or(q.lo);
    q.hi = a.hi.unwrap_or(q.hi);
    q.tol = a.tol.unwrap_or(q.tol);
    q.engine = match a.engine {
        ScheduleArg::Parallel => EngineChoice::Parallel,
        ScheduleArg::Window { width } => EngineChoice::Window { width },
    };
    q.certificate = match a.certificate {
        CertificateArg::Breakout => Certificate::Breakout,
        CertificateArg::Practical => Certificate::Practical,
    };
    q.grid = a.grid.grid()?;
    q.de.max_iters = a.max_updates;
    q.de.stagnation_tol = a.stagnation_tol;
    q.de.mirror = true;
    q.window.b0 = a.b0;
    q.window.per_position_budget = a.per_position_budget;
    q.window.stagnation_tol = a.stagnation_tol;
    if family == threshold::ChannelFamily::AwgnEbN0Db {
        s.grid = Some(q.grid);
    }
    let r = bisect_threshold(&q)?;
    let rescaled = match (family, a.report_rate) {
        (threshold::ChannelFamily::AwgnEbN0Db, Some(rate)) => {
            Some(Rescaled { rate, ebn0_db: rescale_ebn0(r.threshold, r.rate, rate) })
        }
        _ => None,
    };
    let body = ThresholdOutput { query: &q, result: &r, rescaled };
    let out = output_path(&a.out, "result.json");
    s.write(&out, &to_json(&with_schema(threshold::THRESHOLD_SCHEMA, &body)?)?)?;
    s.finish()?;
    Ok(r.bad_endpoint_reverified != Some(false))
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    schema: String,
    n_vars: usize,
    checks: Vec<Vec<usize>>,
}

fn export(a: &ExportArgs, mut s: Session) -> Result<bool> {
    let text = fs::read_to_string(&a.input)?;
    let json: Option<Value> = serde_json::from_str(&text).ok();
    let schema = json.as_ref().and_then(|v| v.get("schema")).and_then(Value::as_str).unwrap_or("");
    let (bytes, default_name) = match (a.to, schema) {
        (ExportFormat::Alist | ExportFormat::Json, _) => {
            let graph = if schema == GRAPH_SCHEMA {
                let g: GraphJson = serde_json::from_str(&text)?;
                TannerGraph::from_checks(g.n_vars, g.checks)?
            } else if json.is_none() {
                import_alist(&text)?
            } else {
                return Err(Error::InvalidParams(format!("cannot read a Tanner graph from schema `{schema}`")));
            };
            if a.to == ExportFormat::Alist {
                (export_alist(&graph).into_bytes(), "code.alist")
            } else {
                let g =
                    GraphJson { schema: GRAPH_SCHEMA.into(), n_vars: graph.n_vars(), checks: graph.checks().to_vec() };
                (to_json(&g)?, "code.json")
            }
        }
        (ExportFormat::Csv, sch) if sch == crate::window::WINDOW_REPORT_SCHEMA => {
            let report: WindowReport =
                serde_json::from_value(json.as_ref().and_then(|v| v.get("report")).cloned().unwrap_or(Value::Null))?;
            (report.traces_csv().into_bytes(), "traces.csv")
        }
        (ExportFormat::Csv, DE_TRACE_SCHEMA) => {
            let trace = de_trace_of(json.as_ref())?;
            let mut out = format!("# schema: {DE_TRACE_SCHEMA}.bmax\niteration,bmax,t,k\n");
            for (i, (b, (t, k))) in trace.bmax.iter().zip(&trace.bmax_at).enumerate() {
                out.push_str(&format!("{},{},{t},{k}\n", i + 1, Csv(*b)));
            }
            (out.into_bytes(), "bmax.csv")
        }
        (ExportFormat::PbCsv, DE_TRACE_SCHEMA) => {
            let trace = de_trace_of(json.as_ref())?;
            let mut out = format!("# schema: {DE_TRACE_SCHEMA}.pb\niteration,t,pb\n");
            for snap in &trace.pb_snapshots {
                for (t, pb) in snap.pb.iter().enumerate() {
                    out.push_str(&format!("{},{},{}\n", snap.iteration, t + 1, Csv(*pb)));
                }
            }
            (out.into_bytes(), "pb.csv")
        }
        (ExportFormat::Csv, threshold::THRESHOLD_SCHEMA) => {
            let probes: Vec<threshold::Probe> = serde_json::from_value(
                json.as_ref().and_then(|v| v.pointer("/result/probes")).cloned().unwrap_or(Value::Null),
            )?;
            let mut out = format!("# schema: {}.probes\nparam,good,work\n", threshold::THRESHOLD_SCHEMA);
            for p in probes {
                out.push_str(&format!("{},{},{}\n", Csv(p.param), p.good, p.work));
            }
            (out.into_bytes(), "probes.csv")
        }
        (to, sch) => return Err(Error::InvalidParams(format!("no {to:?} export for input schema `{sch}`"))),
    };
    let out = output_path(&a.out, default_name);
    s.write(&out, &bytes)?;
    s.finish()?;
    Ok(true)
}

fn de_trace_of(json: Option<&Value>) -> Result<DeTrace> {
    Ok(serde_json::from_value(json.and_then(|v| v.get("trace")).cloned().unwrap_or(Value::Null))?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_syntax() {
        assert_eq!(parse_schedule("parallel"), Ok(ScheduleArg::Parallel));
        assert_eq!(parse_schedule("window:20"), Ok(ScheduleArg::Window { width: 20 }));
        assert!(parse_schedule("window:0").is_err());
        assert!(parse_schedule("serial").is_err());
    }

    #[test]
    fn config_lines() {
        let kv = parse_config("# defaults\nJ = 3\n  tol=1e-4  # comment\n\n").unwrap();
        assert_eq!(kv, vec![("J".into(), "3".into()), ("tol".into(), "1e-4".into())]);
        assert!(parse_config("just a word").is_err());
    }
}
