//! `bellkit` command-line front end.
//!
//! Angles are given in degrees on the command line and converted to
//! radians once, here. Exit codes: 0 success, 2 usage or validation error,
//! 1 runtime failure (I/O and the like).
//!
//! # Trial CSV
//!
//! ```text
//! # angles_deg: delta=<f>,delta_prime=<f>,gamma=<f>,gamma_prime=<f>
//! pair,outcome_d,outcome_g
//! dg,+1,-1
//! d'g',-1,-1
//! ```
//!
//! `pair` is one of `dg`, `dg'`, `d'g`, `d'g'`; outcomes are `+1` or `-1`.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::harness::{
    self, ChshAnalysis, ChshMapping, PairEstimate, SettingsPolicy, SettingsSchedule, TrialLog,
    TrialRecord, TrialSource, CHSH_LABELS,
};
use crate::inequalities::{self, ChshAngles, CorrelationSource, LhvMethod};
use crate::lhv;
use crate::qstate::{self, CorrelationSign, Outcome, StateKind};

/// Environment variable consulted for the default `--seed`.
pub const SEED_ENV: &str = "BELLKIT_SEED";

#[derive(Debug, Parser)]
#[command(name = "bellkit", version, about = "Bell inequality simulation and verification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a CHSH experiment and analyze it.
    ChshSim(ChshSimArgs),
    /// Scan Wigner's inequality for the spin singlet over theta2.
    WignerScan(WignerScanArgs),
    /// Print the 16 Peres quartets or the 8 Wigner sextets.
    Enumerate(EnumerateArgs),
    /// Analyze a trial CSV file.
    Analyze(AnalyzeArgs),
    /// Evaluate a hidden-variable model by Monte Carlo and quadrature.
    LhvSim(LhvSimArgs),
    /// Search the analyzer angles maximizing |S| for a quantum state.
    Maximize(MaximizeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolicyArg {
    Random,
    RoundRobin,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateArg {
    SpinAnticorrelated,
    SpinCorrelated,
    PhotonCorrelated,
    PhotonAnticorrelated,
}

impl From<StateArg> for StateKind {
    fn from(s: StateArg) -> Self {
        match s {
            StateArg::SpinAnticorrelated => StateKind::SpinAnticorrelated,
            StateArg::SpinCorrelated => StateKind::SpinCorrelated,
            StateArg::PhotonCorrelated => StateKind::PhotonCorrelated,
            StateArg::PhotonAnticorrelated => StateKind::PhotonAnticorrelated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SignArg {
    Anticorrelated,
    Correlated,
}

impl From<SignArg> for CorrelationSign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Anticorrelated => CorrelationSign::Anticorrelated,
            SignArg::Correlated => CorrelationSign::Correlated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct SeedArg {
    /// RNG seed (default from BELLKIT_SEED, else 0).
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
#[command(group = clap::ArgGroup::new("source").required(true).args(["state", "model"]))]
pub struct ChshSimArgs {
    #[arg(long, value_enum)]
    pub state: Option<StateArg>,
    /// Built-in hidden-variable model name.
    #[arg(long)]
    pub model: Option<String>,
    /// delta,delta',gamma,gamma' in degrees.
    #[arg(long, allow_hyphen_values = true, default_value = "0,-90,135,-135")]
    pub angles: String,
    #[arg(long)]
    pub trials: u64,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, value_enum, default_value = "random")]
    pub policy: PolicyArg,
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write the trial log as CSV.
    #[arg(long)]
    pub emit_trials: Option<PathBuf>,
    /// Write the JSON report.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct WignerScanArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub theta1: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 90.0)]
    pub theta3: f64,
    #[arg(long, default_value_t = 19)]
    pub steps: usize,
    /// Output CSV path (default: stdout).
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[arg(long, value_enum, default_value = "text")]
    pub format: FormatArg,
    /// Print the sextets instead of the quartets.
    #[arg(long)]
    pub sextets: bool,
    #[arg(long, value_enum, default_value = "anticorrelated")]
    pub sign: SignArg,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Trial CSV file.
    pub input: PathBuf,
    #[arg(long)]
    pub report: Option<PathBuf>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct LhvSimArgs {
    #[arg(long, default_value = "sign_model")]
    pub model: String,
    #[arg(long, allow_hyphen_values = true, default_value_t = 0.0)]
    pub delta: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 90.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 100_000)]
    pub samples: usize,
    #[command(flatten)]
    pub seed: SeedArg,
    #[arg(long, default_value_t = 4000)]
    pub nodes: usize,
    /// Also evaluate CHSH at delta,delta',gamma,gamma' (degrees).
    #[arg(long, allow_hyphen_values = true)]
    pub angles: Option<String>,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct MaximizeArgs {
    #[arg(long, value_enum, default_value = "spin-anticorrelated")]
    pub state: StateArg,
    /// Grid spacing in degrees, at most 15.
    #[arg(long, default_value_t = 15.0)]
    pub coarse_step: f64,
    #[arg(long, default_value_t = 200)]
    pub refine_iters: usize,
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or input data; exit code 2.
    Usage(String),
    /// Anything else; exit code 1.
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Runtime(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) => m,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<io::Error> for CliError {
    fn from(e: io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

/// JSON report of a CHSH analysis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChshReport {
    pub name: String,
    pub s_mean: f64,
    pub s_std_error: f64,
    pub per_pair: Vec<PairEstimate>,
    pub bound: f64,
    pub violated_2sigma: bool,
    pub violated_5sigma: bool,
    pub seed: Option<u64>,
    pub source: String,
}

impl ChshReport {
    pub fn new(analysis: ChshAnalysis, seed: Option<u64>, source: String) -> Self {
        ChshReport {
            name: "chsh".to_string(),
            s_mean: analysis.s_mean,
            s_std_error: analysis.s_std_error,
            per_pair: analysis.per_pair,
            bound: 2.0,
            violated_2sigma: analysis.violated_2sigma,
            violated_5sigma: analysis.violated_5sigma,
            seed,
            source,
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the
/// process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let rendered = e.render().to_string();
            if code == 0 {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    match dispatch(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write) -> CliResult<()> {
    // commands on a custom pool write to a buffer, since `out` is not Send
    let mut buf = Vec::new();
    match command {
        Command::ChshSim(a) => with_threads(a.threads, || cmd_chsh_sim(&a, &mut buf))?,
        Command::WignerScan(a) => cmd_wigner_scan(&a, &mut buf)?,
        Command::Enumerate(a) => cmd_enumerate(&a, &mut buf)?,
        Command::Analyze(a) => cmd_analyze(&a, &mut buf)?,
        Command::LhvSim(a) => with_threads(a.threads, || cmd_lhv_sim(&a, &mut buf))?,
        Command::Maximize(a) => cmd_maximize(&a, &mut buf)?,
    }
    Ok(out.write_all(&buf)?)
}

fn with_threads<T>(threads: Option<usize>, f: impl FnOnce() -> CliResult<T> + Send) -> CliResult<T>
where
    T: Send,
{
    match threads {
        None => f(),
        Some(0) => Err(CliError::Usage("threads must be >= 1".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Runtime(e.to_string()))?
            .install(f),
    }
}

/// Parses `delta,delta',gamma,gamma'` in degrees.
pub fn parse_angles_deg(s: &str) -> CliResult<[f64; 4]> {
    let values: Vec<f64> = s
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| CliError::Usage(format!("invalid angle list `{s}`")))?;
    let angles: [f64; 4] = values
        .try_into()
        .map_err(|_| CliError::Usage("expected four angles: delta,delta',gamma,gamma'".into()))?;
    check_finite(&angles)?;
    Ok(angles)
}

fn check_finite(angles: &[f64]) -> CliResult<()> {
    if angles.iter().all(|a| a.is_finite()) {
        Ok(())
    } else {
        Err(CliError::Usage("angles must be finite".into()))
    }
}

fn to_radians(deg: [f64; 4]) -> ChshAngles {
    ChshAngles::from_array(deg.map(f64::to_radians))
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn report_json(report: &impl Serialize) -> CliResult<String> {
    serde_json::to_string_pretty(report)
        .map(|s| s + "\n")
        .map_err(|e| CliError::Runtime(e.to_string()))
}

/// Renders a CHSH trial log in the trial CSV format.
pub fn trial_csv(log: &TrialLog, angles_deg: [f64; 4]) -> String {
    let mut s = String::with_capacity(16 * log.records.len() + 128);
    let [d, dp, g, gp] = angles_deg;
    let _ = writeln!(s, "# angles_deg: delta={d},delta_prime={dp},gamma={g},gamma_prime={gp}");
    s.push_str("pair,outcome_d,outcome_g\n");
    for r in &log.records {
        let _ = writeln!(s, "{},{},{}", CHSH_LABELS[r.pair_index], r.outcome_d, r.outcome_g);
    }
    s
}

/// Contents of a trial CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialCsv {
    pub angles_deg: [f64; 4],
    pub records: Vec<TrialRecord>,
}

impl TrialCsv {
    pub fn into_log(self) -> TrialLog {
        TrialLog {
            pairs: to_radians(self.angles_deg).pairs().to_vec(),
            records: self.records,
            seed: 0,
            source_description: "trial csv".into(),
        }
    }
}

fn parse_outcome(field: &str, line: usize) -> CliResult<Outcome> {
    match field.trim() {
        "+1" | "1" => Ok(Outcome::Plus),
        "-1" => Ok(Outcome::Minus),
        _ => Err(CliError::Usage(format!("line {line}: outcome must be +1 or -1"))),
    }
}

/// Parses the trial CSV format; errors cite 1-based line numbers.
pub fn parse_trial_csv(text: &str) -> CliResult<TrialCsv> {
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim_end_matches('\r')));
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::Usage("line 1: missing angle header".into()))?;
    let fields_text = header
        .strip_prefix("# angles_deg:")
        .ok_or_else(|| CliError::Usage("line 1: expected `# angles_deg: ...` header".into()))?;
    let keys = ["delta", "delta_prime", "gamma", "gamma_prime"];
    let mut angles_deg = [0.0; 4];
    let fields: Vec<&str> = fields_text.trim().split(',').collect();
    if fields.len() != 4 {
        return Err(CliError::Usage("line 1: expected four angles".into()));
    }
    for ((field, key), slot) in fields.iter().zip(keys).zip(&mut angles_deg) {
        let value = field
            .trim()
            .strip_prefix(key)
            .and_then(|v| v.strip_prefix('='))
            .and_then(|v| v.parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .ok_or_else(|| CliError::Usage(format!("line 1: invalid `{key}` entry `{field}`")))?;
        *slot = value;
    }
    match lines.next() {
        Some((_, "pair,outcome_d,outcome_g")) => {}
        _ => {
            return Err(CliError::Usage(
                "line 2: expected header `pair,outcome_d,outcome_g`".into(),
            ))
        }
    }
    let mut records = Vec::new();
    for (n, line) in lines {
        if line.is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 3 {
            return Err(CliError::Usage(format!("line {n}: expected 3 fields, got {}", cols.len())));
        }
        let pair_index = CHSH_LABELS
            .iter()
            .position(|l| *l == cols[0].trim())
            .ok_or_else(|| CliError::Usage(format!("line {n}: unknown pair `{}`", cols[0])))?;
        records.push(TrialRecord {
            pair_index,
            outcome_d: parse_outcome(cols[1], n)?,
            outcome_g: parse_outcome(cols[2], n)?,
        });
    }
    Ok(TrialCsv { angles_deg, records })
}

fn emit_chsh(report: &ChshReport, path: Option<&Path>, json: bool, out: &mut dyn Write) -> CliResult<()> {
    let rendered = report_json(report)?;
    if let Some(p) = path {
        write_file(p, &rendered)?;
    }
    if json {
        out.write_all(rendered.as_bytes())?;
    } else {
        writeln!(out, "CHSH analysis ({})", report.source)?;
        for p in &report.per_pair {
            writeln!(
                out,
                "  E({:<4}) = {:+.6} ± {:.6}  (n = {})",
                p.pair, p.correlation, p.std_error, p.n
            )?;
        }
        writeln!(out, "  S = {:+.6} ± {:.6}  (bound {})", report.s_mean, report.s_std_error, report.bound)?;
        writeln!(
            out,
            "  violated: 2σ = {}, 5σ = {}",
            report.violated_2sigma, report.violated_5sigma
        )?;
    }
    Ok(())
}

pub fn cmd_chsh_sim(a: &ChshSimArgs, out: &mut dyn Write) -> CliResult<()> {
    if a.trials < 1 {
        return Err(CliError::Usage("trials must be ≥ 1".into()));
    }
    let angles_deg = parse_angles_deg(&a.angles)?;
    let source = match (&a.state, &a.model) {
        (Some(s), _) => TrialSource::Quantum(qstate::make_state((*s).into())),
        (None, Some(m)) => TrialSource::Lhv(lhv::model_by_name(m)?),
        (None, None) => return Err(CliError::Usage("one of --state or --model is required".into())),
    };
    let policy = match a.policy {
        PolicyArg::Random => SettingsPolicy::UniformRandom,
        PolicyArg::RoundRobin => SettingsPolicy::RoundRobin,
    };
    let schedule = SettingsSchedule::chsh(to_radians(angles_deg), policy)?;
    let n = usize::try_from(a.trials).map_err(|_| CliError::Usage("too many trials".into()))?;
    let log = harness::run_trials(&source, &schedule, n, a.seed.seed)?;
    if let Some(path) = &a.emit_trials {
        write_file(path, &trial_csv(&log, angles_deg))?;
    }
    let analysis = harness::analyze_chsh(&harness::tabulate(&log), ChshMapping::default())?;
    let report = ChshReport::new(analysis, Some(a.seed.seed), source.describe());
    emit_chsh(&report, a.report.as_deref(), a.json, out)
}

/// Analysis of a parsed trial CSV, identical to the in-process path.
pub fn analyze_trial_csv(csv: TrialCsv) -> CliResult<ChshAnalysis> {
    let log = csv.into_log();
    Ok(harness::analyze_chsh(&harness::tabulate(&log), ChshMapping::default())?)
}

pub fn cmd_analyze(a: &AnalyzeArgs, out: &mut dyn Write) -> CliResult<()> {
    let text = fs::read_to_string(&a.input)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", a.input.display())))?;
    let analysis = analyze_trial_csv(parse_trial_csv(&text)?)?;
    let report = ChshReport::new(analysis, None, format!("trial csv {}", a.input.display()));
    emit_chsh(&report, a.report.as_deref(), a.json, out)
}

/// Scan CSV with header `theta2_deg,lhs,rhs,margin`.
pub fn wigner_scan_csv(theta1_deg: f64, theta3_deg: f64, steps: usize) -> CliResult<String> {
    check_finite(&[theta1_deg, theta3_deg])?;
    let points = harness::wigner_scan(theta1_deg.to_radians(), theta3_deg.to_radians(), steps)?;
    let mut s = String::from("theta2_deg,lhs,rhs,margin\n");
    for (i, p) in points.iter().enumerate() {
        let theta2_deg = theta1_deg + (theta3_deg - theta1_deg) * i as f64 / (steps - 1) as f64;
        let _ = writeln!(s, "{theta2_deg},{},{},{}", p.lhs, p.rhs, p.margin);
    }
    Ok(s)
}

pub fn cmd_wigner_scan(a: &WignerScanArgs, out: &mut dyn Write) -> CliResult<()> {
    let csv = wigner_scan_csv(a.theta1, a.theta3, a.steps)?;
    match &a.output {
        Some(p) => write_file(p, &csv),
        None => Ok(out.write_all(csv.as_bytes())?),
    }
}

fn join_outcomes(o: &[Outcome]) -> String {
    o.iter().map(Outcome::to_string).collect::<Vec<_>>().join(",")
}

pub fn render_quartets(format: FormatArg) -> CliResult<String> {
    let quartets = inequalities::enumerate_quartets();
    let mut s = String::new();
    match format {
        FormatArg::Json => s = report_json(&quartets)?,
        FormatArg::Csv => {
            s.push_str("column,d_delta,g_gamma,d_delta_prime,g_gamma_prime,S\n");
            for (i, q) in quartets.iter().enumerate() {
                let _ = writeln!(s, "{},{},{:+}", i + 1, join_outcomes(&q.outcomes()), q.s_value);
            }
        }
        FormatArg::Text => {
            let row = |s: &mut String, label: &str, values: Vec<String>| {
                let _ = writeln!(s, "{label:<15}{}", values.join(","));
            };
            row(&mut s, "column", (1..=16).map(|i| i.to_string()).collect());
            let labels = ["d_delta", "g_gamma", "d_delta'", "g_gamma'"];
            for (k, label) in labels.iter().enumerate() {
                row(&mut s, label, quartets.iter().map(|q| q.outcomes()[k].to_string()).collect());
            }
            row(&mut s, "S", quartets.iter().map(|q| format!("{:+}", q.s_value)).collect());
        }
    }
    Ok(s)
}

pub fn render_sextets(format: FormatArg, sign: CorrelationSign) -> CliResult<String> {
    let sextets = inequalities::enumerate_sextets(sign);
    let mut s = String::new();
    match format {
        FormatArg::Json => s = report_json(&sextets)?,
        FormatArg::Csv => {
            s.push_str("d_theta1,d_theta2,d_theta3,g_theta1,g_theta2,g_theta3\n");
            for x in &sextets {
                let _ = writeln!(s, "{},{}", join_outcomes(&x.d), join_outcomes(&x.g));
            }
        }
        FormatArg::Text => {
            for x in &sextets {
                let _ = writeln!(s, "({}; {})", join_outcomes(&x.d), join_outcomes(&x.g));
            }
        }
    }
    Ok(s)
}

pub fn cmd_enumerate(a: &EnumerateArgs, out: &mut dyn Write) -> CliResult<()> {
    let rendered = if a.sextets {
        render_sextets(a.format, a.sign.into())?
    } else {
        render_quartets(a.format)?
    };
    Ok(out.write_all(rendered.as_bytes())?)
}

#[derive(Debug, Serialize)]
struct LhvSimReport {
    model: String,
    delta_deg: f64,
    gamma_deg: f64,
    monte_carlo: lhv::CorrelationEstimate,
    quadrature: Option<f64>,
    seed: u64,
    chsh: Vec<inequalities::InequalityReport>,
}

pub fn cmd_lhv_sim(a: &LhvSimArgs, out: &mut dyn Write) -> CliResult<()> {
    check_finite(&[a.delta, a.gamma])?;
    let model = lhv::model_by_name(&a.model)?;
    let (delta, gamma) = (a.delta.to_radians(), a.gamma.to_radians());
    let mc = lhv::estimate_correlation(&model, delta, gamma, a.samples, a.seed.seed)?;
    let quadrature = match lhv::quadrature_correlation(&model, delta, gamma, a.nodes) {
        Ok(q) => Some(q),
        Err(Error::UnboundedSupport(_)) => None,
        Err(e) => return Err(e.into()),
    };
    let mut chsh = Vec::new();
    if let Some(list) = &a.angles {
        let angles = to_radians(parse_angles_deg(list)?);
        let source = CorrelationSource::Lhv {
            model: model.clone(),
            method: LhvMethod::Quadrature { nodes: a.nodes },
        };
        chsh.push(inequalities::chsh_d4(&source, angles)?);
        chsh.push(inequalities::chsh_d3(&source, angles)?);
    }
    let report = LhvSimReport {
        model: model.name().to_string(),
        delta_deg: a.delta,
        gamma_deg: a.gamma,
        monte_carlo: mc,
        quadrature,
        seed: a.seed.seed,
        chsh,
    };
    if a.json {
        out.write_all(report_json(&report)?.as_bytes())?;
        return Ok(());
    }
    writeln!(out, "model {}: {}", model.name(), model.description())?;
    writeln!(
        out,
        "  E({}°, {}°) monte carlo = {:+.6} ± {:.6}  (n = {})",
        a.delta, a.gamma, mc.mean, mc.std_error, mc.n_samples
    )?;
    match quadrature {
        Some(q) => writeln!(out, "  E({}°, {}°) quadrature  = {:+.6}", a.delta, a.gamma, q)?,
        None => writeln!(out, "  quadrature unavailable (unbounded support)")?,
    }
    for r in &report.chsh {
        writeln!(out, "  {r}")?;
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct MaximizeReport {
    state: StateKind,
    angles_deg: [f64; 4],
    s_star: f64,
}

pub fn cmd_maximize(a: &MaximizeArgs, out: &mut dyn Write) -> CliResult<()> {
    let kind: StateKind = a.state.into();
    let opt = harness::maximize_chsh(kind, a.coarse_step, a.refine_iters)?;
    let angles_deg = opt.angles.to_array().map(f64::to_degrees);
    if a.json {
        let report = MaximizeReport {
            state: kind,
            angles_deg,
            s_star: opt.s_star,
        };
        out.write_all(report_json(&report)?.as_bytes())?;
    } else {
        writeln!(out, "state {kind}")?;
        writeln!(
            out,
            "  delta = {:.6}°, delta' = {:.6}°, gamma = {:.6}°, gamma' = {:.6}°",
            angles_deg[0], angles_deg[1], angles_deg[2], angles_deg[3]
        )?;
        writeln!(out, "  |S|* = {:.9}", opt.s_star)?;
    }
    Ok(())
}
