//! Command-line front end.
//!
//! Settings come from built-in defaults, then an optional `key=value` config
//! file, then `key=value` arguments, then `--key value` flags. Every command
//! writes its CSV output and a `manifest.txt` holding the effective settings
//! into the output directory; feeding the manifest back with `--config`
//! reproduces the CSV byte for byte.
//!
//! Exit status: 0 on success, 2 on usage errors, 3 on config or parameter
//! errors (4 if output cannot be written).

use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use crate::asymptotic::{linear_grid, sweep_curve};
use crate::error::{Error, Result};
use crate::experiments::{
    beacon_experiment, genie_monte_carlo, monte_carlo, sensitivity_alpha, sweep_optimize, AggregateStats,
    SensitivityPlan, SensitivityResult,
};
use crate::report::fmt_sig;
use crate::simulator::RunConfig;
use crate::termination::{CheckPoint, TerminationPolicy, DEFAULT_HORIZON_FACTOR};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;
pub const EXIT_IO: i32 = 4;

/// A grid of values: `lo:step:hi` or a comma-separated list.
#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    Range { lo: f64, step: f64, hi: f64 },
    List(Vec<f64>),
}

impl Grid {
    pub fn values(&self) -> Vec<f64> {
        match self {
            Grid::Range { lo, step, hi } => linear_grid(*lo, *hi, *step)
                .into_iter()
                .map(|x| (x * 1e9).round() / 1e9)
                .collect(),
            Grid::List(v) => v.clone(),
        }
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [lo, step, hi] = parts[..] else {
                return Err(format!("range `{s}` must be lo:step:hi"));
            };
            let (lo, step, hi) = (num(lo)?, num(step)?, num(hi)?);
            if !(step > 0.0) || hi < lo {
                return Err(format!("range `{s}` must have step > 0 and hi >= lo"));
            }
            Ok(Grid::Range { lo, step, hi })
        } else {
            let v = s.split(',').map(num).collect::<std::result::Result<Vec<_>, _>>()?;
            Ok(Grid::List(v))
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::Range { lo, step, hi } => write!(f, "{lo}:{step}:{hi}"),
            Grid::List(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", parts.join(","))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolicyKind {
    Dual,
    Fraction,
    Genie,
    Fixed,
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "dual" => Ok(PolicyKind::Dual),
            "fraction" => Ok(PolicyKind::Fraction),
            "genie" => Ok(PolicyKind::Genie),
            "fixed" => Ok(PolicyKind::Fixed),
            _ => Err(format!("unknown policy `{s}` (expected dual, fraction, genie or fixed)")),
        }
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PolicyKind::Dual => "dual",
            PolicyKind::Fraction => "fraction",
            PolicyKind::Genie => "genie",
            PolicyKind::Fixed => "fixed",
        })
    }
}

fn parse_checkpoint(s: &str) -> std::result::Result<CheckPoint, String> {
    match s {
        "slot" => Ok(CheckPoint::PerSlot),
        "cycle" => Ok(CheckPoint::PerCycle),
        _ => Err(format!("unknown checkpoint `{s}` (expected slot or cycle)")),
    }
}

fn checkpoint_name(c: CheckPoint) -> &'static str {
    match c {
        CheckPoint::PerSlot => "slot",
        CheckPoint::PerCycle => "cycle",
    }
}

/// Effective settings of one invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub n_users: u32,
    pub target_degree: f64,
    pub policy: PolicyKind,
    pub threshold_s: f64,
    pub threshold_v: f64,
    pub erasure_prob: f64,
    pub alpha: f64,
    pub beacon_len: u32,
    pub horizon_factor: f64,
    pub runs: usize,
    pub seed: u64,
    pub checkpoint: CheckPoint,
    pub fixed_length: u64,
    pub g_grid: Option<Grid>,
    pub s_grid: Option<Grid>,
    pub v_grid: Option<Grid>,
    pub ratio_grid: Grid,
    pub loss_budget: f64,
    pub alpha_step: f64,
    pub alpha_max: f64,
}

impl Default for Settings {
    fn default() -> Self {
        Settings {
            n_users: 100,
            target_degree: 2.83,
            policy: PolicyKind::Dual,
            threshold_s: 1.0,
            threshold_v: 0.87,
            erasure_prob: 0.0,
            alpha: 0.0,
            beacon_len: 1,
            horizon_factor: DEFAULT_HORIZON_FACTOR,
            runs: 1000,
            seed: 0,
            checkpoint: CheckPoint::PerSlot,
            fixed_length: 100,
            g_grid: None,
            s_grid: None,
            v_grid: None,
            ratio_grid: Grid::Range {
                lo: 0.5,
                step: 0.005,
                hi: 1.5,
            },
            loss_budget: 0.05,
            alpha_step: 0.01,
            alpha_max: 0.3,
        }
    }
}

/// Every accepted key, in manifest order.
pub const KEYS: &[&str] = &[
    "n_users",
    "target_degree",
    "policy",
    "threshold_s",
    "threshold_v",
    "erasure_prob",
    "alpha",
    "beacon_len",
    "horizon_factor",
    "runs",
    "seed",
    "checkpoint",
    "fixed_length",
    "g_grid",
    "s_grid",
    "v_grid",
    "ratio_grid",
    "loss_budget",
    "alpha_step",
    "alpha_max",
];

fn parse_value<T: FromStr>(key: &str, value: &str, line: usize) -> Result<T>
where
    T::Err: fmt::Display,
{
    value.trim().parse::<T>().map_err(|e| Error::Config {
        line,
        message: format!("bad value for `{key}`: {e}"),
    })
}

impl Settings {
    /// Sets `key` from its textual `value`; `line` locates the source for diagnostics.
    pub fn set(&mut self, key: &str, value: &str, line: usize) -> Result<()> {
        let v = value.trim();
        match key.trim() {
            "n_users" => self.n_users = parse_value(key, v, line)?,
            "target_degree" => self.target_degree = parse_value(key, v, line)?,
            "policy" => self.policy = parse_value(key, v, line)?,
            "threshold_s" => self.threshold_s = parse_value(key, v, line)?,
            "threshold_v" => self.threshold_v = parse_value(key, v, line)?,
            "erasure_prob" => self.erasure_prob = parse_value(key, v, line)?,
            "alpha" => self.alpha = parse_value(key, v, line)?,
            "beacon_len" => self.beacon_len = parse_value(key, v, line)?,
            "horizon_factor" => self.horizon_factor = parse_value(key, v, line)?,
            "runs" => self.runs = parse_value(key, v, line)?,
            "seed" => self.seed = parse_value(key, v, line)?,
            "checkpoint" => {
                self.checkpoint = parse_checkpoint(v).map_err(|message| Error::Config { line, message })?
            }
            "fixed_length" => self.fixed_length = parse_value(key, v, line)?,
            "g_grid" => self.g_grid = Some(parse_value(key, v, line)?),
            "s_grid" => self.s_grid = Some(parse_value(key, v, line)?),
            "v_grid" => self.v_grid = Some(parse_value(key, v, line)?),
            "ratio_grid" => self.ratio_grid = parse_value(key, v, line)?,
            "loss_budget" => self.loss_budget = parse_value(key, v, line)?,
            "alpha_step" => self.alpha_step = parse_value(key, v, line)?,
            "alpha_max" => self.alpha_max = parse_value(key, v, line)?,
            other => {
                return Err(Error::Config {
                    line,
                    message: format!("unknown key `{other}`"),
                })
            }
        }
        Ok(())
    }

    /// Applies a `key=value` config text. Blank lines and `#` comments are skipped.
    pub fn apply_config(&mut self, text: &str) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Config {
                    line: i + 1,
                    message: format!("expected key=value, found `{line}`"),
                });
            };
            self.set(key, value, i + 1)?;
        }
        Ok(())
    }

    fn value_of(&self, key: &str) -> Option<String> {
        Some(match key {
            "n_users" => self.n_users.to_string(),
            "target_degree" => self.target_degree.to_string(),
            "policy" => self.policy.to_string(),
            "threshold_s" => self.threshold_s.to_string(),
            "threshold_v" => self.threshold_v.to_string(),
            "erasure_prob" => self.erasure_prob.to_string(),
            "alpha" => self.alpha.to_string(),
            "beacon_len" => self.beacon_len.to_string(),
            "horizon_factor" => self.horizon_factor.to_string(),
            "runs" => self.runs.to_string(),
            "seed" => self.seed.to_string(),
            "checkpoint" => checkpoint_name(self.checkpoint).to_string(),
            "fixed_length" => self.fixed_length.to_string(),
            "g_grid" => self.g_grid.as_ref()?.to_string(),
            "s_grid" => self.s_grid.as_ref()?.to_string(),
            "v_grid" => self.v_grid.as_ref()?.to_string(),
            "ratio_grid" => self.ratio_grid.to_string(),
            "loss_budget" => self.loss_budget.to_string(),
            "alpha_step" => self.alpha_step.to_string(),
            "alpha_max" => self.alpha_max.to_string(),
            _ => return None,
        })
    }

    /// The settings as config text, one `key=value` per line.
    pub fn to_config(&self) -> String {
        let mut out = String::new();
        for key in KEYS {
            if let Some(v) = self.value_of(key) {
                out.push_str(key);
                out.push('=');
                out.push_str(&v);
                out.push('\n');
            }
        }
        out
    }

    pub fn policy(&self) -> Result<TerminationPolicy> {
        match self.policy {
            PolicyKind::Dual => TerminationPolicy::dual(self.threshold_s, self.threshold_v),
            PolicyKind::Fraction => TerminationPolicy::fraction_only(self.threshold_v),
            PolicyKind::Genie => Ok(TerminationPolicy::GenieAided {
                horizon_factor: self.horizon_factor,
            }),
            PolicyKind::Fixed => Ok(TerminationPolicy::FixedLength {
                slots: self.fixed_length,
            }),
        }
    }

    pub fn run_config(&self) -> Result<RunConfig> {
        let cfg = RunConfig {
            n_users: self.n_users,
            target_degree: self.target_degree,
            policy: self.policy()?,
            erasure_prob: self.erasure_prob,
            alpha: self.alpha,
            beacon_len: self.beacon_len,
            horizon_factor: self.horizon_factor,
            checkpoint: self.checkpoint,
            record_trajectory: false,
            seed: self.seed,
        };
        cfg.validate()?;
        if self.runs == 0 {
            return Err(Error::param("runs", "must be at least 1"));
        }
        Ok(cfg)
    }

    fn grid_or(&self, grid: &Option<Grid>, fallback: f64) -> Vec<f64> {
        grid.as_ref().map_or_else(|| vec![fallback], Grid::values)
    }

    pub fn g_values(&self) -> Vec<f64> {
        self.grid_or(&self.g_grid, self.target_degree)
    }

    pub fn s_values(&self) -> Vec<f64> {
        self.grid_or(&self.s_grid, self.threshold_s)
    }

    pub fn v_values(&self) -> Vec<f64> {
        self.grid_or(&self.v_grid, self.threshold_v)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "frameless",
    about = "Frameless ALOHA simulator and analysis toolkit",
    arg_required_else_help = true
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Simulate,
    Sweep,
    Asymptotic,
    Sensitivity,
    Beacon,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo runs of one configuration (table1.csv)
    Simulate(CommonArgs),
    /// Grid search over G, S and V with the dual-threshold policy (table1.csv)
    Sweep(CommonArgs),
    /// And-or tree curve for one target degree (fig3.csv)
    Asymptotic(CommonArgs),
    /// Tolerable estimation error of N (fig5.csv, table2.csv)
    Sensitivity(CommonArgs),
    /// Fraction-only policy with a multi-slot beacon (table3.csv)
    Beacon(CommonArgs),
}

impl Command {
    fn split(self) -> (CommandKind, CommonArgs) {
        match self {
            Command::Simulate(a) => (CommandKind::Simulate, a),
            Command::Sweep(a) => (CommandKind::Sweep, a),
            Command::Asymptotic(a) => (CommandKind::Asymptotic, a),
            Command::Sensitivity(a) => (CommandKind::Sensitivity, a),
            Command::Beacon(a) => (CommandKind::Beacon, a),
        }
    }
}

impl fmt::Display for CommandKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CommandKind::Simulate => "simulate",
            CommandKind::Sweep => "sweep",
            CommandKind::Asymptotic => "asymptotic",
            CommandKind::Sensitivity => "sensitivity",
            CommandKind::Beacon => "beacon",
        })
    }
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// key=value config file
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory for CSV output and the run manifest
    #[arg(long = "out", default_value = ".")]
    pub output_dir: PathBuf,
    /// Maximum number of parallel work items
    #[arg(long)]
    pub jobs: Option<usize>,
    /// key=value overrides
    #[arg(value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[command(flatten)]
    pub flags: KeyFlags,
}

/// `--key value` forms of the config keys.
#[derive(Debug, Clone, Default, Args)]
pub struct KeyFlags {
    #[arg(long = "n_users", hide = true)]
    n_users: Option<String>,
    #[arg(long = "target_degree", hide = true)]
    target_degree: Option<String>,
    #[arg(long = "policy", hide = true)]
    policy: Option<String>,
    #[arg(long = "threshold_s", hide = true)]
    threshold_s: Option<String>,
    #[arg(long = "threshold_v", hide = true)]
    threshold_v: Option<String>,
    #[arg(long = "erasure_prob", hide = true)]
    erasure_prob: Option<String>,
    #[arg(long = "alpha", hide = true, allow_hyphen_values = true)]
    alpha: Option<String>,
    #[arg(long = "beacon_len", hide = true)]
    beacon_len: Option<String>,
    #[arg(long = "horizon_factor", hide = true)]
    horizon_factor: Option<String>,
    #[arg(long = "runs", hide = true)]
    runs: Option<String>,
    #[arg(long = "seed", hide = true)]
    seed: Option<String>,
    #[arg(long = "checkpoint", hide = true)]
    checkpoint: Option<String>,
    #[arg(long = "fixed_length", hide = true)]
    fixed_length: Option<String>,
    #[arg(long = "g_grid", hide = true)]
    g_grid: Option<String>,
    #[arg(long = "s_grid", hide = true)]
    s_grid: Option<String>,
    #[arg(long = "v_grid", hide = true)]
    v_grid: Option<String>,
    #[arg(long = "ratio_grid", hide = true)]
    ratio_grid: Option<String>,
    #[arg(long = "loss_budget", hide = true)]
    loss_budget: Option<String>,
    #[arg(long = "alpha_step", hide = true)]
    alpha_step: Option<String>,
    #[arg(long = "alpha_max", hide = true)]
    alpha_max: Option<String>,
}

impl KeyFlags {
    fn pairs(&self) -> Vec<(&'static str, &str)> {
        let all: [(&'static str, &Option<String>); 20] = [
            ("n_users", &self.n_users),
            ("target_degree", &self.target_degree),
            ("policy", &self.policy),
            ("threshold_s", &self.threshold_s),
            ("threshold_v", &self.threshold_v),
            ("erasure_prob", &self.erasure_prob),
            ("alpha", &self.alpha),
            ("beacon_len", &self.beacon_len),
            ("horizon_factor", &self.horizon_factor),
            ("runs", &self.runs),
            ("seed", &self.seed),
            ("checkpoint", &self.checkpoint),
            ("fixed_length", &self.fixed_length),
            ("g_grid", &self.g_grid),
            ("s_grid", &self.s_grid),
            ("v_grid", &self.v_grid),
            ("ratio_grid", &self.ratio_grid),
            ("loss_budget", &self.loss_budget),
            ("alpha_step", &self.alpha_step),
            ("alpha_max", &self.alpha_max),
        ];
        all.into_iter()
            .filter_map(|(k, v)| v.as_deref().map(|v| (k, v)))
            .collect()
    }
}

/// Resolves the effective settings: defaults, config file, `key=value`
/// arguments, then flags.
pub fn resolve_settings(args: &CommonArgs) -> Result<Settings> {
    let mut s = Settings::default();
    if let Some(path) = &args.config {
        let text = fs::read_to_string(path)?;
        s.apply_config(&text)?;
    }
    for kv in &args.overrides {
        let Some((k, v)) = kv.split_once('=') else {
            return Err(Error::Config {
                line: 0,
                message: format!("override `{kv}` is not key=value"),
            });
        };
        s.set(k, v, 0)?;
    }
    for (k, v) in args.flags.pairs() {
        s.set(k, v, 0)?;
    }
    Ok(s)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<fs::File>> {
    Ok(BufWriter::new(fs::File::create(dir.join(name))?))
}

/// Executes one command with resolved settings, writing into `out_dir`.
/// Returns the names of the files written.
pub fn execute(command: CommandKind, settings: &Settings, out_dir: &Path) -> Result<Vec<&'static str>> {
    fs::create_dir_all(out_dir)?;
    let mut written = Vec::new();
    match command {
        CommandKind::Simulate => {
            let cfg = settings.run_config()?;
            let stats = if cfg.policy.is_genie() {
                genie_monte_carlo(&cfg, settings.runs)?
            } else {
                monte_carlo(&cfg, settings.runs)?
            };
            let mut f = create(out_dir, "table1.csv")?;
            writeln!(
                f,
                "n_users,target_degree,policy,threshold_s,threshold_v,erasure_prob,alpha,beacon_len,{},pooled_throughput",
                AggregateStats::CSV_HEADER
            )?;
            writeln!(
                f,
                "{},{},{},{},{},{},{},{},{},{}",
                settings.n_users,
                fmt_sig(settings.target_degree),
                settings.policy,
                fmt_sig(settings.threshold_s),
                fmt_sig(settings.threshold_v),
                fmt_sig(settings.erasure_prob),
                fmt_sig(settings.alpha),
                settings.beacon_len,
                stats.csv_fields(),
                fmt_sig(stats.pooled_throughput())
            )?;
            f.flush()?;
            println!(
                "N={} G={} T={:.4} F_R={:.4} M/N={:.4} R={:.4} ({} runs)",
                settings.n_users,
                settings.target_degree,
                stats.mean_throughput,
                stats.mean_fraction,
                stats.mean_slots_norm,
                stats.mean_replicas,
                stats.run_count
            );
            written.push("table1.csv");
        }
        CommandKind::Sweep => {
            let base = settings.run_config()?;
            let sweep = sweep_optimize(
                &base,
                &settings.g_values(),
                &settings.s_values(),
                &settings.v_values(),
                settings.runs,
            )?;
            let mut f = create(out_dir, "table1.csv")?;
            sweep.write_csv(&mut f)?;
            f.flush()?;
            let b = sweep.best();
            println!(
                "best: G={} S={} V={} T={:.4}",
                b.target_degree,
                b.threshold_s.unwrap_or(1.0),
                b.threshold_v.unwrap_or(1.0),
                b.stats.mean_throughput
            );
            written.push("table1.csv");
        }
        CommandKind::Asymptotic => {
            let curve = sweep_curve(settings.target_degree, &settings.ratio_grid.values())?;
            let mut f = create(out_dir, "fig3.csv")?;
            curve.write_csv(&mut f)?;
            f.flush()?;
            let best = curve.max_throughput();
            println!("max T={:.4} at M/N={}", best.throughput, best.ratio);
            if let Some((lo, hi)) = curve.avalanche() {
                println!(
                    "avalanche between M/N={} and {}: P_R {:.3} -> {:.3}",
                    lo.ratio, hi.ratio, lo.p_resolve, hi.p_resolve
                );
            }
            if !curve.unconverged.is_empty() {
                eprintln!("warning: {} grid points did not converge", curve.unconverged.len());
            }
            written.push("fig3.csv");
        }
        CommandKind::Sensitivity => {
            let base = settings.run_config()?;
            let plan = SensitivityPlan {
                loss_budget: settings.loss_budget,
                g_grid: settings.g_values(),
                v_grid: settings.v_values(),
                alpha_step: settings.alpha_step,
                alpha_max: settings.alpha_max,
                runs: settings.runs,
                baseline: None,
            };
            let r = sensitivity_alpha(&base, &plan)?;
            let mut f = create(out_dir, "fig5.csv")?;
            writeln!(f, "{}", SensitivityResult::CSV_HEADER)?;
            writeln!(f, "{}", r.csv_row())?;
            f.flush()?;
            let mut f = create(out_dir, "table2.csv")?;
            writeln!(f, "n_users,g_at_ub,v_at_ub,throughput_at_zero")?;
            writeln!(
                f,
                "{},{},{},{}",
                r.n_users,
                fmt_sig(r.g_at_ub),
                fmt_sig(r.v_at_ub),
                fmt_sig(r.throughput_at_zero)
            )?;
            f.flush()?;
            println!(
                "alpha_UB={} at G={} V={} (T at alpha=0: {:.4}, baseline {:.4})",
                r.alpha_ub, r.g_at_ub, r.v_at_ub, r.throughput_at_zero, r.baseline
            );
            written.extend(["fig5.csv", "table2.csv"]);
        }
        CommandKind::Beacon => {
            let base = settings.run_config()?;
            let sweep = beacon_experiment(
                &base,
                settings.beacon_len,
                &settings.g_values(),
                &settings.v_values(),
                settings.runs,
            )?;
            let mut f = create(out_dir, "table3.csv")?;
            sweep.write_csv(&mut f)?;
            f.flush()?;
            let b = sweep.best();
            println!(
                "L={} best: G={} V={} T={:.4}",
                settings.beacon_len,
                b.target_degree,
                b.threshold_v.unwrap_or(1.0),
                b.stats.mean_throughput
            );
            written.push("table3.csv");
        }
    }
    let mut m = create(out_dir, "manifest.txt")?;
    writeln!(m, "# command: {command}")?;
    m.write_all(settings.to_config().as_bytes())?;
    m.flush()?;
    written.push("manifest.txt");
    Ok(written)
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config { .. } | Error::Parameter { .. } | Error::Structural(_) => EXIT_CONFIG,
        Error::Io(_) => EXIT_IO,
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let (kind, common) = cli.command.split();
    let settings = match resolve_settings(&common) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let run = || execute(kind, &settings, &common.output_dir);
    let result = match common.jobs {
        Some(0) => {
            eprintln!("error: --jobs must be at least 1");
            return EXIT_USAGE;
        }
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(run),
            Err(e) => {
                eprintln!("error: cannot start worker pool: {e}");
                return EXIT_IO;
            }
        },
        None => run(),
    };
    match result {
        Ok(_) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
