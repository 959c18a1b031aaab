//! Flag and config-file parsing into a resolved [`CliConfig`].

use std::f64::consts::PI;
use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use nonlocal_sim::geom::Direction;
use nonlocal_sim::protocol::ProtocolConfig;
use nonlocal_sim::quantum::StateParam;
use nonlocal_sim::resources::{Convention, Mode};
use nonlocal_sim::stats::Setting;

use crate::CliError;

pub const SEED_ENV: &str = "NONLOCAL_SIM_SEED";
pub const DEFAULT_SEED: u64 = 0;
pub const DEFAULT_TRIALS: u64 = 100_000;
pub const DEFAULT_GAMMA: f64 = PI / 8.0;
pub const DEFAULT_RANDOM_SETTINGS: usize = 20;
const NORM_WARN_TOL: f64 = 1e-6;

#[derive(Parser, Debug)]
#[command(
    name = "nonlocal-sim",
    version,
    about = "Simulate and verify the box-assisted protocol"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Run N trials at one setting and print the setting report.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        /// Alice's setting as "x,y,z".
        #[arg(long, allow_hyphen_values = true)]
        a: Option<String>,
        /// Bob's setting as "x,y,z".
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
    },
    /// Run the protocol over many settings and compare against the quantum pmf.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        settings: SettingsArgs,
        /// Also run with both conventions flipped and include the results.
        #[arg(long)]
        compare_conventions: bool,
    },
    /// Run the exact and analytic component checks.
    VerifyComponents {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Run the singlet baseline suite.
    Baseline {
        #[command(flatten)]
        common: CommonArgs,
        #[command(flatten)]
        settings: SettingsArgs,
    },
}

#[derive(Args, Debug)]
struct CommonArgs {
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Candidate count for --mode resample-n.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long, value_enum)]
    ab_convention: Option<ConventionArg>,
    #[arg(long, value_enum)]
    mbox_convention: Option<ConventionArg>,
    /// Trials per setting.
    #[arg(long)]
    trials: Option<u64>,
    /// Master seed (falls back to $NONLOCAL_SIM_SEED).
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// JSON file with defaults; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
#[group(multiple = false)]
struct SettingsArgs {
    /// JSON array of {"a": [x,y,z], "b": [x,y,z]}.
    #[arg(long)]
    settings: Option<PathBuf>,
    /// Draw K settings uniformly on S² × S².
    #[arg(long, value_name = "K")]
    random_settings: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ModeArg {
    Strict,
    Ideal,
    ResampleN,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum ConventionArg {
    Corrected,
    Literal,
}

impl From<ConventionArg> for Convention {
    fn from(c: ConventionArg) -> Self {
        match c {
            ConventionArg::Corrected => Convention::Corrected,
            ConventionArg::Literal => Convention::Literal,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// Contents of a `--config` file. Paths are relative to the working directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    gamma: Option<f64>,
    mode: Option<ModeArg>,
    n: Option<u32>,
    ab_convention: Option<ConventionArg>,
    mbox_convention: Option<ConventionArg>,
    trials: Option<u64>,
    seed: Option<u64>,
    out: Option<PathBuf>,
    format: Option<Format>,
    threads: Option<usize>,
    settings: Option<PathBuf>,
    random_settings: Option<usize>,
    compare_conventions: Option<bool>,
    a: Option<[f64; 3]>,
    b: Option<[f64; 3]>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Sweep,
    VerifyComponents,
    Baseline,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SettingsSource {
    File(PathBuf),
    Random(usize),
}

impl SettingsSource {
    pub fn describe(&self) -> String {
        match self {
            SettingsSource::File(p) => format!("file:{}", p.display()),
            SettingsSource::Random(k) => format!("random:{k}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CliConfig {
    pub command: Command,
    /// Gamma, mode, conventions and master seed.
    pub protocol: ProtocolConfig,
    pub settings: SettingsSource,
    /// The single setting for `simulate`.
    pub setting: Setting,
    pub trials: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threads: usize,
    pub compare_conventions: bool,
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_vector(s: &str) -> Result<[f64; 3], CliError> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(usage(format!("expected \"x,y,z\", got {s:?}")));
    }
    let mut v = [0.0; 3];
    for (dst, p) in v.iter_mut().zip(parts) {
        *dst = p
            .parse()
            .map_err(|_| usage(format!("not a number: {p:?}")))?;
    }
    Ok(v)
}

/// Normalizes a hand-authored vector, warning when it was noticeably off.
pub fn to_direction(v: [f64; 3], what: &str) -> Result<Direction, CliError> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !norm.is_finite() || norm == 0.0 {
        return Err(usage(format!("{what}: vector must be finite and nonzero")));
    }
    if (norm - 1.0).abs() > NORM_WARN_TOL {
        eprintln!("warning: {what} has norm {norm}; normalizing");
    }
    Direction::normalize(v[0], v[1], v[2]).map_err(|e| usage(format!("{what}: {e}")))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSetting {
    a: [f64; 3],
    b: [f64; 3],
}

pub fn load_settings_file(path: &Path) -> Result<Vec<Setting>, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let raw: Vec<RawSetting> =
        serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
    if raw.is_empty() {
        return Err(usage(format!("{}: no settings", path.display())));
    }
    raw.into_iter()
        .enumerate()
        .map(|(i, r)| {
            Ok(Setting {
                a: to_direction(r.a, &format!("setting {i} a"))?,
                b: to_direction(r.b, &format!("setting {i} b"))?,
            })
        })
        .collect()
}

fn load_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Parses `argv` (including the program name), reading the seed fallback
/// from the environment.
pub fn parse_config<I, T>(argv: I) -> Result<CliConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    parse_config_with_env(argv, std::env::var(SEED_ENV).ok())
}

pub fn parse_config_with_env<I, T>(argv: I, env_seed: Option<String>) -> Result<CliConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    let (command, common, settings, compare, a, b) = match cli.command {
        Cmd::Simulate { common, a, b } => (Command::Simulate, common, None, false, a, b),
        Cmd::Sweep {
            common,
            settings,
            compare_conventions,
        } => (
            Command::Sweep,
            common,
            Some(settings),
            compare_conventions,
            None,
            None,
        ),
        Cmd::VerifyComponents { common } => {
            (Command::VerifyComponents, common, None, false, None, None)
        }
        Cmd::Baseline { common, settings } => {
            (Command::Baseline, common, Some(settings), false, None, None)
        }
    };
    let file = match &common.config {
        Some(p) => load_file_config(p)?,
        None => FileConfig::default(),
    };

    let gamma = common.gamma.or(file.gamma).unwrap_or(DEFAULT_GAMMA);
    StateParam::new(gamma).map_err(|e| usage(e.to_string()))?;

    let mode = match common.mode.or(file.mode).unwrap_or(ModeArg::Strict) {
        ModeArg::Strict => Mode::Strict,
        ModeArg::Ideal => Mode::Ideal,
        ModeArg::ResampleN => {
            let n = common
                .n
                .or(file.n)
                .ok_or_else(|| usage("--mode resample-n requires --n"))?;
            Mode::ResampleN(n)
        }
    };
    mode.validate().map_err(|e| usage(e.to_string()))?;

    let seed = match common.seed.or(file.seed) {
        Some(s) => s,
        None => match env_seed {
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| usage(format!("{SEED_ENV} is not a u64: {s:?}")))?,
            None => DEFAULT_SEED,
        },
    };

    let trials = common.trials.or(file.trials).unwrap_or(DEFAULT_TRIALS);
    if trials == 0 {
        return Err(usage("--trials must be at least 1"));
    }

    let ab: Convention = common
        .ab_convention
        .or(file.ab_convention)
        .map(Into::into)
        .unwrap_or_default();
    let mbox: Convention = common
        .mbox_convention
        .or(file.mbox_convention)
        .map(Into::into)
        .unwrap_or_default();
    let protocol = ProtocolConfig::new(gamma)
        .with_mode(mode)
        .with_conventions(ab, mbox)
        .with_seed(seed);

    let settings = {
        let (path, k) = match &settings {
            Some(s) => (s.settings.clone(), s.random_settings),
            None => (None, None),
        };
        match (path, k) {
            (Some(p), _) => SettingsSource::File(p),
            (None, Some(k)) => SettingsSource::Random(k),
            (None, None) => match (file.settings, file.random_settings) {
                (Some(p), None) => SettingsSource::File(p),
                (None, Some(k)) => SettingsSource::Random(k),
                (Some(_), Some(_)) => {
                    return Err(usage("config file sets both settings and random_settings"))
                }
                (None, None) => SettingsSource::Random(DEFAULT_RANDOM_SETTINGS),
            },
        }
    };
    if settings == SettingsSource::Random(0) {
        return Err(usage("--random-settings must be at least 1"));
    }

    let a = match a {
        Some(s) => parse_vector(&s)?,
        None => file.a.unwrap_or([0.0, 0.0, 1.0]),
    };
    let b = match b {
        Some(s) => parse_vector(&s)?,
        None => file.b.unwrap_or([1.0, 0.0, 0.0]),
    };
    let setting = Setting {
        a: to_direction(a, "a")?,
        b: to_direction(b, "b")?,
    };

    Ok(CliConfig {
        command,
        protocol,
        settings,
        setting,
        trials,
        out: common.out.or(file.out),
        format: common.format.or(file.format).unwrap_or_default(),
        threads: common.threads.or(file.threads).unwrap_or(0),
        compare_conventions: compare || file.compare_conventions.unwrap_or(false),
    })
}
