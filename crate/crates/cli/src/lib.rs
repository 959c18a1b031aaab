//! Command-line driver: configuration, execution and report output.

pub mod config;
pub mod report;
pub mod verify;

use std::ffi::OsString;

use nonlocal_sim::stats::{
    random_settings, run_baseline_sweep, run_sweep, simulate_setting, ReportConfig, SweepConfig,
};

pub use config::{parse_config, parse_config_with_env, CliConfig, Command, Format, SettingsSource};
pub use report::{serialize_report, Report, SimulateReport, CSV_HEADER};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Clap(clap::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Sim(#[from] nonlocal_sim::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use nonlocal_sim::Error as E;
        match self {
            CliError::Clap(e) => e.exit_code(),
            CliError::Usage(_) | CliError::Io(_) => EXIT_USAGE,
            CliError::Sim(E::Config(_) | E::GammaRange(_)) => EXIT_USAGE,
            CliError::Sim(_) => EXIT_FAIL,
        }
    }
}

fn load_settings(cfg: &CliConfig) -> Result<Vec<nonlocal_sim::stats::Setting>, CliError> {
    match &cfg.settings {
        SettingsSource::File(p) => config::load_settings_file(p),
        SettingsSource::Random(k) => Ok(random_settings(*k, cfg.protocol.master_seed)),
    }
}

/// Runs a resolved configuration and returns the process exit code.
pub fn execute(cfg: &CliConfig) -> Result<i32, CliError> {
    let out = cfg.out.as_deref();
    match cfg.command {
        Command::Simulate => {
            let setting = simulate_setting(&cfg.protocol, &cfg.setting, cfg.trials, cfg.threads)?;
            let report = Report::Simulate(SimulateReport::new(
                ReportConfig::new(&cfg.protocol, cfg.trials, "inline"),
                setting,
            ));
            report::emit(out, &serialize_report(&report, cfg.format)?)?;
            Ok(EXIT_PASS)
        }
        Command::Sweep => {
            let settings = load_settings(cfg)?;
            let sweep = SweepConfig {
                protocol: cfg.protocol,
                trials: cfg.trials,
                threads: cfg.threads,
                settings_source: cfg.settings.describe(),
                compare_conventions: cfg.compare_conventions,
            };
            let r = run_sweep(&sweep, &settings)?;
            let pass = r.passed();
            let s = &r.summary;
            eprintln!(
                "sweep: {} settings, max |z| {:.3}, protocol {}, calibration {}",
                s.settings,
                s.max_abs_z,
                if s.pass { "PASS" } else { "FAIL" },
                if r.calibration.summary.pass {
                    "PASS"
                } else {
                    "FAIL"
                },
            );
            report::emit(out, &serialize_report(&Report::Sweep(r), cfg.format)?)?;
            Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::Baseline => {
            let settings = load_settings(cfg)?;
            let r = run_baseline_sweep(
                &settings,
                cfg.trials,
                cfg.protocol.master_seed,
                cfg.threads,
                &cfg.settings.describe(),
            )?;
            let pass = r.summary.pass;
            eprintln!(
                "baseline: {} settings, max |z| {:.3}, {}",
                r.summary.settings,
                r.summary.max_abs_z,
                if pass { "PASS" } else { "FAIL" }
            );
            report::emit(out, &serialize_report(&Report::Baseline(r), cfg.format)?)?;
            Ok(if pass { EXIT_PASS } else { EXIT_FAIL })
        }
        Command::VerifyComponents => {
            let checks = verify::verify_components(&cfg.protocol)?;
            for c in &checks {
                println!(
                    "{} {}: {}",
                    if c.pass { "PASS" } else { "FAIL" },
                    c.name,
                    c.detail
                );
            }
            if let Some(p) = out {
                let text = serde_json::to_string_pretty(&checks)
                    .map_err(|e| CliError::Io(format!("serialize: {e}")))?;
                report::write_atomic(p, &(text + "\n"))?;
            }
            Ok(if checks.iter().all(|c| c.pass) {
                EXIT_PASS
            } else {
                EXIT_FAIL
            })
        }
    }
}

/// Parses and executes; errors are printed to stderr.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = parse_config(argv).and_then(|cfg| execute(&cfg));
    match result {
        Ok(code) => code,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            e.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
