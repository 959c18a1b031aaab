//! Report serialization and atomic output.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use nonlocal_sim::quantum::{JointPmf, CELL_LABELS};
use nonlocal_sim::stats::{
    compare, BaselineReport, CellCounts, ReportConfig, SettingReport, SweepReport, SCHEMA_VERSION,
};

use crate::config::Format;
use crate::CliError;

pub const CSV_HEADER: &str = "ax,ay,az,bx,by,bz,cell,count,p_emp,p_qm,z";

/// Output of `simulate`: one setting plus the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateReport {
    pub schema_version: u32,
    pub config: ReportConfig,
    pub setting: SettingReport,
}

impl SimulateReport {
    pub fn new(config: ReportConfig, setting: SettingReport) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            config,
            setting,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Sweep(SweepReport),
    Simulate(SimulateReport),
    Baseline(BaselineReport),
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s =
        serde_json::to_string_pretty(value).map_err(|e| CliError::Io(format!("serialize: {e}")))?;
    s.push('\n');
    Ok(s)
}

fn setting_rows(settings: &[SettingReport]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for s in settings {
        out.push_str(&csv_body(
            s.a.to_array(),
            s.b.to_array(),
            &s.counts,
            s.pmf_emp.cells(),
            s.pmf_qm.cells(),
            s.z_scores,
        ));
    }
    out
}

fn csv_body(
    a: [f64; 3],
    b: [f64; 3],
    counts: &CellCounts,
    p_emp: [f64; 4],
    p_ref: [f64; 4],
    z: [f64; 4],
) -> String {
    let mut out = String::new();
    let [ax, ay, az] = a;
    let [bx, by, bz] = b;
    let c = counts.cells();
    for k in 0..4 {
        writeln!(
            out,
            "{ax},{ay},{az},{bx},{by},{bz},{},{},{},{},{}",
            CELL_LABELS[k], c[k], p_emp[k], p_ref[k], z[k]
        )
        .expect("write to String");
    }
    out
}

/// Singlet reference pmf `(1 − αβ â·b̂)/4`.
fn singlet_pmf(ab: f64) -> JointPmf {
    let (same, diff) = ((1.0 - ab) / 4.0, (1.0 + ab) / 4.0);
    JointPmf::from_cells([same, diff, diff, same].map(|p| p.max(0.0)))
        .unwrap_or_else(|_| unreachable!("singlet pmf is valid"))
}

pub fn serialize_report(report: &Report, format: Format) -> Result<String, CliError> {
    match (report, format) {
        (Report::Sweep(r), Format::Json) => json(r),
        (Report::Simulate(r), Format::Json) => json(r),
        (Report::Baseline(r), Format::Json) => json(r),
        (Report::Sweep(r), Format::Csv) => Ok(setting_rows(&r.settings)),
        (Report::Simulate(r), Format::Csv) => Ok(setting_rows(std::slice::from_ref(&r.setting))),
        (Report::Baseline(r), Format::Csv) => {
            let mut out = String::from(CSV_HEADER);
            out.push('\n');
            for s in &r.settings {
                let reference = singlet_pmf(s.a.dot(&s.b));
                let n = s.counts.total;
                let p_emp = s.counts.cells().map(|c| c as f64 / n as f64);
                let emp = JointPmf::from_cells(p_emp)
                    .map_err(|e| CliError::Io(format!("baseline counts: {e}")))?;
                let cmp = compare(&emp, &reference, n);
                out.push_str(&csv_body(
                    s.a.to_array(),
                    s.b.to_array(),
                    &s.counts,
                    p_emp,
                    reference.cells(),
                    cmp.z,
                ));
            }
            Ok(out)
        }
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so a failed run never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(format!("{}: {e}", path.display()));
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(contents.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

pub fn emit(out: Option<&Path>, contents: &str) -> Result<(), CliError> {
    match out {
        Some(p) => write_atomic(p, contents),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(contents.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Io(format!("stdout: {e}")))
        }
    }
}
