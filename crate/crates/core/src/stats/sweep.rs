//! Parallel sweeps over settings.
//!
//! Work is split into `(setting, chunk)` tasks of at most [`CHUNK_SIZE`]
//! runs. Task `(i, j)` owns the stream `(master_seed, domain, i, j)`, and
//! counts are reduced in task order, so results do not depend on how many
//! workers execute the tasks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{sample_s2, Direction, RngStream, StreamLabel};
use crate::protocol::{
    preflip_correlation_oracle, prepare_setting, run_prepared, run_singlet_baseline, OutcomePair,
    PreparedSetting, ProtocolConfig,
};
use crate::quantum::{correlation, joint_pmf_qm, sample_qm, JointPmf, StateParam};
use crate::resources::{draw_bundle, Convention, Mode};

use super::estimate::{compare, estimate, tv_confidence, z_score, CellCounts, Z_THRESHOLD};

pub const CHUNK_SIZE: u64 = 1 << 16;
pub const MIN_SWEEP_TRIALS: u64 = 1000;
pub const SCHEMA_VERSION: u32 = 1;

/// Stream domains under one master seed.
pub mod domain {
    pub const SETTINGS: u64 = 1;
    pub const PROTOCOL: u64 = 2;
    pub const CALIBRATION: u64 = 3;
    pub const BASELINE: u64 = 4;
    pub const COMPARISON: u64 = 5;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Setting {
    pub a: Direction,
    pub b: Direction,
}

/// `k` setting pairs drawn uniformly on S² × S².
pub fn random_settings(k: usize, master_seed: u64) -> Vec<Setting> {
    let mut rng = RngStream::new(master_seed, StreamLabel::domain(domain::SETTINGS));
    (0..k)
        .map(|_| Setting {
            a: sample_s2(&mut rng),
            b: sample_s2(&mut rng),
        })
        .collect()
}

/// Anything that produces one outcome pair per trial for a setting.
pub trait OutcomeSource: Sync {
    type Prepared: Send + Sync;

    fn prepare(&self, setting: &Setting) -> Result<Self::Prepared>;

    fn sample(&self, prepared: &Self::Prepared, rng: &mut RngStream) -> Result<OutcomePair>;
}

/// The protocol; strict-mode budget violations surface as errors.
pub struct ProtocolSource {
    cfg: ProtocolConfig,
    sp: StateParam,
}

impl ProtocolSource {
    pub fn new(cfg: ProtocolConfig) -> Result<Self> {
        let sp = cfg.validate()?;
        Ok(Self { cfg, sp })
    }
}

impl OutcomeSource for ProtocolSource {
    type Prepared = PreparedSetting;

    fn prepare(&self, s: &Setting) -> Result<PreparedSetting> {
        prepare_setting(&s.a, &s.b, &self.sp, &self.cfg)
    }

    fn sample(&self, prep: &PreparedSetting, rng: &mut RngStream) -> Result<OutcomePair> {
        let bundle = draw_bundle(rng, self.cfg.c_hat)?;
        Ok(run_prepared(prep, &self.cfg, &bundle, rng)?.outcome)
    }
}

/// Direct sampling from the quantum pmf; used to calibrate the harness.
pub struct QmSource {
    sp: StateParam,
}

impl QmSource {
    pub fn new(sp: StateParam) -> Self {
        Self { sp }
    }
}

impl OutcomeSource for QmSource {
    type Prepared = JointPmf;

    fn prepare(&self, s: &Setting) -> Result<JointPmf> {
        joint_pmf_qm(&s.a, &s.b, &self.sp)
    }

    fn sample(&self, pmf: &JointPmf, rng: &mut RngStream) -> Result<OutcomePair> {
        let (alpha, beta) = sample_qm(pmf, rng);
        Ok(OutcomePair { alpha, beta })
    }
}

pub struct SingletSource;

impl OutcomeSource for SingletSource {
    type Prepared = Setting;

    fn prepare(&self, s: &Setting) -> Result<Setting> {
        Ok(*s)
    }

    fn sample(&self, s: &Setting, rng: &mut RngStream) -> Result<OutcomePair> {
        Ok(run_singlet_baseline(&s.a, &s.b, rng)?.0)
    }
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Counts `trials` outcomes per setting. `threads = 0` uses the global pool.
pub fn count_outcomes<S: OutcomeSource>(
    source: &S,
    settings: &[Setting],
    trials: u64,
    master_seed: u64,
    stream_domain: u64,
    threads: usize,
) -> Result<Vec<CellCounts>> {
    if settings.len() > u32::MAX as usize {
        return Err(Error::Config("too many settings".into()));
    }
    let prepared = settings
        .iter()
        .map(|s| source.prepare(s))
        .collect::<Result<Vec<_>>>()?;
    let chunks = trials.div_ceil(CHUNK_SIZE);
    let tasks: Vec<(usize, u64)> = (0..settings.len())
        .flat_map(|i| (0..chunks).map(move |j| (i, j)))
        .collect();
    let partial = in_pool(threads, || {
        tasks
            .par_iter()
            .map(|&(i, j)| {
                let label = StreamLabel::new(stream_domain, i as u32, j as u32);
                let mut rng = RngStream::new(master_seed, label);
                let runs = CHUNK_SIZE.min(trials - j * CHUNK_SIZE);
                let mut counts = CellCounts::default();
                for _ in 0..runs {
                    counts.record_pair(source.sample(&prepared[i], &mut rng)?);
                }
                Ok((i, counts))
            })
            .collect::<Result<Vec<_>>>()
    })??;
    let mut out = vec![CellCounts::default(); settings.len()];
    for (i, c) in partial {
        out[i].merge(&c);
    }
    Ok(out)
}

/// Pre-flip stage as predicted by the enumeration oracle and by the
/// closed-form claim, for the branch the M-box selects.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreflipBlock {
    pub pq: i8,
    pub exact: f64,
    pub paper_claim: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub emp: f64,
    pub target: f64,
    #[serde(with = "zser")]
    pub z: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettingReport {
    pub a: Direction,
    pub b: Direction,
    pub counts: CellCounts,
    pub pmf_emp: JointPmf,
    pub pmf_qm: JointPmf,
    #[serde(with = "zser::four")]
    pub z_scores: [f64; 4],
    pub chi2: f64,
    pub tv_distance: f64,
    pub tv_threshold: f64,
    pub support_violation: bool,
    pub preflip: PreflipBlock,
    /// Post-flip correlation implied by the closed-form pre-flip claim
    /// minus the quantum correlation; zero iff the branch algebra matches.
    pub flip_identity_residual: f64,
    pub marginal_checks: [MomentCheck; 2],
    pub correlation_check: MomentCheck,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub settings: usize,
    pub cells_tested: usize,
    #[serde(with = "zser")]
    pub max_abs_z: f64,
    pub mean_tv: f64,
    pub z_threshold: f64,
    pub z_pass: bool,
    pub tv_pass: bool,
    pub marginal_pass: bool,
    pub flip_identity_pass: Option<bool>,
    pub pass: bool,
    pub note: String,
}

/// Tolerance on [`SettingReport::flip_identity_residual`].
pub const FLIP_IDENTITY_TOL: f64 = 1e-12;

pub fn summarize(settings: &[SettingReport], check_flip_identity: bool) -> Summary {
    let max_abs_z = settings
        .iter()
        .flat_map(|s| s.z_scores.iter().map(|z| z.abs()))
        .fold(0.0, f64::max);
    let mean_tv = if settings.is_empty() {
        0.0
    } else {
        settings.iter().map(|s| s.tv_distance).sum::<f64>() / settings.len() as f64
    };
    let z_pass = max_abs_z <= Z_THRESHOLD;
    let tv_pass = settings.iter().all(|s| s.tv_distance <= s.tv_threshold);
    let marginal_pass = settings
        .iter()
        .all(|s| s.marginal_checks.iter().all(|m| m.z.abs() <= Z_THRESHOLD));
    let flip_identity_pass = check_flip_identity.then(|| {
        settings
            .iter()
            .all(|s| s.flip_identity_residual.abs() <= FLIP_IDENTITY_TOL)
    });
    let pass = z_pass && tv_pass && marginal_pass && flip_identity_pass.unwrap_or(true);
    let cells_tested = 4 * settings.len();
    Summary {
        settings: settings.len(),
        cells_tested,
        max_abs_z,
        mean_tv,
        z_threshold: Z_THRESHOLD,
        z_pass,
        tv_pass,
        marginal_pass,
        flip_identity_pass,
        pass,
        note: format!(
            "per-cell |z| <= {Z_THRESHOLD} over {cells_tested} cells, no multiplicity \
             correction (Bonferroni-equivalent two-sided level {:.1e})",
            cells_tested as f64 * 6.334e-5
        ),
    }
}

pub fn setting_report(
    setting: &Setting,
    counts: &CellCounts,
    cfg: &ProtocolConfig,
    sp: &StateParam,
) -> Result<SettingReport> {
    let (pmf_emp, _) = estimate(counts)?;
    let pmf_qm = joint_pmf_qm(&setting.a, &setting.b, sp)?;
    let n = counts.total;
    let cmp = compare(&pmf_emp, &pmf_qm, n);

    let prep = prepare_setting(&setting.a, &setting.b, sp, cfg)?;
    let can = prep.canonical;
    let pq = cfg.branch_pq(can.a.z(), can.b.z());
    let oracle = preflip_correlation_oracle(&setting.a, &setting.b, sp, pq, cfg.ab_convention)?;
    // Claimed pre-flip value for the branch the M-box selects, pushed through
    // the correlated-flip algebra.
    let (f_lo, f_hi) = (
        prep.aux.f_a.min(prep.aux.f_b),
        prep.aux.f_a.max(prep.aux.f_b),
    );
    let claimed = f_lo + (1.0 - f_hi) * oracle.paper_claim;
    let flip_identity_residual = claimed - correlation(&can.a, &can.b, sp);

    let (ma, mb, corr) = counts.moments();
    let (ta, tb, tc) = (
        sp.c * setting.a.z(),
        sp.c * setting.b.z(),
        pmf_qm.correlation(),
    );
    let check = |emp: f64, target: f64| MomentCheck {
        emp,
        target,
        z: z_score(emp, target, 1.0 - target * target, n),
    };
    Ok(SettingReport {
        a: setting.a,
        b: setting.b,
        counts: *counts,
        pmf_emp,
        pmf_qm,
        z_scores: cmp.z,
        chi2: cmp.chi2,
        tv_distance: cmp.tv,
        tv_threshold: tv_confidence(&pmf_qm, n),
        support_violation: cmp.support_violation,
        preflip: PreflipBlock {
            pq: pq.as_i8(),
            exact: oracle.exact,
            paper_claim: oracle.paper_claim,
            delta: oracle.delta(),
        },
        flip_identity_residual,
        marginal_checks: [check(ma, ta), check(mb, tb)],
        correlation_check: check(corr, tc),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub gamma: f64,
    pub mode: Mode,
    pub ab_convention: Convention,
    pub mbox_convention: Convention,
    pub c_hat: [f64; 4],
    pub rejection_cap: u64,
    pub master_seed: u64,
    pub trials: u64,
    pub chunk_size: u64,
    pub settings_source: String,
}

impl ReportConfig {
    pub fn new(p: &ProtocolConfig, trials: u64, settings_source: &str) -> Self {
        Self {
            gamma: p.gamma,
            mode: p.mode,
            ab_convention: p.ab_convention,
            mbox_convention: p.mbox_convention,
            c_hat: p.c_hat.components(),
            rejection_cap: p.rejection_cap,
            master_seed: p.master_seed,
            trials,
            chunk_size: CHUNK_SIZE,
            settings_source: settings_source.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationBlock {
    pub source: String,
    pub settings: Vec<SettingReport>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConventionComparison {
    pub ab_convention: Convention,
    pub mbox_convention: Convention,
    pub settings: Vec<SettingReport>,
    pub summary: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub schema_version: u32,
    pub config: ReportConfig,
    pub settings: Vec<SettingReport>,
    pub calibration: CalibrationBlock,
    pub summary: Summary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub convention_comparison: Option<ConventionComparison>,
}

impl SweepReport {
    /// Protocol and calibration both pass every threshold.
    pub fn passed(&self) -> bool {
        self.summary.pass && self.calibration.summary.pass
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub protocol: ProtocolConfig,
    pub trials: u64,
    /// Worker threads; 0 uses the global pool. Not part of the report.
    pub threads: usize,
    pub settings_source: String,
    pub compare_conventions: bool,
}

impl SweepConfig {
    pub fn new(protocol: ProtocolConfig, trials: u64) -> Self {
        Self {
            protocol,
            trials,
            threads: 0,
            settings_source: "inline".into(),
            compare_conventions: false,
        }
    }
}

fn protocol_reports(
    cfg: &ProtocolConfig,
    settings: &[Setting],
    trials: u64,
    stream_domain: u64,
    threads: usize,
) -> Result<Vec<SettingReport>> {
    let sp = cfg.validate()?;
    let source = ProtocolSource::new(*cfg)?;
    let counts = count_outcomes(
        &source,
        settings,
        trials,
        cfg.master_seed,
        stream_domain,
        threads,
    )?;
    settings
        .iter()
        .zip(&counts)
        .map(|(s, c)| setting_report(s, c, cfg, &sp))
        .collect()
}

/// All-or-nothing: any error aborts the sweep without a partial report.
pub fn run_sweep(cfg: &SweepConfig, settings: &[Setting]) -> Result<SweepReport> {
    if settings.is_empty() {
        return Err(Error::Config("sweep needs at least one setting".into()));
    }
    if cfg.trials < MIN_SWEEP_TRIALS {
        return Err(Error::Config(format!(
            "sweep needs at least {MIN_SWEEP_TRIALS} trials per setting"
        )));
    }
    let p = &cfg.protocol;
    let sp = p.validate()?;
    let reports = protocol_reports(p, settings, cfg.trials, domain::PROTOCOL, cfg.threads)?;

    let qm = QmSource::new(sp);
    let cal_counts = count_outcomes(
        &qm,
        settings,
        cfg.trials,
        p.master_seed,
        domain::CALIBRATION,
        cfg.threads,
    )?;
    let cal_reports = settings
        .iter()
        .zip(&cal_counts)
        .map(|(s, c)| setting_report(s, c, p, &sp))
        .collect::<Result<Vec<_>>>()?;

    let convention_comparison = if cfg.compare_conventions {
        let flip = |c: Convention| match c {
            Convention::Corrected => Convention::Literal,
            Convention::Literal => Convention::Corrected,
        };
        let alt = p.with_conventions(flip(p.ab_convention), flip(p.mbox_convention));
        let alt_reports =
            protocol_reports(&alt, settings, cfg.trials, domain::COMPARISON, cfg.threads)?;
        Some(ConventionComparison {
            ab_convention: alt.ab_convention,
            mbox_convention: alt.mbox_convention,
            summary: summarize(&alt_reports, true),
            settings: alt_reports,
        })
    } else {
        None
    };

    Ok(SweepReport {
        schema_version: SCHEMA_VERSION,
        config: ReportConfig::new(p, cfg.trials, &cfg.settings_source),
        summary: summarize(&reports, true),
        settings: reports,
        calibration: CalibrationBlock {
            source: "qm_sampler".into(),
            summary: summarize(&cal_reports, false),
            settings: cal_reports,
        },
        convention_comparison,
    })
}

/// `trials` protocol runs at one setting.
pub fn simulate_setting(
    cfg: &ProtocolConfig,
    setting: &Setting,
    trials: u64,
    threads: usize,
) -> Result<SettingReport> {
    if trials == 0 {
        return Err(Error::Config("trials must be positive".into()));
    }
    let reports = protocol_reports(
        cfg,
        std::slice::from_ref(setting),
        trials,
        domain::PROTOCOL,
        threads,
    )?;
    Ok(reports.into_iter().next().expect("one setting"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSetting {
    pub a: Direction,
    pub b: Direction,
    pub counts: CellCounts,
    pub correlation_check: MomentCheck,
    pub marginal_checks: [MomentCheck; 2],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineSummary {
    pub settings: usize,
    #[serde(with = "zser")]
    pub max_abs_z: f64,
    pub z_threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub master_seed: u64,
    pub trials: u64,
    pub chunk_size: u64,
    pub settings_source: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub schema_version: u32,
    pub config: BaselineConfig,
    pub settings: Vec<BaselineSetting>,
    pub summary: BaselineSummary,
}

/// Singlet baseline: `⟨αβ⟩ = −â·b̂`, zero marginals.
pub fn run_baseline_sweep(
    settings: &[Setting],
    trials: u64,
    master_seed: u64,
    threads: usize,
    settings_source: &str,
) -> Result<BaselineReport> {
    if settings.is_empty() || trials == 0 {
        return Err(Error::Config("baseline needs settings and trials".into()));
    }
    let counts = count_outcomes(
        &SingletSource,
        settings,
        trials,
        master_seed,
        domain::BASELINE,
        threads,
    )?;
    let rows: Vec<BaselineSetting> = settings
        .iter()
        .zip(&counts)
        .map(|(s, c)| {
            let (ma, mb, corr) = c.moments();
            let target = -s.a.dot(&s.b);
            let n = c.total;
            BaselineSetting {
                a: s.a,
                b: s.b,
                counts: *c,
                correlation_check: MomentCheck {
                    emp: corr,
                    target,
                    z: z_score(corr, target, 1.0 - target * target, n),
                },
                marginal_checks: [ma, mb].map(|m| MomentCheck {
                    emp: m,
                    target: 0.0,
                    z: z_score(m, 0.0, 1.0, n),
                }),
            }
        })
        .collect();
    let max_abs_z = rows
        .iter()
        .flat_map(|r| {
            [
                r.correlation_check.z,
                r.marginal_checks[0].z,
                r.marginal_checks[1].z,
            ]
        })
        .map(f64::abs)
        .fold(0.0, f64::max);
    Ok(BaselineReport {
        schema_version: SCHEMA_VERSION,
        config: BaselineConfig {
            master_seed,
            trials,
            chunk_size: CHUNK_SIZE,
            settings_source: settings_source.into(),
        },
        summary: BaselineSummary {
            settings: rows.len(),
            max_abs_z,
            z_threshold: Z_THRESHOLD,
            pass: max_abs_z <= Z_THRESHOLD,
        },
        settings: rows,
    })
}

/// z-scores may be infinite; JSON has no infinity, so they are written as
/// `null` and read back as `+inf`.
mod zser {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &f64, s: S) -> Result<S::Ok, S::Error> {
        if z.is_finite() {
            z.serialize(s)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }

    pub mod four {
        use super::*;

        pub fn serialize<S: Serializer>(z: &[f64; 4], s: S) -> Result<S::Ok, S::Error> {
            z.map(|v| v.is_finite().then_some(v)).serialize(s)
        }

        pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<[f64; 4], D::Error> {
            Ok(<[Option<f64>; 4]>::deserialize(d)?.map(|v| v.unwrap_or(f64::INFINITY)))
        }
    }
}
