//! The simulation protocol: canonicalize, one M-box use, carrier selection,
//! the distributed sign step, correlated flips, and output relabeling.

mod aux;
mod carrier;
mod flip;
mod oracle;
mod sign_step;
mod singlet;

use serde::{Deserialize, Serialize};

pub use aux::{
    aux_vectors, canonicalize, flip_matched_correlation, AuxVectors, Canonical, AUX_DENOM_MIN,
};
pub use carrier::{alice_carrier, bob_carrier, build_carrier, mbox_step, select_uv, Side};
pub use flip::{correlated_flip, flip_closed_form, flip_exact_pmf, independent_flip, FlipMoments};
pub use oracle::{preflip_correlation_oracle, PreflipOracle};
pub use sign_step::{alice_select, bob_parity, distributed_sign_step, strict_signs, SignStep};
pub use singlet::{run_singlet_baseline, singlet_signs};

use crate::error::{Error, Result};
use crate::geom::{Carrier4, Direction, RngStream, Sign, DEFAULT_REJECTION_CAP};
use crate::quantum::StateParam;
use crate::resources::{m_box_predicate, Convention, Mode, RunTranscript, SharedBundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutcomePair {
    pub alpha: Sign,
    pub beta: Sign,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub gamma: f64,
    pub mode: Mode,
    pub ab_convention: Convention,
    pub mbox_convention: Convention,
    pub c_hat: Carrier4,
    pub rejection_cap: u64,
    pub master_seed: u64,
}

impl ProtocolConfig {
    pub fn new(gamma: f64) -> Self {
        Self {
            gamma,
            mode: Mode::Strict,
            ab_convention: Convention::Corrected,
            mbox_convention: Convention::Corrected,
            c_hat: Carrier4::new(0.0, 0.0, 0.0, 1.0),
            rejection_cap: DEFAULT_REJECTION_CAP,
            master_seed: 0,
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_conventions(mut self, ab: Convention, mbox: Convention) -> Self {
        self.ab_convention = ab;
        self.mbox_convention = mbox;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn state(&self) -> Result<StateParam> {
        StateParam::new(self.gamma)
    }

    pub fn validate(&self) -> Result<StateParam> {
        self.mode.validate()?;
        if !self.c_hat.is_unit() {
            return Err(Error::Config("c_hat must be a unit vector".into()));
        }
        if self.rejection_cap == 0 {
            return Err(Error::Config("rejection_cap must be positive".into()));
        }
        self.state()
    }

    /// `pq` the M-box produces for canonical settings under this config.
    pub fn branch_pq(&self, a_z: f64, b_z: f64) -> Sign {
        if m_box_predicate(a_z, b_z, self.mbox_convention) {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }
}

/// Every intermediate value of one run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolTrace {
    pub canonical: Canonical,
    pub aux: AuxVectors,
    pub p: Sign,
    pub q: Sign,
    pub u: Carrier4,
    pub v: Carrier4,
    pub step: SignStep,
    pub outcome: OutcomePair,
    pub transcript: RunTranscript,
}

/// Per-setting quantities that do not depend on the shared randomness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PreparedSetting {
    pub canonical: Canonical,
    pub aux: AuxVectors,
}

pub fn prepare_setting(
    a: &Direction,
    b: &Direction,
    sp: &StateParam,
    cfg: &ProtocolConfig,
) -> Result<PreparedSetting> {
    let canonical = canonicalize(a, b);
    let aux = aux_vectors(&canonical.a, &canonical.b, sp, cfg.ab_convention)?;
    Ok(PreparedSetting { canonical, aux })
}

/// One run from a prepared setting.
pub fn run_prepared(
    prep: &PreparedSetting,
    cfg: &ProtocolConfig,
    bundle: &SharedBundle,
    rng: &mut RngStream,
) -> Result<ProtocolTrace> {
    let PreparedSetting { canonical, aux } = *prep;
    let mut transcript = RunTranscript::for_mode(cfg.mode);
    transcript.note(match cfg.ab_convention {
        Convention::Corrected => "ab:corrected",
        Convention::Literal => "ab:literal",
    });
    transcript.note(match cfg.mbox_convention {
        Convention::Corrected => "mbox:corrected",
        Convention::Literal => "mbox:literal",
    });
    transcript.record_bundle()?;

    let (p, q) = mbox_step(
        canonical.a.z(),
        canonical.b.z(),
        bundle,
        cfg.mbox_convention,
        &mut transcript,
    )?;
    let u = alice_carrier(p, bundle, &canonical.a, &aux.a_hat);
    let v = bob_carrier(q, bundle, &canonical.b, &aux.b_hat);
    let step = distributed_sign_step(
        &u,
        &v,
        bundle,
        cfg.mode,
        &mut transcript,
        rng,
        cfg.rejection_cap,
    )?;
    let flipped = correlated_flip(step.alpha0, step.beta0, aux.f_a, aux.f_b, bundle.r_flip);
    let outcome = OutcomePair {
        alpha: canonical.eta_a * flipped.alpha,
        beta: canonical.eta_b * flipped.beta,
    };
    transcript.close()?;
    Ok(ProtocolTrace {
        canonical,
        aux,
        p,
        q,
        u,
        v,
        step,
        outcome,
        transcript,
    })
}

pub fn run_protocol_traced(
    a: &Direction,
    b: &Direction,
    cfg: &ProtocolConfig,
    bundle: &SharedBundle,
    rng: &mut RngStream,
) -> Result<ProtocolTrace> {
    let sp = cfg.validate()?;
    let prep = prepare_setting(a, b, &sp, cfg)?;
    run_prepared(&prep, cfg, bundle, rng)
}

pub fn run_protocol(
    a: &Direction,
    b: &Direction,
    cfg: &ProtocolConfig,
    bundle: &SharedBundle,
    rng: &mut RngStream,
) -> Result<(OutcomePair, RunTranscript)> {
    let trace = run_protocol_traced(a, b, cfg, bundle, rng)?;
    Ok((trace.outcome, trace.transcript))
}
