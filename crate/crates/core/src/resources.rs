//! No-signaling boxes, the shared-randomness bundle, and per-run resource
//! accounting.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{sample_s3, Carrier4, RngStream, Sign};

/// Orientation of a sign or predicate convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Convention {
    /// Internally consistent orientation (default).
    #[default]
    Corrected,
    /// Orientation as literally written in the source derivation.
    Literal,
}

impl Convention {
    pub fn as_str(self) -> &'static str {
        match self {
            Convention::Corrected => "corrected",
            Convention::Literal => "literal",
        }
    }
}

/// How the distributed sign step obtains its biased sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Two shared uniform candidates plus one PR-box use.
    #[default]
    Strict,
    /// Exact biased sample treated as shared (diagnostic).
    Ideal,
    /// Importance resampling over `n` shared uniform candidates; the index
    /// is sent as `ceil(log2 n)` classical bits.
    ResampleN(u32),
}

impl Mode {
    pub fn validate(self) -> Result<Self> {
        match self {
            Mode::ResampleN(n) if n < 2 => Err(Error::Config(format!(
                "resample_n requires n >= 2, got {n}"
            ))),
            m => Ok(m),
        }
    }
}

/// Popescu-Rohrlich box: `a ⊕ b = x ∧ y`, with `a = coin`.
#[inline]
pub fn pr_box(x: bool, y: bool, coin: bool) -> (bool, bool) {
    (coin, coin ^ (x & y))
}

/// Comparison predicate realized by the M-box under `convention`.
#[inline]
pub fn m_box_predicate(x: f64, y: f64, convention: Convention) -> bool {
    match convention {
        Convention::Literal => x <= y,
        Convention::Corrected => x > y,
    }
}

/// Millionaire box on inputs in `[0, 1]`: `m = coin`, `m ⊕ n` is the
/// configured predicate.
pub fn m_box(x: f64, y: f64, coin: bool, convention: Convention) -> Result<(bool, bool)> {
    for v in [x, y] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::MBoxDomain(v));
        }
    }
    Ok((coin, coin ^ m_box_predicate(x, y, convention)))
}

/// Randomness shared by Alice and Bob before the inputs are revealed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SharedBundle {
    pub mu: [Carrier4; 5],
    pub lambda: [Carrier4; 2],
    pub c_hat: Carrier4,
    pub r_flip: f64,
    pub mbox_coin: bool,
    pub prbox_coin: bool,
}

impl SharedBundle {
    /// `sgn(ĉ·μ̂ᵢ)` for `i` in `1..=5`.
    #[inline]
    pub fn mu_sign(&self, i: usize) -> Sign {
        debug_assert!((1..=5).contains(&i));
        Sign::of(crate::geom::inner(&self.c_hat, &self.mu[i - 1]))
    }

    pub fn mu_signs(&self) -> [Sign; 5] {
        [1, 2, 3, 4, 5].map(|i| self.mu_sign(i))
    }
}

/// Draws a fresh bundle; `c_hat` is copied through.
pub fn draw_bundle(rng: &mut RngStream, c_hat: Carrier4) -> Result<SharedBundle> {
    if !c_hat.is_unit() {
        return Err(Error::NotUnit {
            norm: c_hat.euclidean_norm(),
        });
    }
    let mu = [(); 5].map(|_| sample_s3(rng));
    let lambda = [sample_s3(rng), sample_s3(rng)];
    let r_flip = rng.uniform();
    let mbox_coin = rng.bit();
    let prbox_coin = rng.bit();
    Ok(SharedBundle {
        mu,
        lambda,
        c_hat,
        r_flip,
        mbox_coin,
        prbox_coin,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Resource {
    PrBox,
    MBox,
    Cbits(u32),
}

/// One labeled unit of randomness consumed by a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SharedDraw {
    Mu(u8),
    Lambda(u8),
    RFlip,
    MBoxCoin,
    PrBoxCoin,
    ResampleLambda(u32),
    PrivateLambda,
    PrivateUniform,
}

/// Allowed `(pr_box_uses, m_box_uses)` at close.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Budget {
    pub pr_box: u32,
    pub m_box: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunTranscript {
    pub pr_box_uses: u32,
    pub m_box_uses: u32,
    pub cbits: u32,
    pub shared_draws: Vec<SharedDraw>,
    pub mode: Mode,
    pub notes: Vec<&'static str>,
    budget: Option<Budget>,
    closed: bool,
}

impl RunTranscript {
    /// Transcript for a protocol run; strict mode enforces one use of each box.
    pub fn for_mode(mode: Mode) -> Self {
        let budget = match mode {
            Mode::Strict => Some(Budget {
                pr_box: 1,
                m_box: 1,
            }),
            _ => None,
        };
        let mut t = Self::with_budget(mode, budget);
        if mode != Mode::Strict {
            t.notes.push("non-strict");
        }
        t
    }

    pub fn with_budget(mode: Mode, budget: Option<Budget>) -> Self {
        Self {
            pr_box_uses: 0,
            m_box_uses: 0,
            cbits: 0,
            shared_draws: Vec::with_capacity(12),
            mode,
            notes: Vec::new(),
            budget,
            closed: false,
        }
    }

    pub fn is_closed(&self) -> bool {
        self.closed
    }

    pub fn budget(&self) -> Option<Budget> {
        self.budget
    }

    pub fn record_use(&mut self, resource: Resource) -> Result<()> {
        if self.closed {
            return Err(Error::TranscriptClosed);
        }
        match resource {
            Resource::PrBox => self.pr_box_uses += 1,
            Resource::MBox => self.m_box_uses += 1,
            Resource::Cbits(n) => self.cbits += n,
        }
        Ok(())
    }

    pub fn record_draw(&mut self, draw: SharedDraw) -> Result<()> {
        if self.closed {
            return Err(Error::TranscriptClosed);
        }
        self.shared_draws.push(draw);
        Ok(())
    }

    pub fn note(&mut self, note: &'static str) {
        self.notes.push(note);
    }

    /// Records the ten members of a shared bundle.
    pub fn record_bundle(&mut self) -> Result<()> {
        for i in 1..=5 {
            self.record_draw(SharedDraw::Mu(i))?;
        }
        self.record_draw(SharedDraw::Lambda(0))?;
        self.record_draw(SharedDraw::Lambda(1))?;
        self.record_draw(SharedDraw::RFlip)?;
        self.record_draw(SharedDraw::MBoxCoin)?;
        self.record_draw(SharedDraw::PrBoxCoin)
    }

    /// Closes the run and checks the budget, if any.
    pub fn close(&mut self) -> Result<()> {
        if self.closed {
            return Err(Error::TranscriptClosed);
        }
        self.closed = true;
        if let Some(b) = self.budget {
            if self.pr_box_uses != b.pr_box || self.m_box_uses != b.m_box {
                return Err(Error::Resource(format!(
                    "expected {} PR-box and {} M-box uses, got {} and {}",
                    b.pr_box, b.m_box, self.pr_box_uses, self.m_box_uses
                )));
            }
        }
        Ok(())
    }
}
