//! Step (iv): correlated local flips.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::Sign;
use crate::quantum::JointPmf;

use super::OutcomePair;

/// Both parties compare the same shared coordinate `r_flip` to their own
/// threshold, so the flip events are nested: `⟨αβ⟩ = min f + (1 − max f)·C₀`.
#[inline]
pub fn correlated_flip(alpha0: Sign, beta0: Sign, f_a: f64, f_b: f64, r_flip: f64) -> OutcomePair {
    OutcomePair {
        alpha: if r_flip < f_a { Sign::Plus } else { alpha0 },
        beta: if r_flip < f_b { Sign::Plus } else { beta0 },
    }
}

/// Flips driven by two independent coordinates. Produces
/// `f_a f_b + (1 − f_a)(1 − f_b) C₀`, which is not the required algebra;
/// kept for regression tests of the harness.
#[inline]
pub fn independent_flip(
    alpha0: Sign,
    beta0: Sign,
    f_a: f64,
    f_b: f64,
    r_a: f64,
    r_b: f64,
) -> OutcomePair {
    OutcomePair {
        alpha: if r_a < f_a { Sign::Plus } else { alpha0 },
        beta: if r_b < f_b { Sign::Plus } else { beta0 },
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlipMoments {
    pub marg_a: f64,
    pub marg_b: f64,
    pub corr: f64,
}

/// Post-flip moments from unbiased pre-flip outputs with correlation `c0`.
pub fn flip_closed_form(c0: f64, f_a: f64, f_b: f64) -> Result<FlipMoments> {
    let corr = f_a.min(f_b) + (1.0 - f_a.max(f_b)) * c0;
    JointPmf::from_moments(f_a, f_b, corr)
        .map_err(|e| Error::InfeasibleFlip(format!("C0={c0}, f_a={f_a}, f_b={f_b}: {e}")))?;
    Ok(FlipMoments {
        marg_a: f_a,
        marg_b: f_b,
        corr,
    })
}

/// Exact post-flip pmf by integrating `correlated_flip` over `r_flip`: the
/// thresholds split `[0, 1)` into three intervals on which the rule is
/// constant, and the pre-flip pair is enumerated with weights
/// `(1 ± c0)/4`.
pub fn flip_exact_pmf(c0: f64, f_a: f64, f_b: f64) -> JointPmf {
    let lo = f_a.min(f_b);
    let hi = f_a.max(f_b);
    let pieces = [(0.0, lo), (lo, hi), (hi, 1.0)];
    let mut p = [0.0; 4];
    for (start, end) in pieces {
        let width = end - start;
        if width <= 0.0 {
            continue;
        }
        let r = 0.5 * (start + end);
        for (a0, b0) in [
            (Sign::Plus, Sign::Plus),
            (Sign::Plus, Sign::Minus),
            (Sign::Minus, Sign::Plus),
            (Sign::Minus, Sign::Minus),
        ] {
            let w = 0.25 * (1.0 + (a0 * b0).value() * c0);
            let out = correlated_flip(a0, b0, f_a, f_b, r);
            p[crate::quantum::cell_index(out.alpha, out.beta)] += width * w;
        }
    }
    JointPmf::from_cells_unchecked(p)
}
