//! Exact pre-flip correlation of the ideal sign step, by enumerating the 32
//! equally likely configurations of `sgn(ĉ·μ̂₁..₅)`.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::geom::{cosine, inner, Direction, Sign};
use crate::quantum::StateParam;
use crate::resources::Convention;

use super::aux::{aux_vectors, canonicalize};
use super::carrier::{build_carrier, Side};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PreflipOracle {
    /// `E[cos(u, v)]`: what an exact biased sampler produces.
    pub exact: f64,
    /// `(1+pq)/2 â·B̂ + (1−pq)/2 Â·b̂`.
    pub paper_claim: f64,
    /// `E[u·v]` with the carriers left unnormalized.
    pub unnormalized: f64,
}

impl PreflipOracle {
    pub fn delta(&self) -> f64 {
        self.exact - self.paper_claim
    }
}

/// Carrier pair for selection `(p, q)` under explicit sign bits `s[0..5]`
/// (`s[i]` is `sgn(ĉ·μ̂_{i+1})`).
fn carriers(
    p: Sign,
    q: Sign,
    s: &[Sign; 5],
    a: &Direction,
    a_hat: &Direction,
    b: &Direction,
    b_hat: &Direction,
) -> (crate::geom::Carrier4, crate::geom::Carrier4) {
    let (i, j) = if p.is_plus() { (0, 1) } else { (3, 2) };
    let u = build_carrier(a, a_hat, s[i], s[j], s[4], Side::Alice);
    let (k, l) = if q.is_plus() { (2, 0) } else { (1, 3) };
    let v = build_carrier(b, b_hat, s[k], s[l], Sign::Plus, Side::Bob);
    (u, v)
}

/// Settings are canonicalized first, matching what the protocol feeds its
/// sign step; the result is the correlation of `(α₀, β₀)` before the output
/// relabeling.
pub fn preflip_correlation_oracle(
    a: &Direction,
    b: &Direction,
    sp: &StateParam,
    pq: Sign,
    ab_convention: Convention,
) -> Result<PreflipOracle> {
    let can = canonicalize(a, b);
    let aux = aux_vectors(&can.a, &can.b, sp, ab_convention)?;
    let selections: [(Sign, Sign); 2] = if pq.is_plus() {
        [(Sign::Plus, Sign::Plus), (Sign::Minus, Sign::Minus)]
    } else {
        [(Sign::Plus, Sign::Minus), (Sign::Minus, Sign::Plus)]
    };
    let mut exact = 0.0;
    let mut raw = 0.0;
    for bits in 0u32..32 {
        let s = [0, 1, 2, 3, 4].map(|i| Sign::from_parity(bits >> i & 1 == 1));
        for (p, q) in selections {
            let (u, v) = carriers(p, q, &s, &can.a, &aux.a_hat, &can.b, &aux.b_hat);
            exact += cosine(&u, &v);
            raw += inner(&u, &v);
        }
    }
    let n = 64.0;
    let paper_claim = if pq.is_plus() {
        can.a.dot(&aux.b_hat)
    } else {
        aux.a_hat.dot(&can.b)
    };
    Ok(PreflipOracle {
        exact: exact / n,
        paper_claim,
        unnormalized: raw / n,
    })
}
