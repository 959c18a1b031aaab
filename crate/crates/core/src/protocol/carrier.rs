//! Step (i) and (ii): M-box relabeling and carrier construction.

use serde::Serialize;

use crate::error::Result;
use crate::geom::{Carrier4, Direction, Sign};
use crate::resources::{m_box, Convention, Resource, RunTranscript, SharedBundle};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Alice,
    Bob,
}

/// One M-box use on the canonical z components; returns `(p, q)` with
/// `p = 2m − 1`, `q = 2n − 1`.
pub fn mbox_step(
    a_z: f64,
    b_z: f64,
    bundle: &SharedBundle,
    convention: Convention,
    transcript: &mut RunTranscript,
) -> Result<(Sign, Sign)> {
    let (m, n) = m_box(a_z, b_z, bundle.mbox_coin, convention)?;
    transcript.record_use(Resource::MBox)?;
    let to_sign = |bit: bool| if bit { Sign::Plus } else { Sign::Minus };
    Ok((to_sign(m), to_sign(n)))
}

/// Spatial part `sign1·base + sign2·aux`, fourth component of magnitude
/// `|‖w‖² − 1|^½`. Alice's fourth component is `−sign0·w₀` and Bob's is
/// `+w₀` (`sign0` is ignored for Bob), so that the Euclidean product of an
/// Alice carrier with a Bob carrier is `u·v − sign0·u₀v₀`.
pub fn build_carrier(
    base: &Direction,
    aux: &Direction,
    sign1: Sign,
    sign2: Sign,
    sign0: Sign,
    side: Side,
) -> Carrier4 {
    let (k1, k2) = (sign1.value(), sign2.value());
    let w = [
        k1 * base.x() + k2 * aux.x(),
        k1 * base.y() + k2 * aux.y(),
        k1 * base.z() + k2 * aux.z(),
    ];
    let n2 = w[0] * w[0] + w[1] * w[1] + w[2] * w[2];
    let w0 = (n2 - 1.0).abs().sqrt();
    let v0 = match side {
        Side::Alice => -sign0.value() * w0,
        Side::Bob => w0,
    };
    Carrier4::from_parts(w, v0)
}

/// Alice's carrier: `û₁` from `(μ₁, μ₂)` if `p = +1`, else `û₂` from
/// `(μ₄, μ₃)`; the fourth-component sign is `sgn(ĉ·μ₅)`.
pub fn alice_carrier(p: Sign, bundle: &SharedBundle, a: &Direction, a_hat: &Direction) -> Carrier4 {
    let (i, j) = if p.is_plus() { (1, 2) } else { (4, 3) };
    build_carrier(
        a,
        a_hat,
        bundle.mu_sign(i),
        bundle.mu_sign(j),
        bundle.mu_sign(5),
        Side::Alice,
    )
}

/// Bob's carrier: `v̂₁` from `(μ₃, μ₁)` if `q = +1`, else `v̂₂` from `(μ₂, μ₄)`.
pub fn bob_carrier(q: Sign, bundle: &SharedBundle, b: &Direction, b_hat: &Direction) -> Carrier4 {
    let (i, j) = if q.is_plus() { (3, 1) } else { (2, 4) };
    build_carrier(
        b,
        b_hat,
        bundle.mu_sign(i),
        bundle.mu_sign(j),
        Sign::Plus,
        Side::Bob,
    )
}

/// `u` depends on `p` only and `v` on `q` only.
pub fn select_uv(
    p: Sign,
    q: Sign,
    bundle: &SharedBundle,
    a: &Direction,
    a_hat: &Direction,
    b: &Direction,
    b_hat: &Direction,
) -> (Carrier4, Carrier4) {
    (
        alice_carrier(p, bundle, a, a_hat),
        bob_carrier(q, bundle, b, b_hat),
    )
}
