use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{Direction, Sign};
use crate::quantum::StateParam;
use crate::resources::Convention;

/// Denominators `1 − c·z` below this are rejected.
pub const AUX_DENOM_MIN: f64 = 1e-9;

/// Settings reflected so that `a_z, b_z ≥ 0`, with the output relabeling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Canonical {
    pub a: Direction,
    pub b: Direction,
    pub eta_a: Sign,
    pub eta_b: Sign,
}

fn reflect(d: Direction) -> (Direction, Sign) {
    if d.z() < 0.0 {
        (-d, Sign::Minus)
    } else {
        (d, Sign::Plus)
    }
}

/// Negates any setting with negative z component. Marginals and correlation
/// are odd in each setting, so multiplying the corresponding output by
/// `eta` afterwards leaves the target distribution unchanged.
pub fn canonicalize(a: &Direction, b: &Direction) -> Canonical {
    let (a, eta_a) = reflect(*a);
    let (b, eta_b) = reflect(*b);
    Canonical { a, b, eta_a, eta_b }
}

/// `Â`, `B̂` and the flip probabilities for canonicalized settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AuxVectors {
    pub a_hat: Direction,
    pub b_hat: Direction,
    pub f_a: f64,
    pub f_b: f64,
}

fn aux_one(d: &Direction, sp: &StateParam, conv: Convention) -> Result<Direction> {
    // `a_z − c` and `1 − c a_z` cancel badly when both c and a_z are near 1,
    // so both are formed from 1 − c and 1 − a_z computed without cancellation.
    let eps_c = if sp.c > 0.5 {
        2.0 * sp.gamma.sin().powi(2)
    } else {
        1.0 - sp.c
    };
    let rho2 = d.x() * d.x() + d.y() * d.y();
    let eps_a = if d.z() > 0.0 {
        rho2 / (1.0 + d.z())
    } else {
        1.0 - d.z()
    };
    let denom = eps_c + sp.c * eps_a;
    if denom.is_nan() || denom < AUX_DENOM_MIN {
        return Err(Error::DegenerateAux(denom));
    }
    let y_sign = match conv {
        Convention::Corrected => -1.0,
        Convention::Literal => 1.0,
    };
    let v = [
        sp.s * d.x() / denom,
        y_sign * sp.s * d.y() / denom,
        (eps_c - eps_a) / denom,
    ];
    Direction::new(v[0], v[1], v[2]).map_err(|e| Error::Consistency(format!("aux vector: {e}")))
}

/// `Â = (s a_x, ∓s a_y, a_z − c)/(1 − c a_z)` and likewise `B̂`; the corrected
/// convention takes the minus sign on the y component.
pub fn aux_vectors(
    a: &Direction,
    b: &Direction,
    sp: &StateParam,
    conv: Convention,
) -> Result<AuxVectors> {
    Ok(AuxVectors {
        a_hat: aux_one(a, sp, conv)?,
        b_hat: aux_one(b, sp, conv)?,
        f_a: sp.c * a.z(),
        f_b: sp.c * b.z(),
    })
}

/// Correlation the flips produce if the pre-flip stage delivers `C₀ = â·B̂`
/// on the `f_b ≥ f_a` branch and `C₀ = Â·b̂` otherwise.
pub fn flip_matched_correlation(a: &Direction, b: &Direction, aux: &AuxVectors) -> f64 {
    if aux.f_b >= aux.f_a {
        aux.f_a + (1.0 - aux.f_b) * a.dot(&aux.b_hat)
    } else {
        aux.f_b + (1.0 - aux.f_a) * aux.a_hat.dot(b)
    }
}
