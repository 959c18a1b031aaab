//! Exact quantum statistics for `cos γ |00⟩ + sin γ |11⟩` measured along
//! `â ⊗ b̂`, by closed form and by an independent density-matrix evaluation.

use std::f64::consts::FRAC_PI_4;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{Direction, RngStream, Sign};

/// Entries more negative than this signal a formula bug rather than rounding.
pub const PMF_NEG_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateParam {
    pub gamma: f64,
    /// `cos 2γ`
    pub c: f64,
    /// `sin 2γ`
    pub s: f64,
}

impl StateParam {
    /// Accepts `γ ∈ (0, π/4]`. The product state `γ = 0` is excluded.
    pub fn new(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0 && gamma <= FRAC_PI_4) {
            return Err(Error::GammaRange(gamma));
        }
        let (s, c) = (2.0 * gamma).sin_cos();
        // cos(π/2) rounds to 6e-17; pin the endpoint.
        let c = if gamma == FRAC_PI_4 { 0.0 } else { c.max(0.0) };
        Ok(Self { gamma, c, s })
    }
}

pub fn state_params(gamma: f64) -> Result<StateParam> {
    StateParam::new(gamma)
}

/// Joint distribution over `(α, β)` in the fixed order `pp, pm, mp, mm`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointPmf {
    pub p_pp: f64,
    pub p_pm: f64,
    pub p_mp: f64,
    pub p_mm: f64,
}

/// Cell labels in the global order.
pub const CELL_LABELS: [&str; 4] = ["pp", "pm", "mp", "mm"];

/// Index of `(α, β)` in the global cell order.
#[inline]
pub fn cell_index(alpha: Sign, beta: Sign) -> usize {
    (usize::from(alpha == Sign::Minus) << 1) | usize::from(beta == Sign::Minus)
}

impl JointPmf {
    pub fn from_cells(p: [f64; 4]) -> Result<Self> {
        if p.iter().any(|&x| !(0.0..=1.0).contains(&x)) {
            return Err(Error::Consistency(format!(
                "pmf entry outside [0,1]: {p:?}"
            )));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Consistency(format!("pmf sums to {total}")));
        }
        Ok(Self::from_cells_unchecked(p))
    }

    pub(crate) fn from_cells_unchecked(p: [f64; 4]) -> Self {
        Self {
            p_pp: p[0],
            p_pm: p[1],
            p_mp: p[2],
            p_mm: p[3],
        }
    }

    #[inline]
    pub fn cells(&self) -> [f64; 4] {
        [self.p_pp, self.p_pm, self.p_mp, self.p_mm]
    }

    pub fn prob(&self, alpha: Sign, beta: Sign) -> f64 {
        self.cells()[cell_index(alpha, beta)]
    }

    /// `Σ α P`
    pub fn marginal_alpha(&self) -> f64 {
        self.p_pp + self.p_pm - self.p_mp - self.p_mm
    }

    /// `Σ β P`
    pub fn marginal_beta(&self) -> f64 {
        self.p_pp - self.p_pm + self.p_mp - self.p_mm
    }

    /// `Σ αβ P`
    pub fn correlation(&self) -> f64 {
        self.p_pp - self.p_pm - self.p_mp + self.p_mm
    }

    /// Assembles `¼(1 + α mA + β mB + αβ C)`, rejecting entries below
    /// `-PMF_NEG_TOL` and clamping the remaining rounding noise.
    pub fn from_moments(marg_a: f64, marg_b: f64, corr: f64) -> Result<Self> {
        let mut p = [0.0; 4];
        for (i, (al, be)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
            .into_iter()
            .enumerate()
        {
            let v = 0.25 * (1.0 + al * marg_a + be * marg_b + al * be * corr);
            if !(-PMF_NEG_TOL..=1.0 + PMF_NEG_TOL).contains(&v) {
                return Err(Error::Consistency(format!(
                    "pmf cell {} = {v} from moments ({marg_a}, {marg_b}, {corr})",
                    CELL_LABELS[i]
                )));
            }
            p[i] = v.clamp(0.0, 1.0);
        }
        Ok(Self::from_cells_unchecked(p))
    }
}

/// `C(â, b̂) = a_z b_z + s (a_x b_x − a_y b_y)`.
pub fn correlation(a: &Direction, b: &Direction, sp: &StateParam) -> f64 {
    a.z() * b.z() + sp.s * (a.x() * b.x() - a.y() * b.y())
}

pub fn joint_pmf_qm(a: &Direction, b: &Direction, sp: &StateParam) -> Result<JointPmf> {
    JointPmf::from_moments(sp.c * a.z(), sp.c * b.z(), correlation(a, b, sp))
}

type Mat2 = [[Complex64; 2]; 2];
type Mat4 = [[Complex64; 4]; 4];

fn projector(d: &Direction, outcome: f64) -> Mat2 {
    // (I + outcome · d·σ) / 2 with σ_y = [[0, -i], [i, 0]].
    let h = 0.5 * outcome;
    let re = |x: f64| Complex64::new(x, 0.0);
    [
        [re(0.5 + h * d.z()), Complex64::new(h * d.x(), -h * d.y())],
        [Complex64::new(h * d.x(), h * d.y()), re(0.5 - h * d.z())],
    ]
}

fn kron(a: &Mat2, b: &Mat2) -> Mat4 {
    let mut out = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..2 {
        for j in 0..2 {
            for k in 0..2 {
                for l in 0..2 {
                    out[2 * i + k][2 * j + l] = a[i][j] * b[k][l];
                }
            }
        }
    }
    out
}

/// Brute-force evaluation: `Tr(ρ Πα ⊗ Πβ)` with `ρ = |ψ⟩⟨ψ|` built
/// explicitly in the basis `|00⟩, |01⟩, |10⟩, |11⟩`.
pub fn joint_pmf_oracle(a: &Direction, b: &Direction, sp: &StateParam) -> Result<JointPmf> {
    let (sg, cg) = sp.gamma.sin_cos();
    let psi = [cg, 0.0, 0.0, sg].map(|x| Complex64::new(x, 0.0));
    let mut rho = [[Complex64::new(0.0, 0.0); 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            rho[i][j] = psi[i] * psi[j].conj();
        }
    }
    let mut p = [0.0; 4];
    for (idx, (al, be)) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
        .into_iter()
        .enumerate()
    {
        let op = kron(&projector(a, al), &projector(b, be));
        let mut tr = Complex64::new(0.0, 0.0);
        for i in 0..4 {
            for k in 0..4 {
                tr += rho[i][k] * op[k][i];
            }
        }
        if tr.im.abs() > 1e-12 || tr.re < -PMF_NEG_TOL {
            return Err(Error::Consistency(format!(
                "oracle trace {tr} for cell {idx}"
            )));
        }
        p[idx] = tr.re.clamp(0.0, 1.0);
    }
    Ok(JointPmf::from_cells_unchecked(p))
}

/// Inverse-CDF draw over the fixed cell order.
pub fn sample_qm(pmf: &JointPmf, rng: &mut RngStream) -> (Sign, Sign) {
    const OUTCOMES: [(Sign, Sign); 4] = [
        (Sign::Plus, Sign::Plus),
        (Sign::Plus, Sign::Minus),
        (Sign::Minus, Sign::Plus),
        (Sign::Minus, Sign::Minus),
    ];
    let u = rng.uniform();
    let cells = pmf.cells();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in cells.iter().enumerate() {
        if p > 0.0 {
            last = i;
            acc += p;
            if u < acc {
                return OUTCOMES[i];
            }
        }
    }
    OUTCOMES[last]
}
