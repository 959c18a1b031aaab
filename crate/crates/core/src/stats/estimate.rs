use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::Sign;
use crate::protocol::OutcomePair;
use crate::quantum::{cell_index, JointPmf};

/// Per-cell acceptance threshold on |z|.
pub const Z_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellCounts {
    pub n_pp: u64,
    pub n_pm: u64,
    pub n_mp: u64,
    pub n_mm: u64,
    pub total: u64,
}

impl CellCounts {
    pub fn from_cells(c: [u64; 4]) -> Self {
        Self {
            n_pp: c[0],
            n_pm: c[1],
            n_mp: c[2],
            n_mm: c[3],
            total: c.iter().sum(),
        }
    }

    #[inline]
    pub fn cells(&self) -> [u64; 4] {
        [self.n_pp, self.n_pm, self.n_mp, self.n_mm]
    }

    #[inline]
    pub fn record(&mut self, alpha: Sign, beta: Sign) {
        match cell_index(alpha, beta) {
            0 => self.n_pp += 1,
            1 => self.n_pm += 1,
            2 => self.n_mp += 1,
            _ => self.n_mm += 1,
        }
        self.total += 1;
    }

    pub fn record_pair(&mut self, o: OutcomePair) {
        self.record(o.alpha, o.beta)
    }

    pub fn merge(&mut self, other: &CellCounts) {
        self.n_pp += other.n_pp;
        self.n_pm += other.n_pm;
        self.n_mp += other.n_mp;
        self.n_mm += other.n_mm;
        self.total += other.total;
    }

    pub fn validate(&self) -> Result<()> {
        let sum: u64 = self.cells().iter().sum();
        if sum != self.total {
            return Err(Error::Counts(format!(
                "cells sum to {sum} but total is {}",
                self.total
            )));
        }
        Ok(())
    }

    /// `(⟨α⟩, ⟨β⟩, ⟨αβ⟩)`
    pub fn moments(&self) -> (f64, f64, f64) {
        let n = self.total as f64;
        let [pp, pm, mp, mm] = self.cells().map(|c| c as f64);
        (
            (pp + pm - mp - mm) / n,
            (pp - pm + mp - mm) / n,
            (pp - pm - mp + mm) / n,
        )
    }
}

/// Empirical pmf and per-cell binomial standard errors.
pub fn estimate(counts: &CellCounts) -> Result<(JointPmf, [f64; 4])> {
    counts.validate()?;
    if counts.total == 0 {
        return Err(Error::Counts("no trials".into()));
    }
    let n = counts.total as f64;
    let p = counts.cells().map(|c| c as f64 / n);
    let se = p.map(|q| (q * (1.0 - q) / n).sqrt());
    Ok((JointPmf::from_cells_unchecked(p), se))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Comparison {
    /// `f64::INFINITY` marks mass on a cell the reference excludes (or the
    /// converse for a certain cell).
    pub z: [f64; 4],
    pub chi2: f64,
    pub tv: f64,
    pub support_violation: bool,
}

/// z-score of an empirical mean against an exact one with per-trial
/// variance `var`; infinite when the variance vanishes and the values differ.
pub fn z_score(emp: f64, expected: f64, var: f64, n: u64) -> f64 {
    let se = (var.max(0.0) / n as f64).sqrt();
    let diff = emp - expected;
    if se == 0.0 {
        if diff.abs() <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        diff / se
    }
}

pub fn compare(emp: &JointPmf, reference: &JointPmf, n: u64) -> Comparison {
    let e = emp.cells();
    let r = reference.cells();
    let mut z = [0.0; 4];
    let mut chi2 = 0.0;
    let mut tv = 0.0;
    let mut support_violation = false;
    for i in 0..4 {
        let (pe, pr) = (e[i], r[i]);
        tv += (pe - pr).abs();
        if pr == 0.0 || pr == 1.0 {
            z[i] = if pe == pr { 0.0 } else { f64::INFINITY };
            support_violation |= pe != pr;
        } else {
            z[i] = z_score(pe, pr, pr * (1.0 - pr), n);
        }
        if pr > 0.0 {
            chi2 += n as f64 * (pe - pr) * (pe - pr) / pr;
        }
    }
    Comparison {
        z,
        chi2,
        tv: 0.5 * tv,
        support_violation,
    }
}

/// Total-variation band: half the sum of the per-cell `Z_THRESHOLD`-sigma
/// half-widths under the reference.
pub fn tv_confidence(reference: &JointPmf, n: u64) -> f64 {
    0.5 * reference
        .cells()
        .iter()
        .map(|&p| Z_THRESHOLD * (p * (1.0 - p) / n as f64).sqrt())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_uniform() {
        let c = CellCounts::from_cells([250_000; 4]);
        let (p, se) = estimate(&c).unwrap();
        assert_eq!(p.cells(), [0.25; 4]);
        for s in se {
            assert!((s - 4.330_127_018_922_193e-4).abs() < 1e-15);
        }
    }

    #[test]
    fn estimate_degenerate() {
        let c = CellCounts::from_cells([1000, 0, 0, 0]);
        let (p, se) = estimate(&c).unwrap();
        assert_eq!(p.cells(), [1.0, 0.0, 0.0, 0.0]);
        assert_eq!(se, [0.0; 4]);
    }

    #[test]
    fn estimate_rejects_bad_counts() {
        let mut c = CellCounts::from_cells([1, 2, 3, 4]);
        c.total = 11;
        assert!(matches!(estimate(&c), Err(Error::Counts(_))));
        assert!(estimate(&CellCounts::default()).is_err());
    }

    #[test]
    fn compare_identity() {
        let p = JointPmf::from_cells([0.1, 0.2, 0.3, 0.4]).unwrap();
        let c = compare(&p, &p, 1000);
        assert_eq!(c.z, [0.0; 4]);
        assert_eq!(c.tv, 0.0);
        assert!(!c.support_violation);
    }

    #[test]
    fn compare_example_z() {
        let r = JointPmf::from_cells([0.75, 0.0, 0.0, 0.25]).unwrap();
        let e = JointPmf::from_cells([0.74, 0.0, 0.0, 0.26]).unwrap();
        let c = compare(&e, &r, 10_000);
        let expect = -0.01 / (0.75f64 * 0.25 / 1e4).sqrt();
        assert!((c.z[0] - expect).abs() < 1e-9);
        assert!((c.z[0] + 2.309_401).abs() < 1e-5);
        assert!((c.tv - 0.01).abs() < 1e-12);
    }

    #[test]
    fn compare_support_violation() {
        let r = JointPmf::from_cells([0.75, 0.0, 0.0, 0.25]).unwrap();
        let e = JointPmf::from_cells([0.74, 0.01, 0.0, 0.25]).unwrap();
        let c = compare(&e, &r, 10_000);
        assert!(c.support_violation);
        assert!(c.z[1].is_infinite());
    }

    #[test]
    fn tv_band() {
        let u = JointPmf::from_cells([0.25; 4]).unwrap();
        let t = tv_confidence(&u, 1_000_000);
        assert!((t - 0.5 * 4.0 * 4.0 * 4.330_127e-4).abs() < 1e-8);
        assert!(tv_confidence(&u, 10_000_000) < t);
        assert!(tv_confidence(&u, u64::MAX) < 1e-8);
    }
}
