//! `verify-components`: exact and analytic checks of each building block.

use serde::Serialize;

use nonlocal_sim::geom::{inner, sample_s2, RngStream, Sign, StreamLabel};
use nonlocal_sim::protocol::{
    aux_vectors, canonicalize, flip_closed_form, flip_exact_pmf, flip_matched_correlation,
    prepare_setting, run_prepared, ProtocolConfig,
};
use nonlocal_sim::quantum::{correlation, joint_pmf_oracle, joint_pmf_qm, StateParam};
use nonlocal_sim::resources::{draw_bundle, m_box, m_box_predicate, pr_box, Mode};
use nonlocal_sim::Result;

/// Stream domain for the randomized checks.
const VERIFY_DOMAIN: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

fn check(name: &'static str, pass: bool, detail: impl Into<String>) -> Check {
    Check {
        name,
        pass,
        detail: detail.into(),
    }
}

fn pr_box_table() -> Check {
    let mut ok = true;
    for x in [false, true] {
        for y in [false, true] {
            for coin in [false, true] {
                let (a, b) = pr_box(x, y, coin);
                ok &= (a ^ b) == (x & y) && a == coin;
            }
        }
    }
    check("pr_box_table", ok, "8 input/coin combinations")
}

fn m_box_table(cfg: &ProtocolConfig) -> Check {
    let inputs = [
        (0.3, 0.5),
        (0.5, 0.3),
        (0.5, 0.5),
        (0.0, 1.0),
        (1.0, 0.0),
        (0.0, 0.0),
    ];
    let mut ok = true;
    for (x, y) in inputs {
        for coin in [false, true] {
            match m_box(x, y, coin, cfg.mbox_convention) {
                Ok((m, n)) => {
                    ok &= m == coin && (m ^ n) == m_box_predicate(x, y, cfg.mbox_convention)
                }
                Err(_) => ok = false,
            }
        }
    }
    ok &= m_box(-0.1, 0.5, false, cfg.mbox_convention).is_err();
    check(
        "m_box_table",
        ok,
        format!(
            "{} convention, ties and domain",
            cfg.mbox_convention.as_str()
        ),
    )
}

fn random_gamma(rng: &mut RngStream) -> f64 {
    1e-3 + (std::f64::consts::FRAC_PI_4 - 1e-3) * rng.uniform()
}

fn unit_norms(cfg: &ProtocolConfig, rng: &mut RngStream) -> Result<Check> {
    let mut worst = 0.0f64;
    for _ in 0..100_000 {
        let sp = StateParam::new(random_gamma(rng))?;
        let can = canonicalize(&sample_s2(rng), &sample_s2(rng));
        if let Ok(aux) = aux_vectors(&can.a, &can.b, &sp, cfg.ab_convention) {
            worst = worst
                .max((aux.a_hat.norm() - 1.0).abs())
                .max((aux.b_hat.norm() - 1.0).abs());
        }
    }
    Ok(check(
        "aux_unit_norm",
        worst <= 1e-12,
        format!("max |‖·‖-1| = {worst:.3e}"),
    ))
}

fn flip_algebra() -> Check {
    let grid = [0.0, 0.25, 0.5, 0.75, 1.0];
    let c0s = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let (mut worst, mut feasible) = (0.0f64, 0);
    for &fa in &grid {
        for &fb in &grid {
            for &c0 in &c0s {
                let Ok(fm) = flip_closed_form(c0, fa, fb) else {
                    continue;
                };
                feasible += 1;
                let p = flip_exact_pmf(c0, fa, fb);
                worst = worst
                    .max((p.marginal_alpha() - fm.marg_a).abs())
                    .max((p.marginal_beta() - fm.marg_b).abs())
                    .max((p.correlation() - fm.corr).abs());
            }
        }
    }
    check(
        "flip_algebra",
        worst <= 1e-12,
        format!("{feasible} grid points, max deviation {worst:.3e}"),
    )
}

fn flip_identity(cfg: &ProtocolConfig, rng: &mut RngStream) -> Result<Check> {
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let sp = StateParam::new(random_gamma(rng))?;
        let can = canonicalize(&sample_s2(rng), &sample_s2(rng));
        if let Ok(aux) = aux_vectors(&can.a, &can.b, &sp, cfg.ab_convention) {
            let e =
                flip_matched_correlation(&can.a, &can.b, &aux) - correlation(&can.a, &can.b, &sp);
            worst = worst.max(e.abs());
        }
    }
    Ok(check(
        "flip_identity",
        worst <= 1e-12,
        format!(
            "{} a/b convention, max residual {worst:.3e}",
            cfg.ab_convention.as_str()
        ),
    ))
}

/// The M-box branch must route the flip algebra to the pre-flip correlation
/// that matches the ordering of `f_a` and `f_b`.
fn mbox_branch(cfg: &ProtocolConfig, rng: &mut RngStream) -> Result<Check> {
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let sp = StateParam::new(random_gamma(rng))?;
        let can = canonicalize(&sample_s2(rng), &sample_s2(rng));
        let Ok(aux) = aux_vectors(&can.a, &can.b, &sp, cfg.ab_convention) else {
            continue;
        };
        let c0 = match cfg.branch_pq(can.a.z(), can.b.z()) {
            Sign::Plus => can.a.dot(&aux.b_hat),
            Sign::Minus => aux.a_hat.dot(&can.b),
        };
        let post = aux.f_a.min(aux.f_b) + (1.0 - aux.f_a.max(aux.f_b)) * c0;
        worst = worst.max((post - correlation(&can.a, &can.b, &sp)).abs());
    }
    Ok(check(
        "mbox_branch",
        worst <= 1e-12,
        format!(
            "{} M-box convention, max residual {worst:.3e}",
            cfg.mbox_convention.as_str()
        ),
    ))
}

fn sign_moments(cfg: &ProtocolConfig, rng: &mut RngStream) -> Result<Check> {
    let n = 200_000;
    let mut m = [[0i64; 5]; 5];
    for _ in 0..n {
        let s = draw_bundle(rng, cfg.c_hat)?.mu_signs();
        for i in 0..5 {
            for j in 0..5 {
                m[i][j] += i64::from((s[i] * s[j]).as_i8());
            }
        }
    }
    let mut worst = 0.0f64;
    for (i, row) in m.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((v as f64 / n as f64 - target).abs());
        }
    }
    let bound = 4.0 / (n as f64).sqrt();
    Ok(check(
        "sign_moments",
        worst <= bound,
        format!("N={n}, max |<s_i s_j> - δ_ij| = {worst:.3e} (bound {bound:.3e})"),
    ))
}

fn distributed_sign(cfg: &ProtocolConfig, rng: &mut RngStream) -> Result<Check> {
    let strict = cfg.with_mode(Mode::Strict);
    let runs = 20_000;
    let mut violations = 0;
    for _ in 0..runs {
        let run_cfg = ProtocolConfig {
            gamma: random_gamma(rng),
            ..strict
        };
        let sp = run_cfg.validate()?;
        let (a, b) = (sample_s2(rng), sample_s2(rng));
        let prep = prepare_setting(&a, &b, &sp, &run_cfg)?;
        let bundle = draw_bundle(rng, run_cfg.c_hat)?;
        let t = run_prepared(&prep, &run_cfg, &bundle, rng)?;
        let l = &bundle.lambda[t.step.selected.unwrap_or(0)];
        let expect = Sign::of(inner(&t.u, l)) * Sign::of(inner(&t.v, l));
        if t.step.alpha0 * t.step.beta0 != expect
            || (t.transcript.m_box_uses, t.transcript.pr_box_uses) != (1, 1)
        {
            violations += 1;
        }
    }
    Ok(check(
        "distributed_sign_identity",
        violations == 0,
        format!("{runs} strict runs, {violations} violations"),
    ))
}

fn quantum_oracle(rng: &mut RngStream) -> Result<Check> {
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let sp = StateParam::new(random_gamma(rng))?;
        let (a, b) = (sample_s2(rng), sample_s2(rng));
        let closed = joint_pmf_qm(&a, &b, &sp)?.cells();
        let brute = joint_pmf_oracle(&a, &b, &sp)?.cells();
        for (x, y) in closed.iter().zip(brute) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(check(
        "quantum_oracle",
        worst <= 1e-10,
        format!("10000 triples, max deviation {worst:.3e}"),
    ))
}

/// Runs every check; randomized ones draw from the configured master seed.
pub fn verify_components(cfg: &ProtocolConfig) -> Result<Vec<Check>> {
    let mut rng = RngStream::new(cfg.master_seed, StreamLabel::domain(VERIFY_DOMAIN));
    Ok(vec![
        pr_box_table(),
        m_box_table(cfg),
        unit_norms(cfg, &mut rng)?,
        flip_algebra(),
        flip_identity(cfg, &mut rng)?,
        mbox_branch(cfg, &mut rng)?,
        sign_moments(cfg, &mut rng)?,
        distributed_sign(cfg, &mut rng)?,
        quantum_oracle(&mut rng)?,
    ])
}
