use std::f64::consts::PI;

use nonlocal_sim::geom::{Direction, RngStream, Sign};
use nonlocal_sim::protocol::{
    aux_vectors, correlated_flip, independent_flip, OutcomePair, ProtocolConfig,
};
use nonlocal_sim::quantum::StateParam;
use nonlocal_sim::resources::{Convention, Mode};
use nonlocal_sim::stats::{
    count_outcomes, random_settings, run_sweep, setting_report, summarize, OutcomeSource,
    ProtocolSource, QmSource, Setting, SweepConfig,
};
use nonlocal_sim::Result;

#[test]
fn calibration_soundness_over_seeds() {
    let sp = StateParam::new(PI / 8.0).unwrap();
    let cfg = ProtocolConfig::new(PI / 8.0);
    let settings = random_settings(20, 1);
    let mut passes = 0;
    for seed in 0..100 {
        let counts = count_outcomes(&QmSource::new(sp), &settings, 100_000, seed, 3, 0).unwrap();
        let reports: Vec<_> = settings
            .iter()
            .zip(&counts)
            .map(|(s, c)| setting_report(s, c, &cfg, &sp).unwrap())
            .collect();
        if summarize(&reports, false).z_pass {
            passes += 1;
        }
    }
    assert!(passes >= 99, "calibration passed {passes}/100");
}

/// Pre-flip pairs drawn with exactly the flip-matched correlation, then
/// flipped either with the shared coordinate or independently.
struct FlipSource {
    sp: StateParam,
    correlated: bool,
}

impl OutcomeSource for FlipSource {
    type Prepared = (f64, f64, f64);

    fn prepare(&self, s: &Setting) -> Result<(f64, f64, f64)> {
        assert!(s.a.z() >= 0.0 && s.b.z() >= 0.0);
        let aux = aux_vectors(&s.a, &s.b, &self.sp, Convention::Corrected)?;
        let c0 = if aux.f_b >= aux.f_a {
            s.a.dot(&aux.b_hat)
        } else {
            aux.a_hat.dot(&s.b)
        };
        Ok((aux.f_a, aux.f_b, c0))
    }

    fn sample(
        &self,
        &(f_a, f_b, c0): &(f64, f64, f64),
        rng: &mut RngStream,
    ) -> Result<OutcomePair> {
        let a0 = Sign::from_parity(rng.bit());
        let b0 = if rng.uniform() < (1.0 + c0) / 2.0 {
            a0
        } else {
            -a0
        };
        Ok(if self.correlated {
            correlated_flip(a0, b0, f_a, f_b, rng.uniform())
        } else {
            independent_flip(a0, b0, f_a, f_b, rng.uniform(), rng.uniform())
        })
    }
}

#[test]
fn calibration_power_flags_independent_flips() {
    let sp = StateParam::new(PI / 8.0).unwrap();
    let cfg = ProtocolConfig::new(PI / 8.0);
    let settings = [
        Setting {
            a: Direction::normalize(0.3, 0.2, 0.93).unwrap(),
            b: Direction::normalize(-0.2, 0.4, 0.89).unwrap(),
        },
        Setting {
            a: Direction::normalize(0.1, -0.3, 0.8).unwrap(),
            b: Direction::normalize(0.5, 0.1, 0.7).unwrap(),
        },
    ];
    let run = |correlated| {
        let src = FlipSource { sp, correlated };
        let counts = count_outcomes(&src, &settings, 1_000_000, 9, 3, 0).unwrap();
        let reports: Vec<_> = settings
            .iter()
            .zip(&counts)
            .map(|(s, c)| setting_report(s, c, &cfg, &sp).unwrap())
            .collect();
        summarize(&reports, false)
    };
    assert!(run(true).pass);
    assert!(!run(false).pass);
}

#[test]
fn protocol_counts_independent_of_worker_count() {
    let cfg = ProtocolConfig::new(0.4)
        .with_mode(Mode::Strict)
        .with_seed(77);
    let settings = random_settings(3, 77);
    let src = ProtocolSource::new(cfg).unwrap();
    let trials = 70_000;
    let one = count_outcomes(&src, &settings, trials, 77, 2, 1).unwrap();
    let three = count_outcomes(&src, &settings, trials, 77, 2, 3).unwrap();
    assert_eq!(one, three);
}

#[test]
fn sweep_report_is_reproducible() {
    let mut cfg = SweepConfig::new(ProtocolConfig::new(0.3).with_seed(5), 2000);
    let settings = random_settings(2, 5);
    let first = run_sweep(&cfg, &settings).unwrap();
    cfg.threads = 2;
    let second = run_sweep(&cfg, &settings).unwrap();
    assert_eq!(first, second);
    assert_eq!(first.settings.len(), 2);
    assert!(first.calibration.summary.flip_identity_pass.is_none());
    assert_eq!(first.summary.flip_identity_pass, Some(true));
}
