use std::f64::consts::FRAC_PI_4;

use nonlocal_sim::geom::{Direction, RngStream, Sign, StreamLabel};
use nonlocal_sim::quantum::{correlation, joint_pmf_oracle, joint_pmf_qm, sample_qm, StateParam};
use proptest::prelude::*;

fn direction() -> impl Strategy<Value = Direction> {
    (0.0..std::f64::consts::PI, 0.0..std::f64::consts::TAU)
        .prop_map(|(t, p)| Direction::from_angles(t, p))
}

fn gamma() -> impl Strategy<Value = f64> {
    (1e-6..=FRAC_PI_4).prop_map(|g: f64| g.min(FRAC_PI_4))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(2000))]

    #[test]
    fn closed_form_matches_density_matrix(a in direction(), b in direction(), g in gamma()) {
        let sp = StateParam::new(g).unwrap();
        let closed = joint_pmf_qm(&a, &b, &sp).unwrap().cells();
        let brute = joint_pmf_oracle(&a, &b, &sp).unwrap().cells();
        for (x, y) in closed.iter().zip(brute) {
            prop_assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn pmf_moments(a in direction(), b in direction(), g in gamma()) {
        let sp = StateParam::new(g).unwrap();
        let p = joint_pmf_qm(&a, &b, &sp).unwrap();
        prop_assert!(p.cells().iter().all(|&x| x >= 0.0));
        prop_assert!((p.cells().iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!((p.marginal_alpha() - sp.c * a.z()).abs() <= 1e-12);
        prop_assert!((p.marginal_beta() - sp.c * b.z()).abs() <= 1e-12);
        prop_assert!((p.correlation() - correlation(&a, &b, &sp)).abs() <= 1e-12);
    }

    #[test]
    fn correlation_odd_in_each_setting(a in direction(), b in direction(), g in gamma()) {
        let sp = StateParam::new(g).unwrap();
        let c = correlation(&a, &b, &sp);
        prop_assert!((correlation(&-a, &b, &sp) + c).abs() <= 1e-12);
        prop_assert!((correlation(&a, &-b, &sp) + c).abs() <= 1e-12);
    }
}

#[test]
fn sampler_frequencies_match_pmf() {
    let sp = StateParam::new(0.4).unwrap();
    let a = Direction::normalize(0.3, -0.5, 0.8).unwrap();
    let b = Direction::normalize(-0.6, 0.1, 0.2).unwrap();
    let pmf = joint_pmf_qm(&a, &b, &sp).unwrap();
    let mut r = RngStream::new(31, StreamLabel::domain(0));
    let n = 400_000;
    let mut counts = [0u64; 4];
    for _ in 0..n {
        let (x, y) = sample_qm(&pmf, &mut r);
        let idx = match (x, y) {
            (Sign::Plus, Sign::Plus) => 0,
            (Sign::Plus, Sign::Minus) => 1,
            (Sign::Minus, Sign::Plus) => 2,
            (Sign::Minus, Sign::Minus) => 3,
        };
        counts[idx] += 1;
    }
    for (c, p) in counts.iter().zip(pmf.cells()) {
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((*c as f64 / n as f64 - p).abs() <= 4.0 * se);
    }
}
