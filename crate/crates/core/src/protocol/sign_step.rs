//! Step (iii): both parties output signs against a sample whose law depends
//! on Alice's carrier, without Bob learning the sample.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geom::{inner, rejection_sample_biased_counted, sample_s3, Carrier4, RngStream, Sign};
use crate::resources::{pr_box, Mode, Resource, RunTranscript, SharedBundle, SharedDraw};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SignStep {
    pub alpha0: Sign,
    pub beta0: Sign,
    /// Index of the shared candidate Alice selected (strict and resample modes).
    pub selected: Option<usize>,
}

/// Alice's choice among the two shared candidates: the one with the larger
/// `|û·λ|`, ties going to index 0.
#[inline]
pub fn alice_select(u: &Carrier4, lambda: &[Carrier4; 2]) -> usize {
    if inner(u, &lambda[1]).abs() > inner(u, &lambda[0]).abs() {
        1
    } else {
        0
    }
}

/// Bob's PR-box input: whether his two candidate signs differ.
#[inline]
pub fn bob_parity(v: &Carrier4, lambda: &[Carrier4; 2]) -> bool {
    Sign::of(inner(v, &lambda[0])) != Sign::of(inner(v, &lambda[1]))
}

/// Strict sign exchange for fixed candidates and PR coin. The product of
/// the outputs always equals `sgn(u·λ_sel)·sgn(v·λ_sel)`.
pub fn strict_signs(
    u: &Carrier4,
    v: &Carrier4,
    lambda: &[Carrier4; 2],
    coin: bool,
) -> (Sign, Sign, usize) {
    let sel = alice_select(u, lambda);
    let d = bob_parity(v, lambda);
    let (a, b) = pr_box(sel == 1, d, coin);
    let alpha0 = Sign::from_parity(a) * Sign::of(inner(u, &lambda[sel]));
    let beta0 = Sign::from_parity(b) * Sign::of(inner(v, &lambda[0]));
    (alpha0, beta0, sel)
}

fn cbits_for(n: u32) -> u32 {
    // ceil(log2 n) for n >= 2
    u32::BITS - (n - 1).leading_zeros()
}

pub fn distributed_sign_step(
    u: &Carrier4,
    v: &Carrier4,
    bundle: &SharedBundle,
    mode: Mode,
    transcript: &mut RunTranscript,
    rng: &mut RngStream,
    rejection_cap: u64,
) -> Result<SignStep> {
    if transcript.mode != mode {
        return Err(Error::Resource(format!(
            "sign step in {mode:?} mode on a {:?} transcript",
            transcript.mode
        )));
    }
    match mode {
        Mode::Strict => {
            if transcript.pr_box_uses > 0 {
                return Err(Error::Resource("second PR-box call in strict mode".into()));
            }
            let (alpha0, beta0, sel) = strict_signs(u, v, &bundle.lambda, bundle.prbox_coin);
            transcript.record_use(Resource::PrBox)?;
            Ok(SignStep {
                alpha0,
                beta0,
                selected: Some(sel),
            })
        }
        Mode::Ideal => {
            let (lambda, _) = rejection_sample_biased_counted(u, rng, rejection_cap)?;
            transcript.record_draw(SharedDraw::PrivateLambda)?;
            transcript.note("lambda_s treated as shared");
            Ok(SignStep {
                alpha0: Sign::of(inner(u, &lambda)),
                beta0: Sign::of(inner(v, &lambda)),
                selected: None,
            })
        }
        Mode::ResampleN(n) => {
            let mode = mode.validate()?;
            debug_assert_eq!(mode, Mode::ResampleN(n));
            let mut candidates = Vec::with_capacity(n as usize);
            let mut weights = Vec::with_capacity(n as usize);
            for i in 0..n {
                let l = sample_s3(rng);
                transcript.record_draw(SharedDraw::ResampleLambda(i))?;
                weights.push(inner(u, &l).abs());
                candidates.push(l);
            }
            let total: f64 = weights.iter().sum();
            let t = rng.uniform() * total;
            transcript.record_draw(SharedDraw::PrivateUniform)?;
            let mut acc = 0.0;
            let mut sel = 0;
            for (i, w) in weights.iter().enumerate() {
                if *w > 0.0 {
                    sel = i;
                    acc += w;
                    if t < acc {
                        break;
                    }
                }
            }
            transcript.record_use(Resource::Cbits(cbits_for(n)))?;
            let l = &candidates[sel];
            Ok(SignStep {
                alpha0: Sign::of(inner(u, l)),
                beta0: Sign::of(inner(v, l)),
                selected: Some(sel),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::StreamLabel;
    use crate::resources::draw_bundle;

    #[test]
    fn cbits() {
        assert_eq!(cbits_for(2), 1);
        assert_eq!(cbits_for(3), 2);
        assert_eq!(cbits_for(4), 2);
        assert_eq!(cbits_for(16), 4);
        assert_eq!(cbits_for(17), 5);
    }

    /// Enumerates the PR truth table: for every (selection, parity, coin)
    /// realized by concrete candidate geometry, the identity holds.
    #[test]
    fn identity_over_pr_truth_table() {
        let e = |i: usize, s: f64| {
            let mut c = [0.0; 4];
            c[i] = s;
            Carrier4::from(c)
        };
        let mut seen = std::collections::HashSet::new();
        // u aligned with axis 0 or 1 forces selection; v's signs set parity.
        for sel in 0..2usize {
            for d in [false, true] {
                for coin in [false, true] {
                    let u = e(sel, 1.0);
                    let lambda = [
                        Carrier4::unit(1.0, 0.0, 0.3, 0.0).unwrap(),
                        Carrier4::unit(0.0, 1.0, if d { -0.3 } else { 0.3 }, 0.0).unwrap(),
                    ];
                    let v = e(2, 1.0);
                    let (a0, b0, s) = strict_signs(&u, &v, &lambda, coin);
                    assert_eq!(s, sel);
                    assert_eq!(bob_parity(&v, &lambda), d);
                    let expect = Sign::of(inner(&u, &lambda[s])) * Sign::of(inner(&v, &lambda[s]));
                    assert_eq!(a0 * b0, expect);
                    seen.insert((sel, d, coin));
                }
            }
        }
        assert_eq!(seen.len(), 8);
    }

    #[test]
    fn equal_carriers_give_equal_signs() {
        let mut rng = RngStream::new(8, StreamLabel::domain(0));
        let c_hat = Carrier4::new(0.0, 0.0, 0.0, 1.0);
        for _ in 0..10_000 {
            let bundle = draw_bundle(&mut rng, c_hat).unwrap();
            let u = sample_s3(&mut rng).scaled(1.7);
            let mut t = RunTranscript::for_mode(Mode::Strict);
            let s =
                distributed_sign_step(&u, &u, &bundle, Mode::Strict, &mut t, &mut rng, 10).unwrap();
            assert_eq!(s.alpha0 * s.beta0, Sign::Plus);
            assert_eq!(t.pr_box_uses, 1);
        }
    }

    #[test]
    fn strict_refuses_second_pr_call() {
        let mut rng = RngStream::new(9, StreamLabel::domain(0));
        let bundle = draw_bundle(&mut rng, Carrier4::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        let u = sample_s3(&mut rng);
        let mut t = RunTranscript::for_mode(Mode::Strict);
        distributed_sign_step(&u, &u, &bundle, Mode::Strict, &mut t, &mut rng, 10).unwrap();
        let again = distributed_sign_step(&u, &u, &bundle, Mode::Strict, &mut t, &mut rng, 10);
        assert!(matches!(again, Err(Error::Resource(_))));
    }

    #[test]
    fn mode_mismatch_rejected() {
        let mut rng = RngStream::new(10, StreamLabel::domain(0));
        let bundle = draw_bundle(&mut rng, Carrier4::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        let u = sample_s3(&mut rng);
        let mut t = RunTranscript::for_mode(Mode::Ideal);
        let r = distributed_sign_step(&u, &u, &bundle, Mode::Strict, &mut t, &mut rng, 10);
        assert!(r.is_err());
    }

    #[test]
    fn resample_accounts_cbits() {
        let mut rng = RngStream::new(11, StreamLabel::domain(0));
        let bundle = draw_bundle(&mut rng, Carrier4::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        let u = sample_s3(&mut rng);
        let mut t = RunTranscript::for_mode(Mode::ResampleN(16));
        let s = distributed_sign_step(&u, &u, &bundle, Mode::ResampleN(16), &mut t, &mut rng, 10)
            .unwrap();
        assert_eq!(t.cbits, 4);
        assert_eq!(t.pr_box_uses, 0);
        assert!(s.selected.unwrap() < 16);
    }
}
