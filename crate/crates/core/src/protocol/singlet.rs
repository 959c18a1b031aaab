//! Maximally entangled baseline on S²: `û = â`, `v̂ = b̂`, two shared
//! uniform candidates and one PR-box use. On S² the larger-`|â·λ|`
//! selection has density proportional to `|â·λ|` exactly, so the pair has
//! correlation `−â·b̂` once Bob negates.

use crate::error::Result;
use crate::geom::{sample_s2, Direction, RngStream, Sign};
use crate::resources::{pr_box, Budget, Mode, Resource, RunTranscript, SharedDraw};

use super::OutcomePair;

pub fn singlet_signs(
    a: &Direction,
    b: &Direction,
    lambda: &[Direction; 2],
    coin: bool,
) -> OutcomePair {
    let sel = usize::from(a.dot(&lambda[1]).abs() > a.dot(&lambda[0]).abs());
    let d = Sign::of(b.dot(&lambda[0])) != Sign::of(b.dot(&lambda[1]));
    let (x, y) = pr_box(sel == 1, d, coin);
    OutcomePair {
        alpha: Sign::from_parity(x) * Sign::of(a.dot(&lambda[sel])),
        beta: -(Sign::from_parity(y) * Sign::of(b.dot(&lambda[0]))),
    }
}

pub fn run_singlet_baseline(
    a: &Direction,
    b: &Direction,
    rng: &mut RngStream,
) -> Result<(OutcomePair, RunTranscript)> {
    let mut t = RunTranscript::with_budget(
        Mode::Strict,
        Some(Budget {
            pr_box: 1,
            m_box: 0,
        }),
    );
    t.note("singlet-baseline");
    let lambda = [sample_s2(rng), sample_s2(rng)];
    let coin = rng.bit();
    t.record_draw(SharedDraw::Lambda(0))?;
    t.record_draw(SharedDraw::Lambda(1))?;
    t.record_draw(SharedDraw::PrBoxCoin)?;
    let out = singlet_signs(a, b, &lambda, coin);
    t.record_use(Resource::PrBox)?;
    t.close()?;
    Ok((out, t))
}
