//! Vector algebra on S² and S³, the sign function, and the sampler for the
//! density proportional to `|ŵ·λ|` on S³.

use std::ops::{Mul, Neg};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
pub use crate::stream::{RngStream, StreamLabel};

/// Tolerance used for every unit-norm invariant.
pub const UNIT_TOL: f64 = 1e-12;

/// Attempt cap for [`rejection_sample_biased`]. The mean number of attempts
/// is `3π/4 ≈ 2.36`, so hitting the cap means the generator is broken.
pub const DEFAULT_REJECTION_CAP: u64 = 1_000_000;

/// A ±1 value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    /// Sign of a finite value with `0 ↦ +1`. Callers guarantee finiteness.
    #[inline]
    pub fn of(x: f64) -> Sign {
        debug_assert!(x.is_finite(), "Sign::of on non-finite {x}");
        if x >= 0.0 {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }

    /// `(-1)^bit`.
    #[inline]
    pub fn from_parity(bit: bool) -> Sign {
        if bit {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }

    #[inline]
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }

    #[inline]
    pub fn is_plus(self) -> bool {
        self == Sign::Plus
    }
}

impl Mul for Sign {
    type Output = Sign;

    #[inline]
    fn mul(self, rhs: Sign) -> Sign {
        if self == rhs {
            Sign::Plus
        } else {
            Sign::Minus
        }
    }
}

impl Neg for Sign {
    type Output = Sign;

    #[inline]
    fn neg(self) -> Sign {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// `sgn(x) = +1` for `x ≥ 0`, `-1` otherwise.
pub fn sgn(x: f64) -> Result<Sign> {
    if !x.is_finite() {
        return Err(Error::NonFinite(x));
    }
    Ok(Sign::of(x))
}

/// A unit vector in R³: a measurement setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[f64; 3]", into = "[f64; 3]")]
pub struct Direction {
    x: f64,
    y: f64,
    z: f64,
}

impl Direction {
    pub const X: Direction = Direction {
        x: 1.0,
        y: 0.0,
        z: 0.0,
    };
    pub const Y: Direction = Direction {
        x: 0.0,
        y: 1.0,
        z: 0.0,
    };
    pub const Z: Direction = Direction {
        x: 0.0,
        y: 0.0,
        z: 1.0,
    };

    /// Accepts components whose norm is 1 within [`UNIT_TOL`].
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || (norm - 1.0).abs() > UNIT_TOL {
            return Err(Error::NotUnit { norm });
        }
        Ok(Self { x, y, z })
    }

    pub fn normalize(x: f64, y: f64, z: f64) -> Result<Self> {
        let norm = (x * x + y * y + z * z).sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(Error::ZeroVector);
        }
        Ok(Self {
            x: x / norm,
            y: y / norm,
            z: z / norm,
        })
    }

    /// Polar angle `theta` from +z, azimuth `phi` from +x.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        let (st, ct) = theta.sin_cos();
        let (sp, cp) = phi.sin_cos();
        Self {
            x: st * cp,
            y: st * sp,
            z: ct,
        }
    }

    #[inline]
    pub fn x(&self) -> f64 {
        self.x
    }
    #[inline]
    pub fn y(&self) -> f64 {
        self.y
    }
    #[inline]
    pub fn z(&self) -> f64 {
        self.z
    }

    #[inline]
    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn dot(&self, other: &Direction) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl Neg for Direction {
    type Output = Direction;

    fn neg(self) -> Direction {
        Direction {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }
}

impl TryFrom<[f64; 3]> for Direction {
    type Error = Error;

    fn try_from(v: [f64; 3]) -> Result<Self> {
        Direction::new(v[0], v[1], v[2])
    }
}

impl From<Direction> for [f64; 3] {
    fn from(d: Direction) -> Self {
        d.to_array()
    }
}

/// A real 4-vector `(v1, v2, v3, v0)` with its Euclidean norm cached.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Carrier4 {
    v1: f64,
    v2: f64,
    v3: f64,
    v0: f64,
    euclidean_norm: f64,
}

impl Carrier4 {
    pub fn new(v1: f64, v2: f64, v3: f64, v0: f64) -> Self {
        let euclidean_norm = (v1 * v1 + v2 * v2 + v3 * v3 + v0 * v0).sqrt();
        Self {
            v1,
            v2,
            v3,
            v0,
            euclidean_norm,
        }
    }

    pub fn from_parts(spatial: [f64; 3], v0: f64) -> Self {
        Self::new(spatial[0], spatial[1], spatial[2], v0)
    }

    /// Unit vector; requires a nonzero, finite norm.
    pub fn unit(v1: f64, v2: f64, v3: f64, v0: f64) -> Result<Self> {
        Self::new(v1, v2, v3, v0).normalized()
    }

    #[inline]
    pub fn components(&self) -> [f64; 4] {
        [self.v1, self.v2, self.v3, self.v0]
    }

    #[inline]
    pub fn spatial(&self) -> [f64; 3] {
        [self.v1, self.v2, self.v3]
    }

    #[inline]
    pub fn v0(&self) -> f64 {
        self.v0
    }

    #[inline]
    pub fn euclidean_norm(&self) -> f64 {
        self.euclidean_norm
    }

    pub fn is_unit(&self) -> bool {
        (self.euclidean_norm - 1.0).abs() <= UNIT_TOL
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.euclidean_norm;
        if !n.is_finite() || n == 0.0 {
            return Err(Error::ZeroVector);
        }
        let [a, b, c, d] = self.components();
        Ok(Self::new(a / n, b / n, c / n, d / n))
    }

    pub fn scaled(&self, k: f64) -> Self {
        let [a, b, c, d] = self.components();
        Self::new(k * a, k * b, k * c, k * d)
    }
}

impl From<[f64; 4]> for Carrier4 {
    fn from(v: [f64; 4]) -> Self {
        Carrier4::new(v[0], v[1], v[2], v[3])
    }
}

impl From<Carrier4> for [f64; 4] {
    fn from(c: Carrier4) -> Self {
        c.components()
    }
}

/// Euclidean dot product in R⁴.
#[inline]
pub fn inner(u: &Carrier4, v: &Carrier4) -> f64 {
    u.v1 * v.v1 + u.v2 * v.v2 + u.v3 * v.v3 + u.v0 * v.v0
}

/// Cosine of the angle between two nonzero carriers.
#[inline]
pub fn cosine(u: &Carrier4, v: &Carrier4) -> f64 {
    inner(u, v) / (u.euclidean_norm * v.euclidean_norm)
}

/// A point drawn by [`sample_uniform_sphere`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpherePoint {
    S2(Direction),
    S3(Carrier4),
}

pub fn sample_uniform_sphere(dim: usize, rng: &mut RngStream) -> Result<SpherePoint> {
    match dim {
        3 => Ok(SpherePoint::S2(sample_s2(rng))),
        4 => Ok(SpherePoint::S3(sample_s3(rng))),
        d => Err(Error::Dimension(d)),
    }
}

/// Uniform on S² via normalized Gaussians.
pub fn sample_s2(rng: &mut RngStream) -> Direction {
    loop {
        let (x, y, z) = (
            rng.standard_normal(),
            rng.standard_normal(),
            rng.standard_normal(),
        );
        let n2 = x * x + y * y + z * z;
        if n2 > 1e-200 {
            let n = n2.sqrt();
            return Direction {
                x: x / n,
                y: y / n,
                z: z / n,
            };
        }
    }
}

/// Uniform on S³ via normalized Gaussians.
pub fn sample_s3(rng: &mut RngStream) -> Carrier4 {
    loop {
        let c = Carrier4::new(
            rng.standard_normal(),
            rng.standard_normal(),
            rng.standard_normal(),
            rng.standard_normal(),
        );
        if c.euclidean_norm > 1e-100 {
            let [a, b, cc, d] = c.components();
            let n = c.euclidean_norm;
            return Carrier4::new(a / n, b / n, cc / n, d / n);
        }
    }
}

/// Draws λ ∈ S³ with density proportional to `|ŵ·λ|`, `ŵ = w/‖w‖`.
pub fn rejection_sample_biased(w: &Carrier4, rng: &mut RngStream) -> Result<Carrier4> {
    rejection_sample_biased_counted(w, rng, DEFAULT_REJECTION_CAP).map(|(l, _)| l)
}

/// As [`rejection_sample_biased`], also returning the number of attempts
/// consumed (≥ 1).
pub fn rejection_sample_biased_counted(
    w: &Carrier4,
    rng: &mut RngStream,
    cap: u64,
) -> Result<(Carrier4, u64)> {
    let w_hat = w.normalized()?;
    for attempt in 1..=cap {
        let lambda = sample_s3(rng);
        let t = rng.uniform();
        if t < inner(&w_hat, &lambda).abs() {
            return Ok((lambda, attempt));
        }
    }
    Err(Error::SamplingFailure { cap })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(label: u64) -> RngStream {
        RngStream::new(0xD1CE, StreamLabel::domain(label))
    }

    #[test]
    fn sgn_examples() {
        assert_eq!(sgn(0.0).unwrap(), Sign::Plus);
        assert_eq!(sgn(-0.0).unwrap(), Sign::Plus);
        assert_eq!(sgn(-0.3).unwrap(), Sign::Minus);
        assert_eq!(sgn(1e-300).unwrap(), Sign::Plus);
        assert_eq!(sgn(f64::MIN_POSITIVE / 2.0).unwrap(), Sign::Plus);
    }

    #[test]
    fn sgn_rejects_non_finite() {
        assert!(matches!(sgn(f64::NAN), Err(Error::NonFinite(_))));
        assert!(sgn(f64::INFINITY).is_err());
        assert!(sgn(f64::NEG_INFINITY).is_err());
    }

    #[test]
    fn sign_algebra() {
        assert_eq!(Sign::Minus * Sign::Minus, Sign::Plus);
        assert_eq!(Sign::Plus * Sign::Minus, Sign::Minus);
        assert_eq!(-Sign::Plus, Sign::Minus);
        assert_eq!(Sign::from_parity(true), Sign::Minus);
    }

    #[test]
    fn inner_examples() {
        let e0 = Carrier4::new(1.0, 0.0, 0.0, 0.0);
        let e1 = Carrier4::new(0.0, 1.0, 0.0, 0.0);
        assert_eq!(inner(&e0, &e0), 1.0);
        assert_eq!(inner(&e0, &e1), 0.0);
        let p = Carrier4::new(1.0, 1.0, 0.0, 0.0);
        let m = Carrier4::new(1.0, -1.0, 0.0, 0.0);
        assert_eq!(inner(&p, &m), 0.0);
    }

    #[test]
    fn direction_validation() {
        assert!(Direction::new(1.0, 0.0, 0.0).is_ok());
        assert!(matches!(
            Direction::new(1.0, 1e-5, 0.0),
            Err(Error::NotUnit { .. })
        ));
        assert!(Direction::normalize(0.0, 0.0, 0.0).is_err());
        let d = Direction::normalize(3.0, 4.0, 0.0).unwrap();
        assert!((d.norm() - 1.0).abs() < UNIT_TOL);
    }

    #[test]
    fn carrier_norm_cached() {
        let c = Carrier4::new(1.0, 2.0, 3.0, 4.0);
        assert!((c.euclidean_norm() - 30f64.sqrt()).abs() < 1e-12);
        let u = c.normalized().unwrap();
        assert!(u.is_unit());
        assert!(Carrier4::new(0.0, 0.0, 0.0, 0.0).normalized().is_err());
    }

    #[test]
    fn sphere_draws_are_unit() {
        let mut r = rng(1);
        for _ in 0..10_000 {
            assert!(sample_s3(&mut r).is_unit());
            assert!((sample_s2(&mut r).norm() - 1.0).abs() < UNIT_TOL);
        }
        assert!(matches!(
            sample_uniform_sphere(5, &mut r),
            Err(Error::Dimension(5))
        ));
    }

    #[test]
    fn sphere_draw_is_deterministic() {
        let a = sample_s3(&mut rng(2));
        let b = sample_s3(&mut rng(2));
        assert_eq!(a, b);
    }

    #[test]
    fn biased_sample_invariant_under_scaling() {
        let w = Carrier4::new(0.3, -0.2, 0.5, 0.1);
        let a = rejection_sample_biased(&w, &mut rng(3)).unwrap();
        let b = rejection_sample_biased(&w.scaled(7.0), &mut rng(3)).unwrap();
        // Same stream, same acceptance decisions: identical draw.
        assert_eq!(a, b);
    }

    #[test]
    fn biased_sampler_rejects_zero_vector() {
        let w = Carrier4::new(0.0, 0.0, 0.0, 0.0);
        assert!(rejection_sample_biased(&w, &mut rng(4)).is_err());
    }

    #[test]
    fn biased_sampler_cap() {
        // With cap = 1 some draws must fail.
        let w = Carrier4::new(0.0, 0.0, 0.0, 1.0);
        let mut r = rng(5);
        let failures = (0..100)
            .filter(|_| rejection_sample_biased_counted(&w, &mut r, 1).is_err())
            .count();
        assert!(failures > 0);
    }
}
