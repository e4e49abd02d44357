//! Exact half-integer labels, state vectors and Euler angles.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported `2J`. Beyond J = 25/2 the log-space d-matrix sum loses
/// the 1e-11 unitarity budget.
pub const MAX_TWO_J: i32 = 25;

/// A half-integer stored as twice its value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct HalfInt {
    twice: i32,
}

impl HalfInt {
    pub const fn from_twice(twice: i32) -> Self {
        Self { twice }
    }

    /// A spin label `J` with `2J = twice`.
    pub fn spin(twice: i32) -> Result<Self> {
        if (1..=MAX_TWO_J).contains(&twice) {
            Ok(Self { twice })
        } else {
            Err(Error::InvalidSpin(twice))
        }
    }

    pub const fn twice(self) -> i32 {
        self.twice
    }

    pub fn value(self) -> f64 {
        f64::from(self.twice) / 2.0
    }

    pub fn is_integer(self) -> bool {
        self.twice % 2 == 0
    }

    /// Number of states in the multiplet, `2J + 1`.
    pub fn dim(self) -> usize {
        (self.twice + 1) as usize
    }

    /// Magnetic labels `-J, -J+1, ..., J` in ascending order.
    pub fn projections(self) -> impl DoubleEndedIterator<Item = HalfInt> + ExactSizeIterator {
        let j = self.twice;
        (0..j + 1).map(move |i| HalfInt::from_twice(-j + 2 * i))
    }
}

impl std::ops::Neg for HalfInt {
    type Output = HalfInt;
    fn neg(self) -> HalfInt {
        HalfInt::from_twice(-self.twice)
    }
}

impl fmt::Display for HalfInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.twice % 2 == 0 {
            write!(f, "{}", self.twice / 2)
        } else {
            write!(f, "{}/2", self.twice)
        }
    }
}

/// Parses `"3"`, `"-2"` or `"3/2"`.
impl std::str::FromStr for HalfInt {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("not a half-integer: {s:?}"));
        match s.split_once('/') {
            None => {
                let v: i32 = s.trim().parse().map_err(|_| bad())?;
                v.checked_mul(2).map(HalfInt::from_twice).ok_or_else(bad)
            }
            Some((num, "2")) => {
                let v: i32 = num.trim().parse().map_err(|_| bad())?;
                if v % 2 == 0 {
                    return Err(bad());
                }
                Ok(HalfInt::from_twice(v))
            }
            Some(_) => Err(bad()),
        }
    }
}

/// Checks that `m` is a magnetic label of the multiplet `j`.
pub fn check_pair(j: HalfInt, m: HalfInt) -> Result<()> {
    let ok = j.twice >= 0 && m.twice.abs() <= j.twice && (j.twice - m.twice) % 2 == 0;
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidPair {
            two_j: j.twice,
            two_m: m.twice,
        })
    }
}

/// Selects the extremal weight vector `v_{+J}` or `v_{-J}` that generates the
/// coherent-state family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Weight {
    #[default]
    Plus,
    Minus,
}

impl Weight {
    pub fn extremal(self, j: HalfInt) -> HalfInt {
        match self {
            Weight::Plus => j,
            Weight::Minus => -j,
        }
    }
}

/// Euler angles (phi, theta, psi) of the rotation `Rz(phi) Ry(theta) Rz(psi)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EulerAngles {
    pub phi: f64,
    pub theta: f64,
    pub psi: f64,
}

impl EulerAngles {
    pub const IDENTITY: EulerAngles = EulerAngles {
        phi: 0.0,
        theta: 0.0,
        psi: 0.0,
    };

    /// `phi` and `psi` are reduced into `[0, 2pi)`; `theta` must already lie
    /// in `[0, pi]`.
    pub fn new(phi: f64, theta: f64, psi: f64) -> Result<Self> {
        if !(phi.is_finite() && psi.is_finite()) {
            return Err(Error::DomainError(format!(
                "Euler angles must be finite (phi={phi}, psi={psi})"
            )));
        }
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::DomainError(format!("theta={theta} outside [0, pi]")));
        }
        Ok(Self {
            phi: phi.rem_euclid(2.0 * PI),
            theta,
            psi: psi.rem_euclid(2.0 * PI),
        })
    }

    /// Uniformly distributed rotation (Haar measure on SO(3)).
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        let phi = rng.random::<f64>() * 2.0 * PI;
        let psi = rng.random::<f64>() * 2.0 * PI;
        let cos_theta: f64 = 2.0 * rng.random::<f64>() - 1.0;
        Self {
            phi,
            theta: cos_theta.clamp(-1.0, 1.0).acos(),
            psi,
        }
    }

    /// Angles of the inverse rotation, using `Ry(-theta) = Rz(pi) Ry(theta) Rz(-pi)`.
    /// For half-integer spin the represented operator may differ from the
    /// exact inverse by the global sign `(-1)^{2J}`.
    pub fn inverse(self) -> Self {
        Self {
            phi: (PI - self.psi).rem_euclid(2.0 * PI),
            theta: self.theta,
            psi: (-PI - self.phi).rem_euclid(2.0 * PI),
        }
    }
}

/// A pure state of a spin-J multiplet. Amplitudes are indexed by ascending
/// `m = -J, ..., J` and are not normalized implicitly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StateWire", into = "StateWire")]
pub struct SpinState {
    j: HalfInt,
    amplitudes: Vec<Complex64>,
}

impl SpinState {
    pub fn new(j: HalfInt, amplitudes: Vec<Complex64>) -> Result<Self> {
        let j = HalfInt::spin(j.twice())?;
        if amplitudes.len() != j.dim() {
            return Err(Error::DimensionMismatch {
                two_j: j.twice(),
                expected: j.dim(),
                got: amplitudes.len(),
            });
        }
        if let Some(index) = amplitudes
            .iter()
            .position(|c| !(c.re.is_finite() && c.im.is_finite()))
        {
            return Err(Error::NonFinite { index });
        }
        Ok(Self { j, amplitudes })
    }

    /// Convenience constructor from real amplitudes.
    pub fn from_real(j: HalfInt, amplitudes: &[f64]) -> Result<Self> {
        Self::new(
            j,
            amplitudes.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// The canonical basis vector `v_m`.
    pub fn basis(j: HalfInt, m: HalfInt) -> Result<Self> {
        let j = HalfInt::spin(j.twice())?;
        check_pair(j, m)?;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); j.dim()];
        amplitudes[index_of(j, m)] = Complex64::new(1.0, 0.0);
        Ok(Self { j, amplitudes })
    }

    pub fn j(&self) -> HalfInt {
        self.j
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    /// Amplitude `c_m`.
    pub fn amplitude(&self, m: HalfInt) -> Complex64 {
        self.amplitudes[index_of(self.j, m)]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        // Scaled to avoid overflow or underflow of the squared norm.
        let scale = self
            .amplitudes
            .iter()
            .map(|c| c.re.abs().max(c.im.abs()))
            .fold(0.0, f64::max);
        if scale == 0.0 {
            return 0.0;
        }
        let s: f64 = self.amplitudes.iter().map(|c| (c / scale).norm_sqr()).sum();
        scale * s.sqrt()
    }

    pub fn normalize(&self) -> Result<Self> {
        let n = self.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroVector);
        }
        let amplitudes = self.amplitudes.iter().map(|c| c / n).collect();
        Ok(Self {
            j: self.j,
            amplitudes,
        })
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            j: self.j,
            amplitudes: self.amplitudes.iter().map(|c| c * factor).collect(),
        }
    }

    /// The state with amplitudes `c'_m = c_{-m}`.
    pub fn reversed(&self) -> Self {
        let mut amplitudes = self.amplitudes.clone();
        amplitudes.reverse();
        Self {
            j: self.j,
            amplitudes,
        }
    }

    /// `(self, other)`: conjugate-linear in `self`, linear in `other`.
    pub fn inner(&self, other: &SpinState) -> Result<Complex64> {
        if self.j != other.j {
            return Err(Error::SpinMismatch {
                left: self.j.twice(),
                right: other.j.twice(),
            });
        }
        Ok(self
            .amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }

    pub fn to_json(&self) -> String {
        crate::json::to_string(self)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Unit-norm state drawn from the unitarily invariant distribution:
/// independent standard complex Gaussians, then normalized.
pub fn random_haar_state(j: HalfInt, seed: u64) -> Result<SpinState> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    random_haar_state_with(j, &mut rng)
}

pub fn random_haar_state_with<R: Rng + ?Sized>(j: HalfInt, rng: &mut R) -> Result<SpinState> {
    let j = HalfInt::spin(j.twice())?;
    loop {
        let amplitudes: Vec<Complex64> = (0..j.dim())
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let state = SpinState { j, amplitudes };
        // A zero draw has probability zero; resample rather than fail.
        if let Ok(u) = state.normalize() {
            return Ok(u);
        }
    }
}

pub(crate) fn index_of(j: HalfInt, m: HalfInt) -> usize {
    ((m.twice() + j.twice()) / 2) as usize
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StateWire {
    two_j: i32,
    amplitudes: Vec<[f64; 2]>,
}

impl TryFrom<StateWire> for SpinState {
    type Error = Error;
    fn try_from(w: StateWire) -> Result<Self> {
        let j = HalfInt::spin(w.two_j)?;
        SpinState::new(
            j,
            w.amplitudes
                .into_iter()
                .map(|[re, im]| Complex64::new(re, im))
                .collect(),
        )
    }
}

impl From<SpinState> for StateWire {
    fn from(s: SpinState) -> Self {
        StateWire {
            two_j: s.j.twice(),
            amplitudes: s.amplitudes.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}
