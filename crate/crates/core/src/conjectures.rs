//! Margins of the entropy and moment inequalities, randomized and grid scans,
//! and numerical entropy minimization.
//!
//! Every margin is oriented so that a negative value is a violation.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_forms::i_p_basis_closed;
use crate::error::{Error, Result};
use crate::grid::{GridSize, SphereGrid};
use crate::optimize::{nelder_mead, NelderMeadConfig};
use crate::special::{ln_gamma, log_beta, log_binomial};
use crate::sphere::{husimi_q, HusimiKernel};
use crate::spin::{random_haar_state_with, HalfInt, SpinState, Weight};

/// Margins below `-DEFAULT_VIOLATION_TOLERANCE` are violations.
pub const DEFAULT_VIOLATION_TOLERANCE: f64 = 1e-6;

/// `S(J) = 2J/(2J+1)`, the coherent-state entropy.
pub fn coherent_entropy(j: HalfInt) -> f64 {
    let two_j = f64::from(j.twice());
    two_j / (two_j + 1.0)
}

/// `(2J+1)/(2pJ+1)`, the coherent-state moment.
pub fn coherent_moment(j: HalfInt, p: f64) -> f64 {
    let two_j = f64::from(j.twice());
    (two_j + 1.0) / (p * two_j + 1.0)
}

fn check_p_at_least_one(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::BadExponent(p))
    }
}

fn lieb_margin_with(kernel: &HusimiKernel, u: &SpinState) -> Result<f64> {
    Ok(kernel.entropy(u)? - coherent_entropy(u.j()))
}

fn generalized_margin_with(kernel: &HusimiKernel, u: &SpinState, p: f64) -> Result<f64> {
    check_p_at_least_one(p)?;
    Ok(coherent_moment(u.j(), p) - kernel.moment(u, p)?)
}

/// `S_cl(u) - 2J/(2J+1)`.
pub fn lieb_margin(u: &SpinState, grid: &SphereGrid) -> Result<f64> {
    let unit = u.normalize()?;
    lieb_margin_with(&HusimiKernel::new(unit.j(), grid, Weight::Plus)?, &unit)
}

/// `(2J+1)/(2pJ+1) - I_p(u)` for `p >= 1`.
pub fn generalized_margin(u: &SpinState, p: f64, grid: &SphereGrid) -> Result<f64> {
    check_p_at_least_one(p)?;
    let unit = u.normalize()?;
    generalized_margin_with(&HusimiKernel::new(unit.j(), grid, Weight::Plus)?, &unit, p)
}

fn harmonic_tail(from: u64, to: u64) -> BigRational {
    (from..=to).fold(BigRational::zero(), |acc, r| {
        acc + BigRational::new(BigInt::from(1), BigInt::from(r))
    })
}

/// `k (1/(k+1) + ... + 1/(k+j)) + j (1/(j+1) + ... + 1/(j+k)) - ln binom(k+j, k)`.
/// The harmonic part is exact; there is one conversion to `f64`.
pub fn harmonic_margin(k: u64, j: u64) -> f64 {
    let (lo, hi) = (k.min(j), k.max(j));
    let n = lo + hi;
    let lhs = BigRational::from_integer(BigInt::from(lo)) * harmonic_tail(lo + 1, n)
        + BigRational::from_integer(BigInt::from(hi)) * harmonic_tail(hi + 1, n);
    lhs.to_f64().expect("finite rational") - log_binomial(n, lo)
}

/// `p ln((a+b+1) B(a+1, b+1)) - ln(((a+b)p+1) B(ap+1, bp+1))`.
///
/// Proven nonnegative for `a = b`; other values are data only.
pub fn beta_margin(a: f64, b: f64, p: f64) -> Result<f64> {
    if !(a >= 0.0 && b >= 0.0 && a.is_finite() && b.is_finite()) {
        return Err(Error::DomainError(format!(
            "beta_margin needs a, b >= 0, got a={a} b={b}"
        )));
    }
    if !(p >= 1.0 && p.is_finite()) {
        return Err(Error::DomainError(format!(
            "beta_margin needs p >= 1, got {p}"
        )));
    }
    let left = p * ((a + b + 1.0).ln() + log_beta(a + 1.0, b + 1.0)?);
    let right = ((a + b) * p + 1.0).ln() + log_beta(a * p + 1.0, b * p + 1.0)?;
    Ok(left - right)
}

/// `|2^{2b}/pi * int_{-pi/2}^{pi/2} cos^{2b} phi dphi - 1/((2b+1) B(b+1, b+1))|`.
///
/// The integral uses tanh-sinh quadrature, which is insensitive to the
/// `(pi/2 - |phi|)^{2b}` endpoint behaviour for non-integer `b`.
pub fn jensen_identity_check(b: f64) -> Result<f64> {
    if !(b >= 0.0 && b.is_finite()) {
        return Err(Error::DomainError(format!(
            "jensen_identity_check needs b >= 0, got {b}"
        )));
    }
    let integral = cos_power_integral(2.0 * b);
    let lhs = (2.0 * b * std::f64::consts::LN_2).exp() * integral / PI;
    let rhs = (-(2.0 * b + 1.0).ln() - log_beta(b + 1.0, b + 1.0)?).exp();
    Ok((lhs - rhs).abs())
}

/// `int_{-pi/2}^{pi/2} cos^e(phi) dphi` by tanh-sinh, using
/// `cos(pi/2 * y) = sin(pi/2 * (1 - |y|))` with `1 - tanh(u) = e^{-u}/cosh(u)`.
fn cos_power_integral(e: f64) -> f64 {
    let h = 1.0 / 64.0;
    let half_pi = PI / 2.0;
    let term = |t: f64| -> f64 {
        let u = half_pi * t.sinh();
        let w = half_pi * half_pi * t.cosh() / (u.cosh() * u.cosh());
        let gap = (-u.abs()).exp() / u.cosh();
        let c = (half_pi * gap).sin();
        if c == 0.0 {
            if e == 0.0 {
                w
            } else {
                0.0
            }
        } else {
            w * c.powf(e)
        }
    };
    let mut sum = term(0.0);
    for k in 1..=(4.5 / h) as i32 {
        let t = f64::from(k) * h;
        sum += 2.0 * term(t);
    }
    h * sum
}

/// Maximum of `Q` for `u / ||u||`: the best grid node, then a local simplex
/// ascent in `(theta, phi)`. Equals one exactly on coherent states.
pub fn coherence_witness(u: &SpinState, grid: &SphereGrid) -> Result<f64> {
    let unit = u.normalize()?;
    coherence_witness_with(&HusimiKernel::new(unit.j(), grid, Weight::Plus)?, &unit)
}

fn coherence_witness_with(kernel: &HusimiKernel, unit: &SpinState) -> Result<f64> {
    let (q_node, i, k) = kernel.max_node(unit)?;
    let grid = kernel.grid();
    let start = [grid.x_nodes()[i].acos(), grid.phi(k)];
    let objective = |x: &[f64]| -> f64 {
        let (theta, phi) = fold_polar(x[0], x[1]);
        husimi_q(unit, theta, phi, Weight::Plus).map_or(f64::NAN, |q| -q)
    };
    let cfg = NelderMeadConfig {
        initial_step: PI / grid.n_theta() as f64,
        f_tol: 1e-16,
        x_tol: 1e-10,
        max_evals: 4000,
    };
    let r = nelder_mead(objective, &start, &cfg);
    Ok(q_node.max(-r.f))
}

/// Maps arbitrary `(theta, phi)` onto the same point with `theta` in `[0, pi]`.
fn fold_polar(theta: f64, phi: f64) -> (f64, f64) {
    let t = theta.rem_euclid(2.0 * PI);
    if t > PI {
        (2.0 * PI - t, (phi + PI).rem_euclid(2.0 * PI))
    } else {
        (t, phi.rem_euclid(2.0 * PI))
    }
}

/// A margin below the violation threshold that survived grid refinement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Violation {
    pub state: SpinState,
    /// `1` labels the entropy margin.
    pub p: f64,
    pub margin: f64,
}

/// Result of a randomized scan over states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ReportWire", into = "ReportWire")]
pub struct ScanReport {
    pub j: HalfInt,
    pub p_values: Vec<f64>,
    pub sample_count: u64,
    pub seed: u64,
    pub min_margin: f64,
    pub argmin_state: SpinState,
    pub grid: GridSize,
    pub violations: Vec<Violation>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ReportWire {
    j: String,
    p_values: Vec<f64>,
    sample_count: u64,
    seed: u64,
    min_margin: f64,
    argmin_state: SpinState,
    grid: GridSize,
    violations: Vec<Violation>,
}

impl TryFrom<ReportWire> for ScanReport {
    type Error = Error;
    fn try_from(w: ReportWire) -> Result<Self> {
        let j: HalfInt = w.j.parse()?;
        let j = HalfInt::spin(j.twice())?;
        if w.argmin_state.j() != j || w.violations.iter().any(|v| v.state.j() != j) {
            return Err(Error::Parse("state spin differs from report spin".into()));
        }
        if w.grid.0 < 2 || w.grid.1 < 2 {
            return Err(Error::BadGridSize {
                n_theta: w.grid.0,
                n_phi: w.grid.1,
            });
        }
        Ok(ScanReport {
            j,
            p_values: w.p_values,
            sample_count: w.sample_count,
            seed: w.seed,
            min_margin: w.min_margin,
            argmin_state: w.argmin_state,
            grid: w.grid,
            violations: w.violations,
        })
    }
}

impl From<ScanReport> for ReportWire {
    fn from(r: ScanReport) -> Self {
        ReportWire {
            j: r.j.to_string(),
            p_values: r.p_values,
            sample_count: r.sample_count,
            seed: r.seed,
            min_margin: r.min_margin,
            argmin_state: r.argmin_state,
            grid: r.grid,
            violations: r.violations,
        }
    }
}

impl ScanReport {
    pub fn to_json(&self) -> String {
        crate::json::to_string(self)
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        serde_json::from_slice(bytes).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Margins of one state: entropy first, then one per `p`.
fn state_margins(kernel: &HusimiKernel, u: &SpinState, p_values: &[f64]) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(p_values.len() + 1);
    out.push(lieb_margin_with(kernel, u)?);
    for &p in p_values {
        out.push(generalized_margin_with(kernel, u, p)?);
    }
    Ok(out)
}

/// Evaluates the entropy margin and the moment margins for each `p` on
/// `count` Haar-random states drawn from `seed`.
pub fn scan_lieb(
    j: HalfInt,
    count: usize,
    seed: u64,
    p_values: &[f64],
    grid: &SphereGrid,
) -> Result<ScanReport> {
    let j = HalfInt::spin(j.twice())?;
    if count == 0 {
        return Err(Error::DomainError("scan needs at least one sample".into()));
    }
    let states = haar_sample(j, count, seed)?;
    scan_states(
        j,
        &states,
        seed,
        p_values,
        grid,
        DEFAULT_VIOLATION_TOLERANCE,
    )
}

/// The `count` states `scan_lieb` draws for `seed`, in sample order.
pub fn haar_sample(j: HalfInt, count: usize, seed: u64) -> Result<Vec<SpinState>> {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| random_haar_state_with(j, &mut rng))
        .collect()
}

/// Scan over explicit states. Work is spread over the current rayon pool;
/// the minimum is taken in `(margin, sample index)` order so the report does
/// not depend on the number of threads. Margins below `-tolerance` are
/// recomputed on the doubled grid before they are reported.
pub fn scan_states(
    j: HalfInt,
    states: &[SpinState],
    seed: u64,
    p_values: &[f64],
    grid: &SphereGrid,
    tolerance: f64,
) -> Result<ScanReport> {
    let j = HalfInt::spin(j.twice())?;
    if states.is_empty() {
        return Err(Error::DomainError("scan needs at least one sample".into()));
    }
    for &p in p_values {
        check_p_at_least_one(p)?;
    }
    let units = states
        .iter()
        .map(|u| {
            if u.j() != j {
                return Err(Error::SpinMismatch {
                    left: u.j().twice(),
                    right: j.twice(),
                });
            }
            u.normalize()
        })
        .collect::<Result<Vec<_>>>()?;
    let kernel = HusimiKernel::new(j, grid, Weight::Plus)?;
    let mut margins: Vec<Vec<f64>> = units
        .par_iter()
        .map(|u| state_margins(&kernel, u, p_values))
        .collect::<Result<_>>()?;

    let suspicious = margins.iter().any(|ms| ms.iter().any(|&m| m < -tolerance));
    if suspicious {
        let fine = HusimiKernel::new(j, &grid.doubled(), Weight::Plus)?;
        for (u, ms) in units.iter().zip(margins.iter_mut()) {
            if ms.iter().any(|&m| m < -tolerance) {
                *ms = state_margins(&fine, u, p_values)?;
            }
        }
    }

    let mut best = (f64::INFINITY, 0usize);
    let mut violations = Vec::new();
    for (idx, ms) in margins.iter().enumerate() {
        for (slot, &m) in ms.iter().enumerate() {
            if m.total_cmp(&best.0).then(idx.cmp(&best.1)).is_lt() {
                best = (m, idx);
            }
            if m < -tolerance {
                violations.push(Violation {
                    state: units[idx].clone(),
                    p: if slot == 0 { 1.0 } else { p_values[slot - 1] },
                    margin: m,
                });
            }
        }
    }
    Ok(ScanReport {
        j,
        p_values: p_values.to_vec(),
        sample_count: units.len() as u64,
        seed,
        min_margin: best.0,
        argmin_state: units[best.1].clone(),
        grid: grid.size(),
        violations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BetaRow {
    pub a: f64,
    pub b: f64,
    pub p: f64,
    pub margin: f64,
}

/// `beta_margin` over the product of the given values, in `(a, b, p)`
/// lexicographic order.
pub fn beta_scan(a_values: &[f64], b_values: &[f64], p_values: &[f64]) -> Result<Vec<BetaRow>> {
    let mut rows = Vec::with_capacity(a_values.len() * b_values.len() * p_values.len());
    for &a in a_values {
        for &b in b_values {
            for &p in p_values {
                rows.push(BetaRow {
                    a,
                    b,
                    p,
                    margin: beta_margin(a, b, p)?,
                });
            }
        }
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BasisRow {
    pub two_j: i32,
    pub m: f64,
    pub p: f64,
    pub margin: f64,
}

/// Quadrature moment margins of every basis state `v_m` of each multiplet.
pub fn basis_scan(
    two_j_values: &[i32],
    p_values: &[f64],
    grid: &SphereGrid,
) -> Result<Vec<BasisRow>> {
    let mut rows = Vec::new();
    for &two_j in two_j_values {
        let j = HalfInt::spin(two_j)?;
        let kernel = HusimiKernel::new(j, grid, Weight::Plus)?;
        for m in j.projections() {
            let v = SpinState::basis(j, m)?;
            for &p in p_values {
                rows.push(BasisRow {
                    two_j,
                    m: m.value(),
                    p,
                    margin: generalized_margin_with(&kernel, &v, p)?,
                });
            }
        }
    }
    Ok(rows)
}

/// Closed-form counterpart of the `basis_scan` margin.
pub fn basis_margin_closed(j: HalfInt, m: HalfInt, p: f64) -> Result<f64> {
    check_p_at_least_one(p)?;
    Ok(coherent_moment(j, p) - i_p_basis_closed(j, m, p)?)
}

/// `ln((2J+1)/(2pJ+1) / I_p(v_m))` through Gamma functions, which at integer
/// `(J+m, J-m)` equals `beta_margin(J+m, J-m, p)`.
pub fn basis_log_ratio(j: HalfInt, m: HalfInt, p: f64) -> Result<f64> {
    check_p_at_least_one(p)?;
    let k = f64::from(j.twice() + m.twice()) / 2.0;
    let l = f64::from(j.twice() - m.twice()) / 2.0;
    let two_j = k + l;
    let ln_binom = ln_gamma(two_j + 1.0)? - ln_gamma(k + 1.0)? - ln_gamma(l + 1.0)?;
    Ok(
        -(p * ln_binom) - ln_gamma(p * k + 1.0)? - ln_gamma(p * l + 1.0)?
            + ln_gamma(p * two_j + 1.0)?,
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinimizeResult {
    pub state: SpinState,
    pub entropy: f64,
    /// False if the best run hit its evaluation budget before the simplex
    /// collapsed.
    pub converged: bool,
}

fn params_to_state(j: HalfInt, x: &[f64]) -> Result<SpinState> {
    let amps = x
        .chunks_exact(2)
        .map(|c| num_complex::Complex64::new(c[0], c[1]))
        .collect();
    SpinState::new(j, amps)?.normalize()
}

/// Minimizes the classical entropy over states of spin `j` by simplex
/// descent on the raw real and imaginary parts. Each restart begins at a
/// Haar-random state and is polished by one fresh simplex around its best
/// point.
pub fn minimize_entropy(
    j: HalfInt,
    restarts: usize,
    seed: u64,
    grid: &SphereGrid,
) -> Result<MinimizeResult> {
    let j = HalfInt::spin(j.twice())?;
    if restarts == 0 {
        return Err(Error::DomainError(
            "minimize_entropy needs at least one restart".into(),
        ));
    }
    let kernel = HusimiKernel::new(j, grid, Weight::Plus)?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let starts = (0..restarts)
        .map(|_| random_haar_state_with(j, &mut rng))
        .collect::<Result<Vec<_>>>()?;
    let objective = |x: &[f64]| -> f64 {
        params_to_state(j, x)
            .and_then(|u| kernel.entropy(&u))
            .unwrap_or(f64::NAN)
    };
    let dim = 2 * j.dim();
    let cfg = NelderMeadConfig {
        initial_step: 0.25,
        f_tol: 1e-13,
        x_tol: 1e-7,
        max_evals: 4000 * dim,
    };
    let runs: Vec<(Vec<f64>, f64, bool)> = starts
        .par_iter()
        .map(|u| {
            let x0: Vec<f64> = u.amplitudes().iter().flat_map(|c| [c.re, c.im]).collect();
            let first = nelder_mead(objective, &x0, &cfg);
            let polish = nelder_mead(
                objective,
                &first.x,
                &NelderMeadConfig {
                    initial_step: 0.02,
                    ..cfg
                },
            );
            if polish.f <= first.f {
                (polish.x, polish.f, polish.converged)
            } else {
                (first.x, first.f, first.converged)
            }
        })
        .collect();
    let (x, entropy, converged) = runs
        .into_iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.1.total_cmp(&b.1).then(ia.cmp(ib)))
        .map(|(_, r)| r)
        .expect("at least one restart");
    Ok(MinimizeResult {
        state: params_to_state(j, &x)?,
        entropy,
        converged,
    })
}
