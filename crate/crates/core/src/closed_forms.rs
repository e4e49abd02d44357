//! Analytic values of the moments and entropies.
//!
//! J = 1 states are classified by the rotation-invariant parameter
//! `a(u) = |c_0^2 - 2 c_{-1} c_{+1}| / ||u||^2` in `[0, 1]`; `a = 0` is the
//! coherent orbit and `a = 1` the orbit of `v_0`. Canonical basis states of
//! any spin have Gamma-function moments. These functions are the oracles the
//! quadrature is checked against, and vice versa.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::grid::gauss_legendre_nodes;
use crate::numeric::CompensatedSum;
use crate::special::{hyp_f, ln_gamma, ln_hyp_f_at_one, log_binomial, HypergeomSeriesConfig};
use crate::spin::{check_pair, HalfInt, SpinState};

const SPIN_ONE: HalfInt = HalfInt::from_twice(2);

/// The J = 1 orbit parameter.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct OrbitParamA(f64);

impl OrbitParamA {
    pub fn new(a: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&a) {
            Ok(Self(a))
        } else {
            Err(Error::DomainError(format!(
                "orbit parameter a={a} outside [0, 1]"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_unit_interval(a: f64) -> Result<()> {
    OrbitParamA::new(a).map(|_| ())
}

fn check_positive_exponent(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::BadExponent(p))
    }
}

/// `a(u)` of a J = 1 state, computed on `u / ||u||`.
pub fn orbit_param_a(u: &SpinState) -> Result<OrbitParamA> {
    if u.j() != SPIN_ONE {
        return Err(Error::WrongSpin(u.j().twice()));
    }
    let unit = u.normalize()?;
    let c = unit.amplitudes();
    let a = (c[1] * c[1] - 2.0 * c[0] * c[2]).norm();
    // rounding can push |.| a hair above one for a = 1 states
    Ok(OrbitParamA(a.min(1.0)))
}

/// `sqrt(1-a) v_{-1} + sqrt(a) v_0`.
pub fn stratum_representative(a: f64) -> Result<SpinState> {
    check_unit_interval(a)?;
    SpinState::from_real(SPIN_ONE, &[(1.0 - a).sqrt(), a.sqrt(), 0.0])
}

/// `I_p` on the coherent orbit at J = 1: `3 / (2p + 1)`.
pub fn i_p_o0(p: f64) -> Result<f64> {
    check_positive_exponent(p)?;
    Ok(3.0 / (2.0 * p + 1.0))
}

/// `I_p` on the orbit of `v_0` at J = 1: `3/(2p+1) * 2^p Gamma(p+1)^2 / Gamma(2p+1)`.
pub fn i_p_o1(p: f64) -> Result<f64> {
    check_positive_exponent(p)?;
    let ln = (3.0 / (2.0 * p + 1.0)).ln() + p * std::f64::consts::LN_2 + 2.0 * ln_gamma(p + 1.0)?
        - ln_gamma(2.0 * p + 1.0)?;
    Ok(ln.exp())
}

const REP_NODES: usize = 128;

/// `I_p^1` of the stratum with parameter `a` in `(0, 1)` from the
/// one-dimensional representation obtained by integrating out `phi`:
///
/// `3 [ (1-a)^{p+1}/(2a) * int_0^1 (c t + 1)^{-2(p+1)} F(t) dt
///    + (2a)^{2p+1}/(1-a)^{p+1} * int_0^1 (1 + t/c)^{-2(p+1)} t^p F(t) dt ]`
///
/// with `c = (1-a)/(2a)` and `F(t) = F(-p, -p; 1; t)`. Both integrals use
/// Gauss-Legendre in `s = sqrt(t)`, which smooths the `t^p` endpoint.
pub fn i_p_oa_integral_rep(p: f64, a: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(Error::BadExponent(p));
    }
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::DomainError(format!(
            "integral representation needs a in (0, 1), got {a}; use the endpoint closed forms"
        )));
    }
    let cfg = HypergeomSeriesConfig::default();
    let c = (1.0 - a) / (2.0 * a);
    let (nodes, weights) = gauss_legendre_nodes(REP_NODES);
    let mut lower = CompensatedSum::new();
    let mut upper = CompensatedSum::new();
    for (&x, &w) in nodes.iter().zip(&weights) {
        let s = 0.5 * (x + 1.0);
        let t = s * s;
        let jac = 0.5 * w * 2.0 * s;
        let f = hyp_f(p, t, &cfg)?;
        lower.add(jac * (c * t + 1.0).powf(-2.0 * (p + 1.0)) * f);
        upper.add(jac * (1.0 + t / c).powf(-2.0 * (p + 1.0)) * t.powf(p) * f);
    }
    let first = ((p + 1.0) * (1.0 - a).ln() - (2.0 * a).ln()).exp() * lower.value();
    let second =
        ((2.0 * p + 1.0) * (2.0 * a).ln() - (p + 1.0) * (1.0 - a).ln()).exp() * upper.value();
    Ok(3.0 * (first + second))
}

/// Classical entropy on the J = 1 stratum `a`: `2/3 + a - ln(1 + a)`.
pub fn s_cl_j1(a: f64) -> Result<f64> {
    check_unit_interval(a)?;
    Ok(2.0 / 3.0 + (a - a.ln_1p()))
}

/// `(J+m, J-m)` ordered so that expressions symmetric in `m <-> -m` are
/// evaluated with identical floating-point operations.
fn ordered_split(j: HalfInt, m: HalfInt) -> (u64, u64) {
    let up = ((j.twice() + m.twice()) / 2) as u64;
    let down = ((j.twice() - m.twice()) / 2) as u64;
    (up.min(down), up.max(down))
}

/// `I_p^J(v_m) = (2J+1)/(2pJ+1) binom(2J, J+m)^p Gamma(p(J-m)+1) Gamma(p(J+m)+1) / Gamma(2pJ+1)`,
/// evaluated in logs.
pub fn i_p_basis_closed(j: HalfInt, m: HalfInt, p: f64) -> Result<f64> {
    let j = HalfInt::spin(j.twice())?;
    check_pair(j, m)?;
    check_positive_exponent(p)?;
    Ok(ln_i_p_basis(j, m, p)?.exp())
}

fn ln_i_p_basis(j: HalfInt, m: HalfInt, p: f64) -> Result<f64> {
    let (lo, hi) = ordered_split(j, m);
    let two_j = j.twice() as f64;
    let n = lo + hi;
    Ok((two_j + 1.0).ln() - (p * two_j + 1.0).ln()
        + p * log_binomial(n, lo)
        + ln_gamma(p * lo as f64 + 1.0)?
        + ln_gamma(p * hi as f64 + 1.0)?
        - ln_gamma(p * two_j + 1.0)?)
}

fn harmonic_range(from: u64, to: u64) -> f64 {
    // sum_{r=from}^{to} 1/r, largest terms last
    (from..=to).rev().map(|r| 1.0 / r as f64).sum()
}

/// Classical entropy of the basis state `v_m`:
/// `(J+m) sum_{r=J+m+1}^{2J} 1/r + (J-m) sum_{r=J-m+1}^{2J} 1/r - ln binom(2J, J+m) + 2J/(2J+1)`.
pub fn s_cl_basis(j: HalfInt, m: HalfInt) -> Result<f64> {
    let j = HalfInt::spin(j.twice())?;
    check_pair(j, m)?;
    let (lo, hi) = ordered_split(j, m);
    let n = lo + hi;
    let two_j = n as f64;
    Ok(
        lo as f64 * harmonic_range(lo + 1, n) + hi as f64 * harmonic_range(hi + 1, n)
            - log_binomial(n, lo)
            + two_j / (two_j + 1.0),
    )
}

fn factorial_big(n: u64) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// Exact coefficients of `a^0, ..., a^n` in `I_n^1(a)` for integer `n`,
/// from expanding `Q^n` multinomially, averaging `cos^{2s}` over `phi` and
/// integrating the Beta-type `x` integrals term by term:
///
/// `3/(2n+1) sum_{s,r,t} (-1)^t 2^{s+r} (2n-s-r)! (s+r)! n! (n-s-r)! a^{s+r+t}
///   / ((s!)^2 r! (n-2s-r)! (2n)! (n-s-r-t)! t!)`
///
/// over `0 <= s <= n/2`, `0 <= r <= n-2s`, `0 <= t <= n-s-r`.
pub fn triple_sum_coefficients(n: u32) -> Result<Vec<BigRational>> {
    if !(1..=10).contains(&n) {
        return Err(Error::DomainError(format!(
            "triple sum supports 1 <= n <= 10, got {n}"
        )));
    }
    let n = u64::from(n);
    let f = factorial_big;
    let mut coeffs = vec![BigRational::zero(); n as usize + 1];
    for s in 0..=n / 2 {
        for r in 0..=n - 2 * s {
            let k = n - s - r;
            for t in 0..=k {
                let num = BigInt::from(2u32).pow((s + r) as u32)
                    * f(2 * n - s - r)
                    * f(s + r)
                    * f(n)
                    * f(k);
                let den = f(s) * f(s) * f(r) * f(n - 2 * s - r) * f(2 * n) * f(k - t) * f(t);
                let mut term = BigRational::new(num, den);
                if t % 2 == 1 {
                    term = -term;
                }
                coeffs[(s + r + t) as usize] += term;
            }
        }
    }
    let pref = BigRational::new(BigInt::from(3u32), BigInt::from(2 * n + 1));
    Ok(coeffs.into_iter().map(|c| c * &pref).collect())
}

/// `I_n^1(a)` from [`triple_sum_coefficients`], evaluated by Horner's rule.
pub fn i_n_oa_triple_sum(n: u32, a: f64) -> Result<f64> {
    check_unit_interval(a)?;
    let coeffs = triple_sum_coefficients(n)?;
    Ok(coeffs
        .iter()
        .rev()
        .fold(0.0, |acc, c| acc * a + c.to_f64().expect("finite rational")))
}

/// `a^n P_n(1/a)` by the rescaled recurrence
/// `q_k = ((2k-1) q_{k-1} - (k-1) a^2 q_{k-2}) / k`, finite at `a = 0`.
fn scaled_legendre(n: u32, a: f64) -> f64 {
    let mut q0 = 1.0;
    if n == 0 {
        return q0;
    }
    let mut q1 = 1.0;
    for k in 2..=n {
        let kf = f64::from(k);
        let q2 = ((2.0 * kf - 1.0) * q1 - (kf - 1.0) * a * a * q0) / kf;
        q0 = q1;
        q1 = q2;
    }
    q1
}

/// `3/(2n+1) * 2^n (n!)^2/(2n)! * a^n P_n(1/a)`.
pub fn i_n_oa_legendre(n: u32, a: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::DomainError("n must be at least 1".into()));
    }
    check_unit_interval(a)?;
    let nf = f64::from(n);
    let ln_pref =
        nf * std::f64::consts::LN_2 + 2.0 * ln_gamma(nf + 1.0)? - ln_gamma(2.0 * nf + 1.0)?;
    Ok(3.0 / (2.0 * nf + 1.0) * ln_pref.exp() * scaled_legendre(n, a))
}

/// Real-degree extension of [`i_n_oa_legendre`]:
/// `3/(2p+1) * 2^p Gamma(p+1)^2/Gamma(2p+1) * ((1+a)/2)^p F(-p, -p; 1; (1-a)/(1+a))`.
///
/// Defined for every `p > 0` so that p-derivatives at `p = 1` can be taken
/// by central differences.
pub fn i_p_oa_hypothesis(p: f64, a: f64) -> Result<f64> {
    check_positive_exponent(p)?;
    check_unit_interval(a)?;
    let t = (1.0 - a) / (1.0 + a);
    let ln_f = if a == 0.0 {
        ln_hyp_f_at_one(p)?
    } else {
        hyp_f(p, t, &HypergeomSeriesConfig::default())?.ln()
    };
    let ln = (3.0 / (2.0 * p + 1.0)).ln() + p * std::f64::consts::LN_2 + 2.0 * ln_gamma(p + 1.0)?
        - ln_gamma(2.0 * p + 1.0)?
        + p * (0.5 * (1.0 + a)).ln()
        + ln_f;
    Ok(ln.exp())
}

/// `-dI/dp` at `p = 1` of [`i_p_oa_hypothesis`] by central differences with
/// one Richardson step.
pub fn hypothesis_entropy(a: f64, h: f64) -> Result<f64> {
    if !(h > 0.0 && h <= 0.1) {
        return Err(Error::BadStep(h));
    }
    let diff = |step: f64| -> Result<f64> {
        Ok((i_p_oa_hypothesis(1.0 - step, a)? - i_p_oa_hypothesis(1.0 + step, a)?) / (2.0 * step))
    };
    let coarse = diff(h)?;
    let fine = diff(h / 2.0)?;
    Ok((4.0 * fine - coarse) / 3.0)
}

/// `Gamma(2p+1) / (2^p Gamma(p+1)^2) * (1+t)^p - F(-p, -p; 1; t)`. Nonnegative
/// values are equivalent to the J = 1 moment bound at this `p`.
pub fn f_bound_margin(p: f64, t: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::BadExponent(p));
    }
    let f = hyp_f(p, t, &HypergeomSeriesConfig::default())?;
    let ln_bound = ln_gamma(2.0 * p + 1.0)? - p * std::f64::consts::LN_2 - 2.0 * ln_gamma(p + 1.0)?
        + p * t.ln_1p();
    Ok(ln_bound.exp() - f)
}

/// `Gamma(2p+1) / (2^p Gamma(p+1)^2) * x^p - P_p(x)` for `x >= 1`.
pub fn legendre_bound_margin(p: f64, x: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(Error::BadExponent(p));
    }
    let pp = crate::special::legendre_func(p, x)?;
    let ln_bound = ln_gamma(2.0 * p + 1.0)? - p * std::f64::consts::LN_2 - 2.0 * ln_gamma(p + 1.0)?
        + p * x.ln();
    Ok(ln_bound.exp() - pp)
}
