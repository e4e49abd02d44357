//! Special functions: log-Gamma, log-Beta, log-factorial, the terminating or
//! convergent series `F(-p, -p; 1; t)`, Legendre polynomials and Legendre
//! functions of real degree on the ray `z >= 1`.

use crate::error::{Error, Result};
use crate::numeric::CompensatedSum;

// Lanczos approximation with g = 671/128 and 14 coefficients.
const LANCZOS_G_SHIFT: f64 = 5.242_187_5;
const LANCZOS_C0: f64 = 0.999_999_999_999_997_1;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEFFS: [f64; 14] = [
    57.156_235_665_862_923_5,
    -59.597_960_355_475_491_2,
    14.136_097_974_741_747_1,
    -0.491_913_816_097_620_199,
    0.339_946_499_848_118_887e-4,
    0.465_236_289_270_485_756e-4,
    -0.983_744_753_048_795_646e-4,
    0.158_088_703_224_912_494e-3,
    -0.210_264_441_724_104_883e-3,
    0.217_439_618_115_212_643e-3,
    -0.164_318_106_536_763_890e-3,
    0.844_182_239_838_527_433e-4,
    -0.261_908_384_015_814_087e-4,
    0.368_991_826_595_316_234e-5,
];
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

const FACTORIAL_TABLE_LEN: usize = 171;

fn ln_factorial_table() -> &'static [f64; FACTORIAL_TABLE_LEN] {
    static TABLE: std::sync::OnceLock<[f64; FACTORIAL_TABLE_LEN]> = std::sync::OnceLock::new();
    TABLE.get_or_init(|| {
        let mut table = [0.0; FACTORIAL_TABLE_LEN];
        let mut fact = 1.0f64;
        for (n, slot) in table.iter_mut().enumerate().skip(1) {
            fact *= n as f64;
            *slot = fact.ln();
        }
        table
    })
}

fn lanczos_ln_gamma(x: f64) -> f64 {
    let tmp = x + LANCZOS_G_SHIFT;
    let tmp = (x + 0.5) * tmp.ln() - tmp;
    let mut ser = LANCZOS_C0;
    let mut y = x;
    for c in LANCZOS_COEFFS {
        y += 1.0;
        ser += c / y;
    }
    tmp + (SQRT_2PI * ser / x).ln()
}

/// `ln Gamma(x)` for `x > 0`. Integer arguments up to 171 come from an
/// exact-product table.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::DomainError(format!(
            "ln_gamma requires x > 0, got {x}"
        )));
    }
    if x.fract() == 0.0 && x <= FACTORIAL_TABLE_LEN as f64 {
        return Ok(ln_factorial_table()[x as usize - 1]);
    }
    Ok(lanczos_ln_gamma(x))
}

/// `ln(n!)`.
pub fn log_factorial(n: u64) -> f64 {
    if (n as usize) < FACTORIAL_TABLE_LEN {
        ln_factorial_table()[n as usize]
    } else {
        lanczos_ln_gamma(n as f64 + 1.0)
    }
}

/// `ln B(a, b) = ln Gamma(a) + ln Gamma(b) - ln Gamma(a + b)`.
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::DomainError(format!(
            "log_beta requires a, b > 0, got ({a}, {b})"
        )));
    }
    Ok(ln_gamma(a)? + ln_gamma(b)? - ln_gamma(a + b)?)
}

/// `ln binom(n, k)` for integers.
pub fn log_binomial(n: u64, k: u64) -> f64 {
    debug_assert!(k <= n);
    log_factorial(n) - log_factorial(k) - log_factorial(n - k)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypergeomSeriesConfig {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl Default for HypergeomSeriesConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-13,
            max_terms: 1_000_000,
        }
    }
}

/// Above this `t` the series is replaced by its expansion about `t = 1`.
const HYP_ENDPOINT_WINDOW: f64 = 1e-6;

/// Gauss value `F(-p, -p; 1; 1) = Gamma(1 + 2p) / Gamma(1 + p)^2`, in logs.
pub fn ln_hyp_f_at_one(p: f64) -> Result<f64> {
    Ok(ln_gamma(1.0 + 2.0 * p)? - 2.0 * ln_gamma(1.0 + p)?)
}

/// `F(-p, -p; 1; t) = sum_k binom(p, k)^2 t^k` on `t` in `[0, 1]`.
///
/// Integer `p` terminates after `p + 1` terms. All terms are nonnegative for
/// real `p >= 0`, so the partial sums increase and the remainder after term
/// `k` is bounded by the next term times `min(1/(1-t), (k+2)/(2p+1))`.
pub fn hyp_f(p: f64, t: f64, cfg: &HypergeomSeriesConfig) -> Result<f64> {
    if !(p >= 0.0) || !p.is_finite() {
        return Err(Error::DomainError(format!(
            "hyp_f requires p >= 0, got {p}"
        )));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::DomainError(format!(
            "hyp_f requires t in [0, 1], got {t}"
        )));
    }
    if !(cfg.rel_tol > 0.0) {
        return Err(Error::DomainError(format!(
            "rel_tol must be positive, got {}",
            cfg.rel_tol
        )));
    }
    if p == 0.0 || t == 0.0 {
        return Ok(1.0);
    }
    if t == 1.0 {
        return Ok(ln_hyp_f_at_one(p)?.exp());
    }
    if t > 1.0 - HYP_ENDPOINT_WINDOW && p > 0.5 {
        // F(1) - F'(1)(1 - t), F'(1) = p^2 F(1-p, 1-p; 2; 1) = p^2 Gamma(2p) / Gamma(1+p)^2.
        let f1 = ln_hyp_f_at_one(p)?.exp();
        let df1 = (2.0 * p.ln() + ln_gamma(2.0 * p)? - 2.0 * ln_gamma(1.0 + p)?).exp();
        return Ok(f1 - df1 * (1.0 - t));
    }
    let integer_degree = p.fract() == 0.0;
    let mut sum = CompensatedSum::new();
    let mut term = 1.0;
    sum.add(term);
    for k in 0..cfg.max_terms {
        let kf = k as f64;
        let ratio = (kf - p) / (kf + 1.0);
        term *= ratio * ratio * t;
        if term == 0.0 {
            // Terminated (integer p) or underflowed.
            return Ok(sum.value());
        }
        sum.add(term);
        if integer_degree {
            continue;
        }
        if kf + 1.0 > p {
            let tail_factor = (1.0 / (1.0 - t)).min((kf + 3.0) / (2.0 * p + 1.0));
            let next = term * ((kf + 1.0 - p) / (kf + 2.0)).powi(2) * t;
            if next * tail_factor <= cfg.rel_tol * sum.value() {
                return Ok(sum.value());
            }
        }
    }
    Err(Error::NoConvergence(cfg.max_terms))
}

/// Legendre polynomial `P_n(x)` by the three-term recurrence.
pub fn legendre_poly(n: u32, x: f64) -> f64 {
    if n == 0 {
        return 1.0;
    }
    if x == 1.0 {
        return 1.0;
    }
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = f64::from(k);
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    p1
}

/// Legendre function `P_p(z) = ((1+z)/2)^p F(-p, -p; 1; (z-1)/(z+1))` for
/// real degree `p >= 0` and `z >= 1`.
pub fn legendre_func(p: f64, z: f64) -> Result<f64> {
    if !(z >= 1.0) || !z.is_finite() {
        return Err(Error::DomainError(format!(
            "legendre_func requires z >= 1, got {z}"
        )));
    }
    let t = (z - 1.0) / (z + 1.0);
    let f = hyp_f(p, t, &HypergeomSeriesConfig::default())?;
    Ok(((1.0 + z) / 2.0).powf(p) * f)
}
