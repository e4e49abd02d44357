//! Rotation matrix elements `D^J_{mn}(phi, theta, psi) = e^{-i(m phi + n psi)} d^J_{mn}(theta)`
//! in the canonical basis, and their action on states.
//!
//! `d^J_{mn}` uses the real (Condon-Shortley) convention. The classical
//! formula with factors `i^{-m-n}` and `ctg(theta/2)^{m+n}` differs from it
//! only by phases, and every quantity integrated downstream is a modulus.

use num_complex::Complex64;

use crate::error::Result;
use crate::numeric::CompensatedSum;
use crate::special::log_factorial;
use crate::spin::{check_pair, index_of, EulerAngles, HalfInt, SpinState, Weight};

fn lf(twice_half_sum: i32) -> f64 {
    // argument is an integer encoded as twice its value
    debug_assert!(twice_half_sum % 2 == 0 && twice_half_sum >= 0);
    log_factorial((twice_half_sum / 2) as u64)
}

/// Signed power `base^exp` in log space for `base >= 0`, with `0^0 = 1`.
fn ln_pow(ln_base: f64, exp: i32) -> f64 {
    if exp == 0 {
        0.0
    } else {
        f64::from(exp) * ln_base
    }
}

/// `d^J_{mn}(theta)` for labels already known to be valid.
fn little_d_unchecked(j: i32, m: i32, n: i32, ln_cos: f64, ln_sin: f64) -> f64 {
    // All labels doubled. Summation index k is an ordinary integer.
    let k_min = 0.max((n - m) / 2);
    let k_max = ((j + n) / 2).min((j - m) / 2);
    let ln_norm = 0.5 * (lf(j + m) + lf(j - m) + lf(j + n) + lf(j - n));
    let mut acc = CompensatedSum::new();
    for k in k_min..=k_max {
        let k2 = 2 * k;
        let cos_exp = (2 * j - 2 * k2 + n - m) / 2;
        let sin_exp = (2 * k2 + m - n) / 2;
        let ln_mag = ln_norm - lf(j + n - k2) - lf(k2) - lf(j - k2 - m) - lf(k2 + m - n)
            + ln_pow(ln_cos, cos_exp)
            + ln_pow(ln_sin, sin_exp);
        let sign_exp = k + (m - n) / 2;
        let term = ln_mag.exp();
        acc.add(if sign_exp.rem_euclid(2) == 0 {
            term
        } else {
            -term
        });
    }
    acc.value()
}

fn half_angle_logs(theta: f64) -> (f64, f64) {
    let (s, c) = (theta / 2.0).sin_cos();
    (c.abs().ln(), s.abs().ln())
}

/// Wigner small-d element `d^J_{mn}(theta)`.
pub fn wigner_d(j: HalfInt, m: HalfInt, n: HalfInt, theta: f64) -> Result<f64> {
    let j = HalfInt::spin(j.twice())?;
    check_pair(j, m)?;
    check_pair(j, n)?;
    let (ln_cos, ln_sin) = half_angle_logs(theta);
    Ok(little_d_unchecked(
        j.twice(),
        m.twice(),
        n.twice(),
        ln_cos,
        ln_sin,
    ))
}

/// The full `(2J+1) x (2J+1)` matrix `d^J(theta)`, rows and columns in
/// ascending `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct WignerLittleD {
    j: HalfInt,
    theta: f64,
    values: Vec<f64>,
}

impl WignerLittleD {
    pub fn new(j: HalfInt, theta: f64) -> Result<Self> {
        let j = HalfInt::spin(j.twice())?;
        let (ln_cos, ln_sin) = half_angle_logs(theta);
        let dim = j.dim();
        let mut values = Vec::with_capacity(dim * dim);
        for m in j.projections() {
            for n in j.projections() {
                values.push(little_d_unchecked(
                    j.twice(),
                    m.twice(),
                    n.twice(),
                    ln_cos,
                    ln_sin,
                ));
            }
        }
        Ok(Self { j, theta, values })
    }

    /// Only the column `n` of `d^J(theta)`, indexed by ascending `m`.
    pub fn column(j: HalfInt, n: HalfInt, theta: f64) -> Result<Vec<f64>> {
        let j = HalfInt::spin(j.twice())?;
        check_pair(j, n)?;
        let (ln_cos, ln_sin) = half_angle_logs(theta);
        Ok(j.projections()
            .map(|m| little_d_unchecked(j.twice(), m.twice(), n.twice(), ln_cos, ln_sin))
            .collect())
    }

    /// Column `n` at `theta = acos(x)`, with the half-angle functions taken
    /// directly from `x` to avoid the `acos` round trip near the poles.
    pub fn column_at_cos(j: HalfInt, n: HalfInt, x: f64) -> Result<Vec<f64>> {
        let j = HalfInt::spin(j.twice())?;
        check_pair(j, n)?;
        let ln_cos = (0.5 * (1.0 + x)).max(0.0).sqrt().ln();
        let ln_sin = (0.5 * (1.0 - x)).max(0.0).sqrt().ln();
        Ok(j.projections()
            .map(|m| little_d_unchecked(j.twice(), m.twice(), n.twice(), ln_cos, ln_sin))
            .collect())
    }

    pub fn j(&self) -> HalfInt {
        self.j
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn get(&self, m: HalfInt, n: HalfInt) -> f64 {
        let dim = self.j.dim();
        self.values[index_of(self.j, m) * dim + index_of(self.j, n)]
    }

    /// Row-major entries.
    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn phase(angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, angle)
}

/// `D^J_{mn}(g) = (v_m, U(g) v_n)`.
pub fn rotation_element(j: HalfInt, m: HalfInt, n: HalfInt, g: &EulerAngles) -> Result<Complex64> {
    let d = wigner_d(j, m, n, g.theta)?;
    Ok(phase(-(m.value() * g.phi + n.value() * g.psi)) * d)
}

/// `U(g) u`.
pub fn apply_rotation(g: &EulerAngles, u: &SpinState) -> SpinState {
    let j = u.j();
    let d = WignerLittleD::new(j, g.theta).expect("state carries a valid spin");
    let dim = j.dim();
    let rotated_n: Vec<Complex64> = j
        .projections()
        .zip(u.amplitudes())
        .map(|(n, &c)| phase(-n.value() * g.psi) * c)
        .collect();
    let amplitudes = j
        .projections()
        .enumerate()
        .map(|(row, m)| {
            let s: Complex64 = (0..dim)
                .map(|col| d.values()[row * dim + col] * rotated_n[col])
                .sum();
            phase(-m.value() * g.phi) * s
        })
        .collect();
    SpinState::new(j, amplitudes).expect("rotation preserves dimension and finiteness")
}

/// `U(g)^dagger u`, the exact inverse of [`apply_rotation`].
pub fn apply_inverse_rotation(g: &EulerAngles, u: &SpinState) -> SpinState {
    let j = u.j();
    let d = WignerLittleD::new(j, g.theta).expect("state carries a valid spin");
    let dim = j.dim();
    let rotated_m: Vec<Complex64> = j
        .projections()
        .zip(u.amplitudes())
        .map(|(m, &c)| phase(m.value() * g.phi) * c)
        .collect();
    let amplitudes = j
        .projections()
        .enumerate()
        .map(|(col, n)| {
            let s: Complex64 = (0..dim)
                .map(|row| d.values()[row * dim + col] * rotated_m[row])
                .sum();
            phase(n.value() * g.psi) * s
        })
        .collect();
    SpinState::new(j, amplitudes).expect("rotation preserves dimension and finiteness")
}

/// The coherent state `U(g) v_{+J}` or `U(g) v_{-J}`.
pub fn coherent_state(j: HalfInt, g: &EulerAngles, weight: Weight) -> Result<SpinState> {
    let v = SpinState::basis(j, weight.extremal(j))?;
    Ok(apply_rotation(g, &v))
}

/// `(u, U(g) v_{+-J})`.
pub fn coherent_overlap(u: &SpinState, g: &EulerAngles, weight: Weight) -> Complex64 {
    let j = u.j();
    let n = weight.extremal(j);
    let column = WignerLittleD::column(j, n, g.theta).expect("extremal label is valid");
    let s: Complex64 = j
        .projections()
        .zip(u.amplitudes())
        .zip(&column)
        .map(|((m, c), &d)| c.conj() * phase(-m.value() * g.phi) * d)
        .sum();
    s * phase(-n.value() * g.psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::random_haar_state;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, PI};

    fn hi(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    fn fact(n: i32) -> f64 {
        (1..=n).map(f64::from).product()
    }

    /// |P^J_{mn}(cos theta)| evaluated literally from the classical sum over k
    /// in steps of one from max(m, n) to J, with (sin(theta/2))^{2k} and the
    /// ctg(theta/2)^{m+n} prefactor. Only the modulus is meaningful here.
    fn classical_modulus(j2: i32, m2: i32, n2: i32, theta: f64) -> f64 {
        let (s, c) = (theta / 2.0).sin_cos();
        let pre = (fact((j2 - m2) / 2) * fact((j2 - n2) / 2)
            / (fact((j2 + m2) / 2) * fact((j2 + n2) / 2)))
        .sqrt()
            * (c / s).powf(f64::from(m2 + n2) / 2.0);
        let k2_start = m2.max(n2);
        let mut sum = 0.0;
        let mut k2 = k2_start;
        let mut sign = 1.0;
        while k2 <= j2 {
            sum += sign * fact((j2 + k2) / 2)
                / (fact((j2 - k2) / 2) * fact((k2 - m2) / 2) * fact((k2 - n2) / 2))
                * s.powi(k2);
            sign = -sign;
            k2 += 2;
        }
        (pre * sum).abs()
    }

    #[test]
    fn spin_half_diagonal() {
        for theta in [0.0, 0.3, 1.7, PI] {
            let d = wigner_d(hi(1), hi(1), hi(1), theta).unwrap();
            assert!((d - (theta / 2.0).cos()).abs() < 1e-15);
        }
    }

    #[test]
    fn identity_at_zero_angle() {
        for j2 in 1..=25 {
            let d = WignerLittleD::new(hi(j2), 0.0).unwrap();
            for m in hi(j2).projections() {
                for n in hi(j2).projections() {
                    let want = if m == n { 1.0 } else { 0.0 };
                    assert!((d.get(m, n) - want).abs() < 1e-13, "2J={j2}");
                }
            }
        }
    }

    #[test]
    fn spin_one_example() {
        let d = wigner_d(hi(2), hi(0), hi(2), PI / 2.0).unwrap();
        assert!((d.abs() - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn invalid_pairs_rejected() {
        assert!(wigner_d(hi(2), hi(1), hi(0), 0.3).is_err());
        assert!(wigner_d(hi(2), hi(4), hi(0), 0.3).is_err());
        assert!(wigner_d(hi(27), hi(1), hi(1), 0.3).is_err());
    }

    #[test]
    fn moduli_match_classical_formula() {
        for j2 in 1..=8 {
            for m in hi(j2).projections() {
                for n in hi(j2).projections() {
                    for theta in [0.2, 0.9, 1.6, 2.4, 3.0] {
                        let ours = wigner_d(hi(j2), m, n, theta).unwrap().abs();
                        let oracle = classical_modulus(j2, m.twice(), n.twice(), theta);
                        // The classical sum is itself ill-conditioned when ctg^{m+n} is large.
                        let cot = 1.0 / (theta / 2.0).tan();
                        let tol = 1e-12 * cot.powf(f64::from(m.twice() + n.twice()) / 2.0).max(1.0);
                        assert!(
                            (ours - oracle).abs() < tol,
                            "2J={j2} m={m} n={n} theta={theta}: {ours} vs {oracle}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn large_spin_reference_values() {
        // 50-digit evaluations of the same sum (mpmath).
        let cases = [
            (24, -24, -14, 0.7, 0.2978237394773004),
            (24, 0, -24, 0.7, 0.0020513872665055407),
            (24, -12, -20, 1.5234863026836483, 0.33685905712485165),
            (24, 22, -24, 1.5234863026836483, -0.0007011573702652136),
            (25, -17, 17, 0.7, 4.023837925218812e-05),
            (25, -15, 13, 1.5234863026836483, 0.03397467876396488),
            (25, -17, -21, 2.6, 1.3917596082977986e-08),
            (25, 25, 21, 2.6, 1.083227964236709e-12),
        ];
        for (j2, m2, n2, theta, want) in cases {
            let got = wigner_d(hi(j2), hi(m2), hi(n2), theta).unwrap();
            assert!(
                (got - want).abs() < 1e-11,
                "2J={j2} 2m={m2} 2n={n2}: {got} vs {want}"
            );
        }
    }

    #[test]
    fn orthogonality_up_to_max_spin() {
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for j2 in 1..=25 {
            for _ in 0..4 {
                let theta = rand::Rng::random::<f64>(&mut rng) * PI;
                let d = WignerLittleD::new(hi(j2), theta).unwrap();
                let dim = hi(j2).dim();
                for a in 0..dim {
                    for b in 0..dim {
                        let dot: f64 = (0..dim)
                            .map(|k| d.values()[a * dim + k] * d.values()[b * dim + k])
                            .sum();
                        let want = if a == b { 1.0 } else { 0.0 };
                        assert!(
                            (dot - want).abs() < 1e-11,
                            "2J={j2} theta={theta} ({a},{b}) {dot}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn rotation_element_examples() {
        let g0 = EulerAngles::IDENTITY;
        for m in hi(3).projections() {
            for n in hi(3).projections() {
                let want = if m == n { 1.0 } else { 0.0 };
                assert!((rotation_element(hi(3), m, n, &g0).unwrap() - want).norm() < 1e-14);
            }
        }
        let g = EulerAngles::new(0.4, 1.1, 2.9).unwrap();
        let got = rotation_element(hi(1), hi(1), hi(1), &g).unwrap();
        let want = Complex64::from_polar((1.1f64 / 2.0).cos(), -(0.4 + 2.9) / 2.0);
        assert!((got - want).norm() < 1e-15);
        let h = EulerAngles::new(5.0, 1.1, 0.1).unwrap();
        let a = rotation_element(hi(4), hi(2), hi(-2), &g).unwrap().norm();
        let b = rotation_element(hi(4), hi(2), hi(-2), &h).unwrap().norm();
        assert!((a - b).abs() < 1e-15);
    }

    #[test]
    fn apply_rotation_matches_elements() {
        let j = hi(3);
        let g = EulerAngles::new(0.7, 2.1, 4.4).unwrap();
        let u = random_haar_state(j, 3).unwrap();
        let w = apply_rotation(&g, &u);
        for m in j.projections() {
            let want: Complex64 = j
                .projections()
                .map(|n| rotation_element(j, m, n, &g).unwrap() * u.amplitude(n))
                .sum();
            assert!((w.amplitude(m) - want).norm() < 1e-14);
        }
        assert_eq!(apply_rotation(&EulerAngles::IDENTITY, &u), u);
    }

    #[test]
    fn inverse_angles_agree_up_to_global_sign() {
        let j = hi(3);
        let g = EulerAngles::new(0.7, 2.1, 4.4).unwrap();
        let u = random_haar_state(j, 5).unwrap();
        let a = apply_inverse_rotation(&g, &u);
        let b = apply_rotation(&g.inverse(), &u);
        let overlap = a.inner(&b).unwrap();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
        assert!((overlap.re.abs() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_overlap_examples() {
        for j2 in 1..=6 {
            let vp = SpinState::basis(hi(j2), hi(j2)).unwrap();
            let ov = coherent_overlap(&vp, &EulerAngles::IDENTITY, Weight::Plus);
            assert!((ov - 1.0).norm() < 1e-14);
        }
        let v0 = SpinState::basis(hi(2), hi(0)).unwrap();
        let g = EulerAngles::new(0.0, PI / 2.0, 0.0).unwrap();
        assert!((coherent_overlap(&v0, &g, Weight::Minus).norm() - FRAC_1_SQRT_2).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn coherent_overlap_is_inner_with_rotated_extremal(seed in any::<u64>(), j2 in 1i32..=8,
            phi in 0.0..2.0 * PI, theta in 0.0..PI, psi in 0.0..2.0 * PI, plus in any::<bool>()) {
            let j = hi(j2);
            let weight = if plus { Weight::Plus } else { Weight::Minus };
            let u = random_haar_state(j, seed).unwrap();
            let g = EulerAngles::new(phi, theta, psi).unwrap();
            let direct = coherent_overlap(&u, &g, weight);
            let via = u.inner(&coherent_state(j, &g, weight).unwrap()).unwrap();
            prop_assert!((direct - via).norm() < 1e-13);
            let g0 = EulerAngles::new(phi, theta, 0.0).unwrap();
            prop_assert!((coherent_overlap(&u, &g0, weight).norm() - direct.norm()).abs() < 1e-13);
        }

        #[test]
        fn rotation_is_unitary(seed in any::<u64>(), j2 in 1i32..=25,
            phi in 0.0..2.0 * PI, theta in 0.0..PI, psi in 0.0..2.0 * PI, scale in 0.1f64..10.0) {
            let u = random_haar_state(hi(j2), seed).unwrap().scaled(Complex64::new(scale, 0.0));
            let g = EulerAngles::new(phi, theta, psi).unwrap();
            let w = apply_rotation(&g, &u);
            prop_assert!((w.norm() - u.norm()).abs() <= 1e-12 * u.norm());
            let back = apply_rotation(&g, &apply_inverse_rotation(&g, &u));
            for (a, b) in back.amplitudes().iter().zip(u.amplitudes()) {
                prop_assert!((a - b).norm() < 1e-11 * scale.max(1.0));
            }
        }

        #[test]
        fn modulus_symmetry_under_label_flip(j2 in 1i32..=25, theta in 0.0..PI, a in 0usize..26, b in 0usize..26) {
            let j = hi(j2);
            let ms: Vec<HalfInt> = j.projections().collect();
            let m = ms[a % ms.len()];
            let n = ms[b % ms.len()];
            let x = wigner_d(j, m, n, theta).unwrap().abs();
            let y = wigner_d(j, -m, -n, theta).unwrap().abs();
            let tol = if j2 <= 8 { 1e-13 } else { 1e-11 };
            prop_assert!((x - y).abs() < tol);
        }
    }
}
