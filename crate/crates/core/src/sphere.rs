//! Husimi densities on the sphere and their integrals: the moments
//! `I_p = (2J+1)/4pi * integral of Q^p`, and the classical (Wehrl) entropy by
//! two independent routes.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{GridSize, SphereGrid};
use crate::numeric::pairwise_sum;
use crate::spin::{EulerAngles, HalfInt, SpinState, Weight};
use crate::wigner::{coherent_overlap, WignerLittleD};

/// Default finite-difference step of the p-derivative route.
pub const DEFAULT_PDERIV_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentResult {
    pub value: f64,
    pub p: f64,
    pub grid: GridSize,
    /// Absolute difference against the refined grid.
    pub err_estimate: f64,
}

/// `Q(theta, phi) = |(u, U(phi, theta, 0) v_{+-J})|^2`, without normalizing `u`.
pub fn husimi_q(u: &SpinState, theta: f64, phi: f64, weight: Weight) -> Result<f64> {
    let g = EulerAngles::new(phi, theta, 0.0)?;
    Ok(coherent_overlap(u, &g, weight).norm_sqr())
}

/// Precomputed d-matrix columns and phase factors for one `(J, grid, weight)`.
///
/// For a fixed node `x_i` the overlap is a polynomial in `e^{-i phi}`:
/// `sum_l conj(c_l) d_{l,w}(theta_i) e^{-i l phi}` up to a global phase, with
/// `l = m + J`. It is evaluated by Horner's rule.
#[derive(Debug, Clone)]
pub struct HusimiKernel {
    j: HalfInt,
    weight: Weight,
    grid: SphereGrid,
    columns: Vec<Vec<f64>>,
    unit_phases: Vec<Complex64>,
}

impl HusimiKernel {
    pub fn new(j: HalfInt, grid: &SphereGrid, weight: Weight) -> Result<Self> {
        let j = HalfInt::spin(j.twice())?;
        let n = weight.extremal(j);
        let columns = grid
            .x_nodes()
            .iter()
            .map(|&x| WignerLittleD::column_at_cos(j, n, x))
            .collect::<Result<Vec<_>>>()?;
        let unit_phases = (0..grid.n_phi())
            .map(|k| Complex64::from_polar(1.0, -grid.phi(k)))
            .collect();
        Ok(Self {
            j,
            weight,
            grid: grid.clone(),
            columns,
            unit_phases,
        })
    }

    pub fn j(&self) -> HalfInt {
        self.j
    }

    pub fn weight(&self) -> Weight {
        self.weight
    }

    pub fn grid(&self) -> &SphereGrid {
        &self.grid
    }

    fn check_spin(&self, u: &SpinState) -> Result<()> {
        if u.j() != self.j {
            return Err(Error::SpinMismatch {
                left: u.j().twice(),
                right: self.j.twice(),
            });
        }
        Ok(())
    }

    /// Husimi values on row `i` (fixed `x_i`), for all `phi_k`.
    fn row_values(&self, u: &SpinState, i: usize, out: &mut Vec<f64>) {
        let coeffs: Vec<Complex64> = u
            .amplitudes()
            .iter()
            .zip(&self.columns[i])
            .map(|(c, &d)| c.conj() * d)
            .collect();
        out.clear();
        out.extend(self.unit_phases.iter().map(|&z| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &b in coeffs.iter().rev() {
                acc = acc * z + b;
            }
            acc.norm_sqr()
        }));
    }

    /// Husimi values at every node, row-major in `(x_i, phi_k)`.
    pub fn samples(&self, u: &SpinState) -> Result<Vec<f64>> {
        self.check_spin(u)?;
        let mut all = Vec::with_capacity(self.grid.n_theta() * self.grid.n_phi());
        let mut row = Vec::with_capacity(self.grid.n_phi());
        for i in 0..self.grid.n_theta() {
            self.row_values(u, i, &mut row);
            all.extend_from_slice(&row);
        }
        Ok(all)
    }

    /// `(2J+1)/4pi * integral of f(Q) dOmega` for the state exactly as given.
    /// Rows are summed sequentially and combined by pairwise summation, so
    /// the result does not depend on how callers schedule work.
    pub fn integrate<F: Fn(f64) -> f64>(&self, u: &SpinState, f: F) -> Result<f64> {
        self.check_spin(u)?;
        let n_phi = self.grid.n_phi() as f64;
        let mut row = Vec::with_capacity(self.grid.n_phi());
        let weighted: Vec<f64> = (0..self.grid.n_theta())
            .map(|i| {
                self.row_values(u, i, &mut row);
                let s: f64 = row.iter().map(|&q| f(q)).sum();
                self.grid.x_weights()[i] * s / n_phi
            })
            .collect();
        Ok(0.5 * self.j.dim() as f64 * pairwise_sum(&weighted))
    }

    /// `I_p` of `u / ||u||` on this kernel's grid.
    pub fn moment(&self, u: &SpinState, p: f64) -> Result<f64> {
        check_exponent(p)?;
        let unit = u.normalize()?;
        self.integrate(&unit, |q| q.powf(p))
    }

    /// `-(2J+1)/4pi * integral of Q ln Q` of `u / ||u||`, with `0 ln 0 = 0`.
    pub fn entropy(&self, u: &SpinState) -> Result<f64> {
        let unit = u.normalize()?;
        self.integrate(&unit, neg_q_ln_q)
    }

    /// The p-derivative route on this kernel's grid.
    pub fn entropy_pderiv(&self, u: &SpinState, h: f64) -> Result<f64> {
        check_step(h)?;
        let unit = u.normalize()?;
        let diff = |step: f64| -> Result<f64> {
            let lo = self.integrate(&unit, |q| q.powf(1.0 - step))?;
            let hi = self.integrate(&unit, |q| q.powf(1.0 + step))?;
            Ok((lo - hi) / (2.0 * step))
        };
        let coarse = diff(h)?;
        let fine = diff(h / 2.0)?;
        Ok((4.0 * fine - coarse) / 3.0)
    }

    /// Largest sampled value of `Q` for `u / ||u||` and the node where it occurs.
    pub fn max_node(&self, u: &SpinState) -> Result<(f64, usize, usize)> {
        let unit = u.normalize()?;
        let samples = self.samples(&unit)?;
        let n_phi = self.grid.n_phi();
        let (idx, &q) = samples
            .iter()
            .enumerate()
            .fold((0, &f64::NEG_INFINITY), |best, cur| {
                if cur.1 > best.1 {
                    cur
                } else {
                    best
                }
            });
        Ok((q, idx / n_phi, idx % n_phi))
    }
}

fn neg_q_ln_q(q: f64) -> f64 {
    if q > 0.0 {
        -q * q.ln()
    } else {
        0.0
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p > 0.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::BadExponent(p))
    }
}

fn check_step(h: f64) -> Result<()> {
    if h > 0.0 && h <= 0.1 {
        Ok(())
    } else {
        Err(Error::BadStep(h))
    }
}

/// `I_p^J` of `u / ||u||` with an error estimate from the refined grid.
pub fn moment_integral(
    u: &SpinState,
    p: f64,
    weight: Weight,
    grid: &SphereGrid,
) -> Result<MomentResult> {
    check_exponent(p)?;
    let unit = u.normalize()?;
    let value = HusimiKernel::new(unit.j(), grid, weight)?.moment(&unit, p)?;
    let refined = HusimiKernel::new(unit.j(), &grid.refined(), weight)?.moment(&unit, p)?;
    Ok(MomentResult {
        value,
        p,
        grid: grid.size(),
        err_estimate: (refined - value).abs(),
    })
}

/// Classical entropy `-(2J+1)/4pi * integral of Q ln Q` for `u / ||u||`.
pub fn classical_entropy_direct(u: &SpinState, weight: Weight, grid: &SphereGrid) -> Result<f64> {
    let unit = u.normalize()?;
    HusimiKernel::new(unit.j(), grid, weight)?.entropy(&unit)
}

/// Classical entropy as `-dI_p/dp` at `p = 1`: central differences at steps
/// `h` and `h/2` combined by one Richardson step.
pub fn classical_entropy_pderiv(
    u: &SpinState,
    weight: Weight,
    grid: &SphereGrid,
    h: f64,
) -> Result<f64> {
    check_step(h)?;
    let unit = u.normalize()?;
    HusimiKernel::new(unit.j(), grid, weight)?.entropy_pderiv(&unit, h)
}

/// `(2J+1)/(8 pi^2) * integral of |(u, U(g) v)|^2 sin(theta) dtheta dphi dpsi`
/// over `phi, psi` in `[0, 2pi)` and `theta` in `[0, pi]`, which equals
/// `||u||^2 ||v||^2`. The `psi` rule reuses `grid.n_phi()` points.
pub fn square_integrability_check(u: &SpinState, v: &SpinState, grid: &SphereGrid) -> Result<f64> {
    if u.j() != v.j() {
        return Err(Error::SpinMismatch {
            left: u.j().twice(),
            right: v.j().twice(),
        });
    }
    let j = u.j();
    let n = grid.n_phi();
    let rows: Vec<f64> = grid
        .x_nodes()
        .iter()
        .zip(grid.x_weights())
        .map(|(&x, &w)| {
            let theta = x.clamp(-1.0, 1.0).acos();
            let mut acc = 0.0;
            for a in 0..n {
                for b in 0..n {
                    let g = EulerAngles {
                        phi: grid.phi(a),
                        theta,
                        psi: grid.phi(b),
                    };
                    let rotated = crate::wigner::apply_rotation(&g, v);
                    acc += u.inner(&rotated).expect("spins checked").norm_sqr();
                }
            }
            w * acc / (n * n) as f64
        })
        .collect();
    // (2J+1)/(8 pi^2) * 4 pi^2 * (1/n^2 sums) * sum_i w_i
    Ok(0.5 * j.dim() as f64 * pairwise_sum(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spin::random_haar_state;
    use crate::wigner::{apply_rotation, coherent_state};
    use std::f64::consts::PI;

    fn hi(t: i32) -> HalfInt {
        HalfInt::from_twice(t)
    }

    fn stratum(a: f64) -> SpinState {
        SpinState::from_real(hi(2), &[(1.0 - a).sqrt(), a.sqrt(), 0.0]).unwrap()
    }

    /// The J=1 stratum-representative Husimi density written out in x = cos(theta).
    fn bracket(a: f64, x: f64, phi: f64) -> f64 {
        let lo = (1.0 - x) / 2.0;
        let up = (1.0 + x) / 2.0;
        (1.0 - a) * lo * lo
            + 2.0 * a * lo * up
            + 2.0 * (2.0 * a * (1.0 - a) * up * lo.powi(3)).sqrt() * (phi + PI / 2.0).cos()
    }

    #[test]
    fn husimi_examples() {
        for j2 in 1..=6 {
            let v = SpinState::basis(hi(j2), hi(j2)).unwrap();
            assert!((husimi_q(&v, 0.0, 0.3, Weight::Plus).unwrap() - 1.0).abs() < 1e-14);
            assert!(husimi_q(&v, PI, 0.3, Weight::Plus).unwrap().abs() < 1e-14);
        }
    }

    #[test]
    fn husimi_matches_stratum_bracket_up_to_phi_shift() {
        // The real d-matrix convention places the cross term at cos(phi)
        // rather than cos(phi + pi/2): a rotation about z, harmless to integrals.
        for a in [0.1, 0.5, 0.9] {
            let u = stratum(a);
            for i in 0..20 {
                let theta = 0.05 + 0.15 * f64::from(i);
                for k in 0..12 {
                    let phi = 2.0 * PI * f64::from(k) / 12.0;
                    let q = husimi_q(&u, theta, phi, Weight::Plus).unwrap();
                    let b = bracket(a, theta.cos(), phi - PI / 2.0);
                    assert!((q - b).abs() < 1e-14, "a={a} theta={theta} phi={phi}");
                }
            }
        }
    }

    #[test]
    fn husimi_bounded_by_norm() {
        let u = random_haar_state(hi(5), 9)
            .unwrap()
            .scaled(Complex64::new(3.0, 0.0));
        for i in 0..30 {
            let theta = PI * f64::from(i) / 29.0;
            let q = husimi_q(&u, theta, 1.3 * f64::from(i), Weight::Minus).unwrap();
            assert!(q >= 0.0 && q <= u.norm_sqr() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn moment_examples() {
        let grid = SphereGrid::default();
        let g = EulerAngles::new(1.2, 0.8, 2.0).unwrap();
        let coherent = coherent_state(hi(2), &g, Weight::Minus).unwrap();
        let r = moment_integral(&coherent, 2.0, Weight::Plus, &grid).unwrap();
        assert!((r.value - 0.6).abs() < 1e-12, "{r:?}");
        assert_eq!(r.grid, GridSize(64, 128));
        let v0 = SpinState::basis(hi(2), hi(0)).unwrap();
        let r = moment_integral(&v0, 2.0, Weight::Plus, &grid).unwrap();
        assert!((r.value - 0.4).abs() < 1e-12);
        let u = random_haar_state(hi(3), 11)
            .unwrap()
            .scaled(Complex64::new(0.0, 5.0));
        let r = moment_integral(&u, 1.0, Weight::Plus, &grid).unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
        assert!(r.err_estimate >= 0.0);
        assert!(matches!(
            moment_integral(&u, 0.0, Weight::Plus, &grid),
            Err(Error::BadExponent(_))
        ));
        let z = SpinState::from_real(hi(1), &[0.0, 0.0]).unwrap();
        assert!(matches!(
            moment_integral(&z, 2.0, Weight::Plus, &grid),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn entropy_examples() {
        let grid = SphereGrid::default();
        let vm = SpinState::basis(hi(2), hi(-2)).unwrap();
        let s = classical_entropy_direct(&vm, Weight::Plus, &grid).unwrap();
        assert!((s - 2.0 / 3.0).abs() < 1e-9, "{s}");
        let v0 = SpinState::basis(hi(2), hi(0)).unwrap();
        let s = classical_entropy_direct(&v0, Weight::Plus, &grid).unwrap();
        assert!((s - (2.0 / 3.0 + 1.0 - 2f64.ln())).abs() < 1e-6, "{s}");
        let s = classical_entropy_direct(&stratum(0.5), Weight::Plus, &grid).unwrap();
        assert!((s - (2.0 / 3.0 + 0.5 - 1.5f64.ln())).abs() < 1e-6, "{s}");
    }

    #[test]
    fn pderiv_examples() {
        let grid = SphereGrid::default();
        let half_coherent = SpinState::basis(hi(1), hi(1)).unwrap();
        let s = classical_entropy_pderiv(&half_coherent, Weight::Plus, &grid, DEFAULT_PDERIV_STEP)
            .unwrap();
        assert!((s - 0.5).abs() < 1e-6, "{s}");
        let v0 = SpinState::basis(hi(2), hi(0)).unwrap();
        let a = classical_entropy_pderiv(&v0, Weight::Plus, &grid, DEFAULT_PDERIV_STEP).unwrap();
        let b = classical_entropy_direct(&v0, Weight::Plus, &grid).unwrap();
        assert!((a - b).abs() < 1e-6);
        assert!(matches!(
            classical_entropy_pderiv(&v0, Weight::Plus, &grid, 0.0),
            Err(Error::BadStep(_))
        ));
        assert!(matches!(
            classical_entropy_pderiv(&v0, Weight::Plus, &grid, 0.2),
            Err(Error::BadStep(_))
        ));
    }

    #[test]
    fn entropy_routes_agree_on_random_states() {
        let grid = SphereGrid::default();
        for seed in 0..12 {
            let j = hi(1 + (seed % 6) as i32);
            let u = random_haar_state(j, seed).unwrap();
            let a = classical_entropy_direct(&u, Weight::Plus, &grid).unwrap();
            let b = classical_entropy_pderiv(&u, Weight::Plus, &grid, DEFAULT_PDERIV_STEP).unwrap();
            assert!((a - b).abs() < 1e-6, "seed={seed} {a} {b}");
        }
    }

    #[test]
    fn normalization_for_random_states() {
        let grid = SphereGrid::default();
        for j2 in 1..=6 {
            let kernel = HusimiKernel::new(hi(j2), &grid, Weight::Plus).unwrap();
            for seed in 0..100 {
                let u = random_haar_state(hi(j2), 1000 * j2 as u64 + seed).unwrap();
                assert!((kernel.moment(&u, 1.0).unwrap() - 1.0).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn rotation_invariance() {
        let grid = SphereGrid::default();
        let mut rng = <rand_chacha::ChaCha20Rng as rand::SeedableRng>::seed_from_u64(3);
        for seed in 0..10 {
            let j = hi(1 + (seed % 5) as i32);
            let kernel = HusimiKernel::new(j, &grid, Weight::Plus).unwrap();
            let u = random_haar_state(j, seed).unwrap();
            let g = EulerAngles::random(&mut rng);
            let w = apply_rotation(&g, &u);
            for p in [2.0, 3.0] {
                let a = kernel.moment(&u, p).unwrap();
                let b = kernel.moment(&w, p).unwrap();
                assert!((a - b).abs() < 1e-9, "seed={seed} p={p}");
            }
        }
    }

    #[test]
    fn moments_nonincreasing_in_p() {
        let grid = SphereGrid::default();
        for seed in 0..8 {
            let j = hi(1 + (seed % 4) as i32);
            let kernel = HusimiKernel::new(j, &grid, Weight::Plus).unwrap();
            let u = random_haar_state(j, seed).unwrap();
            let values: Vec<f64> = (0..=12)
                .map(|i| kernel.moment(&u, 1.0 + 0.25 * f64::from(i)).unwrap())
                .collect();
            assert!(
                values.windows(2).all(|w| w[1] <= w[0] + 1e-14),
                "{values:?}"
            );
        }
    }

    #[test]
    fn weight_symmetry() {
        let grid = SphereGrid::default();
        for seed in 0..6 {
            let j = hi(1 + seed as i32);
            let u = random_haar_state(j, seed).unwrap();
            let plus = HusimiKernel::new(j, &grid, Weight::Plus).unwrap();
            let minus = HusimiKernel::new(j, &grid, Weight::Minus).unwrap();
            for p in [1.5, 2.0] {
                let a = plus.moment(&u, p).unwrap();
                let b = minus.moment(&u.reversed(), p).unwrap();
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn phi_rule_exact_for_integer_moments() {
        for j2 in 1..=4 {
            let j = hi(j2);
            let u = random_haar_state(j, 77).unwrap();
            for p in [1u32, 2, 3] {
                let n_phi = (2 * p as i32 * j2 + 2) as usize + 1;
                let a = HusimiKernel::new(
                    j,
                    &SphereGrid::gauss_legendre(48, n_phi).unwrap(),
                    Weight::Plus,
                )
                .unwrap()
                .moment(&u, f64::from(p))
                .unwrap();
                let b = HusimiKernel::new(
                    j,
                    &SphereGrid::gauss_legendre(48, 2 * n_phi).unwrap(),
                    Weight::Plus,
                )
                .unwrap()
                .moment(&u, f64::from(p))
                .unwrap();
                assert!((a - b).abs() < 1e-13, "2J={j2} p={p}");
            }
        }
    }

    #[test]
    fn square_integrability() {
        let grid = SphereGrid::gauss_legendre(8, 8).unwrap();
        let vj = SpinState::basis(hi(2), hi(2)).unwrap();
        assert!((square_integrability_check(&vj, &vj, &grid).unwrap() - 1.0).abs() < 1e-12);
        for j2 in 1..=6 {
            let u = random_haar_state(hi(j2), 5)
                .unwrap()
                .scaled(Complex64::new(1.7, 0.0));
            let v = random_haar_state(hi(j2), 6)
                .unwrap()
                .scaled(Complex64::new(0.0, 0.6));
            let got = square_integrability_check(&u, &v, &grid).unwrap();
            assert!((got - u.norm_sqr() * v.norm_sqr()).abs() < 1e-8, "2J={j2}");
        }
        let vm = SpinState::basis(hi(2), hi(-2)).unwrap();
        assert!((square_integrability_check(&vj, &vm, &grid).unwrap() - 1.0).abs() < 1e-12);
        let half = SpinState::basis(hi(1), hi(1)).unwrap();
        assert!(matches!(
            square_integrability_check(&half, &vj, &grid),
            Err(Error::SpinMismatch { .. })
        ));
    }
}
