//! Product quadrature on the sphere: Gauss-Legendre in `x = cos(theta)` and a
//! uniform rule in `phi`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_N_THETA: usize = 64;
pub const DEFAULT_N_PHI: usize = 128;

#[derive(Debug, Clone, PartialEq)]
pub struct SphereGrid {
    x_nodes: Vec<f64>,
    x_weights: Vec<f64>,
    n_phi: usize,
}

/// `(n_theta, n_phi)`, serialized as a two-element array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSize(pub usize, pub usize);

impl GridSize {
    pub fn n_theta(self) -> usize {
        self.0
    }
    pub fn n_phi(self) -> usize {
        self.1
    }
}

impl SphereGrid {
    pub fn gauss_legendre(n_theta: usize, n_phi: usize) -> Result<Self> {
        if n_theta < 2 || n_phi < 2 {
            return Err(Error::BadGridSize { n_theta, n_phi });
        }
        let (x_nodes, x_weights) = gauss_legendre_nodes(n_theta);
        Ok(Self {
            x_nodes,
            x_weights,
            n_phi,
        })
    }

    pub fn x_nodes(&self) -> &[f64] {
        &self.x_nodes
    }

    pub fn x_weights(&self) -> &[f64] {
        &self.x_weights
    }

    pub fn n_theta(&self) -> usize {
        self.x_nodes.len()
    }

    pub fn n_phi(&self) -> usize {
        self.n_phi
    }

    pub fn size(&self) -> GridSize {
        GridSize(self.n_theta(), self.n_phi)
    }

    pub fn phi(&self, k: usize) -> f64 {
        2.0 * PI * k as f64 / self.n_phi as f64
    }

    /// The comparison grid used for a-posteriori error estimates: 1.5x in
    /// each direction, so (64, 128) refines to (96, 192).
    pub fn refined(&self) -> Self {
        let n = self.n_theta();
        Self::gauss_legendre(n + n.div_ceil(2), self.n_phi + self.n_phi.div_ceil(2))
            .expect("refinement only grows the grid")
    }

    /// Both sizes doubled.
    pub fn doubled(&self) -> Self {
        Self::gauss_legendre(2 * self.n_theta(), 2 * self.n_phi)
            .expect("doubling only grows the grid")
    }
}

impl Default for SphereGrid {
    fn default() -> Self {
        Self::gauss_legendre(DEFAULT_N_THETA, DEFAULT_N_PHI).expect("default sizes are valid")
    }
}

/// Free-standing form of [`SphereGrid::gauss_legendre`].
pub fn gauss_legendre_grid(n_theta: usize, n_phi: usize) -> Result<SphereGrid> {
    SphereGrid::gauss_legendre(n_theta, n_phi)
}

/// Legendre `P_n(x)` and `P_n'(x)` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Nodes (ascending) and weights of the `n`-point Gauss-Legendre rule on
/// `[-1, 1]`, by Newton iteration from Tricomi's initial guesses.
pub fn gauss_legendre_nodes(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    let half = n.div_ceil(2);
    for i in 0..half {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_with_derivative(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 {
                break;
            }
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // i-th root from the top; mirror into ascending order.
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}
