//! Classical (Wehrl) entropy and Husimi moment integrals of spin-J pure
//! states over the SO(3) coherent-state family.
//!
//! The crate evaluates `I_p^J(u) = (2J+1)/4pi * integral of Q_u^p` and the
//! entropy `-dI_p/dp` at `p = 1` by product quadrature, implements the known
//! closed forms (J = 1 strata, canonical basis states, the integer and
//! real-degree Legendre expressions) and runs randomized and grid scans of the
//! entropy and moment inequalities.

// `!(x >= lo)` is used on purpose so that NaN fails range checks.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod closed_forms;
pub mod conjectures;
pub mod error;
pub mod grid;
pub mod json;
pub mod numeric;
pub mod optimize;
pub mod special;
pub mod sphere;
pub mod spin;
pub mod wigner;

pub use error::{Error, Result};
pub use grid::{gauss_legendre_grid, GridSize, SphereGrid};
pub use sphere::{
    classical_entropy_direct, classical_entropy_pderiv, husimi_q, moment_integral,
    square_integrability_check, HusimiKernel, MomentResult,
};
pub use spin::{random_haar_state, EulerAngles, HalfInt, SpinState, Weight};
pub use wigner::{apply_rotation, coherent_overlap, rotation_element, wigner_d};
