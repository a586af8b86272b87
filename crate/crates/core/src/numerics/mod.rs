//! Shared numerical substrate: gamma functions, `K`-Bessel, quadrature,
//! vertical contour integrals and Mellin transforms of bump functions.

pub mod bessel;
pub mod bump;
pub mod gamma;
pub mod quad;

pub use bessel::{bessel_k, bessel_k_scaled};
pub use bump::{mellin_bump, BumpFunction};
pub use gamma::{gamma, log_gamma, rgamma, sin_pi};
pub use quad::{contour_integral, ContourResult, VerticalContour};

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// `Γ_R(s) = π^{-s/2} Γ(s/2)`.
pub fn gamma_r(s: C64) -> Result<C64> {
    if gamma::near_nonpositive_integer(s / 2.0, 0.0) {
        return Err(Error::Pole { what: "Gamma_R".into(), at: s });
    }
    Ok(ln_gamma_r(s).exp())
}

/// `ln Γ_R(s)` on the principal branch of `ln Γ`, no pole check.
pub(crate) fn ln_gamma_r(s: C64) -> C64 {
    -0.5 * s * PI.ln() + gamma::ln_gamma(s / 2.0)
}

/// `1/Γ_R(s)`, entire.
pub fn rgamma_r(s: C64) -> C64 {
    (0.5 * s * PI.ln()).exp() * rgamma(s / 2.0)
}

/// `a^z = exp(z ln a)` for real `a > 0`.
pub fn rpow(a: f64, z: C64) -> C64 {
    (z * a.ln()).exp()
}
