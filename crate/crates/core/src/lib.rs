//! Numerical and exact-arithmetic toolkit for spherical representations of
//! `GL(n, R)`: gamma factors and analytic conductors, spherical Whittaker
//! functions, the Whittaker–Plancherel transform, the `n = 1` newvector
//! pipeline, archimedean congruence sets and the unramified `p`-adic analogue.

pub mod congruence;
pub mod error;
pub mod gamma_factors;
pub mod mseries;
pub mod newvector;
pub mod numerics;
pub mod padic;
pub mod plancherel;
pub mod whittaker;

pub use error::{Error, Result};
pub use num_complex::Complex64;
