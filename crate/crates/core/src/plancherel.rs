//! Spherical Whittaker–Plancherel transform on `PGL(2, R)`.
//!
//! For `μ = (it, -it)` the pairing is `⟨f, W_t⟩ = ∫_0^∞ f(y) W_t(diag(y,1)) dy/y²`
//! (the `N\G` measure restricted to the torus), and the inversion is
//! `f(y) = ∫_0^∞ W_t(y) ⟨f, W_t⟩ ρ(t) dt` with `ρ(t) = t sinh(πt)/(4π)`,
//! i.e. `1/4` of `density(t)/|c(1, μ)|²`.
//!
//! Coefficients are stored multiplied by `e^{πt/2}`, which removes the
//! exponential decay of `W_t` and keeps `ρ·W·coefficient` finite for large `t`.

use crate::error::{Error, Result};
use crate::numerics::bessel::bessel_k_scaled_any;
use crate::numerics::gamma::ln_gamma;
use crate::numerics::quad::{gauss_legendre, uniform_breaks, CSum, PANEL_ORDER};
use crate::numerics::BumpFunction;
use crate::whittaker::D2;
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Default decay tolerance for [`SpectralGrid::certified`].
pub const CERTIFICATE_TOL: f64 = 1e-6;
/// Default node density of certified grids.
pub const NODES_PER_UNIT: f64 = 3.0;

/// Quadrature nodes and weights in the spectral parameter `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralGrid {
    pub t_values: Vec<f64>,
    pub weights: Vec<f64>,
}

impl SpectralGrid {
    pub fn new(t_values: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if t_values.is_empty() || t_values.len() != weights.len() {
            return Err(Error::Precondition("grid needs matching nonempty nodes and weights".into()));
        }
        if t_values.iter().any(|t| !(t.is_finite() && *t > 0.0)) || weights.iter().any(|w| !(*w > 0.0)) {
            return Err(Error::Precondition("grid nodes and weights must be positive and finite".into()));
        }
        if t_values.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Precondition("grid nodes must be strictly increasing".into()));
        }
        Ok(Self { t_values, weights })
    }

    /// Composite Gauss–Legendre rule on `(0, t_max]` with `nodes` rounded up to whole panels.
    pub fn gauss(t_max: f64, nodes: usize) -> Result<Self> {
        if !(t_max > 0.0) || nodes == 0 {
            return Err(Error::Precondition("grid needs t_max > 0 and at least one node".into()));
        }
        let panels = nodes.div_ceil(PANEL_ORDER);
        let rule = gauss_legendre(PANEL_ORDER);
        let breaks = uniform_breaks(0.0, t_max, panels);
        let mut t = Vec::with_capacity(panels * PANEL_ORDER);
        let mut w = Vec::with_capacity(panels * PANEL_ORDER);
        for p in breaks.windows(2) {
            let (m, h) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
            for (x, wx) in rule.nodes.iter().zip(&rule.weights) {
                t.push(m + h * x);
                w.push(h * wx);
            }
        }
        Self::new(t, w)
    }

    /// Grid on `(0, t_max]` with `t_max` certified by the coefficient decay of `f`.
    ///
    /// `t_max` is the smallest multiple of 10 such that `ρ(t) |⟨f, W_t⟩| e^{-πt/2}`
    /// stays below `tol` at every sampled `t ∈ [t_max, 2 t_max]` (step 2.5).
    pub fn certified(f: &BumpFunction, tol: f64, nodes_per_unit: f64) -> Result<Self> {
        if !(tol > 0.0 && nodes_per_unit > 0.0) {
            return Err(Error::Precondition("certificate needs tol > 0 and a positive node density".into()));
        }
        let weighted = |t: f64| {
            let g = SpectralGrid { t_values: vec![t], weights: vec![1.0] };
            rho_scaled(t) * forward_transform(f, &g).scaled[0].norm()
        };
        let mut t_max: f64 = 10.0;
        'outer: loop {
            if t_max > 4000.0 {
                return Err(Error::Precondition("coefficients do not fall below tol before t = 4000".into()));
            }
            let steps = (t_max / 2.5).round() as usize;
            for k in (0..=steps).rev() {
                let t = t_max + 2.5 * k as f64;
                if weighted(t) >= tol {
                    t_max = (t / 10.0).ceil() * 10.0 + 10.0;
                    continue 'outer;
                }
            }
            break;
        }
        Self::gauss(t_max, (t_max * nodes_per_unit).ceil() as usize)
    }

    /// Same range with twice the nodes.
    pub fn refined(&self) -> Result<Self> {
        Self::gauss(self.t_max(), 2 * self.t_values.len())
    }

    /// Length of the covered range; the weights of a rule on `(0, t_max]` sum to `t_max`.
    pub fn t_max(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.t_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t_values.is_empty()
    }
}

/// `|Γ_R(1+2it) / Γ_R(2it)|²`, equal to `t tanh(πt)/π`.
pub fn plancherel_density(t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let t = t.abs();
    // Γ_R(s) = π^{-s/2} Γ(s/2); the π powers have modulus π^{-1/2}
    let num = ln_gamma(C64::new(0.5, t)).re;
    let den = ln_gamma(C64::new(0.0, t)).re;
    (2.0 * (num - den)).exp() / PI
}

/// `ρ(t) e^{-πt} = t (1 - e^{-2πt}) / (8π)`, the inversion weight against scaled coefficients.
fn rho_scaled(t: f64) -> f64 {
    t * (-(-2.0 * PI * t).exp_m1()) / (8.0 * PI)
}

/// `e^{πt/2} W_t(diag(y, 1))`.
fn w_scaled(t: f64, y: f64) -> f64 {
    D2 * y.sqrt() * bessel_k_scaled_any(C64::new(0.0, t), 2.0 * PI * y).re
}

/// Whittaker coefficients `⟨f, W_t⟩` on a grid, stored scaled by `e^{πt/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCoefficients {
    pub t_values: Vec<f64>,
    pub scaled: Vec<C64>,
}

impl SpectralCoefficients {
    /// Unscaled coefficient `⟨f, W_{t_j}⟩`.
    pub fn value(&self, j: usize) -> C64 {
        self.scaled[j] * (-0.5 * PI * self.t_values[j]).exp()
    }
}

/// `⟨f, W_t⟩ = ∫ f(y) conj(W_t(diag(y,1))) dy/y²` at every grid node.
pub fn forward_transform(f: &BumpFunction, grid: &SpectralGrid) -> SpectralCoefficients {
    let scaled = grid
        .t_values
        .iter()
        .map(|&t| {
            if f.amplitude == 0.0 {
                return C64::new(0.0, 0.0);
            }
            let (lo, hi) = (f.center - f.radius, f.center + f.radius);
            // the integrand oscillates like cos(t log y); about two radians per panel
            let panels = 16 + (t * (hi / lo).ln() / 2.0).ceil() as usize;
            let rule = gauss_legendre(PANEL_ORDER);
            let mut acc = CSum::new();
            for p in uniform_breaks(lo, hi, panels).windows(2) {
                let (m, h) = (0.5 * (p[0] + p[1]), 0.5 * (p[1] - p[0]));
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    let y = m + h * x;
                    acc.add(C64::new(h * w * f.eval(y) * w_scaled(t, y) / (y * y), 0.0));
                }
            }
            acc.value()
        })
        .collect();
    SpectralCoefficients { t_values: grid.t_values.clone(), scaled }
}

/// `∫ W_t(y) ⟨f, W_t⟩ ρ(t) dt` by the grid rule.
pub fn inverse_transform(coeffs: &SpectralCoefficients, grid: &SpectralGrid, y: f64) -> Result<f64> {
    if coeffs.t_values != grid.t_values {
        return Err(Error::Precondition("coefficients were produced on a different grid".into()));
    }
    if !(y > 0.0) {
        return Err(Error::Domain(format!("inverse transform needs y > 0, got {y}")));
    }
    let mut acc = CSum::new();
    for ((&t, &w), c) in grid.t_values.iter().zip(&grid.weights).zip(&coeffs.scaled) {
        acc.add(*c * (w * rho_scaled(t) * w_scaled(t, y)));
    }
    Ok(acc.value().re)
}

/// Points where the round trip is sampled: 64 equally spaced `y` over 1.25 support radii.
pub fn roundtrip_samples(f: &BumpFunction) -> Vec<f64> {
    let (lo, hi) = (f.center - 1.25 * f.radius, f.center + 1.25 * f.radius);
    let lo = lo.max(0.05 * f.center);
    (0..64).map(|j| lo + (hi - lo) * (j as f64 + 0.5) / 64.0).collect()
}

/// `sup |f(y) - inverse(forward(f))(y)|` over [`roundtrip_samples`].
pub fn roundtrip_error(f: &BumpFunction, grid: &SpectralGrid) -> Result<f64> {
    let coeffs = forward_transform(f, grid);
    let mut worst: f64 = 0.0;
    for y in roundtrip_samples(f) {
        worst = worst.max((f.eval(y) - inverse_transform(&coeffs, grid, y)?).abs());
    }
    Ok(worst)
}

/// `Σ w ρ |⟨f, W_t⟩|²` against `∫ |f|² dy/y²`, returned as `(spectral, spatial)`.
pub fn parseval(f: &BumpFunction, grid: &SpectralGrid) -> (f64, f64) {
    let coeffs = forward_transform(f, grid);
    let spectral = grid
        .t_values
        .iter()
        .zip(&grid.weights)
        .zip(&coeffs.scaled)
        .map(|((&t, &w), c)| w * rho_scaled(t) * c.norm_sqr())
        .sum::<f64>();
    let (lo, hi) = (f.center - f.radius, f.center + f.radius);
    let spatial = crate::numerics::quad::integrate_panels_real(
        |y| {
            let v = f.eval(y);
            v * v / (y * y)
        },
        &uniform_breaks(lo, hi, 64),
        PANEL_ORDER,
    );
    (spectral, spatial)
}

/// Largest `t` on the grid whose weighted coefficient `ρ(t)|⟨f, W_t⟩| e^{-πt/2}` exceeds `tol`.
pub fn decay_cutoff(f: &BumpFunction, grid: &SpectralGrid, tol: f64) -> f64 {
    let coeffs = forward_transform(f, grid);
    let mut cut = 0.0;
    for (j, &t) in grid.t_values.iter().enumerate() {
        if (rho_scaled(t) * coeffs.scaled[j].norm()) > tol {
            cut = t;
        }
    }
    cut
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn density_closed_form() {
        assert_eq!(plancherel_density(0.0), 0.0);
        assert!(plancherel_density(1e-8) < 1e-15);
        for t in [1e-3, 0.2, 1.0, 3.7, 10.0, 55.0] {
            let want = t * (PI * t).tanh() / PI;
            assert!((plancherel_density(t) - want).abs() <= 1e-10 * want, "t={t}");
        }
        assert!((plancherel_density(10.0) - 10.0 / PI).abs() < 1e-10);
        let mut prev = 0.0;
        for k in 1..200 {
            let d = plancherel_density(0.05 * k as f64);
            assert!(d > prev);
            prev = d;
        }
    }

    #[test]
    fn grid_validation() {
        assert!(SpectralGrid::new(vec![1.0, 1.0], vec![1.0, 1.0]).is_err());
        assert!(SpectralGrid::new(vec![-1.0], vec![1.0]).is_err());
        assert!(SpectralGrid::new(vec![1.0], vec![0.0]).is_err());
        let g = SpectralGrid::gauss(40.0, 400).unwrap();
        assert_eq!(g.len(), 400);
        assert!((g.weights.iter().sum::<f64>() - 40.0).abs() < 1e-12);
        assert!((g.t_max() - 40.0).abs() < 1e-12);
    }

    #[test]
    fn zero_bump_and_linearity() {
        let g = SpectralGrid::gauss(20.0, 64).unwrap();
        let c = forward_transform(&BumpFunction::zero(), &g);
        assert!(c.scaled.iter().all(|z| *z == C64::new(0.0, 0.0)));
        assert_eq!(inverse_transform(&c, &g, 1.0).unwrap(), 0.0);
        assert_eq!(roundtrip_error(&BumpFunction::zero(), &g).unwrap(), 0.0);
        let f = BumpFunction::canonical();
        let c1 = forward_transform(&f, &g);
        let c2 = SpectralCoefficients { t_values: c1.t_values.clone(), scaled: c1.scaled.iter().map(|z| 2.5 * z).collect() };
        let (a, b) = (inverse_transform(&c1, &g, 0.9).unwrap(), inverse_transform(&c2, &g, 0.9).unwrap());
        assert!((b - 2.5 * a).abs() <= 1e-14 * b.abs());
    }

    #[test]
    fn coefficient_oracle_and_decay() {
        let f = BumpFunction::canonical();
        let g = SpectralGrid::new(vec![2.0], vec![1.0]).unwrap();
        let v = forward_transform(&f, &g).value(0);
        // mpmath: ∫_{1/2}^{3/2} f(y) √(8/π) √y K_{2i}(2πy) dy/y²
        assert!((v.re - COEFF_T2).abs() < 1e-10 * COEFF_T2.abs(), "{v}");
        // |⟨f, W_t⟩| ≤ C_6 t^{-6} |c(1, μ)| on [1, 40] with C_6 frozen at 1e7 (observed max 2.65e6 at t = 40)
        let grid = SpectralGrid::gauss(40.0, 160).unwrap();
        let c = forward_transform(&f, &grid);
        for (j, &t) in grid.t_values.iter().enumerate() {
            if t >= 1.0 {
                let c1 = 1.0 / (PI * t).cosh().sqrt();
                let env = c.value(j).norm() * t.powi(6) / c1;
                assert!(env < 1e7, "t={t}: {env}");
            }
        }
    }

    const COEFF_T2: f64 = 7.654_435_774_859_315e-4;

    #[test]
    fn roundtrip_and_parseval() {
        let f = BumpFunction::canonical();
        let g = SpectralGrid::certified(&f, CERTIFICATE_TOL, NODES_PER_UNIT).unwrap();
        let e = roundtrip_error(&f, &g).unwrap();
        assert!(e <= 1e-4, "{e}");
        let (s, x) = parseval(&f, &g);
        assert!((s - x).abs() <= 1e-3 * x, "{s} {x}");
    }

    #[test]
    fn short_grid_is_truncation_limited() {
        // at t_max = 40 the error is the spectral tail, so refining does not help
        let f = BumpFunction::canonical();
        let g = SpectralGrid::gauss(40.0, 400).unwrap();
        let e = roundtrip_error(&f, &g).unwrap();
        assert!(e > 1e-3 && e < 1e-2, "{e}");
        let (s, x) = parseval(&f, &g);
        assert!((s - x).abs() <= 1e-3 * x);
    }

    #[test]
    fn refinement_reduces_error() {
        let f = BumpFunction::canonical();
        let coarse = SpectralGrid::gauss(240.0, 128).unwrap();
        let e1 = roundtrip_error(&f, &coarse).unwrap();
        let e2 = roundtrip_error(&f, &coarse.refined().unwrap()).unwrap();
        assert!(e2 < 0.5 * e1, "{e1} {e2}");
    }
}
