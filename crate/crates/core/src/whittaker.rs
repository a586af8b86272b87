//! Spherical Whittaker functions of `GL(2)` and `GL(3)`.
//!
//! `GL(2)` has the closed form
//! `W_μ(a) = d_2 (a_1/a_2)^{1/2} (a_1 a_2)^{(μ_1+μ_2)/2} K_{(μ_1-μ_2)/2}(2π a_1/a_2)`,
//! with `d_2 = √(8/π)` fixed by `∫_0^∞ |W_μ(diag(y,1))|² dy/y = |c(1, μ)|²`.
//! The same function is also available as a Jacquet integral (convergent
//! for `Re(μ_1 - μ_2) > 0`) and as a Mellin–Barnes integral over `GL(1)`
//! parameters. `GL(3)` is built from `GL(2)` by the Mellin–Barnes recursion
//! over `ν' = (c + d, c - d)`:
//!
//! `W_ν(a) = κ_3 a_3^{Σν} ∫∫ W_{ν'}(a_1/a_3, a_2/a_3) L(1/2, ν, -ν') / (c(ν') c(-ν')) dc dd`
//!
//! where both integrals run over vertical lines, with `dc/(2πi)` and `dd/(2πi)`.
//! The constant `κ_3 = 1/4` makes `‖W_ν‖² = |c(1, ν)|²` in the Kirillov norm
//! `∫∫ |W(diag(a_1, a_2, 1))|² (a_2/a_1) d×a_1 d×a_2`.

use crate::error::{Error, Result};
use crate::gamma_factors::{c_func, LanglandsParams};
use crate::numerics::bessel::bessel_k_scaled_any;
use crate::numerics::quad::{contour_integral, integrate_panels, uniform_breaks, CSum, VerticalContour};
use crate::numerics::{bessel_k, ln_gamma_r, rpow, sin_pi};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Positive diagonal torus element.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalPoint {
    pub a: Vec<f64>,
}

impl DiagonalPoint {
    pub fn new(a: Vec<f64>) -> Result<Self> {
        if a.is_empty() || a.iter().any(|&x| !(x > 0.0)) {
            return Err(Error::Precondition(format!("diagonal entries must be positive: {a:?}")));
        }
        Ok(Self { a })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    /// `z·a`.
    pub fn scaled(&self, z: f64) -> Self {
        Self { a: self.a.iter().map(|x| x * z).collect() }
    }
}

/// `δ(a)^{1/2}` with `δ(a) = ∏_{j<k} a_j/a_k`.
pub fn delta_half(a: &DiagonalPoint) -> f64 {
    let n = a.n();
    let mut log = 0.0;
    for j in 0..n {
        for k in j + 1..n {
            log += a.a[j].ln() - a.a[k].ln();
        }
    }
    (0.5 * log).exp()
}

/// Normalizing constants of the Whittaker functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WhittakerNormalization {
    /// `GL(2)` constant in front of the Bessel closed form.
    pub d2: f64,
    /// `GL(3)` constant `κ_3` in front of the recursion integral.
    pub d3: f64,
    /// Constant of the two-term decomposition into `M`-series, and of the `GL(2)` Mellin–Barnes form.
    pub kappa2: f64,
}

/// `d_2 = √(8/π)`.
pub const D2: f64 = 1.595_769_121_605_730_7;
/// `κ_3 = 1/4`.
pub const D3: f64 = 0.25;
/// `κ = d_2/4 = 1/√(2π)`.
pub const KAPPA2: f64 = 0.398_942_280_401_432_7;

impl WhittakerNormalization {
    pub const FROZEN: Self = Self { d2: D2, d3: D3, kappa2: KAPPA2 };
}

fn check_gl(mu: &LanglandsParams, a: &DiagonalPoint, n: usize) -> Result<()> {
    if mu.n() != n || a.n() != n {
        return Err(Error::Precondition(format!("expected GL({n}) data, got mu of size {} and a of size {}", mu.n(), a.n())));
    }
    Ok(())
}

/// `W'_μ(a) = δ^{-1/2}(a) W_μ(a)` for `GL(2)`, any complex `μ`.
pub fn whittaker_gl2_prime(mu: &LanglandsParams, a: &DiagonalPoint) -> C64 {
    let (m1, m2) = (mu.mu[0], mu.mu[1]);
    let nu = 0.5 * (m1 - m2);
    let y = a.a[0] / a.a[1];
    let k = bessel_k_scaled_any(nu, 2.0 * PI * y);
    let log_pre = 0.5 * (m1 + m2) * (a.a[0] * a.a[1]).ln() - 0.5 * PI * nu.im.abs();
    D2 * log_pre.exp() * k
}

/// `GL(2)` spherical Whittaker function in closed form.
pub fn whittaker_gl2(mu: &LanglandsParams, a: &DiagonalPoint) -> Result<C64> {
    check_gl(mu, a, 2)?;
    if (mu.mu[0] - mu.mu[1]).re.abs() > 2.0 {
        return Err(Error::Precondition("whittaker_gl2 needs |Re(mu_1 - mu_2)| <= 2".into()));
    }
    Ok(whittaker_gl2_prime(mu, a) * delta_half(a))
}

/// `∫_0^∞ |W_{(it,-it)}(diag(y,1))|² dy/y` with unit constant in front of the Bessel form.
pub fn raw_gl2_norm_sq(t: f64) -> f64 {
    // substitute y = e^x; |K_{it}(2πy)|² = e^{-πt} |scaled K|²
    let nu = C64::new(0.0, t);
    let breaks = uniform_breaks(-30.0, 15f64.ln(), ((30.0 + 2.71) * (1.0 + t / 4.0) * 2.0) as usize);
    let v = integrate_panels(
        |x| {
            let y = x.exp();
            let k = bessel_k_scaled_any(nu, 2.0 * PI * y);
            C64::new(y * k.norm_sqr(), 0.0)
        },
        &breaks,
        16,
    );
    v.re * (-PI * t).exp()
}

/// Fits `d_2` so that `‖W_{(it,-it)}‖² = |c(1, μ)|²` on every grid point.
///
/// Fails when the fitted constant varies by more than `1e-5` relative across the grid.
pub fn calibrate_gl2_norm(t_grid: &[f64]) -> Result<WhittakerNormalization> {
    if t_grid.is_empty() || t_grid.iter().any(|&t| !(t > 0.0)) {
        return Err(Error::Precondition("calibration grid must be nonempty with t > 0".into()));
    }
    let fits: Vec<f64> = t_grid
        .iter()
        .map(|&t| {
            let target = c_func(1.0, &LanglandsParams::gl2_tempered(t)).map(|c| c.norm_sqr());
            target.map(|target| (target / raw_gl2_norm_sq(t)).sqrt())
        })
        .collect::<Result<_>>()?;
    let mean = fits.iter().sum::<f64>() / fits.len() as f64;
    let spread = fits.iter().map(|f| (f - mean).abs() / mean).fold(0.0, f64::max);
    if spread > 1e-5 {
        return Err(Error::Calibration { spread, limit: 1e-5 });
    }
    Ok(WhittakerNormalization { d2: mean, ..WhittakerNormalization::FROZEN })
}

/// Relative defect of the norm identity `‖W_μ‖² = |c(1, μ)|²` with the frozen `d_2`.
pub fn stade_norm_defect(t: f64) -> Result<f64> {
    let target = c_func(1.0, &LanglandsParams::gl2_tempered(t))?.norm_sqr();
    Ok((D2 * D2 * raw_gl2_norm_sq(t) - target).abs() / target)
}

/// `GL(2)` Jacquet integral `∫ I_μ(w n(x) a) e(-x) dx`, rescaled to the closed-form normalization.
///
/// The `x` integral is `(a_1 a_2)^{1/2+μ_1} ∫ (a_1² + x² a_2²)^{-(1+ν)/2} e(-x) dx`
/// with `ν = μ_1 - μ_2`. Each half line is rotated by `∓π/4` into the half plane
/// where `e(-x)` decays, and the rays are cut at `|x| = height`.
pub fn jacquet_gl2(mu: &LanglandsParams, a: &DiagonalPoint, height: f64) -> Result<C64> {
    check_gl(mu, a, 2)?;
    let nu = mu.mu[0] - mu.mu[1];
    if !(nu.re > 0.0) {
        return Err(Error::Regime(format!("Jacquet integral needs Re(mu_1 - mu_2) > 0, got {}", nu.re)));
    }
    let (a1, a2) = (a.a[0], a.a[1]);
    let expo = -(1.0 + nu) * 0.5;
    let ray = |dir: C64| {
        move |r: f64| {
            let x = dir * r;
            let base = a1 * a1 + x * x * (a2 * a2);
            (expo * base.ln()).exp() * (C64::new(0.0, -2.0 * PI) * x).exp() * dir
        }
    };
    let down = C64::from_polar(1.0, -PI / 4.0);
    let up = -C64::from_polar(1.0, PI / 4.0);
    let tail = ray(down)(height).norm() + ray(up)(height).norm();
    if tail > 1e-14 {
        return Err(Error::TailNotNegligible { tail, tolerance: 1e-14 });
    }
    let breaks = uniform_breaks(0.0, height, (height * 2.0).ceil() as usize);
    // x < 0 is traversed from -∞ to 0 along the upper ray, hence the sign
    let j = integrate_panels(ray(down), &breaks, 16) - integrate_panels(ray(up), &breaks, 16);
    let pre = rpow(a1 * a2, 0.5 + mu.mu[0]);
    let c1 = c_func(1.0, mu)?;
    Ok(0.5 * D2 * c1 * pre * j)
}

/// `GL(2)` Whittaker function from its Mellin–Barnes integral over one `GL(1)` parameter:
/// `κ a_2^{Σν} ∫_{(σ)} (a_1/a_2)^{ν'} Γ_R(1/2 + ν_1 - ν') Γ_R(1/2 + ν_2 - ν') dν'/(2πi)`.
pub fn stade_gl2_mellin_barnes(nu: &LanglandsParams, a: &DiagonalPoint, contour: &VerticalContour) -> Result<C64> {
    check_gl(nu, a, 2)?;
    if nu.mu.iter().any(|m| m.re < 0.0) {
        return Err(Error::Precondition("Mellin-Barnes form needs Re(nu_i) >= 0".into()));
    }
    let nearest = nu.mu.iter().map(|m| 0.5 + m.re).fold(f64::INFINITY, f64::min) - contour.sigma;
    if nearest < 1e-3 {
        return Err(Error::PoleProximity { at: C64::new(contour.sigma + nearest, 0.0), distance: nearest.abs() });
    }
    let ly = (a.a[0] / a.a[1]).ln();
    let f = |s: C64| (s * ly + ln_gamma_r(0.5 + nu.mu[0] - s) + ln_gamma_r(0.5 + nu.mu[1] - s)).exp();
    let r = contour_integral(f, contour, 1e-9)?;
    Ok(KAPPA2 * rpow(a.a[1], nu.sum()) * r.value)
}

/// Default contour for [`stade_gl2_mellin_barnes`] at `a`.
///
/// The line sits where the integrand is smallest on the real axis, which keeps the
/// cancellation mild when `a_1/a_2` is large and `W` is exponentially small.
pub fn gl2_mb_contour(nu: &LanglandsParams, a: &DiagonalPoint) -> VerticalContour {
    let spread = nu.mu.iter().map(|m| m.im.abs()).fold(0.0, f64::max);
    let ly = (a.a[0] / a.a[1]).ln();
    let cap = (nu.mu.iter().map(|m| m.re).fold(f64::INFINITY, f64::min) + 0.25).min(0.0);
    let sigma = least_magnitude_sigma(cap, |c| {
        let cc = C64::new(c, 0.0);
        c * ly + nu.mu.iter().map(|m| ln_gamma_r(0.5 + m - cc).re).sum::<f64>()
    });
    VerticalContour::with_panel_width(sigma, 60.0 + 2.0 * spread, 1.0)
}

/// `log |integrand|` of the `GL(3)` recursion at `(c, d)`.
fn gl3_log_integrand(nu: &LanglandsParams, lb: f64, y: f64, c: C64, d: C64) -> f64 {
    let mut lg = c * lb;
    for m in &nu.mu {
        lg += ln_gamma_r(0.5 + m - c - d) + ln_gamma_r(0.5 + m - c + d);
    }
    let k = bessel_k_scaled_any(d, 2.0 * PI * y).norm().max(1e-300);
    let w = if d.norm() < 1e-12 { 1e-300 } else { (d * sin_pi(d) / PI).norm() };
    lg.re + k.ln() - 0.5 * PI * d.im.abs() + w.ln()
}

/// Real part of `c` giving the smallest integrand on the real axis, kept left of every pole.
fn gl3_sigma(nu: &LanglandsParams, lb: f64) -> f64 {
    let cap = nu.mu.iter().map(|m| m.re).fold(f64::INFINITY, f64::min) + 0.5 - 0.25;
    least_magnitude_sigma(cap, |c| {
        let cc = C64::new(c, 0.0);
        c * lb + nu.mu.iter().map(|m| 2.0 * ln_gamma_r(0.5 + m - cc).re).sum::<f64>()
    })
}

/// Scans leftwards from `cap` with growing steps for the minimum of `logmag`.
fn least_magnitude_sigma(cap: f64, logmag: impl Fn(f64) -> f64) -> f64 {
    let (mut best, mut best_v) = (cap, logmag(cap));
    let mut c = cap;
    let mut step = 0.05;
    while c > -1e4 {
        c -= step;
        step *= 1.02;
        let v = logmag(c);
        if v < best_v {
            best = c;
            best_v = v;
        } else if v > best_v + 5.0 {
            break;
        }
    }
    best
}

/// Contour for [`whittaker_gl3`] with the real part of `c` chosen to minimise
/// cancellation at `a`, and the height doubled from 16 until the integrand at
/// both ends of each line is `e^{-36}` below its value at the centre.
pub fn gl3_contour(nu: &LanglandsParams, a: &DiagonalPoint) -> VerticalContour {
    let b1 = a.a[0] / a.a[2];
    let b2 = a.a[1] / a.a[2];
    let (lb, y) = ((b1 * b2).ln(), b1 / b2);
    let sigma = gl3_sigma(nu, lb);
    let probe = C64::new(0.0, 0.5);
    let peak = gl3_log_integrand(nu, lb, y, C64::new(sigma, 0.0), probe);
    let mut height = 16.0;
    while height < 1024.0 {
        let edge_c = gl3_log_integrand(nu, lb, y, C64::new(sigma, height), probe)
            .max(gl3_log_integrand(nu, lb, y, C64::new(sigma, -height), probe));
        let edge_d = gl3_log_integrand(nu, lb, y, C64::new(sigma, 0.0), C64::new(0.0, height));
        if edge_c.max(edge_d) < peak - 36.0 {
            break;
        }
        height *= 1.5;
    }
    VerticalContour::with_panel_width(sigma, height, 2.0)
}

/// `GL(3)` value `W'_ν(a) = δ^{-1/2}(a) W_ν(a)` from the Mellin–Barnes recursion.
///
/// `contour.sigma` is the real part of the central variable `c`; the `d`
/// line is `Re d = 0` with the same height and node count.
pub fn whittaker_gl3_prime(nu: &LanglandsParams, a: &DiagonalPoint, contour: &VerticalContour) -> Result<C64> {
    check_gl(nu, a, 3)?;
    let nearest = nu.mu.iter().map(|m| 0.5 + m.re).fold(f64::INFINITY, f64::min) - contour.sigma;
    if nearest < 1e-3 {
        return Err(Error::PoleProximity { at: C64::new(contour.sigma + nearest, 0.0), distance: nearest.abs() });
    }
    if !(contour.height > 0.0) || contour.nodes < 8 {
        return Err(Error::TailNotNegligible { tail: f64::INFINITY, tolerance: 0.0 });
    }
    let b1 = a.a[0] / a.a[2];
    let b2 = a.a[1] / a.a[2];
    let lb = (b1 * b2).ln();
    let y = b1 / b2;
    let line = contour.nodes_and_weights();
    let d_nodes: Vec<(f64, f64)> = line.iter().copied().filter(|&(t, _)| t > 0.0).collect();
    // the d-integrand is even in d, so only Im d > 0 is summed and doubled
    let d_tail_from = d_nodes.len() - (d_nodes.len() / 10).max(1);
    let mut d_factor = Vec::with_capacity(d_nodes.len());
    for &(eta, w) in &d_nodes {
        let d = C64::new(0.0, eta);
        // 1/(Γ_R(2d)Γ_R(-2d)) = -d sin(πd)/π; for d = iη this is η sinh(πη)/π
        let weight = -d * sin_pi(d) / PI;
        let k = bessel_k_scaled_any(d, 2.0 * PI * y);
        d_factor.push((d, weight * k * (2.0 * w), 0.5 * PI * eta));
    }
    let mut acc = CSum::new();
    let mut tail = 0.0;
    let total = line.len();
    for (j, &(tc, wc)) in line.iter().enumerate() {
        let c = C64::new(contour.sigma, tc);
        let mut inner = CSum::new();
        let mut inner_abs = 0.0;
        let mut inner_tail = 0.0;
        for (k, &(d, dk, unscale)) in d_factor.iter().enumerate() {
            let mut lg = c * lb - unscale;
            for m in &nu.mu {
                lg += ln_gamma_r(0.5 + m - c - d) + ln_gamma_r(0.5 + m - c + d);
            }
            let v = lg.exp() * dk;
            inner_abs += v.norm();
            if k >= d_tail_from {
                inner_tail += v.norm();
            }
            inner.add(v);
        }
        acc.add(inner.value() * wc);
        tail += inner_tail * wc;
        if crate::numerics::quad::is_tail_node(j, total) {
            tail += inner_abs * wc;
        }
    }
    // W_{ν'}(b) = (b_1/b_2)^{1/2} W'_{ν'}(b) and δ^{1/2}(a) = b_1 combine to (b_1 b_2)^{-1/2}
    let value = acc.value() * (D2 * D3 / (b1 * b2).sqrt()) * rpow(a.a[2], nu.sum());
    let scale = acc.value().norm();
    if tail > 1e-8 * scale && tail > 1e-300 {
        return Err(Error::TailNotNegligible { tail, tolerance: 1e-8 * scale });
    }
    Ok(value)
}

/// `GL(3)` spherical Whittaker function `δ^{1/2}(a) W'_ν(a)`.
pub fn whittaker_gl3(nu: &LanglandsParams, a: &DiagonalPoint, contour: &VerticalContour) -> Result<C64> {
    Ok(whittaker_gl3_prime(nu, a, contour)? * delta_half(a))
}

/// `K_ν(x)` re-exported for callers that want the unscaled Bessel value.
pub fn bessel(nu: C64, x: f64) -> Result<C64> {
    bessel_k(nu, x)
}
