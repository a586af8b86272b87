//! Power-series pieces `M_τ` of spherical Whittaker functions near a wall.
//!
//! For `τ ∈ C^{s+1}`,
//! `M_τ(a) = Σ_{k ∈ Z^s_{≥0}} P_k(τ) W'_{(τ)^s + 2k}(a_1/a_{s+1}, …, a_s/a_{s+1})`,
//! where `(τ)^s` is the first `s` coordinates and `W'` is the `GL(1)` power
//! (`s = 1`) or the `δ^{1/2}`-normalized `GL(2)` function (`s = 2`).
//! The coefficients are computed from their holomorphic product form
//! `E_k(x) = (-1)^{k+1} x π^{k-x/2} / (2Γ(1+k-x/2))`, which stays finite where
//! the defining quotient of `Γ_R` values is `0/0`.

use crate::error::{Error, Result};
use crate::gamma_factors::LanglandsParams;
use crate::numerics::gamma::ln_gamma;
use crate::numerics::quad::CSum;
use crate::numerics::rpow;
use crate::whittaker::{whittaker_gl2_prime, DiagonalPoint, KAPPA2};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// Default truncation order per coordinate.
pub const DEFAULT_K_MAX: usize = 24;

/// Parameters of one `M`-series.
#[derive(Debug, Clone, PartialEq)]
pub struct MSeriesSpec {
    pub tau: LanglandsParams,
    pub s: usize,
    pub k_max: usize,
}

impl MSeriesSpec {
    pub fn new(tau: LanglandsParams, s: usize, k_max: usize) -> Result<Self> {
        if !(1..=2).contains(&s) {
            return Err(Error::Precondition(format!("pivot s must be 1 or 2, got {s}")));
        }
        if tau.n() != s + 1 {
            return Err(Error::Precondition(format!("tau must have dimension s+1 = {}, got {}", s + 1, tau.n())));
        }
        if tau.mu.iter().any(|t| t.re < 0.0) {
            return Err(Error::Precondition("M-series needs Re(tau_i) >= 0".into()));
        }
        if k_max < 8 {
            return Err(Error::Precondition(format!("k_max must be at least 8, got {k_max}")));
        }
        Ok(Self { tau, s, k_max })
    }
}

/// `2(-π)^k / k!`, the residue of `Γ_R` at `-2k`.
fn residue(k: usize) -> f64 {
    let mut v = 2.0;
    for j in 1..=k {
        v *= -PI / j as f64;
    }
    v
}

/// `E_k(x) = Γ_R(x - 2k) / (Γ_R(x) Γ_R(-x))` in entire form.
pub fn e_factor(k: usize, x: C64) -> C64 {
    if x == C64::new(0.0, 0.0) {
        return C64::new(0.0, 0.0);
    }
    let sign = if k.is_multiple_of(2) { -1.0 } else { 1.0 };
    let arg = 1.0 + k as f64 - 0.5 * x;
    let log = (k as f64 - 0.5 * x) * PI.ln() - ln_gamma_safe(arg);
    sign * 0.5 * x * log.exp()
}

/// `ln Γ` that maps the poles of `Γ` to `+∞` so that `1/Γ` becomes exactly zero.
fn ln_gamma_safe(z: C64) -> C64 {
    if z.im == 0.0 && z.re <= 0.0 && z.re == z.re.round() {
        return C64::new(f64::INFINITY, 0.0);
    }
    ln_gamma(z)
}

fn check_k(spec: &MSeriesSpec, k: &[usize]) -> Result<()> {
    if k.len() != spec.s {
        return Err(Error::Precondition(format!("k must have length s = {}", spec.s)));
    }
    Ok(())
}

/// `P_k(τ)` from the expanded product form.
pub fn p_coeff(spec: &MSeriesSpec, k: &[usize]) -> Result<C64> {
    check_k(spec, k)?;
    let t = &spec.tau.mu;
    Ok(match spec.s {
        1 => residue(k[0]) * e_factor(k[0], t[1] - t[0]),
        _ => {
            let (k1, k2) = (k[0], k[1]);
            let w = t[0] - t[1] + 2.0 * (k1 as f64 - k2 as f64);
            residue(k1)
                * residue(k2)
                * e_factor(k1, t[1] - t[0])
                * e_factor(k1, t[2] - t[0])
                * e_factor(k2, t[2] - t[1])
                * e_factor(k1, w)
        }
    })
}

/// Truncated series value with its tail estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: C64,
    pub tail: f64,
    /// Largest single term magnitude, the scale for cancellation-aware residuals.
    pub max_term: f64,
}

/// `M_τ(a)` truncated at `k_max` per coordinate.
///
/// For `s = 1` the tail is bounded by the geometric envelope of the term
/// ratio `π² y² / ((k+1)(k+1-|x|/2))`, `y = a_1/a_2`. For `s = 2` it is the
/// outermost shell times `r/(1-r)`, with `r` the ratio of the last two shells.
pub fn m_series(spec: &MSeriesSpec, a: &DiagonalPoint, tolerance: f64) -> Result<SeriesValue> {
    if a.n() != spec.s + 1 {
        return Err(Error::Precondition(format!("a must have size s+1 = {}", spec.s + 1)));
    }
    let last = a.a[spec.s];
    let b: Vec<f64> = a.a[..spec.s].iter().map(|x| x / last).collect();
    let t = &spec.tau.mu;
    let mut acc = CSum::new();
    let mut max_term: f64 = 0.0;
    let tail;
    if spec.s == 1 {
        let y = b[0];
        let mut last_term = 0.0;
        for k in 0..=spec.k_max {
            let term = p_coeff(spec, &[k])? * rpow(y, t[0] + 2.0 * k as f64);
            max_term = max_term.max(term.norm());
            last_term = term.norm();
            acc.add(term);
        }
        let x = (t[1] - t[0]).norm();
        let k1 = (spec.k_max + 1) as f64;
        let denom = k1 * (k1 - 0.5 * x);
        let r = if denom > 0.0 { PI * PI * y * y / denom } else { f64::INFINITY };
        tail = if r < 1.0 { last_term * r / (1.0 - r) } else { f64::INFINITY };
    } else {
        let bp = DiagonalPoint { a: b };
        let mut shells = vec![0.0; spec.k_max + 1];
        for k1 in 0..=spec.k_max {
            for k2 in 0..=spec.k_max {
                let p = p_coeff(spec, &[k1, k2])?;
                if p == C64::new(0.0, 0.0) {
                    continue;
                }
                let nu = LanglandsParams { mu: vec![t[0] + 2.0 * k1 as f64, t[1] + 2.0 * k2 as f64] };
                let term = p * whittaker_gl2_prime(&nu, &bp);
                max_term = max_term.max(term.norm());
                shells[k1.max(k2)] += term.norm();
                acc.add(term);
            }
        }
        let (outer, inner) = (shells[spec.k_max], shells[spec.k_max - 1]);
        let r = if inner > 0.0 { outer / inner } else { 0.0 };
        tail = if r < 1.0 { outer * r / (1.0 - r) } else { f64::INFINITY };
    }
    if !(tail <= tolerance) {
        return Err(Error::Truncation { tail, tolerance });
    }
    Ok(SeriesValue { value: acc.value(), tail, max_term })
}

/// Checks the decomposition regime: `Re(μ_i) ∈ (0, 0.05]`, pairwise apart by `5e-3`.
fn check_small_regime(mu: &LanglandsParams) -> Result<()> {
    for (i, m) in mu.mu.iter().enumerate() {
        if !(m.re > 0.0 && m.re <= 0.05) {
            return Err(Error::Precondition(format!("Re(mu_{}) = {} outside (0, 0.05]", i + 1, m.re)));
        }
        for m2 in &mu.mu[i + 1..] {
            if (m.re - m2.re).abs() < 5e-3 {
                return Err(Error::Precondition("real parts of mu must differ by at least 5e-3".into()));
            }
        }
    }
    Ok(())
}

/// Both sides of `W'_μ(a) / (c(μ)c(-μ)) = κ a_2^{Σμ} (M_μ(a) + M_{σμ}(a))` on `GL(2)`.
pub fn decompose_gl2(mu: &LanglandsParams, a: &DiagonalPoint) -> Result<(C64, C64)> {
    if mu.n() != 2 || a.n() != 2 {
        return Err(Error::Precondition("decompose_gl2 needs GL(2) data".into()));
    }
    check_small_regime(mu)?;
    if a.a[0] > a.a[1] {
        return Err(Error::Regime(format!("decomposition needs a_1 <= a_2, got ratio {}", a.a[0] / a.a[1])));
    }
    let x = mu.mu[0] - mu.mu[1];
    // 1/(Γ_R(x)Γ_R(-x)) = -x sin(πx/2)/(2π)
    let inv_cc = -x * crate::numerics::sin_pi(0.5 * x) / (2.0 * PI);
    let lhs = whittaker_gl2_prime(mu, a) * inv_cc;
    let swapped = LanglandsParams { mu: vec![mu.mu[1], mu.mu[0]] };
    let m1 = m_series(&MSeriesSpec::new(mu.clone(), 1, DEFAULT_K_MAX)?, a, 1e-13)?;
    let m2 = m_series(&MSeriesSpec::new(swapped, 1, DEFAULT_K_MAX)?, a, 1e-13)?;
    let rhs = KAPPA2 * rpow(a.a[1], mu.sum()) * (m1.value + m2.value);
    Ok((lhs, rhs))
}

/// `|M_τ(a)|` divided by the largest single term, for `τ_1 ≡ τ_2 mod 2`.
pub fn m_vanishing(tau: &LanglandsParams, a: &DiagonalPoint) -> Result<f64> {
    let spec = MSeriesSpec::new(tau.clone(), 2, DEFAULT_K_MAX)?;
    if a.n() != 3 {
        return Err(Error::Precondition("m_vanishing needs a of size 3".into()));
    }
    let v = m_series(&spec, a, f64::INFINITY)?;
    Ok(v.value.norm() / v.max_term)
}

/// Whether `τ_1 - τ_2` lies in `2Z` up to `tol`.
pub fn congruent_mod_two(tau: &LanglandsParams, tol: f64) -> bool {
    let d = tau.mu[0] - tau.mu[1];
    d.im.abs() <= tol && (0.5 * d.re - (0.5 * d.re).round()).abs() * 2.0 <= tol
}

/// Smallest pivot `s ∈ [1, n]` with `max(a_1..a_s) ≤ min(1, min(a_{s+1}..a_n))`.
pub fn pop_classify(a: &[f64]) -> Option<usize> {
    let n = a.len();
    let mut suffix_min = vec![1.0f64; n + 1];
    for i in (0..n).rev() {
        suffix_min[i] = suffix_min[i + 1].min(a[i]);
    }
    let mut prefix_max = f64::NEG_INFINITY;
    for s in 1..=n {
        prefix_max = prefix_max.max(a[s - 1]);
        if prefix_max <= suffix_min[s] {
            return Some(s);
        }
    }
    None
}
