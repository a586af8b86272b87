//! The `GL(2) × GL(1)` newvector pipeline.
//!
//! A vector `V` of a representation `Π` of `GL(2, R)` with trivial central
//! character is fixed by its Kirillov restriction `V[diag(y, 1)] = f(y)`,
//! with `f` a normalized bump on the positive reals. Two applications of the
//! local functional equation give
//!
//! ```text
//! V[diag(C, t) w]           = ∫_(σ) t^s Θ(s, Π) f̃(s) ds/2πi
//! V[(1, 0; c/C, 1)] - V(1)  = ∫_(0) Θ(s, Π) ∫ (e(-c/t) - 1) V[diag(C, t) w] t^s d×t ds/2πi
//! ```
//!
//! Vertical integrals use the trapezoid rule with step `2π/L`. By Poisson
//! summation its error is the sum of the side values at `t e^{±kL}` weighted
//! by `e^{∓kσL}`, which is negligible for [`ALIAS_WINDOW`] `= 80`.

use crate::error::{Error, Result};
use crate::gamma_factors::{analytic_conductor, theta_unchecked, LanglandsParams};
use crate::numerics::bump::mellin_bump_line;
use crate::numerics::quad::CSum;
use crate::numerics::{mellin_bump, BumpFunction};
use num_complex::Complex64 as C64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Length `L` of the `log t` period implied by the vertical trapezoid step `2π/L`.
pub const ALIAS_WINDOW: f64 = 80.0;
/// Lines closer than this to the first pole of `Θ` are rejected.
pub const POLE_MARGIN: f64 = 1e-2;
/// Relative size of the discarded vertical tail.
const HEIGHT_TOL: f64 = 1e-16;
/// Relative mass allowed on the outer tenth of a line.
const TAIL_TOL: f64 = 1e-13;
/// Relative size below which side values count as negligible in the defect integral.
const NEGLIGIBLE: f64 = 1e-13;
/// Largest FFT size tried by the defect integral.
const MAX_LOG2_N: u32 = 22;

/// A representation of `GL(2, R)` with parameters `(μ, -μ)`, `|Re μ| < 1/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct Gl2Rep {
    pub params: LanglandsParams,
    pub conductor: f64,
}

impl Gl2Rep {
    pub fn new(params: LanglandsParams) -> Result<Self> {
        if params.n() != 2 {
            return Err(Error::Precondition(format!("Gl2Rep needs n = 2, got {}", params.n())));
        }
        if params.sum().norm() > 1e-12 {
            return Err(Error::Precondition(format!(
                "trivial central character needs mu_1 + mu_2 = 0, got {}",
                params.sum()
            )));
        }
        if params.theta() >= 0.5 {
            return Err(Error::Precondition(format!("theta = {} is not below 1/2", params.theta())));
        }
        let conductor = analytic_conductor(&params);
        Ok(Self { params, conductor })
    }

    /// The tempered representation with `μ = (it, -it)`.
    pub fn tempered(t: f64) -> Self {
        let params = LanglandsParams::gl2_tempered(t);
        Self { conductor: analytic_conductor(&params), params }
    }

    /// `Θ(s, Π)` without the half-plane guard.
    pub fn theta(&self, s: C64) -> C64 {
        theta_unchecked(s, &self.params, self.conductor.ln())
    }

    /// Whether `{μ_j}` is closed under complex conjugation, so that `Θ(s̄) = conj Θ(s)`.
    fn conjugation_closed(&self) -> bool {
        let close = |a: C64, b: C64| (a - b).norm() <= 1e-14 * (1.0 + a.norm());
        let m = &self.params.mu;
        (close(m[0].conj(), m[0]) && close(m[1].conj(), m[1])) || close(m[0].conj(), m[1])
    }

    fn check_line(&self, sigma: f64) -> Result<()> {
        let edge = -0.5 + self.params.theta();
        if sigma <= edge {
            return Err(Error::Pole { what: format!("Theta (needs Re s > {edge:.6})"), at: C64::new(sigma, 0.0) });
        }
        if sigma - edge < POLE_MARGIN {
            return Err(Error::PoleProximity { at: C64::new(edge, 0.0), distance: sigma - edge });
        }
        Ok(())
    }
}

/// A unit vector given by its restriction `f` to the diagonal in the Kirillov model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KirillovVector {
    pub bump: BumpFunction,
}

impl KirillovVector {
    /// The vector with Kirillov restriction `f/‖f‖`; the zero profile stays zero.
    pub fn new(bump: BumpFunction) -> Self {
        Self { bump: bump.normalized() }
    }

    pub fn canonical() -> Self {
        Self::new(BumpFunction::canonical())
    }

    pub fn zero() -> Self {
        Self { bump: BumpFunction::zero() }
    }

    /// `V(1) = f(1)`.
    pub fn value_at_identity(&self) -> f64 {
        self.bump.eval(1.0)
    }
}

/// Truncated vertical line `σ + iτ`, `|τ| ≤ height`, sampled at `τ_k = k·step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineRule {
    pub sigma: f64,
    pub height: f64,
    pub step: f64,
}

impl LineRule {
    pub fn new(sigma: f64, height: f64, step: f64) -> Result<Self> {
        if !(height > 0.0 && step > 0.0 && step < height) {
            return Err(Error::Precondition(format!("bad line rule: height {height}, step {step}")));
        }
        Ok(Self { sigma, height, step })
    }

    /// Height chosen so that `|Θ f̃|` beyond it carries a relative mass below `1e-16`.
    pub fn adaptive(rep: &Gl2Rep, v: &KirillovVector, sigma: f64) -> Result<Self> {
        rep.check_line(sigma)?;
        let g = |tau: f64| {
            let a = (rep.theta(C64::new(sigma, tau)) * mellin_bump(&v.bump, C64::new(sigma, tau))).norm();
            let b = (rep.theta(C64::new(sigma, -tau)) * mellin_bump(&v.bump, C64::new(sigma, -tau))).norm();
            a.max(b)
        };
        let mut taus = vec![0.0, 0.25, 0.5, 0.75];
        let mut tau = 1.0;
        while tau < 2e6 {
            taus.push(tau);
            tau *= 1.08;
        }
        let vals: Vec<f64> = taus.iter().map(|&t| g(t)).collect();
        let mass: f64 = (1..taus.len()).map(|j| 0.5 * (vals[j] + vals[j - 1]) * (taus[j] - taus[j - 1])).sum();
        let step = 2.0 * PI / ALIAS_WINDOW;
        if mass == 0.0 {
            return Self::new(sigma, 10.0 * step, step);
        }
        let last_big = (0..taus.len()).rev().find(|&j| vals[j] * taus[j].max(1.0) > HEIGHT_TOL * mass);
        match last_big {
            Some(j) if j + 1 == taus.len() => Err(Error::TailNotNegligible { tail: vals[j], tolerance: HEIGHT_TOL * mass }),
            Some(j) => Self::new(sigma, (taus[j + 1] / step).ceil() * step, step),
            None => Self::new(sigma, 10.0 * step, step),
        }
    }

    fn half_count(&self) -> usize {
        (self.height / self.step).ceil() as usize
    }
}

/// `G(s) = Θ(s, Π) f̃(s)` sampled on a [`LineRule`], reusable for many `t`.
#[derive(Debug, Clone)]
pub struct LineSamples {
    pub rule: LineRule,
    /// Index of the first sample; samples sit at `τ = (first + k)·step`.
    first: i64,
    values: Vec<C64>,
    /// Only `τ ≥ 0` is stored and the rest is recovered by conjugation.
    conjugate: bool,
}

impl LineSamples {
    pub fn new(rep: &Gl2Rep, v: &KirillovVector, rule: &LineRule) -> Result<Self> {
        rep.check_line(rule.sigma)?;
        let k = rule.half_count() as i64;
        let conjugate = rep.conjugation_closed();
        let first = if conjugate { 0 } else { -k };
        let count = (k - first + 1) as usize;
        let ft = mellin_bump_line(&v.bump, rule.sigma, first as f64 * rule.step, rule.step, count);
        let values: Vec<C64> = ft
            .iter()
            .enumerate()
            .map(|(j, f)| {
                let s = C64::new(rule.sigma, (first + j as i64) as f64 * rule.step);
                if f.norm() == 0.0 {
                    C64::new(0.0, 0.0)
                } else {
                    rep.theta(s) * f
                }
            })
            .collect();
        let out = Self { rule: *rule, first, values, conjugate };
        out.check_tail()?;
        Ok(out)
    }

    /// Samples `G ≡ 1` on `|τ| ≤ height`, the exact-power reference for [`power_fit`].
    pub fn constant(rule: &LineRule) -> Self {
        let k = rule.half_count() as i64;
        Self { rule: *rule, first: 0, values: vec![C64::new(1.0, 0.0); k as usize + 1], conjugate: true }
    }

    fn weight(&self, j: usize) -> f64 {
        let w = self.rule.step / (2.0 * PI);
        if self.conjugate && self.first + j as i64 != 0 {
            2.0 * w
        } else {
            w
        }
    }

    /// `(1/2π) ∫ |G(σ + iτ)| dτ`, so that `|side value at t| ≤ t^σ · majorant`.
    pub fn majorant(&self) -> f64 {
        (0..self.values.len()).map(|j| self.values[j].norm() * self.weight(j)).sum()
    }

    fn check_tail(&self) -> Result<()> {
        let n = self.values.len();
        let edge = (n / 10).max(1);
        let outer = |j: usize| if self.conjugate { j + edge >= n } else { j < edge / 2 + 1 || j + edge / 2 + 1 > n };
        let tail: f64 = (0..n).filter(|&j| outer(j)).map(|j| self.values[j].norm() * self.weight(j)).sum();
        let tolerance = TAIL_TOL * self.majorant();
        if tail > tolerance {
            return Err(Error::TailNotNegligible { tail, tolerance });
        }
        Ok(())
    }

    /// `∫ t^s G(s) ds/2πi` over the sampled line.
    pub fn eval(&self, t: f64) -> C64 {
        let lt = t.ln();
        let scale = (self.rule.sigma * lt).exp();
        let mut acc = CSum::new();
        for (j, g) in self.values.iter().enumerate() {
            let tau = (self.first + j as i64) as f64 * self.rule.step;
            let z = C64::from_polar(1.0, tau * lt) * g * self.weight(j);
            acc.add(if self.conjugate { C64::new(z.re, 0.0) } else { z });
        }
        acc.value() * scale
    }
}

/// `V[diag(C(Π), t) w]` as the integral of `t^s Θ(s, Π) f̃(s)` over the line of `rule`.
pub fn side_value(rep: &Gl2Rep, v: &KirillovVector, t: f64, rule: &LineRule) -> Result<C64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!("side value needs t > 0, got {t}")));
    }
    Ok(LineSamples::new(rep, v, rule)?.eval(t))
}

/// Least-squares slope of `log |value|` against `log t`.
pub fn power_fit(t_grid: &[f64], values: &[C64]) -> Result<f64> {
    let mut pts = Vec::with_capacity(t_grid.len());
    for (&t, v) in t_grid.iter().zip(values) {
        let a = v.norm();
        if !(a > f64::MIN_POSITIVE && a.is_finite()) {
            return Err(Error::DegenerateFit(format!("|value| = {a:e} at t = {t}")));
        }
        pts.push((t.ln(), a.ln()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    Ok(sxy / sxx)
}

fn check_decay_grid(t_grid: &[f64]) -> Result<()> {
    if t_grid.len() < 4 {
        return Err(Error::Precondition(format!("decay fit needs at least 4 points, got {}", t_grid.len())));
    }
    if t_grid.iter().any(|&t| !(t > 0.0 && t <= 0.3)) {
        return Err(Error::Precondition("decay fit needs t in (0, 0.3]".into()));
    }
    if t_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("decay fit needs a strictly decreasing grid".into()));
    }
    if t_grid[0] < 10.0 * t_grid[t_grid.len() - 1] {
        return Err(Error::Precondition("decay fit grid must span a decade".into()));
    }
    Ok(())
}

/// Slope of `log |V[diag(C, t) w]|` against `log t`, using the line `Re s = M`.
pub fn decay_fit(rep: &Gl2Rep, v: &KirillovVector, t_grid: &[f64], m: u32) -> Result<f64> {
    check_decay_grid(t_grid)?;
    let rule = LineRule::adaptive(rep, v, m as f64)?;
    let line = LineSamples::new(rep, v, &rule)?;
    decay_fit_samples(&line, t_grid)
}

/// [`decay_fit`] on precomputed samples.
pub fn decay_fit_samples(line: &LineSamples, t_grid: &[f64]) -> Result<f64> {
    check_decay_grid(t_grid)?;
    let values: Vec<C64> = t_grid.iter().map(|&t| line.eval(t)).collect();
    power_fit(t_grid, &values)
}

/// Uniform grid in `x = log t` for the defect integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DefectGrid {
    pub x_min: f64,
    /// The grid spans `[x_min, x_min + ALIAS_WINDOW)`.
    pub log2_n: u32,
}

impl Default for DefectGrid {
    fn default() -> Self {
        Self { x_min: -10.0, log2_n: 17 }
    }
}

impl DefectGrid {
    fn n(&self) -> usize {
        1 << self.log2_n
    }

    fn dx(&self) -> f64 {
        ALIAS_WINDOW / self.n() as f64
    }

    fn dtau(&self) -> f64 {
        2.0 * PI / ALIAS_WINDOW
    }

    fn x(&self, j: usize) -> f64 {
        self.x_min + self.dx() * j as f64
    }

    /// `τ_k` for FFT bin `k`.
    fn tau(&self, k: usize) -> f64 {
        let n = self.n();
        let kk = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        kk * self.dtau()
    }
}

/// Side values on a [`DefectGrid`] plus `Θ(iτ_k)` at the FFT bins.
struct SideGrid {
    grid: DefectGrid,
    side: Vec<C64>,
    theta: Vec<C64>,
}

fn side_grid(rep: &Gl2Rep, v: &KirillovVector, grid: DefectGrid) -> Result<SideGrid> {
    rep.check_line(0.0)?;
    let n = grid.n();
    let dx = grid.dx();
    let mut planner = FftPlanner::<f64>::new();
    // f̃(iτ_k) = ∫ f(e^x) e^{-iτ_k x} dx
    let mut buf: Vec<C64> = (0..n).map(|j| C64::new(v.bump.eval(grid.x(j).exp()) * dx, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let theta: Vec<C64> = (0..n).map(|k| rep.theta(C64::new(0.0, grid.tau(k)))).collect();
    let mut peak: f64 = 0.0;
    let mut edge: f64 = 0.0;
    for (k, b) in buf.iter_mut().enumerate() {
        // the phases e^{∓iτ_k x_min} of the forward and inverse transforms cancel
        *b *= theta[k];
        peak = peak.max(b.norm());
        if (n / 2).abs_diff(k) < n / 20 {
            edge = edge.max(b.norm());
        }
    }
    if edge > NEGLIGIBLE * peak {
        return Err(Error::TailNotNegligible { tail: edge, tolerance: NEGLIGIBLE * peak });
    }
    // V(e^{x_j}) = (Δτ/2π) Σ_k e^{iτ_k x_j} G(iτ_k)
    planner.plan_fft_inverse(n).process(&mut buf);
    let scale = grid.dtau() / (2.0 * PI);
    for b in buf.iter_mut() {
        *b *= scale;
    }
    let vmax = buf.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let right = buf[n - n / 200..].iter().map(|z| z.norm()).fold(0.0, f64::max);
    if right > NEGLIGIBLE * vmax {
        return Err(Error::Regime(format!(
            "side values at the right end of the window are {:e} of the peak",
            right / vmax.max(f64::MIN_POSITIVE)
        )));
    }
    Ok(SideGrid { grid, side: buf, theta })
}

/// Smallest `t` with `|V[diag(C, t) w]| ≤ ε` certified by `t^M ∫|Θ f̃|` on the lines `Re s = M`.
pub fn certified_cutoff(rep: &Gl2Rep, v: &KirillovVector, eps: f64) -> Result<f64> {
    let mut best = 0.0_f64;
    for m in [2u32, 4] {
        let rule = LineRule::adaptive(rep, v, m as f64)?;
        let maj = LineSamples::new(rep, v, &rule)?.majorant();
        if maj == 0.0 {
            return Ok(f64::INFINITY);
        }
        best = best.max((eps / maj).powf(1.0 / m as f64));
    }
    Ok(best)
}

fn defect_on(sg: &SideGrid, c: f64, x_cut: f64) -> C64 {
    let grid = sg.grid;
    let n = grid.n();
    let dx = grid.dx();
    let mut h: Vec<C64> = (0..n)
        .map(|j| {
            let x = grid.x(j);
            if x < x_cut {
                return C64::new(0.0, 0.0);
            }
            let phase = -2.0 * PI * c * (-x).exp();
            let e = C64::new(-2.0 * (0.5 * phase).sin().powi(2), phase.sin());
            e * sg.side[j] * dx
        })
        .collect();
    // H(iτ_k) = ∫ h(x) e^{iτ_k x} dx
    FftPlanner::<f64>::new().plan_fft_inverse(n).process(&mut h);
    let mut acc = CSum::new();
    for (k, hk) in h.iter().enumerate() {
        let tau = grid.tau(k);
        acc.add(sg.theta[k] * hk * C64::from_polar(1.0, tau * grid.x_min));
    }
    acc.value() * (grid.dtau() / (2.0 * PI))
}

/// Largest `x` in the window such that the side values at and below it are negligible.
fn negligible_below(sg: &SideGrid) -> f64 {
    let vmax = sg.side.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let j = sg.side.iter().position(|z| z.norm() > NEGLIGIBLE * vmax).unwrap_or(0);
    sg.grid.x(j.saturating_sub(1))
}

/// Side values of one `(Π, V)` prepared for repeated defect evaluations.
///
/// The `t` integral is cut below the certified decay threshold, and the grid
/// is refined until `e(-c/t)` is resolved wherever the side values are not
/// negligible.
pub struct DefectContext {
    grids: Vec<SideGrid>,
    x_cut: f64,
    rep: Gl2Rep,
    v: KirillovVector,
}

impl DefectContext {
    pub fn new(rep: &Gl2Rep, v: &KirillovVector, grid: &DefectGrid) -> Result<Self> {
        let sg = side_grid(rep, v, *grid)?;
        let vmax = sg.side.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let x_cut = if vmax == 0.0 { grid.x_min } else { certified_cutoff(rep, v, NEGLIGIBLE * vmax)?.ln().max(grid.x_min) };
        Ok(Self { grids: vec![sg], x_cut, rep: rep.clone(), v: *v })
    }

    /// `log t` below which the side values are certified negligible.
    pub fn x_cut(&self) -> f64 {
        self.x_cut
    }

    /// `V[(1, 0; c/C(Π), 1)] - V(1)` for `|c| ≤ 1`.
    pub fn defect(&mut self, c: f64) -> Result<C64> {
        if c.abs() > 1.0 {
            return Err(Error::Precondition(format!("invariance defect needs |c| <= 1, got {c}")));
        }
        self.scaled(c)
    }

    /// The defect with `c/C(Π)` replaced by `c/(shrink·C(Π))`.
    pub fn subconductor(&mut self, shrink: f64, c: f64) -> Result<C64> {
        if !(shrink > 0.0 && shrink <= 1.0) {
            return Err(Error::Precondition(format!("shrink must lie in (0, 1], got {shrink}")));
        }
        if shrink * self.rep.conductor < 1.0 {
            return Err(Error::Precondition(format!("shrink * C = {} is below 1", shrink * self.rep.conductor)));
        }
        if shrink == 1.0 {
            return self.defect(c);
        }
        self.scaled(c / shrink)
    }

    fn scaled(&mut self, c: f64) -> Result<C64> {
        if c == 0.0 || self.v.bump.amplitude == 0.0 {
            return Ok(C64::new(0.0, 0.0));
        }
        let mut i = 0;
        loop {
            if i == self.grids.len() {
                let last = self.grids[i - 1].grid;
                if last.log2_n >= MAX_LOG2_N {
                    return Err(Error::Regime(format!("e(-c/t) is unresolved at 2^{MAX_LOG2_N} points for c = {c}")));
                }
                let next = DefectGrid { log2_n: last.log2_n + 1, ..last };
                self.grids.push(side_grid(&self.rep, &self.v, next)?);
            }
            let sg = &self.grids[i];
            // the phase of e(-c e^{-x}) moves by 2π|c|e^{-x}Δx per sample
            let x_res = (4.0 * c.abs() * sg.grid.dx()).ln();
            if x_res <= self.x_cut.max(negligible_below(sg)) {
                return Ok(defect_on(sg, c, self.x_cut));
            }
            i += 1;
        }
    }
}

/// `V[(1, 0; c/C(Π), 1)] - V(1)` for `|c| ≤ 1`; see [`DefectContext`].
pub fn invariance_defect(rep: &Gl2Rep, v: &KirillovVector, c: f64, grid: &DefectGrid) -> Result<C64> {
    if c.abs() > 1.0 {
        return Err(Error::Precondition(format!("invariance defect needs |c| <= 1, got {c}")));
    }
    DefectContext::new(rep, v, grid)?.defect(c)
}

/// Defect at the scale `X = shrink·C(Π)`, i.e. with `c/C(Π)` replaced by `c/(shrink·C(Π))`.
pub fn subconductor_probe(rep: &Gl2Rep, v: &KirillovVector, shrink: f64, c: f64, grid: &DefectGrid) -> Result<C64> {
    DefectContext::new(rep, v, grid)?.subconductor(shrink, c)
}

/// `sup | |y|^{it} - 1 |` over `10⁴` midpoints of `|y - 1| < 1/X`.
pub fn toy_defect(t: f64, x: f64) -> Result<f64> {
    if !(x > 1.0) {
        return Err(Error::Precondition(format!("toy defect needs X > 1, got {x}")));
    }
    const POINTS: usize = 10_000;
    let mut sup: f64 = 0.0;
    for j in 0..POINTS {
        let y = 1.0 + (-1.0 + (2 * j + 1) as f64 / POINTS as f64) / x;
        sup = sup.max(2.0 * (0.5 * t * y.ln()).sin().abs());
    }
    Ok(sup)
}

/// Summary of a defect experiment over several values of `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct DefectReport {
    pub conductor: f64,
    pub c: Vec<f64>,
    pub defect_re: Vec<f64>,
    pub defect_im: Vec<f64>,
    /// `max |defect(c)| / |c|`.
    pub k_estimate: f64,
    pub slopes: Vec<f64>,
}

impl DefectReport {
    pub fn build(rep: &Gl2Rep, v: &KirillovVector, cs: &[f64], grid: &DefectGrid) -> Result<Self> {
        let mut re = Vec::with_capacity(cs.len());
        let mut im = Vec::with_capacity(cs.len());
        let mut k: f64 = 0.0;
        let mut ctx = DefectContext::new(rep, v, grid)?;
        for &c in cs {
            let d = ctx.defect(c)?;
            re.push(d.re);
            im.push(d.im);
            if c != 0.0 {
                k = k.max(d.norm() / c.abs());
            }
        }
        Ok(Self { conductor: rep.conductor, c: cs.to_vec(), defect_re: re, defect_im: im, k_estimate: k, slopes: Vec::new() })
    }
}
