//! Gauss–Legendre rules, compensated sums and truncated vertical-line integrals.

use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;
use std::sync::OnceLock;

/// Nodes and weights of an `n`-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

const MAX_CACHED: usize = 128;

fn compute_rule(n: usize) -> GaussLegendre {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            if n == 1 {
                p0 = 1.0;
                p1 = x;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    GaussLegendre { nodes, weights }
}

/// Cached `n`-point rule (`1 <= n <= 128`).
pub fn gauss_legendre(n: usize) -> &'static GaussLegendre {
    static CACHE: [OnceLock<GaussLegendre>; MAX_CACHED + 1] = [const { OnceLock::new() }; MAX_CACHED + 1];
    assert!((1..=MAX_CACHED).contains(&n), "Gauss-Legendre order {n} not supported");
    CACHE[n].get_or_init(|| compute_rule(n))
}

/// Neumaier-compensated accumulator for complex sums in fixed order.
#[derive(Debug, Clone, Copy, Default)]
pub struct CSum {
    re: f64,
    re_c: f64,
    im: f64,
    im_c: f64,
}

fn neumaier(sum: &mut f64, comp: &mut f64, x: f64) {
    let t = *sum + x;
    if sum.abs() >= x.abs() {
        *comp += (*sum - t) + x;
    } else {
        *comp += (x - t) + *sum;
    }
    *sum = t;
}

impl CSum {
    pub fn new() -> Self {
        Self::default()
    }
    pub fn add(&mut self, z: C64) {
        neumaier(&mut self.re, &mut self.re_c, z.re);
        neumaier(&mut self.im, &mut self.im_c, z.im);
    }
    pub fn value(&self) -> C64 {
        C64::new(self.re + self.re_c, self.im + self.im_c)
    }
}

/// Real Neumaier sum.
pub fn fsum<I: IntoIterator<Item = f64>>(xs: I) -> f64 {
    let (mut s, mut c) = (0.0, 0.0);
    for x in xs {
        neumaier(&mut s, &mut c, x);
    }
    s + c
}

/// Integrate `f` over the panels delimited by `breaks` with an `n`-point rule per panel.
pub fn integrate_panels<F: FnMut(f64) -> C64>(mut f: F, breaks: &[f64], n: usize) -> C64 {
    let rule = gauss_legendre(n);
    let mut acc = CSum::new();
    for w in breaks.windows(2) {
        let (a, b) = (w[0], w[1]);
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        for (x, wt) in rule.nodes.iter().zip(&rule.weights) {
            acc.add(f(m + h * x) * (wt * h));
        }
    }
    acc.value()
}

/// Real-valued counterpart of [`integrate_panels`].
pub fn integrate_panels_real<F: FnMut(f64) -> f64>(mut f: F, breaks: &[f64], n: usize) -> f64 {
    integrate_panels(|x| C64::new(f(x), 0.0), breaks, n).re
}

/// `count` equal panels on `[a, b]`, returned as breakpoints.
pub fn uniform_breaks(a: f64, b: f64, count: usize) -> Vec<f64> {
    let count = count.max(1);
    (0..=count).map(|i| a + (b - a) * i as f64 / count as f64).collect()
}

/// Truncated vertical line `{σ + iτ : |τ| ≤ T}` discretised with `nodes` points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerticalContour {
    pub sigma: f64,
    pub height: f64,
    pub nodes: usize,
}

/// Points per Gauss–Legendre panel on vertical contours.
pub const PANEL_ORDER: usize = 16;

impl VerticalContour {
    pub fn new(sigma: f64, height: f64, nodes: usize) -> Result<Self> {
        if !(height > 0.0) {
            return Err(Error::Precondition(format!("contour height must be positive, got {height}")));
        }
        if nodes < 8 {
            return Err(Error::Precondition(format!("contour needs at least 8 nodes, got {nodes}")));
        }
        Ok(Self { sigma, height, nodes })
    }

    /// Contour with node density chosen so that each panel spans at most `panel_width`.
    pub fn with_panel_width(sigma: f64, height: f64, panel_width: f64) -> Self {
        let panels = ((2.0 * height / panel_width).ceil() as usize).max(1);
        Self { sigma, height, nodes: panels * PANEL_ORDER }
    }

    /// Same line with twice as many nodes.
    pub fn doubled(&self) -> Self {
        Self { nodes: 2 * self.nodes, ..*self }
    }

    fn panels(&self) -> usize {
        self.nodes.div_ceil(PANEL_ORDER).max(1)
    }

    /// Quadrature nodes `τ_j` and weights `w_j / (2π)` on the line.
    pub fn nodes_and_weights(&self) -> Vec<(f64, f64)> {
        let rule = gauss_legendre(PANEL_ORDER);
        let p = self.panels();
        let h = self.height / p as f64;
        let mut out = Vec::with_capacity(p * PANEL_ORDER);
        for k in 0..p {
            let m = -self.height + (2 * k + 1) as f64 * h;
            for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                out.push((m + h * x, w * h / (2.0 * PI)));
            }
        }
        out
    }
}

/// Value of a vertical contour integral with its tail estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContourResult {
    pub value: C64,
    /// `(1/2π) ∫ |f|` over the outer 10% of the line on both ends.
    pub tail: f64,
    pub nodes_used: usize,
}

/// Tail share of a contour: the indices of the outer 10% of nodes.
pub(crate) fn is_tail_node(index: usize, total: usize) -> bool {
    let k = (total / 10).max(1);
    index < k / 2 + k % 2 || index >= total - k / 2
}

/// `∫_{σ-iT}^{σ+iT} f(s) ds/(2πi)` by composite Gauss–Legendre panels.
///
/// Fails with [`Error::TailNotNegligible`] when `(1/2π)∫|f|` over the outer
/// tenth of the line exceeds `tolerance`.
pub fn contour_integral<F: FnMut(C64) -> C64>(
    mut f: F,
    contour: &VerticalContour,
    tolerance: f64,
) -> Result<ContourResult> {
    if !(contour.height > 0.0) || contour.nodes < 8 {
        return Err(Error::TailNotNegligible { tail: f64::INFINITY, tolerance });
    }
    let nw = contour.nodes_and_weights();
    let total = nw.len();
    let mut acc = CSum::new();
    let mut tail = 0.0;
    for (j, &(tau, w)) in nw.iter().enumerate() {
        let v = f(C64::new(contour.sigma, tau));
        acc.add(v * w);
        if is_tail_node(j, total) {
            tail += v.norm() * w;
        }
    }
    if !(tail <= tolerance) {
        return Err(Error::TailNotNegligible { tail, tolerance });
    }
    Ok(ContourResult { value: acc.value(), tail, nodes_used: total })
}

/// Smallest height `T = start·2^k ≤ max_height` with `|f(σ ± iT)| < 1e-3·tolerance`.
pub fn adaptive_height<F: FnMut(C64) -> C64>(
    mut f: F,
    sigma: f64,
    tolerance: f64,
    start: f64,
    max_height: f64,
) -> Result<f64> {
    let mut t = start;
    loop {
        let m = f(C64::new(sigma, t)).norm().max(f(C64::new(sigma, -t)).norm());
        if m < 1e-3 * tolerance {
            return Ok(t);
        }
        if t >= max_height {
            return Err(Error::TailNotNegligible { tail: m, tolerance });
        }
        t = (2.0 * t).min(max_height);
    }
}
