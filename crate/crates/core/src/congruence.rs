//! Archimedean congruence sets `K_0(X, τ)` and `K_1(X, τ)` in `GL_n(R)`.
//!
//! A matrix is split as `[[a, b], [c, d]]` with `a` of size `(n-1)×(n-1)` and
//! `d` a scalar. Every `|·|` in the defining inequalities is the
//! max-absolute-entry norm. Monte Carlo estimates sample uniformly on the
//! coordinate box of the set and weight by the Haar density `|det g|^{-n}`.
//! They split the work across [`SUBSTREAMS`] ChaCha8 streams and sum them
//! in a fixed order, so a given `(seed, samples)` pair always gives the same result.

use crate::error::{Error, Result};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type Matrix = DMatrix<f64>;

/// Number of independent random substreams per Monte Carlo estimate.
pub const SUBSTREAMS: u64 = 16;

const SINGULAR_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CongruenceBox {
    pub n: usize,
    pub x: f64,
    pub tau: f64,
    /// 0 for `K_0`, 1 for `K_1`.
    pub star: u8,
}

impl CongruenceBox {
    pub fn new(n: usize, x: f64, tau: f64, star: u8) -> Result<Self> {
        if n < 2 {
            return Err(Error::Precondition(format!("congruence sets need n >= 2, got {n}")));
        }
        if !(x >= 1.0) {
            return Err(Error::Precondition(format!("X must be >= 1, got {x}")));
        }
        if !(tau > 0.0 && tau < 1.0) {
            return Err(Error::Precondition(format!("tau must lie in (0,1), got {tau}")));
        }
        if star > 1 {
            return Err(Error::Precondition(format!("star must be 0 or 1, got {star}")));
        }
        Ok(Self { n, x, tau, star })
    }

    pub fn with_tau(&self, tau: f64) -> Self {
        Self { tau, ..*self }
    }

    /// Exponent `A` in `vol K_*(X, τ) ≍ X^{-A}`.
    pub fn volume_exponent(&self) -> i32 {
        self.n as i32 - 1 + self.star as i32
    }

    /// Half-width of the allowed range of entry `(i, j)` around the identity.
    pub fn half_width(&self, i: usize, j: usize) -> f64 {
        let last = self.n - 1;
        if i == last && (j < last || self.star == 1) {
            self.tau / self.x
        } else {
            self.tau
        }
    }

    /// Lebesgue volume of the coordinate box.
    pub fn box_volume(&self) -> f64 {
        let mut v = 1.0;
        for i in 0..self.n {
            for j in 0..self.n {
                v *= 2.0 * self.half_width(i, j);
            }
        }
        v
    }

    /// Uniform sample from the coordinate box.
    pub fn sample<R: Rng>(&self, rng: &mut R) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| {
            let center = if i == j { 1.0 } else { 0.0 };
            center + self.half_width(i, j) * rng.gen_range(-1.0..1.0)
        })
    }

    /// Membership test without the invertibility check.
    fn inside(&self, g: &Matrix) -> bool {
        (0..self.n).all(|i| {
            (0..self.n).all(|j| {
                let center = if i == j { 1.0 } else { 0.0 };
                (g[(i, j)] - center).abs() < self.half_width(i, j)
            })
        })
    }
}

fn check_invertible(g: &Matrix) -> Result<f64> {
    let det = g.determinant();
    if det.abs() <= SINGULAR_TOL {
        return Err(Error::Singular(det.abs()));
    }
    Ok(det)
}

/// `g ∈ K_*(X, τ)` in the max-entry norm.
pub fn k_contains(g: &Matrix, bx: &CongruenceBox) -> Result<bool> {
    check_invertible(g)?;
    Ok(g.nrows() == bx.n && g.ncols() == bx.n && bx.inside(g))
}

/// Haar density `|det g|^{-n}` relative to Lebesgue measure on the entries.
pub fn haar_density(g: &Matrix) -> Result<f64> {
    let det = check_invertible(g)?;
    Ok(det.abs().powi(-(g.nrows() as i32)))
}

/// Runs `per_sample` over `samples` draws split across the substreams and
/// returns the mean and standard error of its value.
fn mc_mean<F>(samples: usize, seed: u64, mut per_sample: F) -> (f64, f64)
where
    F: FnMut(&mut ChaCha8Rng) -> f64,
{
    let per_stream = samples.div_ceil(SUBSTREAMS as usize);
    let (mut sum, mut sum_sq, mut count) = (0.0, 0.0, 0usize);
    for stream in 0..SUBSTREAMS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..per_stream {
            let v = per_sample(&mut rng);
            s += v;
            s2 += v * v;
        }
        sum += s;
        sum_sq += s2;
        count += per_stream;
    }
    let mean = sum / count as f64;
    let var = (sum_sq / count as f64 - mean * mean).max(0.0);
    (mean, (var / count as f64).sqrt())
}

/// Monte Carlo estimate of the Haar volume of `K_*(X, τ)` with its standard error.
pub fn volume_mc(bx: &CongruenceBox, samples: usize, seed: u64) -> Result<(f64, f64)> {
    if samples < 10_000 {
        return Err(Error::Precondition(format!("volume_mc needs >= 1e4 samples, got {samples}")));
    }
    let vb = bx.box_volume();
    let (mean, se) = mc_mean(samples, seed, |rng| {
        let g = bx.sample(rng);
        haar_density(&g).unwrap_or(0.0)
    });
    Ok((vb * mean, vb * se))
}

/// `vol(gA △ A)/vol(A)` for `A = K_*(X, τ)`, with its standard error.
///
/// Left translation preserves Haar measure, so the ratio is
/// `2·vol(A \ gA)/vol(A)`, estimated from points `x ∈ A` with `g^{-1}x ∉ A`.
pub fn folner_ratio_with_stderr(
    g: &Matrix,
    bx: &CongruenceBox,
    tau1: f64,
    samples: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if !k_contains(g, &bx.with_tau(tau1))? {
        return Err(Error::Precondition(format!("g is not in K_{}(X, {tau1})", bx.star)));
    }
    let g_inv = g.clone().try_inverse().ok_or(Error::Singular(0.0))?;
    let per_stream = samples.div_ceil(SUBSTREAMS as usize);
    let (mut w_all, mut w_out) = (0.0, 0.0);
    let mut outs = Vec::with_capacity(per_stream * SUBSTREAMS as usize);
    for stream in 0..SUBSTREAMS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        for _ in 0..per_stream {
            let x = bx.sample(&mut rng);
            let w = haar_density(&x).unwrap_or(0.0);
            let out = !bx.inside(&(&g_inv * &x));
            w_all += w;
            if out {
                w_out += w;
            }
            outs.push((w, out));
        }
    }
    let p = w_out / w_all;
    // delta-method standard error of a weighted proportion
    let m = outs.len() as f64;
    let mean_w = w_all / m;
    let var: f64 = outs
        .iter()
        .map(|&(w, out)| {
            let r = w * ((out as u8 as f64) - p);
            r * r
        })
        .sum::<f64>()
        / m;
    let se = (var / m).sqrt() / mean_w;
    Ok((2.0 * p, 2.0 * se))
}

/// `vol(gA △ A)/vol(A)` for `A = K_*(X, τ)`; requires `g ∈ K_*(X, τ_1)`.
pub fn folner_ratio(g: &Matrix, bx: &CongruenceBox, tau1: f64, samples: usize, seed: u64) -> Result<f64> {
    Ok(folner_ratio_with_stderr(g, bx, tau1, samples, seed)?.0)
}

/// Lower-unipotent element with bottom-left entry `c`.
pub fn lower_unipotent(n: usize, c: f64) -> Matrix {
    let mut g = Matrix::identity(n, n);
    g[(n - 1, 0)] = c;
    g
}

/// Smooth cutoff: 1 on `[0, 1/2]`, 0 on `[1, ∞)`, `C^∞` in between.
pub fn plateau(r: f64) -> f64 {
    if r <= 0.5 {
        return 1.0;
    }
    if r >= 1.0 {
        return 0.0;
    }
    let t = 2.0 * (1.0 - r);
    let p = (-1.0 / t).exp();
    let q = (-1.0 / (1.0 - t)).exp();
    p / (p + q)
}

/// Normalized majorant `F_X` built from the product-of-plateaus profile `F_1` on `K_*(1, τ)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Majorant {
    pub bx: CongruenceBox,
}

impl Majorant {
    pub fn new(n: usize, x: f64, tau: f64, star: u8) -> Result<Self> {
        Ok(Self { bx: CongruenceBox::new(n, x, tau, star)? })
    }

    /// `F_1` at a matrix whose congruence entries are already rescaled.
    fn base(&self, g: &Matrix) -> f64 {
        let n = self.bx.n;
        let unit = CongruenceBox { x: 1.0, ..self.bx };
        let mut v = 1.0;
        for i in 0..n {
            for j in 0..n {
                let center = if i == j { 1.0 } else { 0.0 };
                v *= plateau((g[(i, j)] - center).abs() / unit.half_width(i, j));
                if v == 0.0 {
                    return 0.0;
                }
            }
        }
        v
    }

    /// `F_X(g) = X^A F_1(g')` where `g'` has `c` (and for `K_1` also `d - 1`) multiplied by `X`.
    pub fn eval(&self, g: &Matrix) -> Result<f64> {
        check_invertible(g)?;
        let n = self.bx.n;
        let x = self.bx.x;
        let mut h = g.clone();
        for j in 0..n - 1 {
            h[(n - 1, j)] *= x;
        }
        if self.bx.star == 1 {
            h[(n - 1, n - 1)] = 1.0 + (h[(n - 1, n - 1)] - 1.0) * x;
        }
        Ok(x.powi(self.bx.volume_exponent()) * self.base(&h))
    }

    /// Monte Carlo estimate of `∫ F_X dg` (Haar) with standard error.
    pub fn mass(&self, samples: usize, seed: u64) -> (f64, f64) {
        let vb = self.bx.box_volume();
        let (m, se) = mc_mean(samples, seed, |rng| {
            let g = self.bx.sample(rng);
            self.eval(&g).unwrap_or(0.0) * haar_density(&g).unwrap_or(0.0)
        });
        (vb * m, vb * se)
    }
}

/// `F_X(g)`; see [`Majorant::eval`].
pub fn majorant_eval(m: &Majorant, g: &Matrix) -> Result<f64> {
    m.eval(g)
}

/// Monte Carlo estimate of the convolution `(F^1 * F^2)(g) = ∫ F^1(h) F^2(h^{-1} g) dh`.
pub fn majorant_convolve(m1: &Majorant, m2: &Majorant, g: &Matrix, samples: usize, seed: u64) -> Result<f64> {
    if m1.bx.x != m2.bx.x {
        return Err(Error::Precondition("majorant_convolve needs the same X for both factors".into()));
    }
    check_invertible(g)?;
    let vb = m1.bx.box_volume();
    let (mean, _) = mc_mean(samples, seed, |rng| {
        let h = m1.bx.sample(rng);
        let Some(h_inv) = h.clone().try_inverse() else { return 0.0 };
        let f1 = m1.eval(&h).unwrap_or(0.0);
        if f1 == 0.0 {
            return 0.0;
        }
        f1 * m2.eval(&(&h_inv * g)).unwrap_or(0.0) * haar_density(&h).unwrap_or(0.0)
    });
    Ok(vb * mean)
}
