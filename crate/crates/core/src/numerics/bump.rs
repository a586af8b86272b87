//! The canonical bump `f(y) = A·exp(-1/(1-u²))`, `u = (y - c)/r`, and its Mellin transform.

use super::quad::{gauss_legendre, CSum};
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;

/// Smooth nonnegative bump supported on `[center - radius, center + radius] ⊂ (0, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BumpFunction {
    pub center: f64,
    pub radius: f64,
    pub amplitude: f64,
}

/// Trapezoid nodes on the real `x = log y` interval; exact to rounding for the flat-ended profile.
const REAL_NODES: usize = 1024;
/// Above this `|Im s|` the Mellin integral runs along a deformed path.
const DEFORM_ABOVE: f64 = 30.0;

impl BumpFunction {
    pub fn new(center: f64, radius: f64) -> Result<Self> {
        Self::with_amplitude(center, radius, 1.0)
    }

    pub fn with_amplitude(center: f64, radius: f64, amplitude: f64) -> Result<Self> {
        if !(radius > 0.0 && center - radius > 0.0 && amplitude.is_finite()) {
            return Err(Error::Precondition(format!(
                "bump needs 0 < radius < center, got center={center}, radius={radius}"
            )));
        }
        Ok(Self { center, radius, amplitude })
    }

    /// Center 1, radius 1/2, amplitude 1.
    pub fn canonical() -> Self {
        Self { center: 1.0, radius: 0.5, amplitude: 1.0 }
    }

    /// The identically zero profile on the canonical support.
    pub fn zero() -> Self {
        Self { amplitude: 0.0, ..Self::canonical() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { amplitude: self.amplitude * factor, ..*self }
    }

    /// Same profile rescaled to unit norm in `L²(dy/y)`; the zero profile is returned unchanged.
    pub fn normalized(&self) -> Self {
        let n = self.l2_norm();
        if n == 0.0 {
            *self
        } else {
            self.scaled(1.0 / n)
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        let u = (y - self.center) / self.radius;
        if u.abs() >= 1.0 {
            0.0
        } else {
            self.amplitude * (-1.0 / (1.0 - u * u)).exp()
        }
    }

    /// `F(x) = f(e^x)` continued to complex `x` near the support.
    pub fn eval_log(&self, x: C64) -> C64 {
        let u = (x.exp() - self.center) / self.radius;
        (-1.0 / (1.0 - u * u)).exp() * self.amplitude
    }

    /// `F(x_end + dz)` for `x_end` one of the support ends, accurate for small `dz`.
    fn eval_near_end(&self, right_end: bool, dz: C64) -> C64 {
        let e = expm1(dz);
        let (one_plus, one_minus) = if right_end {
            let m = -(self.center + self.radius) * e / self.radius;
            (2.0 - m, m)
        } else {
            let p = (self.center - self.radius) * e / self.radius;
            (p, 2.0 - p)
        };
        (-1.0 / (one_plus * one_minus)).exp() * self.amplitude
    }

    /// Support `[x_l, x_r]` in `x = log y`.
    pub fn log_support(&self) -> (f64, f64) {
        ((self.center - self.radius).ln(), (self.center + self.radius).ln())
    }

    /// `∫ f(y)^p dy/y` by the real-line trapezoid rule.
    fn moment(&self, p: i32) -> f64 {
        let (xl, xr) = self.log_support();
        let h = (xr - xl) / REAL_NODES as f64;
        let mut s = 0.0;
        for j in 1..REAL_NODES {
            s += self.eval((xl + h * j as f64).exp()).powi(p);
        }
        s * h
    }

    /// `‖f‖` in `L²(dy/y)`.
    pub fn l2_norm(&self) -> f64 {
        self.moment(2).sqrt()
    }

    /// `∫ f(y) dy/y`.
    pub fn integral(&self) -> f64 {
        self.moment(1)
    }
}

/// `e^z - 1` without cancellation for small `|z|`.
fn expm1(z: C64) -> C64 {
    let half = (0.5 * z.im).sin();
    let ea = z.re.exp();
    C64::new(ea * (-2.0 * half * half) + z.re.exp_m1(), ea * z.im.sin())
}

/// Trapezoid rule on `[x_l, x_r]` for `∫ F(x) e^{-sx} dx`.
fn mellin_real(f: &BumpFunction, s: C64) -> C64 {
    let (xl, xr) = f.log_support();
    let h = (xr - xl) / REAL_NODES as f64;
    let mut acc = CSum::new();
    for j in 1..REAL_NODES {
        let x = xl + h * j as f64;
        let v = f.eval(x.exp());
        if v != 0.0 {
            acc.add((-s * x).exp() * v);
        }
    }
    acc.value() * h
}

/// One leg of the tent path, `x = x_end + d·dir`, `d ∈ [d_lo, d_hi]`.
///
/// Panels double in width from `d_lo` (the profile has an essential
/// singularity at `d = 0`) until they reach `step`, then stay uniform.
fn leg(f: &BumpFunction, s: C64, right_end: bool, dir: C64, d_lo: f64, d_hi: f64, step: f64) -> C64 {
    if d_hi <= d_lo {
        return C64::new(0.0, 0.0);
    }
    let rule = gauss_legendre(12);
    let mut acc = CSum::new();
    let mut left = d_lo;
    let mut width = d_lo.min(step);
    while left < d_hi {
        let right = (left + width).min(d_hi);
        let h = 0.5 * (right - left);
        let m = left + h;
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let dz = dir * (m + h * t);
            acc.add(f.eval_near_end(right_end, dz) * (-s * dz).exp() * (w * h));
        }
        left = right;
        width = (2.0 * width).min(step);
    }
    let (xl, xr) = f.log_support();
    let x_end = if right_end { xr } else { xl };
    acc.value() * dir * (-s * x_end).exp()
}

/// Mellin integral along the two 45° legs of a tent in the half plane where `e^{-sx}` decays.
fn mellin_deformed(f: &BumpFunction, s: C64, slope: f64) -> C64 {
    let (xl, xr) = f.log_support();
    let tau = s.im.abs();
    let eps = s.im.signum();
    let half = 0.5 * (xr - xl);
    // near an endpoint 1 - u² ≈ 2k(x - x_end) with k = |du/dx|, so along a leg
    // |F| ≈ exp(-A/d) with A = 1/(2k(1+slope²)), while |e^{-sx}| falls like e^{-slope·|τ|·d}
    let endpoint_a = |x: f64| f.radius / (2.0 * x.exp() * (1.0 + slope * slope));
    let step = 3.0 / tau;
    let window = |a: f64| {
        let peak = 2.0 * (a * slope * tau).sqrt();
        let lo = a / (peak + DROP_NATS);
        let hi = (peak + DROP_NATS) / (slope * tau);
        (lo, hi.min(half))
    };
    let (l_lo, l_hi) = window(endpoint_a(xl));
    let (r_lo, r_hi) = window(endpoint_a(xr));
    let apex_reached = l_hi >= half || r_hi >= half;
    let (l_hi, r_hi) = if apex_reached { (half, half) } else { (l_hi, r_hi) };
    let left = leg(f, s, false, C64::new(1.0, -eps * slope), l_lo, l_hi, step);
    let right = leg(f, s, true, C64::new(-1.0, -eps * slope), r_lo, r_hi, step);
    left - right
}

const DROP_NATS: f64 = 46.0;

/// `f̃(s) = ∫ f(y) y^{-s} dy/y`, entire in `s`.
///
/// Small `|Im s|` uses the trapezoid rule in `x = log y`, which converges
/// spectrally because every derivative of the bump vanishes at the ends.
/// Larger `|Im s|` moves the path into the half plane where `e^{-sx}` decays,
/// which keeps relative accuracy far below the real-axis rounding floor.
pub fn mellin_bump(f: &BumpFunction, s: C64) -> C64 {
    if f.amplitude == 0.0 {
        return C64::new(0.0, 0.0);
    }
    if s.im.abs() <= DEFORM_ABOVE {
        mellin_real(f, s)
    } else {
        mellin_deformed(f, s, 1.0)
    }
}

/// Points per block sharing one quadrature path in [`mellin_bump_line`].
const LINE_BLOCK: usize = 64;

/// `f̃(σ + i(τ_0 + kΔτ))` for `k = 0, …, count-1`.
///
/// Agrees with [`mellin_bump`] point by point. Blocks of consecutive
/// ordinates with `|τ|` above the deformation threshold share one tent path,
/// and the factor `e^{-sx}` is advanced along the block by multiplication
/// with `e^{-iΔτx}`.
pub fn mellin_bump_line(f: &BumpFunction, sigma: f64, tau0: f64, dtau: f64, count: usize) -> Vec<C64> {
    let mut out = Vec::with_capacity(count);
    let mut k = 0;
    while k < count {
        let len = LINE_BLOCK.min(count - k);
        let ta = tau0 + dtau * k as f64;
        let tb = tau0 + dtau * (k + len - 1) as f64;
        if f.amplitude == 0.0 {
            out.resize(out.len() + len, C64::new(0.0, 0.0));
        } else if ta.abs().min(tb.abs()) <= DEFORM_ABOVE || ta.signum() != tb.signum() || len < 8 {
            out.extend((0..len).map(|j| mellin_bump(f, C64::new(sigma, ta + dtau * j as f64))));
        } else {
            out.extend(deformed_block(f, sigma, ta, dtau, len));
        }
        k += len;
    }
    out
}

fn deformed_block(f: &BumpFunction, sigma: f64, ta: f64, dtau: f64, len: usize) -> Vec<C64> {
    let (xl, xr) = f.log_support();
    let eps = ta.signum();
    let tb = ta + dtau * (len - 1) as f64;
    let (t_min, t_max) = (ta.abs().min(tb.abs()), ta.abs().max(tb.abs()));
    let half = 0.5 * (xr - xl);
    let endpoint_a = |x: f64| f.radius / (4.0 * x.exp());
    let step = 3.0 / t_max;
    let window = |a: f64| {
        let lo = a / (2.0 * (a * t_max).sqrt() + DROP_NATS);
        let hi = (2.0 * (a * t_min).sqrt() + DROP_NATS) / t_min;
        (lo, hi.min(half))
    };
    let (l_lo, l_hi) = window(endpoint_a(xl));
    let (r_lo, r_hi) = window(endpoint_a(xr));
    let (l_hi, r_hi) = if l_hi >= half || r_hi >= half { (half, half) } else { (l_hi, r_hi) };
    let s0 = C64::new(sigma, ta);
    let mut acc = vec![CSum::new(); len];
    let mut run_leg = |right_end: bool, dir: C64, d_lo: f64, d_hi: f64, sign: f64| {
        if d_hi <= d_lo {
            return;
        }
        let x_end = if right_end { xr } else { xl };
        let rule = gauss_legendre(12);
        let mut left = d_lo;
        let mut width = d_lo.min(step);
        while left < d_hi {
            let right = (left + width).min(d_hi);
            let h = 0.5 * (right - left);
            let m = left + h;
            for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                let dz = dir * (m + h * t);
                let z = dz + x_end;
                let mut e = f.eval_near_end(right_end, dz) * (-s0 * z).exp() * (sign * w * h) * dir;
                let r = (C64::new(0.0, -dtau) * z).exp();
                for a in acc.iter_mut() {
                    a.add(e);
                    e *= r;
                }
            }
            left = right;
            width = (2.0 * width).min(step);
        }
    };
    run_leg(false, C64::new(1.0, -eps), l_lo, l_hi, 1.0);
    run_leg(true, C64::new(-1.0, -eps), r_lo, r_hi, -1.0);
    acc.iter().map(CSum::value).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn oracle_values() {
        let f = BumpFunction::canonical();
        let got = mellin_bump(&f, C64::new(2.0, 3.0));
        // 30-digit adaptive-quadrature reference
        let want = C64::new(0.208_730_360_233_208_81, 0.107_186_150_594_111_12);
        assert!(rel(got, want) < 1e-13, "{got}");
        let at0 = mellin_bump(&f, C64::new(0.0, 0.0));
        assert!((at0.re - 0.231_598_850_086_656_82).abs() < 1e-14);
        assert!((at0.re - f.integral()).abs() < 1e-15);
        assert!((f.l2_norm().powi(2) - 0.068_591_267_896_027_663).abs() < 1e-14);
    }

    #[test]
    fn zero_profile() {
        let z = BumpFunction::zero();
        for s in [C64::new(0.0, 0.0), C64::new(3.0, -100.0), C64::new(-1.0, 5.0)] {
            assert_eq!(mellin_bump(&z, s), C64::new(0.0, 0.0));
        }
    }

    #[test]
    fn deformed_matches_real_line() {
        let f = BumpFunction::canonical();
        for tau in [20.0, 31.0, 40.0, 100.0] {
            for sigma in [0.0, 2.0, -1.5] {
                for sign in [1.0, -1.0] {
                    let s = C64::new(sigma, sign * tau);
                    let a = mellin_real(&f, s);
                    let b = mellin_deformed(&f, s, 1.0);
                    assert!((a - b).norm() < 1e-13 * (1.0 + a.norm()) && rel(a, b) < 1e-9, "s={s}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn deformed_path_independent() {
        let f = BumpFunction::new(2.0, 0.7).unwrap();
        for tau in [50.0, 400.0, 3000.0, -12000.0] {
            for sigma in [0.0, 4.0] {
                let s = C64::new(sigma, tau);
                let a = mellin_deformed(&f, s, 1.0);
                let b = mellin_deformed(&f, s, 0.7);
                assert!(rel(a, b) < 1e-10, "s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn conjugate_symmetry_and_decay() {
        let f = BumpFunction::canonical();
        for t in [1.0, 5.0, 20.0, 50.0, 100.0] {
            let s = C64::new(0.5, t);
            let a = mellin_bump(&f, s);
            let b = mellin_bump(&f, s.conj());
            assert!(rel(a.conj(), b) < 1e-12);
        }
        // |f̃(σ+it)|·(1+t)^6 stays below one constant on [1, 100] and keeps falling far out
        let env = |t: f64| mellin_bump(&f, C64::new(0.5, t)).norm() * (1.0 + t).powi(6);
        let c6 = (1..=100).map(|t| env(t as f64)).fold(0.0, f64::max);
        assert!(c6 < 1e9, "C_6 = {c6}");
        let far: Vec<f64> = [2000.0, 4000.0, 8000.0].iter().map(|&t| env(t)).collect();
        assert!(far[0] > far[1] && far[1] > far[2] && far[2] < c6, "{far:?}");
    }

    #[test]
    fn line_matches_pointwise() {
        let f = BumpFunction::new(1.2, 0.4).unwrap();
        for (sigma, tau0, dtau) in [(0.0, -80.0, 0.37), (4.0, 25.0, 0.0785), (5.0, -9000.0, 0.5), (2.0, 3000.0, 1.3)] {
            let line = mellin_bump_line(&f, sigma, tau0, dtau, 150);
            for (k, v) in line.iter().enumerate() {
                let s = C64::new(sigma, tau0 + dtau * k as f64);
                let w = mellin_bump(&f, s);
                assert!(rel(*v, w) < 1e-11, "s={s}: {v} vs {w}");
            }
        }
    }

    #[test]
    fn invalid_bumps() {
        assert!(BumpFunction::new(1.0, 1.0).is_err());
        assert!(BumpFunction::new(1.0, 0.0).is_err());
        assert!(BumpFunction::new(0.5, 0.2).is_ok());
    }
}
