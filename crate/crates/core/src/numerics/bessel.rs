//! Modified Bessel function of the second kind `K_ν(x)` for complex order and real `x > 0`.
//!
//! The main evaluator integrates `K_ν(x) = ½∫ exp(-x cosh w + ν w) dw` along a
//! path in the strip `0 ≤ Im w ≤ π/2` on which the phase of
//! `-x cosh w + i Im(ν) w` is piecewise constant. For `Im ν = τ ≤ x` this is the
//! steepest-descent curve through the saddle on the imaginary axis. For `τ > x`
//! the path follows `Im w = π/2` between the two saddles `±acosh(τ/x) + iπ/2`
//! and leaves along steepest-descent curves. On the curved pieces
//! `sin v = (τ|u| - C)/(x sinh|u|)`, with `C = 0` in the first case.
//!
//! For large imaginary order and small argument the ascending series for
//! `I_{±ν}` is cheaper and equally accurate. All internal values carry the
//! factor `e^{π|τ|/2}`, which keeps them of moderate size.

use super::gamma::ln_gamma;
use super::quad::{gauss_legendre, CSum};
use crate::error::{Error, Result};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

const PANEL: usize = 16;
const DROP: f64 = 46.0;

/// `sinh u - u` without cancellation.
fn sinh_minus_id(u: f64) -> f64 {
    if u.abs() < 0.1 {
        let u2 = u * u;
        u * u2 * (1.0 / 6.0 + u2 * (1.0 / 120.0 + u2 * (1.0 / 5040.0 + u2 / 362_880.0)))
    } else {
        u.sinh() - u
    }
}

/// `sinh u - u cosh u` without cancellation.
fn sinh_minus_ucosh(u: f64) -> f64 {
    if u.abs() < 0.1 {
        let u2 = u * u;
        -u * u2 * (1.0 / 3.0 + u2 * (1.0 / 30.0 + u2 * (1.0 / 840.0 + u2 / 45_360.0)))
    } else {
        u.sinh() - u * u.cosh()
    }
}

#[derive(Clone, Copy)]
enum Shape {
    /// `τ ≤ x`: one curved piece through `u = 0`.
    Below,
    /// `τ > x`: flat piece on `|u| ≤ a`, curved pieces beyond, `C = τa - x sinh a`.
    Above { a: f64, c: f64 },
}

struct Path {
    x: f64,
    tau: f64,
    alpha: f64,
    shape: Shape,
}

impl Path {
    fn new(nu: C64, x: f64) -> Self {
        let tau = nu.im;
        let shape = if tau <= x {
            Shape::Below
        } else {
            let a = (tau / x).acosh();
            Shape::Above { a, c: tau * a - x * a.sinh() }
        };
        Path { x, tau, alpha: nu.re, shape }
    }

    /// `(s, 1 - s, ds/du)` for `s = sin v` at `u > 0` on a curved piece.
    fn curve(&self, u: f64) -> (f64, f64, f64) {
        let (x, tau) = (self.x, self.tau);
        let xs = x * u.sinh();
        match self.shape {
            Shape::Below => {
                let one_minus = ((x - tau) * u + x * sinh_minus_id(u)) / xs;
                let s = 1.0 - one_minus;
                let ds = tau * sinh_minus_ucosh(u) / (xs * u.sinh());
                (s, one_minus, ds)
            }
            Shape::Above { a, .. } => {
                let d = 0.5 * (u - a);
                let two_d = 2.0 * d;
                let sh2 = sinh_minus_id(two_d);
                let h = x * (2.0 * a.sinh() * d.sinh().powi(2) + a.cosh() * sh2);
                let one_minus = h / xs;
                let s = 1.0 - one_minus;
                let lead = -2.0 * x * (0.5 * (u + a)).sinh() * d.sinh();
                let ds = (lead + one_minus * x * u.cosh()) / xs;
                (s, one_minus, ds)
            }
        }
    }

    /// Log-modulus and the integrand `exp(g(w) + πτ/2)·dw/du` at `u` on a curved piece.
    fn curved(&self, u: f64) -> (f64, C64) {
        let au = u.abs();
        let (s, v, cv, dv) = if au == 0.0 {
            let s = self.tau / self.x;
            (s, s.asin(), (1.0 - s * s).max(0.0).sqrt(), 0.0)
        } else {
            let (s, one_minus, ds) = self.curve(au);
            let cv = (one_minus * (1.0 + s)).max(0.0).sqrt();
            let v = s.atan2(cv);
            let dv = if cv > 0.0 { ds / cv } else { 0.0 };
            (s, v, cv, if u < 0.0 { -dv } else { dv })
        };
        let _ = s;
        let re = -self.x * au.cosh() * cv + self.alpha * u - self.tau * v + 0.5 * PI * self.tau;
        let phase0 = match self.shape {
            Shape::Below => 0.0,
            Shape::Above { c, .. } => c * u.signum(),
        };
        let val = C64::from_polar(re.exp(), phase0 + self.alpha * v) * C64::new(1.0, dv);
        (re, val)
    }

    /// Integrand on the flat piece `Im w = π/2`.
    fn flat(&self, u: f64) -> C64 {
        let phase = self.tau * u - self.x * u.sinh() + 0.5 * PI * self.alpha;
        C64::from_polar((self.alpha * u).exp(), phase)
    }

    fn start_width(&self) -> f64 {
        let (x, tau) = (self.x, self.tau);
        match self.shape {
            Shape::Below => {
                let eps = (1.0 - tau / x).max(0.0);
                let scale = 0.1 * (1.0 / x.sqrt()).min(1.0);
                ((6.0 * eps).sqrt() / 4.0).clamp(1e-8, scale)
            }
            Shape::Above { a, .. } => {
                let scale = 0.1 * (tau * tau - x * x).powf(-0.25).min(1.0);
                (a / 4.0).clamp(1e-8, scale)
            }
        }
    }
}

/// Integrate a curved piece outward from `u0 ≥ 0` in direction `dir = ±1`.
fn outward(path: &Path, u0: f64, dir: f64, acc: &mut CSum) {
    let rule = gauss_legendre(PANEL);
    let mut width = path.start_width();
    let mut left = u0;
    let mut peak = f64::NEG_INFINITY;
    for _ in 0..400 {
        let right = left + width;
        let h = 0.5 * width;
        let m = left + h;
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            let (_, val) = path.curved(dir * (m + h * t));
            acc.add(val * (w * h));
        }
        let (re_end, _) = path.curved(dir * right);
        peak = peak.max(path.curved(dir * m).0).max(re_end);
        if re_end < peak - DROP && path.curved(dir * (right + 1e-3)).0 <= re_end {
            break;
        }
        left = right;
        width = (2.0 * width).min(0.5);
    }
}

/// `e^{πτ/2} K_ν(x)` by the path integral, for `Im ν = τ ≥ 0`.
fn k_path_scaled(nu: C64, x: f64) -> C64 {
    let path = Path::new(nu, x);
    let mut acc = CSum::new();
    match path.shape {
        Shape::Below => {
            outward(&path, 0.0, 1.0, &mut acc);
            outward(&path, 0.0, -1.0, &mut acc);
        }
        Shape::Above { a, c } => {
            outward(&path, a, 1.0, &mut acc);
            outward(&path, a, -1.0, &mut acc);
            let x = path.x;
            let saddle = (8.0 / (x * a.sinh()).max(1e-300)).sqrt();
            let count = ((2.0 * c / 4.0).max(2.0 * a / saddle.min(0.25)).ceil() as usize).max(1);
            let rule = gauss_legendre(PANEL);
            let h = a / count as f64;
            let mut flat = CSum::new();
            for k in 0..count {
                let m = -a + (2 * k + 1) as f64 * h;
                for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                    flat.add(path.flat(m + h * t) * (w * h));
                }
            }
            acc.add(flat.value());
        }
    }
    acc.value() * 0.5
}

/// `e^{πτ/2} K_ν(x)` from `K = π/(2 sin νπ)·(I_{-ν} - I_ν)`, for `τ ≥ 1`.
fn k_series_scaled(nu: C64, x: f64) -> C64 {
    let tau = nu.im;
    let alpha = nu.re;
    // sin(νπ)·e^{-πτ}
    let sin_scaled = (C64::from_polar((-2.0 * PI * tau).exp(), PI * alpha) - C64::from_polar(1.0, -PI * alpha))
        / C64::new(0.0, 2.0);
    let z = 0.25 * x * x;
    let lx = (0.5 * x).ln();
    let part = |sign: f64| -> C64 {
        let mu = nu * sign;
        let pre = (mu * lx - ln_gamma(1.0 + mu) - 0.5 * PI * tau).exp();
        let mut term = C64::new(1.0, 0.0);
        let mut sum = CSum::new();
        sum.add(term);
        let mut k = 0.0;
        loop {
            k += 1.0;
            term *= z / (k * (k + mu));
            sum.add(term);
            if term.norm() < 1e-18 * sum.value().norm() && k > z {
                break;
            }
        }
        pre * sum.value()
    };
    PI / (2.0 * sin_scaled) * (part(-1.0) - part(1.0))
}

fn use_series(tau: f64, x: f64) -> bool {
    tau >= 1.0 && x * x <= 4.0 * tau
}

fn k_scaled_core(nu: C64, x: f64) -> C64 {
    if nu.im < 0.0 {
        return k_scaled_core(nu.conj(), x).conj();
    }
    if use_series(nu.im, x) {
        k_series_scaled(nu, x)
    } else {
        k_path_scaled(nu, x)
    }
}

/// `e^{π|Im ν|/2} K_ν(x)` for any complex order, using the upward recurrence
/// `K_{μ+1} = K_{μ-1} + (2μ/x) K_μ` when `|Re ν| > 2`.
pub fn bessel_k_scaled_any(nu: C64, x: f64) -> C64 {
    let nu = if nu.re < 0.0 { -nu } else { nu };
    if nu.re <= 2.0 {
        return k_scaled_core(nu, x);
    }
    let m = (nu.re - 1.0).floor() as usize;
    let base = nu - m as f64;
    let mut prev = k_scaled_core(base - 1.0, x);
    let mut cur = k_scaled_core(base, x);
    for j in 0..m {
        let mu = base + j as f64;
        let next = prev + cur * (2.0 * mu / x);
        prev = cur;
        cur = next;
    }
    cur
}

fn check(order: C64, x: f64) -> Result<()> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("bessel_K needs x > 0, got {x}")));
    }
    if order.re.abs() > 2.0 {
        return Err(Error::Precondition(format!("bessel_K needs |Re(order)| <= 2, got {order}")));
    }
    Ok(())
}

/// `e^{π|Im ν|/2} K_ν(x)`; the exponential factor keeps large imaginary orders representable.
pub fn bessel_k_scaled(order: C64, x: f64) -> Result<C64> {
    check(order, x)?;
    Ok(k_scaled_core(order, x))
}

/// Modified Bessel function of the second kind `K_ν(x)`, `x > 0`, `|Re ν| ≤ 2`.
pub fn bessel_k(order: C64, x: f64) -> Result<C64> {
    check(order, x)?;
    Ok(k_scaled_core(order, x) * (-0.5 * PI * order.im.abs()).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    // 30-digit arbitrary-precision reference values.
    const ORACLE: [(f64, f64, f64, f64, f64); 12] = [
        (0.0, 0.0, 2.0, 0.113_893_872_749_533_44, 0.0),
        (0.0, 10.0, 0.5, 6.771_724_671_910_032e-8, 0.0),
        (0.3, 2.0, 3.7, 0.009_581_114_232_129_088, 0.001_440_870_358_591_892_4),
        (1.5, 0.0, 0.01, 1_253.251_887_817_54, 0.0),
        (0.0, 25.0, 3.0, 3.519_941_199_164_269e-18, 0.0),
        (0.0, 5.0, 40.0, 6.161_411_777_040_831e-19, 0.0),
        (0.6, 5.0, 1.0, 7.856_174_838_183_362e-4, 4.286_868_593_329_064e-4),
        (1.2, 0.0, 2.0 * PI, 1.019_595_048_908_629_8e-3, 0.0),
        (0.4, 12.0, 20.0, 1.499_941_870_919_778_5e-11, 3.812_055_400_540_025e-12),
        (0.0, 2.0, 0.001, 0.028_162_302_392_341_95, 0.0),
        (0.0, 50.0, 10.0, -1.190_388_093_568_058_2e-35, 0.0),
        (0.25, 0.75, 7.0, 4.106_723_585_578_333e-4, 1.032_943_290_739_857_4e-5),
    ];

    #[test]
    fn oracle_values() {
        for (a, t, x, re, im) in ORACLE {
            let got = bessel_k(c(a, t), x).unwrap();
            let want = c(re, im);
            assert!(rel(got, want) < 1e-10, "K_{{{a}+{t}i}}({x}) = {got}, want {want}");
        }
    }

    #[test]
    fn closed_form_half_order() {
        for x in [1e-3, 0.1, 1.0, 7.5, 50.0] {
            let want = (PI / (2.0 * x)).sqrt() * (-x).exp();
            let got = bessel_k(c(0.5, 0.0), x).unwrap();
            assert!(rel(got, c(want, 0.0)) < 1e-12, "x={x}");
        }
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(bessel_k(c(0.0, 0.0), 0.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(c(0.0, 0.0), -1.0), Err(Error::Domain(_))));
        assert!(matches!(bessel_k(c(2.5, 0.0), 1.0), Err(Error::Precondition(_))));
    }

    #[test]
    fn series_and_path_agree_on_overlap() {
        for (t, x) in [(1.0, 0.5), (3.0, 2.0), (10.0, 5.0), (30.0, 10.0), (60.0, 15.0)] {
            for a in [0.0, 0.4, -1.3] {
                let nu = c(a, t);
                let s = k_series_scaled(nu, x);
                let p = k_path_scaled(nu, x);
                assert!(rel(s, p) < 1e-10, "nu={nu} x={x}: {s} vs {p}");
            }
        }
    }

    #[test]
    fn recurrence_matches_closed_form() {
        // K_{5/2}(x) = √(π/2x) e^{-x} (1 + 3/x + 3/x²)
        for x in [0.3, 2.0, 11.0] {
            let want = (PI / (2.0 * x)).sqrt() * (-x).exp() * (1.0 + 3.0 / x + 3.0 / (x * x));
            assert!(rel(bessel_k_scaled_any(c(2.5, 0.0), x), c(want, 0.0)) < 1e-11);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn even_in_order(a in -2.0f64..2.0, t in -40.0f64..40.0, lx in -6.9f64..3.9) {
            let x = lx.exp();
            let p = bessel_k_scaled(c(a, t), x).unwrap();
            let m = bessel_k_scaled(c(-a, -t), x).unwrap();
            prop_assert!((p - m).norm() <= 1e-10 * p.norm().max(1e-300));
        }

        #[test]
        fn recurrence_holds(a in -0.9f64..0.9, t in 0.0f64..30.0, lx in -3.0f64..3.9) {
            let x = lx.exp();
            let nu = c(a, t);
            let lo = bessel_k_scaled(nu - 1.0, x).unwrap();
            let mid = bessel_k_scaled(nu, x).unwrap();
            let hi = bessel_k_scaled(nu + 1.0, x).unwrap();
            let resid = hi - lo - mid * (2.0 * nu / x);
            let scale = hi.norm() + lo.norm() + (mid * (2.0 * nu / x)).norm();
            prop_assert!(resid.norm() <= 1e-10 * scale);
        }
    }
}
