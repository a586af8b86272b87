//! Archimedean `L`-factors, gamma factors, `c`-functions, analytic conductors
//! and the normalized function `Θ(s, Π) = C(Π)^{-s} / γ(1/2 + s, Π)`.
//!
//! The ε-factor of a spherical principal series is taken to be 1, see
//! [`EPSILON_SPHERICAL`], and the contragredient of `π_μ` has parameters `-μ`.

use crate::error::{Error, Result};
use crate::numerics::{gamma_r as gr, ln_gamma_r, rgamma_r};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

pub use crate::numerics::gamma_r;

/// Tolerance for deciding that a value is a nonpositive even integer.
pub const POLE_TOL: f64 = 1e-9;

/// ε(s, π) for spherical principal series; an assumption kept as a named constant.
pub const EPSILON_SPHERICAL: f64 = 1.0;

/// Spectral parameters `μ = (μ_1, …, μ_n)` of a spherical principal series.
#[derive(Debug, Clone, PartialEq)]
pub struct LanglandsParams {
    pub mu: Vec<C64>,
}

impl LanglandsParams {
    pub fn new(mu: Vec<C64>) -> Result<Self> {
        if mu.is_empty() {
            return Err(Error::Precondition("Langlands parameters need n >= 1".into()));
        }
        Ok(Self { mu })
    }

    /// Parameters `(it, -it)`.
    pub fn gl2_tempered(t: f64) -> Self {
        Self { mu: vec![C64::new(0.0, t), C64::new(0.0, -t)] }
    }

    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self { mu: pairs.iter().map(|&(r, i)| C64::new(r, i)).collect() }
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    /// Largest `|Re μ_i|`.
    pub fn theta(&self) -> f64 {
        self.mu.iter().map(|m| m.re.abs()).fold(0.0, f64::max)
    }

    pub fn is_tempered(&self) -> bool {
        self.theta() == 0.0
    }

    pub fn is_theta_tempered(&self, theta: f64) -> bool {
        theta < 0.5 && self.theta() <= theta
    }

    /// Parameters of the contragredient, `-μ`.
    pub fn dual(&self) -> Self {
        Self { mu: self.mu.iter().map(|m| -m).collect() }
    }

    pub fn sum(&self) -> C64 {
        self.mu.iter().sum()
    }
}

/// Nearest nonpositive even integer `-2k` to `z`, if within [`POLE_TOL`].
pub fn gamma_r_pole_index(z: C64) -> Option<u32> {
    if z.im.abs() > POLE_TOL || z.re > POLE_TOL {
        return None;
    }
    let k = (-z.re / 2.0).round();
    if (z.re + 2.0 * k).abs() <= POLE_TOL {
        Some(k as u32)
    } else {
        None
    }
}

/// Residue of `Γ_R` at `s = -2k`: `2(-π)^k / k!`.
pub fn gamma_r_residue(k: u32) -> C64 {
    let mut v = 2.0;
    for j in 1..=k {
        v *= -PI / j as f64;
    }
    C64::new(v, 0.0)
}

/// `c(s, μ) = ∏_{i<j} Γ_R(s + μ_i - μ_j)`.
pub fn c_func(s: f64, mu: &LanglandsParams) -> Result<C64> {
    let mut prod = C64::new(1.0, 0.0);
    for i in 0..mu.n() {
        for j in i + 1..mu.n() {
            let z = s + mu.mu[i] - mu.mu[j];
            if gamma_r_pole_index(z).is_some() {
                return Err(Error::Pole { what: format!("c-function factor ({}, {})", i + 1, j + 1), at: z });
            }
            prod *= gr(z)?;
        }
    }
    Ok(prod)
}

/// Classification of the differences `ν_i - ν'_j` into poles of `Γ_R` and regular points.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularizedLSplit {
    /// Pole locations, stored as the nonpositive even integers themselves.
    pub poles: Vec<i64>,
    pub regular: Vec<C64>,
}

pub fn l_split(nu: &LanglandsParams, nu_prime: &LanglandsParams) -> RegularizedLSplit {
    let mut poles = Vec::new();
    let mut regular = Vec::new();
    for a in &nu.mu {
        for b in &nu_prime.mu {
            let z = a - b;
            match gamma_r_pole_index(z) {
                Some(k) => poles.push(-2 * k as i64),
                None => regular.push(z),
            }
        }
    }
    RegularizedLSplit { poles, regular }
}

/// `L(ν, ν') = ∏_{poles} res Γ_R · ∏_{regular} Γ_R`.
pub fn l_reg(nu: &LanglandsParams, nu_prime: &LanglandsParams) -> Result<C64> {
    if nu.n() <= nu_prime.n() {
        return Err(Error::Precondition(format!(
            "L_reg needs dim nu > dim nu', got {} and {}",
            nu.n(),
            nu_prime.n()
        )));
    }
    let split = l_split(nu, nu_prime);
    let mut prod = C64::new(1.0, 0.0);
    for p in split.poles {
        prod *= gamma_r_residue((-p / 2) as u32);
    }
    for z in split.regular {
        prod *= gr(z)?;
    }
    Ok(prod)
}

/// `C(π) = ∏ (1 + |μ_j|)`.
pub fn analytic_conductor(mu: &LanglandsParams) -> f64 {
    mu.mu.iter().map(|m| 1.0 + m.norm()).product()
}

fn check_l_poles(s: C64, mu: &LanglandsParams, label: &str) -> Result<()> {
    for (i, m) in mu.mu.iter().enumerate() {
        let z = s + m;
        if gamma_r_pole_index(z).is_some() {
            return Err(Error::Pole { what: format!("{label} factor {}", i + 1), at: z });
        }
    }
    Ok(())
}

/// `L(s, π_μ) = ∏ Γ_R(s + μ_i)`.
pub fn l_factor(s: C64, mu: &LanglandsParams) -> Result<C64> {
    check_l_poles(s, mu, "L(s, mu)")?;
    Ok(ln_l_factor(s, mu).exp())
}

/// `ln L(s, π_μ)` as a sum of principal `ln Γ_R`; no pole check.
pub fn ln_l_factor(s: C64, mu: &LanglandsParams) -> C64 {
    mu.mu.iter().map(|m| ln_gamma_r(s + m)).sum()
}

/// `γ(s, π_μ) = ε · L(1 - s, -μ) / L(s, μ)` with `ε = 1`.
///
/// A pole of `L(s, μ)` is a zero of γ and is reported as an error as well.
pub fn gamma_factor(s: C64, mu: &LanglandsParams) -> Result<C64> {
    check_l_poles(s, mu, "L(s, mu) (zero of gamma)")?;
    let dual = mu.dual();
    check_l_poles(1.0 - s, &dual, "L(1-s, -mu)")?;
    Ok((ln_l_factor(1.0 - s, &dual) - ln_l_factor(s, mu)).exp() * EPSILON_SPHERICAL)
}

/// Parameters `{μ_Π,i + μ_π,j}` of the Rankin–Selberg product `Π ⊗ π`.
pub fn rs_params(mu_big: &LanglandsParams, mu_small: &LanglandsParams) -> LanglandsParams {
    let mut mu = Vec::with_capacity(mu_big.n() * mu_small.n());
    for a in &mu_big.mu {
        for b in &mu_small.mu {
            mu.push(a + b);
        }
    }
    LanglandsParams { mu }
}

/// `Θ(s, Π) = C(Π)^{-s} / γ(1/2 + s, Π)` without the half-plane guard.
///
/// Works in log form where possible, since the two gamma ratios are
/// individually far outside double range for large `|Im s|`.
pub fn theta_unchecked(s: C64, mu: &LanglandsParams, ln_conductor: f64) -> C64 {
    let mut log = -s * ln_conductor;
    let mut zeros = C64::new(1.0, 0.0);
    for m in &mu.mu {
        log += ln_gamma_r(0.5 + s + m);
        let den = 0.5 - s - m;
        if den.im.abs() < 1.0 && den.re < 0.5 {
            zeros *= rgamma_r(den);
        } else {
            log -= ln_gamma_r(den);
        }
    }
    log.exp() * zeros / EPSILON_SPHERICAL
}

/// `Θ(s, Π)`, holomorphic for `Re s > -1/2 + θ`.
pub fn theta(s: C64, mu_big: &LanglandsParams) -> Result<C64> {
    let th = mu_big.theta();
    if s.re <= -0.5 + th {
        return Err(Error::Pole {
            what: format!("Theta (needs Re s > {:.6})", -0.5 + th),
            at: s,
        });
    }
    Ok(theta_unchecked(s, mu_big, analytic_conductor(mu_big).ln()))
}

/// `Θ(μ, Π) = C(Π)^{-Σμ} γ(1/2, Π ⊗ π̃_μ)`.
pub fn theta_tuple(mu: &LanglandsParams, mu_big: &LanglandsParams) -> Result<C64> {
    if mu.mu.iter().any(|m| m.re < 0.0) {
        return Err(Error::Precondition("theta_tuple needs Re(mu_i) >= 0".into()));
    }
    if !mu_big.is_theta_tempered(mu_big.theta()) {
        return Err(Error::Precondition("theta_tuple needs a theta-tempered Pi (theta < 1/2)".into()));
    }
    let params = rs_params(mu_big, &mu.dual());
    let g = gamma_factor(C64::new(0.5, 0.0), &params)?;
    let c = analytic_conductor(mu_big);
    Ok((-mu.sum() * c.ln()).exp() * g)
}

/// Outcome of the conductor bounds `C(Π)^n / C(π)^{n+1} ≤ C(Π ⊗ π) ≤ C(Π)^n C(π)^{n+1}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TensorBounds {
    pub lower: f64,
    pub value: f64,
    pub upper: f64,
    pub holds: bool,
}

/// Checks the conductor bounds for `Π` on `GL(n+1)` and `π` on `GL(n)`.
pub fn conductor_tensor_bounds(mu_big: &LanglandsParams, mu_small: &LanglandsParams) -> TensorBounds {
    let n = mu_small.n() as i32;
    let cb = analytic_conductor(mu_big);
    let cs = analytic_conductor(mu_small);
    let value = analytic_conductor(&rs_params(mu_big, mu_small));
    let lower = cb.powi(n) / cs.powi(n + 1);
    let upper = cb.powi(n) * cs.powi(n + 1);
    TensorBounds { lower, value, upper, holds: lower <= value && value <= upper }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }
    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm()
    }

    #[test]
    fn gamma_r_values() {
        assert!(rel(gamma_r(c(1.0, 0.0)).unwrap(), c(1.0, 0.0)) < 1e-14);
        assert!(rel(gamma_r(c(2.0, 0.0)).unwrap(), c(1.0 / PI, 0.0)) < 1e-14);
        // π^{-1/4} Γ(1/4), 30-digit reference
        assert!(rel(gamma_r(c(0.5, 0.0)).unwrap(), c(2.723_288_216_330_671, 0.0)) < 1e-14);
        assert!(matches!(gamma_r(c(-4.0, 0.0)), Err(Error::Pole { .. })));
        assert!(gamma_r(c(-3.0, 0.0)).is_ok());
    }

    #[test]
    fn residues() {
        assert_eq!(gamma_r_residue(0), c(2.0, 0.0));
        assert!((gamma_r_residue(1).re + 2.0 * PI).abs() < 1e-15);
        assert!((gamma_r_residue(2).re - PI * PI).abs() < 1e-14);
        // residue matches (s + 2k)·Γ_R(s) near the pole
        for k in 0..4u32 {
            let h = 1e-7;
            let s = c(-2.0 * k as f64 + h, 0.0);
            let approx = gamma_r(s).unwrap() * h;
            assert!(rel(approx, gamma_r_residue(k)) < 1e-6);
        }
    }

    #[test]
    fn c_function() {
        let p1 = LanglandsParams::from_pairs(&[(0.3, 2.0)]);
        assert_eq!(c_func(1.0, &p1).unwrap(), c(1.0, 0.0));
        let z = LanglandsParams::from_pairs(&[(0.2, 0.1), (0.2, 0.1)]);
        match c_func(0.0, &z) {
            Err(Error::Pole { what, .. }) => assert!(what.contains("(1, 2)")),
            other => panic!("{other:?}"),
        }
        let t = LanglandsParams::gl2_tempered(1.0);
        let want = c(-0.148_212_828_459_903_43, -0.253_573_846_865_108_81);
        assert!(rel(c_func(1.0, &t).unwrap(), want) < 1e-13);
    }

    #[test]
    fn regularized_l() {
        let nu = LanglandsParams::from_pairs(&[(1.0, 0.0), (3.0, 0.0)]);
        let np = LanglandsParams::from_pairs(&[(0.5, 0.0)]);
        let want = gamma_r(c(0.5, 0.0)).unwrap() * gamma_r(c(2.5, 0.0)).unwrap();
        assert!(rel(l_reg(&nu, &np).unwrap(), want) < 1e-14);

        let nu = LanglandsParams::from_pairs(&[(0.0, 0.0), (2.0, 0.0)]);
        let np = LanglandsParams::from_pairs(&[(0.0, 0.0)]);
        assert!(rel(l_reg(&nu, &np).unwrap(), c(2.0 / PI, 0.0)) < 1e-14);
        let split = l_split(&nu, &np);
        assert_eq!(split.poles, vec![0]);

        let nu = LanglandsParams::from_pairs(&[(-2.0, 0.0), (1.0, 0.0)]);
        assert!(rel(l_reg(&nu, &np).unwrap(), c(-2.0 * PI, 0.0)) < 1e-14);
        assert!(l_reg(&np, &nu).is_err());
    }

    #[test]
    fn conductor_and_l_factor() {
        assert_eq!(analytic_conductor(&LanglandsParams::from_pairs(&[(0.0, 0.0)])), 1.0);
        assert!((analytic_conductor(&LanglandsParams::gl2_tempered(3.0)) - 16.0).abs() < 1e-13);
        let m = LanglandsParams::from_pairs(&[(0.1, 5.0), (-0.1, -5.0)]);
        let one = 1.0 + c(0.1, 5.0).norm();
        assert!((analytic_conductor(&m) - one * one).abs() < 1e-12);

        let z = LanglandsParams::from_pairs(&[(0.0, 0.0)]);
        assert!(rel(l_factor(c(1.0, 0.0), &z).unwrap(), c(1.0, 0.0)) < 1e-14);
        assert!(l_factor(c(0.0, 0.0), &z).is_err());
        let t = LanglandsParams::gl2_tempered(1.0);
        assert!(rel(l_factor(c(2.0, 0.0), &t).unwrap(), c(0.069_158_744_625_622_39, 0.0)) < 1e-13);
    }

    #[test]
    fn gamma_factor_values() {
        let z = LanglandsParams::from_pairs(&[(0.0, 0.0)]);
        assert!(rel(gamma_factor(c(0.5, 0.0), &z).unwrap(), c(1.0, 0.0)) < 1e-14);
        for t in [0.5, 3.0, 40.0] {
            let g = gamma_factor(c(0.5, 0.0), &LanglandsParams::gl2_tempered(t)).unwrap();
            assert!(rel(g, c(1.0, 0.0)) < 1e-12, "t={t}: {g}");
        }
        assert!(gamma_factor(c(0.0, 0.0), &z).is_err());
        assert!(gamma_factor(c(3.0, 0.0), &z).is_err());
    }

    #[test]
    fn stirling_shadow() {
        // |γ(1/2 - σ)| / C^σ tends to (2π)^{-2σ}; after removing that constant
        // the ratio sits well inside [1/8, 8].
        for t in [5.0, 20.0, 80.0] {
            let mu = LanglandsParams::gl2_tempered(t);
            let cond = analytic_conductor(&mu);
            for sigma in [1.0, 2.0] {
                let g = gamma_factor(c(0.5 - sigma, 0.0), &mu).unwrap().norm();
                let ratio = g / cond.powf(sigma) * (2.0 * PI).powf(2.0 * sigma);
                assert!((0.125..=8.0).contains(&ratio), "t={t} σ={sigma}: {ratio}");
            }
        }
        let mu = LanglandsParams::gl2_tempered(5.0);
        let g = gamma_factor(c(-1.5, 0.0), &mu).unwrap().norm();
        assert!((0.25..=4.0).contains(&(g / 36f64.powi(2) * (2.0 * PI).powi(4))));
    }

    #[test]
    fn gamma_r_functional_equation() {
        for i in 0..6 {
            for j in 0..6 {
                let s = c(-2.3 + 0.83 * i as f64, -4.0 + 1.7 * j as f64);
                let lhs = gamma_r(s).unwrap() * gamma_r(-s).unwrap();
                for m in 1..=3 {
                    let sign = if m % 2 == 1 { 1.0 } else { -1.0 };
                    let rhs = sign * (2.0 * PI / s)
                        * gamma_r(s + 2.0 * m as f64).unwrap()
                        * gamma_r(2.0 - s - 2.0 * m as f64).unwrap();
                    assert!(rel(lhs, rhs) < 1e-9, "s={s} m={m}");
                }
            }
        }
    }

    #[test]
    fn theta_values() {
        for t in [0.0, 2.0, 5.0, 30.0] {
            let mu = LanglandsParams::gl2_tempered(t);
            let th = theta(c(0.0, 0.0), &mu).unwrap();
            assert!((th.norm() - 1.0).abs() < 1e-12);
        }
        let mu = LanglandsParams::gl2_tempered(5.0);
        // at real s the magnitude is (2π)^{-2 Re s} up to a bounded factor
        let t2 = theta(c(2.0, 0.0), &mu).unwrap().norm() * (2.0 * PI).powi(4);
        assert!((0.125..=8.0).contains(&t2), "{t2}");
        let t3 = theta(c(2.0, 10.0), &mu).unwrap().norm();
        assert!(t3 <= 11f64.powi(4), "{t3}");
        assert!(theta(c(-0.6, 0.0), &mu).is_err());
        let comp = LanglandsParams::from_pairs(&[(0.2, 0.0), (-0.2, 0.0)]);
        assert!(theta(c(-0.35, 0.0), &comp).is_err());
        assert!(theta(c(-0.2, 3.0), &comp).is_ok());
    }

    #[test]
    fn theta_matches_direct_ratio() {
        let mu = LanglandsParams::from_pairs(&[(0.1, 7.0), (-0.1, -7.0)]);
        let cond = analytic_conductor(&mu);
        for s in [c(0.3, 1.0), c(2.0, -15.0), c(4.0, 60.0)] {
            let direct = (-s * cond.ln()).exp() / gamma_factor(0.5 + s, &mu).unwrap();
            assert!(rel(theta(s, &mu).unwrap(), direct) < 1e-11);
        }
        // Θ(s)Θ(-s) = 1 on the tempered line
        let mu = LanglandsParams::gl2_tempered(9.0);
        for tau in [0.0, 3.0, 200.0] {
            let s = c(0.0, tau);
            assert!(rel(theta(s, &mu).unwrap() * theta(-s, &mu).unwrap(), c(1.0, 0.0)) < 1e-11);
        }
    }

    #[test]
    fn theta_tuple_values() {
        let pi0 = LanglandsParams::from_pairs(&[(0.0, 0.0), (0.0, 0.0)]);
        let mu0 = LanglandsParams::from_pairs(&[(0.0, 0.0)]);
        let v = theta_tuple(&mu0, &pi0).unwrap();
        assert!(rel(v, c(1.0, 0.0)) < 1e-13);
        let big = LanglandsParams::gl2_tempered(4.0);
        let shifted = LanglandsParams::from_pairs(&[(2.0, 0.0)]);
        let v = theta_tuple(&shifted, &big).unwrap();
        assert!(v.is_finite() && v.norm() < 1e3);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = LanglandsParams::from_pairs(&[(0.0, rng.gen_range(-30.0..30.0))]);
            assert!(theta_tuple(&m, &big).unwrap().is_finite());
        }
        assert!(theta_tuple(&LanglandsParams::from_pairs(&[(-0.1, 0.0)]), &big).is_err());
    }

    #[test]
    fn rs_params_examples() {
        let z = LanglandsParams::from_pairs(&[(0.0, 0.0)]);
        assert_eq!(rs_params(&z, &z).mu, vec![c(0.0, 0.0)]);
        let a = LanglandsParams::gl2_tempered(1.0);
        let b = LanglandsParams::from_pairs(&[(0.0, 2.0)]);
        assert_eq!(rs_params(&a, &b).mu, vec![c(0.0, 3.0), c(0.0, 1.0)]);
    }

    /// Lower and upper conductor bounds for `GL(n+1) × GL(n)` on random imaginary parameters.
    fn tensor_bounds_hold(n: usize, draws: usize, seed: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng, k: usize| LanglandsParams {
            mu: (0..k).map(|_| c(0.0, rng.gen_range(-50.0..50.0))).collect(),
        };
        (0..draws).all(|_| {
            let big = draw(&mut rng, n + 1);
            let small = draw(&mut rng, n);
            conductor_tensor_bounds(&big, &small).holds
        })
    }

    #[test]
    fn conductor_tensor_bounds_random() {
        assert!(tensor_bounds_hold(1, 1000, 11));
        assert!(tensor_bounds_hold(2, 1000, 12));
    }

    proptest! {
        #[test]
        fn conductor_invariances(v in proptest::collection::vec((-3.0f64..3.0, -50.0f64..50.0), 1..5)) {
            let mu = LanglandsParams::from_pairs(&v);
            let base = analytic_conductor(&mu);
            let mut rev = mu.mu.clone();
            rev.reverse();
            let reversed = analytic_conductor(&LanglandsParams::new(rev).unwrap());
            prop_assert!((reversed - base).abs() <= 1e-12 * base);
            let conj_neg = analytic_conductor(&LanglandsParams::new(mu.mu.iter().map(|m| -m.conj()).collect()).unwrap());
            prop_assert!((conj_neg - base).abs() <= 1e-12 * base);
            prop_assert!(base >= 1.0);
        }
    }
}
