//! Exact arithmetic for unramified `p`-adic Whittaker functions.
//!
//! Laurent polynomials in `α_1, …, α_n` with rational coefficients carry
//! Schur polynomials (Shintani's formula) and the torus integrals whose
//! vanishing for large `m_1` is the `p`-adic counterpart of the archimedean
//! decay statement. Powers of `q^{1/2}` are kept as separate integers so the
//! polynomial layer never leaves `Q`.
//!
//! The constant `γ(1/2, Π ⊗ π̄) ω_π^{-1}(C(Π))` is independent of `π` for
//! supercuspidal `Π` and is left out of [`torus_integral`]; vanishing does
//! not depend on it.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_complex::Complex64 as C64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg, Sub};

/// Lowest `m_n` considered by [`heart_vanishing_scan`].
pub const SCAN_FLOOR: i64 = -12;
/// Largest `m_1` accepted by [`heart_vanishing_scan`].
pub const SCAN_CEILING: i64 = 12;

/// Finitely supported map from exponent vectors to exact rationals.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LaurentPoly {
    n: usize,
    terms: BTreeMap<Vec<i64>, BigRational>,
}

impl LaurentPoly {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn one(n: usize) -> Self {
        Self::monomial(vec![0; n], BigRational::one())
    }

    pub fn monomial(exponent: Vec<i64>, coeff: BigRational) -> Self {
        let mut p = Self::zero(exponent.len());
        p.add_term(exponent, coeff);
        p
    }

    /// `α_i`, zero-based.
    pub fn variable(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Self::monomial(e, BigRational::one())
    }

    pub fn nvars(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<i64>, &BigRational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, exponent: &[i64]) -> BigRational {
        self.terms.get(exponent).cloned().unwrap_or_else(BigRational::zero)
    }

    /// Coefficient of `α^0`, i.e. `∫_{(S¹)^n} p dα` for the probability Haar measure.
    pub fn constant_term(&self) -> BigRational {
        self.coeff(&vec![0; self.n])
    }

    fn add_term(&mut self, exponent: Vec<i64>, coeff: BigRational) {
        if coeff.is_zero() {
            return;
        }
        let entry = self.terms.entry(exponent).or_insert_with(BigRational::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.retain(|_, c| !c.is_zero());
        }
    }

    /// Multiply by the monomial `α^shift`.
    pub fn shift(&self, shift: &[i64]) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|(e, c)| (e.iter().zip(shift).map(|(a, b)| a + b).collect(), c.clone()))
            .collect();
        Self { n: self.n, terms }
    }

    /// Value at a rational point.
    pub fn eval_rational(&self, at: &[BigRational]) -> BigRational {
        let mut acc = BigRational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (x, &k) in at.iter().zip(e) {
                t *= pow_rational(x, k);
            }
            acc += t;
        }
        acc
    }

    /// Value at a complex point, in floating point.
    pub fn eval_complex(&self, at: &[C64]) -> C64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                let c = c.to_f64().unwrap_or(f64::NAN);
                at.iter().zip(e).fold(C64::new(c, 0.0), |acc, (x, &k)| acc * x.powi(k as i32))
            })
            .sum()
    }

    /// Exact quotient by `α_i - α_j`; fails if the division leaves a remainder.
    pub fn div_difference(&self, i: usize, j: usize) -> Result<Self> {
        let mut rem = self.clone();
        let mut quot = Self::zero(self.n);
        loop {
            // a term of largest α_i-degree; each step lowers that degree by one
            let lead = rem.terms.iter().max_by_key(|(e, _)| e[i]).map(|(e, c)| (e.clone(), c.clone()));
            let Some((e, c)) = lead else { return Ok(quot) };
            let low = rem.terms.keys().map(|e| e[i]).min().unwrap_or(0);
            if e[i] == low && rem.terms.keys().all(|k| k[i] == low) {
                return Err(Error::Domain(format!("polynomial is not divisible by a_{} - a_{}", i + 1, j + 1)));
            }
            let mut q = e.clone();
            q[i] -= 1;
            let mut moved = q.clone();
            moved[j] += 1;
            quot.add_term(q, c.clone());
            rem.add_term(e, -c.clone());
            rem.add_term(moved, c);
        }
    }
}

fn pow_rational(x: &BigRational, k: i64) -> BigRational {
    let p = num_traits::pow(x.clone(), k.unsigned_abs() as usize);
    if k < 0 {
        p.recip()
    } else {
        p
    }
}

impl Add for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = self.clone();
        for (e, c) in &rhs.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly { n: self.n, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c)).collect() }
    }
}

impl Sub for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self + &(-rhs)
    }
}

impl Mul for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero(self.n);
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea.iter().zip(eb).map(|(a, b)| a + b).collect(), ca * cb);
            }
        }
        out
    }
}

/// Residue field size, conductor exponent and root number of `Π`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PadicRepData {
    pub q: u64,
    pub conductor_exponent: u32,
    pub epsilon_center: C64,
}

impl PadicRepData {
    pub fn new(q: u64, conductor_exponent: u32, epsilon_center: C64) -> Result<Self> {
        if !is_prime_power(q) {
            return Err(Error::Precondition(format!("q = {q} is not a prime power")));
        }
        if (epsilon_center.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::Precondition(format!("|epsilon(1/2)| = {} is not 1", epsilon_center.norm())));
        }
        Ok(Self { q, conductor_exponent, epsilon_center })
    }

    /// `C(Π) = q^{c(Π)}`.
    pub fn conductor(&self) -> f64 {
        (self.q as f64).powi(self.conductor_exponent as i32)
    }
}

fn is_prime_power(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let p = (2..).find(|d| q.is_multiple_of(*d)).unwrap_or(q);
    let mut r = q;
    while r.is_multiple_of(p) {
        r /= p;
    }
    r == 1
}

fn is_dominant(m: &[i64]) -> bool {
    m.windows(2).all(|w| w[0] >= w[1])
}

/// Permutations of `0..n` with their signs, in lexicographic order.
fn permutations(n: usize) -> Vec<(Vec<usize>, i32)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<(Vec<usize>, i32)>) {
        let n = used.len();
        if prefix.len() == n {
            let mut inv = 0;
            for a in 0..n {
                for b in a + 1..n {
                    if prefix[a] > prefix[b] {
                        inv += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inv % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for k in 0..n {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// `det((α_j^{e_i})_{i,j})` expanded over permutations.
fn alternant(e: &[i64]) -> LaurentPoly {
    let n = e.len();
    let mut p = LaurentPoly::zero(n);
    for (perm, sign) in permutations(n) {
        let mut exp = vec![0; n];
        for (i, &j) in perm.iter().enumerate() {
            exp[j] = e[i];
        }
        p.add_term(exp, BigRational::from_integer(BigInt::from(sign)));
    }
    p
}

/// `∏_{i<j} (α_i - α_j)`.
pub fn vandermonde(n: usize) -> LaurentPoly {
    let mut p = LaurentPoly::one(n);
    for i in 0..n {
        for j in i + 1..n {
            p = &p * &(&LaurentPoly::variable(n, i) - &LaurentPoly::variable(n, j));
        }
    }
    p
}

/// Schur polynomial `s_m(α_1, …, α_n)` as the bialternant quotient.
pub fn schur(m: &[i64]) -> Result<LaurentPoly> {
    let n = m.len();
    if n == 0 {
        return Err(Error::Precondition("schur needs n >= 1".into()));
    }
    if !is_dominant(m) {
        return Err(Error::Precondition(format!("schur needs m_1 >= ... >= m_n, got {m:?}")));
    }
    // s_m = (α_1⋯α_n)^{m_n} s_{m - m_n}, so the division runs on true polynomials
    let base = m[n - 1];
    let e: Vec<i64> = (0..n).map(|i| m[i] - base + (n - 1 - i) as i64).collect();
    let mut p = alternant(&e);
    for i in 0..n {
        for j in i + 1..n {
            p = p.div_difference(i, j)?;
        }
    }
    Ok(p.shift(&vec![base; n]))
}

/// `δ^{1/2}(diag(ϖ^m))` as the exponent `k` of `q^{k/2}`.
pub fn delta_half_exponent(m: &[i64]) -> i64 {
    let n = m.len() as i64;
    -(0..m.len()).map(|i| m[i] * (n + 1 - 2 * (i as i64 + 1))).sum::<i64>()
}

/// Shintani's formula: `δ^{1/2}(a) s_m(α)` for dominant `m`, and 0 otherwise.
pub fn shintani(m: &[i64], alpha: &[C64], rep: &PadicRepData) -> Result<C64> {
    if alpha.len() != m.len() {
        return Err(Error::Precondition("shintani needs one Satake parameter per coordinate".into()));
    }
    if alpha.iter().any(|a| (a.norm() - 1.0).abs() > 1e-12) {
        return Err(Error::Precondition("Satake parameters must have modulus 1".into()));
    }
    if !is_dominant(m) {
        return Ok(C64::new(0.0, 0.0));
    }
    let s = schur(m)?.eval_complex(alpha);
    Ok(s * (rep.q as f64).powf(0.5 * delta_half_exponent(m) as f64))
}

/// Integrand `s_m(α)·|Δ(α)|²` on the torus, written as a Laurent polynomial.
///
/// On `(S¹)^n`, `conj Δ(α) = Δ(α^{-1}) = ∏_{i>j}(α_i - α_j) ∏_k α_k^{-(n-1)}`,
/// so the integrand is `det(α_j^{m_i - i + 1}) ∏_{i>j}(α_i - α_j)` with
/// one-based `i`. The `reverse` flag expands both factors in the opposite
/// monomial order.
fn torus_integrand(m: &[i64], reverse: bool) -> LaurentPoly {
    let n = m.len();
    let e: Vec<i64> = (0..n).map(|i| m[i] - i as i64).collect();
    let det = alternant(&e);
    let mut pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).collect();
    if reverse {
        pairs.reverse();
    }
    let mut prod = LaurentPoly::one(n);
    for (i, j) in pairs {
        prod = &prod * &(&LaurentPoly::variable(n, i) - &LaurentPoly::variable(n, j));
    }
    if reverse {
        &prod * &det
    } else {
        &det * &prod
    }
}

/// `∫_{(S¹)^n} s_m(α) |Δ(α)|² dα` as an exact constant term.
pub fn torus_integral(m: &[i64]) -> Result<BigRational> {
    if m.is_empty() || !is_dominant(m) {
        return Err(Error::Precondition(format!("torus integral needs a dominant m, got {m:?}")));
    }
    Ok(torus_integrand(m, false).constant_term())
}

/// [`torus_integral`] with the expansion run in the opposite order.
pub fn torus_integral_reordered(m: &[i64]) -> Result<BigRational> {
    if m.is_empty() || !is_dominant(m) {
        return Err(Error::Precondition(format!("torus integral needs a dominant m, got {m:?}")));
    }
    Ok(torus_integrand(m, true).constant_term())
}

/// One entry of a vanishing scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub m: Vec<i64>,
    pub value: BigRational,
    /// `δ^{1/2}(diag(ϖ^m)) = q^{qpower/2}`.
    pub qpower: i64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HeartScan {
    pub n: usize,
    pub m1_max: i64,
    pub entries: Vec<ScanEntry>,
    /// Smallest `T` such that every scanned `m` with `m_1 ≥ T` gives 0.
    pub threshold: i64,
}

impl HeartScan {
    pub fn nonzero(&self) -> impl Iterator<Item = &ScanEntry> {
        self.entries.iter().filter(|e| !e.value.is_zero())
    }
}

/// Dominant `m` with `m1_max ≥ m_1 ≥ … ≥ m_n ≥ floor`, in lexicographic order.
fn dominant_window(n: usize, m1_max: i64, floor: i64) -> Vec<Vec<i64>> {
    fn rec(prefix: &mut Vec<i64>, n: usize, top: i64, floor: i64, out: &mut Vec<Vec<i64>>) {
        if prefix.len() == n {
            out.push(prefix.clone());
            return;
        }
        for v in floor..=top {
            prefix.push(v);
            rec(prefix, n, v, floor, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), n, m1_max, floor, &mut out);
    out
}

/// Exact torus integrals over the dominant window `m_1 ≤ m1_max`, `m_n ≥ -12`.
pub fn heart_vanishing_scan(n: usize, m1_max: i64) -> Result<HeartScan> {
    if !(n == 2 || n == 3) {
        return Err(Error::Precondition(format!("scan supports n in {{2, 3}}, got {n}")));
    }
    if !(SCAN_FLOOR..=SCAN_CEILING).contains(&m1_max) {
        return Err(Error::Precondition(format!("m1_max must lie in [{SCAN_FLOOR}, {SCAN_CEILING}], got {m1_max}")));
    }
    let mut entries = Vec::new();
    for m in dominant_window(n, m1_max, SCAN_FLOOR) {
        let value = torus_integral(&m)?;
        entries.push(ScanEntry { qpower: delta_half_exponent(&m), m, value });
    }
    let threshold = entries.iter().filter(|e| !e.value.is_zero()).map(|e| e.m[0] + 1).max().unwrap_or(SCAN_FLOOR);
    Ok(HeartScan { n, m1_max, entries, threshold })
}

/// `ε(1/2 - β, Π) = C(Π)^β ε(1/2, Π)`.
pub fn epsilon_shift(rep: &PadicRepData, beta: C64) -> C64 {
    let ln_c = rep.conductor_exponent as f64 * (rep.q as f64).ln();
    (beta * ln_c).exp() * rep.epsilon_center
}

/// `∏_i ε(1/2 - β_i, Π)`.
pub fn epsilon_product(rep: &PadicRepData, betas: &[C64]) -> C64 {
    betas.iter().map(|&b| epsilon_shift(rep, b)).product()
}

/// Nearest `f64` to an exact rational, for reporting.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}
