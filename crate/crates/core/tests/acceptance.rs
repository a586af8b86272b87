//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
//!
//! Runs without the libtest harness so the lines always reach the console.

use std::time::{Duration, Instant};

use anv_core::congruence::{folner_ratio_with_stderr, lower_unipotent, volume_mc, CongruenceBox};
use anv_core::gamma_factors::{conductor_tensor_bounds, LanglandsParams};
use anv_core::mseries::{congruent_mod_two, decompose_gl2, m_vanishing};
use anv_core::newvector::{
    decay_fit, side_value, toy_defect, DefectContext, DefectGrid, Gl2Rep, KirillovVector, LineRule,
};
use anv_core::numerics::BumpFunction;
use anv_core::padic::{heart_vanishing_scan, schur, torus_integral, vandermonde, LaurentPoly};
use anv_core::plancherel::{parseval, plancherel_density, roundtrip_error, SpectralGrid, CERTIFICATE_TOL, NODES_PER_UNIT};
use anv_core::whittaker::{
    calibrate_gl2_norm, gl2_mb_contour, stade_gl2_mellin_barnes, stade_norm_defect, whittaker_gl2, DiagonalPoint,
};
use anv_core::Complex64 as C64;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type MbCase = (&'static [(f64, f64)], [f64; 2]);

/// Frozen after the first verified run of criterion 7.
const K_FROZEN: f64 = 0.2079;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

fn pt(a: &[f64]) -> DiagonalPoint {
    DiagonalPoint::new(a.to_vec()).unwrap()
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed < Duration::from_secs(limit_s)
}

fn c1_decomposition() -> anv_core::Result<Outcome> {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    for t in [0.0, 3.0, 10.0] {
        for y in [0.01, 0.1, 0.5, 0.9] {
            let mu = LanglandsParams::from_pairs(&[(0.02, t), (0.01, -t)]);
            let (l, r) = decompose_gl2(&mu, &pt(&[y, 1.0]))?;
            worst = worst.max((l - r).norm() / l.norm());
        }
    }
    let el = start.elapsed();
    Ok(outcome(worst <= 1e-8 && within(el, 30), format!("max rel residual {worst:.2e} over 12 points, {:.2}s", el.as_secs_f64())))
}

fn c2_vanishing() -> anv_core::Result<Outcome> {
    let start = Instant::now();
    let a = pt(&[0.2, 0.5, 1.0]);
    let cases = [
        LanglandsParams::from_pairs(&[(0.3, 1.0), (2.3, 1.0), (0.07, 0.0)]),
        LanglandsParams::from_pairs(&[(4.3, 1.0), (0.3, 1.0), (0.07, 0.0)]),
        LanglandsParams::from_pairs(&[(0.1, -2.0), (2.1, -2.0), (0.3, 0.5)]),
    ];
    let mut worst: f64 = 0.0;
    let mut all_congruent = true;
    for tau in &cases {
        all_congruent &= congruent_mod_two(tau, 1e-12);
        worst = worst.max(m_vanishing(tau, &a)?);
    }
    let control = LanglandsParams::from_pairs(&[(0.3, 1.0), (2.8, 1.0), (0.07, 0.0)]);
    let ctrl = m_vanishing(&control, &a)?;
    let el = start.elapsed();
    Ok(outcome(
        all_congruent && worst <= 1e-8 && ctrl >= 1e-3 && within(el, 60),
        format!("congruent max {worst:.2e}, control {ctrl:.3e}, {:.2}s", el.as_secs_f64()),
    ))
}

fn c3_stade() -> anv_core::Result<Outcome> {
    let ts = [1.0, 5.0, 10.0];
    let mut worst: f64 = 0.0;
    let mut fits = Vec::new();
    for t in ts {
        worst = worst.max(stade_norm_defect(t)?);
        fits.push(calibrate_gl2_norm(&[t])?.d2);
    }
    let mean = fits.iter().sum::<f64>() / fits.len() as f64;
    let spread = fits.iter().map(|f| (f - mean).abs() / mean).fold(0.0, f64::max);
    calibrate_gl2_norm(&ts)?;
    Ok(outcome(worst <= 1e-6 && spread < 1e-5, format!("max norm defect {worst:.2e}, calibration spread {spread:.2e}")))
}

fn c4_mellin_barnes() -> anv_core::Result<Outcome> {
    let cases: [MbCase; 6] = [
        (&[(0.0, 0.0), (0.0, 0.0)], [1.0, 1.0]),
        (&[(0.0, 5.0), (0.0, -5.0)], [0.5, 2.0]),
        (&[(0.2, 1.0), (0.1, -3.0)], [1.5, 0.8]),
        (&[(0.0, 12.0), (0.0, -12.0)], [0.3, 1.0]),
        (&[(0.0, 5.0), (0.0, -5.0)], [2.0, 0.5]),
        (&[(0.3, 2.0), (0.3, -2.0)], [0.8, 1.2]),
    ];
    let mut worst: f64 = 0.0;
    for (nu, a) in cases {
        let nu = LanglandsParams::from_pairs(nu);
        let p = pt(&a);
        let mb = stade_gl2_mellin_barnes(&nu, &p, &gl2_mb_contour(&nu, &p))?;
        let w = whittaker_gl2(&nu, &p)?;
        worst = worst.max((mb - w).norm() / w.norm());
    }
    Ok(outcome(worst <= 1e-7, format!("max rel gap {worst:.2e} at 6 points")))
}

fn c5_plancherel() -> anv_core::Result<Outcome> {
    let f = BumpFunction::canonical();
    let g = SpectralGrid::certified(&f, CERTIFICATE_TOL, NODES_PER_UNIT)?;
    let e = roundtrip_error(&f, &g)?;
    let (s, x) = parseval(&f, &g);
    let pv = (s - x).abs() / x;
    let mut dens: f64 = 0.0;
    for t in [1e-3, 0.2, 1.0, 3.7, 10.0, 55.0] {
        let want = t * (std::f64::consts::PI * t).tanh() / std::f64::consts::PI;
        dens = dens.max((plancherel_density(t) - want).abs() / want);
    }
    Ok(outcome(
        e <= 1e-4 && pv <= 1e-3 && dens <= 1e-10,
        format!("sup error {e:.2e} (t_max {:.0}), Parseval {pv:.2e}, density {dens:.2e}", g.t_max()),
    ))
}

fn c6_contour_and_decay() -> anv_core::Result<Outcome> {
    let start = Instant::now();
    let v = KirillovVector::canonical();
    let rep = Gl2Rep::tempered(100.0);
    let a = side_value(&rep, &v, 40.0, &LineRule::adaptive(&rep, &v, 0.0)?)?;
    let b = side_value(&rep, &v, 40.0, &LineRule::adaptive(&rep, &v, 4.0)?)?;
    let shift = (a - b).norm() / a.norm();
    let rep = Gl2Rep::tempered(10.0);
    let grid = [0.01, 0.005, 0.002, 0.001];
    let s3 = decay_fit(&rep, &v, &grid, 3)?;
    let s5 = decay_fit(&rep, &v, &grid, 5)?;
    let el = start.elapsed();
    Ok(outcome(
        shift <= 1e-8 && s3 >= 2.9 && s5 >= 4.9 && within(el, 120),
        format!("shift gap {shift:.2e}, slopes {s3:.3} (M=3) {s5:.3} (M=5), {:.1}s", el.as_secs_f64()),
    ))
}

fn c7_invariance() -> anv_core::Result<Outcome> {
    let v = KirillovVector::canonical();
    let cs = [-0.1, -0.05, -0.01, 0.01, 0.05, 0.1];
    let mut ok = true;
    let mut ks = Vec::new();
    for cond in [10.0f64, 100.0, 1000.0] {
        let rep = Gl2Rep::tempered(cond.sqrt() - 1.0);
        let mut ctx = DefectContext::new(&rep, &v, &DefectGrid::default())?;
        let mut k: f64 = 0.0;
        for c in cs {
            let d = ctx.defect(c)?.norm();
            ok &= d <= K_FROZEN * c.abs();
            k = k.max(d / c.abs());
        }
        ks.push(k);
    }
    Ok(outcome(ok, format!("K = {K_FROZEN}; observed max |D|/|c| = {:.4}, {:.4}, {:.4} for C = 10, 100, 1000", ks[0], ks[1], ks[2])))
}

fn c8_subconductor() -> anv_core::Result<Outcome> {
    let v = KirillovVector::canonical();
    let rep = Gl2Rep::tempered(100.0);
    let mut ctx = DefectContext::new(&rep, &v, &DefectGrid::default())?;
    let mut best = (0.0, 0.0);
    for c in [0.1, 0.05, 0.01] {
        let d = ctx.subconductor(0.01, c)?.norm();
        if d > best.1 {
            best = (c, d);
        }
    }
    Ok(outcome(best.1 >= 0.05, format!("|defect| = {:.3} at c = {}", best.1, best.0)))
}

fn c9_volume() -> anv_core::Result<Outcome> {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    let mut seed = 900;
    for (n, star) in [(2usize, 0u8), (2, 1), (3, 0)] {
        let mut scaled = Vec::new();
        let mut rel_se: f64 = 0.0;
        for x in [1.0f64, 10.0, 100.0] {
            let bx = CongruenceBox::new(n, x, 0.1, star)?;
            let (vol, se) = volume_mc(&bx, 20_000, seed)?;
            seed += 1;
            scaled.push(vol * x.powi(bx.volume_exponent()));
            rel_se = rel_se.max(se / vol);
        }
        let dev = scaled.iter().map(|s| (s / scaled[0] - 1.0).abs()).fold(0.0, f64::max);
        // the 5% band must also be wide compared with the sampling error
        ok &= dev <= 0.05 && 3.0 * rel_se <= 0.05;
        parts.push(format!("({n},{star}) dev {dev:.3} se {rel_se:.1e}"));
    }
    let el = start.elapsed();
    ok &= within(el, 120);
    Ok(outcome(ok, format!("{}, {:.1}s", parts.join("; "), el.as_secs_f64())))
}

fn c10_folner() -> anv_core::Result<Outcome> {
    let tau = 0.2;
    let mut ok = true;
    let mut parts = Vec::new();
    for x in [1.0, 50.0] {
        let bx = CongruenceBox::new(2, x, tau, 0)?;
        let mut ratios = Vec::new();
        for k in [2.0, 8.0, 32.0] {
            let t1 = tau / k;
            ratios.push(folner_ratio_with_stderr(&lower_unipotent(2, t1 / (2.0 * x)), &bx, t1, 40_000, 4)?.0);
        }
        ok &= ratios.windows(2).all(|w| w[1] < w[0]) && ratios[2] < 0.05;
        parts.push(format!("X={x}: {:.4} > {:.4} > {:.4}", ratios[0], ratios[1], ratios[2]));
    }
    Ok(outcome(ok, parts.join("; ")))
}

/// `∏_{i<j}(α_i^{-1} - α_j^{-1})`, the conjugate of the Vandermonde product on the torus.
fn conjugate_vandermonde(n: usize) -> LaurentPoly {
    let inv = |i: usize| {
        let mut e = vec![0; n];
        e[i] = -1;
        LaurentPoly::monomial(e, BigRational::from_integer(BigInt::from(1)))
    };
    let mut p = LaurentPoly::one(n);
    for i in 0..n {
        for j in i + 1..n {
            p = &p * &(&inv(i) - &inv(j));
        }
    }
    p
}

fn c11_padic() -> anv_core::Result<Outcome> {
    let start = Instant::now();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [2usize, 3] {
        let scan = heart_vanishing_scan(n, 12)?;
        let vanish = scan.entries.iter().filter(|e| e.m[0] >= scan.threshold).all(|e| e.value.is_zero());
        // independent expansion s_m · Δ · conj(Δ) on a sample of the window
        let weight = &vandermonde(n) * &conjugate_vandermonde(n);
        let mut agree = true;
        for e in scan.entries.iter().step_by(7) {
            agree &= (&schur(&e.m)? * &weight).constant_term() == e.value;
        }
        ok &= vanish && agree;
        parts.push(format!("n={n}: threshold m1 >= {}, {} entries, expansion agrees {agree}", scan.threshold, scan.entries.len()));
    }
    let brute = (&schur(&[0, 0])? * &(&vandermonde(2) * &conjugate_vandermonde(2))).constant_term();
    let two = BigRational::from_integer(BigInt::from(2));
    ok &= brute == two && torus_integral(&[0, 0])? == two;
    let el = start.elapsed();
    ok &= within(el, 60);
    Ok(outcome(ok, format!("{}; torus_integral((0,0)) = {brute}, {:.2}s", parts.join("; "), el.as_secs_f64())))
}

fn c12_conductor() -> anv_core::Result<Outcome> {
    let mut parts = Vec::new();
    let mut ok = true;
    for (n, seed) in [(1usize, 11u64), (2, 12)] {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let draw = |rng: &mut ChaCha8Rng, k: usize| LanglandsParams {
            mu: (0..k).map(|_| C64::new(0.0, rng.gen_range(-50.0..50.0))).collect(),
        };
        let mut bad = 0;
        for _ in 0..1000 {
            let big = draw(&mut rng, n + 1);
            let small = draw(&mut rng, n);
            bad += usize::from(!conductor_tensor_bounds(&big, &small).holds);
        }
        ok &= bad == 0;
        parts.push(format!("GL({})xGL({n}): {bad}/1000 violations", n + 1));
    }
    Ok(outcome(ok, parts.join("; ")))
}

fn c13_toy() -> anv_core::Result<Outcome> {
    let mut ok = true;
    let mut parts = Vec::new();
    for (t, x) in [(1.0f64, 10.0f64), (10.0, 1e3), (100.0, 1e5)] {
        let d = toy_defect(t, x)?;
        let bound = t.abs() / (x - 1.0);
        ok &= d <= bound;
        parts.push(format!("{d:.4e} <= {bound:.4e}"));
    }
    Ok(outcome(ok, parts.join("; ")))
}

fn main() {
    // `cargo test` passes harness flags such as `--quiet`; a name filter selects criteria by number
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    type Criterion = (u32, &'static str, fn() -> anv_core::Result<Outcome>);
    let criteria: [Criterion; 13] = [
        (1, "GL(2) M-decomposition", c1_decomposition),
        (2, "vanishing at s = 2", c2_vanishing),
        (3, "Stade norm", c3_stade),
        (4, "Mellin-Barnes vs Bessel", c4_mellin_barnes),
        (5, "Plancherel round trip", c5_plancherel),
        (6, "contour shift and decay", c6_contour_and_decay),
        (7, "invariance at conductor scale", c7_invariance),
        (8, "sub-conductor failure", c8_subconductor),
        (9, "volume scaling", c9_volume),
        (10, "Folner ratio", c10_folner),
        (11, "p-adic heart", c11_padic),
        (12, "conductor tensor bounds", c12_conductor),
        (13, "toy defect", c13_toy),
    ];
    let mut failures = 0;
    for (k, name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| f == &k.to_string()) {
            continue;
        }
        let o = run().unwrap_or_else(|e| outcome(false, format!("error: {e}")));
        failures += usize::from(!o.passed);
        println!("{} criterion {k:>2} ({name}): {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    if failures > 0 {
        println!("{failures} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
