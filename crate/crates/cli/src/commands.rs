//! The experiment commands. Each reads its parameters and produces a [`Report`].

use anv_core::congruence::{folner_ratio_with_stderr, lower_unipotent, volume_mc, CongruenceBox};
use anv_core::gamma_factors::{conductor_tensor_bounds, LanglandsParams};
use anv_core::mseries::{congruent_mod_two, decompose_gl2, m_vanishing};
use anv_core::newvector::{
    decay_fit_samples, side_value, toy_defect, DefectContext, DefectGrid, DefectReport, Gl2Rep, KirillovVector,
    LineRule, LineSamples,
};
use anv_core::numerics::{gamma_r, BumpFunction};
use anv_core::padic::{heart_vanishing_scan, SCAN_FLOOR};
use anv_core::plancherel::{
    forward_transform, inverse_transform, parseval, plancherel_density, roundtrip_samples, SpectralGrid,
};
use anv_core::whittaker::{
    calibrate_gl2_norm, gl2_mb_contour, gl3_contour, stade_gl2_mellin_barnes, stade_norm_defect, whittaker_gl2,
    whittaker_gl3, DiagonalPoint, D2,
};
use anv_core::Complex64 as C64;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::config::{complex_list, f64_groups, ConfigError, Format, ParamSpec, Params};
use crate::report::{Check, Plot, Report};

#[derive(Debug)]
pub enum RunError {
    Config(ConfigError),
    Compute(anv_core::Error),
}

impl From<ConfigError> for RunError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}

impl From<anv_core::Error> for RunError {
    fn from(e: anv_core::Error) -> Self {
        Self::Compute(e)
    }
}

pub struct Ctx<'a> {
    pub params: &'a Params,
    pub seed: u64,
    pub tolerance: f64,
}

pub struct Command {
    pub name: &'static str,
    pub about: &'static str,
    pub seed: u64,
    pub tolerance: f64,
    pub tolerance_help: &'static str,
    pub format: Format,
    pub params: &'static [ParamSpec],
    pub run: fn(&Ctx) -> Result<Report, RunError>,
}

const fn p(key: &'static str, default: &'static str, help: &'static str) -> ParamSpec {
    ParamSpec { key, default, help }
}

pub const COMMANDS: &[Command] = &[
    Command {
        name: "gamma",
        about: "Γ_R(s) = π^{-s/2} Γ(s/2) on a uniform grid of s",
        seed: 0,
        tolerance: 0.0,
        tolerance_help: "unused",
        format: Format::Csv,
        params: &[
            p("s_min", "0.5", "first real part"),
            p("s_max", "5", "last real part"),
            p("points", "10", "number of grid points"),
            p("s_im", "0", "common imaginary part"),
        ],
        run: gamma,
    },
    Command {
        name: "conductor",
        about: "random checks of C(Π)^n/C(π)^{n+1} ≤ C(Π⊗π) ≤ C(Π)^n C(π)^{n+1}",
        seed: 11,
        tolerance: 0.0,
        tolerance_help: "allowed number of violated draws",
        format: Format::Json,
        params: &[
            p("n", "1", "rank of the smaller group; Π is on GL(n+1)"),
            p("draws", "1000", "number of random pairs"),
            p("t_range", "50", "each μ_j is i·U(-t_range, t_range)"),
        ],
        run: conductor,
    },
    Command {
        name: "k-volume",
        about: "Monte Carlo Haar volume of K_*(X, τ) and its scaling X^A",
        seed: 5,
        tolerance: 0.05,
        tolerance_help: "allowed relative spread of vol·X^A",
        format: Format::Csv,
        params: &[
            p("n", "2", "matrix size"),
            p("star", "0", "0 for K_0, 1 for K_1"),
            p("tau", "0.1", "box size τ"),
            p("x", "1,10,100", "levels X"),
            p("samples", "20000", "samples per level"),
        ],
        run: k_volume,
    },
    Command {
        name: "folner",
        about: "Følner ratio vol(gA △ A)/vol(A) for g = n⁻(τ₁/2X)",
        seed: 4,
        tolerance: 0.05,
        tolerance_help: "bound on the ratio at the last divisor",
        format: Format::Csv,
        params: &[
            p("n", "2", "matrix size"),
            p("star", "0", "0 for K_0, 1 for K_1"),
            p("x", "50", "level X"),
            p("tau", "0.2", "box size τ"),
            p("divisors", "2,8,32", "τ₁ = τ/k for each k"),
            p("samples", "40000", "samples per ratio"),
        ],
        run: folner,
    },
    Command {
        name: "whittaker-eval",
        about: "Whittaker function values; for GL(2) also Mellin–Barnes and the Stade norm",
        seed: 0,
        tolerance: 1e-7,
        tolerance_help: "relative gap between closed form and Mellin–Barnes (GL(3): contour doubling)",
        format: Format::Json,
        params: &[
            p("n", "2", "2 or 3"),
            p("mu", "", "Langlands parameters re:im; empty picks a default for n"),
            p("points", "", "diagonal points a, separated by ';'; empty picks a default for n"),
            p("stade_t", "1,5,10", "t values for the norm identity (GL(2) only)"),
            p("stade_tol", "1e-6", "bound on the relative norm defect"),
            p("calibration_tol", "1e-5", "bound on the relative gap of the fitted d_2"),
        ],
        run: whittaker_eval,
    },
    Command {
        name: "decompose",
        about: "GL(2) Whittaker function against the sum of two M-series",
        seed: 0,
        tolerance: 1e-8,
        tolerance_help: "relative residual bound",
        format: Format::Csv,
        params: &[
            p("re", "0.02,0.01", "real parts of μ = (re_1 + it, re_2 - it)"),
            p("t", "0,3,10", "imaginary parts t"),
            p("y", "0.01,0.1,0.5,0.9", "points a = (y, 1)"),
        ],
        run: decompose,
    },
    Command {
        name: "m-vanishing",
        about: "relative size of the s = 2 M-series for congruent parameters and a control",
        seed: 0,
        tolerance: 1e-8,
        tolerance_help: "bound for the congruent cases",
        format: Format::Json,
        params: &[
            p(
                "tau",
                "0.3:1,2.3:1,0.07:0;4.3:1,0.3:1,0.07:0;0.1:-2,2.1:-2,0.3:0.5",
                "parameter triples separated by ';'",
            ),
            p("control", "0.3:1,2.8:1,0.07:0", "non-congruent triple; empty to skip"),
            p("control_floor", "1e-3", "lower bound for the control"),
            p("a", "0.2,0.5,1", "diagonal point"),
        ],
        run: mvanishing,
    },
    Command {
        name: "plancherel-roundtrip",
        about: "bump function through the spherical transform and back",
        seed: 0,
        tolerance: 1e-4,
        tolerance_help: "sup-norm round trip bound",
        format: Format::Json,
        params: &[
            p("center", "1", "bump center"),
            p("radius", "0.5", "bump radius"),
            p("certificate_tol", "1e-6", "tail tolerance of the certified grid"),
            p("nodes_per_unit", "3", "quadrature density of the grid"),
            p("parseval_tol", "1e-3", "relative Parseval bound"),
            p("density_t", "0.001,0.2,1,3.7,10,55", "points for the density check"),
            p("density_tol", "1e-10", "relative density bound"),
        ],
        run: plancherel_roundtrip,
    },
    Command {
        name: "newvector-decay",
        about: "decay of the Kirillov side as t → 0 and contour shift invariance",
        seed: 0,
        tolerance: 0.1,
        tolerance_help: "allowed shortfall of each slope below M",
        format: Format::Json,
        params: &[
            p("t0", "10", "μ = (i t0, -i t0)"),
            p("m", "3,5", "lines Re s = M"),
            p("t_grid", "0.01,0.005,0.002,0.001", "strictly decreasing t values"),
            p("shift_t0", "100", "t0 for the contour shift check"),
            p("shift_t", "40", "evaluation point of the shift check"),
            p("shift_sigmas", "0,4", "lines compared; empty to skip"),
            p("shift_tol", "1e-8", "relative bound on the shift discrepancy"),
        ],
        run: newvector_decay,
    },
    Command {
        name: "newvector-defect",
        about: "invariance defect under n⁻(c) across conductors",
        seed: 0,
        tolerance: 0.2079,
        tolerance_help: "frozen constant K in |defect(c)| ≤ K|c|",
        format: Format::Json,
        params: &[
            p("conductors", "10,100,1000", "targets C; μ = ±i(√C - 1)"),
            p("c", "-0.1,-0.05,-0.01,0.01,0.05,0.1", "shifts c"),
            p("x_min", "-10", "left end of the log t window"),
            p("log2_n", "17", "initial FFT size exponent"),
        ],
        run: newvector_defect,
    },
    Command {
        name: "subconductor",
        about: "defect under n⁻(c/shrink): below the conductor scale it is not small",
        seed: 0,
        tolerance: 0.05,
        tolerance_help: "the largest |defect| with |c| ≤ c_max must reach this",
        format: Format::Json,
        params: &[
            p("t0", "100", "μ = (i t0, -i t0)"),
            p("shrink", "0.01", "scale factor of the shift"),
            p("c", "0.1,0.05,0.01,0.001", "shifts c"),
            p("c_max", "0.1", "witness range |c| ≤ c_max"),
        ],
        run: subconductor,
    },
    Command {
        name: "toy",
        about: "one-dimensional toy defect against |t|/(X - 1)",
        seed: 0,
        tolerance: 0.0,
        tolerance_help: "relative slack on the bound",
        format: Format::Csv,
        params: &[p("cases", "1:10,10:1000,100:100000", "pairs t:X")],
        run: toy,
    },
    Command {
        name: "padic-heart",
        about: "exact torus integrals of the unramified heart and their vanishing threshold",
        seed: 0,
        tolerance: 0.0,
        tolerance_help: "unused",
        format: Format::Json,
        params: &[
            p("n", "2", "2 or 3"),
            p("m1_max", "12", "largest m_1 scanned"),
            p("expected_threshold", "1", "frozen threshold"),
            p("nonzero_only", "false", "emit only nonzero entries"),
        ],
        run: padic_heart,
    },
];

pub fn find(name: &str) -> Option<&'static Command> {
    COMMANDS.iter().find(|c| c.name == name)
}

fn cx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn params_of(pairs: &[(f64, f64)]) -> LanglandsParams {
    LanglandsParams::from_pairs(pairs)
}

fn point(a: &[f64]) -> Result<DiagonalPoint, RunError> {
    Ok(DiagonalPoint::new(a.to_vec())?)
}

fn rel(a: C64, b: C64) -> f64 {
    (a - b).norm() / b.norm()
}

fn config_err(msg: String) -> RunError {
    RunError::Config(ConfigError(msg))
}

fn gamma(ctx: &Ctx) -> Result<Report, RunError> {
    let p = ctx.params;
    let (a, b, n, im) = (p.f64("s_min")?, p.f64("s_max")?, p.int::<usize>("points")?, p.f64("s_im")?);
    if n == 0 {
        return Err(config_err("points must be positive".into()));
    }
    let mut r = Report::new(
        vec!["s_re", "s_im", "gamma_r_re", "gamma_r_im"],
        Plot { x: "s_re", y: vec!["gamma_r_re"], log_x: false, log_y: true },
    );
    for k in 0..n {
        let re = if n == 1 { a } else { a + (b - a) * k as f64 / (n - 1) as f64 };
        let g = gamma_r(cx(re, im))?;
        r.push_row(vec![json!(re), json!(im), json!(g.re), json!(g.im)]);
    }
    Ok(r)
}

fn conductor(ctx: &Ctx) -> Result<Report, RunError> {
    let p = ctx.params;
    let (n, draws, range) = (p.int::<usize>("n")?, p.int::<usize>("draws")?, p.f64("t_range")?);
    if n == 0 || !(range > 0.0) {
        return Err(config_err("need n >= 1 and t_range > 0".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed);
    let draw = |rng: &mut ChaCha8Rng, k: usize| LanglandsParams {
        mu: (0..k).map(|_| cx(0.0, rng.gen_range(-range..range))).collect(),
    };
    let mut r = Report::new(
        vec!["draw", "lower", "value", "upper", "holds"],
        Plot { x: "draw", y: vec!["lower", "value", "upper"], log_x: false, log_y: true },
    );
    let mut failures = 0usize;
    let mut margin: f64 = f64::INFINITY;
    for k in 0..draws {
        let big = draw(&mut rng, n + 1);
        let small = draw(&mut rng, n);
        let b = conductor_tensor_bounds(&big, &small);
        failures += usize::from(!b.holds);
        margin = margin.min((b.value / b.lower).ln()).min((b.upper / b.value).ln());
        r.push_row(vec![json!(k), json!(b.lower), json!(b.value), json!(b.upper), json!(b.holds)]);
    }
    r.set("n", n);
    r.set("draws", draws);
    r.set("failures", failures);
    r.set("min_log_margin", margin);
    r.check(Check::at_most("violations", failures as f64, ctx.tolerance));
    Ok(r)
}

fn k_volume(ctx: &Ctx) -> Result<Report, RunError> {
    let p = ctx.params;
    let (n, star, tau) = (p.int::<usize>("n")?, p.int::<u8>("star")?, p.f64("tau")?);
    let (xs, samples) = (p.f64_list("x")?, p.int::<usize>("samples")?);
    if xs.is_empty() {
        return Err(config_err("x must list at least one level".into()));
    }
    let mut r = Report::new(
        vec!["x", "volume", "stderr", "scaled", "scaled_stderr"],
        Plot { x: "x", y: vec!["scaled"], log_x: true, log_y: false },
    );
    let mut scaled = Vec::new();
    let mut exponent = 0;
    for (k, &x) in xs.iter().enumerate() {
        let bx = CongruenceBox::new(n, x, tau, star)?;
        exponent = bx.volume_exponent();
        let (v, se) = volume_mc(&bx, samples, ctx.seed.wrapping_add(k as u64))?;
        let f = x.powi(exponent);
        scaled.push(v * f);
        r.push_row(vec![json!(x), json!(v), json!(se), json!(v * f), json!(se * f)]);
    }
    let (lo, hi) = scaled.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &s| (lo.min(s), hi.max(s)));
    r.set("exponent", exponent);
    r.set("samples", samples);
    r.check(Check::at_most("scaled_spread", hi / lo - 1.0, ctx.tolerance));
    Ok(r)
}

fn folner(ctx: &Ctx) -> Result<Report, RunError> {
    let p = ctx.params;
    let (n, star, x, tau) = (p.int::<usize>("n")?, p.int::<u8>("star")?, p.f64("x")?, p.f64("tau")?);
    let (divisors, samples) = (p.f64_list("divisors")?, p.int::<usize>("samples")?);
    if divisors.is_empty() || divisors.iter().any(|&k| !(k >= 1.0)) {
        return Err(config_err("divisors must be a nonempty list of values >= 1".into()));
    }
    let bx = CongruenceBox::new(n, x, tau, star)?;
    let mut r = Report::new(
        vec!["divisor", "tau1", "ratio", "stderr"],
        Plot { x: "tau1", y: vec!["ratio"], log_x: true, log_y: true },
    );
    let mut ratios = Vec::new();
    for &k in &divisors {
        let tau1 = tau / k;
        let g = lower_unipotent(n, tau1 / (2.0 * x));
        let (ratio, se) = folner_ratio_with_stderr(&g, &bx, tau1, samples, ctx.seed)?;
        ratios.push(ratio);
        r.push_row(vec![json!(k), json!(tau1), json!(ratio), json!(se)]);
    }
    let increases = ratios.windows(2).filter(|w| !(w[1] < w[0])).count();
    r.check(Check::equal("non_decreasing_steps", increases as f64, 0.0));
    r.check(Check::at_most("final_ratio", *ratios.last().unwrap(), ctx.tolerance));
    Ok(r)
}

fn whittaker_eval(ctx: &Ctx) -> Result<Report, RunError> {
    let p = ctx.params;
    let n = p.int::<usize>("n")?;
    let (mu_default, points_default) = match n {
        2 => ("0:5,0:-5", "1,1;0.5,2;1.5,0.8;0.3,1;2,0.5;0.8,1.2"),
        3 => ("0.02:0,0.01:0,-0.03:0", "1,1,1;0.5,1,2"),
        _ => return Err(config_err(format!("n must be 2 or 3, got {n}"))),
    };
    let or_default = |key: &str, d: &'static str| if p.raw(key).is_empty() { d } else { p.raw(key) };
    let mu = complex_list("mu", or_default("mu", mu_default))?;
    let points = f64_groups("points", or_default("points", points_default))?;
    if mu.len() != n || points.iter().any(|a| a.len() != n) {
        return Err(config_err(format!("mu and every point need {n} entries")));
    }
    let nu = params_of(&mu);
    let mut r = Report::new(
        vec!["a", "a1", "w_re", "w_im", "abs_w", "check_re", "check_im", "rel_gap"],
        Plot { x: "a1", y: vec!["abs_w"], log_x: false, log_y: true },
    );
    let mut worst: f64 = 0.0;
    for a in &points {
        let pt = point(a)?;
        let (w, check) = if n == 2 {
            (whittaker_gl2(&nu, &pt)?, stade_gl2_mellin_barnes(&nu, &pt, &gl2_mb_contour(&nu, &pt))?)
        } else {
            let ct = gl3_contour(&nu, &pt);
            (whittaker_gl3(&nu, &pt, &ct)?, whittaker_gl3(&nu, &pt, &ct.doubled())?)
        };
        let gap = rel(check, w);
        worst = worst.max(gap);
        r.push_row(vec![
            json!(a),
            json!(a[0]),
            json!(w.re),
            json!(w.im),
            json!(w.norm()),
            json!(check.re),
            json!(check.im),
            json!(gap),
        ]);
    }
    r.set("check_kind", if n == 2 { "mellin_barnes" } else { "contour_doubling" });
    r.check(Check::at_most("max_rel_gap", worst, ctx.tolerance));
    let ts = p.f64_list("stade_t")?;
    if n == 2 && !ts.is_empty() {
        let mut defects = serde_json::Map::new();
        let mut worst_norm: f64 = 0.0;
        for &t in &ts {
            let d = stade_norm_defect(t)?;
            worst_norm = worst_norm.max(d);
            defects.insert(format!("{t}"), json!(d));
        }
        let cal = calibrate_gl2_norm(&ts)?;
        r.set("stade_defects", Value::Object(defects));
        r.set("calibrated_d2", cal.d2);
        r.set("frozen_d2", D2);
        r.check(Check::at_most("stade_norm_defect", worst_norm, p.f64("stade_tol")?));
        r.check(Check::at_most("calibration_gap", (cal.d2 - D2).abs() / D2, p.f64("calibration_tol")?));
    }
    Ok(r)
}

fn decompose(ctx: &Ctx) -> Result<Report, RunError> {
    let p = ctx.params;
    let re = p.f64_list("re")?;
    if re.len() != 2 {
        return Err(config_err("re needs two entries".into()));
    }
    let mut r = Report::new(
        vec!["t", "y", "lhs_re", "lhs_im", "rhs_re", "rhs_im", "rel_residual"],
        Plot { x: "y", y: vec!["rel_residual"], log_x: true, log_y: true },
    );
    let mut worst: f64 = 0.0;
    for t in p.f64_list("t")? {
        for y in p.f64_list("y")? {
            let mu = params_of(&[(re[0], t), (re[1], -t)]);
            let (l, rh) = decompose_gl2(&mu, &point(&[y, 1.0])?)?;
            let res = (l - rh).norm() / l.norm();
            worst = worst.max(res);
            r.push_row(vec![json!(t), json!(y), json!(l.re), json!(l.im), json!(rh.re), json!(rh.im), json!(res)]);
        }
    }
    r.set("points", r.rows.len());
    r.check(Check::at_most("max_rel_residual", worst, ctx.tolerance));
    Ok(r)
}

fn mvanishing(ctx: &Ctx) -> Result<Report, RunError> {
    let p = ctx.params;
    let a = point(&p.f64_list("a")?)?;
    let mut cases = p.complex_groups("tau")?;
    let n_congruent = cases.len();
    let control = p.complex_list("control")?;
    let has_control = !control.is_empty();
    if has_control {
        cases.push(control);
    }
    let mut r = Report::new(
        vec!["case", "role", "congruent", "relative_size"],
        Plot { x: "case", y: vec!["relative_size"], log_x: false, log_y: true },
    );
    let mut worst: f64 = 0.0;
    for (k, tau) in cases.iter().enumerate() {
        if tau.len() != 3 {
            return Err(config_err(format!("tau case {k} needs three entries")));
        }
        let tau = params_of(tau);
        let congruent = congruent_mod_two(&tau, 1e-12);
        let v = m_vanishing(&tau, &a)?;
        let role = if k < n_congruent { "case" } else { "control" };
        if k < n_congruent {
            if !congruent {
                return Err(config_err(format!("tau case {k} is not congruent mod 2")));
            }
            worst = worst.max(v);
        } else {
            r.check(Check::at_least("control_relative_size", v, p.f64("control_floor")?));
        }
        r.push_row(vec![json!(k), json!(role), json!(congruent), json!(v)]);
    }
    r.check(Check::at_most("max_congruent_relative_size", worst, ctx.tolerance));
    Ok(r)
}

fn plancherel_roundtrip(ctx: &Ctx) -> Result<Report, RunError> {
    let p = ctx.params;
    let f = BumpFunction::new(p.f64("center")?, p.f64("radius")?)?;
    let grid = SpectralGrid::certified(&f, p.f64("certificate_tol")?, p.f64("nodes_per_unit")?)?;
    let coeffs = forward_transform(&f, &grid);
    let mut r = Report::new(
        vec!["y", "f", "reconstructed", "error"],
        Plot { x: "y", y: vec!["f", "reconstructed"], log_x: false, log_y: false },
    );
    let mut worst: f64 = 0.0;
    for y in roundtrip_samples(&f) {
        let back = inverse_transform(&coeffs, &grid, y)?;
        let e = (f.eval(y) - back).abs();
        worst = worst.max(e);
        r.push_row(vec![json!(y), json!(f.eval(y)), json!(back), json!(e)]);
    }
    let (spectral, spatial) = parseval(&f, &grid);
    let parseval_rel = (spectral - spatial).abs() / spatial;
    let mut density_worst: f64 = 0.0;
    for t in p.f64_list("density_t")? {
        let want = t * (std::f64::consts::PI * t).tanh() / std::f64::consts::PI;
        density_worst = density_worst.max((plancherel_density(t) - want).abs() / want);
    }
    r.set("t_max", grid.t_max());
    r.set("nodes", grid.len());
    r.set("parseval_spectral", spectral);
    r.set("parseval_spatial", spatial);
    r.check(Check::at_most("roundtrip_sup_error", worst, ctx.tolerance));
    r.check(Check::at_most("parseval_rel", parseval_rel, p.f64("parseval_tol")?));
    r.check(Check::at_most("density_rel", density_worst, p.f64("density_tol")?));
    Ok(r)
}

fn defect_report_json(rep: &DefectReport, k_estimate: Option<f64>) -> Value {
    json!({
        "K_estimate": k_estimate,
        "c": rep.c,
        "conductor": rep.conductor,
        "defect_im": rep.defect_im,
        "defect_re": rep.defect_re,
        "slopes": rep.slopes,
    })
}

fn newvector_decay(ctx: &Ctx) -> Result<Report, RunError> {
    let p = ctx.params;
    let v = KirillovVector::canonical();
    let rep = Gl2Rep::tempered(p.f64("t0")?);
    let grid = p.f64_list("t_grid")?;
    let ms = p.f64_list("m")?;
    if ms.is_empty() {
        return Err(config_err("m must list at least one line".into()));
    }
    let mut r = Report::new(
        vec!["m", "t", "value_re", "value_im", "abs"],
        Plot { x: "t", y: vec!["abs"], log_x: true, log_y: true },
    );
    let mut slopes = Vec::new();
    for &m in &ms {
        let line = LineSamples::new(&rep, &v, &LineRule::adaptive(&rep, &v, m)?)?;
        let slope = decay_fit_samples(&line, &grid)?;
        for &t in &grid {
            let w = line.eval(t);
            r.push_row(vec![json!(m), json!(t), json!(w.re), json!(w.im), json!(w.norm())]);
        }
        r.check(Check::at_least(format!("slope_m{m}"), slope, m - ctx.tolerance));
        slopes.push(slope);
    }
    let report = DefectReport {
        conductor: rep.conductor,
        c: Vec::new(),
        defect_re: Vec::new(),
        defect_im: Vec::new(),
        k_estimate: 0.0,
        slopes,
    };
    r.set("report", defect_report_json(&report, None));
    let sigmas = p.f64_list("shift_sigmas")?;
    if sigmas.len() >= 2 {
        let shift_rep = Gl2Rep::tempered(p.f64("shift_t0")?);
        let t = p.f64("shift_t")?;
        let values: Vec<C64> = sigmas
            .iter()
            .map(|&s| side_value(&shift_rep, &v, t, &LineRule::adaptive(&shift_rep, &v, s)?))
            .collect::<anv_core::Result<_>>()?;
        let worst = values.iter().map(|&w| rel(w, values[0])).fold(0.0, f64::max);
        r.set(
            "shift",
            json!({
                "sigmas": sigmas,
                "t": t,
                "t0": p.f64("shift_t0")?,
                "values_im": values.iter().map(|w| w.im).collect::<Vec<_>>(),
                "values_re": values.iter().map(|w| w.re).collect::<Vec<_>>(),
            }),
        );
        r.check(Check::at_most("shift_rel_gap", worst, p.f64("shift_tol")?));
    }
    Ok(r)
}

fn defect_grid(p: &Params) -> Result<DefectGrid, RunError> {
    Ok(DefectGrid { x_min: p.f64("x_min")?, log2_n: p.int("log2_n")? })
}

fn newvector_defect(ctx: &Ctx) -> Result<Report, RunError> {
    let p = ctx.params;
    let v = KirillovVector::canonical();
    let grid = defect_grid(p)?;
    let cs = p.f64_list("c")?;
    let mut r = Report::new(
        vec!["conductor", "t0", "c", "defect_re", "defect_im", "ratio"],
        Plot { x: "c", y: vec!["ratio"], log_x: false, log_y: false },
    );
    let mut reports = Vec::new();
    let mut k_all: f64 = 0.0;
    for cond in p.f64_list("conductors")? {
        if !(cond >= 1.0) {
            return Err(config_err(format!("conductor targets must be >= 1, got {cond}")));
        }
        let t0 = cond.sqrt() - 1.0;
        let rep = Gl2Rep::tempered(t0);
        let report = DefectReport::build(&rep, &v, &cs, &grid)?;
        for ((&c, &re), &im) in cs.iter().zip(&report.defect_re).zip(&report.defect_im) {
            let d = cx(re, im);
            let ratio = if c == 0.0 { 0.0 } else { d.norm() / c.abs() };
            r.push_row(vec![json!(cond), json!(t0), json!(c), json!(d.re), json!(d.im), json!(ratio)]);
        }
        k_all = k_all.max(report.k_estimate);
        reports.push(defect_report_json(&report, Some(report.k_estimate)));
    }
    r.set("reports", reports);
    r.set("K_estimate", k_all);
    r.check(Check::at_most("K_estimate", k_all, ctx.tolerance));
    Ok(r)
}

fn subconductor(ctx: &Ctx) -> Result<Report, RunError> {
    let p = ctx.params;
    let v = KirillovVector::canonical();
    let rep = Gl2Rep::tempered(p.f64("t0")?);
    let (shrink, c_max) = (p.f64("shrink")?, p.f64("c_max")?);
    let mut dc = DefectContext::new(&rep, &v, &DefectGrid::default())?;
    let mut r = Report::new(
        vec!["c", "defect_re", "defect_im", "abs"],
        Plot { x: "c", y: vec!["abs"], log_x: true, log_y: true },
    );
    let mut witness: f64 = 0.0;
    for c in p.f64_list("c")? {
        let d = dc.subconductor(shrink, c)?;
        if c.abs() <= c_max {
            witness = witness.max(d.norm());
        }
        r.push_row(vec![json!(c), json!(d.re), json!(d.im), json!(d.norm())]);
    }
    r.set("conductor", rep.conductor);
    r.set("shrink", shrink);
    r.check(Check::at_least("witness_abs_defect", witness, ctx.tolerance));
    Ok(r)
}

fn toy(ctx: &Ctx) -> Result<Report, RunError> {
    let cases = ctx.params.complex_list("cases")?;
    let mut r = Report::new(
        vec!["t", "x", "defect", "bound"],
        Plot { x: "x", y: vec!["defect", "bound"], log_x: true, log_y: true },
    );
    let mut worst = f64::NEG_INFINITY;
    for (t, x) in cases {
        let d = toy_defect(t, x)?;
        let bound = t.abs() / (x - 1.0);
        worst = worst.max(d - bound * (1.0 + ctx.tolerance));
        r.push_row(vec![json!(t), json!(x), json!(d), json!(bound)]);
    }
    r.check(Check::at_most("max_excess_over_bound", worst, 0.0));
    Ok(r)
}

fn padic_heart(ctx: &Ctx) -> Result<Report, RunError> {
    let p = ctx.params;
    let scan = heart_vanishing_scan(p.int("n")?, p.int("m1_max")?)?;
    let only_nonzero = p.bool("nonzero_only")?;
    let mut r = Report::new(
        vec!["m", "numerator", "denominator", "qpower", "m1"],
        Plot { x: "m1", y: vec!["numerator"], log_x: false, log_y: false },
    );
    let exact = |b: &num_bigint::BigInt| b.to_i64().map(Value::from).unwrap_or_else(|| Value::from(b.to_string()));
    for e in &scan.entries {
        if only_nonzero && num_traits::Zero::is_zero(&e.value) {
            continue;
        }
        r.push_row(vec![json!(e.m), exact(e.value.numer()), exact(e.value.denom()), json!(e.qpower), json!(e.m[0])]);
    }
    r.set("n", scan.n);
    r.set("m1_max", scan.m1_max);
    r.set("m_floor", SCAN_FLOOR);
    r.set("threshold", scan.threshold);
    r.set("scanned", scan.entries.len());
    r.set("nonzero", scan.nonzero().count());
    r.check(Check::equal("threshold", scan.threshold as f64, p.int::<i64>("expected_threshold")? as f64));
    let above = scan.entries.iter().filter(|e| e.m[0] >= scan.threshold && !num_traits::Zero::is_zero(&e.value)).count();
    r.check(Check::equal("nonzero_above_threshold", above as f64, 0.0));
    Ok(r)
}
