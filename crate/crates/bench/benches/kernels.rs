use anv_core::congruence::{volume_mc, CongruenceBox};
use anv_core::gamma_factors::{analytic_conductor, LanglandsParams};
use anv_core::mseries::decompose_gl2;
use anv_core::newvector::{Gl2Rep, KirillovVector, LineRule, LineSamples};
use anv_core::numerics::bump::mellin_bump_line;
use anv_core::numerics::{bessel_k, gamma, mellin_bump, BumpFunction};
use anv_core::padic::torus_integral;
use anv_core::whittaker::{gl2_mb_contour, stade_gl2_mellin_barnes, whittaker_gl2, DiagonalPoint};
use anv_core::Complex64 as C64;
use criterion::{black_box, criterion_group, criterion_main, Criterion};

fn special_functions(c: &mut Criterion) {
    c.bench_function("gamma", |b| b.iter(|| gamma(black_box(C64::new(0.3, 40.0)))));
    c.bench_function("bessel_k_order_10i", |b| b.iter(|| bessel_k(black_box(C64::new(0.0, 10.0)), black_box(0.5))));
    let mu = LanglandsParams::from_pairs(&[(0.0, 30.0), (0.0, -30.0), (0.1, 5.0)]);
    c.bench_function("analytic_conductor", |b| b.iter(|| analytic_conductor(black_box(&mu))));
}

fn mellin(c: &mut Criterion) {
    let f = BumpFunction::canonical();
    c.bench_function("mellin_bump_pointwise_tau_1000", |b| b.iter(|| mellin_bump(&f, black_box(C64::new(3.0, 1000.0)))));
    c.bench_function("mellin_bump_line_64", |b| b.iter(|| mellin_bump_line(&f, 3.0, black_box(1000.0), 0.08, 64)));
}

fn whittaker(c: &mut Criterion) {
    let nu = LanglandsParams::from_pairs(&[(0.0, 5.0), (0.0, -5.0)]);
    let a = DiagonalPoint::new(vec![0.5, 2.0]).unwrap();
    c.bench_function("whittaker_gl2_closed_form", |b| b.iter(|| whittaker_gl2(&nu, black_box(&a))));
    let contour = gl2_mb_contour(&nu, &a);
    c.bench_function("whittaker_gl2_mellin_barnes", |b| b.iter(|| stade_gl2_mellin_barnes(&nu, black_box(&a), &contour)));
    let mu = LanglandsParams::from_pairs(&[(0.02, 3.0), (0.01, -3.0)]);
    let y = DiagonalPoint::new(vec![0.5, 1.0]).unwrap();
    c.bench_function("decompose_gl2", |b| b.iter(|| decompose_gl2(&mu, black_box(&y))));
}

fn group_and_padic(c: &mut Criterion) {
    let bx = CongruenceBox::new(3, 10.0, 0.1, 0).unwrap();
    c.bench_function("volume_mc_gl3_1e4", |b| b.iter(|| volume_mc(&bx, 10_000, black_box(1))));
    c.bench_function("torus_integral_gl3", |b| b.iter(|| torus_integral(black_box(&[4, 1, -3]))));
}

fn newvector(c: &mut Criterion) {
    let mut g = c.benchmark_group("newvector");
    g.sample_size(10);
    let rep = Gl2Rep::tempered(10.0);
    let v = KirillovVector::canonical();
    let rule = LineRule::adaptive(&rep, &v, 3.0).unwrap();
    g.bench_function("line_samples_sigma_3", |b| b.iter(|| LineSamples::new(&rep, &v, black_box(&rule))));
    g.finish();
}

criterion_group!(benches, special_functions, mellin, whittaker, group_and_padic, newvector);
criterion_main!(benches);
