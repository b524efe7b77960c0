use std::f64::consts::FRAC_PI_3;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use opext::balls::MEMBER_TOL;
use opext::completion::{critical_angle, sectorial_complete};
use opext::matcore::{pinv, psd_sqrt, svd, zeros};
use opext::schur::shorted;
use opext::sector::in_cphi;
use opext::triangular::shmulyan_complete;
use opext::verify::{self, Suite};
use opext::{Angle, Tolerances};
use opext_bench::*;

fn matcore(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("matcore");
    for n in [2, 4, 8, 16] {
        let a = square_contraction(n);
        let h = psd_matrix(n);
        group.bench_with_input(BenchmarkId::new("svd", n), &a, |b, a| b.iter(|| svd(black_box(a))));
        group.bench_with_input(BenchmarkId::new("pinv", n), &a, |b, a| b.iter(|| pinv(black_box(a), &tol)));
        group.bench_with_input(BenchmarkId::new("psd_sqrt", n), &h, |b, h| b.iter(|| psd_sqrt(black_box(h), &tol)));
    }
    group.finish();
}

fn classes(c: &mut Criterion) {
    let tol = Tolerances::default();
    let phi = Angle::new(FRAC_PI_3).unwrap();
    let mut group = c.benchmark_group("classes");
    for n in [2, 4, 8] {
        let t = square_contraction(n);
        group.bench_with_input(BenchmarkId::new("in_cphi", n), &t, |b, t| b.iter(|| in_cphi(black_box(t), phi, &tol)));
        let a = psd_matrix(2 * n);
        group.bench_with_input(BenchmarkId::new("shorted", 2 * n), &a, |b, a| b.iter(|| shorted(black_box(a), n, &tol)));
    }
    group.finish();
}

fn completions(c: &mut Criterion) {
    let tol = Tolerances::default();
    let half = Angle::new(std::f64::consts::FRAC_PI_2).unwrap();
    let mut group = c.benchmark_group("completions");
    for n in [2, 4] {
        let pair = symmetric_pair(n);
        let k = zeros(n, n);
        group.bench_with_input(BenchmarkId::new("critical_angle", n), &pair, |b, p| b.iter(|| critical_angle(black_box(p), &tol)));
        group.bench_with_input(BenchmarkId::new("sectorial_complete", n), &pair, |b, p| {
            b.iter(|| sectorial_complete(black_box(p), half, &k, MEMBER_TOL, &tol))
        });
        let (tp, k) = triangular_instance(n);
        group.bench_function(BenchmarkId::new("shmulyan_complete", n), |b| b.iter(|| shmulyan_complete(black_box(&tp), &k, MEMBER_TOL, &tol)));
    }
    group.finish();
}

fn suites(c: &mut Criterion) {
    let tol = Tolerances::default();
    let mut group = c.benchmark_group("verify");
    group.sample_size(10);
    for suite in [Suite::Completion, Suite::Schur] {
        group.bench_function(suite.name(), |b| b.iter(|| verify::run(suite, 42, 10, 4, &tol, None)));
    }
    group.finish();
}

criterion_group!(benches, matcore, classes, completions, suites);
criterion_main!(benches);
