//! Seeded generators for the randomized oracles. Everything runs off
//! `ChaCha8Rng` so a seed reproduces the same matrices on every platform.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::matcore::{c, eye, herm_eig_unchecked, op_norm, real_diag, scale, zeros, CMatrix};

pub type TestRng = ChaCha8Rng;

pub fn rng(seed: u64) -> TestRng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn uniform(rng: &mut TestRng, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * rng.random::<f64>()
}

/// Dimension in `1..=max`.
pub fn dim(rng: &mut TestRng, max: usize) -> usize {
    rng.random_range(1..=max.max(1))
}

/// Entries i.i.d. standard complex normal.
pub fn gaussian(rng: &mut TestRng, r: usize, cols: usize) -> CMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_fn(r, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(s * re, s * im)
    })
}

/// Sample from the closed unit ball: `G (I + G*G)^{-1/2}` scaled by `u^{1/(rc)}`.
pub fn unit_ball(rng: &mut TestRng, r: usize, cols: usize) -> CMatrix {
    if r == 0 || cols == 0 {
        return zeros(r, cols);
    }
    let g = gaussian(rng, r, cols);
    let w = herm_eig_unchecked(&(eye(cols) + g.adjoint() * &g)).map(|x| 1.0 / x.sqrt());
    let u: f64 = rng.random();
    scale(&(g * w), u.powf(1.0 / (r * cols) as f64))
}

/// Random matrix with operator norm exactly `norm`.
pub fn with_norm(rng: &mut TestRng, r: usize, cols: usize, norm: f64) -> CMatrix {
    if r == 0 || cols == 0 {
        return zeros(r, cols);
    }
    let g = gaussian(rng, r, cols);
    let n = op_norm(&g);
    scale(&g, norm / n)
}

/// Random contraction with norm drawn from `[0, max_norm]`.
pub fn contraction(rng: &mut TestRng, r: usize, cols: usize, max_norm: f64) -> CMatrix {
    let n = uniform(rng, 0.0, max_norm);
    with_norm(rng, r, cols, n)
}

pub fn unitary(rng: &mut TestRng, n: usize) -> CMatrix {
    if n == 0 {
        return zeros(0, 0);
    }
    let qr = gaussian(rng, n, n).qr();
    let q = qr.q();
    let r = qr.r();
    let mut out = q.clone();
    for j in 0..n {
        let d = r[(j, j)];
        if d.norm() > 0.0 {
            let ph = d / d.norm();
            for i in 0..n {
                out[(i, j)] *= ph;
            }
        }
    }
    out
}

/// Hermitian matrix with spectrum drawn uniformly from `[-max_abs, max_abs]`.
pub fn hermitian(rng: &mut TestRng, n: usize, max_abs: f64) -> CMatrix {
    let w = unitary(rng, n);
    let vals: Vec<f64> = (0..n).map(|_| uniform(rng, -max_abs, max_abs)).collect();
    &w * real_diag(&vals) * w.adjoint()
}

/// PSD matrix with spectrum in `[lo, hi]`.
pub fn psd(rng: &mut TestRng, n: usize, lo: f64, hi: f64) -> CMatrix {
    let w = unitary(rng, n);
    let vals: Vec<f64> = (0..n).map(|_| uniform(rng, lo, hi)).collect();
    &w * real_diag(&vals) * w.adjoint()
}

/// PSD matrix of the given rank (spectrum of the nonzero part in `[0.2, 2]`).
pub fn psd_rank(rng: &mut TestRng, n: usize, rank: usize) -> CMatrix {
    let w = unitary(rng, n);
    let vals: Vec<f64> = (0..n).map(|i| if i < rank { uniform(rng, 0.2, 2.0) } else { 0.0 }).collect();
    &w * real_diag(&vals) * w.adjoint()
}

/// Sectorial matrix `S* e^{iΘ} S` with `‖Θ‖ ≤ phi`, so its numerical range
/// lies in the sector `|arg z| ≤ phi`.
pub fn sectorial(rng: &mut TestRng, n: usize, phi: f64) -> CMatrix {
    let s = gaussian(rng, n, n) + scale(&eye(n), 1.5);
    let theta = hermitian(rng, n, phi);
    let rot = herm_eig_unchecked(&theta).map_complex(|t| c(t.cos(), t.sin()));
    s.adjoint() * rot * s
}
