//! Generalized Schur complements, the defect quadruple
//! `G± = I - T*T ± i cotφ (T - T*)`, `S± = I - TT* ± i cotφ (T - T*)` of a
//! completion, negative indices and shorted operators.
//!
//! With `T± = T sinφ ± i cosφ` one has `sin²φ G± = I - T±*T±` and
//! `sin²φ S± = I - T±T±*`. For `T = T_K` built from a symmetric pair the
//! complements of `G±`, `S±` are `D_U (I - K±*K±) D_U / sin²φ` and
//! `D_{V*} (I - K±K±*) D_{V*} / sin²φ` with `K± = K sinφ ± iQ cosφ`.

use serde::Serialize;

use crate::completion::{complete, critical_angle, shifted_parameter, DualPair};
use crate::error::{Error, Result};
use crate::matcore::{
    block2x2, c, eye, herm_eig_unchecked, herm_residual, inertia, min_eig, op_norm, pinv, psd_sqrt_clipped, scale,
    split_blocks, zeros, CMatrix, Tolerances,
};
use crate::random::{gaussian, rng};
use crate::sector::{in_cphi, kappa_of, shift, Angle};

/// Smallest eigenvalue of `H11` above which the plain inverse is used.
pub const FAST_PATH_EIG: f64 = 1e-6;
/// Residual allowed in `H11^{1/2} S = H12`.
pub const RANGE_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct DefectQuad {
    pub g_plus: CMatrix,
    pub g_minus: CMatrix,
    pub s_plus: CMatrix,
    pub s_minus: CMatrix,
    /// Rows (and columns) of the leading block.
    pub split: usize,
}

impl DefectQuad {
    pub fn max_herm_residual(&self) -> f64 {
        [&self.g_plus, &self.g_minus, &self.s_plus, &self.s_minus].iter().map(|m| herm_residual(m)).fold(0.0, f64::max)
    }
}

pub fn defect_quad(t: &CMatrix, split: usize, phi: Angle) -> Result<DefectQuad> {
    let n = t.nrows();
    if t.ncols() != n || split > n {
        return Err(Error::DimensionMismatch(format!("square matrix with split ≤ {n} expected")));
    }
    if phi.radians() == 0.0 {
        return Err(Error::InvalidAngle(0.0));
    }
    let skew = (t - t.adjoint()) * c(0.0, phi.cot());
    let g = eye(n) - t.adjoint() * t;
    let s = eye(n) - t * t.adjoint();
    Ok(DefectQuad { g_plus: &g + &skew, g_minus: &g - &skew, s_plus: &s + &skew, s_minus: s - skew, split })
}

#[derive(Debug, Clone)]
pub struct SchurComplement {
    pub complement: CMatrix,
    /// `H11^{+1/2} H12`, or an equivalent factor with the same `S*S` on the
    /// fast path.
    pub s: CMatrix,
    pub range_ok: bool,
}

/// `H22 - S*S` with `S = H11^{+1/2} H12`.
pub fn generalized_schur(h: &CMatrix, split: usize, tol: &Tolerances) -> Result<SchurComplement> {
    let n = h.nrows();
    if h.ncols() != n || split > n {
        return Err(Error::DimensionMismatch(format!("square matrix with split ≤ {n} expected")));
    }
    let scale_h = 1.0 + op_norm(h);
    if herm_residual(h) > tol.psd_tol * scale_h {
        return Err(Error::NonHermitian(herm_residual(h)));
    }
    let [h11, h12, _, h22] = split_blocks(h, split, split);
    if split == 0 {
        return Ok(SchurComplement { complement: h22, s: zeros(0, n), range_ok: true });
    }
    let lo = min_eig(&h11);
    if lo < -tol.psd_tol * scale_h {
        return Err(Error::H11NotPsd);
    }
    if lo > FAST_PATH_EIG {
        if let Some(ch) = h11.clone().cholesky() {
            let s = ch.l().solve_lower_triangular(&h12).expect("Cholesky factor is nonsingular");
            let complement = &h22 - s.adjoint() * &s;
            return Ok(SchurComplement { complement, s, range_ok: true });
        }
    }
    let root = psd_sqrt_clipped(&h11);
    let s = pinv(&root, tol) * &h12;
    let range_ok = op_norm(&(&root * &s - &h12)) <= RANGE_TOL * (1.0 + op_norm(&h12));
    let complement = &h22 - s.adjoint() * &s;
    Ok(SchurComplement { complement, s, range_ok })
}

/// Swap the block order so the trailing block leads.
fn swap_blocks(h: &CMatrix, split: usize) -> CMatrix {
    let [a, b, cc, d] = split_blocks(h, split, split);
    block2x2(&d, &cc, &b, &a)
}

/// Complement with respect to the trailing block instead of the leading one.
pub fn generalized_schur_trailing(h: &CMatrix, split: usize, tol: &Tolerances) -> Result<SchurComplement> {
    generalized_schur(&swap_blocks(h, split), h.nrows() - split, tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thm43Residuals {
    pub g_plus: f64,
    pub g_minus: f64,
    pub s_plus: f64,
    pub s_minus: f64,
}

impl Thm43Residuals {
    pub fn max(&self) -> f64 {
        self.g_plus.max(self.g_minus).max(self.s_plus).max(self.s_minus)
    }
}

fn require_phi(pair: &DualPair, phi: Angle, tol: &Tolerances) -> Result<CMatrix> {
    let ca = critical_angle(pair, tol)?;
    if !ca.consistent {
        return Err(Error::InconsistentQ);
    }
    if phi.radians() == 0.0 {
        return Err(Error::InvalidAngle(0.0));
    }
    if let crate::completion::Phi1::Angle(p1) = ca.phi1 {
        if !ca.phi1.admits(phi) {
            return Err(Error::BelowCriticalAngle { phi: phi.radians(), phi1: p1 });
        }
    }
    Ok(ca.q)
}

/// Closed-form corners `D_U (I - K±*K±) D_U` and `D_{V*} (I - K±K±*) D_{V*}`
/// in the order `[G+, G-, S+, S-]`, each still to be divided by `sin²φ`.
fn corner_forms(pair: &DualPair, q: &CMatrix, k: &CMatrix, phi: Angle, tol: &Tolerances) -> [CMatrix; 4] {
    let n2 = pair.d_u.nrows();
    let n2p = pair.d_v_adj.nrows();
    let g = |plus: bool| {
        let kk = shifted_parameter(pair, q, k, phi, plus, tol);
        &pair.d_u * (eye(n2) - kk.adjoint() * &kk) * &pair.d_u
    };
    let s = |plus: bool| {
        let kk = shifted_parameter(pair, q, k, phi, plus, tol);
        &pair.d_v_adj * (eye(n2p) - &kk * kk.adjoint()) * &pair.d_v_adj
    };
    [g(true), g(false), s(true), s(false)]
}

/// Residuals of `sin²φ Schur(G±) = D_U (I - K±*K±) D_U` and
/// `sin²φ Schur(S±) = D_{V*} (I - K±K±*) D_{V*}`.
pub fn thm43_residuals(pair: &DualPair, k: &CMatrix, phi: Angle, tol: &Tolerances) -> Result<Thm43Residuals> {
    let q = require_phi(pair, phi, tol)?;
    let t = complete(pair, k)?;
    let n1 = pair.t11.nrows();
    let quad = defect_quad(&t, n1, phi)?;
    let s2 = phi.sin().powi(2);
    let rhs = corner_forms(pair, &q, k, phi, tol);
    let lhs = [&quad.g_plus, &quad.g_minus, &quad.s_plus, &quad.s_minus];
    let mut out = [0.0; 4];
    for i in 0..4 {
        let comp = generalized_schur(lhs[i], n1, tol)?.complement;
        out[i] = op_norm(&(scale(&comp, s2) - &rhs[i]));
    }
    Ok(Thm43Residuals { g_plus: out[0], g_minus: out[1], s_plus: out[2], s_minus: out[3] })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct KappaClass {
    /// `(κ of I - T+*T+, κ of I - T-*T-)` with `T± = T_K sinφ ± i cosφ`.
    pub kappa_t: (usize, usize),
    /// `(κ of I - K+*K+, κ of I - K-*K-)` with `K± = K sinφ ± iQ cosφ`.
    pub kappa_k: (usize, usize),
    pub agree: bool,
}

pub fn kappa_classify(pair: &DualPair, k: &CMatrix, phi: Angle, tol: &Tolerances) -> Result<KappaClass> {
    let q = require_phi(pair, phi, tol)?;
    let t = complete(pair, k)?;
    let kappa_t = (kappa_of(&shift(&t, phi, true), tol), kappa_of(&shift(&t, phi, false), tol));
    let kappa_k = (
        kappa_of(&shifted_parameter(pair, &q, k, phi, true, tol), tol),
        kappa_of(&shifted_parameter(pair, &q, k, phi, false, tol), tol),
    );
    Ok(KappaClass { kappa_t, kappa_k, agree: kappa_t == kappa_k })
}

/// `A_N = [[0, 0], [0, A22 - S*S]]`, the largest PSD operator below `A`
/// supported on the trailing block.
pub fn shorted(a: &CMatrix, split: usize, tol: &Tolerances) -> Result<CMatrix> {
    let n = a.nrows();
    if a.ncols() != n || split > n {
        return Err(Error::DimensionMismatch(format!("square matrix with split ≤ {n} expected")));
    }
    let scale_a = 1.0 + op_norm(a);
    let lo = min_eig(&crate::matcore::re_part(a));
    if herm_residual(a) > tol.psd_tol * scale_a {
        return Err(Error::NonHermitian(herm_residual(a)));
    }
    if lo < -tol.psd_tol * scale_a {
        return Err(Error::NotPsd(lo));
    }
    let sc = generalized_schur(a, split, tol)?;
    let m = n - split;
    Ok(block2x2(&zeros(split, split), &zeros(split, m), &zeros(m, split), &sc.complement))
}

/// `inf_{g ∈ H1} (A(f - g), f - g)` by exact least squares, checked against
/// `probes` random corrections `g` drawn from `seed`.
pub fn shorted_variational(a: &CMatrix, split: usize, f: &CMatrix, probes: usize, seed: u64, tol: &Tolerances) -> Result<f64> {
    let n = a.nrows();
    if a.ncols() != n || split > n || f.shape() != (n, 1) {
        return Err(Error::DimensionMismatch("A must be square and f a column of matching length".into()));
    }
    let scale_a = 1.0 + op_norm(a);
    if min_eig(&crate::matcore::re_part(a)) < -tol.psd_tol * scale_a {
        return Err(Error::NotPsd(min_eig(a)));
    }
    let af = a * f;
    let b = af.rows(0, split).into_owned();
    let a11 = a.view((0, 0), (split, split)).into_owned();
    let x = pinv(&a11, tol) * &b;
    let g = crate::matcore::vstack(&x, &zeros(n - split, 1));
    let value = energy(a, &(f - &g));
    let mut r = rng(seed);
    for _ in 0..probes {
        let gx = crate::matcore::vstack(&(&x + gaussian(&mut r, split, 1)), &zeros(n - split, 1));
        let probe = energy(a, &(f - gx));
        if probe < value - 1e-9 * scale_a * (1.0 + op_norm(f).powi(2)) {
            return Ok(probe);
        }
    }
    Ok(value)
}

fn energy(a: &CMatrix, h: &CMatrix) -> f64 {
    (h.adjoint() * a * h)[(0, 0)].re
}

#[derive(Debug, Clone)]
pub struct ShortedDefects {
    /// Closed forms, in the order `[G+, G-, S+, S-]`.
    pub closed: [CMatrix; 4],
    /// `max ‖closed - shorted(component)‖`.
    pub residual: f64,
}

pub fn shorted_defects(pair: &DualPair, k: &CMatrix, phi: Angle, tol: &Tolerances) -> Result<ShortedDefects> {
    let q = require_phi(pair, phi, tol)?;
    let t = complete(pair, k)?;
    if !in_cphi(&t, phi, tol)?.in_class {
        return Err(Error::NotInClass);
    }
    let n1 = pair.t11.nrows();
    let n2 = pair.d_u.nrows();
    let quad = defect_quad(&t, n1, phi)?;
    let s2 = phi.sin().powi(2);
    let corners = corner_forms(pair, &q, k, phi, tol);
    let embed = |m: &CMatrix| block2x2(&zeros(n1, n1), &zeros(n1, n2), &zeros(n2, n1), &scale(m, 1.0 / s2));
    let closed = [embed(&corners[0]), embed(&corners[1]), embed(&corners[2]), embed(&corners[3])];
    let comps = [&quad.g_plus, &quad.g_minus, &quad.s_plus, &quad.s_minus];
    let mut residual: f64 = 0.0;
    for i in 0..4 {
        // Rounding can push a PSD matrix of the class a hair below zero.
        let h = crate::matcore::re_part(comps[i]);
        let sh = shorted(&h, n1, &Tolerances { psd_tol: tol.psd_tol.max(1e-8), ..*tol })?;
        residual = residual.max(op_norm(&(sh - &closed[i])));
    }
    Ok(ShortedDefects { closed, residual })
}

/// `κ₋(T) = κ₋(T22 - S*S)` on an instance with `T11 ⪰ 0`.
pub fn lemma25_verify(t: &CMatrix, split: usize, tol: &Tolerances) -> Result<bool> {
    let sc = generalized_schur(t, split, tol)?;
    if !sc.range_ok {
        return Err(Error::RangeViolation);
    }
    Ok(inertia(t, tol)?.n_neg == inertia(&sc.complement, tol)?.n_neg)
}

/// Block LDU residual `‖H - L diag(H11, H22 - H21 H11⁻¹ H12) L*‖` for a
/// nonsingular `H11`, with `L = [[I, 0], [H21 H11⁻¹, I]]`.
pub fn ldu_residual(h: &CMatrix, split: usize) -> Option<f64> {
    let n = h.nrows();
    let [h11, h12, h21, h22] = split_blocks(h, split, split);
    let inv = h11.clone().try_inverse()?;
    let m = n - split;
    let l = block2x2(&eye(split), &zeros(split, m), &(&h21 * &inv), &eye(m));
    let d = block2x2(&h11, &zeros(split, m), &zeros(m, split), &(&h22 - &h21 * &inv * &h12));
    Some(op_norm(&(h - &l * d * l.adjoint())))
}

/// Eigenvalues of a Hermitian matrix, ascending; used by the oracles to keep
/// instances away from zero.
pub fn herm_spectrum(h: &CMatrix) -> Vec<f64> {
    let mut v = herm_eig_unchecked(h).values;
    v.reverse();
    v
}
