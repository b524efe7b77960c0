//! Upper triangular completions `[[T11, ?], [0, T22]]`.
//!
//! The contractive ones are `T12 = D_{T11*} K D_{T22}` with `‖K‖ ≤ 1`. When
//! both diagonal blocks lie in C(φ), write `2cotφ Im T11 = D_{T11*} U_φ D_{T11*}`
//! and `2cotφ Im T22 = D_{T22} V_φ D_{T22}`; the C(φ) completions are
//! `T12 = sinφ D_{T11*} K D_{T22}` with
//! `(I ∓ U_φ)^{-1/2} K (I ∓ V_φ)^{-1/2}` contractive for both signs.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{
    block2x2, consistent_sandwich, eye, im_part, op_norm, psd_sqrt_clipped, range_projector, scale, split_blocks,
    zeros, CMatrix, Tolerances,
};
use crate::schur::{generalized_schur, generalized_schur_trailing};
use crate::sector::{in_cphi, kappa_of, Angle, ClassReport};

#[derive(Debug, Clone)]
pub struct TriPair {
    pub t11: CMatrix,
    pub t22: CMatrix,
    pub phi: Option<Angle>,
    /// `D_{T11*}`.
    pub d_t11_adj: CMatrix,
    /// `D_{T22}`.
    pub d_t22: CMatrix,
}

impl TriPair {
    pub fn new(t11: &CMatrix, t22: &CMatrix, phi: Option<Angle>, tol: &Tolerances) -> Result<TriPair> {
        for t in [t11, t22] {
            let n = op_norm(t);
            if n > 1.0 + tol.norm_slack {
                return Err(Error::NotContraction(n));
            }
        }
        if let Some(phi) = phi {
            for t in [t11, t22] {
                if t.nrows() != t.ncols() || !in_cphi(t, phi, tol)?.in_class {
                    return Err(Error::NotInCphi);
                }
            }
        }
        Ok(TriPair {
            t11: t11.clone(),
            t22: t22.clone(),
            phi,
            d_t11_adj: psd_sqrt_clipped(&(eye(t11.nrows()) - t11 * t11.adjoint())),
            d_t22: psd_sqrt_clipped(&(eye(t22.ncols()) - t22.adjoint() * t22)),
        })
    }

    /// Shape of the corner parameter `K`.
    pub fn k_shape(&self) -> (usize, usize) {
        (self.t11.nrows(), self.t22.ncols())
    }

    pub fn assemble(&self, t12: &CMatrix) -> CMatrix {
        block2x2(&self.t11, t12, &zeros(self.t22.nrows(), self.t11.ncols()), &self.t22)
    }

    /// `P_{ran D_{T11*}} K P_{ran D_{T22}}`.
    pub fn compress_k(&self, k: &CMatrix, tol: &Tolerances) -> CMatrix {
        range_projector(&self.d_t11_adj, tol) * k * range_projector(&self.d_t22, tol)
    }

    /// `K` with `D_{T11*} K D_{T22} = t12 / scale`, and whether it exists.
    pub fn recover_k(&self, t12: &CMatrix, scale_by: f64, tol: &Tolerances) -> (CMatrix, bool) {
        let s = consistent_sandwich(&self.d_t11_adj, &scale(t12, 1.0 / scale_by), &self.d_t22, tol);
        (s.x, s.consistent)
    }
}

fn check_k(tp: &TriPair, k: &CMatrix) -> Result<()> {
    if k.shape() != tp.k_shape() {
        return Err(Error::DimensionMismatch(format!("K must be {:?}, got {:?}", tp.k_shape(), k.shape())));
    }
    Ok(())
}

pub fn tri_complete(tp: &TriPair, k: &CMatrix) -> Result<CMatrix> {
    check_k(tp, k)?;
    Ok(tp.assemble(&(&tp.d_t11_adj * k * &tp.d_t22)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TriResiduals {
    /// `‖Schur(I - T*T) - D_{T22}(I - K*K)D_{T22}‖`, leading-block complement.
    pub g: f64,
    /// `‖Schur(I - TT*) - D_{T11*}(I - KK*)D_{T11*}‖`, trailing-block complement.
    pub s: f64,
}

/// Both identities hold for `K` compressed to the defect ranges, which is the
/// only part of `K` that reaches `T12`.
pub fn tri_identities(tp: &TriPair, k: &CMatrix, tol: &Tolerances) -> Result<TriResiduals> {
    let t = tri_complete(tp, k)?;
    let kc = tp.compress_k(k, tol);
    let (m1, n1) = tp.t11.shape();
    let g = eye(t.ncols()) - t.adjoint() * &t;
    let s = eye(t.nrows()) - &t * t.adjoint();
    let g_comp = generalized_schur(&g, n1, tol)?.complement;
    let s_comp = generalized_schur_trailing(&s, m1, tol)?.complement;
    let g_rhs = &tp.d_t22 * (eye(kc.ncols()) - kc.adjoint() * &kc) * &tp.d_t22;
    let s_rhs = &tp.d_t11_adj * (eye(kc.nrows()) - &kc * kc.adjoint()) * &tp.d_t11_adj;
    Ok(TriResiduals { g: op_norm(&(g_comp - g_rhs)), s: op_norm(&(s_comp - s_rhs)) })
}

/// `(κ of I - T_K*T_K, κ of I - K*K)` with `K` compressed to the defect ranges.
pub fn tri_kappa(tp: &TriPair, k: &CMatrix, tol: &Tolerances) -> Result<(usize, usize)> {
    let t = tri_complete(tp, k)?;
    Ok((kappa_of(&t, tol), kappa_of(&tp.compress_k(k, tol), tol)))
}

#[derive(Debug, Clone)]
pub struct ShmulyanFactors {
    pub u_phi: CMatrix,
    pub v_phi: CMatrix,
    pub consistent: bool,
}

fn require_phi(tp: &TriPair) -> Result<Angle> {
    tp.phi.ok_or(Error::NotInCphi)
}

pub fn shmulyan_factors(tp: &TriPair, tol: &Tolerances) -> Result<ShmulyanFactors> {
    let phi = require_phi(tp)?;
    if phi.radians() == 0.0 {
        return Err(Error::InvalidAngle(0.0));
    }
    let cot2 = 2.0 * phi.cot();
    let u = consistent_sandwich(&tp.d_t11_adj, &scale(&im_part(&tp.t11), cot2), &tp.d_t11_adj, tol);
    let v = consistent_sandwich(&tp.d_t22, &scale(&im_part(&tp.t22), cot2), &tp.d_t22, tol);
    let bounded = op_norm(&u.x) <= 1.0 + 1e-8 && op_norm(&v.x) <= 1.0 + 1e-8;
    Ok(ShmulyanFactors {
        u_phi: crate::matcore::re_part(&u.x),
        v_phi: crate::matcore::re_part(&v.x),
        consistent: u.consistent && v.consistent && bounded,
    })
}

#[derive(Debug, Clone)]
pub struct ShmulyanCompletion {
    pub t: CMatrix,
    /// Verdict of the factor test on `K`.
    pub in_class: bool,
    /// Direct test of `T` against C(φ).
    pub direct: ClassReport,
}

/// `(I ∓ U_φ)^{+1/2} X (I ∓ V_φ)^{+1/2} = K` solvable with `‖X‖ ≤ 1`, for the
/// sign attached to `T sinφ ± i cosφ`.
pub fn shmulyan_condition(f: &ShmulyanFactors, kc: &CMatrix, plus: bool, member_tol: f64, tol: &Tolerances) -> bool {
    let sign = if plus { -1.0 } else { 1.0 };
    let l = psd_sqrt_clipped(&(eye(f.u_phi.nrows()) + scale(&f.u_phi, sign)));
    let r = psd_sqrt_clipped(&(eye(f.v_phi.nrows()) + scale(&f.v_phi, sign)));
    let s = consistent_sandwich(&l, kc, &r, tol);
    s.consistent && op_norm(&s.x) <= 1.0 + member_tol
}

pub fn shmulyan_complete(tp: &TriPair, k: &CMatrix, member_tol: f64, tol: &Tolerances) -> Result<ShmulyanCompletion> {
    let phi = require_phi(tp)?;
    check_k(tp, k)?;
    let f = shmulyan_factors(tp, tol)?;
    if !f.consistent {
        return Err(Error::FactorsInconsistent);
    }
    let t = tp.assemble(&scale(&(&tp.d_t11_adj * k * &tp.d_t22), phi.sin()));
    let kc = tp.compress_k(k, tol);
    let in_class = shmulyan_condition(&f, &kc, true, member_tol, tol) && shmulyan_condition(&f, &kc, false, member_tol, tol);
    let direct = in_cphi(&t, phi, tol)?;
    Ok(ShmulyanCompletion { t, in_class, direct })
}

/// Largest residual of the left and right radius identities
/// `D²_{T11±*} = sin²φ D²_{T11*} ∓ sin2φ Im T11 = sin²φ D_{T11*}(I ∓ U_φ)D_{T11*}`
/// and `D²_{T22±} = sin²φ D²_{T22} ∓ sin2φ Im T22 = sin²φ D_{T22}(I ∓ V_φ)D_{T22}`,
/// where `T±` is `T sinφ ± i cosφ`.
pub fn radius_identity_residual(tp: &TriPair, tol: &Tolerances) -> Result<f64> {
    let phi = require_phi(tp)?;
    let f = shmulyan_factors(tp, tol)?;
    let (s, co) = (phi.sin(), phi.cos());
    let sin2 = 2.0 * s * co;
    let mut worst: f64 = 0.0;
    for sign in [1.0, -1.0] {
        let a = crate::sector::shift(&tp.t11, phi, sign > 0.0);
        let lhs = eye(a.nrows()) - &a * a.adjoint();
        let d2 = &tp.d_t11_adj * &tp.d_t11_adj;
        let direct = scale(&d2, s * s) - scale(&im_part(&tp.t11), sign * sin2);
        let factored = scale(&(&tp.d_t11_adj * (eye(a.nrows()) - scale(&f.u_phi, sign)) * &tp.d_t11_adj), s * s);
        worst = worst.max(op_norm(&(&lhs - direct))).max(op_norm(&(&lhs - factored)));
        let b = crate::sector::shift(&tp.t22, phi, sign > 0.0);
        let lhs = eye(b.ncols()) - b.adjoint() * &b;
        let d2 = &tp.d_t22 * &tp.d_t22;
        let direct = scale(&d2, s * s) - scale(&im_part(&tp.t22), sign * sin2);
        let factored = scale(&(&tp.d_t22 * (eye(b.ncols()) - scale(&f.v_phi, sign)) * &tp.d_t22), s * s);
        worst = worst.max(op_norm(&(&lhs - direct))).max(op_norm(&(&lhs - factored)));
    }
    Ok(worst)
}

/// Split an upper triangular completion back into its corner.
pub fn corner_of(tp: &TriPair, t: &CMatrix) -> CMatrix {
    let [_, b, _, _] = split_blocks(t, tp.t11.nrows(), tp.t11.ncols());
    b
}
