//! Extreme points: of the unit ball, of the loone
//! `L(Q;φ) = {K : K sinφ ± iQ cosφ contractive}`, of C(φ), and of the
//! sectorial completion set of a symmetric pair.
//!
//! Only sufficient conditions are known, so verdicts are three-valued. A
//! certificate is the Hermitian contraction `C` with
//! `sin2φ (K*Q)_I = D_{K,Q} C D_{K,Q}`, `D²_{K,Q} = I - K*K sin²φ - Q*Q cos²φ`;
//! `σ(C) ⊂ {±1}` on `ran D_{K,Q}` certifies extremality.

use serde::{Deserialize, Serialize};

use crate::completion::{critical_angle, sectorial_complete, DualPair};
use crate::error::{Error, Result};
use crate::matcore::{
    c, compress, consistent_sandwich, eigenvalues, eye, herm_eig_unchecked, im_part, is_maximal_partial_isometry,
    op_norm, psd_sqrt_clipped, range_basis, range_projector, scale, zeros, CMatrix, Tolerances, C64,
};
use crate::random::{gaussian, rng, TestRng};
use crate::sector::{in_cphi, region_classify, Angle, Region};

/// Tolerance on `|λ ∓ 1|` for the spectrum of a certificate.
pub const SPECTRUM_TOL: f64 = 1e-7;
/// Slack for the loone membership precondition.
pub const LOONE_TOL: f64 = 1e-8;
/// Witnesses must keep both perturbations inside with at most this slack.
const WITNESS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ExtremeCertified,
    NotExtreme,
    Undecided,
}

#[derive(Debug, Clone)]
pub struct ExtremeCertificate {
    pub c_matrix: CMatrix,
    pub d_kq: CMatrix,
    pub consistent: bool,
    pub spectrum_pm1: bool,
    /// `‖D_{K,Q} C D_{K,Q} - sin2φ (K*Q)_I‖`.
    pub residual: f64,
    pub verdict: Verdict,
}

pub fn extreme_unit_ball(t: &CMatrix, tol: &Tolerances) -> Result<bool> {
    if op_norm(t) > 1.0 + tol.norm_slack {
        return Err(Error::NotContraction(op_norm(t)));
    }
    Ok(is_maximal_partial_isometry(t, 1e-8))
}

/// `K sinφ ± i Q cosφ`.
pub fn loone_shift(k: &CMatrix, q: &CMatrix, phi: Angle, plus: bool) -> CMatrix {
    let sign = if plus { 1.0 } else { -1.0 };
    scale(k, phi.sin()) + q * c(0.0, sign * phi.cos())
}

fn loone_excess(k: &CMatrix, q: &CMatrix, phi: Angle) -> f64 {
    op_norm(&loone_shift(k, q, phi, true)).max(op_norm(&loone_shift(k, q, phi, false))) - 1.0
}

pub fn loone_certificate(k: &CMatrix, q: &CMatrix, phi: Angle, tol: &Tolerances) -> Result<ExtremeCertificate> {
    if k.shape() != q.shape() {
        return Err(Error::DimensionMismatch(format!("K is {:?} but Q is {:?}", k.shape(), q.shape())));
    }
    if loone_excess(k, q, phi) > LOONE_TOL {
        return Err(Error::NotInLoone);
    }
    let (s, co) = (phi.sin(), phi.cos());
    let n = k.ncols();
    let d2 = eye(n) - scale(&(k.adjoint() * k), s * s) - scale(&(q.adjoint() * q), co * co);
    let d_kq = psd_sqrt_clipped(&d2);
    let target = scale(&im_part(&(k.adjoint() * q)), (2.0 * phi.radians()).sin());
    let sw = consistent_sandwich(&d_kq, &target, &d_kq, tol);
    let basis = range_basis(&d_kq, tol);
    let reduced = compress(&sw.x, &basis, &basis);
    let spectrum_pm1 = herm_eig_unchecked(&reduced).values.iter().all(|l| (l.abs() - 1.0).abs() <= SPECTRUM_TOL);
    let verdict = if sw.consistent && spectrum_pm1 { Verdict::ExtremeCertified } else { Verdict::Undecided };
    Ok(ExtremeCertificate { c_matrix: sw.x, d_kq, consistent: sw.consistent, spectrum_pm1, residual: sw.residual, verdict })
}

/// Projector onto `ran A ∩ ran B`.
fn range_intersection(a: &CMatrix, b: &CMatrix, tol: &Tolerances) -> CMatrix {
    let n = a.nrows();
    let m = (eye(n) - range_projector(a, tol)) + (eye(n) - range_projector(b, tol));
    let eig = herm_eig_unchecked(&m);
    let mut p = zeros(n, n);
    for (j, &v) in eig.values.iter().enumerate() {
        if v < 1e-8 {
            let col = eig.vectors.column(j);
            p += col * col.adjoint();
        }
    }
    p
}

fn strictly_in_loone(k: &CMatrix, q: &CMatrix, phi: Angle) -> bool {
    loone_excess(k, q, phi) <= WITNESS_SLACK
}

/// Searches for `E ≠ 0` with `K ± E` both in `L(Q;φ)`, which proves `K` is not
/// extreme. Candidates are supported on the common defect ranges of `K±`
/// (where a small move cannot raise either norm to first order) plus plain
/// Gaussian directions.
pub fn loone_interior_witness(k: &CMatrix, q: &CMatrix, phi: Angle, seed: u64, tol: &Tolerances) -> Option<CMatrix> {
    let (r, cols) = k.shape();
    if r == 0 || cols == 0 {
        return None;
    }
    let kp = loone_shift(k, q, phi, true);
    let km = loone_shift(k, q, phi, false);
    let defect = |x: &CMatrix| psd_sqrt_clipped(&(eye(x.ncols()) - x.adjoint() * x));
    let defect_adj = |x: &CMatrix| psd_sqrt_clipped(&(eye(x.nrows()) - x * x.adjoint()));
    let pl = range_intersection(&defect_adj(&kp), &defect_adj(&km), tol);
    let pr = range_intersection(&defect(&kp), &defect(&km), tol);
    let mut g: TestRng = rng(seed);
    for attempt in 0..60 {
        let raw = gaussian(&mut g, r, cols);
        let dir = if attempt % 3 == 2 { raw } else { &pl * raw * &pr };
        let nrm = op_norm(&dir);
        if nrm <= 1e-12 {
            continue;
        }
        for eps in [1e-1, 1e-2, 1e-3] {
            let e = scale(&dir, eps / nrm);
            if strictly_in_loone(&(k + &e), q, phi) && strictly_in_loone(&(k - &e), q, phi) {
                return Some(e);
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PerturbationProbe {
    pub heuristic: bool,
    pub directions: usize,
    /// Directions along which both `K ± εE` stay in the loone.
    pub both_inside: usize,
}

/// Necessary-condition probe: an extreme `K` admits no direction with both
/// `K ± εE` inside. Never used to certify.
pub fn perturbation_probe(k: &CMatrix, q: &CMatrix, phi: Angle, eps: f64, directions: usize, rng: &mut TestRng) -> PerturbationProbe {
    let (r, cols) = k.shape();
    let mut both = 0;
    for _ in 0..directions {
        let dir = gaussian(rng, r, cols);
        let e = scale(&dir, eps / op_norm(&dir).max(1e-300));
        if strictly_in_loone(&(k + &e), q, phi) && strictly_in_loone(&(k - &e), q, phi) {
            both += 1;
        }
    }
    PerturbationProbe { heuristic: true, directions, both_inside: both }
}

#[derive(Debug, Clone)]
pub struct CphiExtremeReport {
    pub certificate: ExtremeCertificate,
    /// `‖D_{K,I} - sinφ D_K‖`.
    pub d_ki_residual: f64,
    pub normality_residual: f64,
    pub normal: bool,
    pub eigenvalues: Vec<C64>,
    pub regions: Vec<Region>,
    pub normal_boundary_extreme: bool,
    /// False only if all eigenvalues sit on the lens boundary, `K` is
    /// diagonalizable and yet not normal.
    pub boundary_pp_implies_normal: bool,
    pub verdict: Verdict,
}

fn diagonalizable_hint(eigs: &[C64], normal: bool) -> bool {
    if normal {
        return true;
    }
    eigs.iter().enumerate().all(|(i, a)| eigs[i + 1..].iter().all(|b| (a - b).norm() > 1e-6))
}

pub fn cphi_extreme_tests(k: &CMatrix, phi: Angle, tol: &Tolerances) -> Result<CphiExtremeReport> {
    let report = in_cphi(k, phi, tol)?;
    if !report.in_class {
        return Err(Error::NotInCphi);
    }
    let n = k.nrows();
    let certificate = loone_certificate(k, &eye(n), phi, tol)?;
    let d_k = psd_sqrt_clipped(&(eye(n) - k.adjoint() * k));
    let d_ki_residual = op_norm(&(&certificate.d_kq - scale(&d_k, phi.sin())));
    let normality_residual = op_norm(&(k * k.adjoint() - k.adjoint() * k));
    let normal = normality_residual <= 1e-8 * (1.0 + op_norm(k).powi(2));
    let eigs = eigenvalues(k);
    let mut regions = Vec::with_capacity(n);
    for z in &eigs {
        regions.push(if phi.radians() == 0.0 { Region::Interior } else { region_classify(*z, phi)? });
    }
    let all_boundary = n > 0 && regions.iter().all(|r| r.on_boundary());
    let normal_boundary_extreme = normal && all_boundary;
    let boundary_pp_implies_normal = !(all_boundary && diagonalizable_hint(&eigs, normal)) || normal;
    let verdict = if certificate.verdict == Verdict::ExtremeCertified || normal_boundary_extreme {
        Verdict::ExtremeCertified
    } else if loone_interior_witness(k, &eye(n), phi, 0, tol).is_some() {
        Verdict::NotExtreme
    } else {
        Verdict::Undecided
    };
    Ok(CphiExtremeReport {
        certificate,
        d_ki_residual,
        normality_residual,
        normal,
        eigenvalues: eigs,
        regions,
        normal_boundary_extreme,
        boundary_pp_implies_normal,
        verdict,
    })
}

#[derive(Debug, Clone)]
pub struct CompletionExtreme {
    /// Certificate for the parameter restricted to `ran D_U → ran D_{V*}`.
    pub certificate: ExtremeCertificate,
    /// `min± ‖D²_{K,Q} ± sin2φ (K*Q)_I‖`, i.e. `min± ‖I - K±*K±‖`.
    pub isometry_residual: f64,
    /// `min± ‖D²_{K*,Q*} ∓ sin2φ (KQ*)_I‖`, i.e. `min± ‖I - K±K±*‖`.
    pub coisometry_residual: f64,
    /// `max± ‖D²_{K±} - D_{K,Q}(I ± C)D_{K,Q}‖` when the certificate is consistent.
    pub factored_residual: f64,
    pub verdict: Verdict,
}

pub fn completion_extreme(pair: &DualPair, phi: Angle, k: &CMatrix, tol: &Tolerances) -> Result<CompletionExtreme> {
    let sc = sectorial_complete(pair, phi, k, crate::balls::MEMBER_TOL, tol)?;
    if !sc.in_class {
        return Err(Error::NotInClass);
    }
    let ca = critical_angle(pair, tol)?;
    let bl = range_basis(&pair.d_v_adj, tol);
    let br = range_basis(&pair.d_u, tol);
    let kr = compress(k, &bl, &br);
    let qr = compress(&ca.q, &bl, &br);
    let certificate = loone_certificate(&kr, &qr, phi, tol)?;
    let (n_l, n_r) = kr.shape();
    let sin2 = (2.0 * phi.radians()).sin();
    let d2 = &certificate.d_kq * &certificate.d_kq;
    let d2_adj = eye(n_l) - scale(&(&kr * kr.adjoint()), phi.sin().powi(2)) - scale(&(&qr * qr.adjoint()), phi.cos().powi(2));
    let ti = scale(&im_part(&(kr.adjoint() * &qr)), sin2);
    let ti_adj = scale(&im_part(&(&kr * qr.adjoint())), sin2);
    let (iso, coiso) = if n_l == 0 || n_r == 0 {
        (0.0, 0.0)
    } else {
        (
            op_norm(&(&d2 + &ti)).min(op_norm(&(&d2 - &ti))),
            op_norm(&(&d2_adj - &ti_adj)).min(op_norm(&(&d2_adj + &ti_adj))),
        )
    };
    let mut factored: f64 = 0.0;
    if certificate.consistent {
        for sign in [1.0, -1.0] {
            let kpm = loone_shift(&kr, &qr, phi, sign > 0.0);
            let lhs = eye(n_r) - kpm.adjoint() * &kpm;
            let rhs = &certificate.d_kq * (eye(n_r) + scale(&certificate.c_matrix, sign)) * &certificate.d_kq;
            factored = factored.max(op_norm(&(lhs - rhs)));
        }
    }
    let verdict = if certificate.verdict == Verdict::ExtremeCertified || iso <= 1e-8 || coiso <= 1e-8 {
        Verdict::ExtremeCertified
    } else if loone_interior_witness(&kr, &qr, phi, 0, tol).is_some() {
        Verdict::NotExtreme
    } else {
        Verdict::Undecided
    };
    Ok(CompletionExtreme { certificate, isometry_residual: iso, coisometry_residual: coiso, factored_residual: factored, verdict })
}

/// `K(θ) = e^{iθ} [[0, sinφ], [0, 0]]`, a nonnormal extreme point of C(φ)
/// with spectrum `{0}`.
pub fn k_theta(theta: f64, phi: Angle) -> CMatrix {
    let mut k = zeros(2, 2);
    k[(0, 1)] = C64::from_polar(phi.sin(), theta);
    k
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::completion::dual_pair_make;
    use crate::matcore::{from_real_rows, real_diag, scalar};
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn unit_ball_examples() {
        let u = crate::random::unitary(&mut rng(1), 2);
        assert!(extreme_unit_ball(&u, &tol()).unwrap());
        assert!(!extreme_unit_ball(&real_diag(&[1.0, 0.0]), &tol()).unwrap());
        assert!(extreme_unit_ball(&from_real_rows(1, 2, &[1.0, 0.0]), &tol()).unwrap());
        assert!(extreme_unit_ball(&real_diag(&[2.0]), &tol()).is_err());
    }

    #[test]
    fn k_theta_certificate() {
        let phi = Angle::new(FRAC_PI_3).unwrap();
        let theta = 0.7;
        let cert = loone_certificate(&k_theta(theta, phi), &eye(2), phi, &tol()).unwrap();
        assert_eq!(cert.verdict, Verdict::ExtremeCertified);
        // Computed certificate: i[[0, e^{iθ}], [-e^{-iθ}, 0]].
        let e = C64::from_polar(1.0, theta);
        let mut expect = zeros(2, 2);
        expect[(0, 1)] = c(0.0, 1.0) * e;
        expect[(1, 0)] = -c(0.0, 1.0) * e.conj();
        assert!(op_norm(&(&cert.c_matrix - expect)) < 1e-12);
        let d = real_diag(&[phi.sin(), phi.sin() * phi.cos()]);
        assert!(op_norm(&(&cert.d_kq - d)) < 1e-12);
    }

    #[test]
    fn loone_examples() {
        let phi = Angle::new(FRAC_PI_4).unwrap();
        let cert = loone_certificate(&zeros(2, 2), &zeros(2, 2), phi, &tol()).unwrap();
        assert_eq!(cert.verdict, Verdict::Undecided);
        let k = from_real_rows(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let cert = loone_certificate(&k, &eye(2), Angle::new(1.0).unwrap(), &tol()).unwrap();
        assert_eq!(cert.verdict, Verdict::ExtremeCertified);
        assert_eq!(loone_certificate(&scalar(c(2.0, 0.0)), &eye(1), phi, &tol()).unwrap_err(), Error::NotInLoone);
    }

    #[test]
    fn cphi_examples() {
        let phi = Angle::new(FRAC_PI_6).unwrap();
        let r = cphi_extreme_tests(&real_diag(&[1.0, -1.0]), phi, &tol()).unwrap();
        assert!(r.normal && r.normal_boundary_extreme);
        assert_eq!(r.verdict, Verdict::ExtremeCertified);
        // λ on the upper arc |λ sinφ + i cosφ| = 1.
        let lam = crate::sector::lens_boundary_point(phi, 0.3, true);
        let mut k = zeros(1, 1);
        k[(0, 0)] = lam;
        let r = cphi_extreme_tests(&k, phi, &tol()).unwrap();
        assert!(r.normal_boundary_extreme);
        let r = cphi_extreme_tests(&k_theta(1.1, phi), phi, &tol()).unwrap();
        assert!(!r.normal && r.regions.iter().all(|g| *g == Region::Interior));
        assert_eq!(r.verdict, Verdict::ExtremeCertified);
        assert!(r.d_ki_residual < 1e-12);
        let r = cphi_extreme_tests(&real_diag(&[0.2, -0.1]), phi, &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::NotExtreme);
        assert!(cphi_extreme_tests(&scalar(c(0.0, 1.0)), phi, &tol()).is_err());
    }

    #[test]
    fn completion_examples() {
        let p = dual_pair_make(&scalar(c(0.0, 0.0)), &scalar(c(0.6, 0.0)), &scalar(c(0.6, 0.0)), &tol()).unwrap();
        let phi = Angle::new(1.0).unwrap();
        let r = completion_extreme(&p, phi, &scalar(c(1.0, 0.0)), &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::ExtremeCertified);
        let r = completion_extreme(&p, phi, &scalar(c(0.0, 0.0)), &tol()).unwrap();
        assert_eq!(r.verdict, Verdict::NotExtreme);
    }

    #[test]
    fn probe_never_moves_k_theta() {
        let phi = Angle::new(FRAC_PI_4).unwrap();
        let mut g = rng(9);
        let p = perturbation_probe(&k_theta(0.2, phi), &eye(2), phi, 1e-3, 50, &mut g);
        assert_eq!(p.both_inside, 0);
    }
}
