//! Completions of a partially known block matrix `[[T11, T12], [T21, ?]]`.
//!
//! A dual pair fixes the first column `T1 = [T11; T21]` and the first row
//! `[T11, T12]`. Writing `T21 = V D_{T11}` and `T12 = D_{T11*} U`, the
//! contractive completions are exactly
//! `T22 = -V T11* U + D_{V*} K D_U` with `‖K‖ ≤ 1`. For a symmetric pair
//! (Hermitian `T11`) the completions in C(φ) form a hole whose shift is
//! `-i cosφ Q` with `Q = D_{V*}⁻¹ (I - VU) D_U⁻¹`; it is nonempty from the
//! critical angle `φ1 = arccos(1/‖Q‖)` on.

use serde::{Deserialize, Serialize};

use crate::balls::{ball_member, hole_make, OperatorBall, OperatorHole, MEMBER_TOL};
use crate::error::{Error, Result};
use crate::matcore::{
    block2x2, c, consistent_sandwich, eye, im_part, is_maximal_partial_isometry, op_norm, pinv, psd_pinv_sqrt,
    psd_sqrt_clipped, range_basis, range_projector, scale, split_blocks, vstack, zeros, CMatrix, Tolerances,
};
use crate::random::{unit_ball, TestRng};
use crate::sector::{in_cphi, Angle, ClassReport};

/// Residual allowed in `T21 = V D_{T11}` and `T12 = D_{T11*} U`.
pub const FACTOR_TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
pub struct DualPair {
    pub t11: CMatrix,
    pub t21: CMatrix,
    pub t12: CMatrix,
    pub v: CMatrix,
    pub u: CMatrix,
    pub d_t11: CMatrix,
    pub d_t11_adj: CMatrix,
    /// `D_{V*}`, acting on the target of `T21`.
    pub d_v_adj: CMatrix,
    /// `D_U`, acting on the source of `T12`.
    pub d_u: CMatrix,
    pub symmetric: bool,
}

impl DualPair {
    /// Shape of the unknown corner `T22`.
    pub fn corner_shape(&self) -> (usize, usize) {
        (self.t21.nrows(), self.t12.ncols())
    }

    /// `-V T11* U`, the center of the contractive completion ball.
    pub fn center(&self) -> CMatrix {
        -(&self.v * self.t11.adjoint() * &self.u)
    }

    /// `P_{ran D_{V*}} K P_{ran D_U}`: the part of `K` that reaches `T22`.
    pub fn compress_k(&self, k: &CMatrix, tol: &Tolerances) -> CMatrix {
        range_projector(&self.d_v_adj, tol) * k * range_projector(&self.d_u, tol)
    }

    pub fn assemble(&self, t22: &CMatrix) -> CMatrix {
        block2x2(&self.t11, &self.t12, &self.t21, t22)
    }

    pub fn is_proper(&self) -> bool {
        self.symmetric && op_norm(&(&self.t12 - self.t21.adjoint())) <= FACTOR_TOL * (1.0 + op_norm(&self.t12))
    }
}

pub fn dual_pair_make(t11: &CMatrix, t21: &CMatrix, t12: &CMatrix, tol: &Tolerances) -> Result<DualPair> {
    if t21.ncols() != t11.ncols() || t12.nrows() != t11.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "t11 is {:?}, t21 must have {} columns and t12 {} rows",
            t11.shape(),
            t11.ncols(),
            t11.nrows()
        )));
    }
    let column = vstack(t11, t21);
    let row = crate::matcore::hstack(t11, t12);
    if op_norm(&column) > 1.0 + tol.norm_slack || op_norm(&row) > 1.0 + tol.norm_slack {
        return Err(Error::NotDualPairContractions);
    }
    let d_t11 = psd_sqrt_clipped(&(eye(t11.ncols()) - t11.adjoint() * t11));
    let d_t11_adj = psd_sqrt_clipped(&(eye(t11.nrows()) - t11 * t11.adjoint()));
    let v = t21 * pinv(&d_t11, tol);
    let u = pinv(&d_t11_adj, tol) * t12;
    let res = op_norm(&(&v * &d_t11 - t21)).max(op_norm(&(&d_t11_adj * &u - t12)));
    if res > FACTOR_TOL {
        return Err(Error::FactorInconsistent(res));
    }
    let vn = op_norm(&v).max(op_norm(&u));
    if vn > 1.0 + 1e-6 {
        return Err(Error::FactorInconsistent(vn - 1.0));
    }
    let d_v_adj = psd_sqrt_clipped(&(eye(v.nrows()) - &v * v.adjoint()));
    let d_u = psd_sqrt_clipped(&(eye(u.ncols()) - u.adjoint() * &u));
    let symmetric = t11.nrows() == t11.ncols()
        && t21.nrows() == t12.ncols()
        && op_norm(&(t11 - t11.adjoint())) <= tol.psd_tol * (1.0 + op_norm(t11));
    Ok(DualPair {
        t11: t11.clone(),
        t21: t21.clone(),
        t12: t12.clone(),
        v,
        u,
        d_t11,
        d_t11_adj,
        d_v_adj,
        d_u,
        symmetric,
    })
}

/// Completion `T_K` with `T22 = -V T11* U + D_{V*} K D_U`.
pub fn complete(pair: &DualPair, k: &CMatrix) -> Result<CMatrix> {
    if k.shape() != pair.corner_shape() {
        return Err(Error::DimensionMismatch(format!("K must be {:?}, got {:?}", pair.corner_shape(), k.shape())));
    }
    let t22 = pair.center() + &pair.d_v_adj * k * &pair.d_u;
    Ok(pair.assemble(&t22))
}

/// Inverse of [`complete`]: the parameter `K` of a given completion.
pub fn recover_k(pair: &DualPair, t: &CMatrix, tol: &Tolerances) -> Result<(CMatrix, bool)> {
    let (n1p, n1) = pair.t11.shape();
    let (n2p, n2) = pair.corner_shape();
    if t.shape() != (n1p + n2p, n1 + n2) {
        return Err(Error::BlockMismatch);
    }
    let [a, b, cc, d] = split_blocks(t, n1p, n1);
    let scale_t = 1.0 + op_norm(t);
    let off = op_norm(&(a - &pair.t11)).max(op_norm(&(b - &pair.t12))).max(op_norm(&(cc - &pair.t21)));
    if off > 1e-8 * scale_t {
        return Err(Error::BlockMismatch);
    }
    let s = consistent_sandwich(&pair.d_v_adj, &(d - pair.center()), &pair.d_u, tol);
    Ok((s.x, s.consistent))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Phi1 {
    Angle(f64),
    #[serde(serialize_with = "pi_over_two_only")]
    PiOverTwoOnly,
}

fn pi_over_two_only<S: serde::Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str("pi/2-only")
}

impl<'de> Deserialize<'de> for Phi1 {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Angle(f64),
            Tag(String),
        }
        match Raw::deserialize(d)? {
            Raw::Angle(p) => Ok(Phi1::Angle(p)),
            Raw::Tag(t) if t == "pi/2-only" => Ok(Phi1::PiOverTwoOnly),
            Raw::Tag(t) => Err(serde::de::Error::custom(format!("expected an angle or \"pi/2-only\", got {t:?}"))),
        }
    }
}

impl Phi1 {
    /// `phi ≥ φ1` up to rounding; an inconsistent `Q` admits only π/2.
    pub fn admits(self, phi: Angle) -> bool {
        match self {
            Phi1::Angle(p1) => phi.radians() >= p1 - 1e-12,
            Phi1::PiOverTwoOnly => phi.is_half_pi(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct CriticalAngle {
    pub phi1: Phi1,
    pub q: CMatrix,
    pub consistent: bool,
}

/// `Q = D_{V*}⁺ (I - VU) D_U⁺` and `φ1 = arccos(min(1, 1/‖Q‖))`.
pub fn critical_angle(pair: &DualPair, tol: &Tolerances) -> Result<CriticalAngle> {
    if !pair.symmetric {
        return Err(Error::NotSymmetricPair);
    }
    let n2 = pair.u.ncols();
    let m = eye(n2) - &pair.v * &pair.u;
    let s = consistent_sandwich(&pair.d_v_adj, &m, &pair.d_u, tol);
    let phi1 = if s.consistent {
        let qn = op_norm(&s.x);
        Phi1::Angle(if qn <= 1.0 + tol.norm_slack { 0.0 } else { (1.0 / qn).acos() })
    } else {
        Phi1::PiOverTwoOnly
    };
    Ok(CriticalAngle { phi1, q: s.x, consistent: s.consistent })
}

fn checked_q(pair: &DualPair, phi: Angle, tol: &Tolerances) -> Result<CriticalAngle> {
    let ca = critical_angle(pair, tol)?;
    if !ca.consistent && !phi.is_half_pi() {
        return Err(Error::InconsistentQ);
    }
    if let Phi1::Angle(p1) = ca.phi1 {
        if !ca.phi1.admits(phi) {
            return Err(Error::BelowCriticalAngle { phi: phi.radians(), phi1: p1 });
        }
    }
    Ok(ca)
}

/// `K sinφ + i Q cosφ` for `plus`, `K sinφ - i Q cosφ` otherwise, with `K`
/// compressed to the defect ranges.
pub fn shifted_parameter(pair: &DualPair, q: &CMatrix, k: &CMatrix, phi: Angle, plus: bool, tol: &Tolerances) -> CMatrix {
    let sign = if plus { 1.0 } else { -1.0 };
    scale(&pair.compress_k(k, tol), phi.sin()) + q * c(0.0, sign * phi.cos())
}

/// The hole of admissible `sinφ T22` around `-sinφ V T11 U`.
#[derive(Debug, Clone)]
pub struct SectorialHole {
    pub phi: Angle,
    pub q: CMatrix,
    pub phi1: Phi1,
    pub hole: OperatorHole,
}

pub fn sectorial_hole(pair: &DualPair, phi: Angle, tol: &Tolerances) -> Result<SectorialHole> {
    let ca = critical_angle(pair, tol)?;
    let (s, co) = (phi.sin(), phi.cos());
    let n2 = pair.u.ncols();
    let shift = eye(pair.t11.nrows()) * c(0.0, co);
    let b_minus = scale(&pair.t11, s) - &shift;
    let b_plus = scale(&pair.t11, s) + &shift;
    let c1 = -(&pair.v * b_minus * &pair.u) - eye(n2) * c(0.0, co);
    let c2 = -(&pair.v * b_plus * &pair.u) + eye(n2) * c(0.0, co);
    let hole = hole_make(&c1, &c2, &pair.d_v_adj, &pair.d_u, tol)?;
    Ok(SectorialHole { phi, q: ca.q, phi1: ca.phi1, hole })
}

#[derive(Debug, Clone)]
pub struct SectorialCompletion {
    pub t: CMatrix,
    /// Verdict of the parameter test `‖K sinφ ± iQ cosφ‖ ≤ 1`.
    pub in_class: bool,
    /// Direct test of `T_K` against C(φ).
    pub direct: ClassReport,
}

pub fn sectorial_complete(pair: &DualPair, phi: Angle, k: &CMatrix, member_tol: f64, tol: &Tolerances) -> Result<SectorialCompletion> {
    let ca = checked_q(pair, phi, tol)?;
    let t = complete(pair, k)?;
    let in_class = if ca.consistent {
        op_norm(&shifted_parameter(pair, &ca.q, k, phi, true, tol)) <= 1.0 + member_tol
            && op_norm(&shifted_parameter(pair, &ca.q, k, phi, false, tol)) <= 1.0 + member_tol
    } else {
        op_norm(&pair.compress_k(k, tol)) <= 1.0 + member_tol
    };
    let direct = in_cphi(&t, phi, tol)?;
    Ok(SectorialCompletion { t, in_class, direct })
}

/// The sectorial completion set at `phi` has exactly one element.
pub fn singleton_check(pair: &DualPair, phi: Angle, tol: &Tolerances) -> Result<bool> {
    let ca = checked_q(pair, phi, tol)?;
    if op_norm(&pair.d_v_adj) == 0.0 || op_norm(&pair.d_u) == 0.0 {
        return Ok(true);
    }
    let bl = range_basis(&pair.d_v_adj, tol);
    let br = range_basis(&pair.d_u, tol);
    if bl.ncols() == 0 || br.ncols() == 0 {
        return Ok(true);
    }
    if !ca.consistent {
        return Ok(false);
    }
    let qc = scale(&(bl.adjoint() * &ca.q * br), phi.cos());
    Ok(is_maximal_partial_isometry(&qc, 1e-8))
}

fn require_proper(pair: &DualPair) -> Result<()> {
    if !pair.is_proper() {
        return Err(Error::NotProperPair);
    }
    Ok(())
}

/// Krein's extreme completions `T_m = T_{-I}` and `T_M = T_{+I}`.
pub fn extremal_pair(pair: &DualPair) -> Result<(CMatrix, CMatrix)> {
    require_proper(pair)?;
    let n2 = pair.u.ncols();
    Ok((complete(pair, &(-eye(n2)))?, complete(pair, &eye(n2))?))
}

/// `(T_M + T_m)/2 + (T_M - T_m)^{1/2} K (T_M - T_m)^{1/2} / 2`, with `K` the
/// corner parameter embedded in the full space.
pub fn krein_param(pair: &DualPair, k: &CMatrix) -> Result<CMatrix> {
    let (tm, t_max) = extremal_pair(pair)?;
    let n1 = pair.t11.nrows();
    let n2 = pair.u.ncols();
    if k.shape() != (n2, n2) {
        return Err(Error::DimensionMismatch(format!("K must be {n2}x{n2}")));
    }
    let full = block2x2(&zeros(n1, n1), &zeros(n1, n2), &zeros(n2, n1), k);
    let root = psd_sqrt_clipped(&(&t_max - &tm));
    Ok(((&t_max + &tm) + &root * full * &root) * c(0.5, 0.0))
}

fn symmetric_column(t11: &CMatrix, t21: &CMatrix, tol: &Tolerances) -> Result<(CMatrix, CMatrix)> {
    if t11.nrows() != t11.ncols() || op_norm(&(t11 - t11.adjoint())) > tol.psd_tol * (1.0 + op_norm(t11)) {
        return Err(Error::NotSymmetricColumn);
    }
    if t21.ncols() != t11.ncols() {
        return Err(Error::DimensionMismatch("t21 must have as many columns as t11".into()));
    }
    if op_norm(&vstack(t11, t21)) > 1.0 + tol.norm_slack {
        return Err(Error::NotDualPairContractions);
    }
    let d = psd_sqrt_clipped(&(eye(t11.ncols()) - t11.adjoint() * t11));
    let v = t21 * pinv(&d, tol);
    Ok((d, v))
}

/// Ball of the second-row factors `U` for which the pair with column `t1` has
/// `φ1(U) ≤ φ`:
/// center `cos²φ Y² V*`, left radius `sinφ Y D_V`, right radius `D_{V*} Y_*`,
/// with `Y = (sin²φ D_V² + cos²φ)^{-1/2}` and `Y_*` the same on the `D_{V*}` side.
pub fn all_extensions_u_ball(t11: &CMatrix, t21: &CMatrix, phi: Angle, tol: &Tolerances) -> Result<OperatorBall> {
    let (_, v) = symmetric_column(t11, t21, tol)?;
    let (s, co) = (phi.sin(), phi.cos());
    let (n2, n1) = v.shape();
    let dv2 = eye(n1) - v.adjoint() * &v;
    let dva2 = eye(n2) - &v * v.adjoint();
    let y = psd_pinv_sqrt(&(scale(&dv2, s * s) + scale(&eye(n1), co * co)), tol)?;
    let y_adj = psd_pinv_sqrt(&(scale(&dva2, s * s) + scale(&eye(n2), co * co)), tol)?;
    let center = scale(&(&y * &y * v.adjoint()), co * co);
    let r_left = scale(&(&y * psd_sqrt_clipped(&dv2)), s);
    let r_right = psd_sqrt_clipped(&dva2) * y_adj;
    Ok(OperatorBall { center, r_left: crate::matcore::re_part(&r_left), r_right: crate::matcore::re_part(&r_right) })
}

#[derive(Debug, Clone)]
pub struct Extension {
    pub t: CMatrix,
    pub u: CMatrix,
    pub pair: DualPair,
    pub critical: CriticalAngle,
    /// Parameter test `‖K sinφ ± iQ(U) cosφ‖ ≤ 1`.
    pub in_class: bool,
    pub direct: ClassReport,
}

/// The extension of the column `t1` with `U = C + R_l M R_r` from the
/// [`all_extensions_u_ball`] and corner parameter `K`.
pub fn all_extensions(t11: &CMatrix, t21: &CMatrix, phi: Angle, m: &CMatrix, k: &CMatrix, tol: &Tolerances) -> Result<Extension> {
    let (d, _) = symmetric_column(t11, t21, tol)?;
    let ball = all_extensions_u_ball(t11, t21, phi, tol)?;
    let u = ball.point(m);
    let pair = dual_pair_make(t11, t21, &(&d * &u), tol)?;
    let critical = critical_angle(&pair, tol)?;
    let t = complete(&pair, k)?;
    let in_class = if critical.consistent {
        op_norm(&shifted_parameter(&pair, &critical.q, k, phi, true, tol)) <= 1.0 + MEMBER_TOL
            && op_norm(&shifted_parameter(&pair, &critical.q, k, phi, false, tol)) <= 1.0 + MEMBER_TOL
    } else {
        phi.is_half_pi() && op_norm(&pair.compress_k(k, tol)) <= 1.0 + MEMBER_TOL
    };
    let direct = in_cphi(&t, phi, tol)?;
    Ok(Extension { t, u, pair, critical, in_class, direct })
}

/// Two balls on the full space whose intersection, read through `T ↦ T P2`,
/// is the set of C(φ) extensions of the column `t1 = [t11; t21]`:
/// `B(∓ i cotφ P2; D_{S±*}/sinφ, P2)` with `S± = T1 sinφ ± i cosφ J1`.
pub fn problem3_reduction(t11: &CMatrix, t21: &CMatrix, phi: Angle, tol: &Tolerances) -> Result<(OperatorBall, OperatorBall)> {
    if phi.radians() == 0.0 {
        return Err(Error::InvalidAngle(0.0));
    }
    let n1 = t11.ncols();
    if t11.nrows() != n1 || t21.ncols() != n1 {
        return Err(Error::DimensionMismatch("t11 must be square and t21 must share its columns".into()));
    }
    let n2 = t21.nrows();
    let n = n1 + n2;
    let (s, co) = (phi.sin(), phi.cos());
    let t1 = vstack(t11, t21);
    let j1 = vstack(&eye(n1), &zeros(n2, n1));
    let p2 = block2x2(&zeros(n1, n1), &zeros(n1, n2), &zeros(n2, n1), &eye(n2));
    let mut balls = Vec::with_capacity(2);
    for sign in [1.0, -1.0] {
        let sm = scale(&t1, s) + &j1 * c(0.0, sign * co);
        if op_norm(&sm) > 1.0 + tol.norm_slack {
            return Err(Error::NotInPhiZeroClass);
        }
        let d = psd_sqrt_clipped(&(eye(n) - &sm * sm.adjoint()));
        balls.push(OperatorBall {
            center: &p2 * c(0.0, -sign * phi.cot()),
            r_left: scale(&d, 1.0 / s),
            r_right: p2.clone(),
        });
    }
    let minus = balls.pop().unwrap();
    let plus = balls.pop().unwrap();
    Ok((plus, minus))
}

/// `T P2` lies in both reduction balls.
pub fn problem3_member(balls: &(OperatorBall, OperatorBall), t: &CMatrix, tol: &Tolerances) -> bool {
    let p2 = &balls.0.r_right;
    let z = t * p2;
    ball_member(&balls.0, &z, MEMBER_TOL, tol).member && ball_member(&balls.1, &z, MEMBER_TOL, tol).member
}

#[derive(Debug, Clone)]
pub struct TwoBallReduction {
    /// Ball of `sinφ T22` from `T sinφ + i cosφ` being a contraction.
    pub ball_plus: OperatorBall,
    /// Ball of `sinφ T22` from `T sinφ - i cosφ` being a contraction.
    pub ball_minus: OperatorBall,
    pub samples_nonempty: bool,
    pub samples_tried: usize,
    /// A common member found by the probe, as `T22` (already divided by `sinφ`).
    pub witness: Option<CMatrix>,
}

/// Two-ball description of the C(φ) completions of a general dual pair, with
/// a Monte-Carlo nonemptiness probe. No solvability criterion is claimed.
pub fn problem4_reduction(pair: &DualPair, phi: Angle, samples: usize, rng: &mut TestRng, tol: &Tolerances) -> Result<TwoBallReduction> {
    let (n1p, n1) = pair.t11.shape();
    let (n2p, n2) = pair.corner_shape();
    if n1p != n1 || n2p != n2 {
        return Err(Error::DimensionMismatch("the two-ball reduction needs square diagonal blocks".into()));
    }
    if phi.radians() == 0.0 {
        return Err(Error::InvalidAngle(0.0));
    }
    let (s, co) = (phi.sin(), phi.cos());
    let mut balls = Vec::with_capacity(2);
    for sign in [1.0, -1.0] {
        let b = scale(&pair.t11, s) + eye(n1) * c(0.0, sign * co);
        let col = vstack(&b, &scale(&pair.t21, s));
        let row = crate::matcore::hstack(&b, &scale(&pair.t12, s));
        if op_norm(&col) > 1.0 + tol.norm_slack || op_norm(&row) > 1.0 + tol.norm_slack {
            return Err(Error::NotInPhiZeroClass);
        }
        let db = psd_sqrt_clipped(&(eye(n1) - b.adjoint() * &b));
        let db_adj = psd_sqrt_clipped(&(eye(n1) - &b * b.adjoint()));
        let v = scale(&pair.t21, s) * pinv(&db, tol);
        let u = pinv(&db_adj, tol) * scale(&pair.t12, s);
        let center = eye(n2) * c(0.0, -sign * co) - &v * b.adjoint() * &u;
        balls.push(OperatorBall {
            center,
            r_left: psd_sqrt_clipped(&(eye(n2) - &v * v.adjoint())),
            r_right: psd_sqrt_clipped(&(eye(n2) - u.adjoint() * &u)),
        });
    }
    let ball_minus = balls.pop().unwrap();
    let ball_plus = balls.pop().unwrap();
    let both = |z: &CMatrix| {
        ball_member(&ball_plus, z, MEMBER_TOL, tol).member && ball_member(&ball_minus, z, MEMBER_TOL, tol).member
    };
    let mut candidates = vec![
        (&ball_plus.center + &ball_minus.center) * c(0.5, 0.0),
        ball_plus.center.clone(),
        ball_minus.center.clone(),
    ];
    let mut witness = None;
    let mut tried = 0;
    for z in candidates.drain(..) {
        tried += 1;
        if both(&z) {
            witness = Some(z);
            break;
        }
    }
    let mut i = 0;
    while witness.is_none() && i < samples {
        let z = if i % 2 == 0 { ball_plus.sample(rng) } else { ball_minus.sample(rng) };
        tried += 1;
        if both(&z) {
            witness = Some(z);
        }
        i += 1;
    }
    Ok(TwoBallReduction {
        ball_plus,
        ball_minus,
        samples_nonempty: witness.is_some(),
        samples_tried: tried,
        witness: witness.map(|z| scale(&z, 1.0 / s)),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct B11Identity {
    /// `max± ‖D²_{B11±} - (sin²φ D²_{T11} ∓ sin2φ (T11)_I)‖`.
    pub direct_residual: f64,
    /// `max± ‖D²_{B11±} - sin²φ D_{T11}(I ± C1) D_{T11}‖`.
    pub factored_residual: f64,
    pub c1_consistent: bool,
    pub c1_norm: f64,
}

/// Defect of the shifted corner `B11± = T11 sinφ ± i cosφ` in two forms, with
/// `C1 = D_{T11}⁺ 2cotφ (T11*)_I D_{T11}⁺`.
pub fn b11_defect_identity(t11: &CMatrix, phi: Angle, tol: &Tolerances) -> Result<B11Identity> {
    let n = t11.nrows();
    if t11.ncols() != n {
        return Err(Error::DimensionMismatch("t11 must be square".into()));
    }
    if phi.radians() == 0.0 {
        return Err(Error::InvalidAngle(0.0));
    }
    let (s, co) = (phi.sin(), phi.cos());
    let d2 = eye(n) - t11.adjoint() * t11;
    let d = psd_sqrt_clipped(&d2);
    let ti = im_part(t11);
    let c1 = consistent_sandwich(&d, &scale(&im_part(&t11.adjoint()), 2.0 * phi.cot()), &d, tol);
    let mut direct: f64 = 0.0;
    let mut factored: f64 = 0.0;
    for sign in [1.0, -1.0] {
        let b = scale(t11, s) + eye(n) * c(0.0, sign * co);
        let db2 = eye(n) - b.adjoint() * &b;
        let rhs = scale(&d2, s * s) - scale(&ti, sign * 2.0 * s * co);
        direct = direct.max(op_norm(&(&db2 - rhs)));
        let fac = scale(&(&d * (eye(n) + scale(&c1.x, sign)) * &d), s * s);
        factored = factored.max(op_norm(&(&db2 - fac)));
    }
    Ok(B11Identity { direct_residual: direct, factored_residual: factored, c1_consistent: c1.consistent, c1_norm: op_norm(&c1.x) })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EmpiricalPhi1 {
    pub phi1: f64,
    /// Samples found inside C(φ) just below the located threshold; zero when
    /// the `K = 0` test decides the threshold, as the hole structure predicts.
    pub safety_net_hits: usize,
}

/// Bisection on `[0, π/2]` for the smallest φ with `T_0 ∈ C(φ)`, followed by a
/// random search below the threshold.
pub fn empirical_phi1(pair: &DualPair, iterations: usize, samples: usize, rng: &mut TestRng, tol: &Tolerances) -> Result<EmpiricalPhi1> {
    let (n2p, n2) = pair.corner_shape();
    let t0 = complete(pair, &zeros(n2p, n2))?;
    let member = |phi: f64, t: &CMatrix| -> Result<bool> { Ok(in_cphi(t, Angle::new(phi)?, tol)?.in_class) };
    if member(0.0, &t0)? {
        return Ok(EmpiricalPhi1 { phi1: 0.0, safety_net_hits: 0 });
    }
    let (mut lo, mut hi) = (0.0, std::f64::consts::FRAC_PI_2);
    for _ in 0..iterations {
        let mid = 0.5 * (lo + hi);
        if member(mid, &t0)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let mut hits = 0;
    if lo > 0.0 {
        for _ in 0..samples {
            let k = scale(&unit_ball(rng, n2p, n2), 2.0);
            if member(lo, &complete(pair, &k)?)? {
                hits += 1;
            }
        }
    }
    Ok(EmpiricalPhi1 { phi1: hi, safety_net_hits: hits })
}
