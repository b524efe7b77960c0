//! Operator balls `B(C; R_l, R_r) = {C + R_l K R_r : ‖K‖ ≤ 1}` and holes, the
//! intersection of two balls sharing both radii.
//!
//! A hole with centers `C1`, `C2` is parametrized around the midpoint
//! `(C1 + C2)/2` by the shift `Q = R_l⁻¹ (C1 - C2)/2 R_r⁻¹`: its members are
//! `mid + R_l K R_r` with `K + Q` and `K - Q` both contractions.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::matcore::{
    c, compress, consistent_sandwich, eye, herm_eig_unchecked, is_maximal_partial_isometry, midpoint_split, op_norm,
    pinv, psd_sqrt, range_basis, range_projector, scale, CMatrix, Tolerances, SANDWICH_TOL,
};
use crate::random::{unit_ball, TestRng};
use crate::sector::{in_cphi, Angle};

/// Default slack on `‖k‖ ≤ 1` for membership tests.
pub const MEMBER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorBall {
    pub center: CMatrix,
    pub r_left: CMatrix,
    pub r_right: CMatrix,
}

impl OperatorBall {
    pub fn new(center: CMatrix, r_left: CMatrix, r_right: CMatrix, tol: &Tolerances) -> Result<Self> {
        let (p, q) = center.shape();
        if r_left.shape() != (p, p) || r_right.shape() != (q, q) {
            return Err(Error::DimensionMismatch(format!(
                "ball with center {p}x{q} needs radii {p}x{p} and {q}x{q}, got {:?} and {:?}",
                r_left.shape(),
                r_right.shape()
            )));
        }
        psd_sqrt(&r_left, tol)?;
        psd_sqrt(&r_right, tol)?;
        Ok(OperatorBall { center, r_left, r_right })
    }

    /// `C + R_l K R_r`.
    pub fn point(&self, k: &CMatrix) -> CMatrix {
        &self.center + &self.r_left * k * &self.r_right
    }

    pub fn sample(&self, rng: &mut TestRng) -> CMatrix {
        let k = unit_ball(rng, self.center.nrows(), self.center.ncols());
        self.point(&k)
    }
}

#[derive(Debug, Clone)]
pub struct Membership {
    pub member: bool,
    pub k: CMatrix,
}

pub fn ball_member(ball: &OperatorBall, z: &CMatrix, member_tol: f64, tol: &Tolerances) -> Membership {
    let s = consistent_sandwich(&ball.r_left, &(z - &ball.center), &ball.r_right, tol);
    let member = s.consistent && op_norm(&s.x) <= 1.0 + member_tol;
    Membership { member, k: s.x }
}

/// `Z*Q1Z + Z*Q2 + Q2*Z + Q3`.
pub fn quadratic_form(q1: &CMatrix, q2: &CMatrix, q3: &CMatrix, z: &CMatrix) -> CMatrix {
    z.adjoint() * q1 * z + z.adjoint() * q2 + q2.adjoint() * z + q3
}

/// Solution set of `Z*Q1Z + Z*Q2 + Q2*Z + Q3 ⪯ 0` for positive definite `Q1`.
pub fn solve_quadratic_inequality(q1: &CMatrix, q2: &CMatrix, q3: &CMatrix, tol: &Tolerances) -> Result<OperatorBall> {
    let n = q1.nrows();
    let m = q3.nrows();
    if q1.ncols() != n || q3.ncols() != m || q2.shape() != (n, m) {
        return Err(Error::DimensionMismatch("Q1 n x n, Q2 n x m, Q3 m x m".into()));
    }
    let eig = crate::matcore::herm_eig(q1, tol)?;
    if eig.min() <= tol.psd_tol {
        return Err(Error::NotPd(eig.min()));
    }
    crate::matcore::herm_eig(q3, tol)?;
    let q1_inv = eig.map(|x| 1.0 / x);
    let r_left = eig.map(|x| 1.0 / x.sqrt());
    let center = -(&q1_inv * q2);
    let rr2 = q2.adjoint() * &q1_inv * q2 - q3;
    let r_right = psd_sqrt(&rr2, tol).map_err(|_| Error::Infeasible)?;
    Ok(OperatorBall { center, r_left, r_right })
}

#[derive(Debug, Clone)]
pub struct Factorization {
    pub b: CMatrix,
    pub consistent: bool,
    pub ok: bool,
}

/// Try `A = R2 B R1` with `B` a contraction, or with `B` in C(φ) on `ran R1`
/// when an angle is given.
pub fn factor_through(
    a: &CMatrix,
    r1: &CMatrix,
    r2: &CMatrix,
    phi: Option<Angle>,
    member_tol: f64,
    tol: &Tolerances,
) -> Result<Factorization> {
    if let Some(phi) = phi {
        if r1.shape() != r2.shape() || op_norm(&(range_projector(r1, tol) - range_projector(r2, tol))) > SANDWICH_TOL {
            return Err(Error::KernelMismatch);
        }
        let s = consistent_sandwich(r2, a, r1, tol);
        let w = range_basis(r1, tol);
        let bc = compress(&s.x, &w, &w);
        let in_class = in_cphi(&bc, phi, tol)?.in_class;
        let ok = s.consistent && op_norm(&s.x) <= 1.0 + member_tol && in_class;
        return Ok(Factorization { b: s.x, consistent: s.consistent, ok });
    }
    let s = consistent_sandwich(r2, a, r1, tol);
    let ok = s.consistent && op_norm(&s.x) <= 1.0 + member_tol;
    Ok(Factorization { b: s.x, consistent: s.consistent, ok })
}

/// Vectors `f`, `g` with `|(Af, g)| > ‖R1 f‖ ‖R2 g‖`.
#[derive(Debug, Clone)]
pub struct Witness {
    pub f: CMatrix,
    pub g: CMatrix,
    pub lhs: f64,
    pub rhs: f64,
}

fn bilinear(a: &CMatrix, r1: &CMatrix, r2: &CMatrix, f: CMatrix, g: CMatrix) -> Witness {
    let lhs = (g.adjoint() * a * &f)[(0, 0)].norm();
    let rhs = (r1 * &f).norm() * (r2 * &g).norm();
    Witness { f, g, lhs, rhs }
}

fn top_singular_pair(m: &CMatrix) -> (f64, CMatrix, CMatrix) {
    let d = crate::matcore::svd(m);
    (d.s[0], d.u.columns(0, 1).into_owned(), d.v.columns(0, 1).into_owned())
}

/// Search for a violation of the bilinear bound `|(Af, g)| ≤ ‖R1 f‖ ‖R2 g‖`.
///
/// Kernel leaks of `A` are tried first; otherwise the top singular pair of
/// `R2⁺ A R1⁺` gives the witness when that matrix has norm above `1 + member_tol`.
pub fn bilinear_witness(a: &CMatrix, r1: &CMatrix, r2: &CMatrix, member_tol: f64, tol: &Tolerances) -> Option<Witness> {
    if a.is_empty() {
        return None;
    }
    let p1 = range_projector(r1, tol);
    let p2 = range_projector(r2, tol);
    let leak_thr = SANDWICH_TOL * (1.0 + op_norm(a));
    let right_leak = a * (eye(a.ncols()) - &p1);
    if op_norm(&right_leak) > leak_thr {
        let (_, u, v) = top_singular_pair(&right_leak);
        return Some(bilinear(a, r1, r2, (eye(a.ncols()) - &p1) * v, u));
    }
    let left_leak = (eye(a.nrows()) - &p2) * a;
    if op_norm(&left_leak) > leak_thr {
        let (_, u, v) = top_singular_pair(&left_leak);
        return Some(bilinear(a, r1, r2, v, (eye(a.nrows()) - &p2) * u));
    }
    let b = pinv(r2, tol) * a * pinv(r1, tol);
    let (s, u, v) = top_singular_pair(&b);
    if s <= 1.0 + member_tol {
        return None;
    }
    Some(bilinear(a, r1, r2, pinv(r1, tol) * v, pinv(r2, tol) * u))
}

#[derive(Debug, Clone)]
pub struct OperatorHole {
    pub ball_one: OperatorBall,
    pub ball_two: OperatorBall,
    pub q_shift: CMatrix,
    pub midpoint: CMatrix,
    pub consistent: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HoleSummary {
    pub consistent: bool,
    pub q_norm: f64,
    pub nonempty: bool,
}

impl OperatorHole {
    pub fn r_left(&self) -> &CMatrix {
        &self.ball_one.r_left
    }

    pub fn r_right(&self) -> &CMatrix {
        &self.ball_one.r_right
    }

    pub fn nonempty(&self, tol: &Tolerances) -> bool {
        self.consistent && op_norm(&self.q_shift) <= 1.0 + tol.norm_slack
    }

    pub fn summary(&self, tol: &Tolerances) -> HoleSummary {
        HoleSummary { consistent: self.consistent, q_norm: op_norm(&self.q_shift), nonempty: self.nonempty(tol) }
    }

    /// `mid + R_l K R_r`.
    pub fn point(&self, k: &CMatrix) -> CMatrix {
        &self.midpoint + self.r_left() * k * self.r_right()
    }

    /// A parameter `K` with `‖K ± Q‖ ≤ 1`: rejection sampling from the unit
    /// ball, falling back to a ball of radius `1 - ‖Q‖`.
    pub fn sample_parameter(&self, rng: &mut TestRng, attempts: usize) -> Option<CMatrix> {
        let (p, q) = self.q_shift.shape();
        let qn = op_norm(&self.q_shift);
        if !self.consistent || qn > 1.0 {
            return None;
        }
        for _ in 0..attempts {
            let k = unit_ball(rng, p, q);
            if op_norm(&(&k + &self.q_shift)) <= 1.0 && op_norm(&(&k - &self.q_shift)) <= 1.0 {
                return Some(k);
            }
        }
        Some(scale(&unit_ball(rng, p, q), 1.0 - qn))
    }
}

pub fn hole_make(c1: &CMatrix, c2: &CMatrix, r_l: &CMatrix, r_r: &CMatrix, tol: &Tolerances) -> Result<OperatorHole> {
    if c1.shape() != c2.shape() {
        return Err(Error::DimensionMismatch("hole centers differ in shape".into()));
    }
    let ball_one = OperatorBall::new(c1.clone(), r_l.clone(), r_r.clone(), tol)?;
    let ball_two = OperatorBall::new(c2.clone(), r_l.clone(), r_r.clone(), tol)?;
    let half = (c1 - c2) * c(0.5, 0.0);
    let s = consistent_sandwich(r_l, &half, r_r, tol);
    Ok(OperatorHole {
        ball_one,
        ball_two,
        q_shift: s.x,
        midpoint: (c1 + c2) * c(0.5, 0.0),
        consistent: s.consistent,
    })
}

pub fn hole_member(hole: &OperatorHole, t: &CMatrix, member_tol: f64, tol: &Tolerances) -> Result<Membership> {
    if !hole.consistent {
        return Err(Error::InconsistentHole);
    }
    let s = consistent_sandwich(hole.r_left(), &(t - &hole.midpoint), hole.r_right(), tol);
    let member = s.consistent
        && op_norm(&(&s.x + &hole.q_shift)) <= 1.0 + member_tol
        && op_norm(&(&s.x - &hole.q_shift)) <= 1.0 + member_tol;
    Ok(Membership { member, k: s.x })
}

fn compressed_shift(hole: &OperatorHole, tol: &Tolerances) -> CMatrix {
    let bl = range_basis(hole.r_left(), tol);
    let br = range_basis(hole.r_right(), tol);
    compress(&hole.q_shift, &bl, &br)
}

/// The hole has exactly one element.
pub fn hole_singleton(hole: &OperatorHole, tol: &Tolerances) -> Result<bool> {
    if !hole.consistent {
        return Err(Error::InconsistentHole);
    }
    if op_norm(hole.r_left()) == 0.0 || op_norm(hole.r_right()) == 0.0 {
        return Ok(true);
    }
    let qc = compressed_shift(hole, tol);
    if qc.is_empty() {
        return Ok(true);
    }
    Ok(is_maximal_partial_isometry(&qc, 1e-8))
}

/// Two distinct members when the compressed shift is not a maximal partial
/// isometry: `mid ± R_l E R_r` with `Q ± E` contractions.
pub fn hole_distinct_members(hole: &OperatorHole, tol: &Tolerances) -> Option<(CMatrix, CMatrix)> {
    if !hole.nonempty(tol) {
        return None;
    }
    let bl = range_basis(hole.r_left(), tol);
    let br = range_basis(hole.r_right(), tol);
    let qc = compress(&hole.q_shift, &bl, &br);
    let e = midpoint_split(&qc, tol)?;
    let lifted = &bl * e * br.adjoint();
    let step = hole.r_left() * lifted * hole.r_right();
    Some((&hole.midpoint + &step, &hole.midpoint - &step))
}

/// Largest eigenvalue of the quadratic form at `Z`; `≤ 0` means `Z` solves it.
pub fn quadratic_excess(q1: &CMatrix, q2: &CMatrix, q3: &CMatrix, z: &CMatrix) -> f64 {
    herm_eig_unchecked(&quadratic_form(q1, q2, q3, z)).max()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::{from_real_rows, real_diag, scalar, zeros};
    use crate::random::{gaussian, psd, rng, with_norm};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn s(x: f64) -> CMatrix {
        scalar(c(x, 0.0))
    }

    #[test]
    fn ball_member_examples() {
        let mut g = rng(1);
        let ball = OperatorBall::new(gaussian(&mut g, 2, 3), psd(&mut g, 2, 0.2, 1.5), psd(&mut g, 3, 0.2, 1.5), &tol()).unwrap();
        let m = ball_member(&ball, &ball.center, MEMBER_TOL, &tol());
        assert!(m.member && op_norm(&m.k) < 1e-14);
        let unit = OperatorBall::new(s(0.0), s(1.0), s(1.0), &tol()).unwrap();
        assert!(!ball_member(&unit, &s(2.0), MEMBER_TOL, &tol()).member);
        for _ in 0..50 {
            let k = unit_ball(&mut g, 2, 3);
            let z = ball.point(&k);
            let m = ball_member(&ball, &z, MEMBER_TOL, &tol());
            assert!(m.member);
            assert!(op_norm(&(ball.point(&m.k) - z)) < 1e-9);
        }
    }

    #[test]
    fn quadratic_inequality_examples() {
        let b = solve_quadratic_inequality(&s(1.0), &s(0.0), &s(-1.0), &tol()).unwrap();
        assert_eq!(b.center, s(0.0));
        assert!((b.r_left[(0, 0)].re - 1.0).abs() < 1e-15 && (b.r_right[(0, 0)].re - 1.0).abs() < 1e-15);
        assert_eq!(solve_quadratic_inequality(&eye(2), &zeros(2, 2), &eye(2), &tol()).unwrap_err(), Error::Infeasible);
        assert!(matches!(solve_quadratic_inequality(&real_diag(&[1.0, 0.0]), &zeros(2, 1), &s(-1.0), &tol()), Err(Error::NotPd(_))));
    }

    #[test]
    fn quadratic_inequality_members_and_outsiders() {
        let mut g = rng(2);
        let q1 = psd(&mut g, 3, 0.5, 2.0);
        let q2 = gaussian(&mut g, 3, 2);
        let q3 = -psd(&mut g, 2, 0.5, 2.0);
        let b = solve_quadratic_inequality(&q1, &q2, &q3, &tol()).unwrap();
        for _ in 0..200 {
            let z = b.sample(&mut g);
            assert!(quadratic_excess(&q1, &q2, &q3, &z) <= 1e-9);
            let out = b.point(&with_norm(&mut g, 3, 2, 1.01));
            assert!(quadratic_excess(&q1, &q2, &q3, &out) > 0.0);
        }
    }

    #[test]
    fn factor_through_examples() {
        let mut g = rng(3);
        let r1 = psd(&mut g, 3, 0.3, 1.5);
        let r2 = psd(&mut g, 2, 0.3, 1.5);
        let f = factor_through(&zeros(2, 3), &r1, &r2, None, MEMBER_TOL, &tol()).unwrap();
        assert!(f.ok && op_norm(&f.b) == 0.0);
        let f = factor_through(&(&r2 * from_real_rows(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0]) * &r1), &r1, &r2, None, MEMBER_TOL, &tol()).unwrap();
        assert!(f.ok);
        let a = &r2 * with_norm(&mut g, 2, 3, 1.3) * &r1;
        let f = factor_through(&a, &r1, &r2, None, MEMBER_TOL, &tol()).unwrap();
        assert!(!f.ok);
        let w = bilinear_witness(&a, &r1, &r2, MEMBER_TOL, &tol()).unwrap();
        assert!(w.lhs > w.rhs * 1.2);
    }

    #[test]
    fn factor_through_angle_needs_equal_kernels() {
        let r1 = real_diag(&[1.0, 0.0]);
        let r2 = real_diag(&[0.0, 1.0]);
        let err = factor_through(&zeros(2, 2), &r1, &r2, Some(Angle::new(0.5).unwrap()), MEMBER_TOL, &tol());
        assert_eq!(err.unwrap_err(), Error::KernelMismatch);
    }

    #[test]
    fn hole_examples() {
        let h = hole_make(&s(1.0), &s(1.0), &s(1.0), &s(1.0), &tol()).unwrap();
        assert!(op_norm(&h.q_shift) == 0.0 && h.nonempty(&tol()));
        let h = hole_make(&s(1.0), &s(-1.0), &s(1.0), &s(1.0), &tol()).unwrap();
        assert!((h.q_shift[(0, 0)].re - 1.0).abs() < 1e-15 && h.nonempty(&tol()));
        assert!(hole_singleton(&h, &tol()).unwrap());
        let h = hole_make(&s(3.0), &s(-3.0), &s(1.0), &s(1.0), &tol()).unwrap();
        assert!(!h.nonempty(&tol()));
    }

    #[test]
    fn hole_member_scalar() {
        let h = hole_make(&s(0.5), &s(-0.5), &s(1.0), &s(1.0), &tol()).unwrap();
        assert!(hole_member(&h, &s(0.4), MEMBER_TOL, &tol()).unwrap().member);
        assert!(!hole_member(&h, &s(0.9), MEMBER_TOL, &tol()).unwrap().member);
        let m = hole_member(&h, &h.midpoint, MEMBER_TOL, &tol()).unwrap();
        assert!(m.member && op_norm(&m.k) == 0.0);
    }

    #[test]
    fn hole_singleton_branches() {
        let q0 = hole_make(&zeros(2, 2), &zeros(2, 2), &eye(2), &eye(2), &tol()).unwrap();
        assert!(!hole_singleton(&q0, &tol()).unwrap());
        let d = real_diag(&[1.0, 0.0]);
        let h = hole_make(&d, &(-&d), &eye(2), &eye(2), &tol()).unwrap();
        assert!(!hole_singleton(&h, &tol()).unwrap());
        let (a, b) = hole_distinct_members(&h, &tol()).unwrap();
        assert!(op_norm(&(&a - &b)) > 0.1);
        for t in [&a, &b] {
            assert!(ball_member(&h.ball_one, t, MEMBER_TOL, &tol()).member);
            assert!(ball_member(&h.ball_two, t, MEMBER_TOL, &tol()).member);
        }
        let zero_radius = hole_make(&d, &d, &zeros(2, 2), &eye(2), &tol()).unwrap();
        assert!(hole_singleton(&zero_radius, &tol()).unwrap());
    }

    #[test]
    fn inconsistent_hole_rejects_membership() {
        let h = hole_make(&s(1.0), &s(0.0), &s(0.0), &s(1.0), &tol()).unwrap();
        assert!(!h.consistent);
        assert_eq!(hole_member(&h, &s(0.0), MEMBER_TOL, &tol()).unwrap_err(), Error::InconsistentHole);
    }
}
