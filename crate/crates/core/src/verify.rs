//! Seeded randomized oracle suites, one per module.
//!
//! Every check runs `trials` times; trial `i` draws from `ChaCha8Rng` seeded
//! with `seed + i`, so a report is reproducible from its command line. Checks
//! return the measured residual (or 0 for pure verdict comparisons) and pass
//! when it stays below the check's threshold.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::balls::{ball_member, hole_make, OperatorBall, MEMBER_TOL};
use crate::completion::{
    all_extensions, all_extensions_u_ball, complete, critical_angle, dual_pair_make, empirical_phi1, extremal_pair,
    krein_param, problem3_member, problem3_reduction, recover_k, sectorial_complete, DualPair, Phi1,
};
use crate::error::Result;
use crate::extremal::{cphi_extreme_tests, k_theta, loone_certificate, loone_shift, Verdict};
use crate::matcore::{
    consistent_sandwich, eye, im_part, inertia, op_norm, pinv, polar, psd_sqrt, psd_sqrt_clipped, real_diag, scale,
    CMatrix, Tolerances,
};
use crate::random::{
    contraction, dim, gaussian, hermitian, psd, psd_rank, rng, sectorial, uniform, unit_ball, unitary, TestRng,
};
use crate::schur::{
    generalized_schur, kappa_classify, lemma25_verify, shorted, shorted_defects, shorted_variational, thm43_residuals,
};
use crate::sector::{cayley, cayley_inv, in_cphi, is_sectorial, lemma31_equiv_check, Angle};
use crate::triangular::{shmulyan_complete, tri_complete, tri_identities, TriPair};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Matcore,
    Sector,
    Balls,
    Completion,
    Extremal,
    Schur,
    Triangular,
    All,
}

impl Suite {
    pub const MODULES: [Suite; 7] =
        [Suite::Matcore, Suite::Sector, Suite::Balls, Suite::Completion, Suite::Extremal, Suite::Schur, Suite::Triangular];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Matcore => "matcore",
            Suite::Sector => "sector",
            Suite::Balls => "balls",
            Suite::Completion => "completion",
            Suite::Extremal => "extremal",
            Suite::Schur => "schur",
            Suite::Triangular => "triangular",
            Suite::All => "all",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Suite::MODULES
            .iter()
            .copied()
            .chain([Suite::All])
            .find(|m| m.name() == s)
            .ok_or_else(|| format!("unknown suite `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub residual: f64,
}

impl Outcome {
    pub fn verdict(pass: bool) -> Self {
        Outcome { pass, residual: 0.0 }
    }

    pub fn residual(residual: f64, threshold: f64) -> Self {
        Outcome { pass: residual.is_finite() && residual < threshold, residual }
    }
}

pub type CheckFn = fn(&mut TestRng, usize, &Tolerances, f64) -> Result<Outcome>;

#[derive(Clone, Copy)]
pub struct Check {
    pub name: &'static str,
    pub threshold: f64,
    pub run: CheckFn,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckSummary {
    pub suite: String,
    pub check: String,
    pub trials: usize,
    pub failures: usize,
    pub max_residual: f64,
    pub threshold: f64,
    pub first_failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub dims: usize,
    pub failures: usize,
    pub max_residual: f64,
    pub verdicts: Vec<CheckSummary>,
    pub tolerances: Tolerances,
}

/// Runs one check for `trials` trials, trial `i` seeded with `seed + i`.
pub fn run_check(suite: Suite, check: &Check, seed: u64, trials: usize, dims: usize, tol: &Tolerances, threshold: Option<f64>) -> CheckSummary {
    let threshold = threshold.unwrap_or(check.threshold);
    let mut failures = 0;
    let mut max_residual: f64 = 0.0;
    let mut first_failure = None;
    for i in 0..trials {
        let mut g = rng(seed.wrapping_add(i as u64));
        let (ok, res, msg) = match (check.run)(&mut g, dims.max(1), tol, threshold) {
            Ok(o) => (o.pass, o.residual, format!("trial {i}: residual {:e}", o.residual)),
            Err(e) => (false, 0.0, format!("trial {i}: {e}")),
        };
        max_residual = max_residual.max(res);
        if !ok {
            failures += 1;
            first_failure.get_or_insert(msg);
        }
    }
    CheckSummary {
        suite: suite.name().into(),
        check: check.name.into(),
        trials,
        failures,
        max_residual,
        threshold,
        first_failure,
    }
}

pub fn run(suite: Suite, seed: u64, trials: usize, dims: usize, tol: &Tolerances, threshold: Option<f64>) -> RunReport {
    let suites: Vec<Suite> = if suite == Suite::All { Suite::MODULES.to_vec() } else { vec![suite] };
    let mut verdicts = Vec::new();
    for s in suites {
        for check in checks(s) {
            verdicts.push(run_check(s, &check, seed, trials, dims, tol, threshold));
        }
    }
    RunReport {
        command: "verify".into(),
        suite: suite.name().into(),
        seed,
        trials,
        dims,
        failures: verdicts.iter().map(|v| v.failures).sum(),
        max_residual: verdicts.iter().map(|v| v.max_residual).fold(0.0, f64::max),
        verdicts,
        tolerances: *tol,
    }
}

pub fn checks(suite: Suite) -> Vec<Check> {
    macro_rules! ck {
        ($name:literal, $thr:expr, $f:expr) => {
            Check { name: $name, threshold: $thr, run: $f }
        };
    }
    match suite {
        Suite::Matcore => vec![
            ck!("psd_sqrt_square", 1e-10, check_psd_sqrt),
            ck!("pinv_penrose", 1e-9, check_pinv),
            ck!("polar_reconstruct", 1e-10, check_polar),
            ck!("inertia_counts", 1e-12, check_inertia),
            ck!("sandwich_consistency", 1e-8, check_sandwich),
        ],
        Suite::Sector => vec![
            ck!("cayley_roundtrip", 1e-9, check_cayley_roundtrip),
            ck!("sectorial_to_cphi", 1e-12, check_sectorial_cphi),
            ck!("angle_form_vs_norm_test", 1e-12, check_angle_form),
        ],
        Suite::Balls => vec![
            ck!("ball_exactness", 1e-12, check_ball_exactness),
            ck!("hole_param_vs_two_balls", 1e-12, check_hole_membership),
        ],
        Suite::Completion => vec![
            ck!("contractive_ball_exactness", 1e-8, check_thm21),
            ck!("recover_k_roundtrip", 1e-8, check_recover_k),
            ck!("sectorial_verdict_vs_direct", 1e-12, check_sectorial_verdict),
            ck!("critical_angle_vs_bisection", 1e-6, check_phi1_bisection),
            ck!("krein_extremes", 1e-9, check_krein),
            ck!("u_ball_extensions", 1e-12, check_u_ball),
            ck!("column_two_balls", 1e-12, check_column_balls),
        ],
        Suite::Extremal => vec![
            ck!("k_theta_certified", 1e-8, check_k_theta),
            ck!("loone_certificate_identity", 1e-8, check_loone_identity),
            ck!("interior_not_certified", 1e-12, check_interior_not_certified),
        ],
        Suite::Schur => vec![
            ck!("schur_identities", 1e-7, check_schur_identities),
            ck!("kappa_agreement", 1e-12, check_kappa),
            ck!("shorted_vs_variational", 1e-8, check_shorted_variational),
            ck!("shorted_maximality", 1e-9, check_shorted_maximality),
            ck!("shorted_defects_closed_form", 1e-8, check_shorted_defects),
            ck!("schur_inertia", 1e-12, check_schur_inertia),
        ],
        Suite::Triangular => vec![
            ck!("nagy_foias_ball", 1e-9, check_tri_ball),
            ck!("tri_defect_identities", 1e-8, check_tri_identities),
            ck!("shmulyan_vs_direct", 1e-12, check_shmulyan),
        ],
        Suite::All => Suite::MODULES.iter().flat_map(|&s| checks(s)).collect(),
    }
}

// ---- random instances ----

/// General dual pair: `T11` a contraction, `V`, `U` contractions of norm at
/// most `0.9`, so both defects `D_{V*}`, `D_U` are nonsingular.
pub fn random_dual_pair(g: &mut TestRng, dims: usize, tol: &Tolerances) -> Result<DualPair> {
    let (n1p, n1, n2p, n2) = (dim(g, dims), dim(g, dims), dim(g, dims), dim(g, dims));
    let t11 = contraction(g, n1p, n1, 0.95);
    let d = psd_sqrt_clipped(&(eye(n1) - t11.adjoint() * &t11));
    let da = psd_sqrt_clipped(&(eye(n1p) - &t11 * t11.adjoint()));
    let v = contraction(g, n2p, n1, 0.9);
    let u = contraction(g, n1p, n2, 0.9);
    dual_pair_make(&t11, &(&v * d), &(da * &u), tol)
}

/// Symmetric pair: Hermitian `T11`, square corner.
pub fn random_symmetric_pair(g: &mut TestRng, dims: usize, tol: &Tolerances) -> Result<DualPair> {
    let (n1, n2) = (dim(g, dims), dim(g, dims));
    let t11 = hermitian(g, n1, 0.9);
    let d = psd_sqrt_clipped(&(eye(n1) - &t11 * &t11));
    let v = contraction(g, n2, n1, 0.9);
    let u = contraction(g, n1, n2, 0.9);
    dual_pair_make(&t11, &(&v * &d), &(&d * &u), tol)
}

/// Proper pair: symmetric with `T12 = T21*`.
pub fn random_proper_pair(g: &mut TestRng, dims: usize, tol: &Tolerances) -> Result<DualPair> {
    let (n1, n2) = (dim(g, dims), dim(g, dims));
    let t11 = hermitian(g, n1, 0.9);
    let d = psd_sqrt_clipped(&(eye(n1) - &t11 * &t11));
    let v = contraction(g, n2, n1, 0.9);
    let t21 = &v * &d;
    dual_pair_make(&t11, &t21, &t21.adjoint(), tol)
}

/// Angle drawn uniformly from `[φ1, π/2]` of a symmetric pair.
pub fn random_admissible_angle(g: &mut TestRng, pair: &DualPair, tol: &Tolerances) -> Result<Angle> {
    let lo = match critical_angle(pair, tol)?.phi1 {
        Phi1::Angle(p) => p,
        Phi1::PiOverTwoOnly => FRAC_PI_2,
    };
    Angle::new(uniform(g, lo, FRAC_PI_2))
}

/// Contraction in C(φ): the Cayley image of a sectorial matrix of half-angle
/// at most `phi`.
pub fn random_cphi(g: &mut TestRng, n: usize, phi: f64, tol: &Tolerances) -> Result<CMatrix> {
    let half = phi * uniform(g, 0.2, 1.0);
    let a = sectorial(g, n, half);
    cayley(&a, tol)
}

fn sample_scale(g: &mut TestRng, r: usize, cols: usize, max: f64) -> CMatrix {
    scale(&unit_ball(g, r, cols), uniform(g, 0.0, max))
}

fn rel(err: f64, size: f64) -> f64 {
    err / (1.0 + size)
}

// ---- matcore ----

fn check_psd_sqrt(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let n = dim(g, dims);
    let rank = g.next_u64_mod(n + 1);
    let h = psd_rank(g, n, rank);
    let r = psd_sqrt(&h, tol)?;
    Ok(Outcome::residual(rel(op_norm(&(&r * &r - &h)), op_norm(&h)), thr))
}

trait NextMod {
    fn next_u64_mod(&mut self, m: usize) -> usize;
}

impl NextMod for TestRng {
    fn next_u64_mod(&mut self, m: usize) -> usize {
        use rand::Rng;
        self.random_range(0..m.max(1))
    }
}

fn check_pinv(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let (r, cols) = (dim(g, dims), dim(g, dims));
    let inner = dim(g, r.min(cols));
    let a = gaussian(g, r, inner) * gaussian(g, inner, cols);
    let p = pinv(&a, tol);
    let e1 = op_norm(&(&a * &p * &a - &a));
    let e2 = op_norm(&(&p * &a * &p - &p));
    let sym = op_norm(&(&a * &p - (&a * &p).adjoint())).max(op_norm(&(&p * &a - (&p * &a).adjoint())));
    let scale_a = op_norm(&a) * (1.0 + op_norm(&p));
    Ok(Outcome::residual(rel(e1.max(e2).max(sym), scale_a * scale_a), thr))
}

fn check_polar(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let n = dim(g, dims);
    let a = gaussian(g, n, n);
    let p = polar(&a, tol);
    Ok(Outcome::residual(rel(op_norm(&(&p.w * &p.p - &a)), op_norm(&a)), thr))
}

fn check_inertia(g: &mut TestRng, dims: usize, tol: &Tolerances, _thr: f64) -> Result<Outcome> {
    let n = dim(g, dims);
    let w = unitary(g, n);
    let signs: Vec<i32> = (0..n).map(|_| g.next_u64_mod(3) as i32 - 1).collect();
    let vals: Vec<f64> = signs.iter().map(|&s| s as f64 * uniform(g, 0.1, 2.0)).collect();
    let h = &w * real_diag(&vals) * w.adjoint();
    let inr = inertia(&h, tol)?;
    let ok = inr.n_neg == signs.iter().filter(|&&s| s < 0).count()
        && inr.n_zero == signs.iter().filter(|&&s| s == 0).count()
        && inr.n_pos == signs.iter().filter(|&&s| s > 0).count();
    Ok(Outcome::verdict(ok))
}

fn check_sandwich(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let (r, cols) = (dim(g, dims), dim(g, dims));
    let (rank_l, rank_r) = (g.next_u64_mod(r + 1), g.next_u64_mod(cols + 1));
    let l = psd_rank(g, r, rank_l);
    let rr = psd_rank(g, cols, rank_r);
    let m = &l * gaussian(g, r, cols) * &rr;
    let s = consistent_sandwich(&l, &m, &rr, tol);
    let res = rel(op_norm(&(&l * &s.x * &rr - &m)), op_norm(&m));
    Ok(Outcome { pass: s.consistent && res < thr, residual: res })
}

// ---- sector ----

fn check_cayley_roundtrip(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let n = dim(g, dims);
    let a = contraction(g, n, n, 0.9);
    let back = cayley_inv(&cayley(&a, tol)?, tol)?;
    Ok(Outcome::residual(op_norm(&(back - &a)), thr))
}

fn check_sectorial_cphi(g: &mut TestRng, dims: usize, tol: &Tolerances, _thr: f64) -> Result<Outcome> {
    let n = dim(g, dims);
    let phi = Angle::new(uniform(g, 0.1, 1.5))?;
    let a = sectorial(g, n, phi.radians());
    if !is_sectorial(&a, phi, tol)? {
        return Ok(Outcome::verdict(false));
    }
    Ok(Outcome::verdict(in_cphi(&cayley(&a, tol)?, phi, tol)?.in_class))
}

fn check_angle_form(g: &mut TestRng, dims: usize, tol: &Tolerances, _thr: f64) -> Result<Outcome> {
    let n = dim(g, dims);
    let phi = Angle::new(uniform(g, 0.1, FRAC_PI_2))?;
    let t = contraction(g, n, n, 1.0);
    let t = if g.next_u64_mod(2) == 0 { crate::matcore::re_part(&t) + scale(&im_part(&t), 0.2) } else { t };
    Ok(Outcome::verdict(lemma31_equiv_check(&t, phi, tol)? == in_cphi(&t, phi, tol)?.in_class))
}

// ---- balls ----

fn random_ball(g: &mut TestRng, dims: usize) -> OperatorBall {
    let (r, cols) = (dim(g, dims), dim(g, dims));
    OperatorBall { center: gaussian(g, r, cols), r_left: psd(g, r, 0.2, 1.5), r_right: psd(g, cols, 0.2, 1.5) }
}

fn check_ball_exactness(g: &mut TestRng, dims: usize, tol: &Tolerances, _thr: f64) -> Result<Outcome> {
    let ball = random_ball(g, dims);
    let (r, cols) = ball.center.shape();
    let k = unit_ball(g, r, cols);
    let inside = ball_member(&ball, &ball.point(&k), MEMBER_TOL, tol).member;
    let outside = ball_member(&ball, &ball.point(&crate::random::with_norm(g, r, cols, 1.05)), MEMBER_TOL, tol).member;
    Ok(Outcome::verdict(inside && !outside))
}

fn check_hole_membership(g: &mut TestRng, dims: usize, tol: &Tolerances, _thr: f64) -> Result<Outcome> {
    let ball = random_ball(g, dims);
    let (r, cols) = ball.center.shape();
    let qn = uniform(g, 0.0, 0.9);
    let q = crate::random::with_norm(g, r, cols, qn);
    let shift = &ball.r_left * &q * &ball.r_right;
    let hole = hole_make(&(&ball.center + &shift), &(&ball.center - &shift), &ball.r_left, &ball.r_right, tol)?;
    let k = sample_scale(g, r, cols, 1.6);
    let z = hole.point(&k);
    let param = op_norm(&(&k + &hole.q_shift)) <= 1.0 && op_norm(&(&k - &hole.q_shift)) <= 1.0;
    let balls = ball_member(&hole.ball_one, &z, MEMBER_TOL, tol).member && ball_member(&hole.ball_two, &z, MEMBER_TOL, tol).member;
    let hm = crate::balls::hole_member(&hole, &z, MEMBER_TOL, tol)?.member;
    Ok(Outcome::verdict(param == balls && balls == hm))
}

// ---- completion ----

fn check_thm21(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let pair = random_dual_pair(g, dims, tol)?;
    let (r, cols) = pair.corner_shape();
    let inside = op_norm(&complete(&pair, &unit_ball(g, r, cols))?) - 1.0;
    let outside = op_norm(&complete(&pair, &crate::random::with_norm(g, r, cols, 1.05))?);
    Ok(Outcome { pass: inside <= thr && outside > 1.0, residual: inside.max(0.0) })
}

fn check_recover_k(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let pair = random_dual_pair(g, dims, tol)?;
    let (r, cols) = pair.corner_shape();
    let k = unit_ball(g, r, cols);
    let (back, ok) = recover_k(&pair, &complete(&pair, &k)?, tol)?;
    let res = op_norm(&(back - pair.compress_k(&k, tol)));
    Ok(Outcome { pass: ok && res < thr, residual: res })
}

fn check_sectorial_verdict(g: &mut TestRng, dims: usize, tol: &Tolerances, _thr: f64) -> Result<Outcome> {
    let pair = random_symmetric_pair(g, dims, tol)?;
    let phi = random_admissible_angle(g, &pair, tol)?;
    let n2 = pair.u.ncols();
    let k = sample_scale(g, n2, n2, 1.5);
    let r = sectorial_complete(&pair, phi, &k, MEMBER_TOL, tol)?;
    Ok(Outcome::verdict(r.in_class == r.direct.in_class))
}

fn check_phi1_bisection(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let pair = random_symmetric_pair(g, dims, tol)?;
    let p1 = match critical_angle(&pair, tol)?.phi1 {
        Phi1::Angle(p) => p,
        Phi1::PiOverTwoOnly => return Ok(Outcome::verdict(false)),
    };
    let emp = empirical_phi1(&pair, 60, 40, g, tol)?;
    let res = (emp.phi1 - p1).abs();
    Ok(Outcome { pass: res < thr && emp.safety_net_hits == 0, residual: res })
}

fn check_krein(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let pair = random_proper_pair(g, dims, tol)?;
    let (tm, t_max) = extremal_pair(&pair)?;
    let n2 = pair.u.ncols();
    let k = crate::matcore::re_part(&unit_ball(g, n2, n2));
    let t = krein_param(&pair, &k)?;
    // Krein's extremes bound every selfadjoint contractive extension.
    let lo = crate::matcore::min_eig(&(&t - &tm));
    let hi = crate::matcore::min_eig(&(&t_max - &t));
    let direct = op_norm(&(&t - complete(&pair, &k)?));
    let res = direct.max((-lo).max(0.0)).max((-hi).max(0.0));
    Ok(Outcome::residual(res, thr))
}

fn check_u_ball(g: &mut TestRng, dims: usize, tol: &Tolerances, _thr: f64) -> Result<Outcome> {
    let (n1, n2) = (dim(g, dims), dim(g, dims));
    let t11 = hermitian(g, n1, 0.9);
    let d = psd_sqrt_clipped(&(eye(n1) - &t11 * &t11));
    let t21 = contraction(g, n2, n1, 0.9) * d;
    let phi = Angle::new(uniform(g, 0.2, 1.5))?;
    let ball = all_extensions_u_ball(&t11, &t21, phi, tol)?;
    let m = unit_ball(g, n2, n1).adjoint();
    let k = scale(&unit_ball(g, n2, n2), 0.5);
    let ext = all_extensions(&t11, &t21, phi, &m, &k, tol)?;
    let admissible = match ext.critical.phi1 {
        Phi1::Angle(p) => p <= phi.radians() + 1e-9,
        Phi1::PiOverTwoOnly => phi.is_half_pi(),
    };
    let contractive_u = op_norm(&ball.point(&m)) <= 1.0 + 1e-9;
    Ok(Outcome::verdict(admissible && contractive_u && ext.in_class == ext.direct.in_class))
}

fn check_column_balls(g: &mut TestRng, dims: usize, tol: &Tolerances, _thr: f64) -> Result<Outcome> {
    let pair = random_symmetric_pair(g, dims, tol)?;
    let phi = random_admissible_angle(g, &pair, tol)?;
    if phi.radians() == 0.0 {
        return Ok(Outcome::verdict(true));
    }
    let n2 = pair.u.ncols();
    let k = sample_scale(g, n2, n2, 1.5);
    let t = complete(&pair, &k)?;
    let balls = problem3_reduction(&pair.t11, &pair.t21, phi, tol)?;
    Ok(Outcome::verdict(problem3_member(&balls, &t, tol) == in_cphi(&t, phi, tol)?.in_class))
}

// ---- extremal ----

const THETA_ANGLES: [f64; 3] = [FRAC_PI_6, FRAC_PI_4, FRAC_PI_3];

fn check_k_theta(g: &mut TestRng, _dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let phi = Angle::new(THETA_ANGLES[g.next_u64_mod(3)])?;
    let theta = uniform(g, 0.0, 2.0 * std::f64::consts::PI);
    let cert = loone_certificate(&k_theta(theta, phi), &eye(2), phi, tol)?;
    let res = certificate_residual(&k_theta(theta, phi), &eye(2), phi, &cert);
    Ok(Outcome { pass: cert.verdict == Verdict::ExtremeCertified && res < thr, residual: res })
}

/// Largest of `‖D C D - sin2φ (K*Q)_I‖` and `max± ‖I - K±*K± - D(I ± C)D‖`.
pub fn certificate_residual(k: &CMatrix, q: &CMatrix, phi: Angle, cert: &crate::extremal::ExtremeCertificate) -> f64 {
    let n = k.ncols();
    let d = &cert.d_kq;
    let target = scale(&im_part(&(k.adjoint() * q)), (2.0 * phi.radians()).sin());
    let mut res = op_norm(&(d * &cert.c_matrix * d - target));
    for sign in [1.0, -1.0] {
        let kk = loone_shift(k, q, phi, sign > 0.0);
        let lhs = eye(n) - kk.adjoint() * &kk;
        res = res.max(op_norm(&(lhs - d * (eye(n) + scale(&cert.c_matrix, sign)) * d)));
    }
    res
}

fn check_loone_identity(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let n = dim(g, dims);
    let phi = Angle::new(uniform(g, 0.2, 1.5))?;
    let k = random_cphi(g, n, phi.radians(), tol)?;
    let cert = loone_certificate(&k, &eye(n), phi, tol)?;
    let res = certificate_residual(&k, &eye(n), phi, &cert);
    let bounded = op_norm(&cert.c_matrix) <= 1.0 + 1e-8;
    Ok(Outcome { pass: cert.consistent && bounded && res < thr, residual: res })
}

fn check_interior_not_certified(g: &mut TestRng, dims: usize, tol: &Tolerances, _thr: f64) -> Result<Outcome> {
    let n = dim(g, dims);
    let phi = Angle::new(uniform(g, 0.2, 1.5))?;
    let k = scale(&random_cphi(g, n, phi.radians(), tol)?, 0.9);
    let r = cphi_extreme_tests(&k, phi, tol)?;
    Ok(Outcome::verdict(r.verdict == Verdict::NotExtreme && r.boundary_pp_implies_normal))
}

// ---- schur ----

fn check_schur_identities(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let pair = random_symmetric_pair(g, dims, tol)?;
    let phi = random_admissible_angle(g, &pair, tol)?;
    let n2 = pair.u.ncols();
    let k = sample_scale(g, n2, n2, 2.0);
    Ok(Outcome::residual(thm43_residuals(&pair, &k, phi, tol)?.max(), thr))
}

/// A corner parameter whose shifted forms keep their singular values at
/// least `1e-6` away from 1, so the κ counts are not decided by rounding.
pub fn kappa_instance(g: &mut TestRng, dims: usize, tol: &Tolerances) -> Result<(DualPair, CMatrix, Angle)> {
    loop {
        let pair = random_symmetric_pair(g, dims, tol)?;
        let phi = random_admissible_angle(g, &pair, tol)?;
        let q = critical_angle(&pair, tol)?.q;
        let n2 = pair.u.ncols();
        let k = sample_scale(g, n2, n2, 2.0);
        let clear = [true, false].iter().all(|&plus| {
            crate::matcore::singular_values(&crate::completion::shifted_parameter(&pair, &q, &k, phi, plus, tol))
                .iter()
                .all(|s| (s - 1.0).abs() > 1e-6)
        });
        let t = complete(&pair, &k)?;
        let t_clear = [true, false].iter().all(|&plus| {
            crate::matcore::singular_values(&crate::sector::shift(&t, phi, plus)).iter().all(|s| (s - 1.0).abs() > 1e-6)
        });
        if clear && t_clear {
            return Ok((pair, k, phi));
        }
    }
}

fn check_kappa(g: &mut TestRng, dims: usize, tol: &Tolerances, _thr: f64) -> Result<Outcome> {
    let (pair, k, phi) = kappa_instance(g, dims, tol)?;
    Ok(Outcome::verdict(kappa_classify(&pair, &k, phi, tol)?.agree))
}

fn check_shorted_variational(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let n = dim(g, dims + 1).max(2);
    let rank = dim(g, n);
    let a = psd_rank(g, n, rank);
    let split = g.next_u64_mod(n - 1) + 1;
    let sh = shorted(&a, split, tol)?;
    let f = gaussian(g, n, 1);
    let inf = shorted_variational(&a, split, &f, 20, 0, tol)?;
    let closed = (f.adjoint() * &sh * &f)[(0, 0)].re;
    let res = (inf - closed).abs() / ((1.0 + op_norm(&a)) * (1.0 + op_norm(&f).powi(2)));
    let psd_ok = crate::matcore::min_eig(&sh) >= -1e-9 && crate::matcore::min_eig(&(&a - &sh)) >= -1e-9;
    Ok(Outcome { pass: psd_ok && res < thr, residual: res })
}

/// `B = t A_N + (small PSD corner kept below A - t A_N)` never exceeds `A_N`.
fn check_shorted_maximality(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let n = dim(g, dims + 1).max(2);
    let split = g.next_u64_mod(n - 1) + 1;
    let m = n - split;
    let a = psd(g, n, 0.05, 2.0);
    let sh = shorted(&a, split, tol)?;
    let t = uniform(g, 0.0, 1.0);
    let corner = crate::matcore::split_blocks(&sh, split, split)[3].clone();
    // Any PSD X ⪯ (1 - t) corner keeps B ⪯ A_N ⪯ A on the corner.
    let root = psd_sqrt_clipped(&corner);
    let w = contraction(g, m, m, 1.0);
    let x = scale(&(&root * w.adjoint() * &w * &root), uniform(g, 0.0, 1.0 - t));
    let b = scale(&sh, t)
        + crate::matcore::block2x2(
            &crate::matcore::zeros(split, split),
            &crate::matcore::zeros(split, m),
            &crate::matcore::zeros(m, split),
            &x,
        );
    let below_a = crate::matcore::min_eig(&(&a - &b));
    let below_short = crate::matcore::min_eig(&(&sh - &b));
    let res = (-below_short).max(0.0);
    Ok(Outcome { pass: below_a >= -thr && res < thr, residual: res })
}

fn check_shorted_defects(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let pair = random_symmetric_pair(g, dims, tol)?;
    let phi = random_admissible_angle(g, &pair, tol)?;
    let n2 = pair.u.ncols();
    // The midpoint K = 0 is admissible for φ ≥ φ1.
    let mut k = scale(&unit_ball(g, n2, n2), 0.2);
    if !sectorial_complete(&pair, phi, &k, MEMBER_TOL, tol)?.direct.in_class {
        k = crate::matcore::zeros(n2, n2);
    }
    Ok(Outcome::residual(shorted_defects(&pair, &k, phi, tol)?.residual, thr))
}

fn check_schur_inertia(g: &mut TestRng, dims: usize, tol: &Tolerances, _thr: f64) -> Result<Outcome> {
    let n1 = dim(g, dims);
    let n2 = dim(g, dims);
    let rank = dim(g, n1);
    let t11 = psd_rank(g, n1, rank);
    let root = psd_sqrt_clipped(&t11);
    let t12 = &root * gaussian(g, n1, n2);
    let t22 = hermitian(g, n2, 2.0);
    let t = crate::matcore::block2x2(&t11, &t12, &t12.adjoint(), &t22);
    // Keep eigenvalues of both sides away from zero.
    let sc = generalized_schur(&t, n1, tol)?;
    let near_zero = |h: &CMatrix| crate::schur::herm_spectrum(h).iter().any(|&l| l.abs() < 1e-6 && l != 0.0);
    if near_zero(&sc.complement) {
        return Ok(Outcome::verdict(true));
    }
    Ok(Outcome::verdict(lemma25_verify(&t, n1, tol)?))
}

// ---- triangular ----

fn random_tri(g: &mut TestRng, dims: usize, tol: &Tolerances) -> Result<TriPair> {
    let (a, b) = (dim(g, dims), dim(g, dims));
    let t11 = contraction(g, a, a, 0.9);
    let t22 = contraction(g, b, b, 0.9);
    TriPair::new(&t11, &t22, None, tol)
}

fn check_tri_ball(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let tp = random_tri(g, dims, tol)?;
    let (r, cols) = tp.k_shape();
    let k = sample_scale(g, r, cols, 1.5);
    let t = tri_complete(&tp, &k)?;
    let (back, ok) = tp.recover_k(&crate::triangular::corner_of(&tp, &t), 1.0, tol);
    let contractive = op_norm(&t) <= 1.0 + 1e-9;
    let param = op_norm(&back) <= 1.0 + 1e-9;
    let roundtrip = op_norm(&(&back - &k));
    Ok(Outcome { pass: ok && contractive == param && roundtrip < thr, residual: roundtrip })
}

fn check_tri_identities(g: &mut TestRng, dims: usize, tol: &Tolerances, thr: f64) -> Result<Outcome> {
    let tp = random_tri(g, dims, tol)?;
    let (r, cols) = tp.k_shape();
    let k = sample_scale(g, r, cols, 2.0);
    let res = tri_identities(&tp, &k, tol)?;
    Ok(Outcome::residual(res.g.max(res.s), thr))
}

/// Triangular pair with both blocks in C(φ) and a corner parameter that keeps
/// `I ± U_φ`, `I ± V_φ` nonsingular.
pub fn shmulyan_instance(g: &mut TestRng, dims: usize, tol: &Tolerances) -> Result<(TriPair, CMatrix)> {
    loop {
        let phi = Angle::new(uniform(g, 0.3, 1.4))?;
        let (a, b) = (dim(g, dims), dim(g, dims));
        let t11 = random_cphi(g, a, phi.radians(), tol)?;
        let t22 = random_cphi(g, b, phi.radians(), tol)?;
        let tp = TriPair::new(&t11, &t22, Some(phi), tol)?;
        let f = crate::triangular::shmulyan_factors(&tp, tol)?;
        let gap = |m: &CMatrix| {
            crate::schur::herm_spectrum(m).iter().map(|l| 1.0 - l.abs()).fold(f64::INFINITY, f64::min)
        };
        if f.consistent && gap(&f.u_phi) > 1e-6 && gap(&f.v_phi) > 1e-6 {
            let k = sample_scale(g, a, b, 1.5);
            return Ok((tp, k));
        }
    }
}

fn check_shmulyan(g: &mut TestRng, dims: usize, tol: &Tolerances, _thr: f64) -> Result<Outcome> {
    let (tp, k) = shmulyan_instance(g, dims, tol)?;
    let r = shmulyan_complete(&tp, &k, MEMBER_TOL, tol)?;
    Ok(Outcome::verdict(r.in_class == r.direct.in_class))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::MODULES.iter().chain([Suite::All].iter()) {
            assert_eq!(s.name().parse::<Suite>().unwrap(), *s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn small_run_is_clean_and_deterministic() {
        let tol = Tolerances::default();
        let a = run(Suite::All, 7, 5, 3, &tol, None);
        let fails: Vec<_> = a.verdicts.iter().filter(|v| v.failures > 0).collect();
        assert!(fails.is_empty(), "{fails:#?}");
        let b = run(Suite::All, 7, 5, 3, &tol, None);
        assert_eq!(a, b);
    }
}
