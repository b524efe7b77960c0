//! The classes C(φ) of contractions whose shifts `T sinφ ± i cosφ` are again
//! contractions, sectorial matrices, the Cayley transform linking the two, and
//! the lens `L_φ` that contains the spectrum of every member of C(φ).

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matcore::{
    c, eye, herm_eig_unchecked, im_part, inertia, op_norm, re_part, scale, singular_values, CMatrix, Tolerances, C64,
};

/// Width of the boundary band used by [`region_classify`].
pub const BOUNDARY_BAND: f64 = 1e-9;

/// Half-angle in `[0, π/2]`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Angle(f64);

impl Angle {
    pub const ZERO: Angle = Angle(0.0);
    pub const HALF_PI: Angle = Angle(FRAC_PI_2);

    pub fn new(phi: f64) -> Result<Angle> {
        // Allow a rounding hair above π/2 so that callers passing computed
        // angles such as 90° converted to radians are not rejected.
        if !(0.0..=FRAC_PI_2 + 1e-12).contains(&phi) {
            return Err(Error::InvalidAngle(phi));
        }
        Ok(Angle(phi.min(FRAC_PI_2)))
    }

    pub fn from_degrees(deg: f64) -> Result<Angle> {
        Angle::new(deg.to_radians())
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    pub fn is_half_pi(self) -> bool {
        self.0 == FRAC_PI_2
    }

    pub fn sin(self) -> f64 {
        if self.is_half_pi() {
            1.0
        } else {
            self.0.sin()
        }
    }

    /// Exactly zero at π/2.
    pub fn cos(self) -> f64 {
        if self.is_half_pi() {
            0.0
        } else {
            self.0.cos()
        }
    }

    /// Exactly zero at π/2; infinite at 0.
    pub fn cot(self) -> f64 {
        self.cos() / self.sin()
    }
}

impl TryFrom<f64> for Angle {
    type Error = Error;
    fn try_from(v: f64) -> Result<Angle> {
        Angle::new(v)
    }
}

impl From<Angle> for f64 {
    fn from(a: Angle) -> f64 {
        a.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub in_class: bool,
    pub margin: f64,
    pub kappa_plus: usize,
    pub kappa_minus: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Region {
    Interior,
    BoundaryPlus,
    BoundaryMinus,
    BoundaryBoth,
    Exterior,
}

impl Region {
    pub fn in_lens(self) -> bool {
        self != Region::Exterior
    }

    pub fn on_boundary(self) -> bool {
        matches!(self, Region::BoundaryPlus | Region::BoundaryMinus | Region::BoundaryBoth)
    }
}

fn require_square(t: &CMatrix) -> Result<()> {
    if t.nrows() != t.ncols() {
        return Err(Error::DimensionMismatch(format!("expected a square matrix, got {}x{}", t.nrows(), t.ncols())));
    }
    Ok(())
}

/// `T sinφ + i cosφ I` for `plus`, `T sinφ - i cosφ I` otherwise.
pub fn shift(t: &CMatrix, phi: Angle, plus: bool) -> CMatrix {
    let sign = if plus { 1.0 } else { -1.0 };
    scale(t, phi.sin()) + eye(t.nrows()) * c(0.0, sign * phi.cos())
}

/// Number of singular values above `1 + slack`, which is the number of
/// negative eigenvalues of `I - X*X` outside the slack band.
pub fn kappa_of(x: &CMatrix, tol: &Tolerances) -> usize {
    singular_values(x).iter().filter(|&&s| s > 1.0 + tol.norm_slack).count()
}

/// Membership in C(φ) with margin and the negative indices κ± of
/// `I - T±*T±`, where `T± = T sinφ ± i cosφ I`.
pub fn in_cphi(t: &CMatrix, phi: Angle, tol: &Tolerances) -> Result<ClassReport> {
    require_square(t)?;
    if phi.radians() == 0.0 {
        let nrm = op_norm(t);
        let asym = op_norm(&(t - t.adjoint())) / 2.0;
        let margin = if asym <= tol.norm_slack * (1.0 + nrm) { 1.0 - nrm } else { -asym };
        let kappa = kappa_of(t, tol);
        return Ok(ClassReport { in_class: margin >= -tol.norm_slack, margin, kappa_plus: kappa, kappa_minus: kappa });
    }
    let tp = shift(t, phi, true);
    let tm = shift(t, phi, false);
    let margin = 1.0 - op_norm(&tp).max(op_norm(&tm));
    Ok(ClassReport {
        in_class: margin >= -tol.norm_slack,
        margin,
        kappa_plus: kappa_of(&tp, tol),
        kappa_minus: kappa_of(&tm, tol),
    })
}

/// Quadratic-form test: `I - T*T ± 2 cotφ T_I` both PSD.
///
/// The PSD floor is `(1 - (1 + slack)²)/sin²φ`, the image of the norm slack
/// under `sin²φ (I - T*T ∓ 2cotφ T_I) = I - T±*T±`, so the verdict matches
/// [`in_cphi`] off the tolerance boundary.
pub fn lemma31_equiv_check(t: &CMatrix, phi: Angle, tol: &Tolerances) -> Result<bool> {
    require_square(t)?;
    if phi.radians() == 0.0 {
        return Err(Error::InvalidAngle(0.0));
    }
    let n = t.nrows();
    let base = eye(n) - t.adjoint() * t;
    let ti = scale(&im_part(t), 2.0 * phi.cot());
    let s2 = phi.sin() * phi.sin();
    let floor = (1.0 - (1.0 + tol.norm_slack).powi(2)) / s2;
    let plus = herm_eig_unchecked(&(&base + &ti)).min();
    let minus = herm_eig_unchecked(&(&base - &ti)).min();
    Ok(plus >= floor && minus >= floor)
}

/// `A_R ± cotφ A_I ⪰ 0`: the numerical range lies in the sector `|arg z| ≤ φ`.
pub fn is_sectorial(a: &CMatrix, phi: Angle, tol: &Tolerances) -> Result<bool> {
    require_square(a)?;
    if phi.radians() == 0.0 {
        return Err(Error::InvalidAngle(0.0));
    }
    let ar = re_part(a);
    let ai = scale(&im_part(a), phi.cot());
    let floor = -tol.psd_tol * (1.0 + op_norm(a));
    Ok(herm_eig_unchecked(&(&ar + &ai)).min() >= floor && herm_eig_unchecked(&(&ar - &ai)).min() >= floor)
}

fn shifted_inverse(a: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    require_square(a)?;
    let n = a.nrows();
    let m = eye(n) + a;
    let sv = singular_values(&m);
    let smin = sv.last().copied().unwrap_or(1.0);
    let smax = sv.first().copied().unwrap_or(1.0);
    if smin <= tol.rank_tol * smax.max(1.0) {
        return Err(Error::SingularShift(smin));
    }
    m.lu().try_inverse().ok_or(Error::SingularShift(smin))
}

/// `X(A) = -I + 2(I + A)⁻¹`.
pub fn cayley(a: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let inv = shifted_inverse(a, tol)?;
    Ok(scale(&inv, 2.0) - eye(a.nrows()))
}

/// Inverse transform. `X` is an involution, so this is the same formula.
pub fn cayley_inv(t: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    cayley(t, tol)
}

/// Locate `z` relative to the two disks `|z sinφ ± i cosφ| ≤ 1`.
pub fn region_classify(z: C64, phi: Angle) -> Result<Region> {
    if phi.radians() == 0.0 {
        return Err(Error::InvalidAngle(0.0));
    }
    let (s, co) = (phi.sin(), phi.cos());
    let dp = (z * s + c(0.0, co)).norm();
    let dm = (z * s - c(0.0, co)).norm();
    if dp > 1.0 + BOUNDARY_BAND || dm > 1.0 + BOUNDARY_BAND || z.norm() > 1.0 + BOUNDARY_BAND {
        return Ok(Region::Exterior);
    }
    let on_p = (dp - 1.0).abs() <= BOUNDARY_BAND;
    let on_m = (dm - 1.0).abs() <= BOUNDARY_BAND;
    Ok(match (on_p, on_m) {
        (true, true) => Region::BoundaryBoth,
        (true, false) => Region::BoundaryPlus,
        (false, true) => Region::BoundaryMinus,
        (false, false) => Region::Interior,
    })
}

/// Point on the arc `|z sinφ ± i cosφ| = 1` of the lens boundary; `t ∈ [0, 1]`
/// runs from `+1` to `-1`.
pub fn lens_boundary_point(phi: Angle, t: f64, plus: bool) -> C64 {
    let (s, co) = (phi.sin(), phi.cos());
    let half = FRAC_PI_2 - phi.radians();
    if plus {
        let alpha = half + 2.0 * phi.radians() * t;
        (C64::from_polar(1.0, alpha) - c(0.0, co)) / s
    } else {
        let alpha = -half - 2.0 * phi.radians() * t;
        (C64::from_polar(1.0, alpha) + c(0.0, co)) / s
    }
}

/// Negative indices of the forms `Re(Bf,f) ± cotφ Im(Bf,f)`.
pub fn sector_kappa(b: &CMatrix, phi: Angle, tol: &Tolerances) -> Result<(usize, usize)> {
    require_square(b)?;
    if phi.radians() == 0.0 || phi.is_half_pi() {
        return Err(Error::InvalidAngle(phi.radians()));
    }
    let br = re_part(b);
    let bi = scale(&im_part(b), phi.cot());
    Ok((inertia(&(&br + &bi), tol)?.n_neg, inertia(&(&br - &bi), tol)?.n_neg))
}
