//! Dense complex linear algebra used by every other module.
//!
//! Matrices are `nalgebra::DMatrix<Complex64>`. Ranks are decided relative to
//! the largest singular value, PSD checks relative to the matrix norm. Operators
//! living on ranges of defect operators are stored full size; helpers here build
//! orthonormal range bases and compressions for the norm tests done elsewhere.

use nalgebra::linalg::SymmetricEigen;
use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Relative residual accepted by [`consistent_sandwich`].
pub const SANDWICH_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub rank_tol: f64,
    pub psd_tol: f64,
    pub norm_slack: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { rank_tol: 1e-10, psd_tol: 1e-9, norm_slack: 1e-9 }
    }
}

impl Tolerances {
    pub fn new(rank_tol: f64, psd_tol: f64, norm_slack: f64) -> Result<Self> {
        for v in [rank_tol, psd_tol, norm_slack] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::NonFinite);
            }
        }
        Ok(Tolerances { rank_tol, psd_tol, norm_slack })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub n_neg: usize,
    pub n_zero: usize,
    pub n_pos: usize,
}

/// Eigenvalues in descending order with matching unit eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermEig {
    /// `V f(Λ) V*`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        self.map_complex(|x| c(f(x), 0.0))
    }

    pub fn map_complex(&self, f: impl Fn(f64) -> C64) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let s = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= s;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn min(&self) -> f64 {
        self.values.last().copied().unwrap_or(0.0)
    }

    pub fn max(&self) -> f64 {
        self.values.first().copied().unwrap_or(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct Sandwich {
    pub x: CMatrix,
    pub consistent: bool,
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct Polar {
    pub w: CMatrix,
    pub p: CMatrix,
}

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn eye(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(r: usize, cols: usize) -> CMatrix {
    CMatrix::zeros(r, cols)
}

pub fn scale(a: &CMatrix, s: f64) -> CMatrix {
    a * c(s, 0.0)
}

pub fn scale_c(a: &CMatrix, s: C64) -> CMatrix {
    a * s
}

pub fn real_diag(values: &[f64]) -> CMatrix {
    let n = values.len();
    CMatrix::from_fn(n, n, |i, j| if i == j { c(values[i], 0.0) } else { c(0.0, 0.0) })
}

/// Build a matrix from real entries given row by row.
pub fn from_real_rows(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(data.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |i, j| c(data[i * cols + j], 0.0))
}

pub fn from_rows(rows: usize, cols: usize, data: &[C64]) -> CMatrix {
    assert_eq!(data.len(), rows * cols);
    CMatrix::from_fn(rows, cols, |i, j| data[i * cols + j])
}

pub fn scalar(z: C64) -> CMatrix {
    CMatrix::from_element(1, 1, z)
}

pub fn is_finite(a: &CMatrix) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Hermitian part `(A + A*)/2`.
pub fn re_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * c(0.5, 0.0)
}

/// Imaginary part `(A - A*)/(2i)`, itself Hermitian.
pub fn im_part(a: &CMatrix) -> CMatrix {
    (a - a.adjoint()) * c(0.0, -0.5)
}

pub fn herm_residual(a: &CMatrix) -> f64 {
    op_norm(&(a - a.adjoint()))
}

/// Thin SVD `A = U diag(s) V*`, `s` descending, `r = min(rows, cols)` terms.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: CMatrix,
    pub s: Vec<f64>,
    pub v: CMatrix,
}

/// SVD read off the Hermitian eigenproblem of `[[0, A], [A*, 0]]`, whose
/// eigenpairs are `±σ` with vectors `(u; ±v)/√2`. nalgebra's complex
/// bidiagonal SVD stops early enough to leave ~1e-9 reconstruction error on
/// some clustered spectra; the Hermitian solver does not.
pub fn svd(a: &CMatrix) -> Svd {
    let (m, n) = a.shape();
    let r = m.min(n);
    if r == 0 {
        return Svd { u: zeros(m, 0), s: Vec::new(), v: zeros(n, 0) };
    }
    let jw = block2x2(&zeros(m, m), a, &a.adjoint(), &zeros(n, n));
    let eig = herm_eig_unchecked(&jw);
    let root2 = std::f64::consts::SQRT_2;
    let mut u = zeros(m, r);
    let mut v = zeros(n, r);
    let mut s = Vec::with_capacity(r);
    for k in 0..r {
        let col = eig.vectors.column(k);
        let mut uk = col.rows(0, m).into_owned() * c(root2, 0.0);
        let mut vk = col.rows(m, n).into_owned() * c(root2, 0.0);
        // Near σ = 0 the ± pairs mix; renormalize so the vectors stay unit.
        let (nu, nv) = (uk.norm(), vk.norm());
        if nu > 0.0 {
            uk /= c(nu, 0.0);
        }
        if nv > 0.0 {
            vk /= c(nv, 0.0);
        }
        u.set_column(k, &uk);
        v.set_column(k, &vk);
        s.push(eig.values[k].max(0.0));
    }
    Svd { u, s, v }
}

pub fn op_norm(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let (m, n) = a.shape();
    let jw = block2x2(&zeros(m, m), a, &a.adjoint(), &zeros(n, n));
    herm_eig_unchecked(&jw).values[0].max(0.0)
}

pub fn singular_values(a: &CMatrix) -> Vec<f64> {
    if a.is_empty() {
        return Vec::new();
    }
    svd(a).s
}

pub fn is_contraction(a: &CMatrix, tol: &Tolerances) -> bool {
    op_norm(a) <= 1.0 + tol.norm_slack
}

fn check_square(a: &CMatrix, what: &str) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "{what} must be square, got {}x{}",
            a.nrows(),
            a.ncols()
        )));
    }
    Ok(())
}

fn normalize_phase(v: &mut CMatrix, col: usize) {
    let n = v.nrows();
    for i in 0..n {
        let z = v[(i, col)];
        if z.norm() > 1e-10 {
            let ph = z.conj() / z.norm();
            for k in 0..n {
                v[(k, col)] *= ph;
            }
            return;
        }
    }
}

/// Hermitian eigendecomposition with descending eigenvalues and phase-normalized
/// eigenvectors (first entry of non-negligible modulus made real positive).
pub fn herm_eig(h: &CMatrix, tol: &Tolerances) -> Result<HermEig> {
    check_square(h, "Hermitian input")?;
    let n = h.nrows();
    if n == 0 {
        return Ok(HermEig { values: Vec::new(), vectors: zeros(0, 0) });
    }
    let asym = herm_residual(h);
    if asym > tol.psd_tol * (1.0 + op_norm(h)) {
        return Err(Error::NonHermitian(asym));
    }
    Ok(herm_eig_unchecked(h))
}

pub(crate) fn herm_eig_unchecked(h: &CMatrix) -> HermEig {
    let n = h.nrows();
    if n == 0 {
        return HermEig { values: Vec::new(), vectors: zeros(0, 0) };
    }
    let eig = SymmetricEigen::new(re_part(h));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].partial_cmp(&eig.eigenvalues[i]).unwrap());
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
        normalize_phase(&mut vectors, dst);
    }
    HermEig { values, vectors }
}

fn psd_floor(eig: &HermEig, tol: &Tolerances) -> f64 {
    let scale = eig.values.iter().map(|x| x.abs()).fold(1.0, f64::max);
    -tol.psd_tol * scale
}

pub fn is_psd(h: &CMatrix, tol: &Tolerances) -> Result<bool> {
    let eig = herm_eig(h, tol)?;
    Ok(eig.min() >= psd_floor(&eig, tol))
}

/// Smallest eigenvalue of the Hermitian part.
pub fn min_eig(h: &CMatrix) -> f64 {
    herm_eig_unchecked(h).min()
}

pub fn max_eig(h: &CMatrix) -> f64 {
    herm_eig_unchecked(h).max()
}

/// Square root of a PSD matrix. Eigenvalues in `[-psd_tol * max(1, ‖H‖), 0]`
/// are clipped to zero.
/// Eigenvalues this close to zero, relative to the spectral radius, are
/// rounding noise. Taking square roots would lift 1e-16 to 1e-8, well above
/// any rank cut, so they are zeroed first.
const EIG_NOISE: f64 = 1e-13;

fn noise_free_sqrt(eig: &HermEig) -> CMatrix {
    let floor = EIG_NOISE * eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    eig.map(|x| if x > floor { x.sqrt() } else { 0.0 })
}

pub fn psd_sqrt(h: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let eig = herm_eig(h, tol)?;
    if eig.min() < psd_floor(&eig, tol) {
        return Err(Error::NotPsd(eig.min()));
    }
    Ok(noise_free_sqrt(&eig))
}

/// Square root with every negative eigenvalue clipped; callers have already
/// established positivity up to rounding.
pub(crate) fn psd_sqrt_clipped(h: &CMatrix) -> CMatrix {
    noise_free_sqrt(&herm_eig_unchecked(h))
}

/// `pinv(psd_sqrt(H))` computed from one eigendecomposition.
pub fn psd_pinv_sqrt(h: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let eig = herm_eig(h, tol)?;
    if eig.min() < psd_floor(&eig, tol) {
        return Err(Error::NotPsd(eig.min()));
    }
    let top = eig.max().max(0.0).sqrt();
    let cut = tol.rank_tol * top;
    let floor = EIG_NOISE * eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(eig.map(|x| {
        let s = x.max(0.0).sqrt();
        if top > 0.0 && s > cut && x > floor {
            1.0 / s
        } else {
            0.0
        }
    }))
}

/// `D_T = (I - T*T)^{1/2}`.
pub fn defect(t: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    let nrm = op_norm(t);
    if nrm > 1.0 + tol.norm_slack {
        return Err(Error::NotContraction(nrm));
    }
    Ok(psd_sqrt_clipped(&(eye(t.ncols()) - t.adjoint() * t)))
}

/// `D_{T*} = (I - TT*)^{1/2}`.
pub fn defect_adj(t: &CMatrix, tol: &Tolerances) -> Result<CMatrix> {
    defect(&t.adjoint(), tol)
}

/// Moore–Penrose pseudoinverse; singular values at or below `rank_tol * σ_max`
/// count as zero.
pub fn pinv(a: &CMatrix, tol: &Tolerances) -> CMatrix {
    let (r, cols) = a.shape();
    if a.is_empty() {
        return zeros(cols, r);
    }
    let d = svd(a);
    let smax = d.s.first().copied().unwrap_or(0.0);
    let mut out = zeros(cols, r);
    if smax == 0.0 {
        return out;
    }
    let cut = tol.rank_tol * smax;
    for (k, &s) in d.s.iter().enumerate() {
        if s > cut {
            out += (d.v.column(k) * d.u.column(k).adjoint()) * c(1.0 / s, 0.0);
        }
    }
    out
}

/// Solve `L X R = M` in the least-squares sense, `X = L⁺ M R⁺`, and report
/// whether the equation actually holds.
pub fn consistent_sandwich(l: &CMatrix, m: &CMatrix, r: &CMatrix, tol: &Tolerances) -> Sandwich {
    assert_eq!(l.nrows(), m.nrows(), "sandwich: L rows vs M rows");
    assert_eq!(r.ncols(), m.ncols(), "sandwich: R cols vs M cols");
    let x = pinv(l, tol) * m * pinv(r, tol);
    let residual = op_norm(&(l * &x * r - m));
    let consistent = residual <= SANDWICH_TOL * (1.0 + op_norm(m));
    Sandwich { x, consistent, residual }
}

pub fn inertia(h: &CMatrix, tol: &Tolerances) -> Result<Inertia> {
    let eig = herm_eig(h, tol)?;
    let s = 1.0 + eig.values.iter().map(|x| x.abs()).fold(0.0, f64::max);
    Ok(inertia_of_values(&eig.values, tol.psd_tol * s))
}

pub(crate) fn inertia_of_values(values: &[f64], thr: f64) -> Inertia {
    let mut out = Inertia { n_neg: 0, n_zero: 0, n_pos: 0 };
    for &x in values {
        if x < -thr {
            out.n_neg += 1;
        } else if x > thr {
            out.n_pos += 1;
        } else {
            out.n_zero += 1;
        }
    }
    out
}

/// `A = W P` with `P = (A*A)^{1/2}` and `W*W` the projection onto `ran P`.
pub fn polar(a: &CMatrix, tol: &Tolerances) -> Polar {
    let (r, cols) = a.shape();
    if a.is_empty() {
        return Polar { w: zeros(r, cols), p: zeros(cols, cols) };
    }
    let d = svd(a);
    let smax = d.s.first().copied().unwrap_or(0.0);
    let mut w = zeros(r, cols);
    let mut p = zeros(cols, cols);
    for (k, &s) in d.s.iter().enumerate() {
        let vk = d.v.column(k);
        if s > tol.rank_tol * smax && s > 0.0 {
            w += d.u.column(k) * vk.adjoint();
        }
        p += (vk * vk.adjoint()) * c(s, 0.0);
    }
    Polar { w, p }
}

/// Every singular value is within `tol` of 0 or 1.
pub fn is_partial_isometry(w: &CMatrix, tol: f64) -> bool {
    singular_values(w).iter().all(|&s| s.abs() <= tol || (s - 1.0).abs() <= tol)
}

/// `W*W = I` or `WW* = I`: all `min(rows, cols)` singular values equal 1.
pub fn is_maximal_partial_isometry(w: &CMatrix, tol: f64) -> bool {
    singular_values(w).iter().all(|&s| (s - 1.0).abs() <= tol)
}

/// Orthonormal basis (as columns) of the column space of `a`.
pub fn range_basis(a: &CMatrix, tol: &Tolerances) -> CMatrix {
    let r = a.nrows();
    if a.is_empty() {
        return zeros(r, 0);
    }
    let d = svd(a);
    let smax = d.s.first().copied().unwrap_or(0.0);
    let keep: Vec<usize> = (0..d.s.len()).filter(|&k| smax > 0.0 && d.s[k] > tol.rank_tol * smax).collect();
    let mut out = zeros(r, keep.len());
    for (j, &k) in keep.iter().enumerate() {
        out.set_column(j, &d.u.column(k));
    }
    out
}

/// Orthogonal projection onto the column space of `a`.
pub fn range_projector(a: &CMatrix, tol: &Tolerances) -> CMatrix {
    let b = range_basis(a, tol);
    &b * b.adjoint()
}

/// `Bl* M Br`: the matrix of `M` between the spans of two orthonormal bases.
pub fn compress(m: &CMatrix, left: &CMatrix, right: &CMatrix) -> CMatrix {
    left.adjoint() * m * right
}

/// For a contraction `Q` that is not a maximal partial isometry, a nonzero `E`
/// with `Q + E` and `Q - E` both contractions.
///
/// `E = ε D_{Q*} y x* D_Q` with `x`, `y` top eigenvectors of the two defects;
/// `ε = 0.4` keeps `2ε + ε²` below 1.
pub fn midpoint_split(q: &CMatrix, tol: &Tolerances) -> Option<CMatrix> {
    let (r, cols) = q.shape();
    if r == 0 || cols == 0 || is_maximal_partial_isometry(q, 1e-8) {
        return None;
    }
    let dq = defect(q, tol).ok()?;
    let dqa = defect_adj(q, tol).ok()?;
    let ex = herm_eig_unchecked(&dq);
    let ey = herm_eig_unchecked(&dqa);
    if ex.max() <= 1e-12 || ey.max() <= 1e-12 {
        return None;
    }
    let x = ex.vectors.column(0).into_owned();
    let y = ey.vectors.column(0).into_owned();
    Some((&dqa * y * x.adjoint() * &dq) * c(0.4, 0.0))
}

/// Assemble `[[a11, a12], [a21, a22]]`.
pub fn block2x2(a11: &CMatrix, a12: &CMatrix, a21: &CMatrix, a22: &CMatrix) -> CMatrix {
    let (r1, c1) = a11.shape();
    let (r2, c2) = a22.shape();
    assert_eq!(a12.shape(), (r1, c2), "block (1,2) shape");
    assert_eq!(a21.shape(), (r2, c1), "block (2,1) shape");
    let mut out = zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), (r1, c1)).copy_from(a11);
    out.view_mut((0, c1), (r1, c2)).copy_from(a12);
    out.view_mut((r1, 0), (r2, c1)).copy_from(a21);
    out.view_mut((r1, c1), (r2, c2)).copy_from(a22);
    out
}

/// Split into the four blocks with the (1,1) block of size `r1 x c1`.
pub fn split_blocks(m: &CMatrix, r1: usize, c1: usize) -> [CMatrix; 4] {
    let (r, cols) = m.shape();
    assert!(r1 <= r && c1 <= cols, "split point outside matrix");
    [
        m.view((0, 0), (r1, c1)).into_owned(),
        m.view((0, c1), (r1, cols - c1)).into_owned(),
        m.view((r1, 0), (r - r1, c1)).into_owned(),
        m.view((r1, c1), (r - r1, cols - c1)).into_owned(),
    ]
}

pub fn vstack(top: &CMatrix, bottom: &CMatrix) -> CMatrix {
    assert_eq!(top.ncols(), bottom.ncols());
    let mut out = zeros(top.nrows() + bottom.nrows(), top.ncols());
    out.view_mut((0, 0), top.shape()).copy_from(top);
    out.view_mut((top.nrows(), 0), bottom.shape()).copy_from(bottom);
    out
}

pub fn hstack(left: &CMatrix, right: &CMatrix) -> CMatrix {
    assert_eq!(left.nrows(), right.nrows());
    let mut out = zeros(left.nrows(), left.ncols() + right.ncols());
    out.view_mut((0, 0), left.shape()).copy_from(left);
    out.view_mut((0, left.ncols()), right.shape()).copy_from(right);
    out
}

/// Eigenvalues of a general square matrix via complex Schur form.
pub fn eigenvalues(a: &CMatrix) -> Vec<C64> {
    if a.is_empty() {
        return Vec::new();
    }
    let schur = nalgebra::linalg::Schur::new(a.clone());
    let (_, t) = schur.unpack();
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{gaussian, rng};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn herm_eig_diagonal_and_identity() {
        let e = herm_eig(&from_real_rows(2, 2, &[-1.0, 0.0, 0.0, 2.0]), &tol()).unwrap();
        assert_eq!(e.values, vec![2.0, -1.0]);
        assert!((e.vectors[(1, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((e.vectors[(0, 1)] - c(1.0, 0.0)).norm() < 1e-15);
        let e = herm_eig(&eye(3), &tol()).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn herm_eig_reconstructs_random() {
        let mut g = rng(7);
        for _ in 0..20 {
            let a = gaussian(&mut g, 4, 4);
            let h = &a + a.adjoint();
            let e = herm_eig(&h, &tol()).unwrap();
            let bound = 1e-12 * 4.0 * op_norm(&h);
            assert!(op_norm(&(e.map(|x| x) - &h)) < bound);
            assert!(op_norm(&(e.vectors.adjoint() * &e.vectors - eye(4))) < 1e-12 * 4.0);
            for w in e.values.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let a = from_real_rows(2, 2, &[0.0, 1.0, 0.0, 0.0]);
        assert!(matches!(herm_eig(&a, &tol()), Err(Error::NonHermitian(_))));
    }

    #[test]
    fn psd_sqrt_examples() {
        let s = psd_sqrt(&from_real_rows(2, 2, &[4.0, 0.0, 0.0, 0.0]), &tol()).unwrap();
        assert!(op_norm(&(s - from_real_rows(2, 2, &[2.0, 0.0, 0.0, 0.0]))) < 1e-14);
        let mut g = rng(3);
        let w = crate::random::unitary(&mut g, 2);
        let h = &w * real_diag(&[9.0, 1.0]) * w.adjoint();
        let s = psd_sqrt(&h, &tol()).unwrap();
        assert!(op_norm(&(s - &w * real_diag(&[3.0, 1.0]) * w.adjoint())) < 1e-12);
        assert!(matches!(psd_sqrt(&real_diag(&[1.0, -0.1]), &tol()), Err(Error::NotPsd(_))));
        let clipped = psd_sqrt(&real_diag(&[1.0, -1e-12]), &tol()).unwrap();
        assert_eq!(clipped[(1, 1)], c(0.0, 0.0));
    }

    #[test]
    fn defect_examples() {
        assert!(op_norm(&(defect(&zeros(3, 3), &tol()).unwrap() - eye(3))) < 1e-15);
        let phi = std::f64::consts::FRAC_PI_3;
        let t = from_real_rows(2, 2, &[0.0, phi.sin(), 0.0, 0.0]);
        let d = defect(&t, &tol()).unwrap();
        assert!(op_norm(&(d - real_diag(&[1.0, 0.5]))) < 1e-12);
        assert!(matches!(defect(&scalar(c(1.5, 0.0)), &tol()), Err(Error::NotContraction(_))));
    }

    #[test]
    fn pinv_examples() {
        let p = pinv(&real_diag(&[2.0, 0.0]), &tol());
        assert!(op_norm(&(p - real_diag(&[0.5, 0.0]))) < 1e-15);
        let mut g = rng(11);
        let a = gaussian(&mut g, 3, 1) * gaussian(&mut g, 1, 3);
        let p = pinv(&a, &tol());
        let s = op_norm(&a);
        assert!(op_norm(&(&a * &p * &a - &a)) < 1e-10 * s);
        assert!(op_norm(&(&p * &a * &p - &p)) < 1e-10 / s);
        assert!(herm_residual(&(&a * &p)) < 1e-10);
        assert!(herm_residual(&(&p * &a)) < 1e-10);
    }

    #[test]
    fn sandwich_examples() {
        let mut g = rng(5);
        let m = gaussian(&mut g, 2, 2);
        let s = consistent_sandwich(&eye(2), &m, &eye(2), &tol());
        assert!(s.consistent && op_norm(&(s.x - &m)) < 1e-14);
        let s = consistent_sandwich(&real_diag(&[1.0, 0.0]), &real_diag(&[0.0, 1.0]), &eye(2), &tol());
        assert!(!s.consistent);
        let l = gaussian(&mut g, 3, 3);
        let r = gaussian(&mut g, 2, 2);
        let b = gaussian(&mut g, 3, 2);
        let m = &l * &b * &r;
        let s = consistent_sandwich(&l, &m, &r, &tol());
        assert!(s.consistent);
        assert!(op_norm(&(&l * &s.x * &r - &m)) < 1e-10 * (1.0 + op_norm(&m)));
    }

    #[test]
    fn inertia_examples() {
        let i = inertia(&real_diag(&[1.0, -2.0, 0.0]), &tol()).unwrap();
        assert_eq!(i, Inertia { n_neg: 1, n_zero: 1, n_pos: 1 });
        let i = inertia(&(-eye(2)), &tol()).unwrap();
        assert_eq!(i, Inertia { n_neg: 2, n_zero: 0, n_pos: 0 });
    }

    #[test]
    fn isometry_examples() {
        let row = from_real_rows(1, 2, &[1.0, 0.0]);
        assert!(is_partial_isometry(&row, 1e-10) && is_maximal_partial_isometry(&row, 1e-10));
        let d = real_diag(&[1.0, 0.0]);
        assert!(is_partial_isometry(&d, 1e-10) && !is_maximal_partial_isometry(&d, 1e-10));
        let mut g = rng(9);
        let a = gaussian(&mut g, 3, 4);
        let p = polar(&a, &tol());
        assert!(op_norm(&(&p.w * &p.p - &a)) < 1e-10);
        assert!(is_partial_isometry(&p.w, 1e-10));
    }

    #[test]
    fn midpoint_split_of_diag() {
        let q = real_diag(&[1.0, 0.0]);
        let e = midpoint_split(&q, &tol()).unwrap();
        assert!(op_norm(&e) > 0.1);
        assert!(op_norm(&(&q + &e)) <= 1.0 + 1e-12);
        assert!(op_norm(&(&q - &e)) <= 1.0 + 1e-12);
        assert!(midpoint_split(&eye(2), &tol()).is_none());
    }

    #[test]
    fn blocks_round_trip() {
        let mut g = rng(1);
        let m = gaussian(&mut g, 5, 4);
        let [a, b, cc, d] = split_blocks(&m, 2, 3);
        assert_eq!(block2x2(&a, &b, &cc, &d), m);
    }
}
