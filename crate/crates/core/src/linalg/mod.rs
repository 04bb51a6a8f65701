//! Dense complex linear algebra at desk scale.
//!
//! Everything here works on `nalgebra::DMatrix<Complex64>`. Singular value
//! and Hermitian eigen decompositions come from nalgebra; the complex Schur
//! form, its reordering and the Jordan chain extraction are implemented in
//! the submodules.

mod eig;
mod schur;

pub use eig::{eig, eig_with_schur, ClusteredSchur, EigenCluster, EigenStructure, JordanChain};
pub use schur::{schur, SchurForm};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

/// Relative tolerance for "the solve was consistent" checks.
pub const SOLVE_TOL: f64 = 1e-9;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> CMatrix {
    CMatrix::zeros(r, c)
}

pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> CMatrix {
    assert_eq!(rows * cols, data.len());
    CMatrix::from_fn(rows, cols, |i, j| c64(data[i * cols + j], 0.0))
}

pub fn from_rows(rows: &[Vec<C64>]) -> CMatrix {
    let r = rows.len();
    let c = rows.first().map_or(0, |row| row.len());
    CMatrix::from_fn(r, c, |i, j| rows[i][j])
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

/// Frobenius norm.
pub fn norm(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    CMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Stack `blocks` vertically; all blocks must share a column count.
pub fn vstack(blocks: &[&CMatrix]) -> CMatrix {
    let cols = blocks.iter().map(|b| b.ncols()).max().unwrap_or(0);
    let rows: usize = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = zeros(rows, cols);
    let mut r0 = 0;
    for b in blocks {
        debug_assert!(b.nrows() == 0 || b.ncols() == cols);
        if b.ncols() == cols {
            out.view_mut((r0, 0), b.shape()).copy_from(*b);
        }
        r0 += b.nrows();
    }
    out
}

pub fn hstack(blocks: &[&CMatrix]) -> CMatrix {
    let rows = blocks.iter().map(|b| b.nrows()).max().unwrap_or(0);
    let cols: usize = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = zeros(rows, cols);
    let mut c0 = 0;
    for b in blocks {
        if b.nrows() == rows {
            out.view_mut((0, c0), b.shape()).copy_from(*b);
        }
        c0 += b.ncols();
    }
    out
}

/// `[[a, b], [c, d]]` with conformable blocks (empty blocks allowed).
pub fn block2(a: &CMatrix, b: &CMatrix, c: &CMatrix, d: &CMatrix) -> CMatrix {
    let r1 = a.nrows().max(b.nrows());
    let r2 = c.nrows().max(d.nrows());
    let c1 = a.ncols().max(c.ncols());
    let c2 = b.ncols().max(d.ncols());
    let mut out = zeros(r1 + r2, c1 + c2);
    out.view_mut((0, 0), a.shape()).copy_from(a);
    out.view_mut((0, c1), b.shape()).copy_from(b);
    out.view_mut((r1, 0), c.shape()).copy_from(c);
    out.view_mut((r1, c1), d.shape()).copy_from(d);
    out
}

/// Column-major vectorisation.
pub fn vectorize(m: &CMatrix) -> CVector {
    CVector::from_iterator(m.len(), m.iter().copied())
}

pub fn unvectorize(v: &CVector, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_iterator(rows, cols, v.iter().copied())
}

/// Full singular value decomposition with singular values sorted in
/// decreasing order. Returns `(U, sigma, V)` with `A = U diag(sigma) V*`,
/// `V` square (`cols x cols`), `U` of size `rows x cols` and `sigma` padded
/// with zeros to length `cols`.
///
/// Computed with faer: nalgebra's bidiagonal SVD loses up to ~1e-8 on nearly
/// diagonal matrices.
pub fn svd_full(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return (zeros(r, c), vec![0.0; c], identity(c));
    }
    let f = faer::Mat::<C64>::from_fn(r, c, |i, j| m[(i, j)]);
    let Ok(svd) = f.svd() else {
        return svd_full_fallback(m);
    };
    let (fu, fs, fv) = (svd.U(), svd.S().column_vector(), svd.V());
    let k = r.min(c);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| fs[b].re.total_cmp(&fs[a].re));
    let mut sigma: Vec<f64> = order.iter().map(|&i| fs[i].re).collect();
    sigma.resize(c, 0.0);
    // Columns of V: sorted singular directions first, then the rest.
    let vcols: Vec<usize> = order.iter().copied().chain(k..c).collect();
    let v = CMatrix::from_fn(c, c, |i, j| fv[(i, vcols[j])]);
    let u = CMatrix::from_fn(r, c, |i, j| if j < k { fu[(i, order[j])] } else { C64::new(0.0, 0.0) });
    (u, sigma, v)
}

fn svd_full_fallback(m: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (r, c) = m.shape();
    // Pad with zero rows so that V comes out square.
    let padded = if r < c { vstack(&[m, &zeros(c - r, c)]) } else { m.clone() };
    let svd = padded.svd(true, true);
    let u = svd.u.expect("requested U");
    let vt = svd.v_t.expect("requested V^T");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&i, &j| svd.singular_values[j].total_cmp(&svd.singular_values[i]));
    let sigma: Vec<f64> = order.iter().map(|&i| svd.singular_values[i]).collect();
    let v = CMatrix::from_fn(c, order.len(), |i, k| vt[(order[k], i)].conj());
    let u = CMatrix::from_fn(u.nrows(), order.len(), |i, k| u[(i, order[k])]);
    let u = u.rows(0, r).into_owned();
    (u, sigma, v)
}

pub fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let f = faer::Mat::<C64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)]);
    let mut s: Vec<f64> = match f.singular_values() {
        Ok(s) => s,
        Err(_) => m.clone().singular_values().iter().copied().collect(),
    };
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// Default rank threshold `max_dim * eps * sigma_max`.
pub fn default_rank_tol(m: &CMatrix) -> f64 {
    let smax = singular_values(m).first().copied().unwrap_or(0.0);
    m.nrows().max(m.ncols()) as f64 * f64::EPSILON * smax
}

/// Number of singular values above `tol` (absolute).
pub fn rank_with_tol(m: &CMatrix, tol: f64) -> usize {
    singular_values(m).iter().filter(|&&s| s > tol).count()
}

pub fn rank(m: &CMatrix) -> usize {
    rank_with_tol(m, default_rank_tol(m))
}

/// Orthonormal basis of the null space; singular values `<= tol` count as zero.
pub fn null_space(m: &CMatrix, tol: f64) -> CMatrix {
    let c = m.ncols();
    if m.nrows() == 0 {
        return identity(c);
    }
    let (_, sigma, v) = svd_full(m);
    let r = sigma.iter().filter(|&&s| s > tol).count();
    v.columns(r, c - r).into_owned()
}

/// Orthonormal basis of the column space.
pub fn orth(m: &CMatrix, tol: f64) -> CMatrix {
    if m.ncols() == 0 || m.nrows() == 0 {
        return zeros(m.nrows(), 0);
    }
    let (u, sigma, _) = svd_full(m);
    let r = sigma.iter().filter(|&&s| s > tol).count().min(u.ncols());
    u.columns(0, r).into_owned()
}

/// Minimum-norm least-squares solution of `a x = b` through the
/// pseudo-inverse; singular values below `rtol * sigma_max` are dropped.
pub fn lstsq_min_norm(a: &CMatrix, b: &CMatrix, rtol: f64) -> CMatrix {
    let (r, c) = a.shape();
    if c == 0 {
        return zeros(0, b.ncols());
    }
    if r == 0 {
        return zeros(c, b.ncols());
    }
    let (u, sigma, v) = svd_full(a);
    let smax = sigma.first().copied().unwrap_or(0.0);
    let cut = rtol * smax;
    let mut x = zeros(c, b.ncols());
    for (k, &s) in sigma.iter().enumerate() {
        if s <= cut || s == 0.0 || k >= u.ncols() {
            continue;
        }
        let uk = u.column(k);
        let vk = v.column(k);
        for col in 0..b.ncols() {
            let coef = uk.dotc(&b.column(col)) / s;
            for i in 0..c {
                x[(i, col)] += vk[i] * coef;
            }
        }
    }
    x
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "cannot invert a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    if a.nrows() == 0 {
        return Ok(zeros(0, 0));
    }
    let s = singular_values(a);
    let smin = *s.last().unwrap();
    if smin <= 1e-14 * s[0] || !smin.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "matrix is numerically singular (condition {:e})",
            s[0] / smin
        )));
    }
    a.clone()
        .try_inverse()
        .ok_or_else(|| Error::NumericalFailure("LU inversion failed".into()))
}

/// Solve `a x = b` for square nonsingular `a`.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.nrows() == 0 {
        return Ok(zeros(0, b.ncols()));
    }
    a.clone()
        .lu()
        .solve(b)
        .ok_or_else(|| Error::NumericalFailure("singular linear system".into()))
}

/// Eigen decomposition of the Hermitian part `(h + h*)/2`; eigenvalues ascending.
pub fn hermitian_eigen(h: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = h.nrows();
    if n == 0 {
        return (Vec::new(), zeros(0, 0));
    }
    let sym = (h + h.adjoint()) * c64(0.5, 0.0);
    let e = sym.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| e.eigenvalues[i].total_cmp(&e.eigenvalues[j]));
    let vals = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let vecs = CMatrix::from_fn(n, n, |r, k| e.eigenvectors[(r, order[k])]);
    (vals, vecs)
}

pub fn min_hermitian_eigenvalue(h: &CMatrix) -> f64 {
    hermitian_eigen(h).0.first().copied().unwrap_or(f64::INFINITY)
}

/// Square root of a Hermitian positive semidefinite matrix. Eigenvalues in
/// `[-tol, 0)` are clamped to zero; anything more negative is an error.
pub fn psd_sqrt(h: &CMatrix, tol: f64) -> Result<CMatrix> {
    let (vals, vecs) = hermitian_eigen(h);
    let scale = vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut d = zeros(vals.len(), vals.len());
    for (i, &v) in vals.iter().enumerate() {
        if v < -tol * scale {
            return Err(Error::NotGpe(format!("matrix has negative eigenvalue {v:e}")));
        }
        d[(i, i)] = c64(v.max(0.0).sqrt(), 0.0);
    }
    Ok(&vecs * d * vecs.adjoint())
}

/// Counts of eigenvalues above `tol`, within `[-tol, tol]`, and below `-tol`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub n_plus: usize,
    pub n_zero: usize,
    pub n_minus: usize,
}

impl Inertia {
    pub fn dim(&self) -> usize {
        self.n_plus + self.n_zero + self.n_minus
    }
}

pub fn inertia(h: &CMatrix, tol: f64) -> Result<Inertia> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch("inertia needs a square matrix".into()));
    }
    let skew = max_abs(&(h - h.adjoint()));
    if skew > tol.max(1e-12 * max_abs(h)) {
        return Err(Error::InvalidInput(format!(
            "matrix is not Hermitian (max |H - H*| = {skew:e})"
        )));
    }
    let (vals, _) = hermitian_eigen(h);
    Ok(inertia_of_values(&vals, tol))
}

pub(crate) fn inertia_of_values(vals: &[f64], tol: f64) -> Inertia {
    let mut out = Inertia { n_plus: 0, n_zero: 0, n_minus: 0 };
    for &v in vals {
        if v > tol {
            out.n_plus += 1;
        } else if v < -tol {
            out.n_minus += 1;
        } else {
            out.n_zero += 1;
        }
    }
    out
}

/// A subspace of `C^ambient_dim` given by a basis (columns).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceBasis {
    pub ambient_dim: usize,
    #[serde(with = "crate::io::cmatrix_serde")]
    pub basis: CMatrix,
}

impl SubspaceBasis {
    pub fn new(basis: CMatrix) -> Result<Self> {
        let k = basis.ncols();
        if k > 0 && rank_with_tol(&basis, 1e-10 * singular_values(&basis)[0]) < k {
            return Err(Error::InvalidInput("basis columns are linearly dependent".into()));
        }
        Ok(SubspaceBasis { ambient_dim: basis.nrows(), basis })
    }

    pub fn empty(n: usize) -> Self {
        SubspaceBasis { ambient_dim: n, basis: zeros(n, 0) }
    }

    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Orthonormalised sum `self + other`.
    pub fn join(&self, other: &SubspaceBasis) -> SubspaceBasis {
        let m = hstack(&[&self.basis, &other.basis]);
        let tol = 1e-10 * singular_values(&m).first().copied().unwrap_or(0.0);
        SubspaceBasis { ambient_dim: self.ambient_dim, basis: orth(&m, tol) }
    }

    /// Largest distance from a basis column to its orthogonal projection on `other`.
    pub fn contained_in(&self, other: &SubspaceBasis, tol: f64) -> bool {
        let q = orth(&other.basis, 1e-12);
        let proj = &q * (q.adjoint() * &self.basis);
        norm(&(&self.basis - proj)) <= tol * norm(&self.basis).max(1.0)
    }
}

/// Idempotent `P` with range `range_space` and kernel `kernel_space`.
pub fn projection_along(range_space: &SubspaceBasis, kernel_space: &SubspaceBasis) -> Result<CMatrix> {
    let n = range_space.ambient_dim;
    if kernel_space.ambient_dim != n {
        return Err(Error::DimensionMismatch("subspaces live in different spaces".into()));
    }
    let r = range_space.dim();
    let k = kernel_space.dim();
    if r + k != n {
        return Err(Error::NumericalFailure(format!(
            "direct sum condition fails: dim range {r} + dim kernel {k} != {n}"
        )));
    }
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    let rq = orth(&range_space.basis, 0.0);
    let kq = orth(&kernel_space.basis, 0.0);
    let m = hstack(&[&rq, &kq]);
    let s = singular_values(&m);
    let smin = s.last().copied().unwrap_or(0.0);
    if smin < 1e-10 * s[0] {
        return Err(Error::NumericalFailure(format!(
            "direct sum condition fails: range and kernel intersect (sigma_min {smin:e})"
        )));
    }
    let minv = inverse(&m)?;
    let mut sel = zeros(n, n);
    for i in 0..r {
        sel[(i, i)] = c64(1.0, 0.0);
    }
    Ok(&m * sel * minv)
}

/// Outcome of a Sylvester solve; inconsistency is a result, not an error.
#[derive(Debug, Clone, PartialEq)]
pub enum SylvesterSolution {
    Solved(CMatrix),
    Unsolvable { residual: f64 },
}

impl SylvesterSolution {
    pub fn solution(&self) -> Option<&CMatrix> {
        match self {
            SylvesterSolution::Solved(x) => Some(x),
            SylvesterSolution::Unsolvable { .. } => None,
        }
    }
}

/// Solve `P X - X Q = R` by vectorising into one linear system; when the
/// system is singular the minimum-norm solution is returned if consistent.
pub fn solve_sylvester(p: &CMatrix, q: &CMatrix, r: &CMatrix) -> Result<SylvesterSolution> {
    let n = p.nrows();
    let m = q.nrows();
    if p.ncols() != n || q.ncols() != m || r.shape() != (n, m) {
        return Err(Error::DimensionMismatch(format!(
            "Sylvester P X - X Q = R with P {:?}, Q {:?}, R {:?}",
            p.shape(),
            q.shape(),
            r.shape()
        )));
    }
    let op = kron(&identity(m), p) - kron(&q.transpose(), &identity(n));
    let rhs = CMatrix::from_column_slice(n * m, 1, vectorize(r).as_slice());
    let x = lstsq_min_norm(&op, &rhs, 1e-13);
    let residual = norm(&(&op * &x - &rhs));
    let scale = norm(&op) * norm(&x) + norm(&rhs);
    if residual > SOLVE_TOL * scale.max(1e-300) && residual > 1e-14 {
        return Ok(SylvesterSolution::Unsolvable { residual });
    }
    Ok(SylvesterSolution::Solved(unvectorize(&x.column(0).into_owned(), n, m)))
}
