//! Diagnostics for generalized positive functions: the structure matrix of
//! an even realization, the positive real LMI, sampled kernel inertia and
//! boundary positivity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, hermitian_eigen, identity, kron, lstsq_min_norm, norm, vstack, zeros, CMatrix, Inertia};
use crate::quat::{quat_hermitian_inertia, QuatMatrix, Quaternion};
use crate::realization::{minimize, QuatRealization, Realization};
use crate::sampling;

/// Relative residual above which the structure equations count as inconsistent.
pub const STRUCTURE_RTOL: f64 = 1e-8;

/// Skew-Hermitian `H` with `H A = -A* H`, `H B = C*`, `C = -B* H` for the
/// realization it was computed from.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StructureMatrix {
    #[serde(with = "crate::io::cmatrix_serde")]
    pub h: CMatrix,
    pub skew_hermitian: bool,
    pub min_singular_value: f64,
    /// Largest residual of the three defining relations.
    pub residual: f64,
}

pub fn solve_structure_h(r: &Realization) -> Result<StructureMatrix> {
    if r.n_in() != r.n_out() {
        return Err(Error::NotEven("function is not square".into()));
    }
    let d = r.d();
    let dscale = 1.0 + linalg::max_abs(d);
    if linalg::max_abs(&(d - d.adjoint())) > STRUCTURE_RTOL * dscale {
        return Err(Error::NotEven("D is not Hermitian".into()));
    }
    let n = r.state_dim();
    if n == 0 {
        return Ok(StructureMatrix { h: zeros(0, 0), skew_hermitian: true, min_singular_value: f64::INFINITY, residual: 0.0 });
    }
    let (a, b, c) = (r.a(), r.b(), r.c());
    let m = r.n_in();
    let i = identity(n);
    // vec(H A + A* H) = (A^T (x) I + I (x) A*) vec H, column-major.
    let e1 = kron(&a.transpose(), &i) + kron(&i, &a.adjoint());
    // vec(H B) = (B^T (x) I) vec H.
    let e2 = kron(&b.transpose(), &i);
    // vec(B* H) = (I (x) B*) vec H.
    let e3 = kron(&i, &b.adjoint());
    let op = vstack(&[&e1, &e2, &e3]);
    let mut rhs = zeros(n * n + n * m + m * n, 1);
    for (k, v) in linalg::vectorize(&c.adjoint()).iter().enumerate() {
        rhs[(n * n + k, 0)] = *v;
    }
    for (k, v) in linalg::vectorize(&(-c)).iter().enumerate() {
        rhs[(n * n + n * m + k, 0)] = *v;
    }
    let x = lstsq_min_norm(&op, &rhs, 1e-13);
    let h = linalg::unvectorize(&x.column(0).into_owned(), n, n);
    let scale = (norm(a) + norm(b) + norm(c)) * (1.0 + norm(&h)) + 1.0;
    let residual = relations_residual(r, &h);
    if residual > STRUCTURE_RTOL * scale {
        return Err(Error::NotEven(format!("structure equations inconsistent (residual {residual:e})")));
    }
    let skew_defect = linalg::max_abs(&(&h + h.adjoint()));
    let skew_hermitian = skew_defect <= STRUCTURE_RTOL * (1.0 + linalg::max_abs(&h));
    let h = (&h - h.adjoint()) * c64(0.5, 0.0);
    let s = linalg::singular_values(&h);
    let min_sv = s.last().copied().unwrap_or(0.0);
    if min_sv <= 1e-10 * s[0].max(1e-300) {
        return Err(Error::NumericalFailure(format!(
            "structure matrix is singular (sigma_min {min_sv:e}); is the realization minimal?"
        )));
    }
    let residual = relations_residual(r, &h);
    Ok(StructureMatrix { h, skew_hermitian, min_singular_value: min_sv, residual })
}

fn relations_residual(r: &Realization, h: &CMatrix) -> f64 {
    let r1 = linalg::max_abs(&(h * r.a() + r.a().adjoint() * h));
    let r2 = linalg::max_abs(&(h * r.b() - r.c().adjoint()));
    let r3 = linalg::max_abs(&(r.c() + r.b().adjoint() * h));
    r1.max(r2).max(r3)
}

/// The blocks of `diag(H, I) [[A, B], [C, D]] + [[A, B], [C, D]]* diag(H, I)`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LmiReport {
    pub holds: bool,
    pub min_eig: f64,
    #[serde(with = "crate::io::cmatrix_serde")]
    pub q: CMatrix,
    #[serde(with = "crate::io::cmatrix_serde")]
    pub s: CMatrix,
    #[serde(with = "crate::io::cmatrix_serde")]
    pub r: CMatrix,
}

pub fn verify_positive_real_lmi(r: &Realization, h: &CMatrix) -> Result<LmiReport> {
    let n = r.state_dim();
    if h.shape() != (n, n) {
        return Err(Error::DimensionMismatch(format!("H is {:?}, state dimension is {n}", h.shape())));
    }
    if !r.is_proper() {
        return Err(Error::Unsupported("LMI for functions with a polynomial part".into()));
    }
    let q = h * r.a() + r.a().adjoint() * h;
    let s = h * r.b() + r.c().adjoint();
    let rr = r.d() + r.d().adjoint();
    let full = linalg::block2(&q, &s, &s.adjoint(), &rr);
    let (vals, _) = hermitian_eigen(&full);
    let min_eig = vals.first().copied().unwrap_or(f64::INFINITY);
    let scale = vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
    Ok(LmiReport { holds: min_eig >= -1e-10 * scale, min_eig, q, s, r: rr })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `(Phi(z) + Phi(w)*) / (z + conj w)`.
    Carat,
    /// `(I - S(z) S(w)*) / (z + conj w)`.
    Schur,
    /// `(Phi(p) + Phi(q)*) star (p + conj q)^{-star}` in the variable `p`.
    QuatCarat,
}

/// Function whose kernel is sampled.
pub enum Evaluable<'a> {
    Complex(&'a dyn Fn(Complex64) -> Result<CMatrix>),
    Quaternion(&'a dyn Fn(Quaternion) -> Result<QuatMatrix>),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KernelInertiaReport {
    pub kernel: KernelKind,
    pub grid: Vec<Quaternion>,
    pub grid_sizes: Vec<usize>,
    pub gram_inertia: Vec<Inertia>,
    pub kappa_estimate: usize,
    pub stabilized: bool,
}

/// Default grid: `count` points with log-spaced radii in `[0.1, 5]` and
/// angles in `(-pi/2, pi/2)`.
pub fn default_grid(count: usize) -> Vec<Complex64> {
    sampling::right_half_plane_points(count, 0.1, 5.0)
}

/// Drops grid points within `dist` of any pole.
pub fn grid_avoiding(points: &[Complex64], poles: &[Complex64], dist: f64) -> Vec<Complex64> {
    points
        .iter()
        .copied()
        .filter(|z| poles.iter().all(|p| (p - z).norm() > dist))
        .collect()
}

fn complex_of(p: Quaternion) -> Result<Complex64> {
    if p.y != 0.0 || p.z != 0.0 {
        return Err(Error::InvalidInput(format!("grid point {p} is not on the complex slice")));
    }
    Ok(c64(p.w, p.x))
}

/// Relative tolerance for the sign decision on Gram eigenvalues.
pub const GRAM_RTOL: f64 = 1e-9;

/// Inertia of the sampled Gram matrix on nested prefixes of `grid`
/// (about a quarter, a half and all of the points).
pub fn negative_squares(kind: KernelKind, f: Evaluable<'_>, grid: &[Quaternion]) -> Result<KernelInertiaReport> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("empty grid".into()));
    }
    for p in grid {
        if p.w <= 0.0 {
            return Err(Error::InvalidInput(format!("grid point {p} is not in the open right half-space")));
        }
    }
    let n = grid.len();
    let mut sizes: Vec<usize> = [n.div_ceil(4), n.div_ceil(2), n].to_vec();
    sizes.dedup();

    let gram_inertia = match (kind, f) {
        (KernelKind::Carat | KernelKind::Schur, Evaluable::Complex(func)) => {
            let pts: Vec<Complex64> = grid.iter().map(|&p| complex_of(p)).collect::<Result<_>>()?;
            let vals: Vec<CMatrix> = pts.iter().map(|&z| pole_as_input(func(z))).collect::<Result<_>>()?;
            let k = vals[0].nrows();
            let mut gram = zeros(n * k, n * k);
            for (i, zi) in pts.iter().enumerate() {
                for (j, zj) in pts.iter().enumerate() {
                    let denom = zi + zj.conj();
                    let blk = match kind {
                        KernelKind::Carat => (&vals[i] + vals[j].adjoint()) / denom,
                        _ => (identity(k) - &vals[i] * vals[j].adjoint()) / denom,
                    };
                    gram.view_mut((i * k, j * k), (k, k)).copy_from(&blk);
                }
            }
            let gram = (&gram + gram.adjoint()) * c64(0.5, 0.0);
            sizes
                .iter()
                .map(|&s| {
                    let sub = gram.view((0, 0), (s * k, s * k)).into_owned();
                    let (ev, _) = hermitian_eigen(&sub);
                    let scale = ev.iter().map(|v| v.abs()).fold(0.0, f64::max);
                    linalg::inertia_of_values(&ev, GRAM_RTOL * scale)
                })
                .collect::<Vec<_>>()
        }
        (KernelKind::QuatCarat, Evaluable::Quaternion(func)) => {
            let vals: Vec<QuatMatrix> = grid.iter().map(|&p| pole_as_input(func(p))).collect::<Result<_>>()?;
            let k = vals[0].nrows();
            let mut gram = QuatMatrix::zeros(n * k, n * k);
            for i in 0..n {
                for j in 0..n {
                    let blk = quat_carat_kernel_values(&vals[i], &vals[j], grid[i], grid[j])?;
                    for a in 0..k {
                        for b in 0..k {
                            gram[(i * k + a, j * k + b)] = blk[(a, b)];
                        }
                    }
                }
            }
            let gram = QuatMatrix::from_fn(n * k, n * k, |a, b| (gram[(a, b)] + gram[(b, a)].conj()) * 0.5);
            sizes
                .iter()
                .map(|&s| {
                    let sub = QuatMatrix::from_fn(s * k, s * k, |a, b| gram[(a, b)]);
                    let scale = sub.max_abs() * (s * k) as f64;
                    quat_hermitian_inertia(&sub, GRAM_RTOL * scale)
                })
                .collect::<Result<Vec<_>>>()?
        }
        _ => return Err(Error::InvalidInput("kernel kind does not match the function's field".into())),
    };
    let kappa_estimate = gram_inertia.last().map_or(0, |i| i.n_minus);
    let stabilized = gram_inertia.len() >= 2 && {
        let l = gram_inertia.len();
        gram_inertia[l - 1].n_minus == gram_inertia[l - 2].n_minus
    };
    Ok(KernelInertiaReport { kernel: kind, grid: grid.to_vec(), grid_sizes: sizes, gram_inertia, kappa_estimate, stabilized })
}

fn pole_as_input<T>(r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Pole { point, .. } => Error::InvalidInput(format!("grid point {point} lies on a pole")),
        other => other,
    })
}

/// `(Phi(p) + Phi(q)*) star (p + conj q)^{-star}` from the values
/// `phi_p = Phi(p)`, `phi_q = Phi(q)`: with `N = Phi(p) + Phi(q)*` it equals
/// `(|q|^2 + 2 Re(q) p + p^2)^{-1} (p N + N q)`.
pub fn quat_carat_kernel_values(phi_p: &QuatMatrix, phi_q: &QuatMatrix, p: Quaternion, q: Quaternion) -> Result<QuatMatrix> {
    let num = phi_p + &phi_q.adjoint();
    let r = Quaternion::real(q.norm_sqr()) + p * (2.0 * q.re()) + p * p;
    if r.norm() <= 1e-14 * (1.0 + p.norm_sqr() + q.norm_sqr()) {
        return Err(Error::Pole { point: p.to_string(), nearest: c64(-q.w, q.imag().norm()), distance: r.norm() });
    }
    let rinv = r.inv();
    Ok(QuatMatrix::from_fn(num.nrows(), num.ncols(), |a, b| rinv * (p * num[(a, b)] + num[(a, b)] * q)))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundaryReport {
    pub min_eig: f64,
    pub worst_point: Quaternion,
    pub samples: usize,
}

/// Imaginary-axis sample ordinates: zero and a symmetric log-spaced set.
fn axis_ordinates(samples: usize, scale: f64) -> Vec<f64> {
    let half = samples.saturating_sub(1) / 2;
    let mut ys = vec![0.0];
    for k in 0..half {
        let t = if half > 1 { k as f64 / (half - 1) as f64 } else { 0.5 };
        let y = 1e-3 * scale * (1e4f64).powf(t);
        ys.push(y);
        ys.push(-y);
    }
    ys
}

/// Smallest eigenvalue of the Hermitian part of `Phi(iy)` over sampled `y`.
pub fn boundary_positivity(r: &Realization, samples: usize) -> Result<BoundaryReport> {
    let scale = 1.0 + r.poles().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut best: Option<(f64, f64)> = None;
    let mut used = 0;
    for y in axis_ordinates(samples, scale) {
        let v = match r.evaluate(c64(0.0, y)) {
            Ok(v) => v,
            Err(Error::Pole { .. }) => continue,
            Err(e) => return Err(e),
        };
        used += 1;
        let m = linalg::min_hermitian_eigenvalue(&v);
        if best.is_none_or(|(b, _)| m < b) {
            best = Some((m, y));
        }
    }
    let (min_eig, y) = best.ok_or_else(|| Error::InvalidInput("all boundary samples hit poles".into()))?;
    Ok(BoundaryReport { min_eig, worst_point: Quaternion::new(0.0, y, 0.0, 0.0), samples: used })
}

/// Smallest eigenvalue of `Re Phi(p) = (Phi(p) + Phi(p)*)/2`.
pub fn quat_real_part_min_eig(v: &QuatMatrix) -> f64 {
    let h = QuatMatrix::from_fn(v.nrows(), v.ncols(), |a, b| (v[(a, b)] + v[(b, a)].conj()) * 0.5);
    linalg::min_hermitian_eigenvalue(&crate::quat::chi(&h))
}

/// Smallest eigenvalue of `Re Phi(t I)` over sampled `t` and 20 unit
/// imaginary quaternions `I`.
pub fn quat_boundary_positivity(r: &QuatRealization, samples: usize) -> Result<BoundaryReport> {
    let lifted = r.lift();
    let scale = 1.0 + lifted.poles().iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut best: Option<(f64, Quaternion)> = None;
    let mut used = 0;
    for u in sampling::unit_imaginary(20) {
        for t in axis_ordinates(samples, scale) {
            let p = u * t;
            let v = match r.evaluate_slice_with(&lifted, p) {
                Ok(v) => v,
                Err(Error::Pole { .. }) => continue,
                Err(e) => return Err(e),
            };
            used += 1;
            let m = quat_real_part_min_eig(&v);
            if best.is_none_or(|(b, _)| m < b) {
                best = Some((m, p));
            }
        }
    }
    let (min_eig, worst_point) = best.ok_or_else(|| Error::InvalidInput("all boundary samples hit poles".into()))?;
    Ok(BoundaryReport { min_eig, worst_point, samples: used })
}

/// `Phi^# = Phi`. The proper part is tested through the structure matrix of
/// a minimal realization, the polynomial part coefficientwise.
pub fn is_even(r: &Realization) -> bool {
    if r.n_in() != r.n_out() {
        return false;
    }
    let tol = STRUCTURE_RTOL * (1.0 + r.poly().iter().map(linalg::max_abs).fold(0.0, f64::max));
    for (k, p) in r.poly().iter().enumerate() {
        let target = if k % 2 == 0 { -p.adjoint() } else { p.adjoint() };
        if linalg::max_abs(&(p - target)) > tol {
            return false;
        }
    }
    let Ok(m) = minimize(r) else { return false };
    solve_structure_h(&m).is_ok()
}

/// Quaternionic evenness: the lift is even, and `Phi^#(x) = Phi(x)` at
/// sampled real points.
pub fn quat_is_even(r: &QuatRealization) -> bool {
    if !is_even(&r.lift()) {
        return false;
    }
    let sharp = r.sharp();
    let xs = [-1.7, -0.3, 0.45, 1.2, 2.9];
    for x in xs {
        let p = Quaternion::real(x);
        let (Ok(a), Ok(b)) = (r.evaluate_slice(p), sharp.evaluate_slice(p)) else { continue };
        if (&a - &b).max_abs() > 1e-8 * (1.0 + a.max_abs()) {
            return false;
        }
    }
    true
}
