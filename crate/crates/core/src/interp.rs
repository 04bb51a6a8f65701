//! Interpolation by generalized positive even functions: directional
//! interpolation over the complex numbers, the even-polynomial cone method for
//! scalar data, and full-value interpolation over the quaternions.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factorization::{factor_regularized, factor_scalar_polynomial, pseudo_spectral_factor, FactorizationResult, Side};
use crate::io::{parse_complex, parse_quaternion};
use crate::linalg::{self, c64, identity, lstsq_min_norm, psd_sqrt, zeros, CMatrix, C64};
use crate::poly;
use crate::quat::{QuatMatrix, Quaternion};
use crate::realization::Realization;
use crate::slicefun::{star_product, SlicePolynomial};

/// Relative tolerance for coincident points and the symmetric-pair tests.
pub const POINT_RTOL: f64 = 1e-10;
/// Relative residual accepted from the interpolation linear systems.
pub const SOLVE_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintKind {
    /// `T(point) = value`.
    Value,
    /// `T^#(point) = value`.
    SharpValue,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub point: C64,
    pub kind: ConstraintKind,
    pub value: CMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuatConstraint {
    pub point: Quaternion,
    pub kind: ConstraintKind,
    pub value: QuatMatrix,
}

fn same_point(a: C64, b: C64) -> bool {
    (a - b).norm() <= POINT_RTOL * (1.0 + a.norm().max(b.norm()))
}

fn same_quat(a: Quaternion, b: Quaternion) -> bool {
    (a - b).norm() <= POINT_RTOL * (1.0 + a.norm().max(b.norm()))
}

/// A positive semidefinite `A` with `A xi = eta`.
pub fn positive_matrix_for(xi: &CMatrix, eta: &CMatrix) -> Result<CMatrix> {
    if xi.ncols() != 1 || eta.shape() != xi.shape() {
        return Err(Error::DimensionMismatch("xi and eta must be columns of equal length".into()));
    }
    let nx = xi.norm();
    if nx == 0.0 {
        return Err(Error::InvalidInput("xi must be nonzero".into()));
    }
    let n = xi.nrows();
    let ne = eta.norm();
    if ne <= 1e-14 * nx {
        return Ok(identity(n) - xi * xi.adjoint() / c64(nx * nx, 0.0));
    }
    let s = (xi.adjoint() * eta)[(0, 0)];
    let tol = 1e-12 * nx * ne;
    if s.im.abs() > tol || s.re <= tol {
        return Err(Error::Infeasible(format!(
            "no positive matrix maps xi to eta: xi* eta = {s} is not positive"
        )));
    }
    Ok(eta * eta.adjoint() / c64(s.re, 0.0))
}

/// Value constraints with distinct points; a repeated point must repeat its value.
fn merge_values(items: Vec<(C64, CMatrix)>) -> Result<Vec<(C64, CMatrix)>> {
    let mut out: Vec<(C64, CMatrix)> = Vec::new();
    for (z, v) in items {
        match out.iter().find(|(w, _)| same_point(*w, z)) {
            Some((_, prev)) => {
                if (prev - &v).norm() > SOLVE_RTOL * (1.0 + prev.norm()) {
                    return Err(Error::Infeasible(format!("conflicting values prescribed at {z}")));
                }
            }
            None => out.push((z, v)),
        }
    }
    Ok(out)
}

/// Minimal-degree matrix polynomial (ascending coefficients) meeting the
/// constraints. A sharp-value constraint at `z` is the value constraint
/// `T(-conj z) = value*`.
pub fn lagrange_matrix_polynomial(constraints: &[Constraint]) -> Result<Vec<CMatrix>> {
    let shape = constraints
        .first()
        .map(|c| c.value.shape())
        .ok_or_else(|| Error::InvalidInput("no constraints".into()))?;
    if constraints.iter().any(|c| c.value.shape() != shape) {
        return Err(Error::DimensionMismatch("constraint values differ in shape".into()));
    }
    let items = constraints
        .iter()
        .map(|c| match c.kind {
            ConstraintKind::Value => (c.point, c.value.clone()),
            ConstraintKind::SharpValue => (-c.point.conj(), c.value.adjoint()),
        })
        .collect();
    let pts = merge_values(items)?;
    let m = pts.len();
    let v = CMatrix::from_fn(m, m, |j, a| pts[j].0.powu(a as u32));
    let (r, c) = shape;
    let rhs = CMatrix::from_fn(m, r * c, |j, k| pts[j].1[(k / c, k % c)]);
    let sol = linalg::solve(&v, &rhs)?;
    let mut coeffs: Vec<CMatrix> = (0..m).map(|a| CMatrix::from_fn(r, c, |i, k| sol[(a, i * c + k)])).collect();
    let scale = coeffs.iter().map(linalg::max_abs).fold(0.0, f64::max);
    while coeffs.len() > 1 && coeffs.last().is_some_and(|x| linalg::max_abs(x) <= 1e-14 * scale) {
        coeffs.pop();
    }
    Ok(coeffs)
}

/// A condition on an `n x n` polynomial at one point.
enum Cond {
    Full(CMatrix),
    Direction { xi: CMatrix, target: CMatrix },
}

/// Minimum-norm polynomial of degree `#points - 1` meeting full-value and
/// directional conditions at distinct points. Rows decouple.
fn directional_polynomial(n: usize, conds: &[(C64, Cond)]) -> Result<Vec<CMatrix>> {
    let deg = conds.len() - 1;
    let unknowns = (deg + 1) * n;
    let eqs: usize = conds.iter().map(|(_, c)| if matches!(c, Cond::Full(_)) { n } else { 1 }).sum();
    let mut coeffs = vec![zeros(n, n); deg + 1];
    for row in 0..n {
        let mut a = zeros(eqs, unknowns);
        let mut b = zeros(eqs, 1);
        let mut e = 0;
        for (w, cond) in conds {
            match cond {
                Cond::Full(v) => {
                    for k in 0..n {
                        for p in 0..=deg {
                            a[(e, p * n + k)] = w.powu(p as u32);
                        }
                        b[(e, 0)] = v[(row, k)];
                        e += 1;
                    }
                }
                Cond::Direction { xi, target } => {
                    for p in 0..=deg {
                        for k in 0..n {
                            a[(e, p * n + k)] = w.powu(p as u32) * xi[(k, 0)];
                        }
                    }
                    b[(e, 0)] = target[(row, 0)];
                    e += 1;
                }
            }
        }
        let x = lstsq_min_norm(&a, &b, 1e-13);
        let res = (&a * &x - &b).norm();
        if res > SOLVE_RTOL * (1.0 + b.norm()) {
            return Err(Error::NumericalFailure(format!("Lagrange system residual {res:e}")));
        }
        for p in 0..=deg {
            for k in 0..n {
                coeffs[p][(row, k)] = x[(p * n + k, 0)];
            }
        }
    }
    Ok(coeffs)
}

fn poly_sharp(p: &[CMatrix]) -> Vec<CMatrix> {
    p.iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 0 { c.adjoint() } else { -c.adjoint() })
        .collect()
}

fn poly_mul(p: &[CMatrix], q: &[CMatrix]) -> Vec<CMatrix> {
    let (r, c) = (p[0].nrows(), q[0].ncols());
    let mut out = vec![zeros(r, c); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

fn poly_add(acc: &mut Vec<CMatrix>, p: &[CMatrix]) {
    if acc.len() < p.len() {
        let (r, c) = p[0].shape();
        acc.resize(p.len(), zeros(r, c));
    }
    for (a, b) in acc.iter_mut().zip(p) {
        *a += b;
    }
}

/// Directional interpolation `L^#(w) L(w) xi = eta` at every node.
#[derive(Debug, Clone, Serialize)]
pub struct GpeInterpolation {
    /// Ascending matrix coefficients of `Phi = L^# L`.
    #[serde(with = "cmatrix_vec")]
    pub phi_coeffs: Vec<CMatrix>,
    pub phi: Realization,
    pub factor: FactorizationResult,
    /// A multiple of `q^# q I`, `q` vanishing at the nodes, was added to make
    /// the leading coefficient invertible.
    pub padded: bool,
    /// `max_u |L^#(w_u) L(w_u) xi_u - eta_u|`.
    pub node_residual: f64,
}

mod cmatrix_vec {
    use crate::linalg::CMatrix;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &[CMatrix], s: S) -> Result<S::Ok, S::Error> {
        #[derive(serde::Serialize)]
        struct W<'a>(#[serde(with = "crate::io::cmatrix_serde")] &'a CMatrix);
        s.collect_seq(v.iter().map(W))
    }
}

pub fn gpe_interpolate(nodes: &[C64], directions: &[CMatrix], targets: &[CMatrix], side: Side) -> Result<GpeInterpolation> {
    let count = nodes.len();
    if count == 0 || directions.len() != count || targets.len() != count {
        return Err(Error::InvalidInput("need one direction and one target per node".into()));
    }
    let n = directions[0].nrows();
    for (xi, eta) in directions.iter().zip(targets) {
        if xi.shape() != (n, 1) || eta.shape() != (n, 1) {
            return Err(Error::DimensionMismatch(format!("directions and targets must be {n}x1 columns")));
        }
        if xi.norm() == 0.0 {
            return Err(Error::InvalidInput("directions must be nonzero".into()));
        }
    }
    for u in 0..count {
        for v in 0..u {
            if same_point(nodes[u], nodes[v]) {
                return Err(Error::InvalidInput(format!("node {} repeated", nodes[u])));
            }
        }
    }
    let zero_col = zeros(n, 1);
    let others = |skip: &[usize]| -> Vec<(C64, Cond)> {
        (0..count)
            .filter(|j| !skip.contains(j))
            .map(|j| (nodes[j], Cond::Direction { xi: directions[j].clone(), target: zero_col.clone() }))
            .collect()
    };
    let mut phi: Vec<CMatrix> = vec![zeros(n, n)];
    let mut done = vec![false; count];
    for u in 0..count {
        if done[u] {
            continue;
        }
        done[u] = true;
        let w = nodes[u];
        let partner = (0..count).find(|&v| same_point(nodes[v], -w.conj()));
        let q = match partner {
            // imaginary-axis node: Q(w) = A^{1/2} with A >= 0, A xi = eta
            Some(v) if v == u => {
                let a = positive_matrix_for(&directions[u], &targets[u]).map_err(|e| match e {
                    Error::Infeasible(m) => Error::Infeasible(format!("axis node {w}: {m}")),
                    other => other,
                })?;
                let mut conds = others(&[u]);
                conds.push((w, Cond::Full(psd_sqrt(&a, 1e-12)?)));
                directional_polynomial(n, &conds)?
            }
            // symmetric pair w_v = -conj(w_u): one term serves both nodes
            Some(v) => {
                done[v] = true;
                let m = pair_matrix(&directions[u], &targets[u], &directions[v], &targets[v]).map_err(|e| match e {
                    Error::Infeasible(m) => Error::Infeasible(format!("nodes {w} and {}: {m}", nodes[v])),
                    other => other,
                })?;
                let mut conds = others(&[u, v]);
                conds.push((w, Cond::Full(m)));
                conds.push((nodes[v], Cond::Full(identity(n))));
                directional_polynomial(n, &conds)?
            }
            None => {
                let mut conds = others(&[u]);
                conds.push((w, Cond::Direction { xi: directions[u].clone(), target: targets[u].clone() }));
                conds.push((-w.conj(), Cond::Full(identity(n))));
                directional_polynomial(n, &conds)?
            }
        };
        poly_add(&mut phi, &poly_mul(&poly_sharp(&q), &q));
    }
    let scale = phi.iter().map(linalg::max_abs).fold(0.0, f64::max);
    while phi.len() > 1 && phi.last().is_some_and(|c| linalg::max_abs(c) <= 1e-13 * scale) {
        phi.pop();
    }
    let top = phi.last().expect("nonempty");
    let sv = linalg::singular_values(top);
    let padded = sv.last().copied().unwrap_or(0.0) <= 1e-8 * scale;
    if padded {
        let q = poly::from_roots(nodes);
        let qq = poly::mul(&poly::sharp(&q), &q);
        let s = scale / qq.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let pad: Vec<CMatrix> = qq.iter().map(|c| identity(n) * (c * s)).collect();
        poly_add(&mut phi, &pad);
    }
    let phi_r = Realization::polynomial(&phi)?;
    let factor = match pseudo_spectral_factor(&phi_r, side) {
        Err(Error::SingularD { .. }) | Err(Error::Unsupported(_)) => factor_regularized(&phi_r, side)?,
        other => other?,
    };
    let l = &factor.factor;
    let ls = l.sharp();
    let mut node_residual: f64 = 0.0;
    for u in 0..count {
        let v = ls.evaluate(nodes[u])? * l.evaluate(nodes[u])? * &directions[u];
        node_residual = node_residual.max((v - &targets[u]).norm());
    }
    Ok(GpeInterpolation { phi_coeffs: phi, phi: phi_r, factor, padded, node_residual })
}

/// `M` with `M xi_u = eta_u` and `M* xi_v = eta_v`; exists iff
/// `xi_v* eta_u = eta_v* xi_u`.
fn pair_matrix(xi_u: &CMatrix, eta_u: &CMatrix, xi_v: &CMatrix, eta_v: &CMatrix) -> Result<CMatrix> {
    let a = (xi_v.adjoint() * eta_u)[(0, 0)];
    let b = (eta_v.adjoint() * xi_u)[(0, 0)];
    let tol = SOLVE_RTOL * (1.0 + xi_v.norm() * eta_u.norm() + eta_v.norm() * xi_u.norm());
    if (a - b).norm() > tol {
        return Err(Error::Infeasible(format!(
            "symmetric nodes need xi_v* eta_u = eta_v* xi_u, got {a} and {b}"
        )));
    }
    let su = xi_u.norm_squared();
    let sv = xi_v.norm_squared();
    Ok(eta_u * xi_u.adjoint() / c64(su, 0.0) + xi_v * eta_v.adjoint() / c64(sv, 0.0)
        - xi_v * xi_u.adjoint() * (a / (su * sv)))
}

/// Scalar even interpolation by the cone method.
#[derive(Debug, Clone, Serialize)]
pub struct EvenInterpolation {
    /// Interpolant of the even-extended data from the Vandermonde system.
    #[serde(with = "c64_vec")]
    pub coeffs: Vec<C64>,
    /// `q^# q`, vanishing at every extended node.
    #[serde(with = "c64_vec")]
    pub phi0: Vec<C64>,
    pub beta: f64,
    /// `coeffs + beta * phi0`, trimmed.
    #[serde(with = "c64_vec")]
    pub phi: Vec<C64>,
    pub side: Side,
    #[serde(with = "c64_vec")]
    pub factor: Vec<C64>,
    #[serde(with = "c64_vec")]
    pub factor_roots: Vec<C64>,
    /// Smallest sampled value of `Phi(iy)`.
    pub boundary_min: f64,
    /// `max |Phi(w) - value|` over the extended nodes.
    pub residual: f64,
}

mod c64_vec {
    use num_complex::Complex64;
    use serde::Serializer;

    pub fn serialize<S: Serializer>(v: &[Complex64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|z| [z.re, z.im]))
    }
}

pub const BETA_MAX_EXPONENT: u32 = 16;

/// Smallest sampled `Re Phi(iy)`, with y = 0 and +-log-spaced magnitudes.
fn axis_minimum(p: &[C64], s: f64) -> f64 {
    let mut m = poly::eval(p, c64(0.0, 0.0)).re;
    for k in 0..=400 {
        let y = s * 10f64.powf(-3.0 + 6.0 * k as f64 / 400.0);
        for sign in [1.0, -1.0] {
            m = m.min(poly::eval(p, c64(0.0, sign * y)).re);
        }
    }
    m
}

pub fn even_polynomial_interpolate(nodes: &[C64], values: &[C64], side: Side) -> Result<EvenInterpolation> {
    if nodes.is_empty() || nodes.len() != values.len() {
        return Err(Error::InvalidInput("need one value per node".into()));
    }
    let ext = merge_values(
        nodes
            .iter()
            .zip(values)
            .flat_map(|(&w, &v)| [(w, CMatrix::from_element(1, 1, v)), (-w, CMatrix::from_element(1, 1, v))])
            .collect(),
    )?;
    let pts: Vec<C64> = ext.iter().map(|(w, _)| *w).collect();
    let vals: Vec<C64> = ext.iter().map(|(_, v)| v[(0, 0)]).collect();
    let m = pts.len();
    let v = CMatrix::from_fn(m, m, |j, a| pts[j].powu(a as u32));
    let coeffs: Vec<C64> = linalg::solve(&v, &CMatrix::from_fn(m, 1, |j, _| vals[j]))?.iter().copied().collect();
    let vscale = 1.0 + vals.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let residual_of = |p: &[C64]| pts.iter().zip(&vals).map(|(&w, &y)| (poly::eval(p, w) - y).norm()).fold(0.0, f64::max);
    let sym: Vec<C64> = coeffs.iter().zip(poly::sharp(&coeffs)).map(|(a, b)| (a + b) * 0.5).collect();
    if residual_of(&sym) > SOLVE_RTOL * vscale {
        return Err(Error::Infeasible("data admit no interpolant with Phi^# = Phi".into()));
    }
    let mut roots: Vec<C64> = Vec::new();
    for &e in &pts {
        if !roots.iter().any(|&r| same_point(e, r) || same_point(e, -r.conj())) {
            roots.push(e);
        }
    }
    let q = poly::from_roots(&roots);
    let phi0 = poly::mul(&poly::sharp(&q), &q);
    let s = 1.0 + pts.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let betas = std::iter::once(0.0).chain((0..=BETA_MAX_EXPONENT).map(|k| 2f64.powi(k as i32)));
    for beta in betas {
        let mut phi = sym.clone();
        phi.resize(phi.len().max(phi0.len()), c64(0.0, 0.0));
        for (a, b) in phi.iter_mut().zip(&phi0) {
            *a += b * beta;
        }
        let pscale = phi.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let phi = poly::trim(&phi, 1e-13 * pscale);
        let bmin = axis_minimum(&phi, s);
        if bmin < -1e-10 * pscale {
            continue;
        }
        let Ok(factor) = factor_scalar_polynomial(&phi, side) else { continue };
        let factor_roots = if factor.len() > 1 { poly::roots(&factor)? } else { Vec::new() };
        let residual = residual_of(&phi);
        return Ok(EvenInterpolation { coeffs, phi0, beta, phi, side, factor, factor_roots, boundary_min: bmin, residual });
    }
    Err(Error::Infeasible(format!(
        "no beta up to 2^{BETA_MAX_EXPONENT} gave a sampled positivity certificate (not a proof of nonexistence)"
    )))
}

// Quaternionic two-sided interpolation. Every entry of a matrix polynomial
// with right coefficients is a scalar slice polynomial, and both left and
// right point evaluations act entrywise, so the problem splits into 4x4 real
// blocks per entry.

fn qvec(q: Quaternion) -> [f64; 4] {
    [q.w, q.x, q.y, q.z]
}

fn basis(b: usize) -> Quaternion {
    [Quaternion::ONE, Quaternion::I, Quaternion::J, Quaternion::K][b]
}

/// Real 4x4 matrix of `x -> q x`.
fn left_mult(q: Quaternion) -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |r, b| qvec(q * basis(b))[r])
}

/// Real 4x4 matrix of `x -> x q`.
fn right_mult(q: Quaternion) -> DMatrix<f64> {
    DMatrix::from_fn(4, 4, |r, b| qvec(basis(b) * q)[r])
}

/// Minimum-norm least squares; `None` when the residual is not small.
fn least_squares(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let (r, c) = a.shape();
    let f = faer::Mat::<f64>::from_fn(r, c, |i, j| a[(i, j)]);
    let Ok(svd) = f.thin_svd() else {
        let svd = a.clone().svd(true, true);
        let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
        return svd.solve(b, f64::EPSILON * r.max(c) as f64 * smax).expect("singular vectors were computed");
    };
    let (u, s, v) = (svd.U(), svd.S().column_vector(), svd.V());
    let smax = (0..s.nrows()).map(|k| s[k]).fold(0.0, f64::max);
    let tol = (f64::EPSILON * r.max(c) as f64 * smax).max(f64::MIN_POSITIVE);
    let mut x = DVector::<f64>::zeros(c);
    for k in 0..s.nrows() {
        if s[k] > tol {
            let coef = (0..r).map(|i| u[(i, k)] * b[i]).sum::<f64>() / s[k];
            for i in 0..c {
                x[i] += v[(i, k)] * coef;
            }
        }
    }
    x
}

fn real_solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let x = least_squares(a, b);
    ((a * &x - b).norm() <= SOLVE_RTOL * (1.0 + b.norm())).then_some(x)
}

/// Solution `X` of `q X - X p = R` used to certify a (left, right) pair.
#[derive(Debug, Clone, Serialize)]
pub struct SylvesterWitness {
    /// Index of the left (value) constraint in the input list.
    pub left: usize,
    /// Index of the right (sharp-value) constraint in the input list.
    pub right: usize,
    pub x: QuatMatrix,
}

#[derive(Debug, Clone, Serialize)]
pub struct QuatLagrange {
    pub polynomial: SlicePolynomial,
    pub sylvester: Vec<SylvesterWitness>,
}

/// Spheres holding three or more of the points, if any.
fn crowded_sphere(points: &[Quaternion]) -> Option<Quaternion> {
    points.iter().copied().find(|&p| {
        let tol = POINT_RTOL * (1.0 + p.norm());
        points.iter().filter(|&&o| p.same_sphere(o, tol)).count() >= 3
    })
}

/// Slice polynomial `T(p) = sum p^a T_a` with `T(q_j) = C_j` for value
/// constraints and `T^#(r_k) = D_k` for sharp-value constraints. The latter
/// read `sum T_a (-conj r_k)^a = D_k*`; each (left, right) pair must admit a
/// solution of `q_j X - X (-conj r_k) = C_j - D_k*`.
pub fn quat_lagrange_matrix_polynomial(constraints: &[QuatConstraint]) -> Result<QuatLagrange> {
    let (rows, cols) = constraints
        .first()
        .map(|c| c.value.shape())
        .ok_or_else(|| Error::InvalidInput("no constraints".into()))?;
    if constraints.iter().any(|c| c.value.shape() != (rows, cols)) {
        return Err(Error::DimensionMismatch("constraint values differ in shape".into()));
    }
    let mut left: Vec<(usize, Quaternion, QuatMatrix)> = Vec::new();
    let mut right: Vec<(usize, Quaternion, QuatMatrix)> = Vec::new();
    for (idx, c) in constraints.iter().enumerate() {
        let (list, pt, val) = match c.kind {
            ConstraintKind::Value => (&mut left, c.point, c.value.clone()),
            ConstraintKind::SharpValue => (&mut right, -c.point.conj(), c.value.adjoint()),
        };
        match list.iter().find(|(_, p, _)| same_quat(*p, pt)) {
            Some((_, _, prev)) => {
                if (prev - &val).max_abs() > SOLVE_RTOL * (1.0 + prev.max_abs()) {
                    return Err(Error::Infeasible(format!("conflicting values prescribed at {}", c.point)));
                }
            }
            None => list.push((idx, pt, val)),
        }
    }
    let all: Vec<Quaternion> = left.iter().chain(&right).map(|(_, p, _)| *p).collect();
    if let Some(p) = crowded_sphere(&all) {
        return Err(Error::InvalidInput(format!("three or more constraint points lie on the sphere of {p}")));
    }
    let mut sylvester = Vec::new();
    for (jl, q, c) in &left {
        for (kr, p, d) in &right {
            let m = left_mult(*q) - right_mult(*p);
            let mut x = QuatMatrix::zeros(rows, cols);
            for r in 0..rows {
                for s in 0..cols {
                    let rhs = DVector::from_row_slice(&qvec(c[(r, s)] - d[(r, s)]));
                    let sol = real_solve(&m, &rhs).ok_or_else(|| {
                        Error::Infeasible(format!(
                            "constraints {jl} and {kr}: q X - X p = C - D has no solution (q = {q}, p = {p}, entry ({r},{s}))"
                        ))
                    })?;
                    x[(r, s)] = Quaternion::new(sol[0], sol[1], sol[2], sol[3]);
                }
            }
            sylvester.push(SylvesterWitness { left: *jl, right: *kr, x });
        }
    }
    let m = all.len();
    // Least-squares solve for one entry; returns the coefficients and the
    // relative residual.
    let solve_entry = |r: usize, s: usize, deg: usize| -> (Vec<Quaternion>, f64) {
        let mut a = DMatrix::<f64>::zeros(4 * m, 4 * (deg + 1));
        let mut b = DVector::<f64>::zeros(4 * m);
        for (e, (_, pt, val)) in left.iter().enumerate() {
            for k in 0..=deg {
                a.view_mut((4 * e, 4 * k), (4, 4)).copy_from(&left_mult(pt.powi(k)));
            }
            b.rows_mut(4 * e, 4).copy_from_slice(&qvec(val[(r, s)]));
        }
        for (e, (_, pt, val)) in right.iter().enumerate() {
            let e = e + left.len();
            for k in 0..=deg {
                a.view_mut((4 * e, 4 * k), (4, 4)).copy_from(&right_mult(pt.powi(k)));
            }
            b.rows_mut(4 * e, 4).copy_from_slice(&qvec(val[(r, s)]));
        }
        let x = least_squares(&a, &b);
        let res = (&a * &x - &b).norm() / (1.0 + b.norm());
        ((0..=deg).map(|k| Quaternion::new(x[4 * k], x[4 * k + 1], x[4 * k + 2], x[4 * k + 3])).collect(), res)
    };
    // The lowest degree can be consistent only up to rounding; keep going
    // until the system is solved to working precision.
    let mut best: Option<(Vec<QuatMatrix>, f64)> = None;
    for deg in (m - 1)..=(2 * m) {
        let mut coeffs = vec![QuatMatrix::zeros(rows, cols); deg + 1];
        let mut worst: f64 = 0.0;
        for r in 0..rows {
            for s in 0..cols {
                let (t, res) = solve_entry(r, s, deg);
                worst = worst.max(res);
                for (k, v) in t.into_iter().enumerate() {
                    coeffs[k][(r, s)] = v;
                }
            }
        }
        if best.as_ref().is_none_or(|(_, b)| worst < *b) {
            best = Some((coeffs, worst));
        }
        if worst <= 1e-13 {
            break;
        }
    }
    match best {
        Some((coeffs, res)) if res <= SOLVE_RTOL => Ok(QuatLagrange { polynomial: SlicePolynomial::new(coeffs)?, sylvester }),
        _ => Err(Error::Infeasible("two-sided interpolation system has no polynomial solution".into())),
    }
}

/// Full-value quaternionic interpolation `Phi(p_u) = Phi_u` with
/// `Phi = sum_u L_u * L_u^#`, `L_u(p_j) = delta_uj I` and `L_u^#(p_u) = Phi_u`.
#[derive(Debug, Clone, Serialize)]
pub struct QuatInterpolation {
    pub phi: SlicePolynomial,
    pub terms: Vec<SlicePolynomial>,
    pub sylvester: Vec<Vec<SylvesterWitness>>,
    /// `max_u |Phi(p_u) - Phi_u|`.
    pub node_residual: f64,
}

pub fn quat_gpe_interpolate(nodes: &[Quaternion], values: &[QuatMatrix]) -> Result<QuatInterpolation> {
    if nodes.is_empty() || nodes.len() != values.len() {
        return Err(Error::InvalidInput("need one value per node".into()));
    }
    let n = values[0].nrows();
    if values.iter().any(|v| v.shape() != (n, n)) {
        return Err(Error::DimensionMismatch(format!("values must all be {n}x{n}")));
    }
    for u in 0..nodes.len() {
        for v in 0..u {
            if same_quat(nodes[u], nodes[v]) {
                return Err(Error::InvalidInput(format!("node {} repeated", nodes[u])));
            }
        }
    }
    if let Some(p) = crowded_sphere(nodes) {
        return Err(Error::InvalidInput(format!("three or more nodes lie on the sphere of {p}")));
    }
    let mut phi: Option<SlicePolynomial> = None;
    let mut terms = Vec::new();
    let mut sylvester = Vec::new();
    for (u, value) in values.iter().enumerate() {
        let mut cs: Vec<QuatConstraint> = nodes
            .iter()
            .enumerate()
            .map(|(j, &p)| QuatConstraint {
                point: p,
                kind: ConstraintKind::Value,
                value: if j == u { QuatMatrix::identity(n) } else { QuatMatrix::zeros(n, n) },
            })
            .collect();
        cs.push(QuatConstraint { point: nodes[u], kind: ConstraintKind::SharpValue, value: value.clone() });
        let lag = quat_lagrange_matrix_polynomial(&cs).map_err(|e| match e {
            Error::Infeasible(m) => Error::Infeasible(format!("node {u}: {m}")),
            other => other,
        })?;
        let term = star_product(&lag.polynomial, &lag.polynomial.sharp())?;
        phi = Some(match phi {
            None => term,
            Some(acc) => add_slice(&acc, &term)?,
        });
        terms.push(lag.polynomial);
        sylvester.push(lag.sylvester);
    }
    let phi = phi.expect("at least one node");
    let node_residual = nodes
        .iter()
        .zip(values)
        .map(|(&p, v)| (&phi.evaluate(p) - v).max_abs())
        .fold(0.0, f64::max);
    Ok(QuatInterpolation { phi, terms, sylvester, node_residual })
}

fn add_slice(a: &SlicePolynomial, b: &SlicePolynomial) -> Result<SlicePolynomial> {
    let (r, c) = a.shape();
    let len = a.coeffs().len().max(b.coeffs().len());
    let zero = QuatMatrix::zeros(r, c);
    let coeffs = (0..len)
        .map(|k| {
            let x = a.coeffs().get(k).unwrap_or(&zero);
            let y = b.coeffs().get(k).unwrap_or(&zero);
            x + y
        })
        .collect();
    SlicePolynomial::new(coeffs)
}

/// On-disk interpolation problem. Points and matrix entries use the point
/// syntax (`"1+2i"`, `"1-j+0.5k"`); matrices are row-major lists of rows and
/// directions/targets are columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterpolationSpec {
    Directional {
        nodes: Vec<String>,
        directions: Vec<Vec<String>>,
        targets: Vec<Vec<String>>,
        #[serde(default = "default_right")]
        side: Side,
    },
    FullValue {
        nodes: Vec<String>,
        values: Vec<Vec<Vec<String>>>,
    },
    TwoSided {
        #[serde(default)]
        quaternion: bool,
        constraints: Vec<ConstraintSpec>,
    },
    EvenPolynomial {
        nodes: Vec<String>,
        values: Vec<String>,
        #[serde(default = "default_left")]
        side: Side,
    },
}

fn default_right() -> Side {
    Side::Right
}

fn default_left() -> Side {
    Side::Left
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    pub point: String,
    pub kind: ConstraintKind,
    pub value: Vec<Vec<String>>,
}

/// Result of running an [`InterpolationSpec`].
#[derive(Debug, Clone, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum InterpolationOutcome {
    Directional(Box<GpeInterpolation>),
    FullValue(QuatInterpolation),
    TwoSided {
        #[serde(with = "cmatrix_vec")]
        complex: Vec<CMatrix>,
        quaternion: Option<QuatLagrange>,
    },
    EvenPolynomial(EvenInterpolation),
}

fn parse_cmatrix(rows: &[Vec<String>]) -> Result<CMatrix> {
    let c = rows.first().map_or(0, |r| r.len());
    if rows.is_empty() || c == 0 || rows.iter().any(|r| r.len() != c) {
        return Err(Error::InvalidInput("matrix must be a nonempty list of equal-length rows".into()));
    }
    let data: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|s| parse_complex(s)).collect()).collect::<Result<_>>()?;
    Ok(CMatrix::from_fn(rows.len(), c, |i, j| data[i][j]))
}

fn parse_qmatrix(rows: &[Vec<String>]) -> Result<QuatMatrix> {
    let c = rows.first().map_or(0, |r| r.len());
    if rows.is_empty() || c == 0 || rows.iter().any(|r| r.len() != c) {
        return Err(Error::InvalidInput("matrix must be a nonempty list of equal-length rows".into()));
    }
    let data: Vec<Quaternion> = rows.iter().flatten().map(|s| parse_quaternion(s)).collect::<Result<_>>()?;
    QuatMatrix::from_row_major(rows.len(), c, data)
}

fn parse_column(col: &[String]) -> Result<CMatrix> {
    let v: Vec<C64> = col.iter().map(|s| parse_complex(s)).collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(Error::InvalidInput("empty column".into()));
    }
    Ok(CMatrix::from_column_slice(v.len(), 1, &v))
}

impl InterpolationSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn solve(&self) -> Result<InterpolationOutcome> {
        match self {
            InterpolationSpec::Directional { nodes, directions, targets, side } => {
                let nodes: Vec<C64> = nodes.iter().map(|s| parse_complex(s)).collect::<Result<_>>()?;
                let xi: Vec<CMatrix> = directions.iter().map(|c| parse_column(c)).collect::<Result<_>>()?;
                let eta: Vec<CMatrix> = targets.iter().map(|c| parse_column(c)).collect::<Result<_>>()?;
                Ok(InterpolationOutcome::Directional(Box::new(gpe_interpolate(&nodes, &xi, &eta, *side)?)))
            }
            InterpolationSpec::FullValue { nodes, values } => {
                let nodes: Vec<Quaternion> = nodes.iter().map(|s| parse_quaternion(s)).collect::<Result<_>>()?;
                let values: Vec<QuatMatrix> = values.iter().map(|m| parse_qmatrix(m)).collect::<Result<_>>()?;
                Ok(InterpolationOutcome::FullValue(quat_gpe_interpolate(&nodes, &values)?))
            }
            InterpolationSpec::TwoSided { quaternion, constraints } => {
                if *quaternion {
                    let cs: Vec<QuatConstraint> = constraints
                        .iter()
                        .map(|c| {
                            Ok(QuatConstraint { point: parse_quaternion(&c.point)?, kind: c.kind, value: parse_qmatrix(&c.value)? })
                        })
                        .collect::<Result<_>>()?;
                    let lag = quat_lagrange_matrix_polynomial(&cs)?;
                    Ok(InterpolationOutcome::TwoSided { complex: Vec::new(), quaternion: Some(lag) })
                } else {
                    let cs: Vec<Constraint> = constraints
                        .iter()
                        .map(|c| Ok(Constraint { point: parse_complex(&c.point)?, kind: c.kind, value: parse_cmatrix(&c.value)? }))
                        .collect::<Result<_>>()?;
                    Ok(InterpolationOutcome::TwoSided { complex: lagrange_matrix_polynomial(&cs)?, quaternion: None })
                }
            }
            InterpolationSpec::EvenPolynomial { nodes, values, side } => {
                let nodes: Vec<C64> = nodes.iter().map(|s| parse_complex(s)).collect::<Result<_>>()?;
                let values: Vec<C64> = values.iter().map(|s| parse_complex(s)).collect::<Result<_>>()?;
                Ok(InterpolationOutcome::EvenPolynomial(even_polynomial_interpolate(&nodes, &values, *side)?))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real;

    fn col(v: &[f64]) -> CMatrix {
        from_real(v.len(), 1, v)
    }

    #[test]
    fn positive_matrix_examples() {
        let e1 = col(&[1.0, 0.0]);
        let a = positive_matrix_for(&e1, &e1).unwrap();
        assert!((a - from_real(2, 2, &[1.0, 0.0, 0.0, 0.0])).norm() < 1e-15);
        let a = positive_matrix_for(&e1, &col(&[0.0, 0.0])).unwrap();
        assert!((a - from_real(2, 2, &[0.0, 0.0, 0.0, 1.0])).norm() < 1e-15);
        assert!(matches!(positive_matrix_for(&e1, &col(&[-1.0, 0.0])), Err(Error::Infeasible(_))));
        assert!(matches!(positive_matrix_for(&e1, &col(&[0.0, 1.0])), Err(Error::Infeasible(_))));
    }

    #[test]
    fn complex_lagrange() {
        let cs = [
            Constraint { point: c64(1.0, 0.0), kind: ConstraintKind::Value, value: from_real(1, 1, &[0.0]) },
            Constraint { point: c64(-1.0, 0.0), kind: ConstraintKind::Value, value: from_real(1, 1, &[1.0]) },
        ];
        let p = lagrange_matrix_polynomial(&cs).unwrap();
        assert_eq!(p.len(), 2);
        assert!((p[0][(0, 0)] - c64(0.5, 0.0)).norm() < 1e-15);
        assert!((p[1][(0, 0)] - c64(-0.5, 0.0)).norm() < 1e-15);
        // T^#(1) = 2 is T(-1) = 2, clashing with T(-1) = 1
        let clash = [cs[1].clone(), Constraint { point: c64(1.0, 0.0), kind: ConstraintKind::SharpValue, value: from_real(1, 1, &[2.0]) }];
        assert!(matches!(lagrange_matrix_polynomial(&clash), Err(Error::Infeasible(_))));
    }

    #[test]
    fn quaternion_lagrange() {
        let t = quat_lagrange_matrix_polynomial(&[QuatConstraint {
            point: Quaternion::ZERO,
            kind: ConstraintKind::Value,
            value: QuatMatrix::scalar(Quaternion::I),
        }])
        .unwrap();
        assert_eq!(t.polynomial.degree(), 0);
        assert!((&t.polynomial.coeffs()[0] - &QuatMatrix::scalar(Quaternion::I)).max_abs() < 1e-14);

        let bad = [
            QuatConstraint { point: Quaternion::I, kind: ConstraintKind::Value, value: QuatMatrix::scalar(Quaternion::ZERO) },
            QuatConstraint { point: Quaternion::I, kind: ConstraintKind::SharpValue, value: QuatMatrix::scalar(Quaternion::ONE) },
        ];
        match quat_lagrange_matrix_polynomial(&bad) {
            Err(Error::Infeasible(m)) => assert!(m.contains("constraints 0 and 1"), "{m}"),
            other => panic!("expected infeasible, got {other:?}"),
        }

        let p = Quaternion::new(1.0, 0.5, -0.3, 0.2);
        let q = Quaternion::new(-0.5, 0.0, 1.0, 0.0);
        let cs = [
            QuatConstraint { point: p, kind: ConstraintKind::Value, value: QuatMatrix::scalar(Quaternion::J) },
            QuatConstraint { point: q, kind: ConstraintKind::Value, value: QuatMatrix::scalar(Quaternion::real(2.0)) },
            QuatConstraint { point: p, kind: ConstraintKind::SharpValue, value: QuatMatrix::scalar(Quaternion::K) },
        ];
        let t = quat_lagrange_matrix_polynomial(&cs).unwrap();
        assert!((t.polynomial.evaluate(p)[(0, 0)] - Quaternion::J).norm() < 1e-10);
        assert!((t.polynomial.evaluate(q)[(0, 0)] - Quaternion::real(2.0)).norm() < 1e-10);
        assert!((t.polynomial.sharp().evaluate(p)[(0, 0)] - Quaternion::K).norm() < 1e-10);
    }

    #[test]
    fn scalar_directional_example() {
        let r = gpe_interpolate(&[c64(1.0, 0.0)], &[col(&[1.0])], &[col(&[2.0])], Side::Right).unwrap();
        let want = [2.25, 0.0, -0.25];
        for (k, w) in want.iter().enumerate() {
            assert!((r.phi_coeffs[k][(0, 0)] - c64(*w, 0.0)).norm() < 1e-12);
        }
        assert!(!r.padded);
        for z in [c64(0.3, 0.2), c64(-1.0, 2.0)] {
            let l = r.factor.factor.evaluate(z).unwrap()[(0, 0)];
            assert!((l - (z + 3.0) / 2.0).norm() < 1e-9, "{l}");
        }
        assert!(r.node_residual < 1e-9);
    }

    #[test]
    fn axis_node_sign_condition() {
        let e = gpe_interpolate(&[c64(0.0, 0.0)], &[col(&[1.0])], &[col(&[-1.0])], Side::Right);
        assert!(matches!(e, Err(Error::Infeasible(_))));
        let ok = gpe_interpolate(&[c64(0.0, 0.5), c64(1.0, 1.0)], &[col(&[1.0]), col(&[1.0])], &[col(&[3.0]), col(&[1.0])], Side::Right)
            .unwrap();
        assert!(ok.node_residual < 1e-8, "{}", ok.node_residual);
    }

    #[test]
    fn zero_target_and_padding() {
        let r = gpe_interpolate(&[c64(1.0, 0.0)], &[col(&[1.0, 0.0])], &[col(&[0.0, 0.0])], Side::Right).unwrap();
        assert!(r.node_residual < 1e-9);
        let r = gpe_interpolate(&[c64(1.0, 0.0)], &[col(&[1.0, 0.0])], &[col(&[1.0, 0.0])], Side::Right).unwrap();
        assert!(r.padded);
        assert!(r.node_residual < 1e-8, "{}", r.node_residual);
    }

    #[test]
    fn symmetric_pair() {
        let nodes = [c64(1.0, 1.0), c64(-1.0, 1.0)];
        let xi = [col(&[1.0]), col(&[1.0])];
        // xi_v* eta_u = eta_v* xi_u requires eta_v = conj(eta_u)
        let eta = [CMatrix::from_element(1, 1, c64(2.0, 1.0)), CMatrix::from_element(1, 1, c64(2.0, -1.0))];
        let r = gpe_interpolate(&nodes, &xi, &eta, Side::Right).unwrap();
        assert!(r.node_residual < 1e-8);
        let bad = [eta[0].clone(), eta[0].clone()];
        assert!(matches!(gpe_interpolate(&nodes, &xi, &bad, Side::Right), Err(Error::Infeasible(_))));
    }

    #[test]
    fn even_polynomial_example() {
        let nodes = [c64(1.0, 0.0), c64(1.0, 1.0), c64(1.0, -1.0)];
        let values = [c64(1.0, 0.0), c64(2.0, 8.0), c64(2.0, -8.0)];
        let r = even_polynomial_interpolate(&nodes, &values, Side::Left).unwrap();
        let want = [-2.0, 0.0, 4.0, 0.0, -1.0, 0.0];
        assert_eq!(r.coeffs.len(), 6);
        for (a, w) in r.coeffs.iter().zip(want) {
            assert!((a - c64(w, 0.0)).norm() < 1e-10, "{a}");
        }
        assert_eq!(r.beta, 1.0);
        let target = [2.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0];
        assert!(poly::max_coeff_distance(&r.phi, &target.map(|x| c64(x, 0.0))) < 1e-10);
        assert!(poly::max_coeff_distance(&r.phi0, &[4.0, 0.0, -4.0, 0.0, 1.0, 0.0, -1.0].map(|x| c64(x, 0.0))) < 1e-10);
        let rho = 2f64.powf(1.0 / 6.0);
        for k in [0.0, 1.0, -1.0] {
            let want = C64::from_polar(rho, k * std::f64::consts::PI / 3.0);
            assert!(r.factor_roots.iter().any(|z| (z - want).norm() < 1e-9));
        }
        assert!(r.residual < 1e-10);

        let one = even_polynomial_interpolate(&[c64(1.0, 0.0)], &[c64(1.0, 0.0)], Side::Left).unwrap();
        assert_eq!(one.beta, 0.0);
        assert!(poly::max_coeff_distance(&one.phi, &[c64(1.0, 0.0)]) < 1e-14);
    }

    #[test]
    fn quaternion_interpolation() {
        let one = quat_gpe_interpolate(&[Quaternion::ONE], &[QuatMatrix::scalar(Quaternion::real(2.0))]).unwrap();
        assert!(one.node_residual < 1e-12);
        let id = quat_gpe_interpolate(&[Quaternion::new(0.5, 0.0, 1.0, 0.0)], &[QuatMatrix::identity(2)]).unwrap();
        assert!((&id.phi.evaluate(Quaternion::new(0.1, 0.2, 0.3, 0.4)) - &QuatMatrix::identity(2)).max_abs() < 1e-12);

        let nodes = [Quaternion::new(1.0, 1.0, 0.0, 0.0), Quaternion::real(2.0)];
        let values = [QuatMatrix::scalar(Quaternion::new(2.0, 0.0, 1.0, 0.0)), QuatMatrix::scalar(Quaternion::ONE)];
        let r = quat_gpe_interpolate(&nodes, &values).unwrap();
        assert!(r.node_residual < 1e-9, "{}", r.node_residual);
        assert!(crate::analysis::quat_is_even(&r.phi.to_realization()));
    }

    #[test]
    fn spec_file_round_trip() {
        let text = r#"{"mode":"even_polynomial","nodes":["1","1+i","1-i"],"values":["1","2+8i","2-8i"]}"#;
        let spec = InterpolationSpec::from_json(text).unwrap();
        let back = InterpolationSpec::from_json(&serde_json::to_string(&spec).unwrap()).unwrap();
        assert_eq!(spec, back);
        match spec.solve().unwrap() {
            InterpolationOutcome::EvenPolynomial(r) => assert_eq!(r.beta, 1.0),
            other => panic!("{other:?}"),
        }
        assert!(InterpolationSpec::from_json(r#"{"mode":"directional","nodes":[]}"#).is_err());
    }
}
