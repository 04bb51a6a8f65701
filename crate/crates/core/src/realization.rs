//! State-space realizations `Phi(z) = D + sum_k z^k P_k + C (zI - A)^{-1} B`.
//!
//! The polynomial coefficients `P_k` (k >= 1) are empty for functions
//! analytic at infinity, which is the main case; they let the polynomial
//! examples (and polynomial interpolants) share the same type.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{
    self, block2, c64, hstack, identity, lstsq_min_norm, norm, orth, singular_values, vstack, zeros, CMatrix,
};
use crate::quat::{chi, QuatMatrix, Quaternion};
use crate::sampling;

/// Pole proximity tolerance for evaluation, relative to `1 + |A|`.
pub const POLE_RTOL: f64 = 1e-10;
/// Relative rank tolerance for controllability/observability decisions.
pub const MINIMAL_RTOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Complex,
    Quaternion,
}

/// Realization over the complex numbers.
#[derive(Debug, Clone)]
pub struct Realization {
    a: CMatrix,
    b: CMatrix,
    c: CMatrix,
    d: CMatrix,
    poly: Vec<CMatrix>,
    poles: OnceLock<Vec<Complex64>>,
}

impl PartialEq for Realization {
    fn eq(&self, o: &Self) -> bool {
        self.a == o.a && self.b == o.b && self.c == o.c && self.d == o.d && self.poly == o.poly
    }
}

fn check_shapes(n: usize, a: (usize, usize), b: (usize, usize), c: (usize, usize), d: (usize, usize)) -> Result<()> {
    let (nout, nin) = d;
    if a != (n, n) || b != (n, nin) || c != (nout, n) {
        return Err(Error::DimensionMismatch(format!(
            "A {a:?}, B {b:?}, C {c:?}, D {d:?} are not conformable"
        )));
    }
    Ok(())
}

impl Realization {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix) -> Result<Self> {
        Self::with_poly(a, b, c, d, Vec::new())
    }

    /// `poly[k]` multiplies `z^(k+1)`.
    pub fn with_poly(a: CMatrix, b: CMatrix, c: CMatrix, d: CMatrix, mut poly: Vec<CMatrix>) -> Result<Self> {
        check_shapes(a.nrows(), a.shape(), b.shape(), c.shape(), d.shape())?;
        if poly.iter().any(|p| p.shape() != d.shape()) {
            return Err(Error::DimensionMismatch("polynomial coefficients must have the shape of D".into()));
        }
        let finite = [&a, &b, &c, &d].iter().all(|m| linalg::is_finite(m)) && poly.iter().all(linalg::is_finite);
        if !finite {
            return Err(Error::InvalidInput("realization has non-finite entries".into()));
        }
        while poly.last().is_some_and(|p| linalg::max_abs(p) == 0.0) {
            poly.pop();
        }
        Ok(Realization { a, b, c, d, poly, poles: OnceLock::new() })
    }

    /// `Phi(z) = D` with no state.
    pub fn constant(d: CMatrix) -> Self {
        let (p, m) = d.shape();
        Realization::new(zeros(0, 0), zeros(0, m), zeros(p, 0), d).expect("conformable by construction")
    }

    /// Matrix polynomial `sum_k z^k coeffs[k]`.
    pub fn polynomial(coeffs: &[CMatrix]) -> Result<Self> {
        let d = coeffs.first().ok_or_else(|| Error::InvalidInput("empty polynomial".into()))?;
        let (p, m) = d.shape();
        Realization::with_poly(zeros(0, 0), zeros(0, m), zeros(p, 0), d.clone(), coeffs[1..].to_vec())
    }

    pub fn a(&self) -> &CMatrix {
        &self.a
    }
    pub fn b(&self) -> &CMatrix {
        &self.b
    }
    pub fn c(&self) -> &CMatrix {
        &self.c
    }
    pub fn d(&self) -> &CMatrix {
        &self.d
    }
    /// Coefficients of `z^1, z^2, ...`.
    pub fn poly(&self) -> &[CMatrix] {
        &self.poly
    }
    pub fn n_out(&self) -> usize {
        self.d.nrows()
    }
    pub fn n_in(&self) -> usize {
        self.d.ncols()
    }
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }
    /// Analytic at infinity (no polynomial part).
    pub fn is_proper(&self) -> bool {
        self.poly.is_empty()
    }

    /// Eigenvalues of `A` (cached).
    pub fn poles(&self) -> &[Complex64] {
        self.poles.get_or_init(|| {
            if self.a.nrows() == 0 {
                return Vec::new();
            }
            linalg::schur(&self.a).map(|s| s.eigenvalues()).unwrap_or_default()
        })
    }

    /// Eigenvalues of `A - B D^{-1} C` (zeros of a square function with
    /// invertible `D`).
    pub fn zeros(&self) -> Result<Vec<Complex64>> {
        let ax = self.associated_matrix()?;
        if ax.nrows() == 0 {
            return Ok(Vec::new());
        }
        Ok(linalg::schur(&ax)?.eigenvalues())
    }

    /// `A x = A - B D^{-1} C`.
    pub fn associated_matrix(&self) -> Result<CMatrix> {
        if self.n_in() != self.n_out() {
            return Err(Error::DimensionMismatch("associated matrix needs square D".into()));
        }
        let dinv = linalg::inverse(&self.d)?;
        Ok(&self.a - &self.b * dinv * &self.c)
    }

    fn pole_scale(&self) -> f64 {
        1.0 + norm(&self.a)
    }

    /// Nearest pole and its distance, if the state space is nontrivial.
    pub fn nearest_pole(&self, z: Complex64) -> Option<(Complex64, f64)> {
        self.poles()
            .iter()
            .map(|&l| (l, (l - z).norm()))
            .min_by(|x, y| x.1.total_cmp(&y.1))
    }

    pub fn evaluate(&self, z: Complex64) -> Result<CMatrix> {
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::InvalidInput(format!("evaluation point {z} is not finite")));
        }
        if let Some((l, dist)) = self.nearest_pole(z) {
            if dist < POLE_RTOL * self.pole_scale() {
                return Err(Error::Pole { point: z.to_string(), nearest: l, distance: dist });
            }
        }
        let mut out = self.d.clone();
        let mut zk = c64(1.0, 0.0);
        for p in &self.poly {
            zk *= z;
            out += p * zk;
        }
        if self.state_dim() > 0 {
            let n = self.state_dim();
            let m = identity(n) * z - &self.a;
            let x = linalg::solve(&m, &self.b)?;
            out += &self.c * x;
        }
        Ok(out)
    }

    /// `Phi(infinity)`; an error for functions with a polynomial part.
    pub fn value_at_infinity(&self) -> Result<CMatrix> {
        if !self.is_proper() {
            return Err(Error::Unsupported("function has a pole at infinity".into()));
        }
        Ok(self.d.clone())
    }

    /// Realization of `Phi^#(z) = Phi(-conj z)^*`: `(-A*, C*, -B*, D*)` and
    /// `P_k -> (-1)^k P_k*`.
    pub fn sharp(&self) -> Realization {
        let poly = self
            .poly
            .iter()
            .enumerate()
            .map(|(k, p)| if k % 2 == 0 { -p.adjoint() } else { p.adjoint() })
            .collect();
        Realization::with_poly(
            -self.a.adjoint(),
            self.c.adjoint(),
            -self.b.adjoint(),
            self.d.adjoint(),
            poly,
        )
        .expect("conformable by construction")
    }

    /// Similarity transform `(T^{-1} A T, T^{-1} B, C T, D)`.
    pub fn transform(&self, t: &CMatrix) -> Result<Realization> {
        let tinv = linalg::inverse(t)?;
        Realization::with_poly(&tinv * &self.a * t, &tinv * &self.b, &self.c * t, self.d.clone(), self.poly.clone())
    }

    /// Sample points away from the poles (and zeros when defined).
    pub fn sample_points(&self, count: usize) -> Vec<Complex64> {
        let mut avoid: Vec<Complex64> = self.poles().to_vec();
        if self.n_in() == self.n_out() && self.state_dim() > 0 {
            if let Ok(z) = self.zeros() {
                avoid.extend(z);
            }
        }
        sampling::function_samples(count, &avoid)
    }

    /// Pointwise sum with another realization.
    pub fn sum(&self, o: &Realization) -> Result<Realization> {
        if self.d.shape() != o.d.shape() {
            return Err(Error::DimensionMismatch("summands have different shapes".into()));
        }
        let a = block2(&self.a, &zeros(self.state_dim(), o.state_dim()), &zeros(o.state_dim(), self.state_dim()), &o.a);
        let b = vstack(&[&self.b, &o.b]);
        let c = hstack(&[&self.c, &o.c]);
        let len = self.poly.len().max(o.poly.len());
        let poly = (0..len)
            .map(|k| {
                let mut p = zeros(self.n_out(), self.n_in());
                if let Some(x) = self.poly.get(k) {
                    p += x;
                }
                if let Some(x) = o.poly.get(k) {
                    p += x;
                }
                p
            })
            .collect();
        Realization::with_poly(a, b, c, &self.d + &o.d, poly)
    }

    pub fn scale(&self, s: Complex64) -> Realization {
        Realization::with_poly(
            self.a.clone(),
            self.b.clone(),
            &self.c * s,
            &self.d * s,
            self.poly.iter().map(|p| p * s).collect(),
        )
        .expect("conformable by construction")
    }
}

impl Realization {
    /// `c(z) Phi(z)` for a scalar polynomial `c` (ascending coefficients),
    /// using `z^k (zI - A)^{-1} = sum_{j<k} z^{k-1-j} A^j + A^k (zI - A)^{-1}`.
    pub fn times_scalar_polynomial(&self, c: &[Complex64]) -> Result<Realization> {
        if !self.is_proper() {
            return Err(Error::Unsupported("scaling a function that already has a polynomial part".into()));
        }
        let n = self.state_dim();
        let deg = c.len().saturating_sub(1);
        let mut powers = vec![identity(n)];
        for k in 1..=deg {
            powers.push(&powers[k - 1] * &self.a);
        }
        let c_of_a = c.iter().enumerate().fold(zeros(n, n), |acc, (k, ck)| acc + &powers[k] * *ck);
        let coeff = |i: usize| -> CMatrix {
            let mut m = &self.d * c[i];
            for (k, ck) in c.iter().enumerate().skip(i + 1) {
                m += &self.c * &powers[k - 1 - i] * &self.b * *ck;
            }
            m
        };
        let d = if c.is_empty() { zeros(self.n_out(), self.n_in()) } else { coeff(0) };
        let poly = (1..=deg).map(coeff).collect();
        Realization::with_poly(self.a.clone(), self.b.clone(), &self.c * c_of_a, d, poly)
    }
}

/// A realization over either field, as read from a file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyRealization {
    Complex(Realization),
    Quaternion(QuatRealization),
}

impl AnyRealization {
    pub fn field(&self) -> Field {
        match self {
            AnyRealization::Complex(_) => Field::Complex,
            AnyRealization::Quaternion(_) => Field::Quaternion,
        }
    }
}

/// Realization of the product `Phi_a Phi_b` by the block formula
/// `[[A_a, B_a C_b], [0, A_b]]`, `B = (B_a D_b; B_b)`, `C = (C_a, D_a C_b)`,
/// `D = D_a D_b`.
pub fn product(ra: &Realization, rb: &Realization) -> Result<Realization> {
    if ra.n_in() != rb.n_out() {
        return Err(Error::DimensionMismatch(format!(
            "product of {}x{} and {}x{} functions",
            ra.n_out(),
            ra.n_in(),
            rb.n_out(),
            rb.n_in()
        )));
    }
    if !ra.is_proper() || !rb.is_proper() {
        return Err(Error::Unsupported("products of functions with a polynomial part".into()));
    }
    let (na, nb) = (ra.state_dim(), rb.state_dim());
    let a = block2(&ra.a, &(&ra.b * &rb.c), &zeros(nb, na), &rb.a);
    let b = vstack(&[&(&ra.b * &rb.d), &rb.b]);
    let c = hstack(&[&ra.c, &(&ra.d * &rb.c)]);
    Realization::new(a, b, c, &ra.d * &rb.d)
}

/// Realization of `L L^#` with state matrix `[[A, B B*], [0, -A*]]`,
/// `B = (B D*; -C*)`, `C = (C, D B*)`, `D = D D*`.
pub fn gpe_from_factor(l: &Realization) -> Result<Realization> {
    if !l.is_proper() {
        return Err(Error::Unsupported("factor with a polynomial part".into()));
    }
    let n = l.state_dim();
    let a = block2(&l.a, &(&l.b * l.b.adjoint()), &zeros(n, n), &(-l.a.adjoint()));
    let b = vstack(&[&(&l.b * l.d.adjoint()), &(-l.c.adjoint())]);
    let c = hstack(&[&l.c, &(&l.d * l.b.adjoint())]);
    Realization::new(a, b, c, &l.d * l.d.adjoint())
}

/// Outcome of the Popov-Belevitch-Hautus tests.
#[derive(Debug, Clone)]
pub struct MinimalityReport {
    pub controllable: bool,
    pub observable: bool,
    /// Eigenvalues with a left eigenvector `w` of `A` satisfying `w* B = 0`.
    pub uncontrollable: Vec<(Complex64, CMatrix)>,
    /// Eigenvalues with a right eigenvector `v` of `A` satisfying `C v = 0`.
    pub unobservable: Vec<(Complex64, CMatrix)>,
}

impl MinimalityReport {
    pub fn is_minimal(&self) -> bool {
        self.controllable && self.observable
    }
}

fn pbh_witnesses(a: &CMatrix, b: &CMatrix) -> Result<Vec<(Complex64, CMatrix)>> {
    // Left null vectors of [A - lambda I, B] at each distinct eigenvalue.
    let n = a.nrows();
    let scale = 1.0 + norm(a) + norm(b);
    let eig = linalg::eig(a)?;
    let mut out = Vec::new();
    for cl in &eig.clusters {
        let m = hstack(&[&(a - identity(n) * cl.value), b]);
        let s = singular_values(&m);
        let tol = MINIMAL_RTOL * scale;
        let rank = s.iter().filter(|&&x| x > tol).count();
        if rank < n {
            let ns = linalg::null_space(&m.adjoint(), tol);
            out.push((cl.value, ns));
        }
    }
    Ok(out)
}

pub fn minimality_report(r: &Realization) -> Result<MinimalityReport> {
    if r.state_dim() == 0 {
        return Ok(MinimalityReport { controllable: true, observable: true, uncontrollable: vec![], unobservable: vec![] });
    }
    let uncontrollable = pbh_witnesses(&r.a, &r.b)?;
    let unobservable = pbh_witnesses(&r.a.adjoint(), &r.c.adjoint())?
        .into_iter()
        .map(|(l, v)| (l.conj(), v))
        .collect::<Vec<_>>();
    Ok(MinimalityReport {
        controllable: uncontrollable.is_empty(),
        observable: unobservable.is_empty(),
        uncontrollable,
        unobservable,
    })
}

/// Orthonormal basis of the smallest `A`-invariant subspace containing the
/// columns of `b`.
fn reachable_subspace(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let scale = (norm(a) + norm(b)).max(1e-300);
    let tol = MINIMAL_RTOL * (1.0 + scale);
    let mut w = orth(b, tol);
    loop {
        if w.ncols() == n {
            return w;
        }
        let aw = a * &w;
        let next = orth(&hstack(&[&w, &aw]), tol * singular_values(&w).first().copied().unwrap_or(1.0).max(1.0));
        if next.ncols() == w.ncols() {
            return w;
        }
        w = next;
    }
}

/// Kalman reduction: restrict to the controllable subspace, then remove the
/// unobservable part.
pub fn minimize(r: &Realization) -> Result<Realization> {
    if r.state_dim() == 0 {
        return Ok(r.clone());
    }
    let v = reachable_subspace(&r.a, &r.b);
    let a1 = v.adjoint() * &r.a * &v;
    let b1 = v.adjoint() * &r.b;
    let c1 = &r.c * &v;
    let w = reachable_subspace(&a1.adjoint(), &c1.adjoint());
    let a2 = w.adjoint() * &a1 * &w;
    let b2 = w.adjoint() * &b1;
    let c2 = &c1 * &w;
    Realization::with_poly(a2, b2, c2, r.d.clone(), r.poly.clone())
}

/// McMillan degree and local degree at `z0` (algebraic multiplicity of `z0`
/// as an eigenvalue of a minimal realization's state matrix).
pub fn degrees(r: &Realization, z0: Complex64) -> Result<(usize, usize)> {
    let m = minimize(r)?;
    if m.state_dim() == 0 {
        return Ok((0, 0));
    }
    let eig = linalg::eig(&m.a)?;
    let tol = eig.cluster_tolerance.max(1e-8 * (1.0 + norm(&m.a)));
    let local = eig
        .clusters
        .iter()
        .filter(|c| (c.value - z0).norm() <= tol)
        .map(|c| c.multiplicity)
        .sum();
    Ok((m.state_dim(), local))
}

/// Largest relative evaluation difference over `points`.
pub fn max_difference(r1: &Realization, r2: &Realization, points: &[Complex64]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for &z in points {
        let v1 = r1.evaluate(z)?;
        let v2 = r2.evaluate(z)?;
        let d = norm(&(&v1 - &v2)) / (1.0 + norm(&v1));
        worst = worst.max(d);
    }
    Ok(worst)
}

/// The unique invertible `S` with `S A1 = A2 S`, `S B1 = B2`, `C1 = C2 S`
/// between two minimal realizations of the same function.
pub fn similarity(r1: &Realization, r2: &Realization) -> Result<CMatrix> {
    for (name, r) in [("first", r1), ("second", r2)] {
        if !minimality_report(r)?.is_minimal() {
            return Err(Error::NotMinimal(format!("{name} realization is not minimal")));
        }
    }
    if r1.d.shape() != r2.d.shape() || r1.state_dim() != r2.state_dim() || r1.poly.len() != r2.poly.len() {
        return Err(Error::InvalidInput("realizations have different dimensions".into()));
    }
    let mut pts = r1.sample_points(30);
    pts.retain(|z| r2.nearest_pole(*z).is_none_or(|(_, d)| d > 1e-3));
    if max_difference(r1, r2, &pts)? > 1e-8 {
        return Err(Error::InvalidInput("realizations describe different functions".into()));
    }
    let n = r1.state_dim();
    if n == 0 {
        return Ok(zeros(0, 0));
    }
    // Unknown vec(S) (column-major): vec(S A1 - A2 S) = (A1^T (x) I - I (x) A2) vec S.
    let i = identity(n);
    let m = r1.n_in();
    let p = r1.n_out();
    let blk1 = linalg::kron(&r1.a.transpose(), &i) - linalg::kron(&i, &r2.a);
    let blk2 = linalg::kron(&r1.b.transpose(), &i);
    let blk3 = linalg::kron(&i, &r2.c);
    let op = vstack(&[&blk1, &blk2, &blk3]);
    let rhs_b = linalg::vectorize(&r2.b);
    let rhs_c = linalg::vectorize(&r1.c);
    let mut rhs = zeros(n * n + n * m + p * n, 1);
    for (k, v) in rhs_b.iter().enumerate() {
        rhs[(n * n + k, 0)] = *v;
    }
    for (k, v) in rhs_c.iter().enumerate() {
        rhs[(n * n + n * m + k, 0)] = *v;
    }
    let x = lstsq_min_norm(&op, &rhs, 1e-13);
    let res = norm(&(&op * &x - &rhs));
    let s = linalg::unvectorize(&x.column(0).into_owned(), n, n);
    if res > 1e-8 * (1.0 + norm(&rhs)) {
        return Err(Error::NumericalFailure(format!("similarity equations inconsistent (residual {res:e})")));
    }
    linalg::inverse(&s)?;
    Ok(s)
}

/// Realization over the quaternions; evaluation uses left slice
/// multiplication `p^k X`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuatRealization {
    a: QuatMatrix,
    b: QuatMatrix,
    c: QuatMatrix,
    d: QuatMatrix,
    poly: Vec<QuatMatrix>,
}

impl QuatRealization {
    pub fn new(a: QuatMatrix, b: QuatMatrix, c: QuatMatrix, d: QuatMatrix) -> Result<Self> {
        Self::with_poly(a, b, c, d, Vec::new())
    }

    pub fn with_poly(a: QuatMatrix, b: QuatMatrix, c: QuatMatrix, d: QuatMatrix, mut poly: Vec<QuatMatrix>) -> Result<Self> {
        check_shapes(a.nrows(), a.shape(), b.shape(), c.shape(), d.shape())?;
        if poly.iter().any(|p| p.shape() != d.shape()) {
            return Err(Error::DimensionMismatch("polynomial coefficients must have the shape of D".into()));
        }
        while poly.last().is_some_and(|p| p.max_abs() == 0.0) {
            poly.pop();
        }
        Ok(QuatRealization { a, b, c, d, poly })
    }

    pub fn constant(d: QuatMatrix) -> Self {
        let (p, m) = d.shape();
        QuatRealization::new(QuatMatrix::zeros(0, 0), QuatMatrix::zeros(0, m), QuatMatrix::zeros(p, 0), d)
            .expect("conformable by construction")
    }

    /// Slice polynomial `sum_k p^k coeffs[k]`.
    pub fn polynomial(coeffs: &[QuatMatrix]) -> Result<Self> {
        let d = coeffs.first().ok_or_else(|| Error::InvalidInput("empty polynomial".into()))?;
        let (p, m) = d.shape();
        QuatRealization::with_poly(
            QuatMatrix::zeros(0, 0),
            QuatMatrix::zeros(0, m),
            QuatMatrix::zeros(p, 0),
            d.clone(),
            coeffs[1..].to_vec(),
        )
    }

    /// Quaternionic realization with complex (i-slice) matrices.
    pub fn from_complex(r: &Realization) -> Self {
        QuatRealization::with_poly(
            QuatMatrix::from_complex(&r.a),
            QuatMatrix::from_complex(&r.b),
            QuatMatrix::from_complex(&r.c),
            QuatMatrix::from_complex(&r.d),
            r.poly.iter().map(QuatMatrix::from_complex).collect(),
        )
        .expect("conformable by construction")
    }

    pub fn a(&self) -> &QuatMatrix {
        &self.a
    }
    pub fn b(&self) -> &QuatMatrix {
        &self.b
    }
    pub fn c(&self) -> &QuatMatrix {
        &self.c
    }
    pub fn d(&self) -> &QuatMatrix {
        &self.d
    }
    pub fn poly(&self) -> &[QuatMatrix] {
        &self.poly
    }
    pub fn n_out(&self) -> usize {
        self.d.nrows()
    }
    pub fn n_in(&self) -> usize {
        self.d.ncols()
    }
    pub fn state_dim(&self) -> usize {
        self.a.nrows()
    }
    pub fn is_proper(&self) -> bool {
        self.poly.is_empty()
    }

    /// Complex realization `(chi(A), chi(B), chi(C), chi(D))`; on the
    /// i-slice its value at `z` has top block row `[F1, F2]` with
    /// `Phi(z) = F1 + F2 j`.
    pub fn lift(&self) -> Realization {
        Realization::with_poly(chi(&self.a), chi(&self.b), chi(&self.c), chi(&self.d), self.poly.iter().map(chi).collect())
            .expect("conformable by construction")
    }

    /// Value on the i-slice at the complex point `z`.
    pub fn evaluate_complex(&self, z: Complex64) -> Result<QuatMatrix> {
        self.evaluate_lifted(&self.lift(), z)
    }

    fn evaluate_lifted(&self, lifted: &Realization, z: Complex64) -> Result<QuatMatrix> {
        let r = lifted.evaluate(z)?;
        let (p, m) = (self.n_out(), self.n_in());
        let f1 = r.view((0, 0), (p, m)).into_owned();
        let f2 = r.view((0, m), (p, m)).into_owned();
        Ok(QuatMatrix::from_pair(&f1, &f2))
    }

    /// Slice-hyperholomorphic evaluation at `p = x + J y`, assembled from the
    /// values at `x +- iy` by the representation formula.
    pub fn evaluate_slice(&self, p: Quaternion) -> Result<QuatMatrix> {
        let lifted = self.lift();
        self.evaluate_slice_with(&lifted, p)
    }

    /// As `evaluate_slice`, reusing a precomputed lift.
    pub fn evaluate_slice_with(&self, lifted: &Realization, p: Quaternion) -> Result<QuatMatrix> {
        let (x, y, unit) = p.slice_decompose();
        let Some(u) = unit else {
            return self.evaluate_lifted(lifted, c64(x, 0.0));
        };
        let fp = self.evaluate_lifted(lifted, c64(x, y))?;
        let fm = self.evaluate_lifted(lifted, c64(x, -y))?;
        let alpha = QuatMatrix::from_fn(fp.nrows(), fp.ncols(), |i, j| (fp[(i, j)] + fm[(i, j)]) * 0.5);
        let half_neg_i = Quaternion::new(0.0, -0.5, 0.0, 0.0);
        let beta = QuatMatrix::from_fn(fp.nrows(), fp.ncols(), |i, j| half_neg_i * (fp[(i, j)] - fm[(i, j)]));
        Ok(&alpha + &beta.scale_left(u))
    }

    /// `(-A*, C*, -B*, D*)`, `P_k -> (-1)^k P_k*`.
    pub fn sharp(&self) -> QuatRealization {
        let poly = self
            .poly
            .iter()
            .enumerate()
            .map(|(k, p)| if k % 2 == 0 { -&p.adjoint() } else { p.adjoint() })
            .collect();
        QuatRealization::with_poly(-&self.a.adjoint(), self.c.adjoint(), -&self.b.adjoint(), self.d.adjoint(), poly)
            .expect("conformable by construction")
    }

    pub fn value_at_infinity(&self) -> Result<QuatMatrix> {
        if !self.is_proper() {
            return Err(Error::Unsupported("function has a pole at infinity".into()));
        }
        Ok(self.d.clone())
    }
}

/// Realization of the star product `Phi_a * Phi_b` (same block formula as
/// the complex product).
pub fn star_product_realization(ra: &QuatRealization, rb: &QuatRealization) -> Result<QuatRealization> {
    if ra.n_in() != rb.n_out() {
        return Err(Error::DimensionMismatch("inner dimensions of the star product differ".into()));
    }
    if !ra.is_proper() || !rb.is_proper() {
        return Err(Error::Unsupported("star products of functions with a polynomial part".into()));
    }
    let (na, nb) = (ra.state_dim(), rb.state_dim());
    let bc = &ra.b * &rb.c;
    let a = QuatMatrix::from_fn(na + nb, na + nb, |i, j| match (i < na, j < na) {
        (true, true) => ra.a[(i, j)],
        (true, false) => bc[(i, j - na)],
        (false, true) => Quaternion::ZERO,
        (false, false) => rb.a[(i - na, j - na)],
    });
    let bd = &ra.b * &rb.d;
    let b = QuatMatrix::from_fn(na + nb, rb.n_in(), |i, j| if i < na { bd[(i, j)] } else { rb.b[(i - na, j)] });
    let dc = &ra.d * &rb.c;
    let c = QuatMatrix::from_fn(ra.n_out(), na + nb, |i, j| if j < na { ra.c[(i, j)] } else { dc[(i, j - na)] });
    QuatRealization::new(a, b, c, &ra.d * &rb.d)
}

/// Realization of `L * L^#` over the quaternions.
pub fn quat_gpe_from_factor(l: &QuatRealization) -> Result<QuatRealization> {
    star_product_realization(l, &l.sharp())
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::linalg::from_real;

    fn one() -> Complex64 {
        c64(1.0, 0.0)
    }

    /// `-1/z^2`, obtained from `L = 1/z` by `L L^#`.
    pub(crate) fn minus_inv_z2() -> Realization {
        Realization::new(
            from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]),
            from_real(2, 1, &[0.0, -1.0]),
            from_real(1, 2, &[1.0, 0.0]),
            zeros(1, 1),
        )
        .unwrap()
    }

    fn inv_z() -> Realization {
        Realization::new(from_real(1, 1, &[0.0]), from_real(1, 1, &[1.0]), from_real(1, 1, &[1.0]), zeros(1, 1)).unwrap()
    }

    /// `(1 - z^2)/(4 - z^2) = 1 + (3/4)/(z - 2) - (3/4)/(z + 2)`.
    fn ratio() -> Realization {
        Realization::new(
            from_real(2, 2, &[2.0, 0.0, 0.0, -2.0]),
            from_real(2, 1, &[1.0, 1.0]),
            from_real(1, 2, &[0.75, -0.75]),
            from_real(1, 1, &[1.0]),
        )
        .unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let r = minus_inv_z2();
        assert!((r.evaluate(one()).unwrap()[(0, 0)] + one()).norm() < 1e-15);
        let big = r.evaluate(c64(1e8, 0.0)).unwrap();
        assert!(big[(0, 0)].norm() < 1e-15);
        let v = ratio().evaluate(c64(0.0, 1.0)).unwrap()[(0, 0)];
        assert!((v - c64(0.4, 0.0)).norm() < 1e-15);
        assert!(matches!(r.evaluate(c64(0.0, 0.0)), Err(Error::Pole { .. })));
    }

    #[test]
    fn product_of_inverse_z() {
        let p = product(&inv_z(), &inv_z()).unwrap();
        assert_eq!(p.a(), &from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]));
        assert_eq!(p.b(), &from_real(2, 1, &[0.0, 1.0]));
        assert_eq!(p.c(), &from_real(1, 2, &[1.0, 0.0]));
        assert_eq!(p.d(), &zeros(1, 1));
        let z = c64(0.3, -1.2);
        assert!((p.evaluate(z).unwrap()[(0, 0)] - one() / (z * z)).norm() < 1e-13);
    }

    #[test]
    fn sharp_of_inverse_z() {
        let s = inv_z().sharp();
        let z = c64(0.7, 0.4);
        assert!((s.evaluate(z).unwrap()[(0, 0)] + one() / z).norm() < 1e-14);
    }

    #[test]
    fn gpe_from_inverse_z() {
        let g = gpe_from_factor(&inv_z()).unwrap();
        let z = c64(-0.4, 1.1);
        assert!((g.evaluate(z).unwrap()[(0, 0)] + one() / (z * z)).norm() < 1e-13);
        let s = gpe_from_factor(&Realization::constant(from_real(1, 1, &[1.0]))).unwrap();
        assert_eq!(s.state_dim(), 0);
        assert_eq!(s.d(), &from_real(1, 1, &[1.0]));
    }

    #[test]
    fn minimality_examples() {
        let rep = minimality_report(&minus_inv_z2()).unwrap();
        assert!(rep.is_minimal());
        let bad = Realization::new(zeros(2, 2), from_real(2, 1, &[1.0, 0.0]), from_real(1, 2, &[1.0, 0.0]), zeros(1, 1)).unwrap();
        let rep = minimality_report(&bad).unwrap();
        assert!(!rep.controllable && !rep.observable);
        let m = minimize(&bad).unwrap();
        assert_eq!(m.state_dim(), 1);
        let z = c64(0.5, 0.5);
        assert!((m.evaluate(z).unwrap()[(0, 0)] - one() / z).norm() < 1e-14);
        assert!(minimality_report(&Realization::constant(from_real(1, 1, &[2.0]))).unwrap().is_minimal());
    }

    #[test]
    fn degree_examples() {
        assert_eq!(degrees(&minus_inv_z2(), c64(0.0, 0.0)).unwrap(), (2, 2));
        assert_eq!(degrees(&minus_inv_z2(), one()).unwrap(), (2, 0));
        assert_eq!(degrees(&ratio(), c64(2.0, 0.0)).unwrap(), (2, 1));
    }

    #[test]
    fn similarity_examples() {
        let r1 = inv_z();
        let r2 = Realization::new(zeros(1, 1), from_real(1, 1, &[2.0]), from_real(1, 1, &[0.5]), zeros(1, 1)).unwrap();
        let s = similarity(&r1, &r2).unwrap();
        assert!((s[(0, 0)] - c64(2.0, 0.0)).norm() < 1e-12);
        let s = similarity(&ratio(), &ratio()).unwrap();
        assert!(norm(&(s - identity(2))) < 1e-10);
        assert!(similarity(&ratio(), &ratio().scale(c64(2.0, 0.0))).is_err());
    }

    #[test]
    fn quaternion_slice_evaluation() {
        // f(p) = p^2 at p = j.
        let f = QuatRealization::polynomial(&[
            QuatMatrix::zeros(1, 1),
            QuatMatrix::zeros(1, 1),
            QuatMatrix::identity(1),
        ])
        .unwrap();
        let v = f.evaluate_slice(Quaternion::J).unwrap();
        assert!((v[(0, 0)] + Quaternion::ONE).norm() < 1e-14);
        // Example with Z = [[1, i], [j, ij]]: Phi(p) = Z * diag(p, 1) * Z^*.
        let i = Quaternion::I;
        let j = Quaternion::J;
        let k = Quaternion::K;
        let c0 = QuatMatrix::from_row_major(2, 2, vec![Quaternion::ONE, j, -j, Quaternion::ONE]).unwrap();
        let c1 = QuatMatrix::from_row_major(2, 2, vec![Quaternion::ONE, -j, j, Quaternion::ONE]).unwrap();
        let phi = QuatRealization::polynomial(&[c0, c1]).unwrap();
        let v = phi.evaluate_slice(k).unwrap();
        let expect = [k + Quaternion::ONE, i + j, -(i + j), k + Quaternion::ONE];
        for (a, b) in v.entries().iter().zip(expect) {
            assert!((*a - b).norm() < 1e-14, "{a} vs {b}");
        }
    }

    #[test]
    fn real_point_matches_complex_evaluation() {
        let r = ratio();
        let q = QuatRealization::from_complex(&r);
        let v = q.evaluate_slice(Quaternion::real(0.7)).unwrap();
        let w = r.evaluate(c64(0.7, 0.0)).unwrap();
        assert!((v[(0, 0)] - Quaternion::from_complex(w[(0, 0)])).norm() < 1e-14);
    }

    #[test]
    fn polynomial_scaling_matches_pointwise() {
        let r = ratio();
        let c = [c64(1.0, 0.0), c64(3.0, 0.0), c64(3.0, 0.0), c64(1.0, 0.0)];
        let s = r.times_scalar_polynomial(&c).unwrap();
        assert_eq!(s.poly().len(), 3);
        for z in [c64(0.3, 0.9), c64(-1.5, 0.2), c64(4.0, -3.0)] {
            let want = r.evaluate(z).unwrap() * (z + 1.0).powi(3);
            assert!(linalg::max_abs(&(s.evaluate(z).unwrap() - want)) < 1e-10);
        }
    }
}
