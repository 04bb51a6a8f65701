//! Slice-hyperholomorphic functions: polynomials with right coefficients,
//! the star product, the quaternionic Caratheodory kernel, and the
//! factorization of quaternionic even functions through the complex lift.

use serde::Serialize;

use crate::analysis::quat_carat_kernel_values;
use crate::error::{Error, Result};
use crate::factorization::{factor_regularized, pseudo_spectral_factor, FactorizationResult, Side};
use crate::linalg::{self, c64, conj, hstack, CMatrix};
use crate::quat::{chi_inverse_tol, e_matrix, QuatMatrix, Quaternion};
use crate::realization::{minimize, similarity, star_product_realization, QuatRealization, Realization};
use crate::sampling;

/// `sum_k p^k C_k` with quaternion matrix coefficients on the right.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlicePolynomial {
    coeffs: Vec<QuatMatrix>,
}

impl SlicePolynomial {
    pub fn new(mut coeffs: Vec<QuatMatrix>) -> Result<Self> {
        let shape = coeffs.first().map(|c| c.shape()).ok_or_else(|| Error::InvalidInput("empty polynomial".into()))?;
        if coeffs.iter().any(|c| c.shape() != shape) {
            return Err(Error::DimensionMismatch("coefficients differ in shape".into()));
        }
        while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.max_abs() == 0.0) {
            coeffs.pop();
        }
        Ok(SlicePolynomial { coeffs })
    }

    pub fn constant(c: QuatMatrix) -> Self {
        SlicePolynomial { coeffs: vec![c] }
    }

    pub fn coeffs(&self) -> &[QuatMatrix] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn shape(&self) -> (usize, usize) {
        self.coeffs[0].shape()
    }

    pub fn evaluate(&self, p: Quaternion) -> QuatMatrix {
        let (r, c) = self.shape();
        let mut acc = QuatMatrix::zeros(r, c);
        for coef in self.coeffs.iter().rev() {
            acc = &acc.scale_left(p) + coef;
        }
        acc
    }

    /// `sum_k p^k (-1)^k C_k*`.
    pub fn sharp(&self) -> SlicePolynomial {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| if k % 2 == 0 { c.adjoint() } else { -&c.adjoint() })
            .collect();
        SlicePolynomial { coeffs }
    }

    pub fn to_realization(&self) -> QuatRealization {
        QuatRealization::polynomial(&self.coeffs).expect("shapes checked on construction")
    }
}

/// Coefficient convolution `(G * F)_m = sum_{a+b=m} G_a F_b`.
pub fn star_product(g: &SlicePolynomial, f: &SlicePolynomial) -> Result<SlicePolynomial> {
    let (gr, gc) = g.shape();
    let (fr, fc) = f.shape();
    if gc != fr {
        return Err(Error::DimensionMismatch(format!("star product of {gr}x{gc} and {fr}x{fc}")));
    }
    let mut out = vec![QuatMatrix::zeros(gr, fc); g.coeffs.len() + f.coeffs.len() - 1];
    for (a, ga) in g.coeffs.iter().enumerate() {
        for (b, fb) in f.coeffs.iter().enumerate() {
            out[a + b] = &out[a + b] + &(ga * fb);
        }
    }
    SlicePolynomial::new(out)
}

/// `(p + conj q)^{-star} = (|q|^2 + 2 Re(q) p + p^2)^{-1} (p + q)`, with
/// pole sphere through `-conj q`.
#[derive(Debug, Clone, Copy)]
pub struct StarInverseLinear {
    pub q: Quaternion,
}

pub fn star_inverse_linear(q: Quaternion) -> StarInverseLinear {
    StarInverseLinear { q }
}

impl StarInverseLinear {
    pub fn evaluate(&self, p: Quaternion) -> Result<Quaternion> {
        let q = self.q;
        let r = Quaternion::real(q.norm_sqr()) + p * (2.0 * q.re()) + p * p;
        if r.norm() <= 1e-12 * (1.0 + p.norm_sqr() + q.norm_sqr()) {
            let (x, y, _) = (-q.conj()).slice_decompose();
            return Err(Error::Pole { point: p.to_string(), nearest: c64(x, y), distance: r.norm() });
        }
        Ok(r.inv() * (p + q))
    }
}

/// `(Phi(p) + Phi(q)*) star (p + conj q)^{-star}`, the star acting in `p`.
pub fn carat_kernel(phi: &dyn Fn(Quaternion) -> Result<QuatMatrix>, p: Quaternion, q: Quaternion) -> Result<QuatMatrix> {
    quat_carat_kernel_values(&phi(p)?, &phi(q)?, p, q)
}

/// Largest `|E^{-1} conj(R(conj z)) E - R(z)|` over sample points.
pub fn e_symmetry_defect_of(r: &Realization) -> Result<f64> {
    if !r.n_out().is_multiple_of(2) || !r.n_in().is_multiple_of(2) {
        return Err(Error::DimensionMismatch("E-symmetry needs even dimensions".into()));
    }
    let eo_inv = -e_matrix(r.n_out() / 2);
    let ei = e_matrix(r.n_in() / 2);
    let mut worst: f64 = 0.0;
    for z in r.sample_points(12) {
        let a = r.evaluate(z)?;
        let b = r.evaluate(z.conj())?;
        worst = worst.max(linalg::max_abs(&(&eo_inv * conj(&b) * &ei - &a)) / (1.0 + linalg::max_abs(&a)));
    }
    Ok(worst)
}

pub fn verify_e_symmetry(r: &Realization) -> bool {
    e_symmetry_defect_of(r).is_ok_and(|d| d <= 1e-9)
}

/// Basis change `T` with `conj(T) E = S T`, for an `S` with `conj(S) S = -I`:
/// columns `[T1, -conj(S) conj(T1)]`, grown greedily.
fn quaternionic_basis(s: &CMatrix) -> Result<CMatrix> {
    let m = s.nrows();
    if !m.is_multiple_of(2) {
        return Err(Error::NumericalFailure(format!("odd state dimension {m} cannot carry a quaternionic structure")));
    }
    let j = |x: &CMatrix| -> CMatrix { -(conj(s) * conj(x)) };
    let mut t1 = CMatrix::zeros(m, 0);
    let mut span = CMatrix::zeros(m, 0);
    while t1.ncols() < m / 2 {
        let q = if span.ncols() == 0 { span.clone() } else { linalg::orth(&span, 1e-12) };
        let mut best: Option<(f64, CMatrix)> = None;
        for k in 0..m {
            let mut e = CMatrix::zeros(m, 1);
            e[(k, 0)] = c64(1.0, 0.0);
            let resid = &e - &q * (q.adjoint() * &e);
            let nrm = resid.norm();
            if best.as_ref().is_none_or(|(b, _)| nrm > *b) {
                best = Some((nrm, resid / c64(nrm, 0.0)));
            }
        }
        let (nrm, v) = best.expect("m > 0");
        if nrm < 1e-8 {
            return Err(Error::NumericalFailure("quaternionic basis construction stalled".into()));
        }
        t1 = hstack(&[&t1, &v]);
        span = hstack(&[&span, &v, &j(&v)]);
    }
    let t = hstack(&[&t1, &j(&t1)]);
    let sv = linalg::singular_values(&t);
    if sv[sv.len() - 1] < 1e-10 * sv[0] {
        return Err(Error::NumericalFailure("quaternionic basis is singular".into()));
    }
    Ok(t)
}

/// Quaternionic realization whose lift is similar to the minimal,
/// E-symmetric complex realization `r`.
pub fn e_symmetric_pullback(r: &Realization) -> Result<QuatRealization> {
    if !r.n_out().is_multiple_of(2) || !r.n_in().is_multiple_of(2) {
        return Err(Error::DimensionMismatch("E-symmetry needs even dimensions".into()));
    }
    if !r.is_proper() {
        return Err(Error::Unsupported("pull-back of functions with a polynomial part".into()));
    }
    let eo = e_matrix(r.n_out() / 2);
    let ei = e_matrix(r.n_in() / 2);
    let tol = |m: &CMatrix| 1e-7 * (1.0 + linalg::max_abs(m));
    let d = chi_inverse_tol(r.d(), tol(r.d()))?;
    if r.state_dim() == 0 {
        return Ok(QuatRealization::constant(d));
    }
    let mirrored = Realization::new(conj(r.a()), conj(r.b()) * &ei, -(&eo * conj(r.c())), -(&eo * conj(r.d()) * &ei))?;
    let s = similarity(r, &mirrored).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::NumericalFailure(format!("realization is not E-symmetric: {msg}")),
        other => other,
    })?;
    // The intertwiner is unique, so conj(S) S = -I up to rounding.
    let t = quaternionic_basis(&s)?;
    let tinv = linalg::inverse(&t)?;
    let a = &tinv * r.a() * &t;
    let b = &tinv * r.b();
    let c = r.c() * &t;
    QuatRealization::new(
        chi_inverse_tol(&a, tol(&a))?,
        chi_inverse_tol(&b, tol(&b))?,
        chi_inverse_tol(&c, tol(&c))?,
        d,
    )
}

/// Minimal quaternionic realization: minimize the lift and pull it back.
pub fn quat_minimize(r: &QuatRealization) -> Result<QuatRealization> {
    if !r.is_proper() {
        return Err(Error::Unsupported("minimizing functions with a polynomial part".into()));
    }
    e_symmetric_pullback(&minimize(&r.lift())?)
}

#[derive(Debug, Clone, Serialize)]
pub struct QuatFactorizationResult {
    pub side: Side,
    pub factor: QuatRealization,
    /// Factorization of the complex lift.
    pub lifted: FactorizationResult,
    /// `max |Phi(p) - (L^# * L)(p)|` over quaternionic samples.
    pub residual: f64,
    pub e_symmetry_defect: f64,
}

/// Factor `Phi = L^# * L` over the quaternions by factoring the lift and
/// pulling the (necessarily E-symmetric) complex factor back.
pub fn quat_gpe_factor(r: &QuatRealization, side: Side, regularize: bool) -> Result<QuatFactorizationResult> {
    if r.n_in() != r.n_out() {
        return Err(Error::NotEven("function is not square".into()));
    }
    let lift = r.lift();
    let lifted = if regularize { factor_regularized(&lift, side)? } else { pseudo_spectral_factor(&lift, side)? };
    let defect = e_symmetry_defect_of(&lifted.factor)?;
    if defect > 1e-7 {
        return Err(Error::NumericalFailure(format!("factor of the lift is not E-symmetric (defect {defect:e})")));
    }
    let factor = if lifted.factor.is_proper() {
        e_symmetric_pullback(&lifted.factor)?
    } else {
        return Err(Error::Unsupported("quaternionic factors with a polynomial part".into()));
    };
    let back = star_product_realization(&factor.sharp(), &factor)?;
    let residual = quat_max_difference(r, &back, &quat_samples(r))?;
    Ok(QuatFactorizationResult { side, factor, lifted, residual, e_symmetry_defect: defect })
}

/// Deterministic quaternionic samples away from the pole spheres: 20 off
/// the complex slice and 10 on it.
pub fn quat_samples(r: &QuatRealization) -> Vec<Quaternion> {
    let lift = r.lift();
    let mut avoid: Vec<_> = lift.poles().to_vec();
    avoid.extend(lift.poles().iter().map(|z| z.conj()));
    sampling::quaternion_samples(20, 10, &avoid)
}

pub fn quat_max_difference(r1: &QuatRealization, r2: &QuatRealization, points: &[Quaternion]) -> Result<f64> {
    let (l1, l2) = (r1.lift(), r2.lift());
    let mut worst: f64 = 0.0;
    for &p in points {
        let a = r1.evaluate_slice_with(&l1, p)?;
        let b = r2.evaluate_slice_with(&l2, p)?;
        worst = worst.max((&a - &b).max_abs());
    }
    Ok(worst)
}
