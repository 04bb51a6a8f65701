//! Pseudo-spectral factorization `Phi = L^# L` of even rational matrix
//! functions that are positive semidefinite on the imaginary axis.
//!
//! With `A^x = A - B D^{-1} C`, `M_+` / `M_-` are the spectral subspaces of
//! `A` for the open right / left half-plane and `M_+^x` / `M_-^x` those of
//! `A^x`; each also receives the first half of every Jordan chain at an
//! imaginary-axis eigenvalue. The factor with poles and zeros in the closed
//! left half-plane is
//! `L(z) = D^{1/2} + D^{-1/2} C Pi (zI - A)^{-1} B`, where `Pi` projects onto
//! `M_-^x` along `M_+`; the mirrored factor uses `M_+^x` along `M_-`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{boundary_positivity, solve_structure_h, StructureMatrix};
use crate::error::{Error, Result};
use crate::linalg::{
    self, c64, eig_with_schur, hermitian_eigen, hstack, inverse, norm, orth, projection_along, psd_sqrt, zeros, CMatrix,
    SubspaceBasis,
};
use crate::poly;
use crate::realization::{minimize, product, Realization};
use crate::sampling;

/// Imaginary-axis band, relative to `1 + |A|`.
pub const AXIS_RTOL: f64 = 1e-8;
/// Tolerated negativity of `Phi` on the imaginary axis, relative to `1 + |D|`.
pub const BOUNDARY_TOL: f64 = 1e-6;
/// Distance between successive regularized factors that counts as converged.
pub const EPS_CONVERGENCE: f64 = 1e-6;

/// Which factor to return. `Right` has its poles and zeros in the closed
/// left half-plane (the factor normalized by `L(infinity) = D^{1/2}` in the
/// quaternionic theory as well); `Left` is the mirror image, with poles and
/// zeros in the closed right half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Side> {
        match s {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            _ => Err(Error::InvalidInput(format!("side must be left or right, got {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectralSubspaces {
    pub m_plus: SubspaceBasis,
    pub m_minus: SubspaceBasis,
    pub m_plus_cross: SubspaceBasis,
    pub m_minus_cross: SubspaceBasis,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FactorizationResult {
    pub side: Side,
    pub factor: Realization,
    pub subspaces: SpectralSubspaces,
    #[serde(with = "crate::io::cmatrix_serde")]
    pub projection: CMatrix,
    pub residual: f64,
    /// `(epsilon, distance to the previous factor)` for regularized runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon_path: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PoleZeroReport {
    pub poles: Vec<[f64; 2]>,
    /// `None` when the factor has a polynomial part or singular `D`.
    pub zeros: Option<Vec<[f64; 2]>>,
    pub max_real_part: f64,
    pub min_real_part: f64,
}

impl PoleZeroReport {
    /// Every pole and zero lies in the closed half-plane of `side`, up to `tol`.
    pub fn located(&self, side: Side, tol: f64) -> bool {
        match side {
            Side::Right => self.max_real_part <= tol,
            Side::Left => self.min_real_part >= -tol,
        }
    }
}

fn axis_band(a: &CMatrix) -> f64 {
    AXIS_RTOL * (1.0 + norm(a))
}

/// The two half-plane subspaces of `a` (open right, open left) each joined
/// with the half-chains at the imaginary-axis eigenvalues.
fn half_plane_subspaces(a: &CMatrix) -> Result<(SubspaceBasis, SubspaceBasis)> {
    let n = a.nrows();
    if n == 0 {
        return Ok((SubspaceBasis::empty(0), SubspaceBasis::empty(0)));
    }
    let tau = axis_band(a);
    let (structure, cschur) = eig_with_schur(a)?;
    let mut halves: Vec<CMatrix> = Vec::new();
    for cl in &structure.clusters {
        if cl.value.re.abs() > tau {
            continue;
        }
        for chain in &cl.chains {
            if chain.len() % 2 == 1 {
                return Err(Error::Unsupported(format!(
                    "imaginary-axis eigenvalue {} has odd partial multiplicity {}",
                    cl.value,
                    chain.len()
                )));
            }
            halves.push(chain.vectors.columns(0, chain.len() / 2).into_owned());
        }
    }
    let clusters = &structure.clusters;
    let rhp = cschur.subspace(|ci| clusters[ci].value.re > tau);
    let lhp = cschur.subspace(|ci| clusters[ci].value.re < -tau);
    let join = |base: CMatrix| -> Result<SubspaceBasis> {
        let mut parts = vec![base];
        parts.extend(halves.iter().cloned());
        let refs: Vec<&CMatrix> = parts.iter().collect();
        let m = hstack(&refs);
        let expected = m.ncols();
        let q = orth(&m, 1e-10 * linalg::singular_values(&m).first().copied().unwrap_or(0.0));
        if q.ncols() != expected {
            return Err(Error::NumericalFailure("spectral and axis subspaces are not independent".into()));
        }
        SubspaceBasis::new(q)
    };
    Ok((join(rhp)?, join(lhp)?))
}

/// Relative H-neutrality defect `|U* H U| / |H|` of an orthonormal basis.
fn neutrality_defect(h: &CMatrix, s: &SubspaceBasis) -> f64 {
    if s.dim() == 0 {
        return 0.0;
    }
    linalg::max_abs(&(s.basis.adjoint() * h * &s.basis)) / linalg::max_abs(h).max(1e-300)
}

/// Tolerance for the a-posteriori H-neutrality check.
const NEUTRALITY_TOL: f64 = 1e-6;

/// The four subspaces for a minimal realization with invertible `D`.
pub fn spectral_subspaces(r: &Realization, h: &StructureMatrix) -> Result<SpectralSubspaces> {
    let n = r.state_dim();
    if h.h.shape() != (n, n) {
        return Err(Error::DimensionMismatch("structure matrix does not match the state dimension".into()));
    }
    if n == 0 {
        let e = SubspaceBasis::empty(0);
        return Ok(SpectralSubspaces { m_plus: e.clone(), m_minus: e.clone(), m_plus_cross: e.clone(), m_minus_cross: e });
    }
    let ax = r.associated_matrix()?;
    let (m_plus, m_minus) = half_plane_subspaces(r.a())?;
    let (m_plus_cross, m_minus_cross) = half_plane_subspaces(&ax)?;
    let subs = SpectralSubspaces { m_plus, m_minus, m_plus_cross, m_minus_cross };
    for (name, s) in [
        ("M+", &subs.m_plus),
        ("M-", &subs.m_minus),
        ("M+x", &subs.m_plus_cross),
        ("M-x", &subs.m_minus_cross),
    ] {
        let defect = neutrality_defect(&h.h, s);
        if s.dim() * 2 != n || defect > NEUTRALITY_TOL {
            return Err(Error::NumericalFailure(format!(
                "{name} (dim {} of {n}) is not H-Lagrangian: defect {defect:e}",
                s.dim()
            )));
        }
    }
    Ok(subs)
}

fn check_positive_d(d: &CMatrix) -> Result<()> {
    let (vals, _) = hermitian_eigen(&((d + d.adjoint()) * c64(0.5, 0.0)));
    let min = vals.first().copied().unwrap_or(f64::INFINITY);
    let max = vals.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if min <= 1e-10 * max.max(1.0) {
        return Err(Error::SingularD { min_eig: min });
    }
    Ok(())
}

fn check_boundary(r: &Realization) -> Result<()> {
    let rep = boundary_positivity(r, 61)?;
    let tol = BOUNDARY_TOL * (1.0 + linalg::max_abs(r.d()));
    if rep.min_eig < -tol {
        return Err(Error::NotGpe(format!(
            "Phi is not positive on the imaginary axis: min eigenvalue {:.3e} at {}",
            rep.min_eig, rep.worst_point
        )));
    }
    Ok(())
}

/// Range and kernel of the projection for `side`.
fn projection_spaces(subs: &SpectralSubspaces, side: Side) -> (&SubspaceBasis, &SubspaceBasis) {
    match side {
        Side::Right => (&subs.m_minus_cross, &subs.m_plus),
        Side::Left => (&subs.m_plus_cross, &subs.m_minus),
    }
}

struct Core {
    minimal: Realization,
    subspaces: SpectralSubspaces,
    projection: CMatrix,
}

/// Structure, subspaces and projection for a proper, even, positive
/// realization with `D` invertible.
fn factor_core(r: &Realization, side: Side) -> Result<Core> {
    let m = minimize(r)?;
    let h = solve_structure_h(&m)?;
    let subspaces = spectral_subspaces(&m, &h)?;
    let (range, kernel) = projection_spaces(&subspaces, side);
    let projection = projection_along(range, kernel)?;
    Ok(Core { minimal: m, subspaces, projection })
}

/// `(A_L, B_L, C_L)` from compressing `(A, B, C_out Pi)` to the range of `Pi`.
fn compress(a: &CMatrix, b: &CMatrix, c_pi: &CMatrix, range: &SubspaceBasis, projection: &CMatrix) -> (CMatrix, CMatrix, CMatrix) {
    let u = &range.basis;
    let y = u.adjoint() * projection;
    (&y * a * u, &y * b, c_pi * u)
}

fn samples_for(phi: &Realization, l: &Realization) -> Vec<Complex64> {
    let mut avoid: Vec<Complex64> = phi.poles().to_vec();
    avoid.extend(l.poles().iter().copied());
    avoid.extend(l.poles().iter().map(|p| -p.conj()));
    sampling::function_samples(50, &avoid)
}

/// Factorization of a proper `Phi` with `D > 0`.
pub fn pseudo_spectral_factor(r: &Realization, side: Side) -> Result<FactorizationResult> {
    if r.n_in() != r.n_out() {
        return Err(Error::NotEven("function is not square".into()));
    }
    if !r.is_proper() {
        return factor_improper(r, side, false);
    }
    check_positive_d(r.d())?;
    check_boundary(r)?;
    let core = factor_core(r, side)?;
    let m = &core.minimal;
    let d_half = psd_sqrt(m.d(), 0.0)?;
    let d_half_inv = inverse(&d_half)?;
    let (range, _) = projection_spaces(&core.subspaces, side);
    let c_pi = &d_half_inv * m.c() * &core.projection;
    let (a_l, b_l, c_l) = compress(m.a(), m.b(), &c_pi, range, &core.projection);
    let factor = minimize(&Realization::new(a_l, b_l, c_l, d_half)?)?;
    finish(r, factor, side, core.subspaces, core.projection, None)
}

fn finish(
    phi: &Realization,
    factor: Realization,
    side: Side,
    subspaces: SpectralSubspaces,
    projection: CMatrix,
    epsilon_path: Option<Vec<(f64, f64)>>,
) -> Result<FactorizationResult> {
    let samples = samples_for(phi, &factor);
    let (residual, report) = verify_factorization(phi, &factor, &samples)?;
    let scale = 1.0 + samples.iter().filter_map(|z| phi.evaluate(*z).ok()).map(|v| norm(&v)).fold(0.0, f64::max);
    if residual > 1e-6 * scale {
        return Err(Error::NumericalFailure(format!("factor does not reproduce Phi (residual {residual:e})")));
    }
    let loc_tol = 1e-6 * (1.0 + norm(factor.a()));
    if !report.located(side, loc_tol) {
        return Err(Error::NumericalFailure(format!(
            "factor has poles or zeros on the wrong side (real parts in [{:e}, {:e}])",
            report.min_real_part, report.max_real_part
        )));
    }
    Ok(FactorizationResult { side, factor, subspaces, projection, residual, epsilon_path })
}

/// Limit factor for `D >= 0` singular: factors `Phi + eps I` for
/// `eps = 1e-1 .. 1e-8` in the fixed coordinates of a minimal realization of
/// `Phi`, replacing `D_eps^{1/2}` by `D^{1/2}`, and stops once successive
/// factors (or their extrapolations to `eps = 0`) agree to `EPS_CONVERGENCE`
/// on an annulus `0.5 <= |z| <= 2`.
pub fn factor_regularized(r: &Realization, side: Side) -> Result<FactorizationResult> {
    if r.n_in() != r.n_out() {
        return Err(Error::NotEven("function is not square".into()));
    }
    if !r.is_proper() {
        return factor_improper(r, side, true);
    }
    if check_positive_d(r.d()).is_ok() {
        return pseudo_spectral_factor(r, side);
    }
    let d = r.d();
    if linalg::min_hermitian_eigenvalue(&((d + d.adjoint()) * c64(0.5, 0.0))) < -BOUNDARY_TOL * (1.0 + linalg::max_abs(d)) {
        return Err(Error::NotGpe("D is not positive semidefinite".into()));
    }
    check_boundary(r)?;
    let m = minimize(r)?;
    let k = m.n_out();
    let d_half = psd_sqrt(m.d(), 1e-12 * (1.0 + linalg::max_abs(m.d())))?;
    let test_points = sampling::annulus_points(20, 0.5, 2.0, m.poles(), 1e-2);

    let distance = |a: &[CMatrix], b: &[CMatrix]| a.iter().zip(b).map(|(x, y)| norm(&(x - y))).fold(0.0, f64::max);
    let mut path = Vec::new();
    let mut previous: Option<(Realization, Vec<CMatrix>)> = None;
    let mut previous_extrapolated: Option<Vec<CMatrix>> = None;
    for e in 1..=8 {
        let eps = 10f64.powi(-e);
        let shifted = Realization::new(m.a().clone(), m.b().clone(), m.c().clone(), m.d() + linalg::identity(k) * c64(eps, 0.0))?;
        let core = factor_core(&shifted, side)?;
        let d_eps_half_inv = inverse(&psd_sqrt(shifted.d(), 0.0)?)?;
        let c_eps = &d_eps_half_inv * core.minimal.c() * &core.projection;
        let limit = Realization::new(core.minimal.a().clone(), core.minimal.b().clone(), c_eps, d_half.clone())?;
        let values: Vec<CMatrix> = test_points.iter().map(|z| limit.evaluate(*z)).collect::<Result<_>>()?;
        let dist = previous.as_ref().map_or(f64::INFINITY, |(_, prev)| distance(&values, prev));
        path.push((eps, dist));
        if dist < EPS_CONVERGENCE {
            let factor = limit_factor(&core, &limit, side)?;
            return finish(r, factor, side, core.subspaces, core.projection, Some(path));
        }
        // Where the zero structure at the boundary degenerates the output
        // matrix moves like sqrt(eps); one Richardson step in sqrt(eps)
        // removes that term. Only valid when both steps share coordinates,
        // which holds because A, B, C do not change with eps.
        let mut extrapolated_values = None;
        if let Some((prev, _)) = previous.as_ref().filter(|(p, _)| p.a() == limit.a() && p.b() == limit.b()) {
            let rho = 10f64.powf(-0.5);
            let c_ext = (limit.c() - prev.c() * c64(rho, 0.0)) / c64(1.0 - rho, 0.0);
            let ext = Realization::new(limit.a().clone(), limit.b().clone(), c_ext, d_half.clone())?;
            let ext_values: Vec<CMatrix> = test_points.iter().map(|z| ext.evaluate(*z)).collect::<Result<_>>()?;
            if previous_extrapolated.as_ref().is_some_and(|p| distance(&ext_values, p) < EPS_CONVERGENCE) {
                let factor = limit_factor(&core, &ext, side)?;
                return finish(r, factor, side, core.subspaces, core.projection, Some(path));
            }
            extrapolated_values = Some(ext_values);
        }
        previous_extrapolated = extrapolated_values;
        previous = Some((limit, values));
    }
    Err(Error::NumericalFailure(format!("regularized factors did not converge; epsilon path {path:?}")))
}

/// Compress the limit factor to the range of the projection and minimize.
fn limit_factor(core: &Core, limit: &Realization, side: Side) -> Result<Realization> {
    let (range, _) = projection_spaces(&core.subspaces, side);
    let (a_l, b_l, c_l) = compress(limit.a(), limit.b(), limit.c(), range, &core.projection);
    minimize(&Realization::new(a_l, b_l, c_l, limit.d().clone())?)
}

/// Functions with a polynomial part: factor the proper function
/// `Psi = Phi / prod (s_k^2 - z^2)` and multiply by `prod (s_k + z)` (or `prod (s_k - z)`).
fn factor_improper(r: &Realization, side: Side, regularize: bool) -> Result<FactorizationResult> {
    let deg = r.poly().len();
    let d = deg.div_ceil(2);
    // Distinct shifts keep Psi free of repeated (Jordan) poles, which would
    // cost accuracy like eps^(1/d).
    let shifts: Vec<f64> = (0..d).map(|k| 1.0 + 0.5 * k as f64).collect();
    // prod (s^2 - z^2) = (-1)^d prod (z - s)(z + s)
    let roots: Vec<Complex64> = shifts.iter().flat_map(|&s| [c64(s, 0.0), c64(-s, 0.0)]).collect();
    let lead = c64(if d.is_multiple_of(2) { 1.0 } else { -1.0 }, 0.0);
    let mut num = vec![r.d().clone()];
    num.extend(r.poly().iter().cloned());
    let poly_part = poly::simple_pole_realization(&num, &roots, lead)?;
    let strict = Realization::new(r.a().clone(), r.b().clone(), r.c().clone(), zeros(r.n_out(), r.n_in()))?;
    let k = r.n_in();
    let scalar = poly::simple_pole_realization(&[linalg::identity(k)], &roots, lead)?;
    let psi = minimize(&poly_part.sum(&product(&strict, &scalar)?)?)?;
    let inner = if regularize { factor_regularized(&psi, side)? } else { pseudo_spectral_factor(&psi, side)? };
    // Psi = Phi / (g^# g) with g = prod (s_k + z); the right factor is g M and
    // the left factor g^# M with g^# = prod (s_k - z).
    let sign = if side == Side::Right { 1.0 } else { -1.0 };
    let c = shifts.iter().fold(vec![c64(1.0, 0.0)], |acc, &s| poly::mul(&acc, &[c64(s, 0.0), c64(sign, 0.0)]));
    let factor = minimize(&inner.factor.times_scalar_polynomial(&c)?)?;
    finish(r, factor, side, inner.subspaces, inner.projection, inner.epsilon_path)
}

/// `max |Phi(z) - L^#(z) L(z)|` over `samples` and the pole/zero location of `L`.
pub fn verify_factorization(phi: &Realization, l: &Realization, samples: &[Complex64]) -> Result<(f64, PoleZeroReport)> {
    let ls = l.sharp();
    let mut residual: f64 = 0.0;
    for z in samples {
        let (Ok(p), Ok(a), Ok(b)) = (phi.evaluate(*z), ls.evaluate(*z), l.evaluate(*z)) else { continue };
        residual = residual.max(norm(&(p - a * b)));
    }
    let poles = l.poles().to_vec();
    let zeros = if l.is_proper() && l.n_in() == l.n_out() && linalg::rank(l.d()) == l.n_in() {
        l.zeros().ok()
    } else {
        None
    };
    let all: Vec<Complex64> = poles.iter().chain(zeros.iter().flatten()).copied().collect();
    let max_real_part = all.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let min_real_part = all.iter().map(|z| z.re).fold(f64::INFINITY, f64::min);
    let pair = |v: &Vec<Complex64>| v.iter().map(|z| [z.re, z.im]).collect::<Vec<_>>();
    Ok((
        residual,
        PoleZeroReport { poles: pair(&poles), zeros: zeros.as_ref().map(pair), max_real_part, min_real_part },
    ))
}

/// Scalar polynomial factor `f` with `f^# f = p` (ascending coefficients).
/// `Left` takes the roots with `Re >= 0`, `Right` those with `Re <= 0`;
/// imaginary-axis roots must have even multiplicity and are split evenly.
/// The factors are `c prod (z - r)` (`Right`) and `c prod (r - z)` (`Left`)
/// with `c > 0`.
pub fn factor_scalar_polynomial(coeffs: &[Complex64], side: Side) -> Result<Vec<Complex64>> {
    let scale = coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::InvalidInput("zero polynomial".into()));
    }
    let p = poly::trim(coeffs, 1e-14 * scale);
    let tol = 1e-10 * scale;
    if poly::max_coeff_distance(&p, &poly::sharp(&p)) > tol {
        return Err(Error::NotEven("polynomial is not even".into()));
    }
    let n = p.len() - 1;
    if n % 2 == 1 {
        return Err(Error::NotGpe("odd degree polynomial takes both signs on the imaginary axis".into()));
    }
    let d = n / 2;
    let lead = p[n] * if d.is_multiple_of(2) { 1.0 } else { -1.0 };
    if lead.re <= 0.0 {
        return Err(Error::NotGpe("leading behaviour is negative on the imaginary axis".into()));
    }
    let mut chosen = Vec::with_capacity(d);
    let roots = poly::root_clusters(&p)?;
    let band = AXIS_RTOL * (1.0 + roots.iter().map(|(z, _)| z.norm()).fold(0.0, f64::max));
    for (z, mult) in roots {
        if z.re.abs() <= band.max(1e-7 * (1.0 + z.norm())) {
            if mult % 2 == 1 {
                return Err(Error::NotGpe(format!("imaginary-axis root {z} has odd multiplicity {mult}")));
            }
            chosen.extend(std::iter::repeat_n(c64(0.0, z.im), mult / 2));
        } else if (z.re > 0.0) == (side == Side::Left) {
            chosen.extend(std::iter::repeat_n(z, mult));
        }
    }
    if chosen.len() != d {
        return Err(Error::NumericalFailure(format!("selected {} roots, expected {d}", chosen.len())));
    }
    // Right: c prod (z - r), Left: c prod (r - z), with c > 0; the two
    // factors are then mirror images of each other.
    let sign = if side == Side::Left && d % 2 == 1 { -1.0 } else { 1.0 };
    let f: Vec<Complex64> = poly::from_roots(&chosen).iter().map(|c| c * (sign * lead.re.sqrt())).collect();
    let back = poly::mul(&poly::sharp(&f), &f);
    let err = poly::max_coeff_distance(&back, &p);
    if err > 1e-8 * scale {
        return Err(Error::NotGpe(format!("factor does not reproduce the polynomial (coefficient error {err:e})")));
    }
    for y in [0.0, 0.5, 1.0, 2.0, 10.0] {
        if poly::eval(&p, c64(0.0, y)).re < -tol {
            return Err(Error::NotGpe(format!("negative on the imaginary axis at {y}i")));
        }
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::from_real;
    use crate::realization::gpe_from_factor;

    fn ratio() -> Realization {
        Realization::new(
            from_real(2, 2, &[2.0, 0.0, 0.0, -2.0]),
            from_real(2, 1, &[1.0, 1.0]),
            from_real(1, 2, &[0.75, -0.75]),
            from_real(1, 1, &[1.0]),
        )
        .unwrap()
    }

    fn scalar_at(r: &Realization, z: Complex64) -> Complex64 {
        r.evaluate(z).unwrap()[(0, 0)]
    }

    #[test]
    fn ratio_subspaces_and_factors() {
        let r = ratio();
        let h = solve_structure_h(&r).unwrap();
        let s = spectral_subspaces(&r, &h).unwrap();
        assert_eq!((s.m_plus.dim(), s.m_minus.dim()), (1, 1));
        let e1 = SubspaceBasis::new(from_real(2, 1, &[1.0, 0.0])).unwrap();
        assert!(s.m_plus.contained_in(&e1, 1e-12));
        let right = pseudo_spectral_factor(&r, Side::Right).unwrap();
        let left = pseudo_spectral_factor(&r, Side::Left).unwrap();
        for z in [c64(0.3, 0.4), c64(-1.0, 2.0), c64(5.0, 0.0)] {
            assert!((scalar_at(&right.factor, z) - (z + 1.0) / (z + 2.0)).norm() < 1e-12);
            assert!((scalar_at(&left.factor, z) - (1.0 - z) / (2.0 - z)).norm() < 1e-12);
        }
        assert!(right.residual < 1e-12);
    }

    #[test]
    fn identity_factors_to_identity() {
        let r = Realization::constant(linalg::identity(2));
        let f = pseudo_spectral_factor(&r, Side::Right).unwrap();
        assert_eq!(f.factor.state_dim(), 0);
        assert!(linalg::max_abs(&(f.factor.d() - linalg::identity(2))) < 1e-15);
    }

    #[test]
    fn round_trip_from_known_factor() {
        // L0 = (z + 1) / (z + 2), Phi = L0^# L0.
        let l0 = Realization::new(from_real(1, 1, &[-2.0]), from_real(1, 1, &[1.0]), from_real(1, 1, &[-1.0]), from_real(1, 1, &[1.0])).unwrap();
        let phi = gpe_from_factor(&l0.sharp()).unwrap();
        let f = pseudo_spectral_factor(&phi, Side::Right).unwrap();
        for z in [c64(0.1, 0.2), c64(3.0, -1.0)] {
            assert!((scalar_at(&f.factor, z) - scalar_at(&l0, z)).norm() < 1e-9);
        }
    }

    #[test]
    fn singular_d_needs_regularization() {
        let r = crate::realization::tests::minus_inv_z2();
        assert!(matches!(pseudo_spectral_factor(&r, Side::Right), Err(Error::SingularD { .. })));
        let f = factor_regularized(&r, Side::Right).unwrap();
        for z in sampling::annulus_points(20, 0.5, 2.0, &[c64(0.0, 0.0)], 1e-2) {
            assert!((scalar_at(&f.factor, z) - 1.0 / z).norm() <= 1e-6);
        }
        assert!(f.epsilon_path.unwrap().len() >= 2);
    }

    #[test]
    fn axis_poles_split_in_halves() {
        // eps - 1/z^2: a Jordan block of size two at zero.
        let base = crate::realization::tests::minus_inv_z2();
        let r = Realization::new(base.a().clone(), base.b().clone(), base.c().clone(), from_real(1, 1, &[0.25])).unwrap();
        let h = solve_structure_h(&r).unwrap();
        let s = spectral_subspaces(&r, &h).unwrap();
        assert_eq!((s.m_plus.dim(), s.m_minus.dim()), (1, 1));
        // L = (z/2 + 1)/z
        let f = pseudo_spectral_factor(&r, Side::Right).unwrap();
        let z = c64(0.7, -0.4);
        assert!((scalar_at(&f.factor, z) - (z * 0.5 + 1.0) / z).norm() < 1e-9);
    }

    #[test]
    fn negative_boundary_is_rejected() {
        let r = Realization::new(
            from_real(2, 2, &[2.0, 0.0, 0.0, -2.0]),
            from_real(2, 1, &[1.0, 1.0]),
            from_real(1, 2, &[3.0, -3.0]),
            from_real(1, 1, &[1.0]),
        )
        .unwrap();
        // 1 + 12/(z^2 - 4) is -2 at z = 0.
        assert!(matches!(pseudo_spectral_factor(&r, Side::Right), Err(Error::NotGpe(_))));
    }

    #[test]
    fn scalar_polynomial_route() {
        let mut p = vec![c64(0.0, 0.0); 7];
        p[0] = c64(2.0, 0.0);
        p[6] = c64(-1.0, 0.0);
        let f = factor_scalar_polynomial(&p, Side::Left).unwrap();
        let mut roots = poly::roots(&f).unwrap();
        roots.sort_by(|a, b| a.im.total_cmp(&b.im));
        let r6 = 2f64.powf(1.0 / 6.0);
        let want = [
            Complex64::from_polar(r6, -std::f64::consts::PI / 3.0),
            c64(r6, 0.0),
            Complex64::from_polar(r6, std::f64::consts::PI / 3.0),
        ];
        for (a, b) in roots.iter().zip(want) {
            assert!((a - b).norm() < 1e-9);
        }
        let four = factor_scalar_polynomial(&[c64(4.0, 0.0)], Side::Right).unwrap();
        assert!((four[0] - 2.0).norm() < 1e-15);
        let bad = [c64(-2.0, 0.0), c64(0.0, 0.0), c64(4.0, 0.0), c64(0.0, 0.0), c64(-1.0, 0.0)];
        assert!(matches!(factor_scalar_polynomial(&bad, Side::Left), Err(Error::NotGpe(_))));
    }

    #[test]
    fn realization_route_agrees_with_polynomial_route() {
        let mut coeffs = vec![zeros(1, 1); 7];
        coeffs[0] = from_real(1, 1, &[2.0]);
        coeffs[6] = from_real(1, 1, &[-1.0]);
        let r = Realization::polynomial(&coeffs).unwrap();
        for side in [Side::Left, Side::Right] {
            let f = pseudo_spectral_factor(&r, side).unwrap();
            assert_eq!(f.factor.state_dim(), 0);
            let mut got = vec![f.factor.d()[(0, 0)]];
            got.extend(f.factor.poly().iter().map(|m| m[(0, 0)]));
            let p: Vec<Complex64> = coeffs.iter().map(|m| m[(0, 0)]).collect();
            let want = factor_scalar_polynomial(&p, side).unwrap();
            assert!(poly::max_coeff_distance(&got, &want) < 1e-8, "{got:?} vs {want:?}");
        }
    }
}
