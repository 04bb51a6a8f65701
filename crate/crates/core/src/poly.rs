//! Scalar complex polynomials as ascending coefficient vectors.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c64, eig, zeros, CMatrix};
use crate::realization::Realization;

/// Drop trailing coefficients with modulus `<= tol`.
pub fn trim(p: &[Complex64], tol: f64) -> Vec<Complex64> {
    let mut v = p.to_vec();
    while v.last().is_some_and(|c| c.norm() <= tol) {
        v.pop();
    }
    v
}

pub fn degree(p: &[Complex64]) -> Option<usize> {
    p.iter().rposition(|c| *c != Complex64::new(0.0, 0.0))
}

pub fn eval(p: &[Complex64], z: Complex64) -> Complex64 {
    p.iter().rev().fold(c64(0.0, 0.0), |acc, &c| acc * z + c)
}

pub fn mul(p: &[Complex64], q: &[Complex64]) -> Vec<Complex64> {
    if p.is_empty() || q.is_empty() {
        return Vec::new();
    }
    let mut out = vec![c64(0.0, 0.0); p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Monic polynomial with the given roots.
pub fn from_roots(roots: &[Complex64]) -> Vec<Complex64> {
    roots.iter().fold(vec![c64(1.0, 0.0)], |acc, r| mul(&acc, &[-r, c64(1.0, 0.0)]))
}

/// Coefficients of `p^#(z) = conj(p(-conj z))`.
pub fn sharp(p: &[Complex64]) -> Vec<Complex64> {
    p.iter()
        .enumerate()
        .map(|(k, c)| if k % 2 == 0 { c.conj() } else { -c.conj() })
        .collect()
}

pub fn max_coeff_distance(p: &[Complex64], q: &[Complex64]) -> f64 {
    let n = p.len().max(q.len());
    (0..n)
        .map(|k| {
            let a = p.get(k).copied().unwrap_or_default();
            let b = q.get(k).copied().unwrap_or_default();
            (a - b).norm()
        })
        .fold(0.0, f64::max)
}

/// Companion matrix whose characteristic polynomial is `p` made monic.
pub fn companion(p: &[Complex64]) -> Result<CMatrix> {
    let p = trim(p, 0.0);
    let n = p.len().saturating_sub(1);
    if p.is_empty() {
        return Err(Error::InvalidInput("zero polynomial".into()));
    }
    let lead = p[n];
    let mut m = zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = c64(1.0, 0.0);
    }
    for i in 0..n {
        m[(i, n - 1)] = -p[i] / lead;
    }
    Ok(m)
}

/// Roots grouped by the clustering of the eigen-solver: `(mean, multiplicity)`.
pub fn root_clusters(p: &[Complex64]) -> Result<Vec<(Complex64, usize)>> {
    let c = companion(p)?;
    if c.nrows() == 0 {
        return Ok(Vec::new());
    }
    let e = eig(&c)?;
    Ok(e.clusters.iter().map(|cl| (cl.value, cl.multiplicity)).collect())
}

pub fn roots(p: &[Complex64]) -> Result<Vec<Complex64>> {
    let c = companion(p)?;
    if c.nrows() == 0 {
        return Ok(Vec::new());
    }
    Ok(linalg::schur(&c)?.eigenvalues())
}

/// Controllable canonical realization of `num(z) / den(z)` with matrix
/// numerator coefficients (`deg num <= deg den`), i.e. `(A (x) I, e_n (x) I, [R_0 .. R_{n-1}], D)`.
pub fn rational_realization(num: &[CMatrix], den: &[Complex64]) -> Result<Realization> {
    let den = trim(den, 0.0);
    let n = den.len().checked_sub(1).ok_or_else(|| Error::InvalidInput("zero denominator".into()))?;
    let (rows, cols) = num.first().map(|m| m.shape()).ok_or_else(|| Error::InvalidInput("empty numerator".into()))?;
    if num.len() > n + 1 {
        return Err(Error::InvalidInput("numerator degree exceeds denominator degree".into()));
    }
    let lead = den[n];
    let monic: Vec<Complex64> = den.iter().map(|c| c / lead).collect();
    let coeff = |k: usize| num.get(k).map(|m| m / lead).unwrap_or_else(|| zeros(rows, cols));
    let d = coeff(n);
    let mut a = zeros(n * cols, n * cols);
    let mut b = zeros(n * cols, cols);
    let mut c = zeros(rows, n * cols);
    for i in 0..n {
        for k in 0..cols {
            if i + 1 < n {
                a[(i * cols + k, (i + 1) * cols + k)] = c64(1.0, 0.0);
            }
            a[((n - 1) * cols + k, i * cols + k)] = -monic[i];
        }
        let r = coeff(i) - &d * monic[i];
        c.view_mut((0, i * cols), (rows, cols)).copy_from(&r);
    }
    for k in 0..cols {
        b[((n - 1) * cols + k, k)] = c64(1.0, 0.0);
    }
    Realization::new(a, b, c, d)
}

/// Diagonal realization of `num(z) / (lead * prod (z - roots))` for simple
/// `roots` and matrix numerator coefficients (`deg num <= #roots`).
pub fn simple_pole_realization(num: &[CMatrix], roots: &[Complex64], lead: Complex64) -> Result<Realization> {
    let (rows, cols) = num.first().map(|m| m.shape()).ok_or_else(|| Error::InvalidInput("empty numerator".into()))?;
    let m = roots.len();
    if num.len() > m + 1 {
        return Err(Error::InvalidInput("numerator degree exceeds denominator degree".into()));
    }
    let d = if num.len() == m + 1 { &num[m] / lead } else { zeros(rows, cols) };
    let mut a = zeros(m * cols, m * cols);
    let mut b = zeros(m * cols, cols);
    let mut c = zeros(rows, m * cols);
    for (j, &r) in roots.iter().enumerate() {
        let mut dp = lead;
        for (i, &s) in roots.iter().enumerate() {
            if i != j {
                dp *= r - s;
            }
        }
        if dp.norm() == 0.0 {
            return Err(Error::InvalidInput("denominator roots must be simple".into()));
        }
        let value = num.iter().rev().fold(zeros(rows, cols), |acc, x| acc * r + x);
        c.view_mut((0, j * cols), (rows, cols)).copy_from(&(value / dp));
        for k in 0..cols {
            a[(j * cols + k, j * cols + k)] = r;
            b[(j * cols + k, k)] = c64(1.0, 0.0);
        }
    }
    Realization::new(a, b, c, d)
}
