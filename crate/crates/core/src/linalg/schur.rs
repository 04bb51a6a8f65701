//! Complex Schur decomposition `A = Q T Q*` and reordering of the diagonal.

use num_complex::Complex64;

use super::{c64, max_abs, CMatrix};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SchurForm {
    /// Unitary factor.
    pub q: CMatrix,
    /// Upper triangular factor.
    pub t: CMatrix,
}

/// Plane rotation `G = [[c0, c1], [c2, c3]]` acting on rows/columns `k, k+1`.
#[derive(Clone, Copy)]
struct Rot {
    g: [Complex64; 4],
}

impl Rot {
    /// Unitary `G` with `G (a, b)^T = (r, 0)^T`.
    fn zeroing(a: Complex64, b: Complex64) -> Rot {
        let r = (a.norm_sqr() + b.norm_sqr()).sqrt();
        if r == 0.0 {
            return Rot { g: [c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)] };
        }
        Rot { g: [a.conj() / r, b.conj() / r, -b / r, a / r] }
    }

    /// `M[k..k+2, cols] <- G M[k..k+2, cols]`.
    fn rows(&self, m: &mut CMatrix, k: usize, cols: std::ops::Range<usize>) {
        for j in cols {
            let x = m[(k, j)];
            let y = m[(k + 1, j)];
            m[(k, j)] = self.g[0] * x + self.g[1] * y;
            m[(k + 1, j)] = self.g[2] * x + self.g[3] * y;
        }
    }

    /// `M[rows, k..k+2] <- M[rows, k..k+2] G*`.
    fn cols(&self, m: &mut CMatrix, k: usize, rows: std::ops::Range<usize>) {
        for i in rows {
            let x = m[(i, k)];
            let y = m[(i, k + 1)];
            m[(i, k)] = x * self.g[0].conj() + y * self.g[1].conj();
            m[(i, k + 1)] = x * self.g[2].conj() + y * self.g[3].conj();
        }
    }
}

fn hessenberg(t: &mut CMatrix, q: &mut CMatrix) {
    let n = t.nrows();
    if n < 3 {
        return;
    }
    for k in 0..n - 2 {
        let len = n - k - 1;
        let x: Vec<Complex64> = (0..len).map(|i| t[(k + 1 + i, k)]).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm == 0.0 {
            continue;
        }
        let phase = if x[0].norm() > 0.0 { x[0] / x[0].norm() } else { c64(1.0, 0.0) };
        let alpha = -phase * xnorm;
        let mut v = x.clone();
        v[0] -= alpha;
        let vnorm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm == 0.0 {
            continue;
        }
        for z in v.iter_mut() {
            *z /= vnorm;
        }
        // T <- (I - 2vv*) T on rows k+1.., then T <- T (I - 2vv*) on columns k+1..
        for j in 0..n {
            let s: Complex64 = (0..len).map(|i| v[i].conj() * t[(k + 1 + i, j)]).sum();
            for i in 0..len {
                t[(k + 1 + i, j)] -= v[i] * s * 2.0;
            }
        }
        for m in [&mut *t, &mut *q] {
            for r in 0..n {
                let s: Complex64 = (0..len).map(|i| m[(r, k + 1 + i)] * v[i]).sum();
                for i in 0..len {
                    m[(r, k + 1 + i)] -= s * v[i].conj() * 2.0;
                }
            }
        }
        for i in 1..len {
            t[(k + 1 + i, k)] = c64(0.0, 0.0);
        }
    }
}

fn wilkinson_shift(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Complex64 {
    let half_tr = (a + d) * 0.5;
    let disc = ((a - d) * 0.5).powi(2) + b * c;
    let s = disc.sqrt();
    let l1 = half_tr + s;
    let l2 = half_tr - s;
    if (l1 - d).norm() <= (l2 - d).norm() {
        l1
    } else {
        l2
    }
}

/// Complex Schur decomposition by Hessenberg reduction followed by
/// single-shift QR iteration with Wilkinson shifts.
pub fn schur(a: &CMatrix) -> Result<SchurForm> {
    let n = a.nrows();
    if a.ncols() != n {
        return Err(Error::DimensionMismatch(format!(
            "Schur decomposition of a {}x{} matrix",
            a.nrows(),
            a.ncols()
        )));
    }
    if !super::is_finite(a) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    let mut t = a.clone();
    let mut q = CMatrix::identity(n, n);
    if n <= 1 {
        return Ok(SchurForm { q, t });
    }
    hessenberg(&mut t, &mut q);

    let eps = f64::EPSILON;
    let anorm = max_abs(&t).max(f64::MIN_POSITIVE);
    let mut hi = n - 1;
    let mut iter = 0usize;
    let mut total = 0usize;
    let max_total = 100 * n;
    while hi > 0 {
        // Locate the start of the active unreduced block.
        let mut l = hi;
        while l > 0 {
            let sub = t[(l, l - 1)].norm();
            let diag = t[(l, l)].norm() + t[(l - 1, l - 1)].norm();
            let scale = if diag > 0.0 { diag } else { anorm };
            if sub <= eps * scale {
                t[(l, l - 1)] = c64(0.0, 0.0);
                break;
            }
            l -= 1;
        }
        if l == hi {
            hi -= 1;
            iter = 0;
            continue;
        }
        iter += 1;
        total += 1;
        if total > max_total {
            return Err(Error::NumericalFailure(
                "Schur QR iteration did not converge".into(),
            ));
        }
        let shift = if iter.is_multiple_of(10) {
            t[(hi, hi)] + c64(0.75, 0.5) * t[(hi, hi - 1)].norm()
        } else {
            wilkinson_shift(t[(hi - 1, hi - 1)], t[(hi - 1, hi)], t[(hi, hi - 1)], t[(hi, hi)])
        };

        let mut x = t[(l, l)] - shift;
        let mut y = t[(l + 1, l)];
        for k in l..hi {
            let g = Rot::zeroing(x, y);
            g.rows(&mut t, k, if k > l { k - 1 } else { k }..n);
            let rmax = (k + 3).min(hi + 1);
            g.cols(&mut t, k, 0..rmax);
            g.cols(&mut q, k, 0..n);
            if k > l {
                t[(k + 1, k - 1)] = c64(0.0, 0.0);
            }
            if k + 1 < hi {
                x = t[(k + 1, k)];
                y = t[(k + 2, k)];
            }
        }
    }
    for j in 0..n {
        for i in j + 1..n {
            t[(i, j)] = c64(0.0, 0.0);
        }
    }
    Ok(SchurForm { q, t })
}

impl SchurForm {
    pub fn eigenvalues(&self) -> Vec<Complex64> {
        (0..self.t.nrows()).map(|i| self.t[(i, i)]).collect()
    }

    /// Exchange the diagonal entries at `k` and `k + 1`.
    pub fn swap(&mut self, k: usize) {
        let n = self.t.nrows();
        let a = self.t[(k, k)];
        let b = self.t[(k, k + 1)];
        let c = self.t[(k + 1, k + 1)];
        // (b, c - a) spans the eigenvector for c of the 2x2 block.
        let g = Rot::zeroing(b, c - a);
        g.rows(&mut self.t, k, k..n);
        g.cols(&mut self.t, k, 0..k + 2);
        g.cols(&mut self.q, k, 0..n);
        self.t[(k + 1, k)] = c64(0.0, 0.0);
        self.t[(k, k)] = c;
        self.t[(k + 1, k + 1)] = a;
    }

    /// Move the selected diagonal entries to the leading positions while
    /// preserving their relative order; returns the number selected.
    pub fn reorder(&mut self, select: &[bool]) -> usize {
        assert_eq!(select.len(), self.t.nrows());
        let mut sel = select.to_vec();
        let mut dst = 0;
        for src in 0..sel.len() {
            if !sel[src] {
                continue;
            }
            let mut k = src;
            while k > dst {
                self.swap(k - 1);
                sel.swap(k - 1, k);
                k -= 1;
            }
            dst += 1;
        }
        dst
    }

    /// Orthonormal basis of the invariant subspace belonging to the
    /// eigenvalues for which `select` holds.
    pub fn invariant_subspace<F: Fn(Complex64) -> bool>(&self, select: F) -> CMatrix {
        let mut form = self.clone();
        let flags: Vec<bool> = form.eigenvalues().into_iter().map(select).collect();
        let m = form.reorder(&flags);
        form.q.columns(0, m).into_owned()
    }
}
