//! Quaternions, quaternion matrices and the complex representation `chi`.
//!
//! A quaternion `q = w + x i + y j + z k` is written `q = z1 + z2 j` with
//! `z1 = w + x i` and `z2 = y + z i` in the i-slice. The map
//! `chi(q) = [[z1, z2], [-conj(z2), conj(z1)]]` is extended blockwise to
//! matrices and is an injective *-homomorphism into complex matrices of
//! doubled size. Its range is the set of `M` with `E^{-1} conj(M) E = M`.

use std::fmt;
use std::ops::{Add, AddAssign, Div, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{self, c64, conj, CMatrix, Inertia};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Quaternion {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Quaternion {
    pub const ZERO: Quaternion = Quaternion { w: 0.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const ONE: Quaternion = Quaternion { w: 1.0, x: 0.0, y: 0.0, z: 0.0 };
    pub const I: Quaternion = Quaternion { w: 0.0, x: 1.0, y: 0.0, z: 0.0 };
    pub const J: Quaternion = Quaternion { w: 0.0, x: 0.0, y: 1.0, z: 0.0 };
    pub const K: Quaternion = Quaternion { w: 0.0, x: 0.0, y: 0.0, z: 1.0 };

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Quaternion { w, x, y, z }
    }

    pub const fn real(w: f64) -> Self {
        Quaternion { w, x: 0.0, y: 0.0, z: 0.0 }
    }

    /// Embeds a complex number into the i-slice.
    pub fn from_complex(c: Complex64) -> Self {
        Quaternion { w: c.re, x: c.im, y: 0.0, z: 0.0 }
    }

    /// `z1 + z2 j`.
    pub fn from_pair(z1: Complex64, z2: Complex64) -> Self {
        Quaternion { w: z1.re, x: z1.im, y: z2.re, z: z2.im }
    }

    /// The pair `(z1, z2)` with `self = z1 + z2 j`.
    pub fn to_pair(self) -> (Complex64, Complex64) {
        (c64(self.w, self.x), c64(self.y, self.z))
    }

    pub fn conj(self) -> Self {
        Quaternion { w: self.w, x: -self.x, y: -self.y, z: -self.z }
    }

    pub fn norm_sqr(self) -> f64 {
        self.w * self.w + self.x * self.x + self.y * self.y + self.z * self.z
    }

    pub fn norm(self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn re(self) -> f64 {
        self.w
    }

    pub fn imag(self) -> Quaternion {
        Quaternion { w: 0.0, ..self }
    }

    pub fn inv(self) -> Self {
        let n = self.norm_sqr();
        self.conj() * (1.0 / n)
    }

    pub fn is_finite(self) -> bool {
        self.w.is_finite() && self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn powi(self, k: usize) -> Self {
        let mut out = Quaternion::ONE;
        for _ in 0..k {
            out = out * self;
        }
        out
    }

    /// Writes `self = x + I y` with `y >= 0` and `I` a unit imaginary
    /// quaternion; `I` is `None` when `self` is real.
    pub fn slice_decompose(self) -> (f64, f64, Option<Quaternion>) {
        let im = self.imag();
        let y = im.norm();
        if y == 0.0 {
            (self.w, 0.0, None)
        } else {
            (self.w, y, Some(im * (1.0 / y)))
        }
    }

    /// Points of the sphere `[self]` coincide with those of `[other]`.
    pub fn same_sphere(self, other: Quaternion, tol: f64) -> bool {
        (self.w - other.w).abs() <= tol && (self.imag().norm() - other.imag().norm()).abs() <= tol
    }
}

impl fmt::Display for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts = [(self.x, "i"), (self.y, "j"), (self.z, "k")];
        write!(f, "{}", self.w)?;
        for (v, u) in parts {
            if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
                write!(f, "-{}{}", -v, u)?;
            } else {
                write!(f, "+{}{}", v, u)?;
            }
        }
        Ok(())
    }
}

impl Add for Quaternion {
    type Output = Quaternion;
    fn add(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl AddAssign for Quaternion {
    fn add_assign(&mut self, o: Quaternion) {
        *self = *self + o;
    }
}

impl Sub for Quaternion {
    type Output = Quaternion;
    fn sub(self, o: Quaternion) -> Quaternion {
        Quaternion::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl SubAssign for Quaternion {
    fn sub_assign(&mut self, o: Quaternion) {
        *self = *self - o;
    }
}

impl Neg for Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul for Quaternion {
    type Output = Quaternion;
    fn mul(self, o: Quaternion) -> Quaternion {
        Quaternion::new(
            self.w * o.w - self.x * o.x - self.y * o.y - self.z * o.z,
            self.w * o.x + self.x * o.w + self.y * o.z - self.z * o.y,
            self.w * o.y - self.x * o.z + self.y * o.w + self.z * o.x,
            self.w * o.z + self.x * o.y - self.y * o.x + self.z * o.w,
        )
    }
}

impl Mul<f64> for Quaternion {
    type Output = Quaternion;
    fn mul(self, s: f64) -> Quaternion {
        Quaternion::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Div<f64> for Quaternion {
    type Output = Quaternion;
    fn div(self, s: f64) -> Quaternion {
        self * (1.0 / s)
    }
}

impl std::iter::Sum for Quaternion {
    fn sum<I: Iterator<Item = Quaternion>>(iter: I) -> Quaternion {
        iter.fold(Quaternion::ZERO, |a, b| a + b)
    }
}

impl From<f64> for Quaternion {
    fn from(w: f64) -> Self {
        Quaternion::real(w)
    }
}

impl Serialize for Quaternion {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [self.w, self.x, self.y, self.z].serialize(s)
    }
}

/// Row-major nested arrays of `[w, x, y, z]`.
impl Serialize for QuatMatrix {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<&[Quaternion]> = (0..self.rows).map(|i| &self.data[i * self.cols..(i + 1) * self.cols]).collect();
        rows.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Quaternion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let [w, x, y, z] = <[f64; 4]>::deserialize(d)?;
        Ok(Quaternion::new(w, x, y, z))
    }
}

/// Dense quaternion matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct QuatMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Quaternion>,
}

impl QuatMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QuatMatrix { rows, cols, data: vec![Quaternion::ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = QuatMatrix::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Quaternion::ONE;
        }
        m
    }

    pub fn from_fn<F: FnMut(usize, usize) -> Quaternion>(rows: usize, cols: usize, mut f: F) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        QuatMatrix { rows, cols, data }
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<Quaternion>) -> Result<Self> {
        if rows * cols != data.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if data.iter().any(|q| !q.is_finite()) {
            return Err(Error::InvalidInput("non-finite quaternion entry".into()));
        }
        Ok(QuatMatrix { rows, cols, data })
    }

    pub fn scalar(q: Quaternion) -> Self {
        QuatMatrix { rows: 1, cols: 1, data: vec![q] }
    }

    /// Embeds a complex matrix into the i-slice.
    pub fn from_complex(m: &CMatrix) -> Self {
        QuatMatrix::from_fn(m.nrows(), m.ncols(), |i, j| Quaternion::from_complex(m[(i, j)]))
    }

    /// `Z1 + Z2 j`.
    pub fn from_pair(z1: &CMatrix, z2: &CMatrix) -> Self {
        QuatMatrix::from_fn(z1.nrows(), z1.ncols(), |i, j| Quaternion::from_pair(z1[(i, j)], z2[(i, j)]))
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn entries(&self) -> &[Quaternion] {
        &self.data
    }

    pub fn adjoint(&self) -> Self {
        QuatMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|q| q.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|q| q.norm()).fold(0.0, f64::max)
    }

    /// `q * self`, entrywise left multiplication.
    pub fn scale_left(&self, q: Quaternion) -> Self {
        QuatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| q * a).collect() }
    }

    /// `self * q`, entrywise right multiplication.
    pub fn scale_right(&self, q: Quaternion) -> Self {
        QuatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| a * q).collect() }
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && (self - &self.adjoint()).max_abs() <= tol
    }

    /// The pair `(Z1, Z2)` with `self = Z1 + Z2 j`.
    pub fn to_pair(&self) -> (CMatrix, CMatrix) {
        let z1 = CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_pair().0);
        let z2 = CMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)].to_pair().1);
        (z1, z2)
    }
}

impl Index<(usize, usize)> for QuatMatrix {
    type Output = Quaternion;
    fn index(&self, (i, j): (usize, usize)) -> &Quaternion {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QuatMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Quaternion {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Add<&'a QuatMatrix> for &'a QuatMatrix {
    type Output = QuatMatrix;
    fn add(self, o: &QuatMatrix) -> QuatMatrix {
        assert_eq!(self.shape(), o.shape());
        QuatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<'a> Sub<&'a QuatMatrix> for &'a QuatMatrix {
    type Output = QuatMatrix;
    fn sub(self, o: &QuatMatrix) -> QuatMatrix {
        assert_eq!(self.shape(), o.shape());
        QuatMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl<'a> Mul<&'a QuatMatrix> for &'a QuatMatrix {
    type Output = QuatMatrix;
    fn mul(self, o: &QuatMatrix) -> QuatMatrix {
        assert_eq!(self.cols, o.rows, "inner dimensions differ");
        QuatMatrix::from_fn(self.rows, o.cols, |i, j| (0..self.cols).map(|k| self[(i, k)] * o[(k, j)]).sum())
    }
}

impl Neg for &QuatMatrix {
    type Output = QuatMatrix;
    fn neg(self) -> QuatMatrix {
        QuatMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&a| -a).collect() }
    }
}

impl fmt::Display for QuatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

/// `E_n = [[0, I_n], [-I_n, 0]]`.
pub fn e_matrix(n: usize) -> CMatrix {
    let mut e = CMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        e[(i, n + i)] = c64(1.0, 0.0);
        e[(n + i, i)] = c64(-1.0, 0.0);
    }
    e
}

pub fn chi_scalar(q: Quaternion) -> CMatrix {
    chi(&QuatMatrix::scalar(q))
}

pub fn chi(q: &QuatMatrix) -> CMatrix {
    let (r, c) = q.shape();
    let (z1, z2) = q.to_pair();
    let mut m = CMatrix::zeros(2 * r, 2 * c);
    m.view_mut((0, 0), (r, c)).copy_from(&z1);
    m.view_mut((0, c), (r, c)).copy_from(&z2);
    m.view_mut((r, 0), (r, c)).copy_from(&(-conj(&z2)));
    m.view_mut((r, c), (r, c)).copy_from(&conj(&z1));
    m
}

/// `|E^{-1} conj(M) E - M|` (max entry) for `M` of shape `2r x 2c`.
pub fn e_symmetry_defect(m: &CMatrix) -> Result<f64> {
    let (r2, c2) = m.shape();
    if r2 % 2 != 0 || c2 % 2 != 0 {
        return Err(Error::DimensionMismatch(format!(
            "E-symmetry needs even dimensions, got {r2}x{c2}"
        )));
    }
    let (r, c) = (r2 / 2, c2 / 2);
    let er_inv = -e_matrix(r);
    let ec = e_matrix(c);
    Ok(linalg::max_abs(&(er_inv * conj(m) * ec - m)))
}

/// Default tolerance for range membership: relative to the matrix size.
pub fn chi_tolerance(m: &CMatrix) -> f64 {
    1e-9 * (1.0 + linalg::max_abs(m))
}

pub fn chi_inverse(m: &CMatrix) -> Result<QuatMatrix> {
    chi_inverse_tol(m, chi_tolerance(m))
}

pub fn chi_inverse_tol(m: &CMatrix, tol: f64) -> Result<QuatMatrix> {
    let defect = e_symmetry_defect(m)?;
    if defect > tol {
        return Err(Error::InvalidInput(format!(
            "matrix is not in the range of chi: |E^-1 conj(M) E - M| = {defect:e}"
        )));
    }
    let (r, c) = (m.nrows() / 2, m.ncols() / 2);
    // Average the two copies of each block to remove rounding asymmetry.
    let z1 = (m.view((0, 0), (r, c)) + conj(&m.view((r, c), (r, c)).into_owned())) * c64(0.5, 0.0);
    let z2 = (m.view((0, c), (r, c)) - conj(&m.view((r, 0), (r, c)).into_owned())) * c64(0.5, 0.0);
    Ok(QuatMatrix::from_pair(&z1, &z2))
}

/// Inertia of a quaternion-Hermitian matrix, read from `chi(H)` whose
/// eigenvalues come in equal pairs.
pub fn quat_hermitian_inertia(h: &QuatMatrix, tol: f64) -> Result<Inertia> {
    if h.nrows() != h.ncols() {
        return Err(Error::DimensionMismatch("inertia needs a square matrix".into()));
    }
    if !h.is_hermitian(tol.max(1e-12 * h.max_abs())) {
        return Err(Error::InvalidInput("quaternion matrix is not Hermitian".into()));
    }
    let (vals, _) = linalg::hermitian_eigen(&chi(h));
    let scale = vals.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let mut paired = Vec::with_capacity(vals.len() / 2);
    for pair in vals.chunks(2) {
        if (pair[0] - pair[1]).abs() > 1e-8 * scale + tol {
            return Err(Error::NumericalFailure(format!(
                "eigenvalues of the complex representation do not pair: {} vs {}",
                pair[0], pair[1]
            )));
        }
        paired.push(0.5 * (pair[0] + pair[1]));
    }
    Ok(linalg::inertia_of_values(&paired, tol))
}
