//! Seeded random instances shared by the integration tests.
#![allow(dead_code)]

use gpe_core::linalg::{c64, CMatrix};
use gpe_core::quat::{QuatMatrix, Quaternion};
use gpe_core::realization::{QuatRealization, Realization};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    // Box-Muller
    let u: f64 = rng.gen_range(1e-12..1.0);
    let v: f64 = rng.gen();
    (-2.0 * u.ln()).sqrt() * (2.0 * std::f64::consts::PI * v).cos()
}

pub fn cmatrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> CMatrix {
    CMatrix::from_fn(r, c, |_, _| c64(gaussian(rng), gaussian(rng)) * std::f64::consts::FRAC_1_SQRT_2)
}

/// Well-conditioned random similarity: `I + 0.3 G`.
pub fn similarity(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::identity(n, n) + cmatrix(rng, n, n) * c64(0.3, 0.0)
}

/// Eigenvalue with `|Re|` in `[0.3, 2]` of the given sign.
pub fn pole(rng: &mut ChaCha8Rng, stable: bool) -> num_complex::Complex64 {
    let re = rng.gen_range(0.3..2.0);
    c64(if stable { -re } else { re }, rng.gen_range(-2.0..2.0))
}

/// Random `L = I + C (zI - A)^{-1} B` of size `n` with `big_n` poles, at
/// least one on each side of the imaginary axis when `big_n >= 2`.
pub fn random_factor(rng: &mut ChaCha8Rng, n: usize, big_n: usize) -> Realization {
    let mut a = CMatrix::zeros(big_n, big_n);
    for k in 0..big_n {
        let stable = if k == 0 { true } else if k == 1 { false } else { rng.gen_bool(0.5) };
        a[(k, k)] = pole(rng, stable);
    }
    let t = similarity(rng, big_n);
    let tinv = t.clone().try_inverse().expect("near identity");
    let a = &tinv * a * &t;
    let b = cmatrix(rng, big_n, n);
    let c = cmatrix(rng, n, big_n);
    Realization::new(a, b, c, CMatrix::identity(n, n)).unwrap()
}

pub fn quaternion(rng: &mut ChaCha8Rng) -> Quaternion {
    Quaternion::new(gaussian(rng), gaussian(rng), gaussian(rng), gaussian(rng)) * 0.5
}

pub fn qmatrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> QuatMatrix {
    QuatMatrix::from_fn(r, c, |_, _| quaternion(rng))
}

/// Random quaternionic `L = I + C (pI - A)^{-1} B` whose state matrix has
/// genuinely quaternionic entries.
pub fn random_quat_factor(rng: &mut ChaCha8Rng, n: usize, big_n: usize) -> QuatRealization {
    let mut a = QuatMatrix::zeros(big_n, big_n);
    for k in 0..big_n {
        let stable = if k == 0 { true } else if k == 1 { false } else { rng.gen_bool(0.5) };
        let p = pole(rng, stable);
        a[(k, k)] = Quaternion::new(p.re, p.im, 0.0, 0.0);
    }
    for i in 0..big_n {
        for j in i + 1..big_n {
            a[(i, j)] = quaternion(rng) * 0.3;
        }
    }
    let b = qmatrix(rng, big_n, n);
    let c = qmatrix(rng, n, big_n);
    QuatRealization::new(a, b, c, QuatMatrix::identity(n)).unwrap()
}
