//! Deterministic sample point sets.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::quat::Quaternion;

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const SQRT2_FRAC: f64 = 0.414_213_562_373_095_1;

fn frac(x: f64) -> f64 {
    x - x.floor()
}

/// `count` points in the annulus `r_min <= |z| <= r_max`, spread by
/// low-discrepancy sequences in angle and log-radius, skipping points
/// closer than `min_dist` to any point of `avoid`.
pub fn annulus_points(count: usize, r_min: f64, r_max: f64, avoid: &[Complex64], min_dist: f64) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(count);
    let mut k = 0usize;
    while out.len() < count && k < 100 * count + 100 {
        k += 1;
        let theta = 2.0 * PI * frac(k as f64 * GOLDEN) + 0.1;
        let r = r_min * (r_max / r_min).powf(frac(k as f64 * SQRT2_FRAC));
        let z = Complex64::from_polar(r, theta);
        if avoid.iter().all(|a| (a - z).norm() >= min_dist) {
            out.push(z);
        }
    }
    out
}

/// Sample points for checking equality of rational functions with the
/// given poles and zeros.
pub fn function_samples(count: usize, avoid: &[Complex64]) -> Vec<Complex64> {
    let scale = avoid.iter().map(|z| z.norm()).fold(1.0, f64::max);
    annulus_points(count, 0.3, 2.0 * scale, avoid, 1e-3 * scale)
}

/// Points in the open right half-plane: log-spaced radii in
/// `[r_min, r_max]` and angles in `(-pi/2, pi/2)`.
pub fn right_half_plane_points(count: usize, r_min: f64, r_max: f64) -> Vec<Complex64> {
    (1..=count)
        .map(|k| {
            let t = frac(k as f64 * GOLDEN);
            let s = if count > 1 { (k - 1) as f64 / (count - 1) as f64 } else { 0.5 };
            let r = r_min * (r_max / r_min).powf(s);
            let theta = (t - 0.5) * 0.96 * PI;
            Complex64::from_polar(r, theta)
        })
        .collect()
}

/// Unit imaginary quaternions spread over the sphere (Fibonacci lattice).
pub fn unit_imaginary(count: usize) -> Vec<Quaternion> {
    (0..count)
        .map(|k| {
            let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
            let r = (1.0 - z * z).sqrt();
            let phi = 2.0 * PI * frac(k as f64 * GOLDEN) + 0.3;
            Quaternion::new(0.0, z, r * phi.cos(), r * phi.sin())
        })
        .collect()
}

/// Move a complex point `x + iy` onto the slice of the unit `u`: `x + u y`.
pub fn to_slice(z: Complex64, u: Quaternion) -> Quaternion {
    Quaternion::real(z.re) + u * z.im
}

/// Quaternionic sample points: `off_slice` points with nonzero j/k parts
/// followed by `on_slice` points of the i-slice.
pub fn quaternion_samples(off_slice: usize, on_slice: usize, avoid: &[Complex64]) -> Vec<Quaternion> {
    let units = unit_imaginary(off_slice.max(1));
    let base = function_samples(off_slice + on_slice, avoid);
    let mut out = Vec::with_capacity(off_slice + on_slice);
    for (k, z) in base.iter().enumerate() {
        if k < off_slice {
            let mut u = units[k];
            if u.y.abs() + u.z.abs() < 0.1 {
                u = Quaternion::new(0.0, u.x * 0.6, 0.8, 0.0);
                u = u * (1.0 / u.norm());
            }
            out.push(to_slice(*z, u));
        } else {
            out.push(Quaternion::from_complex(*z));
        }
    }
    out
}
