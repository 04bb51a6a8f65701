//! Acceptance suite. Runs without the libtest harness so that every criterion
//! prints one PASS/FAIL line even under a plain `cargo test`.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::time::Instant;

use gpe_core::analysis::{default_grid, negative_squares, quat_carat_kernel_values, quat_real_part_min_eig, Evaluable, KernelKind};
use gpe_core::factorization::{factor_regularized, pseudo_spectral_factor, verify_factorization, Side};
use gpe_core::interp::{even_polynomial_interpolate, gpe_interpolate, quat_gpe_interpolate};
use gpe_core::io::read_realization;
use gpe_core::linalg::{c64, identity, max_abs, min_hermitian_eigenvalue, norm, CMatrix, C64};
use gpe_core::poly;
use gpe_core::quat::{chi, chi_inverse, QuatMatrix, Quaternion};
use gpe_core::realization::{gpe_from_factor, minimality_report, minimize, star_product_realization, AnyRealization, Realization};
use gpe_core::sampling::{annulus_points, quaternion_samples, right_half_plane_points, to_slice, unit_imaginary};
use gpe_core::slicefun::{quat_gpe_factor, quat_max_difference};
use rand::Rng;

const EXAMPLE_COEFF_TOL: f64 = 1e-10;
const EXAMPLE_ROOT_TOL: f64 = 1e-9;
const ROUND_TRIP_RESIDUAL: f64 = 1e-8;
const AT_INFINITY_TOL: f64 = 1e-10;
const LOCATION_TOL: f64 = 1e-8;
const INVARIANCE_TOL: f64 = 1e-9;
const QUAT_RESIDUAL: f64 = 1e-7;
const E_SYMMETRY_TOL: f64 = 1e-9;
const GRAM_PSD_TOL: f64 = 1e-10;
const REAL_PART_TOL: f64 = 1e-6;
const REGULARIZED_TOL: f64 = 1e-6;
const CHI_TOL: f64 = 1e-12;
const INTERP_TOL: f64 = 1e-8;
const QUAT_INTERP_TOL: f64 = 1e-9;

type Check = std::result::Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn complex_file(name: &str) -> Realization {
    match read_realization(&data(name)).expect("test data parses") {
        AnyRealization::Complex(r) => r,
        AnyRealization::Quaternion(_) => panic!("{name} is quaternionic"),
    }
}

fn even_interpolation_example() -> Check {
    let nodes = [c64(1.0, 0.0), c64(1.0, 1.0), c64(1.0, -1.0)];
    let values = [c64(1.0, 0.0), c64(2.0, 8.0), c64(2.0, -8.0)];
    let r = even_polynomial_interpolate(&nodes, &values, Side::Left).map_err(|e| e.to_string())?;
    let want: Vec<C64> = [-2.0, 0.0, 4.0, 0.0, -1.0, 0.0].iter().map(|&x| c64(x, 0.0)).collect();
    let dc = poly::max_coeff_distance(&r.coeffs, &want);
    ensure(r.coeffs.len() == 6 && dc <= EXAMPLE_COEFF_TOL, || format!("interpolant off by {dc:e}"))?;
    ensure(r.beta == 1.0, || format!("beta = {}", r.beta))?;
    let mut target = vec![c64(0.0, 0.0); 7];
    target[0] = c64(2.0, 0.0);
    target[6] = c64(-1.0, 0.0);
    let dp = poly::max_coeff_distance(&r.phi, &target);
    ensure(dp <= EXAMPLE_COEFF_TOL, || format!("Phi differs from 2 - z^6 by {dp:e}"))?;
    let rho = 2f64.powf(1.0 / 6.0);
    let mut worst: f64 = 0.0;
    for k in [0.0, 1.0, 5.0] {
        let w = C64::from_polar(rho, k * std::f64::consts::PI / 3.0);
        let d = r.factor_roots.iter().map(|z| (z - w).norm()).fold(f64::INFINITY, f64::min);
        worst = worst.max(d);
    }
    ensure(r.factor_roots.len() == 3 && worst <= EXAMPLE_ROOT_TOL, || format!("factor roots off by {worst:e}"))?;
    Ok(format!("coeffs {dc:.1e}, Phi {dp:.1e}, roots {worst:.1e}"))
}

fn negative_squares_examples() -> Check {
    let mut summary = Vec::new();
    for (name, label) in [("kernel_b.json", "b"), ("kernel_c.json", "c")] {
        let r = complex_file(name);
        for n in [30, 60] {
            let f = |z: C64| r.evaluate(z);
            let grid: Vec<Quaternion> = default_grid(n).into_iter().map(Quaternion::from_complex).collect();
            let rep = negative_squares(KernelKind::Carat, Evaluable::Complex(&f), &grid).map_err(|e| e.to_string())?;
            ensure(rep.kappa_estimate == 1 && rep.stabilized, || {
                format!("{label} on {n} points: kappa {} stabilized {}", rep.kappa_estimate, rep.stabilized)
            })?;
            summary.push(format!("{label}/{n}: 1"));
        }
    }
    let z = Realization::polynomial(&[CMatrix::zeros(1, 1), identity(1)]).unwrap();
    let f = |w: C64| z.evaluate(w);
    let grid: Vec<Quaternion> = default_grid(30).into_iter().map(Quaternion::from_complex).collect();
    let rep = negative_squares(KernelKind::Carat, Evaluable::Complex(&f), &grid).map_err(|e| e.to_string())?;
    ensure(rep.kappa_estimate == 0, || format!("Phi = z: kappa {}", rep.kappa_estimate))?;
    summary.push("z: 0".into());
    Ok(summary.join(", "))
}

fn factorization_round_trip() -> Check {
    let (mut worst_res, mut worst_inf, mut worst_loc, mut worst_inv) = (0f64, 0f64, f64::NEG_INFINITY, 0f64);
    for seed in 0..100u64 {
        let mut rng = common::rng(seed);
        let n = rng.gen_range(1..=3);
        let big_n = rng.gen_range(2..=6);
        let l = common::random_factor(&mut rng, n, big_n);
        let phi = minimize(&gpe_from_factor(&l.sharp()).unwrap()).unwrap();
        let f = pseudo_spectral_factor(&phi, Side::Right).map_err(|e| format!("seed {seed}: {e}"))?;
        let pts = phi.sample_points(50);
        let (res, rep) = verify_factorization(&phi, &f.factor, &pts).map_err(|e| format!("seed {seed}: {e}"))?;
        let t = common::similarity(&mut rng, phi.state_dim());
        let g = pseudo_spectral_factor(&phi.transform(&t).unwrap(), Side::Right).map_err(|e| format!("seed {seed}: {e}"))?;
        let inv = pts
            .iter()
            .map(|z| {
                let a = f.factor.evaluate(*z).unwrap();
                norm(&(&a - g.factor.evaluate(*z).unwrap())) / norm(&a).max(1.0)
            })
            .fold(0.0, f64::max);
        worst_res = worst_res.max(res);
        worst_inf = worst_inf.max(max_abs(&(f.factor.d() - identity(n))));
        worst_loc = worst_loc.max(rep.max_real_part);
        worst_inv = worst_inv.max(inv);
    }
    ensure(worst_res <= ROUND_TRIP_RESIDUAL, || format!("residual {worst_res:e}"))?;
    ensure(worst_inf <= AT_INFINITY_TOL, || format!("L(inf) - I = {worst_inf:e}"))?;
    ensure(worst_loc <= LOCATION_TOL, || format!("max Re of poles/zeros {worst_loc:e}"))?;
    ensure(worst_inv <= INVARIANCE_TOL, || format!("similarity invariance {worst_inv:e}"))?;
    Ok(format!("100 seeds: residual {worst_res:.1e}, L(inf) {worst_inf:.1e}, max Re {worst_loc:.1e}, invariance {worst_inv:.1e}"))
}

fn minimality_both_directions() -> Check {
    for seed in 0..50u64 {
        let mut rng = common::rng(1000 + seed);
        let n = rng.gen_range(1..=3);
        let big_n = rng.gen_range(1..=4);
        let l = common::random_factor(&mut rng, n, big_n.max(2));
        let m = minimality_report(&gpe_from_factor(&l).unwrap()).unwrap();
        ensure(m.is_minimal(), || format!("seed {seed}: product of a minimal factor is not minimal"))?;

        // Pad with one state that the input cannot reach.
        let k = l.state_dim();
        let mut a = CMatrix::zeros(k + 1, k + 1);
        a.view_mut((0, 0), (k, k)).copy_from(l.a());
        let stable = rng.gen_bool(0.5);
        a[(k, k)] = common::pole(&mut rng, stable);
        let mut b = CMatrix::zeros(k + 1, n);
        b.view_mut((0, 0), (k, n)).copy_from(l.b());
        let mut c = CMatrix::zeros(n, k + 1);
        c.view_mut((0, 0), (n, k)).copy_from(l.c());
        c.view_mut((0, k), (n, 1)).copy_from(&common::cmatrix(&mut rng, n, 1));
        let padded = Realization::new(a, b, c, l.d().clone()).unwrap();
        let m = minimality_report(&gpe_from_factor(&padded).unwrap()).unwrap();
        ensure(!m.controllable && !m.observable, || {
            format!("seed {seed}: padded product controllable={} observable={}", m.controllable, m.observable)
        })?;
    }
    Ok("50 minimal and 50 padded instances".into())
}

fn quaternion_round_trip() -> Check {
    let (mut worst_res, mut worst_inf, mut worst_sym) = (0f64, 0f64, 0f64);
    for seed in 0..20u64 {
        let mut rng = common::rng(2000 + seed);
        let n = rng.gen_range(1..=2);
        let big_n = rng.gen_range(2..=3);
        let l = common::random_quat_factor(&mut rng, n, big_n);
        let phi = star_product_realization(&l.sharp(), &l).unwrap();
        let f = quat_gpe_factor(&phi, Side::Right, false).map_err(|e| format!("seed {seed}: {e}"))?;
        let back = star_product_realization(&f.factor.sharp(), &f.factor).unwrap();
        let pts = quaternion_samples(20, 0, phi.lift().poles());
        let res = quat_max_difference(&phi, &back, &pts).map_err(|e| format!("seed {seed}: {e}"))?;
        let dinf = (&f.factor.value_at_infinity().unwrap() - &QuatMatrix::identity(n)).max_abs();
        worst_res = worst_res.max(res);
        worst_inf = worst_inf.max(dinf);
        worst_sym = worst_sym.max(f.e_symmetry_defect);
    }
    ensure(worst_res <= QUAT_RESIDUAL, || format!("residual {worst_res:e}"))?;
    ensure(worst_inf <= AT_INFINITY_TOL, || format!("L(inf) - I = {worst_inf:e}"))?;
    ensure(worst_sym <= E_SYMMETRY_TOL, || format!("E-symmetry defect {worst_sym:e}"))?;
    Ok(format!("20 seeds: residual {worst_res:.1e}, L(inf) {worst_inf:.1e}, E-defect {worst_sym:.1e}"))
}

fn example_kernel_dichotomy() -> Check {
    let r = match read_realization(&data("quat_example.json")).unwrap() {
        AnyRealization::Quaternion(q) => q,
        AnyRealization::Complex(_) => return Err("expected a quaternionic file".into()),
    };
    let units = unit_imaginary(10);
    let pts: Vec<Quaternion> = right_half_plane_points(10, 0.2, 3.0).iter().zip(&units).map(|(&z, &u)| to_slice(z, u)).collect();
    let vals: Vec<QuatMatrix> = pts.iter().map(|&p| r.evaluate_slice(p).unwrap()).collect();
    let mut gram = QuatMatrix::zeros(20, 20);
    for i in 0..10 {
        for j in 0..10 {
            let blk = quat_carat_kernel_values(&vals[i], &vals[j], pts[i], pts[j]).map_err(|e| e.to_string())?;
            for a in 0..2 {
                for b in 0..2 {
                    gram[(2 * i + a, 2 * j + b)] = blk[(a, b)];
                }
            }
        }
    }
    let gmin = min_hermitian_eigenvalue(&chi(&gram));
    ensure(gmin >= -GRAM_PSD_TOL, || format!("kernel Gram min eigenvalue {gmin:e}"))?;
    let v = r.evaluate_slice(Quaternion::new(0.0, 0.0, 0.0, 10.0)).unwrap();
    let re_min = quat_real_part_min_eig(&v);
    let want = 1.0 - 101f64.sqrt();
    ensure((re_min - want).abs() <= REAL_PART_TOL, || format!("min eig Re Phi(10k) = {re_min}, expected {want}"))?;
    Ok(format!("Gram min eig {gmin:.1e}, Re Phi(10k) min eig {re_min:.9}"))
}

fn regularized_inverse_square() -> Check {
    let phi = complex_file("minus_inv_z2.json");
    let f = factor_regularized(&phi, Side::Right).map_err(|e| e.to_string())?;
    let pts = annulus_points(20, 0.5, 2.0, &[c64(0.0, 0.0)], 1e-3);
    let worst = pts
        .iter()
        .filter(|z| z.re.abs() > 1e-3)
        .map(|&z| (f.factor.evaluate(z).unwrap()[(0, 0)] - c64(1.0, 0.0) / z).norm())
        .fold(0.0, f64::max);
    ensure(worst <= REGULARIZED_TOL, || format!("|L(z) - 1/z| = {worst:e}"))?;
    Ok(format!("max |L(z) - 1/z| = {worst:.1e} on {} points", pts.len()))
}

fn chi_algebra() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..200u64 {
        let mut rng = common::rng(3000 + seed);
        let (r, k, c) = (rng.gen_range(1..=4), rng.gen_range(1..=4), rng.gen_range(1..=4));
        let a = common::qmatrix(&mut rng, r, k);
        let b = common::qmatrix(&mut rng, k, c);
        let a2 = common::qmatrix(&mut rng, r, k);
        worst = worst
            .max(max_abs(&(chi(&(&a * &b)) - chi(&a) * chi(&b))))
            .max(max_abs(&(chi(&(&a + &a2)) - (chi(&a) + chi(&a2)))))
            .max(max_abs(&(chi(&a.adjoint()) - chi(&a).adjoint())))
            .max((&chi_inverse(&chi(&a)).map_err(|e| e.to_string())? - &a).max_abs());
    }
    ensure(worst <= CHI_TOL, || format!("chi identities off by {worst:e}"))?;
    Ok(format!("200 pairs, worst {worst:.1e}"))
}

fn interpolation_contracts() -> Check {
    let mut worst: f64 = 0.0;
    for seed in 0..30u64 {
        let mut rng = common::rng(4000 + seed);
        let n = rng.gen_range(1..=2);
        let count = rng.gen_range(1..=3);
        let mut nodes: Vec<C64> = (0..count).map(|_| c64(rng.gen_range(0.3..1.5), rng.gen_range(-1.5..1.5))).collect();
        let mut xi: Vec<CMatrix> = (0..count).map(|_| common::cmatrix(&mut rng, n, 1)).collect();
        let mut eta: Vec<CMatrix> = (0..count).map(|_| common::cmatrix(&mut rng, n, 1)).collect();
        if rng.gen_bool(0.5) {
            // an imaginary-axis node with xi* eta > 0
            let g = common::cmatrix(&mut rng, n, n);
            let a = &g * g.adjoint() + identity(n) * c64(0.1, 0.0);
            let x = common::cmatrix(&mut rng, n, 1);
            nodes.push(c64(0.0, rng.gen_range(-1.5..1.5)));
            eta.push(&a * &x);
            xi.push(x);
        }
        let r = gpe_interpolate(&nodes, &xi, &eta, Side::Right).map_err(|e| format!("seed {seed}: {e}"))?;
        worst = worst.max(r.node_residual);
    }
    ensure(worst <= INTERP_TOL, || format!("directional residual {worst:e}"))?;
    let bad = gpe_interpolate(&[c64(0.0, 0.5)], &[identity(1)], &[-identity(1)], Side::Right);
    ensure(matches!(bad, Err(gpe_core::Error::Infeasible(_))), || format!("axis case with xi* eta < 0 gave {bad:?}"))?;

    let mut qworst: f64 = 0.0;
    for seed in 0..20u64 {
        let mut rng = common::rng(5000 + seed);
        let n = rng.gen_range(1..=2);
        let count = rng.gen_range(1..=3);
        // distinct real parts keep every node on its own sphere
        let nodes: Vec<Quaternion> = (0..count)
            .map(|k| {
                let u = common::quaternion(&mut rng).imag();
                Quaternion::real(0.5 + 0.6 * k as f64) + u
            })
            .collect();
        let values: Vec<QuatMatrix> = (0..count).map(|_| common::qmatrix(&mut rng, n, n)).collect();
        let r = quat_gpe_interpolate(&nodes, &values).map_err(|e| format!("seed {seed}: {e}"))?;
        qworst = qworst.max(r.node_residual);
    }
    ensure(qworst <= QUAT_INTERP_TOL, || format!("quaternionic residual {qworst:e}"))?;
    Ok(format!("30 directional instances {worst:.1e}, axis infeasibility rejected, 20 quaternionic instances {qworst:.1e}"))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("even-polynomial interpolation example", even_interpolation_example),
        ("negative squares of the worked kernels", negative_squares_examples),
        ("factorization round trip", factorization_round_trip),
        ("minimality of the product realization", minimality_both_directions),
        ("quaternionic factorization round trip", quaternion_round_trip),
        ("kernel positivity versus boundary positivity", example_kernel_dichotomy),
        ("regularized factor of -1/z^2", regularized_inverse_square),
        ("chi algebra", chi_algebra),
        ("interpolation contracts", interpolation_contracts),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p.downcast_ref::<String>().cloned().or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        let secs = t.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("acceptance {} {name}: PASS ({detail}) [{secs:.2}s]", k + 1),
            Err(detail) => {
                failed += 1;
                println!("acceptance {} {name}: FAIL ({detail}) [{secs:.2}s]", k + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed in {:.2}s", criteria.len() - failed, criteria.len(), start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}
