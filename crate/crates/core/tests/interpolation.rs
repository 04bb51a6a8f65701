mod common;

use gpe_core::factorization::{verify_factorization, Side};
use gpe_core::interp::{gpe_interpolate, InterpolationOutcome, InterpolationSpec};
use gpe_core::io::parse_quaternion;
use gpe_core::linalg::{c64, max_abs, CMatrix};
use gpe_core::quat::{QuatMatrix, Quaternion};
use rand::Rng;

#[test]
fn left_factors_of_interpolants() {
    for seed in 0..10u64 {
        let mut rng = common::rng(6000 + seed);
        let nodes: Vec<_> = (0..2).map(|_| c64(rng.gen_range(0.3..1.5), rng.gen_range(-1.5..1.5))).collect();
        let xi: Vec<CMatrix> = (0..2).map(|_| common::cmatrix(&mut rng, 2, 1)).collect();
        let eta: Vec<CMatrix> = (0..2).map(|_| common::cmatrix(&mut rng, 2, 1)).collect();
        let r = gpe_interpolate(&nodes, &xi, &eta, Side::Left).unwrap_or_else(|e| panic!("seed {seed}: {e}"));
        assert!(r.node_residual < 1e-8, "seed {seed}: {:e}", r.node_residual);
        let l = &r.factor.factor;
        for ((w, x), y) in nodes.iter().zip(&xi).zip(&eta) {
            let v = l.sharp().evaluate(*w).unwrap() * l.evaluate(*w).unwrap() * x;
            assert!(max_abs(&(v - y)) < 1e-7, "seed {seed}");
        }
        let (res, rep) = verify_factorization(&r.phi, l, &r.phi.sample_points(20)).unwrap();
        assert!(res < 1e-7 && rep.located(Side::Left, 1e-7), "seed {seed}: {res:e} {rep:?}");
    }
}

#[test]
fn full_value_problem_file() {
    let spec = InterpolationSpec::from_json(
        r#"{"mode": "full_value", "nodes": ["1+i", "2", "0.5-j"],
            "values": [[["2+j"]], [["1"]], [["3"]]]}"#,
    )
    .unwrap();
    let InterpolationOutcome::FullValue(r) = spec.solve().unwrap() else { panic!("wrong outcome") };
    for (p, v) in [("1+i", "2+j"), ("2", "1"), ("0.5-j", "3")] {
        let got = r.phi.evaluate(parse_quaternion(p).unwrap());
        let want = QuatMatrix::scalar(parse_quaternion(v).unwrap());
        assert!((&got - &want).max_abs() < 1e-9, "at {p}");
    }
}

#[test]
fn two_sided_problem_files() {
    let spec = InterpolationSpec::from_json(
        r#"{"mode": "two_sided", "constraints": [
            {"point": "1", "kind": "value", "value": [["1", "0"], ["0", "2"]]},
            {"point": "2i", "kind": "sharp_value", "value": [["0", "1"], ["1", "0"]]}]}"#,
    )
    .unwrap();
    let InterpolationOutcome::TwoSided { complex, quaternion: None } = spec.solve().unwrap() else { panic!("wrong outcome") };
    let eval = |z: gpe_core::linalg::C64| complex.iter().rev().fold(CMatrix::zeros(2, 2), |acc, c| acc * z + c);
    assert!(max_abs(&(eval(c64(1.0, 0.0)) - CMatrix::from_diagonal(&nalgebra::dvector![c64(1.0, 0.0), c64(2.0, 0.0)]))) < 1e-10);
    // L^#(w) = L(-conj w)^*
    let sharp_at = eval(c64(0.0, 2.0)).adjoint();
    assert!(max_abs(&(sharp_at - CMatrix::from_fn(2, 2, |i, j| c64(if i == j { 0.0 } else { 1.0 }, 0.0)))) < 1e-10);

    let spec = InterpolationSpec::from_json(
        r#"{"mode": "two_sided", "quaternion": true, "constraints": [
            {"point": "i", "kind": "value", "value": [["j"]]},
            {"point": "1+k", "kind": "sharp_value", "value": [["1"]]}]}"#,
    )
    .unwrap();
    let InterpolationOutcome::TwoSided { quaternion: Some(lag), .. } = spec.solve().unwrap() else { panic!("wrong outcome") };
    assert!((&lag.polynomial.evaluate(Quaternion::I) - &QuatMatrix::scalar(Quaternion::J)).max_abs() < 1e-10);
    let s = lag.polynomial.sharp().evaluate(parse_quaternion("1+k").unwrap());
    assert!((&s - &QuatMatrix::identity(1)).max_abs() < 1e-10);
    assert_eq!(lag.sylvester.len(), 1);
}
