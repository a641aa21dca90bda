use fpt_core::catalog::{bessel_level, bm_line, DiffusionSpec};
use fpt_core::images::{h_function, solve_boundary, ImageMeasure};
use fpt_core::mcsim::{simulate_crossing_times, MCConfig};
use fpt_core::moebius::Curve;
use fpt_core::specfun::{airy_ai, airy_zeros, bessel_j, bessel_j_zeros, pcf_d, pcf_nu_zeros};
use proptest::prelude::*;

const HALF_WIDTH: f64 = 5e-11;

fn brackets_sign_change(f: impl Fn(f64) -> f64, z: f64) -> bool {
    f(z - HALF_WIDTH) * f(z + HALF_WIDTH) <= 0.0
}

#[test]
fn bessel_zeros_change_sign() {
    for nu in [-0.5, 0.0, 0.5, 1.7, 4.0] {
        let table = bessel_j_zeros(nu, 20).unwrap();
        for &z in &table.zeros {
            assert!(brackets_sign_change(|x| bessel_j(nu, x).unwrap(), z), "J_{nu} at {z}");
        }
    }
}

#[test]
fn airy_zeros_change_sign() {
    for &z in &airy_zeros(30).unwrap().zeros {
        assert!(brackets_sign_change(|x| airy_ai(x).unwrap(), z), "Ai at {z}");
    }
}

#[test]
fn pcf_order_zeros_change_sign() {
    for b in [-1.5, 0.0, 1.0] {
        for &nu in &pcf_nu_zeros(b, 15).unwrap().zeros {
            assert!(brackets_sign_change(|v| pcf_d(v, b).unwrap(), nu), "D_ν({b}) at ν = {nu}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn image_boundary_solves_h_zero(
        s1 in 0.3f64..3.0,
        w1 in 0.05f64..3.0,
        s2 in 0.3f64..3.0,
        w2 in 0.0f64..2.0,
        t in 0.01f64..20.0,
    ) {
        let atoms = if w2 > 0.0 { vec![(s1, w1), (s2, w2)] } else { vec![(s1, w1)] };
        let m = ImageMeasure::new(atoms, None).unwrap();
        let b = solve_boundary(&m, t).unwrap();
        let scale = 1.0 + b.abs() / t.sqrt();
        prop_assert!(h_function(&m, t, b).unwrap().abs() <= 1e-12 * scale);
    }

    #[test]
    fn line_density_mass(a in 0.3f64..2.0, b in prop_oneof![-1.5f64..-0.5, 0.5f64..1.5]) {
        let p = bm_line(a, b).unwrap();
        let mass = p.mass().unwrap();
        let expect = if b > 0.0 { (-2.0 * a * b).exp() } else { 1.0 };
        prop_assert!((mass - expect).abs() < 1e-6, "mass {mass} vs {expect}");
        for t in [0.01, 0.3, 2.0, 30.0] {
            prop_assert!(p.eval(t).unwrap() >= 0.0);
        }
    }
}

#[test]
fn bessel_level_density_is_nonnegative_with_unit_mass() {
    for (nu, x) in [(0.5, 0.0), (-0.3, 0.5), (2.0, 0.4)] {
        let p = bessel_level(nu, x, 1.0).unwrap();
        let grid: Vec<f64> = (1..200).map(|k| 0.01 * k as f64).collect();
        assert!(p.tabulate(&grid).unwrap().values.iter().all(|&v| v >= 0.0));
        let mass = p.integrate(1e-3, 60.0).unwrap();
        assert!((mass - 1.0).abs() < 1e-6, "ν = {nu}, x = {x}: mass {mass}");
    }
}

#[test]
fn bridge_correction_is_stable_under_refinement() {
    let spec = DiffusionSpec::brownian(0.0);
    let f = Curve::constant(1.0);
    let base = MCConfig { n_paths: 50_000, horizon: 4.0, bins: 20, ..MCConfig::default() };
    let coarse = simulate_crossing_times(&spec, &f, &MCConfig { dt: 4e-3, seed: 11, ..base.clone() }).unwrap();
    let fine = simulate_crossing_times(&spec, &f, &MCConfig { dt: 1e-3, seed: 12, ..base }).unwrap();
    // independent runs: under no discretization bias the standardized bin
    // differences are N(0,1), whose mean absolute value is about 0.8
    let z: Vec<f64> = coarse
        .bin_densities
        .iter()
        .zip(&fine.bin_densities)
        .zip(coarse.standard_errors.iter().zip(&fine.standard_errors))
        .map(|((a, b), (sa, sb))| (a - b).abs() / (sa * sa + sb * sb).sqrt().max(1e-12))
        .collect();
    let mean = z.iter().sum::<f64>() / z.len() as f64;
    assert!(mean < 1.0, "mean standardized bin difference {mean}");
}
