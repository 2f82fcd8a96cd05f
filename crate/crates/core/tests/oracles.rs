//! Values checked against independent references: 30-digit mpmath values,
//! integral representations evaluated by adaptive quadrature, and closed
//! forms for the Dirichlet-series constants.

use std::f64::consts::PI;

use latlab::arith::SieveTable;
use latlab::laplace::{constant_series, ConstantKind};
use latlab::quad::adaptive;
use latlab::special::*;
use latlab::zeta::*;
use num_complex::Complex64;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn bessel_reference_values() {
    let cases: [(&str, f64, f64); 8] = [
        ("K1(5)", bessel_k1(5.0).unwrap(), 0.004_044_613_445_452_164_2),
        ("K1(0.5)", bessel_k1(0.5).unwrap(), 1.656_441_120_003_300_9),
        ("Y1(5)", bessel_y1(5.0).unwrap(), 0.147_863_143_391_226_84),
        ("J1(1000)", bessel_j1(1000.0).unwrap(), 0.004_728_311_907_089_523_9),
        ("Y1(1000)", bessel_y1(1000.0).unwrap(), -0.024_784_331_292_351_779),
        ("J0(30)", bessel_j0(30.0).unwrap(), -0.086_367_983_581_040_211),
        ("I1(2.5)", bessel_i1(2.5).unwrap(), 2.516_716_245_288_698_4),
        ("J1(2pi)", bessel_j1(2.0 * PI).unwrap(), -0.212_382_530_076_369_05),
    ];
    for (name, got, want) in cases {
        assert!((got - want).abs() < 1e-13, "{name}: {got} vs {want}");
    }
    let i0 = bessel_i0(30.0).unwrap();
    assert!(close(i0, 781_672_297_823.977_5, 1e-13), "I0(30) = {i0}");
}

/// K₁(x) = x ∫₁^∞ e^{−xt} √(t² − 1) dt.
fn k1_by_integral(x: f64) -> f64 {
    let upper = 1.0 + 45.0 / x;
    x * adaptive(1.0, upper, 64, 1e-15, |t| (-x * t).exp() * (t * t - 1.0).sqrt()).unwrap()
}

/// Y₁(x) = (1/π)∫₀^π sin(x sin θ − θ) dθ − (1/π)∫₀^∞ (e^t − e^{−t}) e^{−x sinh t} dt.
fn y1_by_integral(x: f64) -> f64 {
    let a = adaptive(0.0, PI, 64, 1e-14, |th| (x * th.sin() - th).sin()).unwrap();
    let top = (45.0 / x).asinh() + 1.0;
    let b = adaptive(0.0, top, 64, 1e-14, |t| 2.0 * t.sinh() * (-x * t.sinh()).exp()).unwrap();
    (a - b) / PI
}

#[test]
fn k1_and_y1_match_integral_representations() {
    for x in [0.3, 1.0, 1.9, 2.1, 4.0, 9.0, 12.5, 13.5, 20.0, 40.0] {
        let k = bessel_k1(x).unwrap();
        let ki = k1_by_integral(x);
        assert!((k - ki).abs() < 1e-12 * ki.max(1e-300) + 1e-15, "K1({x}) {k} vs {ki}");
        let y = bessel_y1(x).unwrap();
        let yi = y1_by_integral(x);
        assert!((y - yi).abs() < 1e-10, "Y1({x}) {y} vs {yi}");
    }
}

#[test]
fn gamma_and_chi_reference_values() {
    let g = gamma_complex(Complex64::new(0.25, -0.5)).unwrap();
    assert!((g - Complex64::new(0.515_524_490_135_069_1, 1.307_325_926_631_825_4)).norm() < 1e-13);
    let lg = ln_gamma_complex(Complex64::new(3.0, 40.0)).unwrap();
    assert!((lg.re + 52.689_155_060_822_637).abs() < 1e-10);
    let turns = (lg.im - 111.405_132_415_459_97) / (2.0 * PI);
    assert!((turns - turns.round()).abs() < 1e-11);
    let c = chi(Complex64::new(0.5, 100.0)).unwrap();
    assert!((c - Complex64::new(0.999_885_364_189_613_9, -0.015_141_283_941_701_319)).norm() < 1e-11);
}

#[test]
fn zeta_reference_values() {
    let z = zeta_em(Complex64::new(0.3, 17.0), 1e-12).unwrap();
    assert!((z - Complex64::new(2.118_302_306_601_248_1, 1.080_794_924_971_601_2)).norm() < 1e-10);
    let (z, _) = zeta_critical(1000.0).unwrap();
    assert!((z.norm() - Complex64::new(0.356_334_367_194_396_06, 0.931_997_831_232_993_67).norm()).abs() < 1e-4);
    assert!((hardy_z(5000.0).unwrap() + 0.804_257_236_352_939_85).abs() < 1e-4);
    let d = zeta_derivative_real(2.0).unwrap();
    assert!((d + 0.937_548_254_315_843_75).abs() < 1e-12, "zeta'(2) = {d}");
}

#[test]
fn functional_equation_on_fifty_points() {
    let mut worst: f64 = 0.0;
    for i in 0..50 {
        let re = -2.0 + 5.0 * (i % 10) as f64 / 9.0;
        let im = 1.0 + 49.0 * (i / 10) as f64 / 4.0;
        let im = if i % 2 == 0 { im } else { -im };
        let s = Complex64::new(re, im);
        let lhs = zeta_em(s, 1e-13).unwrap();
        let rhs = chi(s).unwrap() * zeta_em(1.0 - s, 1e-13).unwrap();
        worst = worst.max((lhs - rhs).norm() / lhs.norm().max(1.0));
        assert!((chi(s).unwrap() * chi(1.0 - s).unwrap() - 1.0).norm() < 1e-9);
    }
    assert!(worst < 1e-8, "worst {worst}");
}

#[test]
fn dirichlet_constants_against_euler_products() {
    // Σ r(n)² n^{−s} = 16 ζ(s)² L(s,χ₄)² / ((1 + 2^{−s}) ζ(2s)) and
    // Σ d(n)² n^{−s} = ζ(s)⁴/ζ(2s), both at s = 3/2.
    let table = SieveTable::build(4_000_000).unwrap();
    let r2 = constant_series(ConstantKind::RSquared, &table).unwrap();
    let d2 = constant_series(ConstantKind::DSquared, &table).unwrap();
    assert!((r2.value - 50.156_056_142_639_44).abs() <= r2.tail_bound, "{r2:?}");
    assert!((d2.value - 38.745_144_143_901_32).abs() <= d2.tail_bound, "{d2:?}");
    assert!(r2.tail_bound < 1e-3 && d2.tail_bound < 1e-3);
}
