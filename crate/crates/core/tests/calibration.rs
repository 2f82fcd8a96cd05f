use latlab::arith::SieveTable;
use latlab::calib::{Calibration, CALIBRATION_SIEVE, P2_HELD_OUT};
use latlab::laplace::{constant_series, verify_theorem5, ConstantKind};
use latlab::quad::QuadratureConfig;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-3)
}

#[test]
fn refit_reproduces_frozen_constants() {
    let frozen = Calibration::frozen().unwrap();
    let table = SieveTable::build(CALIBRATION_SIEVE).unwrap();
    let fresh = Calibration::compute(&table, &QuadratureConfig::default()).unwrap();
    for i in 0..3 {
        for j in 0..3 {
            assert!(rel(fresh.motohashi.c[i][j], frozen.motohashi.c[i][j]) < 1e-9, "c{i}{j}");
        }
    }
    for k in 0..3 {
        assert!(rel(fresh.p2[k], frozen.p2[k]) < 1e-9, "p2[{k}]");
    }
    for k in 0..5 {
        assert!(rel(fresh.fourth_moment.0[k], frozen.fourth_moment.0[k]) < 1e-8, "a{k}");
    }
    assert!(rel(fresh.d_squared_constant, frozen.d_squared_constant) < 1e-12);

    let d2 = constant_series(ConstantKind::DSquared, &table).unwrap();
    for t in P2_HELD_OUT {
        let row = verify_theorem5(t, &table, &d2, &frozen.p2_report()).unwrap();
        assert!(row.residual.abs() <= 5.0 * t.powf(0.75), "{row:?}");
    }
}
