//! Frozen calibration constants: the free Motohashi coefficients, the
//! quadratic P₂ of the Δ² Laplace asymptotic, and a₁…a₄ of the fourth-moment
//! main term. `latlab calibrate` regenerates `data/calibration.json`.

use serde::{Deserialize, Serialize};

use crate::arith::{MotohashiCoefficients, SieveTable};
use crate::error::{out_of_range, LabError, Result};
use crate::fit::{least_squares, log_power_basis, FitReport};
use crate::laplace::{constant_series, fit_p2, ConstantKind};
use crate::quad::QuadratureConfig;
use crate::zeta::{moments_on_grid, FourthMomentCoefficients};

/// Sieve limit shared by every calibration fit.
pub const CALIBRATION_SIEVE: u64 = 1_000_016;

pub const MOTOHASHI_XS: [f64; 6] = [1e5, 2e5, 4e5, 6e5, 8e5, 1e6];
pub const MOTOHASHI_HS: [u64; 8] = [1, 2, 3, 4, 5, 6, 7, 8];
pub const P2_GRID: [f64; 11] = [
    200.0, 400.0, 500.0, 600.0, 800.0, 1000.0, 1200.0, 1400.0, 1600.0, 1800.0, 2000.0,
];
pub const P2_HELD_OUT: [f64; 3] = [300.0, 700.0, 1500.0];

const GENERATOR: &str = "latlab calibrate --out crates/core/data";
const FROZEN: &str = include_str!("../data/calibration.json");

/// 12 log-spaced heights on [10³, 3·10⁴].
pub fn fourth_moment_grid() -> Vec<f64> {
    (0..12).map(|i| 1e3 * 30f64.powf(i as f64 / 11.0)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub quantity: String,
    pub model: String,
    pub grid: Vec<f64>,
    pub residual_norm: f64,
    pub fixed: String,
    pub command: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub sieve_limit: u64,
    pub motohashi: MotohashiCoefficients,
    /// [a0, a1, a2] of P₂(log T) = a0 log²T + a1 log T + a2.
    pub p2: [f64; 3],
    /// Σ d(n)² n^{−3/2} as used when fitting P₂.
    pub d_squared_constant: f64,
    pub fourth_moment: FourthMomentCoefficients,
    pub provenance: Vec<Provenance>,
}

impl Calibration {
    pub fn frozen() -> Result<Self> {
        serde_json::from_str(FROZEN).map_err(|e| LabError::Cache(format!("calibration data: {e}")))
    }

    /// Runs every fit. `table` must reach `CALIBRATION_SIEVE`.
    pub fn compute(table: &SieveTable, quad: &QuadratureConfig) -> Result<Self> {
        if table.limit() < CALIBRATION_SIEVE {
            return Err(out_of_range(
                "sieve limit",
                table.limit() as f64,
                format!(">= {CALIBRATION_SIEVE}"),
            ));
        }
        let (motohashi, m_fit) = MotohashiCoefficients::calibrate(table, &MOTOHASHI_XS, &MOTOHASHI_HS)?;

        let d2 = constant_series(ConstantKind::DSquared, table)?;
        let p2_fit = fit_p2(&P2_GRID, table, &d2)?;

        let ts = fourth_moment_grid();
        let values = moments_on_grid(2, &ts, quad)?;
        let ys: Vec<f64> = ts.iter().zip(&values).map(|(t, (v, _))| v / t).collect();
        let mut pinned = [None; 5];
        pinned[0] = Some(FourthMomentCoefficients::A0);
        let q_fit = least_squares("I2(T)/T = a0 L^4 + ... + a4, L = log T", &ts, &ys, &pinned, log_power_basis(4))?;
        let mut a = [0.0; 5];
        a.copy_from_slice(&q_fit.coefficients);

        let prov = |quantity: &str, f: &FitReport, fixed: &str| Provenance {
            quantity: quantity.into(),
            model: f.model.clone(),
            grid: f.grid.clone(),
            residual_norm: f.residual_norm,
            fixed: fixed.into(),
            command: GENERATOR.into(),
        };
        Ok(Self {
            sieve_limit: table.limit(),
            motohashi,
            p2: [p2_fit.coefficients[0], p2_fit.coefficients[1], p2_fit.coefficients[2]],
            d_squared_constant: d2.value,
            fourth_moment: FourthMomentCoefficients(a),
            provenance: vec![
                prov("motohashi c_ij", &m_fit, "c20 = 6/pi^2, c21 = c22 = 0; h in 1..=8 at each x"),
                prov("P2", &p2_fit, "none"),
                prov("fourth moment a1..a4", &q_fit, "a0 = 1/(2 pi^2)"),
            ],
        })
    }

    /// P₂ as a fit report, for `verify_theorem5`.
    pub fn p2_report(&self) -> FitReport {
        FitReport {
            model: "a0 log²T + a1 log T + a2".into(),
            coefficients: self.p2.to_vec(),
            pinned: vec![false; 3],
            residual_norm: self
                .provenance
                .iter()
                .find(|p| p.quantity == "P2")
                .map_or(0.0, |p| p.residual_norm),
            grid: P2_GRID.to_vec(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("calibration serializes") + "\n"
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frozen_file_parses() {
        let c = Calibration::frozen().unwrap();
        assert_eq!(c.sieve_limit, CALIBRATION_SIEVE);
        assert_eq!(c.fourth_moment.0[0], FourthMomentCoefficients::A0);
        assert_eq!(c.motohashi.c[2][0], MotohashiCoefficients::C20);
        assert!(c.provenance.iter().all(|p| p.command.starts_with("latlab calibrate")));
        assert_eq!(c.provenance.len(), 3);
    }

    #[test]
    fn fourth_moment_grid_endpoints() {
        let g = fourth_moment_grid();
        assert!((g[0] - 1e3).abs() < 1e-9 && (g[11] - 3e4).abs() < 1e-7);
    }
}
