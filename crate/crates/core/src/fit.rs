//! Linear least squares over a small basis, with optionally pinned coefficients.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: String,
    pub coefficients: Vec<f64>,
    /// `true` where the coefficient was held at a fixed value.
    pub pinned: Vec<bool>,
    /// Root-mean-square residual over the grid.
    pub residual_norm: f64,
    pub grid: Vec<f64>,
}

impl FitReport {
    /// Evaluates the fitted model given the basis values at a point.
    pub fn evaluate(&self, basis: &[f64]) -> f64 {
        self.coefficients
            .iter()
            .zip(basis)
            .map(|(c, b)| c * b)
            .sum()
    }
}

/// Fits `y ≈ Σ_j c_j φ_j(g)` over `grid`.
///
/// `basis(g)` returns the values `φ_j(g)`. Entries of `pinned` that are
/// `Some(v)` fix `c_j = v`; the rest are solved for.
pub fn least_squares<B>(
    model: impl Into<String>,
    grid: &[f64],
    ys: &[f64],
    pinned: &[Option<f64>],
    basis: B,
) -> Result<FitReport>
where
    B: Fn(f64) -> Vec<f64>,
{
    if grid.len() != ys.len() {
        return Err(LabError::InvalidFit("grid and data lengths differ".into()));
    }
    let k = pinned.len();
    let free: Vec<usize> = (0..k).filter(|&j| pinned[j].is_none()).collect();
    if grid.len() < free.len() {
        return Err(LabError::InvalidFit(format!(
            "{} points cannot determine {} coefficients",
            grid.len(),
            free.len()
        )));
    }
    let rows: Vec<Vec<f64>> = grid.iter().map(|&g| basis(g)).collect();
    if rows.iter().any(|r| r.len() != k) {
        return Err(LabError::InvalidFit("basis length mismatch".into()));
    }

    let mut coefficients: Vec<f64> = pinned.iter().map(|p| p.unwrap_or(0.0)).collect();
    if !free.is_empty() {
        // column scaling keeps the SVD well conditioned for log-power bases
        let scales: Vec<f64> = free
            .iter()
            .map(|&j| {
                let n = rows.iter().map(|r| r[j] * r[j]).sum::<f64>().sqrt();
                if n > 0.0 { n } else { 1.0 }
            })
            .collect();
        let a = DMatrix::from_fn(grid.len(), free.len(), |i, c| rows[i][free[c]] / scales[c]);
        let b = DVector::from_fn(grid.len(), |i, _| {
            let fixed: f64 = (0..k)
                .filter_map(|j| pinned[j].map(|v| v * rows[i][j]))
                .sum();
            ys[i] - fixed
        });
        let svd = a.svd(true, true);
        let sol = svd
            .solve(&b, 1e-14)
            .map_err(|e| LabError::InvalidFit(e.to_string()))?;
        for (c, &j) in free.iter().enumerate() {
            coefficients[j] = sol[c] / scales[c];
        }
    }

    let sq: f64 = rows
        .iter()
        .zip(ys)
        .map(|(r, y)| {
            let fit: f64 = r.iter().zip(&coefficients).map(|(b, c)| b * c).sum();
            (y - fit).powi(2)
        })
        .sum();
    Ok(FitReport {
        model: model.into(),
        coefficients,
        pinned: pinned.iter().map(Option::is_some).collect(),
        residual_norm: (sq / grid.len() as f64).sqrt(),
        grid: grid.to_vec(),
    })
}

/// Basis `[L^d, L^{d-1}, …, 1]` with `L = ln(g)`; coefficients come out
/// highest power first.
pub fn log_power_basis(degree: usize) -> impl Fn(f64) -> Vec<f64> {
    move |g: f64| {
        let l = g.ln();
        (0..=degree).rev().map(|p| l.powi(p as i32)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_exact_polynomial() {
        let grid: Vec<f64> = (1..=12).map(|i| 10f64.powf(1.0 + i as f64 / 4.0)).collect();
        let truth = [0.05, -0.2, 1.5, 3.0, -7.0];
        let basis = log_power_basis(4);
        let ys: Vec<f64> = grid
            .iter()
            .map(|&g| basis(g).iter().zip(&truth).map(|(b, c)| b * c).sum())
            .collect();
        let r = least_squares("quartic", &grid, &ys, &[None; 5], &basis).unwrap();
        for (a, b) in r.coefficients.iter().zip(&truth) {
            assert!((a - b).abs() < 1e-7, "{a} vs {b}");
        }
        assert!(r.residual_norm < 1e-9);
    }

    #[test]
    fn pinned_coefficients_are_untouched() {
        let grid: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = grid.iter().map(|x| 2.0 * x + 1.0).collect();
        let r = least_squares("line", &grid, &ys, &[Some(3.0), None], |x| vec![x, 1.0]).unwrap();
        assert_eq!(r.coefficients[0], 3.0);
        assert_eq!(r.pinned, vec![true, false]);
        assert!(r.residual_norm > 0.0);
    }

    #[test]
    fn underdetermined_is_rejected() {
        let err = least_squares("x", &[1.0], &[1.0], &[None, None], |x| vec![x, 1.0]);
        assert!(err.is_err());
    }
}
