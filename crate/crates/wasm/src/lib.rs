//! Browser bindings for a few latlab computations. Each exported function
//! returns a flat `Float64Array`; the page in `www/` draws it on a canvas.
//!
//! The plain functions in [`curves`] do the work and are what the tests call.

use wasm_bindgen::prelude::*;

pub mod curves {
    use num_complex::Complex64;

    use latlab::arith::{Abscissa, SieveTable};
    use latlab::errterm::{delta_direct, delta_voronoi, p_direct, p_hardy, Smoothing};
    use latlab::error::{LabError, Result};
    use latlab::funceq::{ratio_integrand, verify_theorem3, SolutionParams};
    use latlab::quad::QuadratureConfig;
    use latlab::zeta::{rs_theta, zeta_critical};

    /// Largest sieve the page may ask for.
    pub const MAX_SIEVE: u64 = 2_000_000;
    pub const MAX_POINTS: usize = 4000;

    fn out_of_range(what: &'static str, value: f64, range: impl Into<String>) -> LabError {
        LabError::OutOfRange { what, value, range: range.into() }
    }

    fn grid(a: f64, b: f64, points: usize) -> Result<Vec<f64>> {
        if !(2..=MAX_POINTS).contains(&points) {
            return Err(out_of_range("points", points as f64, format!("[2, {MAX_POINTS}]")));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(out_of_range("start", a, "start < end"));
        }
        let step = (b - a) / (points - 1) as f64;
        Ok((0..points).map(|k| a + step * k as f64).collect())
    }

    fn abscissa(x: f64) -> Result<Abscissa> {
        if x.fract() == 0.0 {
            Ok(Abscissa::Integer(x as u64))
        } else {
            Abscissa::non_integral(x)
        }
    }

    /// Triples `(x, direct, series)` for P (`divisor = false`) or Δ on
    /// `[x0, x1]`, the series smoothed and cut at `n`.
    pub fn error_term(divisor: bool, x0: f64, x1: f64, points: usize, n: usize) -> Result<Vec<f64>> {
        if !(x0 >= 1.0) {
            return Err(out_of_range("x0", x0, "x0 >= 1"));
        }
        let limit = (x1.ceil() as u64).max(n as u64);
        if limit > MAX_SIEVE {
            return Err(out_of_range("max(x1, N)", limit as f64, format!("<= {MAX_SIEVE}")));
        }
        let table = SieveTable::build(limit)?;
        let mut out = Vec::with_capacity(3 * points);
        for x in grid(x0, x1, points)? {
            let (direct, series) = if divisor {
                (delta_direct(abscissa(x)?, &table)?, delta_voronoi(x, n, Smoothing::Smoothed, &table)?)
            } else {
                (p_direct(abscissa(x)?, &table)?, p_hardy(x, n, Smoothing::Smoothed, &table)?)
            };
            out.extend([x, direct.value, series.value]);
        }
        Ok(out)
    }

    /// Triples `(t, Z(t), |ζ(½+it)|)` for `10 ≤ t0 < t1`.
    pub fn critical_line(t0: f64, t1: f64, points: usize) -> Result<Vec<f64>> {
        if !(t0 >= 10.0) || t1 > 1e6 {
            return Err(out_of_range("t", t0, "[10, 1e6]"));
        }
        let mut out = Vec::with_capacity(3 * points);
        for t in grid(t0, t1, points)? {
            let (z, _) = zeta_critical(t)?;
            let hardy = (z * Complex64::from_polar(1.0, rs_theta(t))).re;
            out.extend([t, hardy, z.norm()]);
        }
        Ok(out)
    }

    /// `[integral, target, residual, horizon]` followed by pairs `(t, ratio)`
    /// sampled on `[0, horizon/4]`.
    pub fn integral_equation(c: f64, w: f64, h: f64, points: usize) -> Result<Vec<f64>> {
        let p = SolutionParams::new(c, w, h)?;
        let r = verify_theorem3(&p, &QuadratureConfig::default())?;
        let mut out = vec![r.integral, r.target, r.residual, r.horizon];
        for t in grid(0.0, r.horizon / 4.0, points)? {
            out.extend([t, ratio_integrand(t, &p)?]);
        }
        Ok(out)
    }
}

fn js<T>(r: latlab::error::Result<T>) -> Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn error_term(divisor: bool, x0: f64, x1: f64, points: usize, n: usize) -> Result<Vec<f64>, JsError> {
    js(curves::error_term(divisor, x0, x1, points, n))
}

#[wasm_bindgen]
pub fn critical_line(t0: f64, t1: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(curves::critical_line(t0, t1, points))
}

#[wasm_bindgen]
pub fn integral_equation(c: f64, w: f64, h: f64, points: usize) -> Result<Vec<f64>, JsError> {
    js(curves::integral_equation(c, w, h, points))
}
