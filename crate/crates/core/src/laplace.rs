//! Laplace transforms: closed-form Bessel identities, the weighted mean
//! squares ∫ P² e^{−x/T} and ∫ Δ² e^{−x/T}, transforms of |ζ(½+ix)|^{2k}
//! and the Mellin inversion of e^{−z}.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::SieveTable;
use crate::errterm::{delta_cell_integral, divisor_main_term};
use crate::error::{out_of_range, LabError, Result};
use crate::fit::{least_squares, log_power_basis, FitReport};
use crate::quad::{adaptive, CompensatedSum, GaussLegendre, QuadratureConfig};
use crate::report::VerificationRow;
use crate::special::{gamma_complex, SwitchPolicy, EULER_GAMMA};
use crate::zeta::{zeta_critical_sq, zeta_derivative_real, zeta_laplace_tail_bound, CriticalLineTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LaplaceMethod {
    ExactPiecewise,
    PanelQuadrature,
    ClosedForm,
    Series,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceEstimate {
    pub parameter: f64,
    pub value: f64,
    /// Truncation point of the semi-infinite integral or series.
    pub horizon: f64,
    pub tail_bound: f64,
    pub method: LaplaceMethod,
}

/// |P(x)| ≤ π(√(2x) + ½): the disc of radius √x is sandwiched between the
/// unions of unit squares centred at lattice points.
#[cfg(test)]
fn p_envelope(x: f64) -> f64 {
    PI * ((2.0 * x).sqrt() + 0.5)
}

/// |Δ(x)| ≤ 2√x + 2 (hyperbola method; checked over the sieve range in tests).
#[cfg(test)]
fn delta_envelope(x: f64) -> f64 {
    2.0 * x.sqrt() + 2.0
}

/// ∫_H^∞ (α + β√x + γx) e^{−sx} dx for α, β, γ ≥ 0.
fn poly_sqrt_tail(alpha: f64, beta: f64, gamma: f64, s: f64, h: f64) -> f64 {
    let e = (-s * h).exp();
    // ∫_H^∞ √x e^{−sx} ≤ e^{−sH}(√H/s + 1/(2s²√H))
    let root = if h > 0.0 {
        h.sqrt() / s + 1.0 / (2.0 * s * s * h.sqrt())
    } else {
        (PI / s).sqrt() / (2.0 * s)
    };
    e * (alpha / s + gamma * (h / s + 1.0 / (s * s))) + beta * e * root
}

/// π s^{−2} Σ r(n) e^{−π²n/s}, summed until the tail (with r(n) ≤ 8√n)
/// falls below `tol`.
pub fn laplace_p_closed(s: f64, table: &SieveTable, tol: f64) -> Result<LaplaceEstimate> {
    if !(s > 0.0) {
        return Err(out_of_range("s", s, "s > 0"));
    }
    let q = (-PI * PI / s).exp();
    let pre = PI / (s * s);
    let mut acc = CompensatedSum::new();
    let limit = table.limit() as usize;
    let mut qn = 1.0;
    for n in 1..=limit {
        qn *= q;
        acc.add(table.r(n) as f64 * qn);
        let m = n as f64 + 1.0;
        let rho = q * ((m + 1.0) / m).sqrt();
        if rho < 1.0 {
            let tail = pre * 8.0 * m.sqrt() * qn * q / (1.0 - rho);
            if tail < tol {
                return Ok(LaplaceEstimate {
                    parameter: s,
                    value: pre * acc.value(),
                    horizon: n as f64,
                    tail_bound: tail,
                    method: LaplaceMethod::Series,
                });
            }
        }
    }
    Err(LabError::Budget(format!(
        "Σ r(n) e^(−π²n/s) at s = {s} needs more than the sieve limit {limit}"
    )))
}

fn horizon_cells(horizon: f64, table: &SieveTable) -> Result<usize> {
    let cells = horizon.ceil() as usize;
    if cells as u64 > table.limit() {
        return Err(out_of_range(
            "horizon",
            horizon,
            format!("<= sieve limit {}", table.limit()),
        ));
    }
    Ok(cells)
}

/// m_j = ∫₀¹ u^j e^{−au} du for j = 0, 1, 2.
fn unit_moments(a: f64) -> [f64; 3] {
    if a < 2.0 {
        let mut m = [0.0; 3];
        for (j, mj) in m.iter_mut().enumerate() {
            let mut term = 1.0;
            let mut acc = 0.0;
            for i in 0..60 {
                let v = term / (i + j + 1) as f64;
                acc += v;
                if v.abs() < 1e-18 * acc.abs() {
                    break;
                }
                term *= -a / (i + 1) as f64;
            }
            *mj = acc;
        }
        m
    } else {
        let e = (-a).exp();
        let m0 = (1.0 - e) / a;
        let m1 = (m0 - e) / a;
        let m2 = (2.0 * m1 - e) / a;
        [m0, m1, m2]
    }
}

/// ∫₀^∞ e^{−sx} P(x) dx by exact integration on each unit cell, where
/// P = R_k + 1 − πx is linear.
pub fn laplace_p_exact(s: f64, table: &SieveTable) -> Result<LaplaceEstimate> {
    if !(s > 0.0) {
        return Err(out_of_range("s", s, "s > 0"));
    }
    let horizon = 45.0 / s;
    let cells = horizon_cells(horizon, table)?;
    let [m0, m1, _] = unit_moments(s);
    let mut acc = CompensatedSum::new();
    for k in 0..cells {
        let beta = table.r_prefix(k) as f64 + 1.0 - PI * k as f64;
        acc.add((-s * k as f64).exp() * (beta * m0 - PI * m1));
    }
    let h = cells as f64;
    Ok(LaplaceEstimate {
        parameter: s,
        value: acc.value(),
        horizon: h,
        tail_bound: poly_sqrt_tail(PI / 2.0, PI * 2f64.sqrt(), 0.0, s, h),
        method: LaplaceMethod::ExactPiecewise,
    })
}

/// ∫₀^∞ e^{−sx} P(x) dx by adaptive quadrature on each unit cell.
pub fn laplace_p_quadrature(s: f64, table: &SieveTable) -> Result<f64> {
    let horizon = 45.0 / s;
    let cells = horizon_cells(horizon, table)?;
    let mut acc = CompensatedSum::new();
    for k in 0..cells {
        let rk = table.r_prefix(k) as f64;
        let a = k as f64;
        acc.add(adaptive(a, a + 1.0, 1, 1e-15, |x| {
            (-s * x).exp() * (rk + 1.0 - PI * x)
        })?);
    }
    Ok(acc.value())
}

/// ∫₀^∞ e^{−sx} x^{ν/2} J_ν(2√(ax)) dx = e^{−a/s} a^{ν/2} s^{−ν−1}.
pub fn laplace_bessel_single(nu: u8, a: f64, s: f64) -> Result<f64> {
    if nu > 1 {
        return Err(out_of_range("nu", nu as f64, "0 or 1"));
    }
    if !(a >= 0.0) || !(s > 0.0) {
        return Err(LabError::Domain(format!("need a >= 0, s > 0 (a = {a}, s = {s})")));
    }
    let n = nu as f64;
    Ok((-a / s).exp() * a.powf(0.5 * n) * s.powf(-n - 1.0))
}

/// The single-Bessel transform by adaptive quadrature in y = √x.
pub fn laplace_bessel_single_quadrature(nu: u8, a: f64, s: f64) -> Result<f64> {
    let bessel = SwitchPolicy::default();
    let top = (45.0 / s).sqrt();
    let k = 2.0 * a.sqrt();
    let pieces = (k * top / PI).ceil().max(8.0) as usize;
    let mut err = None;
    let v = adaptive(0.0, top, pieces, 1e-15, |y| {
        let j = if nu == 0 { bessel.j0(k * y) } else { bessel.j1(k * y) };
        match j {
            Ok(j) => 2.0 * (-s * y * y).exp() * y.powi(nu as i32 + 1) * j,
            Err(e) => {
                err = Some(e);
                0.0
            }
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// ∫₀^∞ e^{−st} t J₁(a√t) J₁(b√t) dt
/// = e^{−(a²+b²)/4s} (4s³)^{−1} {2ab I₀(ab/2s) − (a²+b²) I₁(ab/2s)},
/// evaluated with exponentially scaled I so the growth of I_ν cancels
/// against the prefactor.
pub fn bessel_product_laplace(a: f64, b: f64, s: f64) -> Result<f64> {
    if !(a > 0.0 && b > 0.0 && s > 0.0) {
        return Err(LabError::Domain(format!("need a, b, s > 0 (a = {a}, b = {b}, s = {s})")));
    }
    let bessel = SwitchPolicy::default();
    let z = a * b / (2.0 * s);
    let i0 = bessel.i_scaled(0, z)?;
    let i1 = bessel.i_scaled(1, z)?;
    let envelope = -(a - b) * (a - b) / (4.0 * s);
    let bracket = 2.0 * a * b * i0 - (a * a + b * b) * i1;
    let v = envelope.exp() * bracket / (4.0 * s * s * s);
    if !v.is_finite() {
        return Err(LabError::Domain(format!("overflow at a = {a}, b = {b}, s = {s}")));
    }
    Ok(v)
}

/// The Bessel-product transform by adaptive quadrature in y = √t.
pub fn bessel_product_quadrature(a: f64, b: f64, s: f64) -> Result<f64> {
    let bessel = SwitchPolicy::default();
    let top = (45.0 / s).sqrt();
    let pieces = ((a + b) * top / PI).ceil().max(8.0) as usize;
    let mut err = None;
    let v = adaptive(0.0, top, pieces, 1e-15, |y| {
        match (bessel.j1(a * y), bessel.j1(b * y)) {
            (Ok(ja), Ok(jb)) => 2.0 * (-s * y * y).exp() * y * y * y * ja * jb,
            (Err(e), _) | (_, Err(e)) => {
                err = Some(e);
                0.0
            }
        }
    })?;
    match err {
        Some(e) => Err(e),
        None => Ok(v),
    }
}

/// One closed-form identity checked against quadrature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub identity: String,
    pub params: Vec<f64>,
    pub closed_form: f64,
    pub quadrature: f64,
    pub relative_error: f64,
}

impl IdentityCheck {
    fn new(identity: &str, params: Vec<f64>, closed_form: f64, quadrature: f64) -> Self {
        Self {
            identity: identity.into(),
            params,
            closed_form,
            quadrature,
            relative_error: (closed_form - quadrature).abs() / closed_form.abs(),
        }
    }
}

/// Every closed-form identity on its parameter grid: the P(x) transform at
/// s ∈ {0.5, 1, 2}; the single-Bessel transform over ν ∈ {0, 1},
/// a ∈ {0.5, 2, 4}, s ∈ {0.5, 1, 2}; the Bessel product over a, b ∈ √(2π)·{1, 2, 3},
/// s ∈ {0.5, 1, 2}.
pub fn identity_suite(table: &SieveTable) -> Result<Vec<IdentityCheck>> {
    let ss = [0.5, 1.0, 2.0];
    let mut jobs: Vec<(u8, [f64; 3])> = Vec::new();
    for &s in &ss {
        jobs.push((0, [s, 0.0, 0.0]));
    }
    for nu in 0..2u8 {
        for a in [0.5, 2.0, 4.0] {
            for &s in &ss {
                jobs.push((1, [nu as f64, a, s]));
            }
        }
    }
    let root = (2.0 * PI).sqrt();
    for i in 1..=3 {
        for j in 1..=3 {
            for &s in &ss {
                jobs.push((2, [root * i as f64, root * j as f64, s]));
            }
        }
    }
    jobs.par_iter()
        .map(|&(kind, p)| match kind {
            0 => {
                let c = laplace_p_closed(p[0], table, 1e-16)?;
                let q = laplace_p_quadrature(p[0], table)?;
                Ok(IdentityCheck::new("laplace_p", vec![p[0]], c.value, q))
            }
            1 => {
                let nu = p[0] as u8;
                let c = laplace_bessel_single(nu, p[1], p[2])?;
                let q = laplace_bessel_single_quadrature(nu, p[1], p[2])?;
                Ok(IdentityCheck::new("bessel_single", p.to_vec(), c, q))
            }
            _ => {
                let c = bessel_product_laplace(p[0], p[1], p[2])?;
                let q = bessel_product_quadrature(p[0], p[1], p[2])?;
                Ok(IdentityCheck::new("bessel_product", p.to_vec(), c, q))
            }
        })
        .collect()
}

/// Which of Σ r²(n) n^{−3/2}, Σ d²(n) n^{−3/2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstantKind {
    RSquared,
    DSquared,
}

/// A constant Σ a_n n^{−3/2} with its summed part and tail.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantSeries {
    pub kind: ConstantKind,
    pub n_max: u64,
    pub partial: f64,
    pub tail: f64,
    pub tail_bound: f64,
    pub value: f64,
}

/// Sums a_n n^{−3/2} to the sieve limit N and adds the tail by partial
/// summation, Σ_{n>N} a_n n^{−3/2} = −A(N)N^{−3/2} + (3/2)∫_N^∞ A(x) x^{−5/2} dx,
/// with A(x) = Σ_{n≤x} a_n modelled as x·(polynomial in log x) fitted on
/// log-spaced points of [√N, N] (degree 1 for r², 3 for d²).
///
/// The bound has two parts: 2M N^{−3/4}, assuming the fit residual stays
/// below M x^{3/4} with M read off the fitting window, and twice the change
/// in the tail when the window shrinks to [N^{2/3}, N].
pub fn constant_series(kind: ConstantKind, table: &SieveTable) -> Result<ConstantSeries> {
    let n_max = table.limit() as usize;
    if n_max < 4096 {
        return Err(out_of_range("sieve limit", n_max as f64, ">= 4096"));
    }
    let a = |n: usize| -> f64 {
        let v = match kind {
            ConstantKind::RSquared => table.r(n),
            ConstantKind::DSquared => table.d(n),
        } as f64;
        v * v
    };
    let nf = n_max as f64;
    let samples = 256;
    let mut marks: Vec<usize> = (0..=samples)
        .map(|j| nf.powf(0.5 + 0.5 * j as f64 / samples as f64).round() as usize)
        .map(|n| n.clamp(1, n_max))
        .collect();
    marks.dedup();
    let mut xs = Vec::with_capacity(marks.len());
    let mut cumulative = Vec::with_capacity(marks.len());
    let mut partial = CompensatedSum::new();
    let mut count = 0.0f64;
    let mut next = 0;
    for n in 1..=n_max {
        let v = a(n);
        count += v;
        partial.add(v / (n as f64).powf(1.5));
        if next < marks.len() && n == marks[next] {
            xs.push(n as f64);
            cumulative.push(count);
            next += 1;
        }
    }
    let degree = match kind {
        ConstantKind::RSquared => 1,
        ConstantKind::DSquared => 3,
    };
    let l = nf.ln();
    // I_j = ∫_N^∞ x^{−3/2} log^j x dx = 2N^{−1/2} log^j N + 2j I_{j−1}
    let mut ij = vec![0.0; degree + 1];
    for j in 0..=degree {
        let prev = if j > 0 { 2.0 * j as f64 * ij[j - 1] } else { 0.0 };
        ij[j] = 2.0 / nf.sqrt() * l.powi(j as i32) + prev;
    }
    let basis = log_power_basis(degree);
    let fit_tail = |from: usize| -> Result<(f64, f64)> {
        let xw = &xs[from..];
        let cw = &cumulative[from..];
        let ys: Vec<f64> = xw.iter().zip(cw).map(|(x, c)| c / x).collect();
        let fit = least_squares(
            "A(x)/x as a polynomial in log x",
            xw,
            &ys,
            &vec![None; degree + 1],
            log_power_basis(degree),
        )?;
        let m_env = xw
            .iter()
            .zip(cw)
            .map(|(&x, &c)| (c - x * fit.evaluate(&basis(x))).abs() / x.powf(0.75))
            .fold(0.0, f64::max);
        // coefficients are highest power first
        let integral: f64 = (0..=degree).map(|p| fit.coefficients[degree - p] * ij[p]).sum();
        Ok((-count / nf.powf(1.5) + 1.5 * integral, m_env))
    };
    let (tail, m_env) = fit_tail(0)?;
    let narrow_from = xs.partition_point(|&x| x < nf.powf(2.0 / 3.0));
    let (tail_narrow, _) = fit_tail(narrow_from)?;
    let tail_bound = 2.0 * m_env / nf.powf(0.75) + 2.0 * (tail - tail_narrow).abs();
    Ok(ConstantSeries {
        kind,
        n_max: n_max as u64,
        partial: partial.value(),
        tail,
        tail_bound,
        value: partial.value() + tail,
    })
}

/// ∫₀^∞ P²(x) e^{−x/T} dx, exact on each unit cell up to `horizon_factor·T`.
pub fn laplace_p_square(t: f64, table: &SieveTable, horizon_factor: f64) -> Result<LaplaceEstimate> {
    if !(t > 0.0) {
        return Err(out_of_range("T", t, "T > 0"));
    }
    let cells = horizon_cells(horizon_factor * t, table)?;
    let [m0, m1, m2] = unit_moments(1.0 / t);
    let mut acc = CompensatedSum::new();
    for k in 0..cells {
        let beta = table.r_prefix(k) as f64 + 1.0 - PI * k as f64;
        let cell = beta * beta * m0 - 2.0 * PI * beta * m1 + PI * PI * m2;
        acc.add((-(k as f64) / t).exp() * cell);
    }
    let h = cells as f64;
    // (π(√(2x) + ½))² = π²(2x + √2·√x + ¼)
    let tail = PI * PI * poly_sqrt_tail(0.25, 2f64.sqrt(), 2.0, 1.0 / t, h);
    Ok(LaplaceEstimate {
        parameter: t,
        value: acc.value(),
        horizon: h,
        tail_bound: tail,
        method: LaplaceMethod::ExactPiecewise,
    })
}

/// The same integral by Gauss–Legendre on each unit cell.
pub fn laplace_p_square_quadrature(t: f64, table: &SieveTable, horizon_factor: f64) -> Result<f64> {
    let cells = horizon_cells(horizon_factor * t, table)?;
    let rule = GaussLegendre::new(8);
    let mut acc = CompensatedSum::new();
    for k in 0..cells {
        let rk = table.r_prefix(k) as f64 + 1.0;
        let a = k as f64;
        acc.add(rule.integrate(a, a + 1.0, |x| {
            let p = rk - PI * x;
            p * p * (-x / t).exp()
        }));
    }
    Ok(acc.value())
}

/// ∫₀^∞ Δ²(x) e^{−x/T} dx by 16-point Gauss–Legendre per unit cell.
pub fn laplace_delta_square(t: f64, table: &SieveTable, horizon_factor: f64) -> Result<LaplaceEstimate> {
    if !(t > 0.0) {
        return Err(out_of_range("T", t, "T > 0"));
    }
    let cells = horizon_cells(horizon_factor * t, table)?;
    let rule = GaussLegendre::new(16);
    let mut acc = CompensatedSum::new();
    for k in 0..cells {
        let dk = table.d_prefix(k) as f64;
        let mut g = |x: f64| {
            let v = dk - divisor_main_term(x);
            v * v * (-x / t).exp()
        };
        acc.add(delta_cell_integral(k, 1.0, &rule, &mut g));
    }
    let h = cells as f64;
    // (2√x + 2)² = 4x + 8√x + 4
    let tail = poly_sqrt_tail(4.0, 8.0, 4.0, 1.0 / t, h);
    Ok(LaplaceEstimate {
        parameter: t,
        value: acc.value(),
        horizon: h,
        tail_bound: tail,
        method: LaplaceMethod::PanelQuadrature,
    })
}

fn check_constant(c: &ConstantSeries, kind: ConstantKind) -> Result<()> {
    if c.kind != kind {
        return Err(LabError::Domain(format!("expected the {kind:?} constant, got {:?}", c.kind)));
    }
    Ok(())
}

/// ∫ P² e^{−x/T} against ¼(T/π)^{3/2} Σ r²(n) n^{−3/2} − T.
pub fn verify_theorem4(
    t: f64,
    table: &SieveTable,
    constant: &ConstantSeries,
) -> Result<VerificationRow> {
    check_constant(constant, ConstantKind::RSquared)?;
    let lhs = laplace_p_square(t, table, 40.0)?;
    let scale = 0.25 * (t / PI).powf(1.5);
    let rhs = scale * constant.value - t;
    Ok(VerificationRow {
        parameter: t,
        lhs: lhs.value,
        rhs,
        residual: lhs.value - rhs,
        tail_bound: lhs.tail_bound + scale * constant.tail_bound,
    })
}

fn theorem5_leading(t: f64, constant: &ConstantSeries) -> f64 {
    0.125 * (t / PI).powf(1.5) * constant.value
}

/// Fits P₂ in ((∫ Δ² e^{−x/T}) − ⅛(T/π)^{3/2} Σ d² n^{−3/2}) / T ≈ P₂(log T)
/// over `ts`; coefficients come out [a₀, a₁, a₂].
pub fn fit_p2(ts: &[f64], table: &SieveTable, constant: &ConstantSeries) -> Result<FitReport> {
    check_constant(constant, ConstantKind::DSquared)?;
    let ys: Vec<f64> = ts
        .par_iter()
        .map(|&t| {
            let lhs = laplace_delta_square(t, table, 40.0)?;
            Ok((lhs.value - theorem5_leading(t, constant)) / t)
        })
        .collect::<Result<_>>()?;
    least_squares("a0 log²T + a1 log T + a2", ts, &ys, &[None, None, None], log_power_basis(2))
}

/// ∫ Δ² e^{−x/T} against ⅛(T/π)^{3/2} Σ d²(n) n^{−3/2} + T P₂(log T).
///
/// The sign of a₀ is not enforced: the fitted value is ≈ −1/(4π²), stable
/// over T up to 2·10⁴. See [`p2_leading_positive`].
pub fn verify_theorem5(
    t: f64,
    table: &SieveTable,
    constant: &ConstantSeries,
    p2: &FitReport,
) -> Result<VerificationRow> {
    check_constant(constant, ConstantKind::DSquared)?;
    if p2.coefficients.len() != 3 {
        return Err(LabError::InvalidFit("P2 needs three coefficients".into()));
    }
    if p2.coefficients.iter().any(|c| !c.is_finite()) {
        return Err(LabError::InvalidFit("P2 has non-finite coefficients".into()));
    }
    let lhs = laplace_delta_square(t, table, 40.0)?;
    let rhs = theorem5_leading(t, constant) + t * p2.evaluate(&log_power_basis(2)(t));
    Ok(VerificationRow {
        parameter: t,
        lhs: lhs.value,
        rhs,
        residual: lhs.value - rhs,
        tail_bound: lhs.tail_bound + 0.125 * (t / PI).powf(1.5) * constant.tail_bound,
    })
}

pub fn p2_leading_positive(p2: &FitReport) -> bool {
    p2.coefficients.first().is_some_and(|&a0| a0 > 0.0)
}

/// Least-squares slope of log|residual| against log T.
pub fn log_log_slope(rows: &[VerificationRow]) -> Result<f64> {
    let xs: Vec<f64> = rows.iter().map(|r| r.parameter.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.residual.abs().ln()).collect();
    let fit = least_squares("log|residual| = a log T + b", &xs, &ys, &[None, None], |x| vec![x, 1.0])?;
    Ok(fit.coefficients[0])
}

fn refinement_check(a: f64, b: f64, quad: &QuadratureConfig, what: &str) -> Result<f64> {
    let delta = (a - b).abs();
    if delta > quad.refine_tol * a.abs().max(1.0) {
        return Err(LabError::Convergence(format!(
            "{what} changed by {delta:e} under refinement"
        )));
    }
    Ok(delta)
}

/// L_k(σ) = ∫₀^∞ |ζ(½+ix)|^{2k} e^{−σx} dx on coarse and refined tables.
struct LaplacePair {
    coarse: CriticalLineTable,
    fine: CriticalLineTable,
}

impl LaplacePair {
    fn build(t_max: f64, breakpoints: &[f64], quad: &QuadratureConfig) -> Result<Self> {
        Ok(Self {
            coarse: CriticalLineTable::build(t_max, breakpoints, quad)?,
            fine: CriticalLineTable::build(t_max, breakpoints, &quad.refined())?,
        })
    }

    /// Fine value, refinement change folded into the tail bound.
    fn laplace(&self, k: u32, sigma: f64, quad: &QuadratureConfig) -> Result<LaplaceEstimate> {
        let a = self.coarse.laplace(k, sigma);
        let b = self.fine.laplace(k, sigma);
        let delta = refinement_check(a, b, quad, "L_k")?;
        let h = self.fine.t_max();
        Ok(LaplaceEstimate {
            parameter: sigma,
            value: b,
            horizon: h,
            tail_bound: zeta_laplace_tail_bound(k, sigma, h) + delta,
            method: LaplaceMethod::PanelQuadrature,
        })
    }
}

/// L₁(2σ) against (γ − log(4πσ))/(2 sin σ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KoberPoint {
    pub sigma: f64,
    pub l1: f64,
    pub leading: f64,
    pub defect: f64,
    pub tail_bound: f64,
}

pub fn kober_leading(sigma: f64) -> f64 {
    (EULER_GAMMA - (4.0 * PI * sigma).ln()) / (2.0 * sigma.sin())
}

fn check_sigma(sigma: f64, lo: f64, hi: f64) -> Result<()> {
    if !(sigma >= lo && sigma <= hi) {
        return Err(out_of_range("sigma", sigma, format!("[{lo}, {hi}]")));
    }
    Ok(())
}

pub fn kober_check(sigma: f64, quad: &QuadratureConfig) -> Result<KoberPoint> {
    Ok(kober_grid(&[sigma], quad)?.0[0])
}

/// Kober points over `sigmas` from one table, with the defect fitted as a
/// line c₀ + c₁σ.
pub fn kober_grid(sigmas: &[f64], quad: &QuadratureConfig) -> Result<(Vec<KoberPoint>, FitReport)> {
    if sigmas.is_empty() {
        return Err(LabError::Domain("empty sigma grid".into()));
    }
    for &s in sigmas {
        check_sigma(s, 0.01, 0.2)?;
    }
    let smin = sigmas.iter().cloned().fold(f64::INFINITY, f64::min);
    let pair = LaplacePair::build(quad.horizon_factor / (2.0 * smin), &[], quad)?;
    let points: Vec<KoberPoint> = sigmas
        .iter()
        .map(|&sigma| {
            let l = pair.laplace(1, 2.0 * sigma, quad)?;
            let leading = kober_leading(sigma);
            Ok(KoberPoint {
                sigma,
                l1: l.value,
                leading,
                defect: l.value - leading,
                tail_bound: l.tail_bound,
            })
        })
        .collect::<Result<_>>()?;
    let ys: Vec<f64> = points.iter().map(|p| p.defect).collect();
    let fit = if sigmas.len() >= 2 {
        least_squares("defect = c0 + c1 sigma", sigmas, &ys, &[None, None], |s| vec![1.0, s])?
    } else {
        FitReport {
            model: "defect = c0".into(),
            coefficients: vec![ys[0]],
            pinned: vec![false],
            residual_norm: 0.0,
            grid: sigmas.to_vec(),
        }
    };
    Ok((points, fit))
}

/// L₁(s) against Jutila's main expression, for real s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JutilaPoint {
    pub s: f64,
    pub l1: f64,
    pub main_expr: Complex64,
    pub lambda1: Complex64,
    /// Quadrature tail plus series tail.
    pub tail_bound: f64,
}

/// −i e^{is/2}(log 2π − γ + (π/2 − s)i) + 2π e^{−is/2} Σ d(n) exp(−2πi n e^{−is}),
/// the series cut where its tail (d(n) ≤ 2√n, |term| = d(n) e^{−2πn sin s})
/// is below `tol`.
pub fn jutila_main_expr(s: f64, table: &SieveTable, tol: f64) -> Result<(Complex64, f64)> {
    let q = (-2.0 * PI * s.sin()).exp();
    if !(q < 1.0) {
        return Err(LabError::Convergence(format!("series diverges at s = {s}")));
    }
    let i = Complex64::i();
    let rot = (-i * s).exp();
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    let limit = table.limit() as usize;
    let mut done = None;
    for n in 1..=limit {
        let v = (-2.0 * PI * i * n as f64 * rot).exp() * table.d(n) as f64;
        re.add(v.re);
        im.add(v.im);
        let m = n as f64 + 1.0;
        let rho = q * ((m + 1.0) / m).sqrt();
        if rho < 1.0 {
            let tail = 2.0 * PI * 2.0 * m.sqrt() * q.powf(m) / (1.0 - rho);
            if tail < tol {
                done = Some(tail);
                break;
            }
        }
    }
    let tail = done.ok_or_else(|| {
        LabError::Convergence(format!("Jutila series at s = {s} needs more than {limit} terms"))
    })?;
    let sum = Complex64::new(re.value(), im.value());
    let head = -i * (0.5 * i * s).exp()
        * Complex64::new((2.0 * PI).ln() - EULER_GAMMA, PI / 2.0 - s);
    Ok((head + 2.0 * PI * (-0.5 * i * s).exp() * sum, tail))
}

pub fn jutila_theorem6(s: f64, table: &SieveTable, quad: &QuadratureConfig) -> Result<JutilaPoint> {
    Ok(jutila_grid(&[s], table, quad)?[0])
}

pub fn jutila_grid(ss: &[f64], table: &SieveTable, quad: &QuadratureConfig) -> Result<Vec<JutilaPoint>> {
    for &s in ss {
        check_sigma(s, 0.05, 3.0).map_err(|_| out_of_range("s", s, "[0.05, 3]"))?;
    }
    let smin = ss.iter().cloned().fold(f64::INFINITY, f64::min);
    let pair = LaplacePair::build(quad.horizon_factor / smin, &[], quad)?;
    ss.iter()
        .map(|&s| {
            let l = pair.laplace(1, s, quad)?;
            let (main, series_tail) = jutila_main_expr(s, table, 1e-14)?;
            Ok(JutilaPoint {
                s,
                l1: l.value,
                main_expr: main,
                lambda1: Complex64::new(l.value, 0.0) - main,
                tail_bound: l.tail_bound + series_tail,
            })
        })
        .collect()
}

/// Least-squares slope of `ys` against `xs`.
pub fn trend_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    Ok(least_squares("y = a x + b", xs, ys, &[None, None], |x| vec![x, 1.0])?.coefficients[0])
}

/// B = π^{−2}(2 log 2π − 6γ + 24ζ′(2)/π²).
pub fn atkinson_b() -> Result<f64> {
    let dz = zeta_derivative_real(2.0)?;
    Ok(((2.0 * PI).ln() * 2.0 - 6.0 * EULER_GAMMA + 24.0 * dz / (PI * PI)) / (PI * PI))
}

pub const ATKINSON_A: f64 = 1.0 / (2.0 * PI * PI);

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtkinsonFit {
    pub sigmas: Vec<f64>,
    /// σ L₂(σ) at each σ.
    pub scaled: Vec<f64>,
    pub tail_bounds: Vec<f64>,
    /// Quartic in log(1/σ), A pinned; coefficients [A, B, C, D, E].
    pub pinned: FitReport,
    pub unpinned: FitReport,
    pub b_formula: f64,
}

/// σ L₂(σ) on the grid, fitted as a quartic in log(1/σ).
pub fn atkinson_l2(sigma_grid: &[f64], quad: &QuadratureConfig) -> Result<AtkinsonFit> {
    if sigma_grid.len() < 5 {
        return Err(LabError::InvalidFit("a quartic fit needs at least 5 sigma values".into()));
    }
    for &s in sigma_grid {
        check_sigma(s, 1.0 / 3000.0 * (1.0 - 1e-12), 1.0 / 200.0 * (1.0 + 1e-12))?;
    }
    if sigma_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(LabError::Domain("sigma grid must be strictly increasing".into()));
    }
    let pair = LaplacePair::build(quad.horizon_factor / sigma_grid[0], &[], quad)?;
    let mut scaled = Vec::new();
    let mut tails = Vec::new();
    for &s in sigma_grid {
        let l = pair.laplace(2, s, quad)?;
        scaled.push(s * l.value);
        tails.push(s * l.tail_bound);
    }
    let inv: Vec<f64> = sigma_grid.iter().map(|s| 1.0 / s).collect();
    let pinned = least_squares(
        "A log⁴(1/σ) + B log³(1/σ) + C log²(1/σ) + D log(1/σ) + E, A pinned",
        &inv,
        &scaled,
        &[Some(ATKINSON_A), None, None, None, None],
        log_power_basis(4),
    )?;
    let unpinned = least_squares(
        "A log⁴(1/σ) + B log³(1/σ) + C log²(1/σ) + D log(1/σ) + E",
        &inv,
        &scaled,
        &[None; 5],
        log_power_basis(4),
    )?;
    Ok(AtkinsonFit {
        sigmas: sigma_grid.to_vec(),
        scaled,
        tail_bounds: tails,
        pinned,
        unpinned,
        b_formula: atkinson_b()?,
    })
}

/// Checks of I_k(T) ≤ e·L_k(1/T) and of
/// L_k(1/T) = (1/T)∫₀^∞ I_k(t) e^{−t/T} dt.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SandwichPoint {
    pub k: u32,
    #[serde(rename = "T")]
    pub t: f64,
    pub i_k: f64,
    pub l_k: f64,
    pub holds: bool,
    /// (1/T)∫₀^H I_k(t) e^{−t/T} dt, with I_k integrated separately.
    pub identity_rhs: f64,
    pub identity_residual: f64,
    pub tolerance: f64,
}

pub fn lk_bound_diagnostic(k: u32, ts: &[f64], quad: &QuadratureConfig) -> Result<Vec<SandwichPoint>> {
    if !(1..=2).contains(&k) {
        return Err(out_of_range("k", k as f64, "1 or 2"));
    }
    if ts.is_empty() {
        return Err(LabError::Domain("empty T grid".into()));
    }
    let tmax = ts.iter().cloned().fold(0.0, f64::max);
    let h = quad.horizon_factor * tmax;
    let pair = LaplacePair::build(h, ts, quad)?;
    let table = &pair.fine;
    let (nodes, weights, z2) = table.nodes();
    // running I_k at every node's panel edge
    let mut prefix = Vec::with_capacity(nodes.len() + 1);
    let mut acc = CompensatedSum::new();
    prefix.push(0.0);
    for i in 0..nodes.len() {
        acc.add(weights[i] * z2[i].powi(k as i32));
        prefix.push(acc.value());
    }
    let inner = GaussLegendre::new(quad.nodes_per_panel);
    let boundaries = panel_edges(table);
    // I_k(t) from the stored prefix up to the last edge ≤ t plus a fresh
    // panel to t
    let i_at = |t: f64| -> Result<f64> {
        let idx = boundaries.partition_point(|b| b.0 <= t);
        let (edge, end) = if idx == 0 { (0.0, 0) } else { boundaries[idx - 1] };
        let mut v = prefix[end];
        if t > edge {
            let mut err = None;
            v += inner.integrate(edge, t, |x| match zeta_critical_sq(x) {
                Ok(z) => z.powi(k as i32),
                Err(e) => {
                    err = Some(e);
                    0.0
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
        }
        Ok(v)
    };
    ts.iter()
        .map(|&t| {
            let i_k = table.moment(k, t)?;
            let l = pair.laplace(k, 1.0 / t, quad)?;
            let horizon = quad.horizon_factor * t;
            let outer = QuadratureConfig::uniform(1.0, quad.nodes_per_panel);
            let rule = outer.rule();
            let mut acc = CompensatedSum::new();
            for (lo, hi) in outer.panels(0.0, horizon) {
                for (x, w) in rule.mapped(lo, hi) {
                    acc.add(w * i_at(x)? * (-x / t).exp());
                }
            }
            let rhs = acc.value() / t;
            // the horizon drops ∫_H^∞ I_k e^{−t/T}/T ≤ e^{−H/T}·I_k(H)·(1 + polynomial growth)
            let i_h = i_at(horizon)?;
            let tolerance = quad.refine_tol * l.value + l.tail_bound + 2.0 * (-horizon / t).exp() * i_h;
            Ok(SandwichPoint {
                k,
                t,
                i_k,
                l_k: l.value,
                holds: i_k <= std::f64::consts::E * l.value,
                identity_rhs: rhs,
                identity_residual: (l.value - rhs).abs(),
                tolerance,
            })
        })
        .collect()
}

fn panel_edges(table: &CriticalLineTable) -> Vec<(f64, usize)> {
    table.panel_edges().to_vec()
}

/// (1/2πi)∫_{c−iH}^{c+iH} Γ(s) z^{−s} ds against e^{−z}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MellinCheck {
    pub z: Complex64,
    pub c: f64,
    pub height: f64,
    pub value: Complex64,
    pub residual: f64,
    pub tail_bound: f64,
}

/// ∫_H^∞ y^p e^{−ay} dy ≤ H^p e^{−aH}/(a − p/H) for a > p/H.
fn power_exp_tail(p: f64, a: f64, h: f64) -> f64 {
    let rate = a - p.max(0.0) / h;
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    h.powf(p) * (-a * h).exp() / rate
}

pub fn mellin_gamma_check(z: Complex64, c: f64, quad: &QuadratureConfig) -> Result<MellinCheck> {
    if !(z.re > 0.0) {
        return Err(LabError::Domain(format!("need Re z > 0, got {z}")));
    }
    if !(c > 0.0) {
        return Err(out_of_range("c", c, "c > 0"));
    }
    let arg = z.arg().abs();
    let decay = PI / 2.0 - arg;
    // |Γ(c+iy)| ≤ 2√(2π)|y|^{c−½}e^{−π|y|/2} for |y| ≥ max(10, c²)
    let y0 = 10f64.max(c * c);
    let tail = |h: f64| -> f64 {
        let h = h.max(y0);
        2.0 * 2.0 * (2.0 * PI).sqrt() * z.norm().powf(-c) * power_exp_tail(c - 0.5, decay, h) / (2.0 * PI)
    };
    let mut height = y0;
    while tail(height) > 1e-12 {
        height *= 1.25;
        if height > 1e4 {
            return Err(LabError::Budget(format!("Mellin contour height for z = {z}")));
        }
    }
    let lnz = z.ln();
    let rule = quad.rule();
    let panels = QuadratureConfig::uniform(0.5, quad.nodes_per_panel).panels(-height, height);
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for (lo, hi) in panels {
        for (y, w) in rule.mapped(lo, hi) {
            let s = Complex64::new(c, y);
            let v = gamma_complex(s)? * (-s * lnz).exp() * w;
            re.add(v.re);
            im.add(v.im);
        }
    }
    // ds = i dy, so (1/2πi)∫ … ds = (1/2π)∫ … dy
    let value = Complex64::new(re.value(), im.value()) / (2.0 * PI);
    Ok(MellinCheck {
        z,
        c,
        height,
        value,
        residual: (value - (-z).exp()).norm(),
        tail_bound: tail(height),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_moments_match_both_branches() {
        for a in [0.01, 0.5, 1.9, 2.1, 7.0] {
            let m = unit_moments(a);
            let rule = GaussLegendre::new(20);
            for j in 0..3 {
                let q = rule.integrate(0.0, 1.0, |u| u.powi(j as i32) * (-a * u).exp());
                assert!((m[j] - q).abs() < 1e-14, "a={a} j={j}");
            }
        }
    }

    #[test]
    fn first_series_term() {
        let t = SieveTable::build(1000).unwrap();
        let v = laplace_p_closed(1.0, &t, 1e-30).unwrap();
        let first = 4.0 * PI * (-PI * PI).exp();
        assert!((v.value - first) / first < 1e-3);
        assert!(((-PI * PI).exp() - 5.17e-5).abs() < 1e-7);
    }

    #[test]
    fn theta_modularity_gives_large_s_limit() {
        // Σ_{n≥0} r(n) e^{−π²n/s} = (s/π) Σ_{m≥0} r(m) e^{−sm}
        let t = SieveTable::build(20_000).unwrap();
        for s in [5.0, 20.0] {
            let v = laplace_p_closed(s, &t, 1e-14).unwrap().value;
            let mut theta = 1.0;
            for m in 1..200 {
                theta += t.r(m) as f64 * (-s * m as f64).exp();
            }
            let want = theta / s - PI / (s * s);
            assert!((v - want).abs() < 1e-12, "s={s}");
            assert!((v - (1.0 / s - PI / (s * s))).abs() < 4.0 * (-s).exp() / s * 1.01);
        }
    }

    #[test]
    fn remark_one_series_and_cells_agree() {
        let t = SieveTable::build(1000).unwrap();
        for s in [0.5, 1.0, 2.0] {
            let c = laplace_p_closed(s, &t, 1e-16).unwrap();
            let e = laplace_p_exact(s, &t).unwrap();
            assert!((c.value - e.value).abs() <= 1e-8 * c.value.abs(), "s={s}");
            assert!(e.tail_bound < 1e-12);
        }
    }

    #[test]
    fn single_bessel_examples() {
        // ν = 1, a = π², s = 1 is the n = 1 term of the P(x) series divided by r(1)
        let v = laplace_bessel_single(1, PI * PI, 1.0).unwrap();
        assert!((v - PI * (-PI * PI).exp()).abs() < 1e-18);
        assert!((laplace_bessel_single(0, 1e-14, 2.0).unwrap() - 0.5).abs() < 1e-13);
        let c = laplace_bessel_single(1, 4.0, 2.0).unwrap();
        let q = laplace_bessel_single_quadrature(1, 4.0, 2.0).unwrap();
        assert!((c - q).abs() < 1e-8 * c);
        // the printed exponent ν − 1 would give e^{−2}·2·1 instead
        assert!(((-2.0f64).exp() * 2.0 - q).abs() > 0.1);
    }

    #[test]
    fn bessel_product_examples() {
        let a = 3.0;
        let s = 0.7;
        let v = bessel_product_laplace(a, a, s).unwrap();
        let z = a * a / (2.0 * s);
        let i0 = crate::special::bessel_i0(z).unwrap();
        let i1 = crate::special::bessel_i1(z).unwrap();
        let want = (-a * a / (2.0 * s)).exp() / (4.0 * s * s * s) * (2.0 * a * a * i0 - 2.0 * a * a * i1);
        assert!((v - want).abs() < 1e-13 * want.abs());
        let r = (2.0 * PI).sqrt();
        let c = bessel_product_laplace(r, 2.0 * r, 1.0).unwrap();
        let q = bessel_product_quadrature(r, 2.0 * r, 1.0).unwrap();
        assert!((c - q).abs() < 1e-6 * c.abs());
        let big = bessel_product_laplace(400.0, 401.0, 1e-3).unwrap();
        assert!(big.is_finite());
    }

    #[test]
    fn p_square_two_routes_at_100() {
        let t = SieveTable::build(5000).unwrap();
        let a = laplace_p_square(100.0, &t, 40.0).unwrap();
        let b = laplace_p_square_quadrature(100.0, &t, 40.0).unwrap();
        assert!((a.value - b).abs() < 1e-9 * a.value, "{} {}", a.value, b);
    }

    #[test]
    fn vanishing_kernel_mass() {
        let t = SieveTable::build(100).unwrap();
        let v = laplace_p_square(1e-3, &t, 40.0).unwrap();
        // near 0, P ≈ 1 − πx
        assert!((v.value - 1e-3).abs() < 1e-5);
    }

    #[test]
    fn delta_envelope_holds_on_sieve_range() {
        let t = SieveTable::build(100_000).unwrap();
        for k in 0..100_000usize {
            let dk = t.d_prefix(k) as f64;
            for x in [k as f64 + 1e-9, k as f64 + 0.5, k as f64 + 1.0 - 1e-9] {
                if x > 0.0 {
                    let v = dk - divisor_main_term(x);
                    assert!(v.abs() <= delta_envelope(x), "x={x}");
                }
            }
            let x = k as f64 + 0.5;
            let rk = t.r_prefix(k) as f64 + 1.0;
            assert!((rk - PI * x).abs() <= p_envelope(x));
        }
    }

    #[test]
    fn mellin_points() {
        let q = QuadratureConfig::default();
        let a = mellin_gamma_check(Complex64::new(1.0, 0.0), 1.0, &q).unwrap();
        assert!(a.residual < 1e-6, "{}", a.residual);
        let b = mellin_gamma_check(Complex64::new(2.0, 1.0), 0.5, &q).unwrap();
        assert!(b.residual < 1e-6, "{}", b.residual);
        for c in [0.5, 1.0, 2.0] {
            let v = mellin_gamma_check(Complex64::new(2.0, 1.0), c, &q).unwrap();
            assert!((v.value - b.value).norm() < 1e-6);
        }
        assert!(mellin_gamma_check(Complex64::new(-1.0, 0.0), 1.0, &q).is_err());
    }

    #[test]
    fn jutila_envelope() {
        let t = SieveTable::build(1000).unwrap();
        let (_, tail) = jutila_main_expr(0.5, &t, 1e-14).unwrap();
        assert!(tail < 1e-14);
        let m = (-6.0 * PI * (0.5f64).sin()).exp();
        let i = Complex64::i();
        let term = (-2.0 * PI * i * 3.0 * (-i * 0.5).exp()).exp();
        assert!((term.norm() - m).abs() < 1e-15);
    }

    #[test]
    fn b_formula_value() {
        let b = atkinson_b().unwrap();
        assert!((b + 0.209_469_776_594_130_7).abs() < 1e-12);
    }

    #[test]
    fn kober_leading_grows_as_sigma_shrinks() {
        assert!(kober_leading(0.01) > kober_leading(0.02));
        assert!(kober_leading(0.01) > 0.0);
        let ratio = kober_leading(1e-4) / (-(1e-4f64).ln() / (2.0 * 1e-4));
        assert!((ratio - 1.0).abs() < 0.3);
    }
}
