//! Riemann zeta: Euler–Maclaurin continuation, the Riemann–Siegel formula on
//! the critical line, and moment integrals of |ζ(½+it)|.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::OnceLock;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::arith::SieveTable;
use crate::error::{out_of_range, LabError, Result};
use crate::fit::{least_squares, log_power_basis, FitReport};
use crate::quad::{CompensatedSum, GaussLegendre, QuadratureConfig};
use crate::special::EULER_GAMMA;

/// Height above which |ζ(½+it)| is taken from Riemann–Siegel.
pub const RS_SWITCH: f64 = 50.0;

const BERNOULLI_TERMS: usize = 80;

/// B_{2k}/(2k)! for k = 1..=BERNOULLI_TERMS (index k−1).
fn bernoulli_over_factorial() -> &'static [f64] {
    static CELL: OnceLock<Vec<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        (1..=BERNOULLI_TERMS)
            .map(|k| {
                let two_k = 2 * k as i32;
                let z = match k {
                    1 => PI * PI / 6.0,
                    2 => PI.powi(4) / 90.0,
                    _ => even_zeta(two_k),
                };
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                // B_2k/(2k)! = (−1)^{k+1} 2 ζ(2k) / (2π)^{2k}
                sign * 2.0 * z * (2.0 * PI).powi(-two_k)
            })
            .collect()
    })
}

fn even_zeta(p: i32) -> f64 {
    let n = 64usize;
    let mut s = 0.0;
    for k in (2..n).rev() {
        s += (k as f64).powi(-p);
    }
    let nf = n as f64;
    1.0 + s + nf.powi(1 - p) / (p - 1) as f64 + 0.5 * nf.powi(-p)
}

/// Settings for the Euler–Maclaurin evaluator.
#[derive(Debug, Clone, Copy)]
pub struct EmConfig {
    pub target: f64,
    /// Largest admissible length of the direct sum.
    pub max_terms: usize,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            target: 1e-10,
            max_terms: 2_000_000,
        }
    }
}

/// ζ(s) with absolute error ≤ `target` by Euler–Maclaurin.
pub fn zeta_em(s: Complex64, target: f64) -> Result<Complex64> {
    zeta_em_with(
        s,
        EmConfig {
            target,
            ..EmConfig::default()
        },
    )
}

pub fn zeta_em_with(s: Complex64, cfg: EmConfig) -> Result<Complex64> {
    if s == Complex64::new(1.0, 0.0) {
        return Err(LabError::Pole("zeta at s = 1".into()));
    }
    if s.im.abs() > 1e5 {
        return Err(out_of_range("Im s", s.im, "|Im s| <= 1e5"));
    }
    let mut n = ((s.norm() / PI).ceil() as usize + 8).max(10);
    loop {
        if n > cfg.max_terms {
            return Err(LabError::Budget(format!(
                "Euler-Maclaurin needs more than {} terms at s = {s}",
                cfg.max_terms
            )));
        }
        if let Some(v) = em_attempt(s, n, cfg.target) {
            return Ok(v);
        }
        n *= 2;
    }
}

fn em_attempt(s: Complex64, n: usize, target: f64) -> Option<Complex64> {
    let b = bernoulli_over_factorial();
    let nf = n as f64;
    let ln_n = nf.ln();
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for k in 1..n {
        let v = (-s * (k as f64).ln()).exp();
        re.add(v.re);
        im.add(v.im);
    }
    let n_pow = (-s * ln_n).exp(); // N^{−s}
    let mut total = Complex64::new(re.value(), im.value()) + n_pow * nf / (s - 1.0) + 0.5 * n_pow;
    // T_k = B_2k/(2k)! · s(s+1)…(s+2k−2) · N^{−s−2k+1}
    let mut poch = s; // s(s+1)…(s+2k−2)
    let mut pow = n_pow / nf; // N^{−s−2k+1}
    let inv_n2 = 1.0 / (nf * nf);
    for (k, bk) in b.iter().enumerate() {
        let term = poch * pow * *bk;
        total += term;
        let kk = (k + 1) as f64;
        // remainder bounded by the next term times |s+2k+1|/(σ+2k+1)
        let next = (poch * (s + 2.0 * kk - 1.0) * (s + 2.0 * kk)).norm()
            * pow.norm()
            * inv_n2
            * b.get(k + 1).map_or(f64::INFINITY, |v| v.abs());
        let factor = (s + 2.0 * kk + 1.0).norm() / (s.re + 2.0 * kk + 1.0);
        if next * factor < 0.1 * target {
            return Some(total);
        }
        if k > 4 && term.norm() < next {
            // asymptotic terms are growing: a longer direct sum is needed
            return None;
        }
        poch *= (s + 2.0 * kk - 1.0) * (s + 2.0 * kk);
        pow *= inv_n2;
    }
    None
}

/// ζ′(s) for real s > 1 by the differentiated Euler–Maclaurin formula.
pub fn zeta_derivative_real(s: f64) -> Result<f64> {
    if s <= 1.0 {
        return Err(LabError::Domain(format!("zeta' series needs s > 1, got {s}")));
    }
    let b = bernoulli_over_factorial();
    let n = 40usize;
    let nf = n as f64;
    let ln_n = nf.ln();
    let mut acc = CompensatedSum::new();
    for k in 2..n {
        let l = (k as f64).ln();
        acc.add(-l * (-s * l).exp());
    }
    let n1s = nf.powf(1.0 - s);
    acc.add(-ln_n * n1s / (s - 1.0) - n1s / ((s - 1.0) * (s - 1.0)));
    acc.add(-0.5 * ln_n * nf.powf(-s));
    let mut poch = s;
    let mut dpoch = 1.0 / s; // Σ 1/(s+j) over the Pochhammer factors
    let mut pow = nf.powf(-s - 1.0);
    for (k, bk) in b.iter().enumerate().take(20) {
        acc.add(bk * pow * (poch * dpoch - ln_n * poch));
        let kk = (k + 1) as f64;
        let f1 = s + 2.0 * kk - 1.0;
        let f2 = s + 2.0 * kk;
        dpoch += 1.0 / f1 + 1.0 / f2;
        poch *= f1 * f2;
        pow /= nf * nf;
    }
    Ok(acc.value())
}

/// Riemann–Siegel θ(t), asymptotic series (valid for t ≳ 10).
pub fn rs_theta(t: f64) -> f64 {
    0.5 * t * (t / (2.0 * PI)).ln() - 0.5 * t - PI / 8.0
        + 1.0 / (48.0 * t)
        + 7.0 / (5760.0 * t.powi(3))
        + 31.0 / (80640.0 * t.powi(5))
}

/// Taylor coefficients of Ψ(½+u) = cos(2π(p²−p−1/16))/cos(2πp), p = ½+u,
/// obtained once by a discrete Cauchy integral on |u| = 1.
fn psi_taylor() -> &'static [f64] {
    static CELL: OnceLock<Vec<f64>> = OnceLock::new();
    CELL.get_or_init(|| {
        let m = 256usize;
        let degree = 80usize;
        let vals: Vec<Complex64> = (0..m)
            .map(|j| {
                let u = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64);
                let p = u + 0.5;
                (2.0 * PI * (p * p - p - 1.0 / 16.0)).cos() / (2.0 * PI * p).cos()
            })
            .collect();
        (0..=degree)
            .map(|k| {
                let mut acc = Complex64::new(0.0, 0.0);
                for (j, v) in vals.iter().enumerate() {
                    let ang = -2.0 * PI * (k * j % m) as f64 / m as f64;
                    acc += v * Complex64::from_polar(1.0, ang);
                }
                acc.re / m as f64
            })
            .collect()
    })
}

/// j-th derivative of Ψ at p.
fn psi_derivative(p: f64, j: usize) -> f64 {
    let c = psi_taylor();
    let u = p - 0.5;
    // Σ_{k≥j} c_k k!/(k−j)! u^{k−j}
    let mut acc = 0.0;
    for k in (j..c.len()).rev() {
        let falling: f64 = (0..j).map(|i| (k - i) as f64).product();
        acc = acc * u + c[k] * falling;
    }
    acc
}

/// Riemann–Siegel remainder coefficients C₀…C₄ at fractional part p.
fn rs_corrections(p: f64) -> [f64; 5] {
    let d = |j| psi_derivative(p, j);
    let pi2 = PI * PI;
    let pi4 = pi2 * pi2;
    let pi6 = pi4 * pi2;
    let pi8 = pi4 * pi4;
    [
        d(0),
        -d(3) / (96.0 * pi2),
        d(2) / (64.0 * pi2) + d(6) / (18432.0 * pi4),
        -d(1) / (64.0 * pi2) - d(5) / (3840.0 * pi4) - d(9) / (5_308_416.0 * pi6),
        d(0) / (128.0 * pi2)
            + 19.0 * d(4) / (24576.0 * pi4)
            + 11.0 * d(8) / (5_898_240.0 * pi6)
            + d(12) / (2_038_431_744.0 * pi8),
    ]
}

/// Hardy's Z(t) = e^{iθ(t)} ζ(½+it) by Riemann–Siegel, t ≥ 50.
pub fn hardy_z(t: f64) -> Result<f64> {
    if !(t >= RS_SWITCH) {
        return Err(out_of_range("t", t, format!("t >= {RS_SWITCH}")));
    }
    let tau = t / (2.0 * PI);
    let root = tau.sqrt();
    let m = root.floor() as usize;
    let p = root - m as f64;
    let theta = rs_theta(t);
    let mut main = 0.0;
    for n in 1..=m {
        let nf = n as f64;
        main += (theta - t * nf.ln()).cos() / nf.sqrt();
    }
    let c = rs_corrections(p);
    let inv_root = 1.0 / root;
    let mut corr = 0.0;
    let mut pow = 1.0;
    for cj in c {
        corr += cj * pow;
        pow *= inv_root;
    }
    let sign = if m % 2 == 1 { 1.0 } else { -1.0 }; // (−1)^{m−1}
    Ok(2.0 * main + sign * tau.powf(-0.25) * corr)
}

/// |ζ(½+it)| by Riemann–Siegel (t ≥ 50).
pub fn zeta_rs_mod(t: f64) -> Result<f64> {
    Ok(hardy_z(t)?.abs())
}

/// How a critical-line value was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaMethod {
    EulerMaclaurin,
    RiemannSiegel,
}

impl ZetaMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::EulerMaclaurin => "euler_maclaurin",
            Self::RiemannSiegel => "riemann_siegel",
        }
    }
}

/// ζ(½+it) for t ≥ 0, switching to Riemann–Siegel at [`RS_SWITCH`].
pub fn zeta_critical(t: f64) -> Result<(Complex64, ZetaMethod)> {
    let t_abs = t.abs();
    if t_abs < RS_SWITCH {
        let v = zeta_em(Complex64::new(0.5, t_abs), 1e-10)?;
        let v = if t < 0.0 { v.conj() } else { v };
        Ok((v, ZetaMethod::EulerMaclaurin))
    } else {
        let z = hardy_z(t_abs)?;
        let v = Complex64::from_polar(z, -rs_theta(t_abs));
        let v = if t < 0.0 { v.conj() } else { v };
        Ok((v, ZetaMethod::RiemannSiegel))
    }
}

/// |ζ(½+it)|².
pub fn zeta_critical_sq(t: f64) -> Result<f64> {
    if t.abs() < RS_SWITCH {
        Ok(zeta_em(Complex64::new(0.5, t), 1e-10)?.norm_sqr())
    } else {
        let z = hardy_z(t.abs())?;
        Ok(z * z)
    }
}

/// Samples of ζ(½+it) on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ZetaGrid {
    pub t_values: Vec<f64>,
    pub z_values: Vec<Complex64>,
    pub methods: Vec<ZetaMethod>,
}

impl ZetaGrid {
    pub fn sample(t_values: &[f64]) -> Result<Self> {
        if t_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(LabError::Domain("t values must be strictly increasing".into()));
        }
        let pairs: Vec<(Complex64, ZetaMethod)> = t_values
            .par_iter()
            .map(|&t| zeta_critical(t))
            .collect::<Result<_>>()?;
        let (z_values, methods) = pairs.into_iter().unzip();
        Ok(Self {
            t_values: t_values.to_vec(),
            z_values,
            methods,
        })
    }

    /// CSV with columns `t,re,im,abs,method`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        use crate::report::fmt_num;
        writeln!(w, "t,re,im,abs,method")?;
        for ((t, z), m) in self.t_values.iter().zip(&self.z_values).zip(&self.methods) {
            writeln!(
                w,
                "{},{},{},{},{}",
                fmt_num(*t),
                fmt_num(z.re),
                fmt_num(z.im),
                fmt_num(z.norm()),
                m.as_str()
            )?;
        }
        Ok(())
    }
}

/// |ζ(s)² − Σ_{n≤N} d(n) n^{−s}| for Re s > 1.
pub fn dirichlet_square_check(s: Complex64, n: usize, table: &SieveTable) -> Result<f64> {
    if s.re <= 1.0 {
        return Err(LabError::Domain(format!("Dirichlet series needs Re s > 1, got {s}")));
    }
    if n as u64 > table.limit() {
        return Err(out_of_range("N", n as f64, format!("N <= {}", table.limit())));
    }
    let z = zeta_em(s, 1e-14)?;
    let mut re = CompensatedSum::new();
    let mut im = CompensatedSum::new();
    for k in 1..=n {
        let v = (-s * (k as f64).ln()).exp() * table.d(k) as f64;
        re.add(v.re);
        im.add(v.im);
    }
    Ok((z * z - Complex64::new(re.value(), im.value())).norm())
}

/// Gauss–Legendre nodes on [0, t_max] carrying |ζ(½+it)|², reusable for every
/// moment and Laplace integral up to `t_max`.
#[derive(Debug, Clone)]
pub struct CriticalLineTable {
    t: Vec<f64>,
    w: Vec<f64>,
    z2: Vec<f64>,
    /// (right edge, index one past the panel's last node), ascending.
    boundaries: Vec<(f64, usize)>,
    quad: QuadratureConfig,
}

impl CriticalLineTable {
    /// Panels are laid between consecutive `breakpoints` (plus 0 and t_max),
    /// so moments up to any breakpoint are exact panel sums.
    pub fn build(t_max: f64, breakpoints: &[f64], quad: &QuadratureConfig) -> Result<Self> {
        if !(t_max > 0.0) {
            return Err(out_of_range("t_max", t_max, "t_max > 0"));
        }
        let mut cuts: Vec<f64> = breakpoints
            .iter()
            .copied()
            .filter(|&b| b > 0.0 && b < t_max)
            .collect();
        cuts.push(0.0);
        cuts.push(t_max);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let rule = quad.rule();
        let mut panels = Vec::new();
        for w in cuts.windows(2) {
            panels.extend(quad.panels(w[0], w[1]));
        }
        let mut t = Vec::with_capacity(panels.len() * rule.len());
        let mut w = Vec::with_capacity(t.capacity());
        let mut boundaries = Vec::with_capacity(panels.len());
        for &(lo, hi) in &panels {
            for (x, wt) in rule.mapped(lo, hi) {
                t.push(x);
                w.push(wt);
            }
            boundaries.push((hi, t.len()));
        }
        let z2: Vec<f64> = t
            .par_iter()
            .map(|&x| zeta_critical_sq(x))
            .collect::<Result<_>>()?;
        Ok(Self {
            t,
            w,
            z2,
            boundaries,
            quad: *quad,
        })
    }

    pub fn t_max(&self) -> f64 {
        self.boundaries.last().map_or(0.0, |b| b.0)
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    /// ∫₀^T |ζ(½+it)|^{2k} dt. Fresh panels cover any part of [0, T] that
    /// does not end on a stored boundary.
    pub fn moment(&self, k: u32, big_t: f64) -> Result<f64> {
        if big_t > self.t_max() * (1.0 + 1e-12) || big_t < 0.0 {
            return Err(out_of_range("T", big_t, format!("[0, {}]", self.t_max())));
        }
        let idx = self.boundaries.partition_point(|b| b.0 <= big_t * (1.0 + 1e-14));
        let (edge, end) = if idx == 0 { (0.0, 0) } else { self.boundaries[idx - 1] };
        let mut acc = CompensatedSum::new();
        for i in 0..end {
            acc.add(self.w[i] * self.z2[i].powi(k as i32));
        }
        if big_t - edge > 1e-12 * big_t.max(1.0) {
            let rule = GaussLegendre::new(self.quad.nodes_per_panel);
            for (lo, hi) in self.quad.panels(edge, big_t) {
                let mut err = None;
                let v = rule.integrate(lo, hi, |x| match zeta_critical_sq(x) {
                    Ok(v) => v.powi(k as i32),
                    Err(e) => {
                        err = Some(e);
                        0.0
                    }
                });
                if let Some(e) = err {
                    return Err(e);
                }
                acc.add(v);
            }
        }
        Ok(acc.value())
    }

    /// Σ_nodes w |ζ|^{2k} e^{−σt}: the Laplace transform truncated at t_max.
    pub fn laplace(&self, k: u32, sigma: f64) -> f64 {
        let mut acc = CompensatedSum::new();
        for i in 0..self.t.len() {
            acc.add(self.w[i] * self.z2[i].powi(k as i32) * (-sigma * self.t[i]).exp());
        }
        acc.value()
    }

    /// Σ_nodes w |ζ|^{2k} g(t) for an arbitrary weight.
    pub fn weighted<F: Fn(f64) -> f64>(&self, k: u32, g: F) -> f64 {
        let mut acc = CompensatedSum::new();
        for i in 0..self.t.len() {
            acc.add(self.w[i] * self.z2[i].powi(k as i32) * g(self.t[i]));
        }
        acc.value()
    }

    /// (right edge, node count through that panel) for every panel.
    pub fn panel_edges(&self) -> &[(f64, usize)] {
        &self.boundaries
    }

    /// Nodes, weights and |ζ|² values.
    pub fn nodes(&self) -> (&[f64], &[f64], &[f64]) {
        (&self.t, &self.w, &self.z2)
    }
}

/// Bound on ∫_H^∞ |ζ(½+it)|^{2k} e^{−σt} dt from the explicit envelope
/// |ζ(½+it)| ≤ t^{1/6} log t (t ≥ 3).
pub fn zeta_laplace_tail_bound(k: u32, sigma: f64, horizon: f64) -> f64 {
    let h = horizon.max(3.0);
    let a = k as f64 / 3.0;
    let b = 2.0 * k as f64;
    let rate = sigma - a / h - b / (h * h.ln());
    let g = h.powf(a) * h.ln().powf(b) * (-sigma * h).exp();
    if rate > 0.0 {
        g / rate
    } else {
        f64::INFINITY
    }
}

/// I_k(T) split into a main term and its error term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    #[serde(rename = "T")]
    pub t: f64,
    pub k: u32,
    pub i_value: f64,
    pub main_term: f64,
    /// E(T) for k = 1, E₂(T) for k = 2.
    pub error_term: f64,
    /// |I(quad) − I(refined quad)|.
    pub refinement_delta: f64,
}

impl MomentReport {
    fn new(t: f64, k: u32, i_value: f64, main_term: f64, refinement_delta: f64) -> Self {
        Self {
            t,
            k,
            i_value,
            main_term,
            error_term: i_value - main_term,
            refinement_delta,
        }
    }
}

/// T(log(T/2π) + 2γ − 1).
pub fn mean_square_main_term(t: f64) -> f64 {
    t * ((t / (2.0 * PI)).ln() + 2.0 * EULER_GAMMA - 1.0)
}

/// Coefficients a₀…a₄ of the fourth-moment main term (a₀ first).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FourthMomentCoefficients(pub [f64; 5]);

impl FourthMomentCoefficients {
    pub const A0: f64 = 1.0 / (2.0 * PI * PI);

    pub fn main_term(&self, t: f64) -> f64 {
        let l = t.ln();
        let a = &self.0;
        t * ((((a[0] * l + a[1]) * l + a[2]) * l + a[3]) * l + a[4])
    }
}

fn check_refinement(a: f64, b: f64, quad: &QuadratureConfig) -> Result<f64> {
    let delta = (a - b).abs();
    if delta > quad.refine_tol * a.abs().max(1.0) {
        return Err(LabError::Convergence(format!(
            "moment quadrature changed by {delta:e} under refinement"
        )));
    }
    Ok(delta)
}

/// I_k(T) at every T of `ts` from one table, checked against a refined table.
pub fn moments_on_grid(k: u32, ts: &[f64], quad: &QuadratureConfig) -> Result<Vec<(f64, f64)>> {
    if ts.iter().any(|&t| t < 10.0) {
        return Err(out_of_range("T", ts.iter().cloned().fold(f64::INFINITY, f64::min), "T >= 10"));
    }
    let t_max = ts.iter().cloned().fold(0.0, f64::max);
    let coarse = CriticalLineTable::build(t_max, ts, quad)?;
    let fine = CriticalLineTable::build(t_max, ts, &quad.refined())?;
    ts.iter()
        .map(|&t| {
            let a = coarse.moment(k, t)?;
            let b = fine.moment(k, t)?;
            Ok((b, check_refinement(a, b, quad)?))
        })
        .collect()
}

/// I₁(T) = ∫₀^T |ζ(½+it)|² dt with E(T) against T(log(T/2π) + 2γ − 1).
pub fn moment_i1(t: f64, quad: &QuadratureConfig) -> Result<MomentReport> {
    let (v, delta) = moments_on_grid(1, &[t], quad)?[0];
    Ok(MomentReport::new(t, 1, v, mean_square_main_term(t), delta))
}

/// I₂(T) = ∫₀^T |ζ(½+it)|⁴ dt with E₂(T) against the frozen a₀…a₄.
pub fn moment_i2(
    t: f64,
    quad: &QuadratureConfig,
    coeffs: &FourthMomentCoefficients,
) -> Result<MomentReport> {
    if t > 3e4 {
        return Err(out_of_range("T", t, "T <= 3e4 under the default budget"));
    }
    let (v, delta) = moments_on_grid(2, &[t], quad)?[0];
    Ok(MomentReport::new(t, 2, v, coeffs.main_term(t), delta))
}

/// Quartic-in-log T fits to the fourth moment on `ts`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FourthMomentFit {
    /// I₂(T)/T fitted pointwise.
    pub raw: FitReport,
    /// T⁻²∫₀^T I₂(u) du = Q(log T) with 2Q + Q′ equal to the main-term
    /// polynomial, so a₀ = 2q₀. Averaging suppresses the oscillation of E₂.
    pub cesaro: FitReport,
    pub leading_raw: f64,
    pub leading_cesaro: f64,
    pub refinement_delta: f64,
}

pub fn fourth_moment_fit(ts: &[f64], quad: &QuadratureConfig) -> Result<FourthMomentFit> {
    if ts.len() < 6 || ts.iter().any(|&t| !(10.0..=3e4).contains(&t)) {
        return Err(LabError::InvalidFit("need at least 6 heights in [10, 3e4]".into()));
    }
    let t_max = ts.iter().cloned().fold(0.0, f64::max);
    let coarse = CriticalLineTable::build(t_max, ts, quad)?;
    let fine = CriticalLineTable::build(t_max, ts, &quad.refined())?;
    let mut raw = Vec::with_capacity(ts.len());
    let mut ces = Vec::with_capacity(ts.len());
    let mut delta: f64 = 0.0;
    for &t in ts {
        let b = fine.moment(2, t)?;
        delta = delta.max(check_refinement(coarse.moment(2, t)?, b, quad)?);
        raw.push(b / t);
        let w = |u: f64| if u < t { (t - u) / t } else { 0.0 };
        let cb = fine.weighted(2, w);
        delta = delta.max(check_refinement(coarse.weighted(2, w), cb, quad)?);
        ces.push(cb / t);
    }
    let free = [None; 5];
    let raw = least_squares("I2(T)/T quartic in log T", ts, &raw, &free, log_power_basis(4))?;
    let cesaro = least_squares("Cesaro I2 / T^2 quartic in log T", ts, &ces, &free, log_power_basis(4))?;
    Ok(FourthMomentFit {
        leading_raw: raw.coefficients[0],
        leading_cesaro: 2.0 * cesaro.coefficients[0],
        raw,
        cesaro,
        refinement_delta: delta,
    })
}
