//! The circle and divisor error terms P(x), Δ(x): direct evaluation from the
//! sieve, truncated Bessel-series expansions, and mean-square integrals.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::arith::{Abscissa, SieveTable};
use crate::error::{out_of_range, Result};
use crate::quad::{CompensatedSum, GaussLegendre};
use crate::report::{fmt_num, CsvTable};
use crate::special::{SwitchPolicy, EULER_GAMMA};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Direct,
    Series,
}

/// How a Bessel series is cut off at `N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothing {
    Sharp,
    /// Weight `e^{−Dn/N}` times the C² taper `1 − u + sin(2πu)/(2π)`,
    /// `u = (n − N/2)/(N/2)` on `[N/2, N]`, with `D =` [`DAMPING`].
    Smoothed,
}

/// Exponential damping rate of the smoothed weight. The terms oscillate in
/// √x with frequency √n, so `e^{−Dn/N}` is a Gaussian in that frequency and
/// the smoothed sum is P or Δ convolved with a Gaussian of width ~√(Dx/N).
pub const DAMPING: f64 = 6.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorTermSample {
    pub x: f64,
    pub value: f64,
    pub method: Method,
    /// 0 for direct evaluation.
    pub terms_used: u64,
    /// For series: |S_N − S_{N/2}|, the change from halving the cutoff.
    /// Zero for direct values.
    pub truncation_estimate: f64,
}

impl ErrorTermSample {
    fn direct(x: f64, value: f64) -> Self {
        Self {
            x,
            value,
            method: Method::Direct,
            terms_used: 0,
            truncation_estimate: 0.0,
        }
    }
}

/// P(x) = Σ′_{n≤x} r(n) − πx + 1.
pub fn p_direct(x: Abscissa, table: &SieveTable) -> Result<ErrorTermSample> {
    let v = x.value();
    if !(v > 0.0) {
        return Err(out_of_range("x", v, "x > 0"));
    }
    let s = table.summatory_r(x)?;
    Ok(ErrorTermSample::direct(v, s - PI * v + 1.0))
}

/// x(log x + 2γ − 1) + ¼, the divisor-problem main term.
pub fn divisor_main_term(x: f64) -> f64 {
    x * (x.ln() + 2.0 * EULER_GAMMA - 1.0) + 0.25
}

/// Δ(x) = Σ′_{n≤x} d(n) − x(log x + 2γ − 1) − ¼.
pub fn delta_direct(x: Abscissa, table: &SieveTable) -> Result<ErrorTermSample> {
    let v = x.value();
    if !(v > 0.0) {
        return Err(out_of_range("x", v, "x > 0"));
    }
    let s = table.summatory_d(x)?;
    Ok(ErrorTermSample::direct(v, s - divisor_main_term(v)))
}

pub fn taper_weight(n: usize, big_n: usize, smoothing: Smoothing) -> f64 {
    match smoothing {
        Smoothing::Sharp => 1.0,
        Smoothing::Smoothed => {
            let half = big_n as f64 / 2.0;
            let nf = n as f64;
            let damp = (-DAMPING * nf / big_n as f64).exp();
            if nf <= half {
                damp
            } else {
                let u = ((nf - half) / half).min(1.0);
                damp * (1.0 - u + (2.0 * PI * u).sin() / (2.0 * PI))
            }
        }
    }
}

fn series_sample<F>(
    x: f64,
    big_n: usize,
    smoothing: Smoothing,
    table: &SieveTable,
    mut term: F,
) -> Result<ErrorTermSample>
where
    F: FnMut(usize) -> Result<f64>,
{
    if !(x > 0.0) {
        return Err(out_of_range("x", x, "x > 0"));
    }
    if big_n == 0 || big_n as u64 > table.limit() {
        return Err(out_of_range(
            "N",
            big_n as f64,
            format!("1 <= N <= {}", table.limit()),
        ));
    }
    // S_N and S_{N/2} in one pass
    let mut full = CompensatedSum::new();
    let mut half = CompensatedSum::new();
    let small_n = (big_n / 2).max(1);
    for n in 1..=big_n {
        let w = taper_weight(n, big_n, smoothing);
        let wh = if n <= small_n {
            taper_weight(n, small_n, smoothing)
        } else {
            0.0
        };
        if w == 0.0 && wh == 0.0 {
            continue;
        }
        let v = term(n)?;
        full.add(w * v);
        half.add(wh * v);
    }
    Ok(ErrorTermSample {
        x,
        value: full.value(),
        method: Method::Series,
        terms_used: big_n as u64,
        truncation_estimate: (full.value() - half.value()).abs(),
    })
}

/// x^{1/2} Σ_{n≤N} r(n) n^{−1/2} J₁(2π√(xn)), optionally tapered.
pub fn p_hardy(
    x: f64,
    big_n: usize,
    smoothing: Smoothing,
    table: &SieveTable,
) -> Result<ErrorTermSample> {
    let bessel = SwitchPolicy::default();
    let sx = x.sqrt();
    series_sample(x, big_n, smoothing, table, |n| {
        let r = table.r(n);
        if r == 0 {
            return Ok(0.0);
        }
        let nf = n as f64;
        Ok(sx * r as f64 / nf.sqrt() * bessel.j1(2.0 * PI * (x * nf).sqrt())?)
    })
}

/// −(2√x/π) Σ_{n≤N} d(n) n^{−1/2} {K₁(4π√(xn)) + (π/2) Y₁(4π√(xn))}, optionally tapered.
pub fn delta_voronoi(
    x: f64,
    big_n: usize,
    smoothing: Smoothing,
    table: &SieveTable,
) -> Result<ErrorTermSample> {
    let bessel = SwitchPolicy::default();
    let pre = -2.0 * x.sqrt() / PI;
    series_sample(x, big_n, smoothing, table, |n| {
        let nf = n as f64;
        let z = 4.0 * PI * (x * nf).sqrt();
        let k = bessel.k1(z)?;
        let y = bessel.y1(z)?;
        Ok(pre * table.d(n) as f64 / nf.sqrt() * (k + 0.5 * PI * y))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    #[serde(rename = "P")]
    P,
    #[serde(rename = "Delta")]
    Delta,
}

/// ∫_a^b (β − π(x−k))² dx restricted to one unit cell is a cubic in its
/// length; this returns ∫_0^f (β − πu)² du.
fn p_cell_square(beta: f64, f: f64) -> f64 {
    beta * beta * f - PI * beta * f * f + PI * PI * f * f * f / 3.0
}

/// ∫₀^T g(x) dx where g(x) = F(P(x)) or F(Δ(x)) is integrated per unit cell;
/// `cell` receives (k, upper offset f ∈ (0,1], cumulative count through k).
fn over_cells<F>(t: f64, table: &SieveTable, mut cell: F) -> Result<f64>
where
    F: FnMut(usize, f64, f64) -> f64,
{
    if !(t > 0.0) || t > table.limit() as f64 {
        return Err(out_of_range("T", t, format!("(0, {}]", table.limit())));
    }
    let mut acc = CompensatedSum::new();
    let full = t.floor() as usize;
    for k in 0..=full {
        let f = if k < full { 1.0 } else { t - full as f64 };
        if f <= 0.0 {
            continue;
        }
        acc.add(cell(k, f, 0.0));
    }
    Ok(acc.value())
}

/// Gauss–Legendre over the cell [k, k+f], with geometric refinement toward
/// 0 in the first cell where x log x is not smooth.
pub(crate) fn delta_cell_integral<G>(k: usize, f: f64, rule: &GaussLegendre, g: &mut G) -> f64
where
    G: FnMut(f64) -> f64,
{
    let a = k as f64;
    if k > 0 {
        return rule.integrate(a, a + f, &mut *g);
    }
    let mut acc = CompensatedSum::new();
    let mut hi = f;
    for _ in 0..60 {
        let lo = hi / 2.0;
        acc.add(rule.integrate(lo, hi, &mut *g));
        hi = lo;
    }
    acc.value()
}

/// ∫₀^T P(x)² dx or ∫₀^T Δ(x)² dx.
pub fn mean_square_direct(t: f64, which: Which, table: &SieveTable) -> Result<f64> {
    match which {
        Which::P => over_cells(t, table, |k, f, _| {
            let beta = table.r_prefix(k) as f64 + 1.0 - PI * k as f64;
            p_cell_square(beta, f)
        }),
        Which::Delta => {
            let rule = GaussLegendre::new(16);
            over_cells(t, table, |k, f, _| {
                let dk = table.d_prefix(k) as f64;
                let mut g = |x: f64| {
                    let v = dk - divisor_main_term(x);
                    v * v
                };
                delta_cell_integral(k, f, &rule, &mut g)
            })
        }
    }
}

/// ∫₀^T Δ(x) dx.
pub fn delta_integral(t: f64, table: &SieveTable) -> Result<f64> {
    let rule = GaussLegendre::new(16);
    over_cells(t, table, |k, f, _| {
        let dk = table.d_prefix(k) as f64;
        let mut g = |x: f64| dk - divisor_main_term(x);
        delta_cell_integral(k, f, &rule, &mut g)
    })
}

/// Brute Gauss–Legendre of ∫₀^T P² over unit cells, an independent route to
/// [`mean_square_direct`].
pub fn mean_square_p_quadrature(t: f64, table: &SieveTable) -> Result<f64> {
    let rule = GaussLegendre::new(8);
    over_cells(t, table, |k, f, _| {
        let rk = table.r_prefix(k) as f64;
        let a = k as f64;
        rule.integrate(a, a + f, |x| {
            let v = rk - PI * x + 1.0;
            v * v
        })
    })
}

/// CSV with columns `x,method,N,value,truncation_estimate`.
pub fn samples_table(samples: &[ErrorTermSample]) -> CsvTable {
    let mut t = CsvTable::new(&["x", "method", "N", "value", "truncation_estimate"]);
    for s in samples {
        t.push(vec![
            fmt_num(s.x),
            match s.method {
                Method::Direct => "direct".into(),
                Method::Series => "series".into(),
            },
            s.terms_used.to_string(),
            fmt_num(s.value),
            fmt_num(s.truncation_estimate),
        ]);
    }
    t
}
