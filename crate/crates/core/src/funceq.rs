//! The integral equation ∫₀^∞ F(wt, w)/F(t, w) dt = G(w): Hayman's
//! exponential case and the family F(t, w) = t^c exp(w^c t / h(w)) with
//! G = h/(1 − w).

use serde::{Deserialize, Serialize};

use crate::error::{out_of_range, LabError, Result};
use crate::quad::QuadratureConfig;

/// One point of the solution family. `h_of_w` is the value h(w).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolutionParams {
    pub c: f64,
    pub w: f64,
    pub h_of_w: f64,
}

impl SolutionParams {
    /// Checks c ≥ 0, w > 0, w ≠ 1, and h > 0 for w < 1, h < 0 for w > 1.
    pub fn new(c: f64, w: f64, h_of_w: f64) -> Result<Self> {
        let p = Self { c, w, h_of_w };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c >= 0.0) || !self.c.is_finite() {
            return Err(out_of_range("c", self.c, "c >= 0"));
        }
        if !(self.w > 0.0) || self.w == 1.0 || !self.w.is_finite() {
            return Err(out_of_range("w", self.w, "w > 0, w != 1"));
        }
        let ok = if self.w < 1.0 {
            self.h_of_w > 0.0
        } else {
            self.h_of_w < 0.0
        };
        if !ok || !self.h_of_w.is_finite() {
            return Err(LabError::SignCondition(format!(
                "h(w) = {} at w = {} (need h > 0 for w < 1, h < 0 for w > 1)",
                self.h_of_w, self.w
            )));
        }
        Ok(())
    }

    /// Decay rate λ = w^c (1 − w)/h of the ratio; positive when the sign
    /// conditions hold.
    pub fn decay_rate(&self) -> f64 {
        self.w.powf(self.c) * (1.0 - self.w) / self.h_of_w
    }

    /// 40/λ = 40·h/(w^c |w − 1|) in magnitude.
    pub fn horizon(&self) -> f64 {
        40.0 / self.decay_rate()
    }

    pub fn target(&self) -> f64 {
        self.h_of_w / (1.0 - self.w)
    }
}

/// `scale`·t^c exp(w^c t / h).
pub fn f_value(t: f64, p: &SolutionParams, scale: f64) -> f64 {
    scale * t.powf(p.c) * (p.w.powf(p.c) / p.h_of_w * t).exp()
}

/// F(wt, w)/F(t, w) = w^c exp((w^c/h)(w − 1)t).
pub fn ratio_integrand(t: f64, p: &SolutionParams) -> Result<f64> {
    p.validate()?;
    if !(t >= 0.0) {
        return Err(out_of_range("t", t, "t >= 0"));
    }
    Ok(p.w.powf(p.c) * (-p.decay_rate() * t).exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Theorem3Report {
    pub params: SolutionParams,
    pub integral: f64,
    pub target: f64,
    /// |integral − target| plus the tail bound.
    pub residual: f64,
    pub horizon: f64,
    pub tail_bound: f64,
}

fn exp_integral(rate: f64, horizon: f64, quad: &QuadratureConfig, f: impl Fn(f64) -> f64) -> f64 {
    let cfg = QuadratureConfig::uniform(1.0 / rate, quad.nodes_per_panel);
    cfg.integrate(0.0, horizon, f)
}

pub fn verify_theorem3(p: &SolutionParams, quad: &QuadratureConfig) -> Result<Theorem3Report> {
    p.validate()?;
    let rate = p.decay_rate();
    if !(rate > 0.0) || !rate.is_finite() {
        return Err(LabError::Convergence(format!("ratio does not decay for {p:?}")));
    }
    let horizon = p.horizon();
    let wc = p.w.powf(p.c);
    let integral = exp_integral(rate, horizon, quad, |t| wc * (-rate * t).exp());
    let tail_bound = wc * (-rate * horizon).exp() / rate;
    let target = p.target();
    Ok(Theorem3Report {
        params: *p,
        integral,
        target,
        residual: (integral - target).abs() + tail_bound,
        horizon,
        tail_bound,
    })
}

/// The verification grid: c ∈ {0, 1, 2.5} crossed with w ∈ {0.3, 0.5, 0.9},
/// h ∈ {0.5, 1, 4}, and with w ∈ {1.2, 1.5, 2}, h ∈ {−0.5, −1, −4}.
pub fn theorem3_grid() -> Vec<SolutionParams> {
    let mut out = Vec::new();
    for c in [0.0, 1.0, 2.5] {
        for w in [0.3, 0.5, 0.9] {
            for h in [0.5, 1.0, 4.0] {
                out.push(SolutionParams { c, w, h_of_w: h });
            }
        }
        for w in [1.2, 1.5, 2.0] {
            for h in [-0.5, -1.0, -4.0] {
                out.push(SolutionParams { c, w, h_of_w: h });
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HaymanReport {
    pub w: f64,
    pub integral: f64,
    pub target: f64,
    pub residual: f64,
    pub horizon: f64,
}

/// ∫₀^∞ e^{(w−1)t} dt against 1/(1 − w), with horizon 40/(1 − w).
pub fn hayman_check(w: f64, quad: &QuadratureConfig) -> Result<HaymanReport> {
    if !(w > 0.0 && w < 1.0) {
        return Err(out_of_range("w", w, "(0, 1)"));
    }
    let rate = 1.0 - w;
    let horizon = 40.0 / rate;
    let integral = exp_integral(rate, horizon, quad, |t| (-rate * t).exp());
    let target = 1.0 / rate;
    Ok(HaymanReport {
        w,
        integral,
        target,
        residual: (integral - target).abs() + (-40.0f64).exp() / rate,
        horizon,
    })
}
