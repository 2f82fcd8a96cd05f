//! Composite Gauss–Legendre quadrature and the configuration shared by every
//! semi-infinite integral in the crate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Neumaier-compensated accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = CompensatedSum::new();
        for x in iter {
            acc.add(x);
        }
        acc
    }
}

/// Gauss–Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    /// Builds the `n`-point rule by Newton iteration on the Legendre recurrence.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        let nf = n as f64;
        for i in 0..m {
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Integrates `f` over `[a, b]` with a single panel.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            acc += w * f(mid + half * x);
        }
        acc * half
    }

    /// Physical nodes and weights of the rule mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(move |(x, w)| (mid + half * x, w * half))
    }

    /// Integrates over `[a, b]` split into `panels` equal panels.
    pub fn integrate_composite<F: FnMut(f64) -> f64>(
        &self,
        a: f64,
        b: f64,
        panels: usize,
        mut f: F,
    ) -> f64 {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut acc = CompensatedSum::new();
        for k in 0..panels {
            let lo = a + h * k as f64;
            let hi = if k + 1 == panels { b } else { lo + h };
            acc.add(self.integrate(lo, hi, &mut f));
        }
        acc.value()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let d = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, d)
}

/// How panel boundaries are laid out along the integration axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PanelScheme {
    /// Fixed panel width.
    Uniform { width: f64 },
    /// Width `scale * 2π / log(t / 2π)`, the oscillation scale of `|ζ(½+it)|²`,
    /// clamped to `max_width`.
    ZetaOscillation { scale: f64, max_width: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureConfig {
    pub scheme: PanelScheme,
    pub nodes_per_panel: usize,
    /// Semi-infinite integrals against `e^{-x/T}` are truncated at
    /// `horizon_factor * T`.
    pub horizon_factor: f64,
    /// Allowed relative change between a result and its refinement.
    pub refine_tol: f64,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            scheme: PanelScheme::ZetaOscillation {
                scale: 1.0,
                max_width: 1.0,
            },
            nodes_per_panel: 12,
            horizon_factor: 40.0,
            refine_tol: 1e-6,
        }
    }
}

impl QuadratureConfig {
    pub fn uniform(width: f64, nodes_per_panel: usize) -> Self {
        Self {
            scheme: PanelScheme::Uniform { width },
            nodes_per_panel,
            ..Self::default()
        }
    }

    /// Same configuration with panels half as wide.
    pub fn refined(&self) -> Self {
        let scheme = match self.scheme {
            PanelScheme::Uniform { width } => PanelScheme::Uniform { width: width / 2.0 },
            PanelScheme::ZetaOscillation { scale, max_width } => PanelScheme::ZetaOscillation {
                scale: scale / 2.0,
                max_width: max_width / 2.0,
            },
        };
        Self { scheme, ..*self }
    }

    /// Local panel width at position `t`.
    pub fn panel_width(&self, t: f64) -> f64 {
        match self.scheme {
            PanelScheme::Uniform { width } => width,
            PanelScheme::ZetaOscillation { scale, max_width } => {
                let tau = t / (2.0 * PI);
                if tau <= std::f64::consts::E {
                    max_width
                } else {
                    (scale * 2.0 * PI / tau.ln()).min(max_width)
                }
            }
        }
    }

    /// Panel boundaries covering `[a, b]`.
    pub fn panels(&self, a: f64, b: f64) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        let mut lo = a;
        while lo < b {
            let w = self.panel_width(lo).max(1e-12);
            let mut hi = lo + w;
            // avoid a sliver at the end
            if hi > b || b - hi < 0.25 * w {
                hi = b;
            }
            out.push((lo, hi));
            lo = hi;
        }
        out
    }

    pub fn rule(&self) -> GaussLegendre {
        GaussLegendre::new(self.nodes_per_panel)
    }

    /// Integrates `f` over `[a, b]` on this configuration's panels.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let rule = self.rule();
        let mut acc = CompensatedSum::new();
        for (lo, hi) in self.panels(a, b) {
            acc.add(rule.integrate(lo, hi, &mut f));
        }
        acc.value()
    }
}

/// Adaptive bisection: each piece is accepted when a 10-point Gauss rule
/// and the same rule on its two halves agree to the piece's share of
/// `abs_tol`. `pieces` sets the initial uniform split, which matters for
/// oscillatory integrands.
pub fn adaptive<F: FnMut(f64) -> f64>(
    a: f64,
    b: f64,
    pieces: usize,
    abs_tol: f64,
    mut f: F,
) -> Result<f64> {
    const MAX_DEPTH: u32 = 40;
    let rule = GaussLegendre::new(10);
    let pieces = pieces.max(1);
    let h = (b - a) / pieces as f64;
    let mut acc = CompensatedSum::new();
    let mut stack: Vec<(f64, f64, f64, u32)> = (0..pieces)
        .rev()
        .map(|k| {
            let lo = a + h * k as f64;
            let hi = if k + 1 == pieces { b } else { lo + h };
            (lo, hi, rule.integrate(lo, hi, &mut f), 0)
        })
        .collect();
    let width = (b - a).abs();
    while let Some((lo, hi, whole, depth)) = stack.pop() {
        let mid = 0.5 * (lo + hi);
        let left = rule.integrate(lo, mid, &mut f);
        let right = rule.integrate(mid, hi, &mut f);
        // the floor keeps endpoint singularities from demanding ever smaller shares
        let share = abs_tol * ((hi - lo).abs() / width).max(1.0 / 4096.0);
        if (left + right - whole).abs() <= share.max(f64::EPSILON * (left.abs() + right.abs())) {
            acc.add(left + right);
        } else if depth >= MAX_DEPTH {
            return Err(LabError::Convergence(format!(
                "adaptive quadrature did not settle on [{lo}, {hi}]"
            )));
        } else {
            stack.push((mid, hi, right, depth + 1));
            stack.push((lo, mid, left, depth + 1));
        }
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rule_integrates_polynomials_exactly() {
        for n in 1..=20 {
            let rule = GaussLegendre::new(n);
            let sum_w: f64 = rule.weights().iter().sum();
            assert!((sum_w - 2.0).abs() < 1e-13, "n={n}");
            for deg in 0..(2 * n) {
                let got = rule.integrate(0.0, 1.0, |x| x.powi(deg as i32));
                let want = 1.0 / (deg as f64 + 1.0);
                assert!((got - want).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn composite_rule_on_oscillation() {
        let rule = GaussLegendre::new(10);
        let got = rule.integrate_composite(0.0, 50.0, 40, |x| (3.0 * x).cos());
        assert!((got - (150.0f64).sin() / 3.0).abs() < 1e-12);
    }

    #[test]
    fn panels_cover_interval() {
        let q = QuadratureConfig::default();
        let p = q.panels(0.0, 1000.0);
        assert_eq!(p.first().unwrap().0, 0.0);
        assert_eq!(p.last().unwrap().1, 1000.0);
        for w in p.windows(2) {
            assert_eq!(w[0].1, w[1].0);
        }
        let r = q.refined();
        assert!(r.panels(0.0, 1000.0).len() >= 2 * p.len() - 2);
    }

    #[test]
    fn adaptive_handles_peaks_and_endpoint_singularities() {
        let v = adaptive(-1.0, 1.0, 1, 1e-12, |x| 1.0 / (1e-4 + x * x)).unwrap();
        assert!((v - 2.0 * 100.0 * (100.0f64).atan()).abs() < 1e-8);
        let v = adaptive(0.0, 1.0, 1, 1e-12, |x| x.sqrt()).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-11);
        let v = adaptive(0.0, 100.0, 20, 1e-12, |x| (7.0 * x).sin() * (-0.1 * x).exp()).unwrap();
        let want = 7.0 / (0.01 + 49.0) * (1.0 - (-10.0f64).exp() * ((700.0f64).cos() + 0.1 / 7.0 * (700.0f64).sin()));
        assert!((v - want).abs() < 1e-11);
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut s = CompensatedSum::new();
        s.add(1e16);
        for _ in 0..1000 {
            s.add(1.0);
        }
        s.add(-1e16);
        assert_eq!(s.value(), 1000.0);
    }
}
