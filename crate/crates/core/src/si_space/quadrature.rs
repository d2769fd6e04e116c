//! Composite Gauss–Legendre rules on dyadic cells.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Gauss–Legendre nodes and weights on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "need at least one node");
        if m == 1 {
            return Self { nodes: vec![0.0], weights: vec![2.0] };
        }
        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        let mf = m as f64;
        for i in 0..m.div_ceil(2) {
            // Tricomi initial guess, then Newton on P_m.
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (mf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(m, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[m - 1 - i] = x;
            weights[i] = w;
            weights[m - 1 - i] = w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

fn legendre(m: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=m {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = m as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Uniform dyadic grid: cells of width `2^-q`, `nodes` Gauss points per cell
/// (1 gives the midpoint rule), covering `[-radius, radius]^n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub q: u32,
    pub nodes: usize,
    pub radius: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { q: 7, nodes: 4, radius: 8.0 }
    }
}

impl GridSpec {
    pub fn new(q: u32, nodes: usize, radius: f64) -> Result<Self> {
        let g = Self { q, nodes, radius };
        g.validate()?;
        Ok(g)
    }

    pub fn midpoint(q: u32, radius: f64) -> Self {
        Self { q, nodes: 1, radius }
    }

    pub fn validate(&self) -> Result<()> {
        if self.q < 4 || self.q > 20 {
            return Err(Error::Domain(format!("grid exponent q={} outside [4, 20]", self.q)));
        }
        if self.nodes == 0 || self.nodes > 16 {
            return Err(Error::Domain(format!("nodes per cell {} outside [1, 16]", self.nodes)));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::Domain(format!("grid radius {} must be positive", self.radius)));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        (-(self.q as f64)).exp2()
    }

    pub fn with_radius(self, radius: f64) -> Self {
        Self { radius, ..self }
    }

    pub fn rule(&self) -> GaussLegendre {
        GaussLegendre::new(self.nodes)
    }

    /// Nodes and weights on `[a, b]`, cells aligned to multiples of h and clipped.
    pub fn interval(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        composite(a, b, self.h(), &self.rule())
    }

    /// Nodes and weights on `[-radius, radius]`.
    pub fn axis(&self) -> (Vec<f64>, Vec<f64>) {
        self.interval(-self.radius, self.radius)
    }
}

/// Composite rule on `[a, b]` using cells `[jh, (j+1)h]` clipped to the interval.
pub fn composite(a: f64, b: f64, h: f64, rule: &GaussLegendre) -> (Vec<f64>, Vec<f64>) {
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    if b <= a {
        return (xs, ws);
    }
    let j0 = (a / h).floor() as i64;
    let j1 = (b / h).ceil() as i64;
    xs.reserve(((j1 - j0) as usize) * rule.len());
    ws.reserve(((j1 - j0) as usize) * rule.len());
    for j in j0..j1 {
        let lo = (j as f64 * h).max(a);
        let hi = ((j + 1) as f64 * h).min(b);
        if hi <= lo {
            continue;
        }
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        for (t, w) in rule.nodes.iter().zip(&rule.weights) {
            xs.push(mid + half * t);
            ws.push(half * w);
        }
    }
    (xs, ws)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_two() {
        for m in 1..=12 {
            let g = GaussLegendre::new(m);
            let s: f64 = g.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-14, "m={m} sum={s}");
        }
    }

    #[test]
    fn exact_for_degree_2m_minus_1() {
        for m in 1..=10 {
            let g = GaussLegendre::new(m);
            for deg in 0..(2 * m) {
                let approx: f64 = g.nodes.iter().zip(&g.weights).map(|(x, w)| w * x.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "m={m} deg={deg}");
            }
        }
    }

    #[test]
    fn composite_clips_to_interval() {
        let g = GridSpec::new(4, 3, 1.0).unwrap();
        let (xs, ws) = g.interval(-0.3, 0.71);
        assert!(xs.iter().all(|&x| (-0.3..=0.71).contains(&x)));
        let len: f64 = ws.iter().sum();
        assert!((len - 1.01).abs() < 1e-14);
        let cube: f64 = xs.iter().zip(&ws).map(|(x, w)| w * x * x * x).sum();
        assert!((cube - (0.71f64.powi(4) - 0.3f64.powi(4)) / 4.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_coarse_grid() {
        assert!(GridSpec::new(3, 4, 1.0).is_err());
        assert!(GridSpec::new(7, 0, 1.0).is_err());
    }
}
