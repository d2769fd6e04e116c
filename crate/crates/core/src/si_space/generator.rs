//! Generator catalog and the Gram sequence of their integer shifts.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::quadrature::{composite, GaussLegendre};
use super::symbol;
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};

/// One-dimensional profile before the affine modifier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Profile {
    Box,
    Bspline { order: u32 },
    TruncatedSinc { half_width: u32 },
    TruncatedGaussian { sigma: f64, half_width: u32 },
}

impl Profile {
    /// Closed support `[lo, hi]`.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            Profile::Box => (0.0, 1.0),
            Profile::Bspline { order } => (0.0, order as f64),
            Profile::TruncatedSinc { half_width } | Profile::TruncatedGaussian { half_width, .. } => {
                (-(half_width as f64), half_width as f64)
            }
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Box => {
                if (0.0..1.0).contains(&x) {
                    1.0
                } else {
                    0.0
                }
            }
            Profile::Bspline { order } => bspline(order as usize, x),
            Profile::TruncatedSinc { half_width } => {
                if x.abs() <= half_width as f64 {
                    sinc(x)
                } else {
                    0.0
                }
            }
            Profile::TruncatedGaussian { sigma, half_width } => {
                if x.abs() <= half_width as f64 {
                    (-x * x / (2.0 * sigma * sigma)).exp()
                } else {
                    0.0
                }
            }
        }
    }

    /// Piecewise-polynomial degree, if any.
    pub fn poly_degree(&self) -> Option<u32> {
        match *self {
            Profile::Box => Some(0),
            Profile::Bspline { order } => Some(order - 1),
            _ => None,
        }
    }
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-9 {
        let t = std::f64::consts::PI * x;
        1.0 - t * t / 6.0
    } else {
        let t = std::f64::consts::PI * x;
        t.sin() / t
    }
}

/// Cardinal B-spline of order p on knots 0..=p (Cox–de Boor), half-open at the right end.
pub fn bspline(p: usize, x: f64) -> f64 {
    if p == 0 || !(x >= 0.0 && x < p as f64) {
        return 0.0;
    }
    let j = x.floor() as usize;
    let mut b = vec![0.0; p + 1];
    b[j] = 1.0;
    for k in 2..=p {
        let lo = (j + 1).saturating_sub(k);
        let denom = (k - 1) as f64;
        for i in lo..=j {
            if i + k > p {
                b[i] = 0.0;
                continue;
            }
            let fi = i as f64;
            b[i] = (x - fi) / denom * b[i] + (fi + k as f64 - x) / denom * b[i + 1];
        }
    }
    b[0]
}

/// Profile with affine modifier: `x -> profile(dilation * (x - shift))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub profile: Profile,
    pub shift: f64,
    pub dilation: f64,
    pub dim: usize,
}

impl GeneratorSpec {
    pub fn new(profile: Profile, dim: usize) -> Self {
        Self { profile, shift: 0.0, dilation: 1.0, dim }
    }

    pub fn parse(s: &str, dim: usize) -> Result<Self> {
        let mut spec: GeneratorSpec = s.parse()?;
        spec.dim = dim;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidSpec(self.to_string(), m.to_string()));
        if self.dim != 1 && self.dim != 2 {
            return bad("dimension must be 1 or 2");
        }
        match self.profile {
            Profile::Bspline { order } if order == 0 || order > 8 => return bad("order must be in 1..=8"),
            Profile::TruncatedSinc { half_width: 0 } => return bad("half width must be positive"),
            Profile::TruncatedGaussian { sigma, half_width } => {
                if !(sigma > 0.0) || !sigma.is_finite() {
                    return bad("sigma must be positive");
                }
                if half_width == 0 {
                    return bad("half width must be positive");
                }
            }
            _ => {}
        }
        if !(self.dilation > 0.0) || !self.dilation.is_finite() || !self.shift.is_finite() {
            return bad("dilation must be positive and shift finite");
        }
        Ok(())
    }

    /// Support of the 1-D factor.
    pub fn support1(&self) -> (f64, f64) {
        let (a, b) = self.profile.support();
        (self.shift + a / self.dilation, self.shift + b / self.dilation)
    }

    /// Half-width of the support in the sup norm about the origin.
    pub fn support_radius(&self) -> f64 {
        let (a, b) = self.support1();
        a.abs().max(b.abs())
    }

    pub fn eval1(&self, x: f64) -> f64 {
        self.profile.eval(self.dilation * (x - self.shift))
    }

    /// `out[t] = eval1(x - (k0 + t))`.
    pub fn eval1_shifts(&self, x: f64, k0: i64, out: &mut [f64]) {
        if let (Profile::TruncatedSinc { half_width }, true) = (self.profile, self.dilation == 1.0) {
            // sin(pi (y - k)) = (-1)^k sin(pi y)
            let y0 = x - self.shift;
            let s = (std::f64::consts::PI * y0).sin();
            let l = half_width as f64;
            for (t, o) in out.iter_mut().enumerate() {
                let k = k0 + t as i64;
                let y = y0 - k as f64;
                *o = if y.abs() > l {
                    0.0
                } else if y.abs() < 1e-6 {
                    sinc(y)
                } else {
                    let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                    sign * s / (std::f64::consts::PI * y)
                };
            }
            return;
        }
        for (t, o) in out.iter_mut().enumerate() {
            *o = self.eval1(x - (k0 + t as i64) as f64);
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        x.iter().take(self.dim).map(|&xa| self.eval1(xa)).product()
    }

    /// Lattice shifts k with `x - k` inside the closed support, per axis.
    pub fn active_shifts(&self, x: f64) -> (i64, i64) {
        let (a, b) = self.support1();
        ((x - b).ceil() as i64, (x - a).floor() as i64)
    }

    /// Cell breakpoints needed for exact integration of piecewise polynomials.
    fn breakpoints(&self) -> Vec<f64> {
        let (a, b) = self.support1();
        let (pa, pb) = self.profile.support();
        let mut v: Vec<f64> = ((pa as i64)..=(pb as i64)).map(|t| self.shift + t as f64 / self.dilation).collect();
        v.push(a);
        v.push(b);
        v
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.profile {
            Profile::Box => write!(f, "box")?,
            Profile::Bspline { order } => write!(f, "bspline:{order}")?,
            Profile::TruncatedSinc { half_width } => write!(f, "sinc:{half_width}")?,
            Profile::TruncatedGaussian { sigma, half_width } => write!(f, "gauss:{sigma}:{half_width}")?,
        }
        if self.shift != 0.0 || self.dilation != 1.0 {
            write!(f, "@{}", self.shift)?;
            if self.dilation != 1.0 {
                write!(f, "/{}", self.dilation)?;
            }
        }
        Ok(())
    }
}

impl FromStr for GeneratorSpec {
    type Err = Error;

    /// `kind[:params][@shift[/dilation]]`, dimension defaults to 1.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let err = |m: &str| Error::InvalidSpec(s.to_string(), m.to_string());
        let (base, affine) = match s.split_once('@') {
            Some((b, a)) => (b, Some(a)),
            None => (s, None),
        };
        let parts: Vec<&str> = base.split(':').collect();
        let int = |t: &str| t.parse::<u32>().map_err(|_| err("expected a positive integer parameter"));
        let real = |t: &str| t.parse::<f64>().map_err(|_| err("expected a real parameter"));
        let profile = match parts.as_slice() {
            ["box"] => Profile::Box,
            ["bspline", p] => Profile::Bspline { order: int(p)? },
            ["sinc"] => Profile::TruncatedSinc { half_width: 64 },
            ["sinc", l] => Profile::TruncatedSinc { half_width: int(l)? },
            ["gauss", sg] => Profile::TruncatedGaussian { sigma: real(sg)?, half_width: 8 },
            ["gauss", sg, l] => Profile::TruncatedGaussian { sigma: real(sg)?, half_width: int(l)? },
            _ => return Err(err("unknown generator kind or wrong parameter count")),
        };
        let (shift, dilation) = match affine {
            None => (0.0, 1.0),
            Some(a) => match a.split_once('/') {
                Some((sh, d)) => (real(sh)?, real(d)?),
                None => (real(a)?, 1.0),
            },
        };
        let spec = GeneratorSpec { profile, shift, dilation, dim: 1 };
        spec.validate()?;
        Ok(spec)
    }
}

/// `a(m) = ∫ p_i(x) p_j(x - m) dx` for one axis, stored on `lo..lo+vals.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramSeq {
    pub lo: i64,
    pub vals: Vec<f64>,
}

impl GramSeq {
    pub fn get(&self, m: i64) -> f64 {
        let d = m - self.lo;
        if d < 0 || d as usize >= self.vals.len() {
            0.0
        } else {
            self.vals[d as usize]
        }
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.vals.len() as i64 - 1
    }

    fn reversed(&self) -> GramSeq {
        let mut vals = self.vals.clone();
        vals.reverse();
        GramSeq { lo: -self.hi(), vals }
    }
}

const GRAM_CELL: f64 = 1.0 / 32.0;
const GRAM_NODES: usize = 8;

/// Inner products of shifted 1-D factors with a Gauss rule on dyadic cells
/// refined at every breakpoint of either factor.
pub fn gram_sequence(gi: &GeneratorSpec, gj: &GeneratorSpec, exec: Execution) -> GramSeq {
    let (ai, bi) = gi.support1();
    let (aj, bj) = gj.support1();
    let lo = (ai - bj).floor() as i64;
    let hi = (bi - aj).ceil() as i64;
    let rule = GaussLegendre::new(GRAM_NODES);
    let bpi = gi.breakpoints();
    let bpj = gj.breakpoints();
    let vals = map_indexed((hi - lo + 1) as usize, exec, |t| {
        let m = (lo + t as i64) as f64;
        let a = ai.max(aj + m);
        let b = bi.min(bj + m);
        if b <= a {
            return 0.0;
        }
        let mut cuts: Vec<f64> = vec![a, b];
        cuts.extend(bpi.iter().copied().filter(|&c| c > a && c < b));
        cuts.extend(bpj.iter().map(|&c| c + m).filter(|&c| c > a && c < b));
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            let (xs, ws) = composite(w[0], w[1], GRAM_CELL, &rule);
            for (x, wt) in xs.iter().zip(&ws) {
                acc += wt * gi.eval1(*x) * gj.eval1(x - m);
            }
        }
        acc
    });
    trim_gram(GramSeq { lo, vals })
}

fn trim_gram(mut g: GramSeq) -> GramSeq {
    while g.vals.len() > 1 && g.vals[0] == 0.0 {
        g.vals.remove(0);
        g.lo += 1;
    }
    while g.vals.len() > 1 && *g.vals.last().unwrap() == 0.0 {
        g.vals.pop();
    }
    g
}

/// Minimal symbol eigenvalue accepted as a Riesz sequence.
pub const RIESZ_FLOOR: f64 = 1e-8;
/// Frequency points per axis for symbol scans.
pub const SYMBOL_GRID: usize = 2048;

/// The tuple of generators together with the Gram sequences of their shifts.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GeneratorSet {
    specs: Vec<GeneratorSpec>,
    dim: usize,
    gram: Vec<GramSeq>,
}

impl GeneratorSet {
    pub fn new(specs: Vec<GeneratorSpec>) -> Result<Self> {
        if specs.is_empty() {
            return Err(Error::InvalidSpec(String::new(), "empty generator list".into()));
        }
        let dim = specs[0].dim;
        for s in &specs {
            s.validate()?;
            if s.dim != dim {
                return Err(Error::InvalidSpec(s.to_string(), "generators must share the dimension".into()));
            }
        }
        let r = specs.len();
        let mut gram = vec![GramSeq { lo: 0, vals: vec![0.0] }; r * r];
        for i in 0..r {
            for j in i..r {
                let g = gram_sequence(&specs[i], &specs[j], Execution::Parallel);
                if i != j {
                    gram[j * r + i] = g.reversed();
                }
                gram[i * r + j] = g;
            }
        }
        let set = Self { specs, dim, gram };
        let (lmin, _) = symbol::scan_extrema(&set, SYMBOL_GRID);
        if !(lmin >= RIESZ_FLOOR) {
            return Err(Error::RieszViolation(lmin));
        }
        Ok(set)
    }

    /// Comma-separated generator specs, e.g. `"box,box@0.5/2"`.
    pub fn parse(s: &str, dim: usize) -> Result<Self> {
        let specs = s.split(',').map(|t| GeneratorSpec::parse(t, dim)).collect::<Result<Vec<_>>>()?;
        Self::new(specs)
    }

    pub fn specs(&self) -> &[GeneratorSpec] {
        &self.specs
    }

    pub fn label(&self) -> String {
        self.specs.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn r(&self) -> usize {
        self.specs.len()
    }

    pub fn gram1(&self, i: usize, j: usize) -> &GramSeq {
        &self.gram[i * self.r() + j]
    }

    /// `⟨φ_i, T_m φ_j⟩`.
    pub fn gram(&self, i: usize, j: usize, m: [i64; 2]) -> f64 {
        let g = self.gram1(i, j);
        if self.dim == 1 {
            g.get(m[0])
        } else {
            g.get(m[0]) * g.get(m[1])
        }
    }

    /// Largest |m| with a nonzero Gram entry on one axis.
    pub fn gram_radius(&self) -> i64 {
        self.gram.iter().map(|g| g.lo.abs().max(g.hi().abs())).max().unwrap_or(0)
    }

    pub fn support_radius(&self) -> f64 {
        self.specs.iter().map(|s| s.support_radius()).fold(0.0, f64::max)
    }

    pub fn eval(&self, i: usize, x: &[f64]) -> f64 {
        self.specs[i].eval(x)
    }

    pub fn norm_sq(&self, i: usize) -> f64 {
        self.gram1(i, i).get(0).powi(self.dim as i32)
    }

    /// `∫|φ_i|` by quadrature.
    pub fn l1_norm(&self, i: usize) -> f64 {
        let s = &self.specs[i];
        let (a, b) = s.support1();
        let mut cuts = s.breakpoints();
        cuts.retain(|&c| c >= a && c <= b);
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let rule = GaussLegendre::new(GRAM_NODES);
        let mut acc = 0.0;
        for w in cuts.windows(2) {
            let (xs, ws) = composite(w[0], w[1], GRAM_CELL / 4.0, &rule);
            acc += xs.iter().zip(&ws).map(|(x, wt)| wt * s.eval1(*x).abs()).sum::<f64>();
        }
        acc.powi(self.dim as i32)
    }

    /// Wiener amalgam norm `Σ_k ess sup_{k + (0,1)^n} |φ_i|`, sup sampled on each open cell.
    pub fn amalgam_norm(&self, i: usize) -> f64 {
        let s = &self.specs[i];
        let (a, b) = s.support1();
        let samples = 1024;
        let mut total = 0.0;
        for k in (a.floor() as i64)..(b.ceil() as i64) {
            let mut sup: f64 = 0.0;
            for t in 0..=samples {
                let u = (t as f64 / samples as f64).clamp(1e-12, 1.0 - 1e-12);
                sup = sup.max(s.eval1(k as f64 + u).abs());
            }
            total += sup;
        }
        total.powi(self.dim as i32)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn truncated_power(p: usize, x: f64) -> f64 {
        let mut fact = 1.0;
        for t in 1..p {
            fact *= t as f64;
        }
        let mut acc = 0.0;
        let mut binom = 1.0;
        for j in 0..=p {
            let y = x - j as f64;
            if y > 0.0 {
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                acc += sign * binom * y.powi(p as i32 - 1);
            }
            binom = binom * (p - j) as f64 / (j + 1) as f64;
        }
        acc / fact
    }

    #[test]
    fn bspline_matches_truncated_powers() {
        for p in 2..=6 {
            for t in 0..=400 {
                let x = -0.5 + (p as f64 + 1.0) * t as f64 / 400.0;
                let a = bspline(p, x);
                let b = if x >= 0.0 && x < p as f64 { truncated_power(p, x) } else { 0.0 };
                assert!((a - b).abs() < 1e-11, "p={p} x={x} {a} {b}");
            }
        }
    }

    #[test]
    fn catalog_examples() {
        let b = GeneratorSpec::parse("box", 1).unwrap();
        assert_eq!(b.eval(&[0.5]), 1.0);
        assert_eq!(b.eval(&[1.0]), 0.0);
        let hat = GeneratorSpec::parse("bspline:2", 1).unwrap();
        assert!((hat.eval(&[1.0]) - 1.0).abs() < 1e-15);
        let s = GeneratorSpec::parse("sinc:64", 1).unwrap();
        assert_eq!(s.eval(&[0.0]), 1.0);
        let g2 = GeneratorSpec::parse("bspline:2", 2).unwrap();
        assert!((g2.eval(&[0.5, 1.0]) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spec_round_trip() {
        for s in ["box", "bspline:3", "sinc:64", "gauss:1:8", "gauss:0.75:6", "box@0.5/2", "bspline:2@-1"] {
            let g: GeneratorSpec = s.parse().unwrap();
            assert_eq!(g.to_string(), s);
        }
        assert!("bspline:0".parse::<GeneratorSpec>().is_err());
        assert!("wavelet".parse::<GeneratorSpec>().is_err());
        assert!("gauss:-1:4".parse::<GeneratorSpec>().is_err());
    }

    #[test]
    fn affine_box() {
        let g: GeneratorSpec = "box@0.5/2".parse().unwrap();
        assert_eq!(g.support1(), (0.5, 1.0));
        assert_eq!(g.eval1(0.75), 1.0);
        assert_eq!(g.eval1(0.25), 0.0);
    }

    #[test]
    fn sinc_fast_path_matches() {
        let g = GeneratorSpec::parse("sinc:16", 1).unwrap();
        let mut out = vec![0.0; 40];
        for &x in &[0.0, 0.3, -7.25, 3.0] {
            g.eval1_shifts(x, -20, &mut out);
            for (t, v) in out.iter().enumerate() {
                let direct = g.eval1(x - (t as f64 - 20.0));
                assert!((v - direct).abs() < 1e-14, "x={x} t={t}");
            }
        }
    }

    #[test]
    fn hat_gram_is_exact() {
        let g = GeneratorSet::parse("bspline:2", 1).unwrap();
        let a = g.gram1(0, 0);
        assert!((a.get(0) - 2.0 / 3.0).abs() < 1e-15);
        assert!((a.get(1) - 1.0 / 6.0).abs() < 1e-15);
        assert!((a.get(-1) - 1.0 / 6.0).abs() < 1e-15);
        assert_eq!(a.get(2), 0.0);
    }

    #[test]
    fn two_generator_gram_is_transposed() {
        let g = GeneratorSet::parse("box,box@0.5/2", 1).unwrap();
        assert!((g.gram(0, 1, [0, 0]) - 0.5).abs() < 1e-15);
        assert!((g.gram(1, 1, [0, 0]) - 0.5).abs() < 1e-15);
        for m in -3..=3 {
            assert_eq!(g.gram(0, 1, [m, 0]), g.gram(1, 0, [-m, 0]));
        }
    }

    #[test]
    fn dependent_set_is_rejected() {
        let e = GeneratorSet::parse("box,box", 1).unwrap_err();
        assert!(matches!(e, Error::RieszViolation(_)));
    }

    #[test]
    fn amalgam_dominates_l1() {
        for s in ["box", "bspline:2", "bspline:4", "gauss:1:8"] {
            let g = GeneratorSet::parse(s, 1).unwrap();
            assert!(g.amalgam_norm(0) >= g.l1_norm(0) - 1e-9, "{s}");
        }
        let b = GeneratorSet::parse("box", 1).unwrap();
        assert!((b.amalgam_norm(0) - 1.0).abs() < 1e-12);
        let hat = GeneratorSet::parse("bspline:2", 1).unwrap();
        assert!((hat.amalgam_norm(0) - 2.0).abs() < 1e-9);
        assert!((hat.l1_norm(0) - 1.0).abs() < 1e-12);
    }
}
