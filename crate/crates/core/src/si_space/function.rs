//! Elements of V(Φ) given by finitely many coefficients.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::generator::GeneratorSet;
use super::lattice::{Lattice, Window};
use super::quadrature::GridSpec;
use crate::error::{Error, Result};

/// `f = Σ_i Σ_{k∈W} c_i(k) φ_i(· - k)`.
#[derive(Debug, Clone)]
pub struct SIFunction {
    gen: Arc<GeneratorSet>,
    window: Window,
    coeffs: Vec<f64>,
}

/// `‖Q_R f‖²` together with `‖f‖²`, both by quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CubeEnergy {
    pub inside: f64,
    pub total: f64,
}

impl CubeEnergy {
    pub fn ratio(&self) -> f64 {
        if self.total == 0.0 {
            0.0
        } else {
            self.inside / self.total
        }
    }
}

impl SIFunction {
    pub fn new(gen: Arc<GeneratorSet>, window: Window, coeffs: Vec<f64>) -> Result<Self> {
        if window.n != gen.dim() || coeffs.len() != gen.r() * window.size() {
            return Err(Error::Domain(format!(
                "coefficient array of length {} does not match {} generators on {} lattice points",
                coeffs.len(),
                gen.r(),
                window.size()
            )));
        }
        Ok(Self { gen, window, coeffs })
    }

    pub fn zeros(gen: Arc<GeneratorSet>, window: Window) -> Self {
        let coeffs = vec![0.0; gen.r() * window.size()];
        Self { gen, window, coeffs }
    }

    /// `T_k φ_i`.
    pub fn shift(gen: Arc<GeneratorSet>, i: usize, k: Lattice) -> Self {
        let n = gen.dim();
        let window = Window::from_bounds(n, k, k);
        let mut f = Self::zeros(gen, window);
        f.coeffs[i] = 1.0;
        f
    }

    /// Gaussian coefficients on `window`, scaled to unit L² norm.
    pub fn random<R: Rng + ?Sized>(gen: Arc<GeneratorSet>, window: Window, rng: &mut R) -> Self {
        let coeffs = (0..gen.r() * window.size()).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let mut f = Self { gen, window, coeffs };
        let nrm = f.norm();
        if nrm > 0.0 {
            f.scale(1.0 / nrm);
        }
        f
    }

    pub fn gen(&self) -> &Arc<GeneratorSet> {
        &self.gen
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize, k: Lattice) -> f64 {
        self.window.index(k).map_or(0.0, |ix| self.coeffs[i * self.window.size() + ix])
    }

    pub fn set_coeff(&mut self, i: usize, k: Lattice, v: f64) -> Result<()> {
        let size = self.window.size();
        match self.window.index(k) {
            Some(ix) => {
                self.coeffs[i * size + ix] = v;
                Ok(())
            }
            None => Err(Error::Domain(format!("lattice point {k:?} outside the coefficient window"))),
        }
    }

    pub fn scale(&mut self, a: f64) {
        self.coeffs.iter_mut().for_each(|c| *c *= a);
    }

    /// `self + a * other` on the union window.
    pub fn axpy(&self, a: f64, other: &SIFunction) -> SIFunction {
        let window = self.window.union(&other.window);
        let mut out = SIFunction::zeros(self.gen.clone(), window.clone());
        let size = window.size();
        for (f, w) in [(self, 1.0), (other, a)] {
            let fs = f.window.size();
            for i in 0..self.gen.r() {
                for (ix, k) in f.window.points().enumerate() {
                    let dst = window.index(k).expect("union contains both windows");
                    out.coeffs[i * size + dst] += w * f.coeffs[i * fs + ix];
                }
            }
        }
        out
    }

    /// Drop outer lattice layers whose coefficients are all below `tol * max|c|`.
    pub fn trimmed(&self, tol: f64) -> SIFunction {
        let cmax = self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
        if cmax == 0.0 {
            return self.clone();
        }
        let n = self.window.n;
        let size = self.window.size();
        let mut lo = [i64::MAX; 2];
        let mut hi = [i64::MIN; 2];
        for (ix, k) in self.window.points().enumerate() {
            if (0..self.gen.r()).any(|i| self.coeffs[i * size + ix].abs() > tol * cmax) {
                for a in 0..n {
                    lo[a] = lo[a].min(k[a]);
                    hi[a] = hi[a].max(k[a]);
                }
            }
        }
        let window = Window::from_bounds(n, lo, hi);
        let mut out = SIFunction::zeros(self.gen.clone(), window.clone());
        let ns = window.size();
        for i in 0..self.gen.r() {
            for (ix, k) in window.points().enumerate() {
                out.coeffs[i * ns + ix] = self.coeff(i, k);
            }
        }
        out
    }

    /// Point evaluation, an exact finite sum.
    pub fn eval(&self, x: &[f64]) -> f64 {
        let n = self.window.n;
        let size = self.window.size();
        let mut acc = 0.0;
        let mut v0 = Vec::new();
        let mut v1 = Vec::new();
        for (i, spec) in self.gen.specs().iter().enumerate() {
            let c = &self.coeffs[i * size..(i + 1) * size];
            let Some((a0, b0)) = clip(spec.active_shifts(x[0]), self.window.lo[0], self.window.hi(0)) else {
                continue;
            };
            v0.resize((b0 - a0 + 1) as usize, 0.0);
            spec.eval1_shifts(x[0], a0, &mut v0);
            if n == 1 {
                let off = (a0 - self.window.lo[0]) as usize;
                acc += v0.iter().zip(&c[off..off + v0.len()]).map(|(v, c)| v * c).sum::<f64>();
                continue;
            }
            let Some((a1, b1)) = clip(spec.active_shifts(x[1]), self.window.lo[1], self.window.hi(1)) else {
                continue;
            };
            v1.resize((b1 - a1 + 1) as usize, 0.0);
            spec.eval1_shifts(x[1], a1, &mut v1);
            let len1 = self.window.len[1];
            let off1 = (a1 - self.window.lo[1]) as usize;
            for (t0, &w0) in v0.iter().enumerate() {
                if w0 == 0.0 {
                    continue;
                }
                let row = ((a0 - self.window.lo[0]) as usize + t0) * len1 + off1;
                let s: f64 = v1.iter().zip(&c[row..row + v1.len()]).map(|(v, c)| v * c).sum();
                acc += w0 * s;
            }
        }
        acc
    }

    /// Values at a flat list of points (stride n).
    pub fn synthesize(&self, points: &[f64]) -> Vec<f64> {
        points.chunks(self.window.n).map(|p| self.eval(p)).collect()
    }

    /// Values on the tensor grid `axes[0] × axes[1]` (row-major, axis 0 outermost).
    pub fn eval_tensor(&self, axes: &[&[f64]]) -> Vec<f64> {
        let n = self.window.n;
        if n == 1 {
            return axes[0].iter().map(|&x| self.eval(&[x])).collect();
        }
        let (xs0, xs1) = (axes[0], axes[1]);
        let mut out = vec![0.0; xs0.len() * xs1.len()];
        let size = self.window.size();
        let len1 = self.window.len[1];
        for (i, spec) in self.gen.specs().iter().enumerate() {
            let c = &self.coeffs[i * size..(i + 1) * size];
            let cols: Vec<Option<(i64, Vec<f64>)>> = xs1
                .iter()
                .map(|&x| {
                    clip(spec.active_shifts(x), self.window.lo[1], self.window.hi(1)).map(|(a, b)| {
                        let mut v = vec![0.0; (b - a + 1) as usize];
                        spec.eval1_shifts(x, a, &mut v);
                        (a, v)
                    })
                })
                .collect();
            let mut g = vec![0.0; len1];
            let mut v0 = Vec::new();
            for (t, &x0) in xs0.iter().enumerate() {
                let Some((a0, b0)) = clip(spec.active_shifts(x0), self.window.lo[0], self.window.hi(0)) else {
                    continue;
                };
                v0.resize((b0 - a0 + 1) as usize, 0.0);
                spec.eval1_shifts(x0, a0, &mut v0);
                g.iter_mut().for_each(|v| *v = 0.0);
                for (s, &w) in v0.iter().enumerate() {
                    let row = ((a0 - self.window.lo[0]) as usize + s) * len1;
                    for (gk, ck) in g.iter_mut().zip(&c[row..row + len1]) {
                        *gk += w * ck;
                    }
                }
                for (u, col) in cols.iter().enumerate() {
                    if let Some((a1, v1)) = col {
                        let off = (a1 - self.window.lo[1]) as usize;
                        out[t * xs1.len() + u] += v1.iter().zip(&g[off..off + v1.len()]).map(|(a, b)| a * b).sum::<f64>();
                    }
                }
            }
        }
        out
    }

    /// `⟨f, g⟩` through the Gram sequence (exact up to the Gram quadrature).
    pub fn inner(&self, other: &SIFunction) -> f64 {
        let gen = &self.gen;
        let r = gen.r();
        let n = self.window.n;
        let sa = self.window.size();
        let sb = other.window.size();
        let mut acc = 0.0;
        for i in 0..r {
            for j in 0..r {
                let g = gen.gram1(i, j);
                for (ix, p) in self.window.points().enumerate() {
                    let ci = self.coeffs[i * sa + ix];
                    if ci == 0.0 {
                        continue;
                    }
                    // ⟨T_p φ_i, T_q φ_j⟩ = a_ij(q - p)
                    let lo0 = (p[0] + g.lo).max(other.window.lo[0]);
                    let hi0 = (p[0] + g.hi()).min(other.window.hi(0));
                    if n == 1 {
                        for q0 in lo0..=hi0 {
                            let cj = other.coeffs[j * sb + (q0 - other.window.lo[0]) as usize];
                            acc += ci * cj * g.get(q0 - p[0]);
                        }
                        continue;
                    }
                    let lo1 = (p[1] + g.lo).max(other.window.lo[1]);
                    let hi1 = (p[1] + g.hi()).min(other.window.hi(1));
                    for q0 in lo0..=hi0 {
                        let g0 = g.get(q0 - p[0]);
                        if g0 == 0.0 {
                            continue;
                        }
                        for q1 in lo1..=hi1 {
                            let ix2 = other.window.index([q0, q1]).unwrap();
                            acc += ci * other.coeffs[j * sb + ix2] * g0 * g.get(q1 - p[1]);
                        }
                    }
                }
            }
        }
        acc
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().max(0.0).sqrt()
    }

    /// Bounding interval of the support on each axis.
    pub fn support_box(&self) -> [(f64, f64); 2] {
        let specs = self.gen.specs();
        let lo = specs.iter().map(|s| s.support1().0).fold(f64::INFINITY, f64::min);
        let hi = specs.iter().map(|s| s.support1().1).fold(f64::NEG_INFINITY, f64::max);
        let mut out = [(0.0, 0.0); 2];
        for (a, o) in out.iter_mut().enumerate().take(self.window.n) {
            *o = (self.window.lo[a] as f64 + lo, self.window.hi(a) as f64 + hi);
        }
        out
    }

    /// `∫_B |f|²` over the box `[lo_a, hi_a]` by tensor quadrature.
    pub fn quad_energy(&self, bounds: &[(f64, f64)], grid: &GridSpec) -> f64 {
        let n = self.window.n;
        let sb = self.support_box();
        let mut nodes = Vec::new();
        for a in 0..n {
            let lo = bounds[a].0.max(sb[a].0);
            let hi = bounds[a].1.min(sb[a].1);
            if hi <= lo {
                return 0.0;
            }
            nodes.push(grid.interval(lo, hi));
        }
        let axes: Vec<&[f64]> = nodes.iter().map(|(x, _)| x.as_slice()).collect();
        let vals = self.eval_tensor(&axes);
        if n == 1 {
            return vals.iter().zip(&nodes[0].1).map(|(v, w)| w * v * v).sum();
        }
        let w1 = &nodes[1].1;
        let mut acc = 0.0;
        for (t, w0) in nodes[0].1.iter().enumerate() {
            let row = &vals[t * w1.len()..(t + 1) * w1.len()];
            acc += w0 * row.iter().zip(w1).map(|(v, w)| w * v * v).sum::<f64>();
        }
        acc
    }

    /// `‖f‖²` by quadrature over the support.
    pub fn quad_norm_sq(&self, grid: &GridSpec) -> f64 {
        let sb = self.support_box();
        self.quad_energy(&sb[..self.window.n], grid)
    }

    /// `(‖Q_R f‖², ‖f‖²)` with `C_R = [-R/2, R/2]^n`.
    pub fn energy_in_cube(&self, r_cube: f64, grid: &GridSpec) -> Result<CubeEnergy> {
        if !(r_cube > 0.0) {
            return Err(Error::Domain(format!("cube side {r_cube} must be positive")));
        }
        let b = vec![(-r_cube / 2.0, r_cube / 2.0); self.window.n];
        Ok(CubeEnergy { inside: self.quad_energy(&b, grid), total: self.quad_norm_sq(grid) })
    }
}

fn clip((a, b): (i64, i64), lo: i64, hi: i64) -> Option<(i64, i64)> {
    let a = a.max(lo);
    let b = b.min(hi);
    (a <= b).then_some((a, b))
}

/// Values of a function at the tensor grid of a [`GridSpec`].
#[derive(Debug, Clone)]
pub struct GridFunction {
    pub grid: GridSpec,
    pub n: usize,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub values: Vec<f64>,
}

impl GridFunction {
    pub fn sample(grid: GridSpec, n: usize, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        grid.validate()?;
        let (nodes, weights) = grid.axis();
        let values = if n == 1 {
            nodes.iter().map(|&x| f(&[x])).collect()
        } else {
            let mut v = Vec::with_capacity(nodes.len() * nodes.len());
            for &x0 in &nodes {
                for &x1 in &nodes {
                    v.push(f(&[x0, x1]));
                }
            }
            v
        };
        Ok(Self { grid, n, nodes, weights, values })
    }

    pub fn from_sifunction(f: &SIFunction, grid: GridSpec) -> Result<Self> {
        grid.validate()?;
        let (nodes, weights) = grid.axis();
        let axes: Vec<&[f64]> = vec![&nodes; f.window().n];
        let values = f.eval_tensor(&axes);
        Ok(Self { grid, n: f.window().n, nodes, weights, values })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gen(s: &str, n: usize) -> Arc<GeneratorSet> {
        Arc::new(GeneratorSet::parse(s, n).unwrap())
    }

    #[test]
    fn zero_function() {
        let f = SIFunction::zeros(gen("bspline:2", 1), Window::centered(1, 3));
        assert!(f.synthesize(&[0.1, 0.7, -2.2]).iter().all(|&v| v == 0.0));
        assert_eq!(f.norm_sq(), 0.0);
        let e = f.energy_in_cube(4.0, &GridSpec::default()).unwrap();
        assert_eq!(e.inside, 0.0);
    }

    #[test]
    fn single_shift_equals_generator() {
        let g = gen("bspline:3", 1);
        let f = SIFunction::shift(g.clone(), 0, [2, 0]);
        for t in 0..100 {
            let x = -1.0 + 0.07 * t as f64;
            assert!((f.eval(&[x]) - g.eval(0, &[x - 2.0])).abs() < 1e-15);
        }
    }

    #[test]
    fn box_combination() {
        let g = gen("box", 1);
        let f = SIFunction::new(g, Window::cube(1, 0, 1), vec![2.0, -1.0]).unwrap();
        assert_eq!(f.eval(&[1.5]), -1.0);
        assert_eq!(f.eval(&[0.5]), 2.0);
    }

    #[test]
    fn box_energy_half_cell() {
        let f = SIFunction::shift(gen("box", 1), 0, [0, 0]);
        let e = f.energy_in_cube(1.0, &GridSpec::default()).unwrap();
        assert!((e.inside - 0.5).abs() < 1e-14);
        assert!((e.total - 1.0).abs() < 1e-14);
    }

    #[test]
    fn contained_support_ratio_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let f = SIFunction::random(gen("bspline:2", 1), Window::cube(1, -3, 1), &mut rng);
        let e = f.energy_in_cube(8.0, &GridSpec::default()).unwrap();
        assert!((e.ratio() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gram_norm_matches_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for (s, n) in [("bspline:2", 1), ("bspline:3", 2), ("gauss:1:6", 1), ("box,box@0.5/2", 1)] {
            let f = SIFunction::random(gen(s, n), Window::cube(n, -2, 2), &mut rng);
            let q = f.quad_norm_sq(&GridSpec::default());
            assert!((f.norm_sq() - q).abs() < 1e-10, "{s}: {} vs {q}", f.norm_sq());
        }
    }

    #[test]
    fn tensor_eval_matches_pointwise() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let f = SIFunction::random(gen("bspline:2", 2), Window::cube(2, -2, 1), &mut rng);
        let xs = [-1.3, -0.2, 0.45, 1.9];
        let ys = [-2.1, 0.0, 0.8];
        let v = f.eval_tensor(&[&xs, &ys]);
        for (a, x) in xs.iter().enumerate() {
            for (b, y) in ys.iter().enumerate() {
                assert!((v[a * ys.len() + b] - f.eval(&[*x, *y])).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn axpy_and_trim() {
        let g = gen("bspline:2", 1);
        let a = SIFunction::shift(g.clone(), 0, [-3, 0]);
        let b = SIFunction::shift(g, 0, [4, 0]);
        let c = a.axpy(2.0, &b);
        assert_eq!(c.window().size(), 8);
        assert_eq!(c.coeff(0, [4, 0]), 2.0);
        let d = c.axpy(-1.0, &a).trimmed(1e-14);
        assert_eq!(d.window().size(), 1);
    }
}
