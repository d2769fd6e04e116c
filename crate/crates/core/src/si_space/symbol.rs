//! Gramian symbol `Â(ξ) = Σ_m ⟨φ_i, T_m φ_j⟩ e^{-2πi m·ξ}` and matrix functions of it.
//!
//! By Poisson summation this equals the periodized product of Fourier
//! transforms, so its eigenvalue range gives the frame bounds of the shifts.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::generator::{GeneratorSet, GramSeq, RIESZ_FLOOR};
use super::lattice::{Lattice, Window};
use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};

pub fn symbol1(g: &GramSeq, xi: f64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for (t, &a) in g.vals.iter().enumerate() {
        if a != 0.0 {
            let m = (g.lo + t as i64) as f64;
            acc += a * Complex64::from_polar(1.0, -2.0 * std::f64::consts::PI * m * xi);
        }
    }
    acc
}

/// `Â(ξ)` as an r×r Hermitian matrix.
pub fn symbol_matrix(set: &GeneratorSet, xi: &[f64]) -> DMatrix<Complex64> {
    let r = set.r();
    DMatrix::from_fn(r, r, |i, j| {
        let g = set.gram1(i, j);
        let mut v = symbol1(g, xi[0]);
        if set.dim() == 2 {
            v *= symbol1(g, xi[1]);
        }
        v
    })
}

/// Extreme eigenvalues of a Hermitian matrix.
pub fn hermitian_extrema(m: &DMatrix<Complex64>) -> (f64, f64) {
    if m.nrows() == 1 {
        let v = m[(0, 0)].re;
        return (v, v);
    }
    let e = m.clone().symmetric_eigenvalues();
    let lo = e.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = e.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

fn extrema_at(set: &GeneratorSet, xi: &[f64]) -> (f64, f64) {
    hermitian_extrema(&symbol_matrix(set, xi))
}

/// Symbol of one Gram sequence on the grid `f/F` via FFT.
fn symbol_grid1(g: &GramSeq, f: usize, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
    let mut buf = vec![Complex64::new(0.0, 0.0); f];
    for (t, &a) in g.vals.iter().enumerate() {
        let m = g.lo + t as i64;
        buf[m.rem_euclid(f as i64) as usize] += a;
    }
    planner.plan_fft_forward(f).process(&mut buf);
    buf
}

fn pair_grids(set: &GeneratorSet, f: usize) -> Vec<Vec<Complex64>> {
    let r = set.r();
    let mut planner = FftPlanner::new();
    (0..r * r).map(|p| symbol_grid1(set.gram1(p / r, p % r), f, &mut planner)).collect()
}

/// Grid extrema `(min, max)` of the symbol eigenvalues, `f` points per axis.
pub fn scan_extrema(set: &GeneratorSet, f: usize) -> (f64, f64) {
    let (lo, hi, _, _) = scan_with_argext(set, f);
    (lo, hi)
}

fn scan_with_argext(set: &GeneratorSet, f: usize) -> (f64, f64, [f64; 2], [f64; 2]) {
    let r = set.r();
    let grids = pair_grids(set, f);
    let one_d = |fi: usize| -> (f64, f64) {
        if r == 1 {
            let v = grids[0][fi].re;
            (v, v)
        } else {
            hermitian_extrema(&DMatrix::from_fn(r, r, |i, j| grids[i * r + j][fi]))
        }
    };
    let xi_of = |fi: usize| fi as f64 / f as f64;
    if set.dim() == 1 || r == 1 {
        let ext = map_indexed(f, Execution::Parallel, one_d);
        let (mut lo, mut hi, mut alo, mut ahi) = (f64::INFINITY, f64::NEG_INFINITY, 0, 0);
        for (fi, &(a, b)) in ext.iter().enumerate() {
            if a < lo {
                lo = a;
                alo = fi;
            }
            if b > hi {
                hi = b;
                ahi = fi;
            }
        }
        if set.dim() == 2 {
            // positive scalar symbol: the tensor product's extrema are squares
            return (lo * lo, hi * hi, [xi_of(alo), xi_of(alo)], [xi_of(ahi), xi_of(ahi)]);
        }
        return (lo, hi, [xi_of(alo), 0.0], [xi_of(ahi), 0.0]);
    }
    let rows = map_indexed(f, Execution::Parallel, |f1| {
        let mut best = (f64::INFINITY, f64::NEG_INFINITY, 0usize, 0usize);
        for f2 in 0..f {
            let m = DMatrix::from_fn(r, r, |i, j| grids[i * r + j][f1] * grids[i * r + j][f2]);
            let (a, b) = hermitian_extrema(&m);
            if a < best.0 {
                best.0 = a;
                best.2 = f2;
            }
            if b > best.1 {
                best.1 = b;
                best.3 = f2;
            }
        }
        best
    });
    let (mut lo, mut hi, mut alo, mut ahi) = (f64::INFINITY, f64::NEG_INFINITY, [0.0; 2], [0.0; 2]);
    for (f1, b) in rows.iter().enumerate() {
        if b.0 < lo {
            lo = b.0;
            alo = [xi_of(f1), xi_of(b.2)];
        }
        if b.1 > hi {
            hi = b.1;
            ahi = [xi_of(f1), xi_of(b.3)];
        }
    }
    (lo, hi, alo, ahi)
}

/// Golden-section minimization on `[a, b]`, returning `(argmin, min)`.
fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..100 {
        if (b - a).abs() < 1e-12 {
            break;
        }
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    if fc < fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Refine an extremum near `xi` by alternating golden sections along the axes.
fn refine(set: &GeneratorSet, xi: [f64; 2], step: f64, maximize: bool) -> f64 {
    let sign = if maximize { -1.0 } else { 1.0 };
    let val = |p: [f64; 2]| {
        let (lo, hi) = extrema_at(set, &p);
        sign * if maximize { hi } else { lo }
    };
    let mut p = xi;
    let mut best = val(p);
    let sweeps = if set.dim() == 1 { 1 } else { 3 };
    for _ in 0..sweeps {
        for axis in 0..set.dim() {
            let q = p;
            let (t, v) = golden_min(
                |t| {
                    let mut z = q;
                    z[axis] = t;
                    val(z)
                },
                q[axis] - step,
                q[axis] + step,
            );
            if v < best {
                best = v;
                p[axis] = t;
            }
        }
    }
    sign * best
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameBounds {
    pub a_frame: f64,
    pub c0: f64,
    pub grid_points: usize,
    /// Largest change of either bound when the grid is doubled.
    pub grid_doubling_delta: f64,
}

/// Symbol eigenvalue extrema over a grid, refined locally.
pub fn frame_bounds(set: &GeneratorSet, grid_points: usize) -> Result<FrameBounds> {
    if grid_points < 2048 {
        return Err(Error::Domain(format!("frequency grid {grid_points} below 2048 points")));
    }
    let one = |f: usize| -> (f64, f64) {
        let (lo, hi, alo, ahi) = scan_with_argext(set, f);
        let step = 1.0 / f as f64;
        if set.dim() == 2 && set.r() == 1 {
            let lo1 = refine_1d_factor(set, alo[0], step, false);
            let hi1 = refine_1d_factor(set, ahi[0], step, true);
            return (lo1.min(lo.sqrt()).powi(2), hi1.max(hi.sqrt()).powi(2));
        }
        (refine(set, alo, step, false).min(lo), refine(set, ahi, step, true).max(hi))
    };
    let (a, c) = one(grid_points);
    let (a2, c2) = one(2 * grid_points);
    if !(a >= RIESZ_FLOOR) {
        return Err(Error::RieszViolation(a));
    }
    Ok(FrameBounds { a_frame: a, c0: c, grid_points, grid_doubling_delta: (a - a2).abs().max((c - c2).abs()) })
}

fn refine_1d_factor(set: &GeneratorSet, xi: f64, step: f64, maximize: bool) -> f64 {
    let g = set.gram1(0, 0);
    let sign = if maximize { -1.0 } else { 1.0 };
    sign * golden_min(|t| sign * symbol1(g, t).re, xi - step, xi + step).1
}

/// Matrix function applied to the symbol before transforming back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SymbolFn {
    Inverse,
    InverseSqrt,
}

impl SymbolFn {
    fn apply(self, x: f64) -> f64 {
        match self {
            SymbolFn::Inverse => 1.0 / x,
            SymbolFn::InverseSqrt => 1.0 / x.sqrt(),
        }
    }

    fn apply_matrix(self, m: DMatrix<Complex64>) -> (DMatrix<Complex64>, f64) {
        if m.nrows() == 1 {
            let v = m[(0, 0)].re;
            return (DMatrix::from_element(1, 1, Complex64::new(self.apply(v), 0.0)), v);
        }
        let e = m.symmetric_eigen();
        let lmin = e.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
        let d = DMatrix::from_diagonal(&e.eigenvalues.map(|l| Complex64::new(self.apply(l), 0.0)));
        (&e.eigenvectors * d * e.eigenvectors.adjoint(), lmin)
    }
}

/// Relative coefficient floor used when truncating filters.
pub const FILTER_TOL: f64 = 1e-12;
const FREQ_1D: usize = 1 << 16;
const FREQ_2D: usize = 256;

#[derive(Debug, Clone, Serialize, Deserialize)]
enum FilterData {
    /// r = 1, n = 2: `c(m) = c1(m_0) c1(m_1)`.
    Separable(Vec<f64>),
    /// `(i r + j) * window.size() + index(m)`.
    Dense(Vec<f64>),
}

/// Real matrix-valued sequence `F_ij(m)` on `[-radius, radius]^n`, the
/// coefficients of a function of the symbol.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LatticeFilter {
    n: usize,
    r: usize,
    radius: i64,
    window: Window,
    data: FilterData,
    /// Largest dropped coefficient relative to the largest kept one.
    pub tail: f64,
    /// Smallest symbol eigenvalue seen on the transform grid.
    pub symbol_min: f64,
}

impl LatticeFilter {
    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn r(&self) -> usize {
        self.r
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize, m: Lattice) -> f64 {
        match &self.data {
            FilterData::Separable(c) => {
                let a = m[0] + self.radius;
                let b = m[1] + self.radius;
                let len = c.len() as i64;
                if a < 0 || b < 0 || a >= len || b >= len {
                    0.0
                } else {
                    c[a as usize] * c[b as usize]
                }
            }
            FilterData::Dense(c) => match self.window.index(m) {
                Some(ix) => c[(i * self.r + j) * self.window.size() + ix],
                None => 0.0,
            },
        }
    }

    /// One-axis factor `c1` with `c(m) = c1(m_0) c1(m_1)` for tensor filters.
    pub fn separable_factor(&self) -> Option<&[f64]> {
        match &self.data {
            FilterData::Separable(c) => Some(c),
            FilterData::Dense(_) => None,
        }
    }

    /// The identity filter (`δ_ij δ_m0`).
    pub fn identity(n: usize, r: usize) -> Self {
        let window = Window::centered(n, 0);
        let mut c = vec![0.0; r * r];
        for i in 0..r {
            c[i * r + i] = 1.0;
        }
        Self { n, r, radius: 0, window, data: FilterData::Dense(c), tail: 0.0, symbol_min: 1.0 }
    }

    /// Coefficients of `f(Â)` where `f` is the inverse or inverse square root.
    pub fn from_symbol(set: &GeneratorSet, func: SymbolFn) -> Result<Self> {
        let n = set.dim();
        let r = set.r();
        if n == 1 || r == 1 {
            let (c1, rad, tail, lmin) = filter_1d(set, func)?;
            if n == 1 {
                let window = Window::centered(1, rad);
                return Ok(Self { n, r, radius: rad, window, data: FilterData::Dense(c1), tail, symbol_min: lmin });
            }
            let window = Window::centered(2, rad);
            return Ok(Self { n, r, radius: rad, window, data: FilterData::Separable(c1), tail, symbol_min: lmin * lmin });
        }
        filter_2d(set, func)
    }
}

fn check_floor(lmin: f64) -> Result<()> {
    if !(lmin >= RIESZ_FLOOR) {
        return Err(Error::NearSingularSymbol(lmin));
    }
    Ok(())
}

/// Truncate a periodic coefficient array, returning `(radius, tail)`.
fn truncation_radius(max_abs: impl Fn(i64) -> f64, half: i64) -> Result<(i64, f64)> {
    let cmax = (-half + 1..half).map(&max_abs).fold(0.0, f64::max);
    let mut rad = 0;
    for m in (0..half).rev() {
        if max_abs(m).max(max_abs(-m)) > FILTER_TOL * cmax {
            rad = m;
            break;
        }
    }
    if rad >= half / 2 {
        return Err(Error::Numerical(format!("filter coefficients do not decay within the transform grid (radius {rad})")));
    }
    let tail = (rad + 1..half).map(|m| max_abs(m).max(max_abs(-m))).fold(0.0, f64::max) / cmax;
    Ok((rad, tail))
}

fn filter_1d(set: &GeneratorSet, func: SymbolFn) -> Result<(Vec<f64>, i64, f64, f64)> {
    let r = if set.dim() == 1 { set.r() } else { 1 };
    let mut f = FREQ_1D;
    while (f as i64) < 8 * set.gram_radius() {
        f *= 2;
    }
    let mut planner = FftPlanner::new();
    let grids: Vec<Vec<Complex64>> = (0..r * r).map(|p| symbol_grid1(set.gram1(p / r, p % r), f, &mut planner)).collect();
    let vals = map_indexed(f, Execution::Parallel, |fi| func.apply_matrix(DMatrix::from_fn(r, r, |i, j| grids[i * r + j][fi])));
    let lmin = vals.iter().map(|v| v.1).fold(f64::INFINITY, f64::min);
    check_floor(lmin)?;
    let inv = planner.plan_fft_inverse(f);
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(r * r);
    for p in 0..r * r {
        let mut buf: Vec<Complex64> = vals.iter().map(|v| v.0[(p / r, p % r)]).collect();
        inv.process(&mut buf);
        coeffs.push(buf.iter().map(|c| c.re / f as f64).collect());
    }
    let fi = f as i64;
    let max_abs = |m: i64| {
        let ix = m.rem_euclid(fi) as usize;
        coeffs.iter().map(|c| c[ix].abs()).fold(0.0, f64::max)
    };
    let (rad, tail) = truncation_radius(max_abs, fi / 2)?;
    let size = (2 * rad + 1) as usize;
    let mut out = vec![0.0; r * r * size];
    for p in 0..r * r {
        for m in -rad..=rad {
            out[p * size + (m + rad) as usize] = coeffs[p][m.rem_euclid(fi) as usize];
        }
    }
    Ok((out, rad, tail, lmin))
}

fn filter_2d(set: &GeneratorSet, func: SymbolFn) -> Result<LatticeFilter> {
    let r = set.r();
    let mut f = FREQ_2D;
    while (f as i64) < 8 * set.gram_radius() {
        f *= 2;
    }
    let g1 = pair_grids(set, f);
    let rows = map_indexed(f, Execution::Parallel, |f1| {
        (0..f).map(|f2| func.apply_matrix(DMatrix::from_fn(r, r, |i, j| g1[i * r + j][f1] * g1[i * r + j][f2]))).collect::<Vec<_>>()
    });
    let lmin = rows.iter().flatten().map(|v| v.1).fold(f64::INFINITY, f64::min);
    check_floor(lmin)?;
    let mut planner = FftPlanner::new();
    let inv = planner.plan_fft_inverse(f);
    let mut coeffs: Vec<Vec<f64>> = Vec::with_capacity(r * r);
    let norm = (f * f) as f64;
    for p in 0..r * r {
        let mut grid: Vec<Complex64> = Vec::with_capacity(f * f);
        for row in &rows {
            grid.extend(row.iter().map(|v| v.0[(p / r, p % r)]));
        }
        for row in grid.chunks_mut(f) {
            inv.process(row);
        }
        let mut col = vec![Complex64::new(0.0, 0.0); f];
        for c in 0..f {
            for t in 0..f {
                col[t] = grid[t * f + c];
            }
            inv.process(&mut col);
            for t in 0..f {
                grid[t * f + c] = col[t];
            }
        }
        coeffs.push(grid.iter().map(|c| c.re / norm).collect());
    }
    let fi = f as i64;
    let at = |p: usize, m0: i64, m1: i64| coeffs[p][(m0.rem_euclid(fi) * fi + m1.rem_euclid(fi)) as usize];
    let half = fi / 2;
    // sup over the ring of sup-norm m
    let ring = |m: i64| {
        let m = m.abs();
        let mut best: f64 = 0.0;
        for p in 0..r * r {
            for t in -m..=m {
                for (a, b) in [(m, t), (-m, t), (t, m), (t, -m)] {
                    best = best.max(at(p, a, b).abs());
                }
            }
        }
        best
    };
    let (rad, tail) = truncation_radius(ring, half)?;
    let window = Window::centered(2, rad);
    let size = window.size();
    let mut out = vec![0.0; r * r * size];
    for p in 0..r * r {
        for (ix, k) in window.points().enumerate() {
            out[p * size + ix] = at(p, k[0], k[1]);
        }
    }
    Ok(LatticeFilter { n: 2, r, radius: rad, window, data: FilterData::Dense(out), tail, symbol_min: lmin })
}
