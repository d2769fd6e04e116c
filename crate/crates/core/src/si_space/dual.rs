//! Canonical dual generators and the reproducing kernel.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::FftPlanner;

use super::function::{GridFunction, SIFunction};
use super::generator::GeneratorSet;
use super::lattice::{sup_norm, Lattice, Window};
use super::quadrature::GridSpec;
use super::symbol::{hermitian_extrema, LatticeFilter, SymbolFn};
use crate::error::{Error, Result};

/// A generator system `Σ_{j,m} F_ij(m) T_m φ_j` obtained from a symbol filter.
#[derive(Debug, Clone)]
pub struct FilteredSet {
    gen: Arc<GeneratorSet>,
    filter: LatticeFilter,
    funcs: Vec<SIFunction>,
    grid: GridSpec,
}

impl FilteredSet {
    pub fn build(gen: Arc<GeneratorSet>, func: SymbolFn, grid: GridSpec) -> Result<Self> {
        grid.validate()?;
        let filter = LatticeFilter::from_symbol(&gen, func)?;
        Ok(Self::from_filter(gen, filter, grid))
    }

    pub fn from_filter(gen: Arc<GeneratorSet>, filter: LatticeFilter, grid: GridSpec) -> Self {
        let r = gen.r();
        let window = filter.window().clone();
        let funcs = (0..r)
            .map(|i| {
                let mut c = Vec::with_capacity(r * window.size());
                for j in 0..r {
                    c.extend(window.points().map(|m| filter.get(i, j, m)));
                }
                SIFunction::new(gen.clone(), window.clone(), c).expect("filter window matches")
            })
            .collect();
        Self { gen, filter, funcs, grid }
    }

    pub fn gen(&self) -> &Arc<GeneratorSet> {
        &self.gen
    }

    pub fn filter(&self) -> &LatticeFilter {
        &self.filter
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn h(&self) -> f64 {
        self.grid.h()
    }

    /// Member i as an element of V(Φ).
    pub fn function(&self, i: usize) -> &SIFunction {
        &self.funcs[i]
    }

    pub fn eval(&self, i: usize, x: &[f64]) -> f64 {
        self.funcs[i].eval(x)
    }

    /// Sup-norm support radius of the members (filter radius plus generator support).
    pub fn support_radius(&self) -> f64 {
        self.filter.radius() as f64 + self.gen.support_radius()
    }

    /// Profile i sampled on `grid`.
    pub fn sample(&self, i: usize, grid: GridSpec) -> Result<GridFunction> {
        GridFunction::from_sifunction(&self.funcs[i], grid)
    }

    /// `max |⟨a_i, T_k b_j⟩ - δ_ij δ_k0|` over `‖k‖∞ ≤ kmax`, by tensor quadrature
    /// on this set's grid, where `a` is `other` (or the generators when `None`).
    pub fn pairing_defect(&self, other: Option<&FilteredSet>, kmax: i64) -> f64 {
        let r = self.gen.r();
        let n = self.gen.dim();
        let mut worst: f64 = 0.0;
        for i in 0..r {
            let a = match other {
                Some(o) => o.funcs[i].clone(),
                None => SIFunction::shift(self.gen.clone(), i, [0, 0]),
            };
            for j in 0..r {
                for k in Window::centered(n, kmax).points() {
                    let b = shifted(&self.funcs[j], k);
                    let v = quad_inner(&a, &b, &self.grid);
                    let want = if i == j && sup_norm(n, k) == 0 { 1.0 } else { 0.0 };
                    worst = worst.max((v - want).abs());
                }
            }
        }
        worst
    }

    /// Largest eigenvalue of the Gram symbol of the members, `F̂ Â F̂*`.
    pub fn upper_frame_bound(&self, grid_points: usize) -> f64 {
        let gen = &self.gen;
        let r = gen.r();
        let rad = self.filter.radius();
        let mut f = grid_points.next_power_of_two();
        while (f as i64) < 4 * (rad + gen.gram_radius()) {
            f *= 2;
        }
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_forward(f);
        let transform = |seq: &dyn Fn(i64) -> f64, lo: i64, hi: i64| {
            let mut buf = vec![Complex64::new(0.0, 0.0); f];
            for m in lo..=hi {
                buf[m.rem_euclid(f as i64) as usize] += seq(m);
            }
            fft.process(&mut buf);
            buf
        };
        if gen.dim() == 1 || r == 1 {
            let mut fh = Vec::with_capacity(r * r);
            let mut ah = Vec::with_capacity(r * r);
            for p in 0..r * r {
                let (i, j) = (p / r, p % r);
                let fcoef = |m: i64| match self.filter.separable_factor() {
                    Some(c) => c[(m + rad) as usize],
                    None => self.filter.get(i, j, [m, 0]),
                };
                fh.push(transform(&fcoef, -rad, rad));
                let g = gen.gram1(i, j);
                ah.push(transform(&|m| g.get(m), g.lo, g.hi()));
            }
            let mut best: f64 = 0.0;
            for t in 0..f {
                let fm = DMatrix::from_fn(r, r, |i, j| fh[i * r + j][t]);
                let am = DMatrix::from_fn(r, r, |i, j| ah[i * r + j][t]);
                let d = &fm * am * fm.adjoint();
                best = best.max(hermitian_extrema(&d).1);
            }
            return if gen.dim() == 2 { best * best } else { best };
        }
        // non-separable two-dimensional filter: coarse tensor grid
        let g = 256usize;
        let mut best: f64 = 0.0;
        for a in 0..g {
            for b in 0..g {
                let xi = [a as f64 / g as f64, b as f64 / g as f64];
                let fm = DMatrix::from_fn(r, r, |i, j| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for m in self.filter.window().points() {
                        let c = self.filter.get(i, j, m);
                        if c != 0.0 {
                            let ph = -2.0 * std::f64::consts::PI * (m[0] as f64 * xi[0] + m[1] as f64 * xi[1]);
                            acc += c * Complex64::from_polar(1.0, ph);
                        }
                    }
                    acc
                });
                let am = super::symbol::symbol_matrix(gen, &xi);
                best = best.max(hermitian_extrema(&(&fm * am * fm.adjoint())).1);
            }
        }
        best
    }
}

/// `T_k f`.
pub fn shifted(f: &SIFunction, k: Lattice) -> SIFunction {
    let w = f.window();
    let nw = Window::from_bounds(w.n, [w.lo[0] + k[0], w.lo[1] + k[1]], [w.hi(0) + k[0], w.hi(1) + k[1]]);
    SIFunction::new(f.gen().clone(), nw, f.coeffs().to_vec()).expect("same size")
}

/// `⟨a, b⟩` by tensor quadrature over the intersection of the supports.
pub fn quad_inner(a: &SIFunction, b: &SIFunction, grid: &GridSpec) -> f64 {
    let n = a.window().n;
    let (sa, sb) = (a.support_box(), b.support_box());
    let mut nodes = Vec::new();
    for ax in 0..n {
        let lo = sa[ax].0.max(sb[ax].0);
        let hi = sa[ax].1.min(sb[ax].1);
        if hi <= lo {
            return 0.0;
        }
        nodes.push(grid.interval(lo, hi));
    }
    let axes: Vec<&[f64]> = nodes.iter().map(|(x, _)| x.as_slice()).collect();
    let va = a.eval_tensor(&axes);
    let vb = b.eval_tensor(&axes);
    if n == 1 {
        return va.iter().zip(&vb).zip(&nodes[0].1).map(|((x, y), w)| w * x * y).sum();
    }
    let w1 = &nodes[1].1;
    let mut acc = 0.0;
    for (t, w0) in nodes[0].1.iter().enumerate() {
        for (u, w) in w1.iter().enumerate() {
            let ix = t * w1.len() + u;
            acc += w0 * w * va[ix] * vb[ix];
        }
    }
    acc
}

/// Canonical dual `φ̃_i = Σ_{j,m} B_ij(m) T_m φ_j` with `B̂ = Â^{-1}`.
#[derive(Debug, Clone)]
pub struct DualGeneratorSet {
    inner: FilteredSet,
}

impl std::ops::Deref for DualGeneratorSet {
    type Target = FilteredSet;
    fn deref(&self) -> &FilteredSet {
        &self.inner
    }
}

pub fn compute_dual(gen: Arc<GeneratorSet>, grid: GridSpec) -> Result<DualGeneratorSet> {
    Ok(DualGeneratorSet { inner: FilteredSet::build(gen, SymbolFn::Inverse, grid)? })
}

impl DualGeneratorSet {
    /// Biorthogonality defect `max |⟨φ_i, T_k φ̃_j⟩ - δ_ij δ_k0|` by quadrature.
    pub fn biorthogonality_defect(&self, kmax: i64) -> f64 {
        self.inner.pairing_defect(None, kmax)
    }

    /// Biorthogonality through the Gram sequence (no quadrature on the duals).
    pub fn biorthogonality_defect_exact(&self, kmax: i64) -> f64 {
        let gen = &self.inner.gen;
        let n = gen.dim();
        let mut worst: f64 = 0.0;
        for i in 0..gen.r() {
            let a = SIFunction::shift(gen.clone(), i, [0, 0]);
            for j in 0..gen.r() {
                for k in Window::centered(n, kmax).points() {
                    let v = a.inner(&shifted(&self.inner.funcs[j], k));
                    let want = if i == j && sup_norm(n, k) == 0 { 1.0 } else { 0.0 };
                    worst = worst.max((v - want).abs());
                }
            }
        }
        worst
    }

    /// Reproducing kernel `v_x = Σ_{i,k} φ_i(x - k) T_k φ̃_i` in generator coordinates.
    pub fn kernel(&self, x: &[f64]) -> SIFunction {
        let gen = &self.inner.gen;
        let n = gen.dim();
        let r = gen.r();
        let filter = &self.inner.filter;
        let rad = filter.radius();
        // active shifts k with φ_i(x - k) ≠ 0
        let mut klo = [i64::MAX; 2];
        let mut khi = [i64::MIN; 2];
        for s in gen.specs() {
            for a in 0..n {
                let (lo, hi) = s.active_shifts(x[a]);
                klo[a] = klo[a].min(lo);
                khi[a] = khi[a].max(hi);
            }
        }
        let kwin = Window::from_bounds(n, klo, khi);
        let pwin = Window::from_bounds(n, [klo[0] - rad, klo[1] - rad], [khi[0] + rad, khi[1] + rad]);
        let mut f = SIFunction::zeros(gen.clone(), pwin.clone());
        let size = pwin.size();
        let mut c = vec![0.0; r * size];
        for i in 0..r {
            for k in kwin.points() {
                let xk: Vec<f64> = (0..n).map(|a| x[a] - k[a] as f64).collect();
                let w = gen.eval(i, &xk);
                if w == 0.0 {
                    continue;
                }
                for j in 0..r {
                    for m in filter.window().points() {
                        let b = filter.get(i, j, m);
                        if b == 0.0 {
                            continue;
                        }
                        let p = [k[0] + m[0], k[1] + m[1]];
                        c[j * size + pwin.index(p).unwrap()] += w * b;
                    }
                }
            }
        }
        for j in 0..r {
            for (ix, p) in pwin.points().enumerate() {
                if c[j * size + ix] != 0.0 {
                    f.set_coeff(j, p, c[j * size + ix]).unwrap();
                }
            }
        }
        f
    }

    /// `‖v_x‖₂` through the Gram sequence.
    pub fn kernel_norm(&self, x: &[f64]) -> f64 {
        self.kernel(x).norm()
    }

    /// `‖v_x‖₂` by quadrature over the kernel's support.
    pub fn kernel_norm_direct(&self, x: &[f64], grid: &GridSpec) -> f64 {
        self.kernel(x).quad_norm_sq(grid).max(0.0).sqrt()
    }

    /// Coefficients `⟨f, T_m φ̃_i⟩` for `‖m‖∞ ≤ floor(radius)` from grid samples.
    ///
    /// Uses `⟨f, T_m φ̃_i⟩ = Σ_{j,k} B_ij(k) ⟨f, T_{m+k} φ_j⟩` with the generator
    /// pairings computed by separable quadrature.
    pub fn project(&self, samples: &GridFunction) -> Result<SIFunction> {
        let gen = &self.inner.gen;
        let n = gen.dim();
        let r = gen.r();
        let filter = &self.inner.filter;
        let mwin = Window::centered(n, samples.grid.radius.floor() as i64);
        let g = analyze(gen, samples)?;
        let msize = mwin.size();
        let mut c = vec![0.0; r * msize];
        for i in 0..r {
            for (ix, m) in mwin.points().enumerate() {
                let mut acc = 0.0;
                for j in 0..r {
                    for k in filter.window().points() {
                        let b = filter.get(i, j, k);
                        if b != 0.0 {
                            acc += b * g.coeff(j, [m[0] + k[0], m[1] + k[1]]);
                        }
                    }
                }
                c[i * msize + ix] = acc;
            }
        }
        let total: f64 = c.iter().map(|v| v * v).sum();
        let boundary: f64 = (0..r)
            .flat_map(|i| mwin.points().enumerate().map(move |(ix, m)| (i, ix, m)))
            .filter(|(_, _, m)| mwin.on_boundary(*m))
            .map(|(i, ix, _)| c[i * msize + ix].powi(2))
            .sum();
        if total > 0.0 && boundary > 1e-6 * total {
            return Err(Error::WindowTooSmall(boundary / total));
        }
        SIFunction::new(gen.clone(), mwin, c)
    }
}

/// Analysis coefficients `⟨f, T_p φ_j⟩` of grid samples, for every shift
/// overlapping the sampling window, by separable quadrature.
pub fn analyze(gen: &Arc<GeneratorSet>, samples: &GridFunction) -> Result<SIFunction> {
    let n = gen.dim();
    let r = gen.r();
    if samples.n != n {
        return Err(Error::Domain("sample dimension differs from the generators".into()));
    }
    let big = samples.grid.radius;
    let lo = gen.specs().iter().map(|s| s.support1().0).fold(f64::INFINITY, f64::min);
    let hi = gen.specs().iter().map(|s| s.support1().1).fold(f64::NEG_INFINITY, f64::max);
    let plo = (-big - hi).floor() as i64;
    let phi = (big - lo).ceil() as i64;
    let np = (phi - plo + 1) as usize;
    let pwin = Window::cube(n, plo, phi);
    let gsize = pwin.size();
    let nodes = &samples.nodes;
    let mut g = vec![0.0; r * gsize];
    for (j, spec) in gen.specs().iter().enumerate() {
        // Q[node, p] = w(node) φ_j(x - p)
        let mut q = DMatrix::<f64>::zeros(nodes.len(), np);
        let mut buf = vec![0.0; np];
        for (t, (&x, &w)) in nodes.iter().zip(&samples.weights).enumerate() {
            spec.eval1_shifts(x, plo, &mut buf);
            for (pidx, v) in buf.iter().enumerate() {
                q[(t, pidx)] = w * v;
            }
        }
        if n == 1 {
            let v = q.transpose() * nalgebra::DVector::from_column_slice(&samples.values);
            g[j * gsize..(j + 1) * gsize].copy_from_slice(v.as_slice());
        } else {
            let fm = DMatrix::from_row_slice(nodes.len(), nodes.len(), &samples.values);
            let v = q.transpose() * fm * &q;
            for a in 0..np {
                for b in 0..np {
                    g[j * gsize + a * np + b] = v[(a, b)];
                }
            }
        }
    }
    SIFunction::new(gen.clone(), pwin, g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn setup(s: &str, n: usize) -> (Arc<GeneratorSet>, DualGeneratorSet) {
        let g = Arc::new(GeneratorSet::parse(s, n).unwrap());
        let d = compute_dual(g.clone(), GridSpec::default()).unwrap();
        (g, d)
    }

    #[test]
    fn box_is_self_dual() {
        let (g, d) = setup("box", 1);
        for t in 0..200 {
            let x = -1.0 + t as f64 * 0.0137;
            assert!((d.eval(0, &[x]) - g.eval(0, &[x])).abs() < 1e-12);
        }
    }

    #[test]
    fn hat_biorthogonal() {
        let (_, d) = setup("bspline:2", 1);
        let h = d.h();
        assert!(d.biorthogonality_defect(4) < 10.0 * h * h);
        assert!(d.biorthogonality_defect(4) < 1e-6);
        assert!(d.biorthogonality_defect_exact(4) < 1e-10);
    }

    #[test]
    fn two_dimensional_and_two_generator_duals() {
        let (_, d) = setup("bspline:2", 2);
        assert!(d.biorthogonality_defect_exact(2) < 1e-10);
        let (_, d) = setup("box,box@0.5/2", 1);
        assert!(d.biorthogonality_defect(3) < 1e-10);
    }

    #[test]
    fn box_kernel_norm_one() {
        let (_, d) = setup("box", 1);
        for &x in &[0.0, 0.3, 0.999, -4.2] {
            assert!((d.kernel_norm(&[x]) - 1.0).abs() < 1e-12);
        }
        let (_, d) = setup("box", 2);
        assert!((d.kernel_norm(&[0.3, -0.8]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kernel_periodic_and_matches_quadrature() {
        let (_, d) = setup("bspline:2", 1);
        let grid = GridSpec::default();
        for &x in &[0.1, 0.5, 0.77] {
            let a = d.kernel_norm(&[x]);
            let b = d.kernel_norm(&[x + 3.0]);
            assert!((a - b).abs() < 1e-10);
            assert!((a - d.kernel_norm_direct(&[x], &grid)).abs() < 1e-9);
        }
    }

    #[test]
    fn kernel_reproduces_point_values() {
        let (g, d) = setup("bspline:3", 1);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let f = SIFunction::random(g, Window::cube(1, -3, 3), &mut rng);
        for &x in &[-1.7, 0.0, 0.4, 2.25] {
            let v = d.kernel(&[x]);
            assert!((f.inner(&v) - f.eval(&[x])).abs() < 1e-10);
        }
    }

    #[test]
    fn project_recovers_box_coefficients() {
        let (g, d) = setup("box", 1);
        let f = SIFunction::new(g, Window::cube(1, -2, 1), vec![1.0, -0.5, 2.0, 0.25]).unwrap();
        let grid = GridSpec::new(7, 1, 4.0).unwrap();
        let s = GridFunction::from_sifunction(&f, grid).unwrap();
        let p = d.project(&s).unwrap();
        for k in -4..=4 {
            assert!((p.coeff(0, [k, 0]) - f.coeff(0, [k, 0])).abs() < 1e-10);
        }
    }

    #[test]
    fn project_zero() {
        let (_, d) = setup("bspline:2", 1);
        let s = GridFunction::sample(GridSpec::default(), 1, |_| 0.0).unwrap();
        assert!(d.project(&s).unwrap().coeffs().iter().all(|&c| c == 0.0));
    }

    #[test]
    fn project_reports_small_window() {
        let (_, d) = setup("bspline:2", 1);
        let grid = GridSpec::new(6, 2, 3.0).unwrap();
        let s = GridFunction::sample(grid, 1, |x| (x[0] * 2.0).sin()).unwrap();
        assert!(matches!(d.project(&s), Err(Error::WindowTooSmall(_))));
    }
}
