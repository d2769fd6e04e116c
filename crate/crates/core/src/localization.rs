//! Spectrum of the localization operator `A_R = P_Φ Q_R P_Φ`.
//!
//! Rows are indexed by shifts `T_k e_i` of an orthonormal basis of V(Φ). The
//! matrix factors as `M = Hᵀ W H` where `W` is the Gram matrix over `C_R` of
//! the generator shifts meeting the cube and `H` expands the orthonormal
//! basis in those shifts, so eigenpairs come from an `|S| × |S|` problem.

use std::sync::{Arc, OnceLock};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::si_space::dual::shifted;
use crate::si_space::lattice::sup_norm;
use crate::si_space::{FilteredSet, GeneratorSet, GridSpec, Lattice, SIFunction, SymbolFn, Window};

/// Orthonormal generators `e_i = Σ_{j,m} H_ij(m) T_m φ_j` with `Ĥ = Â^{-1/2}`.
#[derive(Debug, Clone)]
pub struct OrthonormalBasisSet {
    inner: FilteredSet,
}

impl std::ops::Deref for OrthonormalBasisSet {
    type Target = FilteredSet;
    fn deref(&self) -> &FilteredSet {
        &self.inner
    }
}

pub fn orthonormalize(gen: Arc<GeneratorSet>, grid: GridSpec) -> Result<OrthonormalBasisSet> {
    Ok(OrthonormalBasisSet { inner: FilteredSet::build(gen, SymbolFn::InverseSqrt, grid)? })
}

impl OrthonormalBasisSet {
    /// `max |⟨e_i, T_k e_j⟩ - δ_ij δ_k0|` over `‖k‖∞ ≤ kmax` by quadrature.
    pub fn gram_defect(&self, kmax: i64) -> f64 {
        self.inner.pairing_defect(Some(&self.inner), kmax)
    }

    /// Same through the Gram sequence of the generators.
    pub fn gram_defect_exact(&self, kmax: i64) -> f64 {
        let n = self.gen().dim();
        let r = self.gen().r();
        let mut worst: f64 = 0.0;
        for i in 0..r {
            for j in 0..r {
                for k in Window::centered(n, kmax).points() {
                    let v = self.function(i).inner(&shifted(self.function(j), k));
                    let want = if i == j && sup_norm(n, k) == 0 { 1.0 } else { 0.0 };
                    worst = worst.max((v - want).abs());
                }
            }
        }
        worst
    }
}

/// Node chunk size for deterministic assembly.
const CHUNK: usize = 512;

/// `A_R` in the coordinates `(i, k)`, `‖k‖∞ ≤ K`, held in factored form.
#[derive(Debug, Clone)]
pub struct LocalizationMatrix {
    pub r_cube: f64,
    pub k: i64,
    rows: Window,
    shifts: Vec<(usize, Lattice)>,
    w: DMatrix<f64>,
    hs: DMatrix<f64>,
    basis: Arc<OrthonormalBasisSet>,
}

/// Smallest admissible lattice truncation for a cube of side `r_cube`.
pub fn min_truncation(basis: &OrthonormalBasisSet, r_cube: f64) -> i64 {
    (r_cube / 2.0).ceil() as i64 + basis.support_radius().ceil() as i64 + 1
}

pub fn build_localization(basis: Arc<OrthonormalBasisSet>, r_cube: f64, k: Option<i64>, exec: Execution) -> Result<LocalizationMatrix> {
    if !(r_cube > 0.0) {
        return Err(Error::Domain(format!("cube side {r_cube} must be positive")));
    }
    let need = min_truncation(&basis, r_cube);
    let k = k.unwrap_or(need + 1);
    if k < need {
        return Err(Error::TruncationTooSmall { k, need });
    }
    let gen = basis.gen().clone();
    let n = gen.dim();
    let r = gen.r();
    let half = r_cube / 2.0;
    // per generator, per axis: p with (p + lo, p + hi) ∩ (-R/2, R/2) ≠ ∅
    let ranges: Vec<(i64, i64)> = gen
        .specs()
        .iter()
        .map(|s| {
            let (lo, hi) = s.support1();
            ((-half - hi).floor() as i64 + 1, (half - lo).ceil() as i64 - 1)
        })
        .collect();
    let mut shifts = Vec::new();
    for (j, &(a, b)) in ranges.iter().enumerate() {
        for p in Window::cube(n, a, b).points() {
            shifts.push((j, p));
        }
    }
    // one-axis restricted Gram factors over [-R/2, R/2]
    let grid = basis.grid();
    let (xs, ws) = grid.interval(-half, half);
    let p_all_lo = ranges.iter().map(|r| r.0).min().unwrap();
    let p_all_hi = ranges.iter().map(|r| r.1).max().unwrap();
    let np = (p_all_hi - p_all_lo + 1) as usize;
    let chunks = xs.len().div_ceil(CHUNK);
    let w1: Vec<DMatrix<f64>> = {
        let parts = map_indexed(chunks, exec, |c| {
            let lo = c * CHUNK;
            let hi = ((c + 1) * CHUNK).min(xs.len());
            let mut vals: Vec<DMatrix<f64>> = Vec::with_capacity(r);
            let mut buf = vec![0.0; np];
            for s in gen.specs() {
                let mut m = DMatrix::zeros(hi - lo, np);
                for (t, x) in xs[lo..hi].iter().enumerate() {
                    s.eval1_shifts(*x, p_all_lo, &mut buf);
                    for (u, v) in buf.iter().enumerate() {
                        m[(t, u)] = v * ws[lo + t].sqrt();
                    }
                }
                vals.push(m);
            }
            let mut out = Vec::with_capacity(r * r);
            for j in 0..r {
                for l in 0..r {
                    out.push(vals[j].transpose() * &vals[l]);
                }
            }
            out
        });
        let mut acc = vec![DMatrix::zeros(np, np); r * r];
        for part in parts {
            for (a, p) in acc.iter_mut().zip(part) {
                *a += p;
            }
        }
        acc
    };
    let ns = shifts.len();
    let w1_at = |j: usize, l: usize, p: i64, q: i64| w1[j * r + l][((p - p_all_lo) as usize, (q - p_all_lo) as usize)];
    let w = DMatrix::from_fn(ns, ns, |a, b| {
        let (j, p) = shifts[a];
        let (l, q) = shifts[b];
        let mut v = w1_at(j, l, p[0], q[0]);
        if n == 2 {
            v *= w1_at(j, l, p[1], q[1]);
        }
        v
    });
    let w = (&w + w.transpose()) * 0.5;
    let rows = Window::centered(n, k);
    let filter = basis.filter();
    let rad = filter.radius();
    let size = rows.size();
    let mut hs = DMatrix::zeros(ns, r * size);
    for (a, &(j, p)) in shifts.iter().enumerate() {
        for i in 0..r {
            for m in Window::centered(n, rad).points() {
                let c = filter.get(i, j, m);
                if c == 0.0 {
                    continue;
                }
                // coefficient of T_p φ_j in T_k e_i is H_ij(p - k)
                let kk = [p[0] - m[0], p[1] - m[1]];
                if let Some(ix) = rows.index(kk) {
                    hs[(a, i * size + ix)] = c;
                }
            }
        }
    }
    Ok(LocalizationMatrix { r_cube, k, rows, shifts, w, hs, basis })
}

impl LocalizationMatrix {
    pub fn dim(&self) -> usize {
        self.hs.ncols()
    }

    pub fn rows(&self) -> &Window {
        &self.rows
    }

    /// Row index of `T_k e_i`.
    pub fn row_of(&self, i: usize, k: Lattice) -> Option<usize> {
        self.rows.index(k).map(|ix| i * self.rows.size() + ix)
    }

    pub fn shifts(&self) -> &[(usize, Lattice)] {
        &self.shifts
    }

    pub fn restricted_gram(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn basis(&self) -> &Arc<OrthonormalBasisSet> {
        &self.basis
    }

    /// The dense symmetric matrix `Hᵀ W H`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let m = self.hs.transpose() * &self.w * &self.hs;
        (&m + m.transpose()) * 0.5
    }

    pub fn trace(&self) -> f64 {
        let p = &self.hs * self.hs.transpose();
        self.w.component_mul(&p).sum()
    }

    /// `⟨A_R f, f⟩` for e-coordinates `f`.
    pub fn quadratic_form(&self, f: &[f64]) -> f64 {
        let u = &self.hs * DVector::from_column_slice(f);
        u.dot(&(&self.w * &u))
    }
}

const RANGE_SLACK: f64 = 1e-8;

/// Eigenvalues (descending, clipped to [0, 1]) and orthonormal eigenvectors.
#[derive(Debug)]
pub struct Spectrum {
    pub r_cube: f64,
    pub k: i64,
    pub lambdas: Vec<f64>,
    pub raw_min: f64,
    pub raw_max: f64,
    /// Rows of `A_R`; eigenvalues beyond `lambdas.len()` are exactly zero.
    pub dim: usize,
    pub n_r: usize,
    vectors: DMatrix<f64>,
    rows: Window,
    basis: Arc<OrthonormalBasisSet>,
    funcs: Vec<OnceLock<SIFunction>>,
}

fn sym_eigen(m: DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    SymmetricEigen::try_new(m, 1e-15, 0).ok_or_else(|| Error::EigenFailure("symmetric eigensolver did not converge".into()))
}

fn sorted_desc(e: &SymmetricEigen<f64, nalgebra::Dyn>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..e.eigenvalues.len()).collect();
    idx.sort_by(|&a, &b| e.eigenvalues[b].total_cmp(&e.eigenvalues[a]).then(a.cmp(&b)));
    idx
}

fn check_range(lmin: f64, lmax: f64) -> Result<()> {
    if lmin < -RANGE_SLACK || lmax > 1.0 + RANGE_SLACK {
        return Err(Error::EigenFailure(format!("eigenvalues [{lmin:e}, {lmax}] leave [0, 1]")));
    }
    Ok(())
}

/// Eigenpairs through the Cholesky factor of `H Hᵀ`.
pub fn eigendecompose(m: &LocalizationMatrix) -> Result<Spectrum> {
    let p = &m.hs * m.hs.transpose();
    let chol = nalgebra::Cholesky::new(p).ok_or_else(|| Error::EigenFailure("shift Gram is not positive definite".into()))?;
    let l = chol.l();
    let c = l.transpose() * &m.w * &l;
    let c = (&c + c.transpose()) * 0.5;
    let e = sym_eigen(c)?;
    let order = sorted_desc(&e);
    let raw: Vec<f64> = order.iter().map(|&i| e.eigenvalues[i]).collect();
    let y = DMatrix::from_fn(raw.len(), raw.len(), |a, b| e.eigenvectors[(a, order[b])]);
    let z = l.transpose().solve_upper_triangular(&y).ok_or_else(|| Error::EigenFailure("singular Cholesky factor".into()))?;
    let vectors = m.hs.transpose() * z;
    finish(m, raw, vectors)
}

/// Eigenpairs of the dense matrix; cross-check for [`eigendecompose`].
pub fn eigendecompose_dense(m: &LocalizationMatrix) -> Result<Spectrum> {
    let e = sym_eigen(m.to_dense())?;
    let order = sorted_desc(&e);
    let keep = m.shifts.len().min(order.len());
    let raw: Vec<f64> = order[..keep].iter().map(|&i| e.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(m.dim(), keep, |a, b| e.eigenvectors[(a, order[b])]);
    let all_min = e.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let mut s = finish(m, raw, vectors)?;
    s.raw_min = s.raw_min.min(all_min);
    check_range(s.raw_min, s.raw_max)?;
    Ok(s)
}

fn finish(m: &LocalizationMatrix, raw: Vec<f64>, vectors: DMatrix<f64>) -> Result<Spectrum> {
    let raw_min = raw.iter().copied().fold(f64::INFINITY, f64::min);
    let raw_max = raw.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    check_range(raw_min, raw_max)?;
    let lambdas: Vec<f64> = raw.iter().map(|l| l.clamp(0.0, 1.0)).collect();
    let n_r = count_half(&lambdas);
    let funcs = (0..lambdas.len()).map(|_| OnceLock::new()).collect();
    Ok(Spectrum {
        r_cube: m.r_cube,
        k: m.k,
        lambdas,
        raw_min,
        raw_max,
        dim: m.dim(),
        n_r,
        vectors,
        rows: m.rows.clone(),
        basis: m.basis.clone(),
        funcs,
    })
}

/// Number of eigenvalues `≥ 1/2`.
pub fn count_half(lambdas: &[f64]) -> usize {
    count_at_least(lambdas, 0.5)
}

pub fn count_at_least(lambdas: &[f64], gamma: f64) -> usize {
    lambdas.iter().filter(|&&l| l >= gamma).count()
}

/// Split of `‖f‖²` by the span of the first N eigenfunctions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionSplit {
    pub en_sq: f64,
    pub fn_sq: f64,
    pub qr_en_sq: f64,
    pub norm_sq: f64,
}

impl ProjectionSplit {
    /// Concentration inequalities for `f ∈ V_{R,δ}` at threshold γ (γ = 1/2
    /// gives `1 - 2δ`, `1/2 - δ`, `2δ`).
    pub fn concentration_bounds_hold(&self, delta: f64, gamma: f64, tol: f64) -> bool {
        let q = delta / (1.0 - gamma);
        let nf = self.norm_sq;
        self.en_sq >= (1.0 - q) * nf - tol && self.qr_en_sq >= gamma * (1.0 - q) * nf - tol && self.fn_sq <= q * nf + tol
    }
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.lambdas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lambdas.is_empty()
    }

    pub fn basis(&self) -> &Arc<OrthonormalBasisSet> {
        &self.basis
    }

    pub fn gen(&self) -> &Arc<GeneratorSet> {
        self.basis.gen()
    }

    /// Eigenvectors in e-coordinates, one column per eigenvalue.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    fn check(&self, idx: usize) -> Result<()> {
        if idx >= self.len() {
            return Err(Error::IndexOutOfRange { index: idx, len: self.len() });
        }
        Ok(())
    }

    /// ψ_idx expressed in the generator shifts.
    pub fn eigenfunction(&self, idx: usize) -> Result<&SIFunction> {
        self.check(idx)?;
        Ok(self.funcs[idx].get_or_init(|| self.to_generator_coords(self.vectors.column(idx).as_slice())))
    }

    /// Convert e-coordinates on the row window into generator coordinates.
    pub fn to_generator_coords(&self, v: &[f64]) -> SIFunction {
        let gen = self.basis.gen().clone();
        let n = gen.dim();
        let r = gen.r();
        let filter = self.basis.filter();
        let rad = filter.radius();
        let kk = self.rows.hi(0);
        let win = Window::centered(n, kk + rad);
        let size = win.size();
        let rsize = self.rows.size();
        let mut c = vec![0.0; r * size];
        let taps: Vec<Lattice> = Window::centered(n, rad).points().collect();
        for i in 0..r {
            for (rix, k) in self.rows.points().enumerate() {
                let a = v[i * rsize + rix];
                if a == 0.0 {
                    continue;
                }
                for j in 0..r {
                    for m in &taps {
                        let h = filter.get(i, j, *m);
                        if h != 0.0 {
                            let ix = win.index([k[0] + m[0], k[1] + m[1]]).unwrap();
                            c[j * size + ix] += h * a;
                        }
                    }
                }
            }
        }
        SIFunction::new(gen, win, c).expect("window sized for filter").trimmed(1e-15)
    }

    pub fn eval_eigenfunction(&self, idx: usize, x: &[f64]) -> Result<f64> {
        Ok(self.eigenfunction(idx)?.eval(x))
    }

    /// `E_N f`, `F_N f` and `Q_R E_N f` energies for e-coordinates `f`.
    pub fn projection_split(&self, f: &[f64], big_n: usize) -> Result<ProjectionSplit> {
        if big_n > self.len() {
            return Err(Error::IndexOutOfRange { index: big_n, len: self.len() });
        }
        if f.len() != self.dim {
            return Err(Error::Domain(format!("expected {} coordinates, got {}", self.dim, f.len())));
        }
        let fv = DVector::from_column_slice(f);
        let mut rest = fv.clone();
        let mut en = 0.0;
        let mut qr = 0.0;
        for t in 0..big_n {
            let col = self.vectors.column(t);
            let c = col.dot(&fv);
            en += c * c;
            qr += self.lambdas[t] * c * c;
            rest.axpy(-c, &col, 1.0);
        }
        Ok(ProjectionSplit { en_sq: en, fn_sq: rest.norm_squared(), qr_en_sq: qr, norm_sq: fv.norm_squared() })
    }

    /// e-coordinates of `Σ_t c_t ψ_t`.
    pub fn combine(&self, coeffs: &[(usize, f64)]) -> Result<Vec<f64>> {
        let mut out = DVector::zeros(self.dim);
        for &(t, c) in coeffs {
            self.check(t)?;
            out.axpy(c, &self.vectors.column(t), 1.0);
        }
        Ok(out.as_slice().to_vec())
    }
}

/// Spectrum summary used by reports.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumSummary {
    #[serde(rename = "R")]
    pub r_cube: f64,
    #[serde(rename = "K")]
    pub k: i64,
    #[serde(rename = "N_R")]
    pub n_r: usize,
    pub trace: f64,
    pub bound_beta_formula: f64,
    pub lambdas: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn basis(s: &str, n: usize) -> Arc<OrthonormalBasisSet> {
        let g = Arc::new(GeneratorSet::parse(s, n).unwrap());
        Arc::new(orthonormalize(g, GridSpec::default()).unwrap())
    }

    #[test]
    fn box_basis_unchanged() {
        let b = basis("box", 1);
        assert_eq!(b.filter().radius(), 0);
        assert!((b.filter().get(0, 0, [0, 0]) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn hat_basis_orthonormal() {
        let b = basis("bspline:2", 1);
        assert!(b.gram_defect(4) < 1e-6);
        assert!(b.gram_defect_exact(4) < 1e-10);
    }

    #[test]
    fn two_generator_basis_orthonormal() {
        let b = basis("box,box@0.5/2", 1);
        assert!(b.gram_defect(4) < 1e-6);
    }

    #[test]
    fn box_r2_identity_block() {
        let b = basis("box", 1);
        let m = build_localization(b, 2.0, None, Execution::Sequential).unwrap();
        let d = m.to_dense();
        for i in 0..d.nrows() {
            for j in 0..d.ncols() {
                let ki = m.rows().point(i)[0];
                let kj = m.rows().point(j)[0];
                let want = if i == j && (ki == -1 || ki == 0) { 1.0 } else { 0.0 };
                assert!((d[(i, j)] - want).abs() < 1e-14, "{ki} {kj}");
            }
        }
    }

    #[test]
    fn truncation_checked() {
        let b = basis("bspline:2", 1);
        let need = min_truncation(&b, 8.0);
        assert!(matches!(build_localization(b, 8.0, Some(need - 1), Execution::Sequential), Err(Error::TruncationTooSmall { .. })));
    }

    #[test]
    fn box_exact_spectrum() {
        for (n, r_cube) in [(1, 4.0), (1, 8.0), (2, 2.0)] {
            let m = build_localization(basis("box", n), r_cube, None, Execution::Parallel).unwrap();
            let s = eigendecompose(&m).unwrap();
            assert_eq!(s.n_r, (r_cube as usize).pow(n as u32));
            for l in &s.lambdas {
                assert!((l - 1.0).abs() < 1e-10 || l.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn factored_matches_dense() {
        let m = build_localization(basis("bspline:2", 1), 4.0, None, Execution::Parallel).unwrap();
        let a = eigendecompose(&m).unwrap();
        let b = eigendecompose_dense(&m).unwrap();
        for (x, y) in a.lambdas.iter().zip(&b.lambdas) {
            assert!((x - y).abs() < 1e-10);
        }
        let v = a.vectors();
        let g = v.transpose() * v;
        assert!((g - DMatrix::identity(a.len(), a.len())).amax() < 1e-8);
        let rec = v * DMatrix::from_diagonal(&DVector::from_column_slice(&a.lambdas)) * v.transpose();
        assert!((rec - m.to_dense()).amax() < 1e-8);
    }

    #[test]
    fn sequential_and_parallel_assembly_agree() {
        let b = basis("bspline:3", 1);
        let a = build_localization(b.clone(), 6.0, None, Execution::Sequential).unwrap();
        let c = build_localization(b, 6.0, None, Execution::Parallel).unwrap();
        assert_eq!(a.restricted_gram(), c.restricted_gram());
    }

    #[test]
    fn eigenfunctions_concentrate_as_predicted() {
        let m = build_localization(basis("bspline:2", 1), 8.0, None, Execution::Parallel).unwrap();
        let s = eigendecompose(&m).unwrap();
        let grid = GridSpec::default();
        for t in [0, 3, 5, 8] {
            let psi = s.eigenfunction(t).unwrap();
            let e = psi.energy_in_cube(8.0, &grid).unwrap();
            assert!((e.total - 1.0).abs() < 1e-8, "t={t} total={}", e.total);
            assert!((e.inside - s.lambdas[t]).abs() < 1e-6, "t={t}");
        }
        let a = s.eigenfunction(0).unwrap();
        let b = s.eigenfunction(1).unwrap();
        assert!(a.inner(b).abs() < 1e-8);
        assert!(matches!(s.eigenfunction(s.len()), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn projection_split_single_eigenfunction() {
        let m = build_localization(basis("bspline:2", 1), 8.0, None, Execution::Parallel).unwrap();
        let s = eigendecompose(&m).unwrap();
        let f = s.combine(&[(0, 1.0)]).unwrap();
        let p = s.projection_split(&f, s.n_r).unwrap();
        assert!((p.en_sq - 1.0).abs() < 1e-10);
        assert!(p.fn_sq.abs() < 1e-10);
        assert!((p.qr_en_sq - s.lambdas[0]).abs() < 1e-10);
    }

    #[test]
    fn hat_plunge_regression() {
        let m = build_localization(basis("bspline:2", 1), 8.0, None, Execution::Parallel).unwrap();
        let s = eigendecompose(&m).unwrap();
        let plunge: Vec<f64> = s.lambdas.iter().copied().filter(|l| *l > 0.05 && *l < 0.95).collect();
        assert_eq!(plunge.len(), 2);
        assert!((plunge[0] - 0.500_013_285_858_542_9).abs() < 1e-9);
        assert!((plunge[0] + plunge[1] - 1.0).abs() < 1e-9);
        assert_eq!(s.n_r, 8);
    }

    #[test]
    fn hat_trace_matches_quadrature() {
        let b = basis("bspline:2", 1);
        let m = build_localization(b.clone(), 8.0, None, Execution::Parallel).unwrap();
        let grid = GridSpec::default();
        let direct: f64 = m.rows().points().map(|k| shifted(b.function(0), k).quad_energy(&[(-4.0, 4.0)], &grid)).sum();
        assert!((m.trace() - direct).abs() < 1e-3);
        assert!((m.trace() - 8.0).abs() < 1e-8);
    }

    #[test]
    fn box_r2_eigenfunction_is_cell_indicator() {
        let m = build_localization(basis("box", 1), 2.0, None, Execution::Sequential).unwrap();
        let s = eigendecompose(&m).unwrap();
        let psi = s.eigenfunction(0).unwrap();
        let inside: Vec<f64> = [-0.9, -0.4, 0.1, 0.6].iter().map(|x| psi.eval(&[*x]).abs()).collect();
        let ones = inside.iter().filter(|v| (*v - 1.0).abs() < 1e-10).count();
        let zeros = inside.iter().filter(|v| v.abs() < 1e-10).count();
        assert_eq!((ones, zeros), (2, 2));
        assert!((inside[0] - inside[1]).abs() < 1e-10 && (inside[2] - inside[3]).abs() < 1e-10);
        assert!(psi.eval(&[1.5]).abs() < 1e-12 && psi.eval(&[-1.5]).abs() < 1e-12);
    }
}
