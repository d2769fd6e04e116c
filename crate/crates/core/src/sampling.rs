//! Random sampling in `C_R`: the matrices `T_j`, covering indices and the
//! composite sampling experiment.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::constants::{certify_c2, delta_cap, plan_experiment, C2Certification, ConstantsOptions, ConstantsReport, SamplingPlan};
use crate::error::{Error, Result};
use crate::localization::{build_localization, count_at_least, eigendecompose, orthonormalize, Spectrum};
use crate::par::{map_indexed, try_map_indexed, Execution};
use crate::rng::{stream, Purpose};
use crate::si_space::{GeneratorSet, GridSpec, Lattice, SIFunction};

/// `s` points drawn uniformly from `[-R/2, R/2)ⁿ`, stored point after point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSet {
    #[serde(rename = "R")]
    pub r_cube: f64,
    pub n: usize,
    pub s: usize,
    pub seed: u64,
    pub index: u64,
    pub points: Vec<f64>,
}

impl SampleSet {
    pub fn point(&self, j: usize) -> &[f64] {
        &self.points[j * self.n..(j + 1) * self.n]
    }
}

pub fn draw_samples(r_cube: f64, n: usize, s: usize, seed: u64) -> Result<SampleSet> {
    draw_samples_indexed(r_cube, n, s, seed, 0)
}

/// Sample set number `index` of the stream family fixed by `seed`.
pub fn draw_samples_indexed(r_cube: f64, n: usize, s: usize, seed: u64, index: u64) -> Result<SampleSet> {
    if s == 0 {
        return Err(Error::Domain("sample count must be at least 1".into()));
    }
    if !(r_cube > 0.0 && r_cube.is_finite()) {
        return Err(Error::Domain(format!("cube side {r_cube} must be positive")));
    }
    if !(1..=2).contains(&n) {
        return Err(Error::Domain(format!("dimension {n} not supported")));
    }
    let mut rng = stream(seed, Purpose::Samples, index);
    let points = (0..s * n).map(|_| -r_cube / 2.0 + r_cube * rng.random::<f64>()).collect();
    Ok(SampleSet { r_cube, n, s, seed, index, points })
}

/// Largest number of points in one cell `k + [-1/2, 1/2)ⁿ`.
pub fn covering_index(points: &[f64], n: usize) -> usize {
    let mut counts: HashMap<Lattice, usize> = HashMap::new();
    for p in points.chunks_exact(n) {
        let mut k = [0i64; 2];
        for (a, x) in p.iter().enumerate() {
            k[a] = (x + 0.5).floor() as i64;
        }
        *counts.entry(k).or_default() += 1;
    }
    counts.values().copied().max().unwrap_or(0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoveringTail {
    pub bound: f64,
    /// `s (a log(a Rⁿ) − (a − R^{-n}))`.
    pub exponent: f64,
}

/// `P(N0 > a s) ≤ (R+2)ⁿ exp(−s(a log(a Rⁿ) − (a − R^{-n})))`.
pub fn covering_tail_bound(a: f64, s: f64, r_cube: f64, n: usize) -> Result<CoveringTail> {
    let rn = r_cube.powi(n as i32);
    if !(r_cube >= 2.0) {
        return Err(Error::Domain(format!("R = {r_cube} must be at least 2")));
    }
    if !(a > 1.0 / rn) {
        return Err(Error::Domain(format!("a = {a} must exceed R^-n = {}", 1.0 / rn)));
    }
    let exponent = s * (a * (a * rn).ln() - (a - 1.0 / rn));
    Ok(CoveringTail { bound: (r_cube + 2.0).powi(n as i32) * (-exponent).exp(), exponent })
}

/// `N exp(−ν² s / (C1² Rⁿ (1 + ν/3)))`.
pub fn eigenspace_tail(big_n: usize, nu: f64, s: f64, c1: f64, r_cube: f64, n: usize) -> f64 {
    big_n as f64 * (-nu * nu * s / (c1 * c1 * r_cube.powi(n as i32) * (1.0 + nu / 3.0))).exp()
}

/// `Ψ[j, k] = ψ_k(x_j)` for `k < big_n`.
pub fn psi_matrix(spectrum: &Spectrum, big_n: usize, samples: &SampleSet) -> Result<DMatrix<f64>> {
    if big_n == 0 || big_n > spectrum.len() {
        return Err(Error::IndexOutOfRange { index: big_n, len: spectrum.len() });
    }
    let mut psi = DMatrix::zeros(samples.s, big_n);
    for k in 0..big_n {
        let f = spectrum.eigenfunction(k)?;
        for j in 0..samples.s {
            psi[(j, k)] = f.eval(samples.point(j));
        }
    }
    Ok(psi)
}

/// `Σ_j T_j` with `T_j = ψ(x_j) ψ(x_j)ᵀ`, `ψ = (ψ_1, …, ψ_N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TMatrixSum {
    pub big_n: usize,
    pub s: usize,
    pub sum: DMatrix<f64>,
}

pub fn t_sum_from_psi(psi: &DMatrix<f64>) -> TMatrixSum {
    let sum = psi.transpose() * psi;
    TMatrixSum { big_n: psi.ncols(), s: psi.nrows(), sum: (&sum + sum.transpose()) * 0.5 }
}

pub fn build_t_sum(spectrum: &Spectrum, big_n: usize, samples: &SampleSet) -> Result<TMatrixSum> {
    Ok(t_sum_from_psi(&psi_matrix(spectrum, big_n, samples)?))
}

fn min_eigenvalue(m: DMatrix<f64>) -> Result<f64> {
    let e = SymmetricEigen::try_new(m, 1e-15, 0).ok_or_else(|| Error::EigenFailure("symmetric eigensolver did not converge".into()))?;
    Ok(e.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

/// `λ_min((1/s) Σ T_j)`: the smallest mean square sample value over unit `f ∈ span{ψ_1..ψ_N}`.
pub fn exact_infimum(t: &TMatrixSum, s: usize) -> Result<f64> {
    if s == 0 {
        return Err(Error::Domain("s must be at least 1".into()));
    }
    min_eigenvalue(&t.sum / s as f64)
}

/// `λ_min((1/s) Σ T_j − R^{-n} Δ_N)`.
pub fn centered_infimum(t: &TMatrixSum, s: usize, lambdas: &[f64], r_cube: f64, n: usize) -> Result<f64> {
    let mut m = &t.sum / s as f64;
    let rn = r_cube.powi(n as i32);
    for k in 0..t.big_n {
        m[(k, k)] -= lambdas[k] / rn;
    }
    min_eigenvalue(m)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BernsteinReport {
    pub big_n: usize,
    pub mc_samples: usize,
    /// Largest `|mean − R^{-n}λ_k δ_kl| / se` over entries.
    pub max_mean_z: f64,
    /// Largest absolute deviation of an entry with zero sample variance.
    pub max_exact_dev: f64,
    pub mean_ok: bool,
    pub max_x_norm: f64,
    pub x_norm_bound: f64,
    pub x_norm_ok: bool,
    /// `λ_min(R^{-n} C1² Δ_N − mean X_j²)`; nonnegative up to Monte Carlo noise.
    pub second_moment_slack: f64,
    pub nu: f64,
    pub s: f64,
    pub tail: f64,
}

impl BernsteinReport {
    pub fn check(&self) -> Result<()> {
        if !self.mean_ok {
            return Err(Error::DiagnosticFailure(format!("E T_j: entry deviates by {} standard errors", self.max_mean_z)));
        }
        if !self.x_norm_ok {
            return Err(Error::DiagnosticFailure(format!("|X_j| = {} exceeds max(C1^2, R^-n) = {}", self.max_x_norm, self.x_norm_bound)));
        }
        Ok(())
    }
}

/// Monte Carlo check of the moments of `T_j` and `X_j = T_j − E T_j`.
#[allow(clippy::too_many_arguments)]
pub fn bernstein_diagnostics(
    spectrum: &Spectrum,
    big_n: usize,
    c1: f64,
    mc_samples: usize,
    seed: u64,
    nu: f64,
    s: f64,
    exec: Execution,
) -> Result<BernsteinReport> {
    if big_n == 0 {
        return Err(Error::Domain("N must be at least 1".into()));
    }
    let n = spectrum.gen().dim();
    let r_cube = spectrum.r_cube;
    let rn = r_cube.powi(n as i32);
    let expect = DMatrix::from_fn(big_n, big_n, |k, l| if k == l { spectrum.lambdas[k] / rn } else { 0.0 });
    const CHUNK: usize = 4096;
    let chunks = mc_samples.div_ceil(CHUNK);
    // per chunk: Σ T, Σ T∘T, Σ X², max |X|
    let parts = try_map_indexed(chunks, exec, |c| -> Result<_> {
        let m = CHUNK.min(mc_samples - c * CHUNK);
        let samples = draw_samples_indexed(r_cube, n, m, seed, (1 << 40) + c as u64)?;
        let psi = psi_matrix(spectrum, big_n, &samples)?;
        let mut s1 = DMatrix::zeros(big_n, big_n);
        let mut s2 = DMatrix::zeros(big_n, big_n);
        let mut x2 = DMatrix::zeros(big_n, big_n);
        let mut xmax: f64 = 0.0;
        for j in 0..m {
            let v = psi.row(j).transpose();
            let t = &v * v.transpose();
            let x = &t - &expect;
            s2 += t.component_mul(&t);
            s1 += t;
            let e = SymmetricEigen::try_new(x.clone(), 1e-15, 0)
                .ok_or_else(|| Error::EigenFailure("symmetric eigensolver did not converge".into()))?;
            xmax = xmax.max(e.eigenvalues.amax());
            x2 += &x * &x;
        }
        Ok((s1, s2, x2, xmax))
    })?;
    let mut s1 = DMatrix::zeros(big_n, big_n);
    let mut s2 = DMatrix::zeros(big_n, big_n);
    let mut x2 = DMatrix::zeros(big_n, big_n);
    let mut xmax: f64 = 0.0;
    for (a, b, c, d) in parts {
        s1 += a;
        s2 += b;
        x2 += c;
        xmax = xmax.max(d);
    }
    let m = mc_samples as f64;
    let mut max_z: f64 = 0.0;
    let mut max_exact: f64 = 0.0;
    for k in 0..big_n {
        for l in 0..big_n {
            let mean = s1[(k, l)] / m;
            let var = (s2[(k, l)] / m - mean * mean).max(0.0) * m / (m - 1.0).max(1.0);
            let se = (var / m).sqrt();
            let dev = (mean - expect[(k, l)]).abs();
            if se > 1e-14 {
                max_z = max_z.max(dev / se);
            } else {
                max_exact = max_exact.max(dev);
            }
        }
    }
    let mut slack = &expect * (c1 * c1) - x2 / m;
    slack = (&slack + slack.transpose()) * 0.5;
    let slack = min_eigenvalue(slack)?;
    let bound = (c1 * c1).max(1.0 / rn);
    Ok(BernsteinReport {
        big_n,
        mc_samples,
        max_mean_z: max_z,
        max_exact_dev: max_exact,
        mean_ok: max_z <= 4.0 && max_exact <= 1e-10,
        max_x_norm: xmax,
        x_norm_bound: bound,
        x_norm_ok: xmax <= bound + 1e-6,
        second_moment_slack: slack,
        nu,
        s,
        tail: eigenspace_tail(big_n, nu, s, c1, r_cube, n),
    })
}

/// Unit-norm `f = Σ c_t ψ_t` over eigenfunctions with `λ_t ≥ 1 − δ`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TestFunction {
    pub coeffs: Vec<(usize, f64)>,
    /// `‖Q_R f‖² / ‖f‖² = Σ λ_t c_t²`.
    pub membership: f64,
}

impl TestFunction {
    pub fn is_member(&self, delta: f64) -> bool {
        self.membership >= 1.0 - delta
    }

    pub fn function(&self, spectrum: &Spectrum) -> Result<SIFunction> {
        Ok(spectrum.to_generator_coords(&spectrum.combine(&self.coeffs)?))
    }

    /// `f(x_j)` from the eigenfunction values `Ψ`.
    pub fn sample_values(&self, psi: &DMatrix<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(psi.nrows());
        for &(t, c) in &self.coeffs {
            out.axpy(c, &psi.column(t), 1.0);
        }
        out
    }
}

/// Indices `t` with `λ_t ≥ 1 − δ`.
pub fn concentrated_indices(spectrum: &Spectrum, delta: f64) -> Vec<usize> {
    (0..count_at_least(&spectrum.lambdas, 1.0 - delta)).collect()
}

pub fn membership_ratio(spectrum: &Spectrum, coeffs: &[(usize, f64)]) -> f64 {
    let norm: f64 = coeffs.iter().map(|c| c.1 * c.1).sum();
    coeffs.iter().map(|&(t, c)| spectrum.lambdas[t] * c * c).sum::<f64>() / norm
}

pub fn generate_test_function<R: Rng + ?Sized>(spectrum: &Spectrum, delta: f64, rng: &mut R) -> Result<TestFunction> {
    let idx = concentrated_indices(spectrum, delta);
    if idx.is_empty() {
        return Err(Error::EmptyEigenspace(1.0 - delta));
    }
    let mut c: Vec<f64> = idx.iter().map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        c[0] = 1.0;
    } else {
        c.iter_mut().for_each(|v| *v /= norm);
    }
    let coeffs: Vec<(usize, f64)> = idx.into_iter().zip(c).collect();
    let membership = membership_ratio(spectrum, &coeffs);
    Ok(TestFunction { coeffs, membership })
}

fn default_gamma() -> f64 {
    0.5
}

fn default_test_functions() -> usize {
    20
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub generator: String,
    pub dim: usize,
    #[serde(rename = "R")]
    pub r_cube: f64,
    /// `None` picks `min(0.01, δ_cap/2)` from the estimated C2.
    pub delta: Option<f64>,
    pub nu: f64,
    pub epsilon: f64,
    #[serde(default = "default_gamma")]
    pub gamma: f64,
    pub trials: usize,
    pub seed: u64,
    /// Overrides `s_min`.
    pub samples: Option<u64>,
    #[serde(default = "default_test_functions")]
    pub test_functions: usize,
    pub grid: GridSpec,
    /// Lattice truncation of the localization matrix.
    pub truncation: Option<i64>,
}

impl ExperimentConfig {
    pub fn new(generator: &str, dim: usize, r_cube: f64) -> Self {
        Self {
            generator: generator.into(),
            dim,
            r_cube,
            delta: None,
            nu: 0.3,
            epsilon: 0.1,
            gamma: 0.5,
            trials: 500,
            seed: 0,
            samples: None,
            test_functions: 20,
            grid: GridSpec::default(),
            truncation: None,
        }
    }
}

/// Everything an experiment needs that does not depend on the trial.
#[derive(Debug)]
pub struct ExperimentContext {
    pub config: ExperimentConfig,
    pub constants: ConstantsReport,
    pub certification: C2Certification,
    pub params: SamplingPlan,
    pub spectrum: Spectrum,
    pub big_n: usize,
    pub exec: Execution,
}

impl ExperimentContext {
    pub fn new(config: ExperimentConfig, exec: Execution) -> Result<Self> {
        let gen = Arc::new(GeneratorSet::parse(&config.generator, config.dim)?);
        let mut opts = ConstantsOptions::for_dim(config.dim);
        opts.seed = config.seed;
        opts.grid = config.grid;
        opts.exec = exec;
        let (constants, _) = ConstantsReport::compute(&gen, &opts)?;
        Self::with_constants(config, constants, exec)
    }

    pub fn with_constants(config: ExperimentConfig, constants: ConstantsReport, exec: Execution) -> Result<Self> {
        let gen = Arc::new(GeneratorSet::parse(&config.generator, config.dim)?);
        let certification = certify_c2(&gen, constants.c2, 20, &[1, 2, 4], if config.dim == 1 { 4 } else { 2 }, config.seed, exec);
        let delta = config.delta.unwrap_or_else(|| 0.01f64.min(delta_cap(constants.c2, config.nu) / 2.0));
        let params = plan_experiment(&constants, config.r_cube, delta, config.nu, config.epsilon, config.gamma)?;
        if 1.0 - delta < config.gamma {
            return Err(Error::ConstraintViolation(format!("1 - delta = {} lies below gamma", 1.0 - delta)));
        }
        let basis = Arc::new(orthonormalize(gen, config.grid)?);
        let loc = build_localization(basis, config.r_cube, config.truncation, exec)?;
        let spectrum = eigendecompose(&loc)?;
        let big_n = count_at_least(&spectrum.lambdas, config.gamma);
        if big_n == 0 {
            return Err(Error::EmptyEigenspace(config.gamma));
        }
        Ok(Self { config, constants, certification, params, spectrum, big_n, exec })
    }

    pub fn delta(&self) -> f64 {
        self.params.delta
    }

    pub fn s_default(&self) -> u64 {
        self.config.samples.unwrap_or(self.params.s_min)
    }

    pub fn run(&self) -> Result<ExperimentResult> {
        self.run_with(self.s_default(), self.config.trials)
    }

    pub fn run_with(&self, s: u64, trials: usize) -> Result<ExperimentResult> {
        if s == 0 {
            return Err(Error::Domain("s must be at least 1".into()));
        }
        let per_trial =
            try_map_indexed(trials, self.exec, |t| self.run_trial(t, s).map_err(|e| Error::Numerical(format!("trial {t}: {e}"))))?;
        Ok(self.summarize(s, per_trial))
    }

    fn run_trial(&self, t: usize, s: u64) -> Result<TrialOutcome> {
        let cfg = &self.config;
        let n = cfg.dim;
        let rn = cfg.r_cube.powi(n as i32);
        let sf = s as f64;
        let samples = draw_samples_indexed(cfg.r_cube, n, s as usize, cfg.seed, t as u64)?;
        let psi = psi_matrix(&self.spectrum, self.big_n, &samples)?;
        let tsum = t_sum_from_psi(&psi);
        let lambda_min = exact_infimum(&tsum, s as usize)?;
        let centered = centered_infimum(&tsum, s as usize, &self.spectrum.lambdas, cfg.r_cube, n)?;
        let n0 = covering_index(&samples.points, n);
        let mut rng = stream(cfg.seed, Purpose::TestFunctions, t as u64);
        let lower = self.params.lower_bound(sf);
        let upper = sf * self.params.c1 * self.params.c1;
        let chain_applicable = lambda_min >= (cfg.gamma - cfg.nu) / rn && (n0 as f64) < self.params.n0_budget_for(sf);
        let a6 = self.params.conditional_lower_constant(sf, n0 as f64);
        let mut min_ratio = f64::INFINITY;
        let mut max_ratio: f64 = 0.0;
        for _ in 0..cfg.test_functions {
            let f = generate_test_function(&self.spectrum, self.delta(), &mut rng)?;
            let v = f.sample_values(&psi);
            let ratio = v.norm_squared();
            min_ratio = min_ratio.min(ratio);
            max_ratio = max_ratio.max(ratio);
        }
        if cfg.test_functions == 0 {
            min_ratio = 0.0;
        }
        let tol = 1e-9 * sf;
        let lower_ok = cfg.test_functions == 0 || min_ratio >= lower - tol;
        let upper_ok = max_ratio <= upper + tol;
        Ok(TrialOutcome {
            trial: t,
            lambda_min,
            lambda_min_centered: centered,
            n0,
            min_ratio,
            max_ratio,
            pass: lower_ok && upper_ok,
            upper_ok,
            upper_unit_ok: max_ratio <= sf + tol,
            eigenspace_event: centered <= -cfg.nu / rn,
            uncentered_event: lambda_min <= (cfg.gamma - cfg.nu) / rn,
            covering_event: n0 as f64 > self.params.n0_budget_for(sf),
            chain_applicable,
            chain_ok: !chain_applicable || cfg.test_functions == 0 || min_ratio >= a6 - tol,
        })
    }

    fn summarize(&self, s: u64, per_trial: Vec<TrialOutcome>) -> ExperimentResult {
        let cfg = &self.config;
        let n = cfg.dim;
        let rn = cfg.r_cube.powi(n as i32);
        let sf = s as f64;
        let trials = per_trial.len();
        let count = |p: fn(&TrialOutcome) -> bool| per_trial.iter().filter(|t| p(t)).count();
        let successes = count(|t| t.pass);
        let c1 = self.params.c1;
        ExperimentResult {
            s,
            trials,
            successes,
            success_rate: (trials > 0).then(|| successes as f64 / trials as f64),
            target_rate: 1.0 - cfg.epsilon,
            big_n: self.big_n,
            delta: self.delta(),
            a_lower: self.params.a_lower,
            lower_bound: self.params.lower_bound(sf),
            upper_bound: sf * c1 * c1,
            sigma2_bound: sf * c1 * c1 / rn,
            b_bound: (c1 * c1).max(1.0 / rn),
            eigenspace_tail: eigenspace_tail(self.big_n, cfg.nu, sf, c1, cfg.r_cube, n),
            eigenspace_events: count(|t| t.eigenspace_event),
            uncentered_events: count(|t| t.uncentered_event),
            covering_tail: covering_tail_bound(3.0 / rn, sf, cfg.r_cube, n).ok().map(|c| c.bound),
            covering_events: count(|t| t.covering_event),
            upper_violations: count(|t| !t.upper_ok),
            upper_unit_violations: count(|t| !t.upper_unit_ok),
            chain_applicable: count(|t| t.chain_applicable),
            chain_violations: count(|t| !t.chain_ok),
            per_trial,
        }
    }

    /// Success rates for decreasing `s`, stopping at the first rate below `1 − ε`.
    pub fn downward_sweep(&self, factor: f64, trials: usize) -> Result<SampleSweep> {
        if !(factor > 0.0 && factor < 1.0) {
            return Err(Error::Domain(format!("sweep factor {factor} must lie in (0, 1)")));
        }
        let mut s = self.s_default();
        let mut points = Vec::new();
        let target = 1.0 - self.config.epsilon;
        let mut first_below = None;
        loop {
            let r = self.run_with(s, trials)?;
            let rate = r.success_rate.unwrap_or(0.0);
            points.push([s as f64, rate]);
            if rate < target {
                first_below = Some(s);
                break;
            }
            let next = ((s as f64) * factor).floor() as u64;
            if next == 0 || next == s {
                break;
            }
            s = next;
        }
        Ok(SampleSweep { factor, trials, points, first_below })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleSweep {
    pub factor: f64,
    pub trials: usize,
    /// `(s, success rate)`.
    pub points: Vec<[f64; 2]>,
    pub first_below: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialOutcome {
    pub trial: usize,
    pub lambda_min: f64,
    pub lambda_min_centered: f64,
    #[serde(rename = "N0")]
    pub n0: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    pub pass: bool,
    pub upper_ok: bool,
    pub upper_unit_ok: bool,
    pub eigenspace_event: bool,
    pub uncentered_event: bool,
    pub covering_event: bool,
    pub chain_applicable: bool,
    pub chain_ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub s: u64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: Option<f64>,
    pub target_rate: f64,
    #[serde(rename = "N")]
    pub big_n: usize,
    pub delta: f64,
    #[serde(rename = "A")]
    pub a_lower: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    pub sigma2_bound: f64,
    pub b_bound: f64,
    pub eigenspace_tail: f64,
    pub eigenspace_events: usize,
    pub uncentered_events: usize,
    pub covering_tail: Option<f64>,
    pub covering_events: usize,
    pub upper_violations: usize,
    pub upper_unit_violations: usize,
    pub chain_applicable: usize,
    pub chain_violations: usize,
    pub per_trial: Vec<TrialOutcome>,
}

/// Empirical `P(N0 > a s)` for uniform samples in `C_R`.
pub fn covering_frequency(r_cube: f64, n: usize, s: usize, a: f64, trials: usize, seed: u64, exec: Execution) -> Result<f64> {
    let hits = try_map_indexed(trials, exec, |t| -> Result<bool> {
        let mut rng = stream(seed, Purpose::Covering, t as u64);
        let pts: Vec<f64> = (0..s * n).map(|_| -r_cube / 2.0 + r_cube * rng.random::<f64>()).collect();
        Ok(covering_index(&pts, n) as f64 > a * s as f64)
    })?;
    Ok(hits.iter().filter(|h| **h).count() as f64 / trials.max(1) as f64)
}

/// Smallest Rayleigh quotient `(1/s) cᵀ(ΣT_j)c` over random unit `c`.
pub fn rayleigh_minimum(t: &TMatrixSum, trials: usize, seed: u64) -> f64 {
    let vals = map_indexed(trials, Execution::Sequential, |i| {
        let mut rng = stream(seed, Purpose::Checks, i as u64);
        let c = DVector::from_fn(t.big_n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let c = &c / c.norm();
        c.dot(&(&t.sum * &c)) / t.s as f64
    });
    vals.into_iter().fold(f64::INFINITY, f64::min)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::three_log3_minus_2;
    use crate::localization::OrthonormalBasisSet;

    fn spectrum(s: &str, n: usize, r: f64) -> Spectrum {
        let g = Arc::new(GeneratorSet::parse(s, n).unwrap());
        let b: Arc<OrthonormalBasisSet> = Arc::new(orthonormalize(g, GridSpec::default()).unwrap());
        eigendecompose(&build_localization(b, r, None, Execution::Parallel).unwrap()).unwrap()
    }

    #[test]
    fn samples_rejected_and_deterministic() {
        assert!(draw_samples(4.0, 1, 0, 1).is_err());
        assert_eq!(draw_samples(4.0, 2, 50, 7).unwrap(), draw_samples(4.0, 2, 50, 7).unwrap());
        assert_ne!(draw_samples(4.0, 1, 50, 7).unwrap().points, draw_samples(4.0, 1, 50, 8).unwrap().points);
        let s = draw_samples(3.0, 2, 1000, 1).unwrap();
        assert!(s.points.iter().all(|x| (-1.5..=1.5).contains(x)));
    }

    #[test]
    fn sample_mean_clt() {
        let s = draw_samples(8.0, 1, 100_000, 3).unwrap();
        let mean = s.points.iter().sum::<f64>() / 1e5;
        assert!(mean.abs() < 4.0 * (8.0 / 12f64.sqrt()) / 1e5f64.sqrt());
    }

    #[test]
    fn covering_examples() {
        assert_eq!(covering_index(&[0.1, 0.2, 1.4], 1), 2);
        assert_eq!(covering_index(&[], 1), 0);
        let s = draw_samples(2.0, 1, 10, 5).unwrap();
        assert!(covering_index(&s.points, 1) >= 4);
        assert_eq!(covering_index(&[0.4, 0.4, 0.6, 0.4], 2), 1);
    }

    #[test]
    fn covering_bound_values() {
        let c = covering_tail_bound(0.75, 64.0, 4.0, 1).unwrap();
        assert!((c.exponent - 20.733389856069266).abs() < 1e-10);
        assert!((c.bound - 5.93956233750444e-09).abs() < 1e-20);
        let c = covering_tail_bound(3.0 / 16.0, 100.0, 4.0, 2).unwrap();
        assert!((c.exponent - 100.0 / 16.0 * three_log3_minus_2()).abs() < 1e-12);
        assert!(covering_tail_bound(0.25, 10.0, 4.0, 1).is_err());
        assert!(covering_tail_bound(0.9, 10.0, 1.5, 1).is_err());
    }

    #[test]
    fn box_t_sum_is_cell_counts() {
        let sp = spectrum("box", 1, 2.0);
        let samples = SampleSet { r_cube: 2.0, n: 1, s: 3, seed: 0, index: 0, points: vec![-0.5, 0.3, 0.7] };
        let t = build_t_sum(&sp, 2, &samples).unwrap();
        let mut d: Vec<f64> = (0..2).map(|k| t.sum[(k, k)]).collect();
        d.sort_by(f64::total_cmp);
        assert!((d[0] - 1.0).abs() < 1e-12 && (d[1] - 2.0).abs() < 1e-12);
        assert!(t.sum[(0, 1)].abs() < 1e-14);
        assert!((exact_infimum(&t, 3).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let t1 = build_t_sum(&sp, 1, &samples).unwrap();
        assert!((exact_infimum(&t1, 3).unwrap() - t1.sum[(0, 0)] / 3.0).abs() < 1e-15);
        assert!(matches!(build_t_sum(&sp, 3, &samples), Err(Error::IndexOutOfRange { .. })));
    }

    #[test]
    fn infimum_below_rayleigh_quotients() {
        let sp = spectrum("bspline:2", 1, 8.0);
        let samples = draw_samples(8.0, 1, 40, 11).unwrap();
        let t = build_t_sum(&sp, 4, &samples).unwrap();
        let lo = exact_infimum(&t, 40).unwrap();
        let rq = rayleigh_minimum(&t, 10_000, 3);
        assert!(lo <= rq + 1e-14 && rq - lo < 1e-3, "{lo} {rq}");
        let tr: f64 = t.sum.trace();
        let direct: f64 = (0..40).map(|j| (0..4).map(|k| sp.eigenfunction(k).unwrap().eval(samples.point(j)).powi(2)).sum::<f64>()).sum();
        assert!((tr - direct).abs() < 1e-10);
    }

    #[test]
    fn test_function_membership() {
        let sp = spectrum("bspline:2", 1, 8.0);
        let mut rng = stream(1, Purpose::Checks, 0);
        let f = generate_test_function(&sp, 0.01, &mut rng).unwrap();
        assert!(f.is_member(0.01));
        let e = f.function(&sp).unwrap().energy_in_cube(8.0, &GridSpec::default()).unwrap();
        assert!((e.ratio() - f.membership).abs() < 1e-6, "{e:?} {}", f.membership);
        let narrow = spectrum("bspline:2", 1, 1.0);
        assert!(matches!(generate_test_function(&narrow, 0.01, &mut rng), Err(Error::EmptyEigenspace(_))));
        // weight on a poorly concentrated eigenfunction breaks membership
        let low = sp.lambdas.iter().position(|l| *l < 0.5).unwrap();
        let bad = [(0, 0.5f64.sqrt()), (low, 0.5f64.sqrt())];
        assert!(membership_ratio(&sp, &bad) < 0.99);
    }

    #[test]
    fn bernstein_hat() {
        let sp = spectrum("bspline:2", 1, 8.0);
        let big_n = count_at_least(&sp.lambdas, 0.5);
        let g = sp.gen().clone();
        let (rep, _) = ConstantsReport::compute(&g, &ConstantsOptions::for_dim(1)).unwrap();
        let r = bernstein_diagnostics(&sp, big_n, rep.c1, 20_000, 1, 0.0, 100.0, Execution::Parallel).unwrap();
        r.check().unwrap();
        assert_eq!(r.tail, big_n as f64);
    }

    #[test]
    fn box_experiment_always_succeeds() {
        let mut cfg = ExperimentConfig::new("box", 1, 4.0);
        cfg.trials = 20;
        let ctx = ExperimentContext::new(cfg, Execution::Parallel).unwrap();
        let r = ctx.run().unwrap();
        assert_eq!(r.successes, 20);
        let r0 = ctx.run_with(ctx.s_default(), 0).unwrap();
        assert_eq!((r0.trials, r0.successes, r0.success_rate), (0, 0, None));
    }

    #[test]
    fn experiment_deterministic_across_execution() {
        let mut cfg = ExperimentConfig::new("bspline:2", 1, 8.0);
        cfg.trials = 8;
        cfg.samples = Some(200);
        let a = ExperimentContext::new(cfg.clone(), Execution::Parallel).unwrap().run().unwrap();
        let b = ExperimentContext::new(cfg, Execution::Sequential).unwrap().run().unwrap();
        assert_eq!(a, b);
    }
}
