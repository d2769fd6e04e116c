//! The invariant suite behind the `verify` subcommand.

use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::commands::{constants_for, experiment_config};
use super::config::RunConfig;
use super::report::{fmt_f64, Table};
use crate::constants::{certify_c2, random_function, sup_ratio, ConstantsReport};
use crate::error::Result;
use crate::localization::{build_localization, eigendecompose, eigendecompose_dense, orthonormalize, Spectrum};
use crate::par::{map_indexed, Execution};
use crate::rng::{stream, Purpose};
use crate::sampling::{bernstein_diagnostics, covering_frequency, covering_tail_bound, generate_test_function, ExperimentContext};
use crate::si_space::{compute_dual, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: f64,
    pub severity: Severity,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub generator: String,
    pub n: usize,
    #[serde(rename = "R")]
    pub r_cube: f64,
    pub constants: ConstantsReport,
    pub checks: Vec<Check>,
    pub failures: usize,
}

impl VerifyReport {
    pub fn ok(&self) -> bool {
        self.failures == 0
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(&["name", "pass", "value", "threshold", "severity"]);
        for c in &self.checks {
            t.push(vec![
                c.name.clone(),
                c.pass.to_string(),
                fmt_f64(c.value),
                fmt_f64(c.threshold),
                format!("{:?}", c.severity).to_lowercase(),
            ]);
        }
        t
    }
}

struct Suite(Vec<Check>);

impl Suite {
    /// `value ≤ threshold`.
    fn le(&mut self, name: &str, value: f64, threshold: f64) {
        self.push(name, value <= threshold, value, threshold, Severity::Error, None);
    }

    /// `value ≥ threshold`.
    fn ge(&mut self, name: &str, value: f64, threshold: f64) {
        self.push(name, value >= threshold, value, threshold, Severity::Error, None);
    }

    fn push(&mut self, name: &str, pass: bool, value: f64, threshold: f64, severity: Severity, note: Option<String>) {
        self.0.push(Check { name: name.into(), pass, value, threshold, severity, note });
    }

    fn skip(&mut self, name: &str, why: String) {
        self.push(name, true, f64::NAN, f64::NAN, Severity::Warning, Some(why));
    }
}

const SUP_FUNCTIONS: usize = 100;

pub fn run_verify(cfg: &RunConfig) -> Result<VerifyReport> {
    let exec = cfg.exec();
    let (gen, rep) = constants_for(cfg, &cfg.generator)?;
    let n = cfg.dim;
    let r_cube = cfg.r();
    let rn = r_cube.powi(n as i32);
    let grid = cfg.grid_spec();
    let h2 = grid.h() * grid.h();
    let mut s = Suite(Vec::new());

    // frame bounds and dual
    s.ge("riesz_lower_bound", rep.a_frame, 1e-8);
    s.le("frame_grid_doubling", rep.frame_grid_doubling_delta, 1e-6);
    s.ge("c0_tilde_vs_inverse_lower", rep.c0_tilde * rep.a_frame, 1.0 - 1e-6);
    let dual = compute_dual(gen.clone(), grid)?;
    s.le("dual_biorthogonality_gram", dual.biorthogonality_defect_exact(4), 1e-8);
    s.le("dual_biorthogonality_quadrature", dual.biorthogonality_defect(2), 10.0 * h2);
    let basis = Arc::new(orthonormalize(gen.clone(), grid)?);
    s.le("basis_orthonormality_gram", basis.gram_defect_exact(4), 1e-8);
    s.le("basis_orthonormality_quadrature", basis.gram_defect(2), 10.0 * h2);

    // sup-norm and Plancherel-Polya bounds
    let half = if n == 1 { 4 } else { 2 };
    let sup = map_indexed(SUP_FUNCTIONS, exec, |t| {
        sup_ratio(&random_function(&gen, half, cfg.seed, Purpose::Checks, (1 << 32) + t as u64), if n == 1 { 8 } else { 5 })
    })
    .into_iter()
    .fold(0.0, f64::max);
    s.le("sup_norm_bound", sup, rep.c1 + 1e-3);
    let cert = certify_c2(&gen, rep.c2, SUP_FUNCTIONS, &[1, 2, 4], half, cfg.seed, exec);
    s.le("plancherel_polya_violations", cert.violations as f64, 0.0);

    // localization
    let loc = build_localization(basis.clone(), r_cube, cfg.truncation, exec)?;
    let spectrum = eigendecompose(&loc)?;
    s.ge("eigenvalue_min", spectrum.raw_min, -1e-8);
    s.le("eigenvalue_max", spectrum.raw_max, 1.0 + 1e-8);
    let v = spectrum.vectors();
    let gram = v.transpose() * v;
    s.le("eigenvector_orthonormality", (gram - DMatrix::identity(v.ncols(), v.ncols())).amax(), 1e-8);
    let trace = loc.trace();
    s.le("trace_vs_eigenvalues", (trace - spectrum.lambdas.iter().sum::<f64>()).abs(), 1e-8);
    if r_cube.fract() == 0.0 {
        s.le("trace_periodization", (trace - gen.r() as f64 * rn).abs(), 1e-6 * rn);
    }
    if loc.dim() <= 1500 {
        let dense = loc.to_dense();
        s.le("matrix_symmetry", (&dense - dense.transpose()).amax(), 1e-12);
        let rec = v * DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(&spectrum.lambdas)) * v.transpose();
        s.le("reconstruction", (rec - &dense).amax(), 1e-8 * loc.dim() as f64);
        let d = eigendecompose_dense(&loc)?;
        let gap = d.lambdas.iter().zip(&spectrum.lambdas).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        s.le("factored_vs_dense", gap, 1e-8);
    } else {
        s.skip("reconstruction", format!("{} rows; dense checks skipped", loc.dim()));
    }
    if n == 1 && loc.dim() <= 400 {
        let direct: f64 = (0..gen.r())
            .map(|i| {
                let e = basis.function(i);
                loc.rows()
                    .points()
                    .map(|k| crate::si_space::dual::shifted(e, k).quad_energy(&[(-r_cube / 2.0, r_cube / 2.0)], &grid))
                    .sum::<f64>()
            })
            .sum();
        s.le("trace_vs_quadrature", (trace - direct).abs(), 1e-3);
    }
    let shown = spectrum.len().min(4);
    let mut energy_gap: f64 = 0.0;
    let mut ortho_gap: f64 = 0.0;
    for t in 0..shown {
        let psi = spectrum.eigenfunction(t)?;
        let e = psi.energy_in_cube(r_cube, &grid)?;
        energy_gap = energy_gap.max((e.inside - spectrum.lambdas[t]).abs()).max((e.total - 1.0).abs());
        for u in 0..shown {
            let want = if t == u { 1.0 } else { 0.0 };
            ortho_gap = ortho_gap.max((psi.inner(spectrum.eigenfunction(u)?) - want).abs());
        }
    }
    s.le("eigenfunction_energy", energy_gap, 1e-6);
    s.le("eigenfunction_orthonormality", ortho_gap, 1e-6);
    let form_gap = form_identity_gap(&loc, &spectrum, cfg.seed, &grid)?;
    s.le("quadratic_form_identity", form_gap, 1e-6);
    let threshold = 1f64.max((2.0 * rep.c3).powf(1.0 / rep.alpha));
    if r_cube > threshold {
        let bound = rep.eigen_count_bound(r_cube);
        s.push("eigen_count_positive", spectrum.n_r > 0, spectrum.n_r as f64, 1.0, Severity::Error, None);
        s.le("eigen_count_bound", spectrum.n_r as f64, bound);
    } else {
        s.skip("eigen_count_bound", format!("R = {r_cube} not above {threshold}"));
    }
    let larger = eigendecompose(&build_localization(basis.clone(), r_cube + 1.0, None, exec)?)?;
    let drops = spectrum.lambdas.iter().zip(&larger.lambdas).filter(|(a, b)| **b < **a - 1e-8).count();
    s.push("monotone_in_R", drops == 0, drops as f64, 0.0, Severity::Warning, Some("observed property only".into()));

    // sampling
    let delta = cfg.delta.unwrap_or_else(|| 0.01f64.min(crate::constants::delta_cap(rep.c2, cfg.nu) / 2.0));
    let big_n = spectrum.n_r;
    if big_n > 0 {
        let mut rng = stream(cfg.seed, Purpose::Checks, 1 << 33);
        let mut pyth: f64 = 0.0;
        let mut bounds_ok = true;
        match generate_test_function(&spectrum, delta, &mut rng) {
            Ok(_) => {
                for _ in 0..cfg.test_functions.max(1) {
                    let f = generate_test_function(&spectrum, delta, &mut rng)?;
                    let split = spectrum.projection_split(&spectrum.combine(&f.coeffs)?, big_n)?;
                    pyth = pyth.max((split.en_sq + split.fn_sq - split.norm_sq).abs());
                    bounds_ok &= split.concentration_bounds_hold(delta, cfg.gamma, 1e-10);
                }
                s.le("projection_pythagoras", pyth, 1e-8);
                s.push("concentration_bounds", bounds_ok, f64::from(u8::from(bounds_ok)), 1.0, Severity::Error, None);
            }
            Err(e) => s.skip("concentration_bounds", e.to_string()),
        }
        let bern = bernstein_diagnostics(&spectrum, big_n, rep.c1, cfg.mc_samples, cfg.seed, cfg.nu, 1.0, exec)?;
        s.le("bernstein_mean_z", bern.max_mean_z, 4.0);
        s.le("bernstein_exact_mean", bern.max_exact_dev, 1e-10);
        s.le("bernstein_x_norm", bern.max_x_norm, bern.x_norm_bound + 1e-6);
    } else {
        s.skip("bernstein", "N(R) = 0".into());
    }
    let (cr, cs, ct) = (4.0f64, 64 * 4usize.pow(n as u32 - 1), 10_000);
    let a = 3.0 / cr.powi(n as i32);
    let bound = covering_tail_bound(a, cs as f64, cr, n)?.bound;
    let freq = covering_frequency(cr, n, cs, a, ct, cfg.seed, exec)?;
    s.le("covering_tail", freq, bound + 3.0 * (bound.min(1.0) * (1.0 - bound.min(1.0)) / ct as f64).sqrt());

    let ecfg = experiment_config(cfg, &cfg.generator, r_cube, cfg.seed);
    match ExperimentContext::with_constants(ecfg.clone(), rep.clone(), exec) {
        Ok(ctx) => {
            let r = ctx.run()?;
            let tr = r.trials.max(1) as f64;
            s.le("upper_sampling_bound_violations", r.upper_violations as f64, 0.0);
            s.le("chain_violations", r.chain_violations as f64, 0.0);
            s.ge("success_rate", r.success_rate.unwrap_or(1.0), 1.0 - cfg.eps);
            let p = r.eigenspace_tail.min(1.0);
            s.le("eigenspace_tail", r.eigenspace_events as f64 / tr, p + 3.0 * (p * (1.0 - p) / tr).sqrt());
            if let Some(c) = r.covering_tail {
                let p = c.min(1.0);
                s.le("experiment_covering_tail", r.covering_events as f64 / tr, p + 3.0 * (p * (1.0 - p) / tr).sqrt());
            }
            let mut small = ecfg;
            small.trials = small.trials.min(8);
            let par = ExperimentContext::with_constants(small.clone(), rep.clone(), Execution::Parallel)?.run()?;
            let seq = ExperimentContext::with_constants(small, rep.clone(), Execution::Sequential)?.run()?;
            s.push("execution_determinism", par == seq, f64::from(u8::from(par == seq)), 1.0, Severity::Error, None);
        }
        Err(e) => s.skip("experiment", e.to_string()),
    }

    let failures = s.0.iter().filter(|c| c.severity == Severity::Error && !c.pass).count();
    Ok(VerifyReport { generator: cfg.generator.clone(), n, r_cube, constants: rep, checks: s.0, failures })
}

/// `max |⟨A_R f, f⟩ − ‖Q_R f‖²|` over a few random unit `f` near the cube.
fn form_identity_gap(
    loc: &crate::localization::LocalizationMatrix,
    spectrum: &Spectrum,
    seed: u64,
    grid: &crate::si_space::GridSpec,
) -> Result<f64> {
    use rand::Rng;
    use rand_distr::StandardNormal;
    let n = loc.basis().gen().dim();
    let r = loc.basis().gen().r();
    let near = Window::centered(n, (loc.r_cube / 2.0).ceil() as i64);
    let mut worst: f64 = 0.0;
    for t in 0..3 {
        let mut rng = stream(seed, Purpose::Checks, (1 << 34) + t);
        let mut f = vec![0.0; loc.dim()];
        for i in 0..r {
            for k in near.points() {
                f[loc.row_of(i, k).expect("near window inside rows")] = rng.sample(StandardNormal);
            }
        }
        let norm = f.iter().map(|v| v * v).sum::<f64>().sqrt();
        f.iter_mut().for_each(|v| *v /= norm);
        let q = loc.quadratic_form(&f);
        let e = spectrum.to_generator_coords(&f).energy_in_cube(loc.r_cube, grid)?;
        worst = worst.max((q - e.inside).abs());
    }
    Ok(worst)
}
