//! Subcommand bodies.

use std::sync::Arc;
use std::time::Instant;

use rand::RngCore;
use serde::Serialize;
use serde_json::json;

use super::config::{Command, RunConfig};
use super::report::{fmt_f64, Report, Table};
use super::verify::run_verify;
use crate::constants::{plan_experiment, ConstantsOptions, ConstantsReport};
use crate::error::{Error, Result};
use crate::localization::{build_localization, eigendecompose, orthonormalize, OrthonormalBasisSet, Spectrum, SpectrumSummary};
use crate::rng::{stream, Purpose};
use crate::sampling::{ExperimentConfig, ExperimentContext};
use crate::si_space::GeneratorSet;

/// A finished run: the report, an optional CSV table, and whether every
/// check passed.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub table: Option<Table>,
    pub ok: bool,
}

fn value<T: Serialize>(v: &T) -> Result<serde_json::Value> {
    Ok(serde_json::to_value(v)?)
}

pub fn constants_for(cfg: &RunConfig, generator: &str) -> Result<(Arc<GeneratorSet>, ConstantsReport)> {
    let gen = Arc::new(GeneratorSet::parse(generator, cfg.dim)?);
    let mut opts = ConstantsOptions::for_dim(cfg.dim);
    opts.seed = cfg.seed;
    opts.grid = cfg.grid_spec();
    opts.exec = cfg.exec();
    let (rep, _) = ConstantsReport::compute(&gen, &opts)?;
    Ok((gen, rep))
}

pub fn spectrum_for(cfg: &RunConfig, basis: &Arc<OrthonormalBasisSet>, r_cube: f64) -> Result<Spectrum> {
    eigendecompose(&build_localization(basis.clone(), r_cube, cfg.truncation, cfg.exec())?)
}

pub fn summarize_spectrum(spectrum: &Spectrum, trace: f64, constants: &ConstantsReport) -> SpectrumSummary {
    SpectrumSummary {
        r_cube: spectrum.r_cube,
        k: spectrum.k,
        n_r: spectrum.n_r,
        trace,
        bound_beta_formula: constants.eigen_count_bound(spectrum.r_cube),
        lambdas: spectrum.lambdas.clone(),
    }
}

pub fn experiment_config(cfg: &RunConfig, generator: &str, r_cube: f64, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        generator: generator.into(),
        dim: cfg.dim,
        r_cube,
        delta: cfg.delta,
        nu: cfg.nu,
        epsilon: cfg.eps,
        gamma: cfg.gamma,
        trials: cfg.trials,
        seed,
        samples: cfg.samples,
        test_functions: cfg.test_functions,
        grid: cfg.grid_spec(),
        truncation: cfg.truncation,
    }
}

fn run_constants(cfg: &RunConfig) -> Result<(serde_json::Value, Option<Table>)> {
    let (_, rep) = constants_for(cfg, &cfg.generator)?;
    let mut t = Table::new(&["R", "tail"]);
    for [r, v] in &rep.decay_tails {
        t.push(vec![fmt_f64(*r), fmt_f64(*v)]);
    }
    Ok((json!({ "constants": value(&rep)? }), Some(t)))
}

fn run_spectrum(cfg: &RunConfig) -> Result<(serde_json::Value, Option<Table>)> {
    let (gen, rep) = constants_for(cfg, &cfg.generator)?;
    let basis = Arc::new(orthonormalize(gen, cfg.grid_spec())?);
    let loc = build_localization(basis, cfg.r(), cfg.truncation, cfg.exec())?;
    let spectrum = eigendecompose(&loc)?;
    let summary = summarize_spectrum(&spectrum, loc.trace(), &rep);
    let mut t = Table::new(&["index", "lambda"]);
    for (i, l) in spectrum.lambdas.iter().enumerate() {
        t.push(vec![(i + 1).to_string(), fmt_f64(*l)]);
    }
    Ok((json!({ "constants": value(&rep)?, "spectrum": value(&summary)? }), Some(t)))
}

pub fn trial_table(r: &crate::sampling::ExperimentResult) -> Table {
    let mut t = Table::new(&["trial", "lambda_min", "N0", "min_ratio", "max_ratio", "pass"]);
    for o in &r.per_trial {
        t.push(vec![
            o.trial.to_string(),
            fmt_f64(o.lambda_min),
            o.n0.to_string(),
            fmt_f64(o.min_ratio),
            fmt_f64(o.max_ratio),
            o.pass.to_string(),
        ]);
    }
    t
}

fn run_experiment(cfg: &RunConfig) -> Result<(serde_json::Value, Option<Table>)> {
    let (_, rep) = constants_for(cfg, &cfg.generator)?;
    let ctx = ExperimentContext::with_constants(experiment_config(cfg, &cfg.generator, cfg.r(), cfg.seed), rep, cfg.exec())?;
    let result = ctx.run()?;
    let sweep = match cfg.sweep_down {
        Some(f) => Some(ctx.downward_sweep(f, cfg.trials)?),
        None => None,
    };
    let table = trial_table(&result);
    let lambdas = &ctx.spectrum.lambdas[..ctx.big_n];
    Ok((
        json!({
            "constants": value(&ctx.constants)?,
            "c2_certification": value(&ctx.certification)?,
            "params": value(&ctx.params)?,
            "lambdas": value(&lambdas)?,
            "experiment": value(&result)?,
            "sample_sweep": value(&sweep)?,
        }),
        Some(table),
    ))
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    generator: String,
    #[serde(rename = "R")]
    r_cube: f64,
    #[serde(rename = "N_R")]
    n_r: usize,
    bound: f64,
    s_min: Option<u64>,
    success_rate: Option<f64>,
}

/// One sub-report per (generator, R) point plus an aggregate table.
pub fn run_sweep(cfg: &RunConfig) -> Result<(serde_json::Value, Option<Table>)> {
    if cfg.r_grid.is_empty() {
        return Err(Error::Usage("--R-grid: grid is empty".into()));
    }
    let mut constants = Vec::new();
    let mut points = Vec::new();
    let mut rows = Vec::new();
    let mut index = 0u64;
    for g in cfg.sweep_generators() {
        let ctxerr = |r: Option<f64>, e: Error| match r {
            Some(r) => Error::Numerical(format!("sweep point ({g}, R={r}): {e}")),
            None => Error::Numerical(format!("sweep generator {g}: {e}")),
        };
        let (gen, rep) = constants_for(cfg, &g).map_err(|e| ctxerr(None, e))?;
        let basis = Arc::new(orthonormalize(gen, cfg.grid_spec()).map_err(|e| ctxerr(None, e))?);
        for &r in &cfg.r_grid {
            let seed = stream(cfg.seed, Purpose::Checks, index).next_u64();
            index += 1;
            let loc = build_localization(basis.clone(), r, cfg.truncation, cfg.exec()).map_err(|e| ctxerr(Some(r), e))?;
            let spectrum = eigendecompose(&loc).map_err(|e| ctxerr(Some(r), e))?;
            let summary = summarize_spectrum(&spectrum, loc.trace(), &rep);
            let delta = cfg.delta.unwrap_or_else(|| 0.01f64.min(crate::constants::delta_cap(rep.c2, cfg.nu) / 2.0));
            let plan = plan_experiment(&rep, r, delta, cfg.nu, cfg.eps, cfg.gamma);
            let (params, plan_note) = match plan {
                Ok(p) => (Some(p), None),
                Err(e) => (None, Some(e.to_string())),
            };
            let experiment = if params.is_some() && cfg.trials > 0 {
                let ctx = ExperimentContext::with_constants(experiment_config(cfg, &g, r, seed), rep.clone(), cfg.exec())
                    .map_err(|e| ctxerr(Some(r), e))?;
                let mut res = ctx.run().map_err(|e| ctxerr(Some(r), e))?;
                res.per_trial.clear();
                Some(res)
            } else {
                None
            };
            let row = SweepRow {
                generator: g.clone(),
                r_cube: r,
                n_r: spectrum.n_r,
                bound: summary.bound_beta_formula,
                s_min: params.as_ref().map(|p| p.s_min),
                success_rate: experiment.as_ref().and_then(|e| e.success_rate),
            };
            points.push(json!({
                "generator": g,
                "R": r,
                "seed": seed,
                "spectrum": value(&summary)?,
                "params": value(&params)?,
                "plan_note": plan_note,
                "experiment": value(&experiment)?,
            }));
            rows.push(row);
        }
        constants.push(value(&rep)?);
    }
    let mut t = Table::new(&["generator", "R", "N_R", "bound", "s_min", "success_rate"]);
    for r in &rows {
        t.push(vec![
            r.generator.clone(),
            fmt_f64(r.r_cube),
            r.n_r.to_string(),
            fmt_f64(r.bound),
            r.s_min.map(|s| s.to_string()).unwrap_or_default(),
            r.success_rate.map(fmt_f64).unwrap_or_default(),
        ]);
    }
    Ok((json!({ "constants": constants, "points": points, "table": value(&rows)? }), Some(t)))
}

/// Run the configured subcommand.
pub fn execute(cfg: &RunConfig) -> Result<Outcome> {
    let start = Instant::now();
    let (results, table, ok) = match cfg.command {
        Command::Constants => with_ok(run_constants(cfg)?),
        Command::Spectrum => with_ok(run_spectrum(cfg)?),
        Command::Experiment => with_ok(run_experiment(cfg)?),
        Command::Sweep => with_ok(run_sweep(cfg)?),
        Command::Verify => {
            let v = run_verify(cfg)?;
            let ok = v.ok();
            let table = v.table();
            (value(&v)?, Some(table), ok)
        }
    };
    Ok(Outcome { report: Report::new(cfg.clone(), results, start.elapsed().as_secs_f64()), table, ok })
}

fn with_ok((v, t): (serde_json::Value, Option<Table>)) -> (serde_json::Value, Option<Table>, bool) {
    (v, t, true)
}
