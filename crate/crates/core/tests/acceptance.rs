//! Acceptance criteria 1–9, one PASS/FAIL line each. Exits nonzero if any fail.

use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use relsamp::constants::{certify_c2, random_function, sup_ratio, ConstantsOptions, ConstantsReport};
use relsamp::localization::{build_localization, eigendecompose, orthonormalize};
use relsamp::rng::Purpose;
use relsamp::sampling::{bernstein_diagnostics, covering_frequency, covering_tail_bound, ExperimentConfig, ExperimentContext};
use relsamp::si_space::{GeneratorSet, GridSpec};
use relsamp::Execution;

struct Outcome {
    pass: bool,
    detail: String,
}

fn constants(spec: &str, n: usize) -> (Arc<GeneratorSet>, ConstantsReport) {
    let gen = Arc::new(GeneratorSet::parse(spec, n).expect("generator"));
    let (rep, _) = ConstantsReport::compute(&gen, &ConstantsOptions::for_dim(n)).expect("constants");
    (gen, rep)
}

fn within_time(t: Duration, limit: f64) -> bool {
    t.as_secs_f64() < limit
}

fn binomial_slack(p: f64, trials: usize) -> f64 {
    let p = p.clamp(0.0, 1.0);
    3.0 * (p * (1.0 - p) / trials as f64).sqrt()
}

fn sinc_constants() -> Outcome {
    let start = Instant::now();
    let (_, rep) = constants("sinc:64", 1);
    let c2_cap = 1.1 * std::f64::consts::PI.exp();
    let ok = [
        ("C0", (rep.c0 - 1.0).abs() <= 1e-2),
        ("C0_tilde", (rep.c0_tilde - 1.0).abs() <= 1e-2),
        ("C1", (rep.c1 - 1.0).abs() <= 1e-2),
        ("alpha", (0.8..=1.2).contains(&rep.alpha)),
        ("C2", rep.c2 <= c2_cap),
        ("time", within_time(start.elapsed(), 60.0)),
    ];
    let failed: Vec<&str> = ok.iter().filter(|o| !o.1).map(|o| o.0).collect();
    Outcome {
        pass: failed.is_empty(),
        detail: format!(
            "C0={:.4} C0~={:.4} C1={:.4} alpha={:.4} C2={:.3} (cap {:.3}) {:.1}s; failed: {:?}",
            rep.c0,
            rep.c0_tilde,
            rep.c1,
            rep.alpha,
            rep.c2,
            c2_cap,
            start.elapsed().as_secs_f64(),
            failed
        ),
    }
}

fn box_spectrum() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (n, r) in [(1, 2.0), (1, 4.0), (1, 8.0), (2, 2.0), (2, 4.0)] {
        let gen = Arc::new(GeneratorSet::parse("box", n).unwrap());
        let basis = Arc::new(orthonormalize(gen, GridSpec::default()).unwrap());
        let s = eigendecompose(&build_localization(basis, r, None, Execution::Parallel).unwrap()).unwrap();
        let want = (r as usize).pow(n as u32);
        let ones = s.lambdas.iter().filter(|l| (*l - 1.0).abs() <= 1e-10).count();
        let zeros = s.lambdas.iter().filter(|l| l.abs() <= 1e-10).count();
        let ok = s.n_r == want && ones == want && ones + zeros == s.len();
        pass &= ok;
        parts.push(format!("n={n} R={r}: N={} ones={ones}", s.n_r));
    }
    pass &= within_time(start.elapsed(), 30.0);
    Outcome { pass, detail: format!("{} ({:.1}s)", parts.join(", "), start.elapsed().as_secs_f64()) }
}

fn eigen_count_bound() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for spec in ["box", "bspline:2", "bspline:4", "sinc:64"] {
        let (gen, rep) = constants(spec, 1);
        let basis = Arc::new(orthonormalize(gen, GridSpec::default()).unwrap());
        let threshold = 1f64.max((2.0 * rep.c3).powf(1.0 / rep.alpha));
        for r in [2.0, 4.0, 8.0, 16.0] {
            let s = eigendecompose(&build_localization(basis.clone(), r, None, Execution::Parallel).unwrap()).unwrap();
            let bound = rep.eigen_count_bound(r);
            if r > threshold {
                let ok = s.n_r > 0 && s.n_r as f64 <= bound;
                pass &= ok;
                parts.push(format!("{spec}@{r}: {}<={bound:.3e}{}", s.n_r, if ok { "" } else { " VIOLATED" }));
            } else {
                parts.push(format!("{spec}@{r}: N={} (R below {threshold:.3})", s.n_r));
            }
        }
    }
    pass &= within_time(start.elapsed(), 300.0);
    Outcome { pass, detail: format!("{} ({:.1}s)", parts.join("; "), start.elapsed().as_secs_f64()) }
}

fn bernstein() -> Outcome {
    let start = Instant::now();
    let (gen, rep) = constants("bspline:2", 1);
    let basis = Arc::new(orthonormalize(gen, GridSpec::default()).unwrap());
    let s = eigendecompose(&build_localization(basis, 8.0, None, Execution::Parallel).unwrap()).unwrap();
    let b = bernstein_diagnostics(&s, s.n_r, rep.c1, 100_000, 0, 0.3, 1.0, Execution::Parallel).unwrap();
    let pass = b.check().is_ok() && within_time(start.elapsed(), 120.0);
    Outcome {
        pass,
        detail: format!(
            "N={} max z={:.3} exact dev={:.1e} max|X|={:.4} <= {:.4} ({:.1}s)",
            b.big_n,
            b.max_mean_z,
            b.max_exact_dev,
            b.max_x_norm,
            b.x_norm_bound,
            start.elapsed().as_secs_f64()
        ),
    }
}

fn main_experiment() -> (Outcome, Outcome) {
    let start = Instant::now();
    let mut cfg = ExperimentConfig::new("bspline:2", 1, 8.0);
    cfg.trials = 500;
    let ctx = ExperimentContext::new(cfg, Execution::Parallel).expect("experiment setup");
    let r = ctx.run().expect("experiment");
    let t5 = start.elapsed();
    let allowed = 0.1 + binomial_slack(0.1, 500);
    let uncentered = r.uncentered_events as f64 / 500.0;
    let centered = r.eigenspace_events as f64 / 500.0;
    let c5 = Outcome {
        pass: uncentered <= allowed && centered <= allowed && within_time(t5, 300.0),
        detail: format!(
            "s={} N={} bad events {uncentered:.4} (centered {centered:.4}) <= {allowed:.4}, tail bound {:.3e} ({:.1}s)",
            r.s,
            r.big_n,
            r.eigenspace_tail,
            t5.as_secs_f64()
        ),
    };
    let sweep = ctx.downward_sweep(0.8, 500).expect("sweep");
    let rate = r.success_rate.unwrap_or(0.0);
    let certified = ctx.certification.violations == 0;
    let c6 = Outcome {
        pass: rate >= 0.9 && certified && r.upper_violations == 0 && r.chain_violations == 0 && within_time(start.elapsed(), 600.0),
        detail: format!(
            "delta={:.3e} A={:.4} s={} rate={rate:.3} C2={:.3} certified={certified} chain applicable {}/500; first s below 0.9: {:?} ({:.1}s)",
            r.delta,
            r.a_lower,
            r.s,
            ctx.constants.c2,
            r.chain_applicable,
            sweep.first_below,
            start.elapsed().as_secs_f64()
        ),
    };
    (c5, c6)
}

fn covering() -> Outcome {
    let start = Instant::now();
    let bound = covering_tail_bound(0.75, 64.0, 4.0, 1).unwrap().bound;
    let freq = covering_frequency(4.0, 1, 64, 0.75, 10_000, 0, Execution::Parallel).unwrap();
    let allowed = bound + binomial_slack(bound, 10_000);
    Outcome {
        pass: freq <= allowed && within_time(start.elapsed(), 60.0),
        detail: format!("freq={freq:.4} <= {allowed:.3e} (bound {bound:.3e}) ({:.1}s)", start.elapsed().as_secs_f64()),
    }
}

fn sampling_suites() -> Outcome {
    let start = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for (spec, n) in [("box", 1), ("bspline:2", 1), ("bspline:4", 1), ("sinc:64", 1), ("box,box@0.5/2", 1), ("bspline:2", 2)] {
        let (gen, rep) = constants(spec, n);
        let half = if n == 1 { 4 } else { 2 };
        let cert = certify_c2(&gen, rep.c2, 100, &[1, 2, 4], half, 1, Execution::Parallel);
        let q = if n == 1 { 8 } else { 5 };
        let sup = (0..100).map(|t| sup_ratio(&random_function(&gen, half, 1, Purpose::Checks, t), q)).fold(0.0, f64::max);
        let ok = cert.violations == 0 && sup <= rep.c1 + 1e-3;
        pass &= ok;
        parts.push(format!("{spec}/n={n}: PP max {:.3}<=C2 {:.3}, sup {:.4}<=C1 {:.4}", cert.max_ratio, rep.c2, sup, rep.c1));
    }
    pass &= within_time(start.elapsed(), 120.0);
    Outcome { pass, detail: format!("{} ({:.1}s)", parts.join("; "), start.elapsed().as_secs_f64()) }
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    // same output path both times: the config echo includes it
    let path = dir.path().join("verify.json");
    let run = || -> serde_json::Value {
        let status = Command::new(env!("CARGO_BIN_EXE_relsamp"))
            .args(["verify", "--seed", "7", "--trials", "100", "--out"])
            .arg(&path)
            .status()
            .expect("run verify");
        assert!(status.success(), "verify exited with {status}");
        let mut v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
        v["duration_seconds"] = serde_json::Value::Null;
        v
    };
    let a = run();
    let b = run();
    let text = |v: &serde_json::Value| serde_json::to_string(v).unwrap();
    Outcome { pass: text(&a) == text(&b), detail: "two verify runs, seed 7, compared without duration".into() }
}

fn main() -> ExitCode {
    let mut results: Vec<(u32, &str, Outcome)> = Vec::new();
    let mut record = |i: u32, name: &'static str, o: Outcome| {
        println!("criterion {i} [{name}]: {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        results.push((i, name, o));
    };
    record(1, "sinc constants", sinc_constants());
    record(2, "box spectrum", box_spectrum());
    record(3, "eigenvalue count bound", eigen_count_bound());
    record(4, "Bernstein diagnostics", bernstein());
    let (c5, c6) = main_experiment();
    record(5, "eigenspace tail", c5);
    record(6, "composite sampling inequality", c6);
    record(7, "covering tail", covering());
    record(8, "Plancherel-Polya and sup norm", sampling_suites());
    record(9, "determinism", determinism());
    let failed: Vec<u32> = results.iter().filter(|r| !r.2.pass).map(|r| r.0).collect();
    println!("acceptance: {} of {} passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
