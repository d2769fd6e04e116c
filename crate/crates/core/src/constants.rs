//! Frame, sup-norm, Plancherel–Polya and decay constants, and the derived
//! sample-count parameters.

use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par::{map_indexed, Execution};
use crate::rng::{stream, Purpose};
use crate::si_space::quadrature::{composite, GaussLegendre};
use crate::si_space::{compute_dual, frame_bounds, DualGeneratorSet, GeneratorSet, GridSpec, SIFunction, Window};

/// `3 log 3 - 2`.
pub fn three_log3_minus_2() -> f64 {
    3.0 * 3f64.ln() - 2.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantsOptions {
    pub freq_points: usize,
    /// Kernel-norm grid points per axis on `[0,1)^n`.
    pub c1_points: usize,
    pub c2_trials: usize,
    /// Random test functions use coefficients on `[-w, w]^n`.
    pub c2_window: i64,
    /// Oscillation grid step `2^-osc_q`.
    pub osc_q: u32,
    pub seed: u64,
    pub grid: GridSpec,
    #[serde(skip)]
    pub exec: Execution,
}

impl ConstantsOptions {
    pub fn for_dim(n: usize) -> Self {
        Self {
            freq_points: 2048,
            c1_points: if n == 1 { 64 } else { 16 },
            c2_trials: 200,
            c2_window: if n == 1 { 4 } else { 2 },
            osc_q: if n == 1 { 7 } else { 4 },
            seed: 0,
            grid: GridSpec::default(),
            exec: Execution::Parallel,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C1Estimate {
    /// Grid supremum of `‖v_x‖₂` over `[0,1)^n`.
    pub direct: f64,
    /// `(C0 Σ ‖φ_i‖²_{W(L¹)})^{1/2}`.
    pub amalgam_bound: f64,
    /// `(C0 Σ ‖φ_i‖₁²)^{1/2}`, reported for comparison only.
    pub l1_formula: f64,
    pub argmax: [f64; 2],
}

/// Largest kernel norm over a grid of `[0,1)^n` plus the amalgam bounds.
pub fn estimate_c1(gen: &GeneratorSet, dual: &DualGeneratorSet, c0: f64, points: usize, exec: Execution) -> C1Estimate {
    let n = gen.dim();
    let total = points.pow(n as u32);
    let vals = map_indexed(total, exec, |t| {
        let x = [(t / points.pow(n as u32 - 1)) as f64 / points as f64, (t % points) as f64 / points as f64];
        let x = if n == 1 { [t as f64 / points as f64, 0.0] } else { x };
        (dual.kernel_norm(&x[..n]), x)
    });
    let (direct, argmax) = vals.iter().fold((0.0, [0.0; 2]), |acc, &(v, x)| if v > acc.0 { (v, x) } else { acc });
    let r = gen.r();
    let amalgam: f64 = (0..r).map(|i| gen.amalgam_norm(i).powi(2)).sum();
    let l1: f64 = (0..r).map(|i| gen.l1_norm(i).powi(2)).sum();
    C1Estimate { direct, amalgam_bound: (c0 * amalgam).sqrt(), l1_formula: (c0 * l1).sqrt(), argmax }
}

/// Sliding maximum and minimum over `[t - w, t + w]` (monotone deques).
pub fn sliding_extrema(v: &[f64], w: usize) -> (Vec<f64>, Vec<f64>) {
    let len = v.len();
    let mut maxs = vec![0.0; len];
    let mut mins = vec![0.0; len];
    let mut dmax: VecDeque<usize> = VecDeque::new();
    let mut dmin: VecDeque<usize> = VecDeque::new();
    let mut next = 0;
    for t in 0..len {
        let right = (t + w).min(len - 1);
        while next <= right {
            while dmax.back().is_some_and(|&b| v[b] <= v[next]) {
                dmax.pop_back();
            }
            dmax.push_back(next);
            while dmin.back().is_some_and(|&b| v[b] >= v[next]) {
                dmin.pop_back();
            }
            dmin.push_back(next);
            next += 1;
        }
        let left = t.saturating_sub(w);
        while dmax.front().is_some_and(|&f| f < left) {
            dmax.pop_front();
        }
        while dmin.front().is_some_and(|&f| f < left) {
            dmin.pop_front();
        }
        maxs[t] = v[*dmax.front().unwrap()];
        mins[t] = v[*dmin.front().unwrap()];
    }
    (maxs, mins)
}

/// `‖osc f‖₂` with `osc f(x) = sup_{‖y‖∞ ≤ 1/2} |f(x) - f(x + y)|`, grid step `2^-q`.
pub fn osc_norm(f: &SIFunction, q: u32) -> f64 {
    let n = f.window().n;
    let h = (-(q as f64)).exp2();
    let w = 1usize << (q - 1);
    let sb = f.support_box();
    let axes: Vec<Vec<f64>> = (0..n)
        .map(|a| {
            let lo = ((sb[a].0 - 1.0) / h).floor() as i64;
            let hi = ((sb[a].1 + 1.0) / h).ceil() as i64;
            (lo..=hi).map(|t| t as f64 * h).collect()
        })
        .collect();
    let refs: Vec<&[f64]> = axes.iter().map(|a| a.as_slice()).collect();
    let v = f.eval_tensor(&refs);
    let cell = h.powi(n as i32);
    if n == 1 {
        let (mx, mn) = sliding_extrema(&v, w);
        let s: f64 = v.iter().zip(mx.iter().zip(&mn)).map(|(f, (a, b))| (a - f).max(f - b).powi(2)).sum();
        return (s * cell).sqrt();
    }
    let (l0, l1) = (axes[0].len(), axes[1].len());
    let mut rmax = vec![0.0; l0 * l1];
    let mut rmin = vec![0.0; l0 * l1];
    for t in 0..l0 {
        let (a, b) = sliding_extrema(&v[t * l1..(t + 1) * l1], w);
        rmax[t * l1..(t + 1) * l1].copy_from_slice(&a);
        rmin[t * l1..(t + 1) * l1].copy_from_slice(&b);
    }
    let mut s = 0.0;
    let mut col_max = vec![0.0; l0];
    let mut col_min = vec![0.0; l0];
    for u in 0..l1 {
        for t in 0..l0 {
            col_max[t] = rmax[t * l1 + u];
            col_min[t] = rmin[t * l1 + u];
        }
        let (mx, _) = sliding_extrema(&col_max, w);
        let (_, mn) = sliding_extrema(&col_min, w);
        for t in 0..l0 {
            let fv = v[t * l1 + u];
            s += (mx[t] - fv).max(fv - mn[t]).powi(2);
        }
    }
    (s * cell).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct C2Estimate {
    /// Largest observed `‖osc f‖/‖f‖`; a lower estimate of the true supremum.
    pub m_osc: f64,
    pub c2: f64,
    pub trials: usize,
}

pub fn random_function(gen: &Arc<GeneratorSet>, half_window: i64, seed: u64, purpose: Purpose, index: u64) -> SIFunction {
    let mut rng = stream(seed, purpose, index);
    SIFunction::random(gen.clone(), Window::centered(gen.dim(), half_window), &mut rng)
}

/// `‖f‖_∞ / ‖f‖₂` with the sup taken over a grid of step `2^-q` covering the support.
pub fn sup_ratio(f: &SIFunction, q: u32) -> f64 {
    let h = 0.5f64.powi(q as i32);
    let b = f.support_box();
    let axes: Vec<Vec<f64>> = (0..f.window().n)
        .map(|a| {
            let m = ((b[a].1 - b[a].0) / h).ceil() as usize;
            (0..=m).map(|t| b[a].0 + t as f64 * h).collect()
        })
        .collect();
    let refs: Vec<&[f64]> = axes.iter().map(|v| v.as_slice()).collect();
    let sup = f.eval_tensor(&refs).iter().fold(0.0f64, |m, v| m.max(v.abs()));
    sup / f.norm()
}

/// Oscillation constant over random unit-norm functions, and `C2 = (M + 1)²`.
pub fn estimate_c2(gen: &Arc<GeneratorSet>, opts: &ConstantsOptions) -> C2Estimate {
    let ratios = map_indexed(opts.c2_trials, opts.exec, |t| {
        let f = random_function(gen, opts.c2_window, opts.seed, Purpose::OscTrials, t as u64);
        let nrm = f.norm();
        if nrm == 0.0 {
            0.0
        } else {
            osc_norm(&f, opts.osc_q) / nrm
        }
    });
    let m = ratios.iter().copied().fold(0.0, f64::max);
    C2Estimate { m_osc: m, c2: (m + 1.0).powi(2), trials: opts.c2_trials }
}

/// How sample sets are placed in each unit cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Placement {
    Uniform,
    /// Points clustered at the cell maximiser of `|f|`.
    Adversarial,
}

/// Sample set with exactly `n0` points in every cell `k + [-1/2,1/2)^n` meeting `f`'s support.
pub fn cell_samples<R: Rng + ?Sized>(f: &SIFunction, n0: usize, placement: Placement, rng: &mut R) -> Vec<f64> {
    let n = f.window().n;
    let sb = f.support_box();
    let lo: Vec<i64> = (0..n).map(|a| (sb[a].0 + 0.5).floor() as i64).collect();
    let hi: Vec<i64> = (0..n).map(|a| (sb[a].1 + 0.5).floor() as i64).collect();
    let cells = Window::from_bounds(n, [lo[0], *lo.get(1).unwrap_or(&0)], [hi[0], *hi.get(1).unwrap_or(&0)]);
    let mut pts = Vec::with_capacity(cells.size() * n0 * n);
    let probe: usize = if n == 1 { 64 } else { 12 };
    for k in cells.points() {
        match placement {
            Placement::Uniform => {
                for _ in 0..n0 {
                    for ka in &k[..n] {
                        pts.push(*ka as f64 - 0.5 + rng.random::<f64>());
                    }
                }
            }
            Placement::Adversarial => {
                let mut best = (f64::NEG_INFINITY, [0.0; 2]);
                let total = probe.pow(n as u32);
                for t in 0..total {
                    let u = [(t % probe) as f64, (t / probe) as f64];
                    let x = [k[0] as f64 - 0.5 + (u[0] + 0.5) / probe as f64, k[1] as f64 - 0.5 + (u[1] + 0.5) / probe as f64];
                    let v = f.eval(&x[..n]).abs();
                    if v > best.0 {
                        best = (v, x);
                    }
                }
                for j in 0..n0 {
                    for a in 0..n {
                        pts.push(best.1[a] + 1e-9 * j as f64);
                    }
                }
            }
        }
    }
    pts
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct C2Certification {
    pub c2: f64,
    pub pairs: usize,
    /// Largest `Σ|f(γ)|² / (N0 ‖f‖²)` seen over all families.
    pub max_ratio: f64,
    pub violations: usize,
}

/// Check `Σ|f(γ)|² ≤ C2 N0 ‖f‖²` on random and adversarial sample sets with
/// covering index `N0 ∈ n0s`.
pub fn certify_c2(
    gen: &Arc<GeneratorSet>,
    c2: f64,
    functions: usize,
    n0s: &[usize],
    half_window: i64,
    seed: u64,
    exec: Execution,
) -> C2Certification {
    let per = map_indexed(functions, exec, |t| {
        let f = random_function(gen, half_window, seed, Purpose::Certify, t as u64);
        let nf = f.norm_sq();
        let mut rng = stream(seed, Purpose::Certify, (1 << 40) + t as u64);
        let mut worst: f64 = 0.0;
        let mut bad = 0;
        for &n0 in n0s {
            for placement in [Placement::Uniform, Placement::Adversarial] {
                let pts = cell_samples(&f, n0, placement, &mut rng);
                let s: f64 = f.synthesize(&pts).iter().map(|v| v * v).sum();
                let ratio = s / (n0 as f64 * nf);
                worst = worst.max(ratio);
                if s > c2 * n0 as f64 * nf * (1.0 + 1e-12) {
                    bad += 1;
                }
            }
        }
        (worst, bad)
    });
    C2Certification {
        c2,
        pairs: functions * n0s.len() * 2,
        max_ratio: per.iter().map(|p| p.0).fold(0.0, f64::max),
        violations: per.iter().map(|p| p.1).sum(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub c3: f64,
    pub alpha: f64,
    pub compact_support: bool,
    /// `(R, t(R))` with `t(R) = max_i ‖φ_i (1 - χ_{C_R})‖²`.
    pub tails: Vec<[f64; 2]>,
}

pub const DECAY_RADII: [f64; 6] = [2.0, 4.0, 8.0, 16.0, 32.0, 64.0];
const TAIL_FLOOR: f64 = 1e-14;

/// Energy of generator i outside `C_R`.
pub fn tail_energy(gen: &GeneratorSet, i: usize, r_cube: f64) -> f64 {
    let s = &gen.specs()[i];
    let (a, b) = s.support1();
    let rule = GaussLegendre::new(8);
    let mut tau = 0.0;
    for (lo, hi) in [(a, b.min(-r_cube / 2.0)), (a.max(r_cube / 2.0), b)] {
        if hi > lo {
            let (xs, ws) = composite(lo, hi, 1.0 / 32.0, &rule);
            tau += xs.iter().zip(&ws).map(|(x, w)| w * s.eval1(*x).powi(2)).sum::<f64>();
        }
    }
    if gen.dim() == 1 {
        tau
    } else {
        let a0 = gen.gram1(i, i).get(0);
        tau * (2.0 * a0 - tau)
    }
}

/// Power-law fit of the generator tails over `C_R`, `R ∈ {2, …, 64}`.
pub fn fit_decay(gen: &GeneratorSet) -> DecayFit {
    let n = gen.dim() as f64;
    let tails: Vec<[f64; 2]> = DECAY_RADII.iter().map(|&r| [r, (0..gen.r()).map(|i| tail_energy(gen, i, r)).fold(0.0, f64::max)]).collect();
    let pos: Vec<&[f64; 2]> = tails.iter().filter(|t| t[1] >= TAIL_FLOOR).collect();
    if pos.is_empty() {
        return DecayFit { c3: 0.0, alpha: n, compact_support: true, tails };
    }
    let alpha = if pos.len() == 1 {
        n
    } else {
        let xs: Vec<f64> = pos.iter().map(|t| t[0].ln()).collect();
        let ys: Vec<f64> = pos.iter().map(|t| t[1].ln()).collect();
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        -sxy / sxx
    };
    let c3 = tails.iter().map(|t| t[1] * t[0].powf(alpha)).fold(0.0, f64::max);
    DecayFit { c3, alpha, compact_support: false, tails }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConstantsReport {
    pub generator: String,
    pub n: usize,
    pub r: usize,
    #[serde(rename = "C0")]
    pub c0: f64,
    #[serde(rename = "A_frame")]
    pub a_frame: f64,
    #[serde(rename = "C0_tilde")]
    pub c0_tilde: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C1_amalgam_bound")]
    pub c1_amalgam_bound: f64,
    #[serde(rename = "C1_l1_formula")]
    pub c1_l1_formula: f64,
    #[serde(rename = "M_osc")]
    pub m_osc: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
    #[serde(rename = "C3")]
    pub c3: f64,
    pub alpha: f64,
    pub alpha_prime: f64,
    pub beta: f64,
    #[serde(rename = "R0")]
    pub r0: f64,
    pub compact_support: bool,
    pub decay_tails: Vec<[f64; 2]>,
    pub frame_grid_doubling_delta: f64,
    pub dual_filter_radius: i64,
    pub dual_filter_tail: f64,
    pub notes: BTreeMap<String, String>,
}

/// Fill `alpha_prime`, `beta` and `R0` from the measured constants.
pub fn derived_constants(rep: &mut ConstantsReport) -> Result<()> {
    let n = rep.n as f64;
    rep.alpha_prime = n.min(rep.alpha);
    let radicand = 2f64.powf(n + 2.0) * rep.r as f64 * rep.c0 * rep.c0_tilde.powi(2) * rep.c3;
    rep.beta = 3.0 + 2.0 * if rep.c3 == 0.0 { 0.0 } else { radicand.powf(1.0 / rep.alpha) };
    if !rep.beta.is_finite() {
        return Err(Error::Overflow("beta".into()));
    }
    let mid = if rep.c3 == 0.0 { 0.0 } else { (2.0 * rep.c3).powf(1.0 / rep.alpha) };
    rep.r0 = 1f64.max(mid).max(rep.c1.powf(2.0 / n));
    if !rep.r0.is_finite() {
        return Err(Error::Overflow("R0".into()));
    }
    Ok(())
}

impl ConstantsReport {
    pub fn compute(gen: &Arc<GeneratorSet>, opts: &ConstantsOptions) -> Result<(Self, DualGeneratorSet)> {
        let fb = frame_bounds(gen, opts.freq_points)?;
        let dual = compute_dual(gen.clone(), opts.grid)?;
        let c0_tilde = dual.upper_frame_bound(opts.freq_points);
        let c1 = estimate_c1(gen, &dual, fb.c0, opts.c1_points, opts.exec);
        let c2 = estimate_c2(gen, opts);
        let decay = fit_decay(gen);
        let mut notes = BTreeMap::new();
        notes.insert("C0".into(), "direct: refined extremum of the Gramian symbol eigenvalues".into());
        notes.insert("C0_tilde".into(), "direct: largest eigenvalue of the dual Gram symbol from the truncated filter".into());
        notes.insert("C1".into(), "direct: grid supremum of the kernel norm over [0,1)^n".into());
        notes.insert("C1_amalgam_bound".into(), "bound: (C0 sum_i |phi_i|_W(L1)^2)^(1/2)".into());
        notes
            .insert("C1_l1_formula".into(), "bound as literally written with L1 norms; differs from the amalgam version in general".into());
        notes.insert("M_osc".into(), "empirical lower estimate: max of |osc f|/|f| over random unit functions".into());
        notes.insert("C2".into(), "(M_osc + 1)^2".into());
        notes.insert(
            "C3_alpha".into(),
            if decay.compact_support {
                "compact support: C3 = 0, alpha = n".into()
            } else {
                "least-squares power-law fit of tail energies, C3 = max_R t(R) R^alpha".into()
            },
        );
        let mut rep = ConstantsReport {
            generator: gen.label(),
            n: gen.dim(),
            r: gen.r(),
            c0: fb.c0,
            a_frame: fb.a_frame,
            c0_tilde,
            c1: c1.direct,
            c1_amalgam_bound: c1.amalgam_bound,
            c1_l1_formula: c1.l1_formula,
            m_osc: c2.m_osc,
            c2: c2.c2,
            c3: decay.c3,
            alpha: decay.alpha,
            alpha_prime: 0.0,
            beta: 0.0,
            r0: 0.0,
            compact_support: decay.compact_support,
            decay_tails: decay.tails,
            frame_grid_doubling_delta: fb.grid_doubling_delta,
            dual_filter_radius: dual.filter().radius(),
            dual_filter_tail: dual.filter().tail,
            notes,
        };
        derived_constants(&mut rep)?;
        Ok((rep, dual))
    }

    /// Growth bound `βⁿ R^{n²/α'}` on N(R).
    pub fn eigen_count_bound(&self, r_cube: f64) -> f64 {
        let n = self.n as f64;
        self.beta.powf(n) * r_cube.powf(n * n / self.alpha_prime)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SamplingPlan {
    #[serde(rename = "R")]
    pub r: f64,
    pub n: usize,
    pub delta: f64,
    pub nu: f64,
    pub epsilon: f64,
    pub gamma: f64,
    pub s_min: u64,
    #[serde(rename = "A_lower")]
    pub a_lower: f64,
    #[serde(rename = "N0_budget")]
    pub n0_budget: f64,
    pub nu_constraint_lhs: f64,
    #[serde(rename = "C1")]
    pub c1: f64,
    #[serde(rename = "C2")]
    pub c2: f64,
}

impl SamplingPlan {
    /// Lower sampling constant for `s` samples with covering index `n0`:
    /// `(s/Rⁿ)(γ − γδ/(1−γ) − ν) − 2 C2 N0 δ/(1−γ)`.
    pub fn conditional_lower_constant(&self, s: f64, n0: f64) -> f64 {
        let g = self.gamma;
        s / self.r.powi(self.n as i32) * (g - g * self.delta / (1.0 - g) - self.nu) - 2.0 * self.c2 * n0 * self.delta / (1.0 - g)
    }

    /// `A s R^{-n}`.
    pub fn lower_bound(&self, s: f64) -> f64 {
        self.a_lower * s / self.r.powi(self.n as i32)
    }

    /// `N0 budget` for `s` samples.
    pub fn n0_budget_for(&self, s: f64) -> f64 {
        3.0 * s / self.r.powi(self.n as i32)
    }
}

/// Largest admissible δ at γ = 1/2 given ν: both `δ < 1/(2(1+12C2))` and `A > 0`.
pub fn delta_cap(c2: f64, nu: f64) -> f64 {
    (1.0 / (2.0 * (1.0 + 12.0 * c2))).min((0.5 - nu) / (1.0 + 12.0 * c2))
}

/// Sample count and lower constant for the given accuracy parameters.
pub fn plan_experiment(rep: &ConstantsReport, r_cube: f64, delta: f64, nu: f64, epsilon: f64, gamma: f64) -> Result<SamplingPlan> {
    for (name, v) in [("delta", delta), ("nu", nu), ("epsilon", epsilon), ("gamma", gamma)] {
        if !(v > 0.0 && v < 1.0) {
            return Err(Error::ConstraintViolation(format!("{name} = {v} must lie in (0, 1)")));
        }
    }
    if !(r_cube >= rep.r0) {
        return Err(Error::ConstraintViolation(format!("R = {r_cube} must be at least R0 = {}", rep.r0)));
    }
    let n = rep.n as f64;
    let lhs = nu * nu / (rep.c1 * rep.c1 * (1.0 + nu / 3.0));
    if lhs > three_log3_minus_2() {
        return Err(Error::ConstraintViolation(format!("nu^2/(C1^2 (1 + nu/3)) = {lhs} exceeds 3 log 3 - 2")));
    }
    if gamma == 0.5 && !(delta < 1.0 / (2.0 * (1.0 + 12.0 * rep.c2))) {
        return Err(Error::ConstraintViolation(format!(
            "delta = {delta} must be below 1/(2(1 + 12 C2)) = {}",
            1.0 / (2.0 * (1.0 + 12.0 * rep.c2))
        )));
    }
    let a = gamma - gamma * delta / (1.0 - gamma) - nu - 6.0 * rep.c2 * delta / (1.0 - gamma);
    if !(a > 0.0) {
        return Err(Error::ConstraintViolation(format!("A = 1/2 - delta - nu - 12 delta C2 = {a} must be positive")));
    }
    let rn = r_cube.powf(n);
    let log_term = (2.0 * rep.beta.powf(n) * r_cube.powf(n * n / rep.alpha_prime) / epsilon).ln();
    let s = (rn * (1.0 + nu / 3.0) / (nu * nu) * log_term).ceil();
    if !s.is_finite() || s < 1.0 {
        return Err(Error::Overflow("s_min".into()));
    }
    Ok(SamplingPlan {
        r: r_cube,
        n: rep.n,
        delta,
        nu,
        epsilon,
        gamma,
        s_min: s as u64,
        a_lower: a,
        n0_budget: 3.0 * s / rn,
        nu_constraint_lhs: lhs,
        c1: rep.c1,
        c2: rep.c2,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report_stub(n: usize, c1: f64, c2: f64, beta: f64, alpha_prime: f64) -> ConstantsReport {
        ConstantsReport {
            generator: "stub".into(),
            n,
            r: 1,
            c0: 1.0,
            a_frame: 1.0,
            c0_tilde: 1.0,
            c1,
            c1_amalgam_bound: c1,
            c1_l1_formula: c1,
            m_osc: c2.sqrt() - 1.0,
            c2,
            c3: 0.0,
            alpha: alpha_prime,
            alpha_prime,
            beta,
            r0: 1.0,
            compact_support: true,
            decay_tails: vec![],
            frame_grid_doubling_delta: 0.0,
            dual_filter_radius: 0,
            dual_filter_tail: 0.0,
            notes: BTreeMap::new(),
        }
    }

    #[test]
    fn sliding_extrema_brute_force() {
        let v: Vec<f64> = (0..57).map(|t| ((t * 37 % 23) as f64).sin()).collect();
        for w in [0, 1, 3, 10, 80] {
            let (mx, mn) = sliding_extrema(&v, w);
            for t in 0..v.len() {
                let lo = t.saturating_sub(w);
                let hi = (t + w).min(v.len() - 1);
                let bmx = v[lo..=hi].iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let bmn = v[lo..=hi].iter().copied().fold(f64::INFINITY, f64::min);
                assert_eq!(mx[t], bmx);
                assert_eq!(mn[t], bmn);
            }
        }
    }

    #[test]
    fn derived_examples() {
        let mut rep = report_stub(1, 1.0, 1.0, 0.0, 0.0);
        rep.c3 = 1.0;
        rep.alpha = 1.0;
        derived_constants(&mut rep).unwrap();
        assert_eq!(rep.beta, 19.0);
        assert_eq!(rep.r0, 2.0);
        rep.c3 = 0.0;
        derived_constants(&mut rep).unwrap();
        assert_eq!(rep.beta, 3.0);
        assert_eq!(rep.r0, 1.0);
    }

    #[test]
    fn overflow_is_reported() {
        let mut rep = report_stub(1, 1.0, 1.0, 0.0, 0.0);
        rep.c3 = 1e10;
        rep.alpha = 1e-3;
        assert!(matches!(derived_constants(&mut rep), Err(Error::Overflow(_))));
    }

    #[test]
    fn s_min_frozen_value() {
        let rep = report_stub(1, 1.0, 1.0, 3.0, 1.0);
        let p = plan_experiment(&rep, 8.0, 0.01, 0.3, 0.1, 0.5).unwrap();
        assert_eq!(p.s_min, 604);
        assert!((p.nu_constraint_lhs - 0.09 / 1.1).abs() < 1e-15);
        assert!((three_log3_minus_2() - 1.2958368660043291).abs() < 1e-15);
        assert!((p.a_lower - (0.5 - 0.01 - 0.3 - 0.12)).abs() < 1e-15);
    }

    #[test]
    fn rejects_large_delta() {
        let rep = report_stub(1, 1.0, 1.0, 3.0, 1.0);
        assert!(matches!(plan_experiment(&rep, 8.0, 0.5, 0.3, 0.1, 0.5), Err(Error::ConstraintViolation(_))));
        assert!(matches!(plan_experiment(&rep, 0.5, 0.01, 0.3, 0.1, 0.5), Err(Error::ConstraintViolation(_))));
    }

    #[test]
    fn chain_constant_matches_plan_at_budget() {
        let rep = report_stub(1, 1.2, 4.0, 3.0, 1.0);
        let p = plan_experiment(&rep, 8.0, 0.002, 0.3, 0.1, 0.5).unwrap();
        let s = p.s_min as f64;
        let a6 = p.conditional_lower_constant(s, p.n0_budget_for(s));
        assert!((a6 - p.lower_bound(s)).abs() < 1e-10 * s);
    }

    #[test]
    fn delta_cap_keeps_a_positive() {
        for c2 in [1.0, 4.0, 23.0] {
            for nu in [0.1, 0.3, 0.45] {
                let d = delta_cap(c2, nu) / 2.0;
                assert!(0.5 - d - nu - 12.0 * d * c2 > 0.0);
                assert!(d < 1.0 / (2.0 * (1.0 + 12.0 * c2)));
            }
        }
    }

    #[test]
    fn box_constants() {
        let gen = Arc::new(GeneratorSet::parse("box", 1).unwrap());
        let mut opts = ConstantsOptions::for_dim(1);
        opts.c2_trials = 20;
        let (rep, _) = ConstantsReport::compute(&gen, &opts).unwrap();
        assert!((rep.c0 - 1.0).abs() < 1e-12 && (rep.a_frame - 1.0).abs() < 1e-12);
        assert!((rep.c0_tilde - 1.0).abs() < 1e-12);
        assert!((rep.c1 - 1.0).abs() < 1e-12);
        assert!(rep.compact_support && rep.c3 == 0.0 && rep.alpha == 1.0);
        assert_eq!(rep.beta, 3.0);
        assert!((rep.c2 - (rep.m_osc + 1.0).powi(2)).abs() < 1e-15);
    }

    #[test]
    fn hat_constants() {
        let gen = Arc::new(GeneratorSet::parse("bspline:2", 1).unwrap());
        let mut opts = ConstantsOptions::for_dim(1);
        opts.c2_trials = 20;
        let (rep, _) = ConstantsReport::compute(&gen, &opts).unwrap();
        assert!((rep.a_frame - 1.0 / 3.0).abs() < 1e-4);
        assert!((rep.c0 - 1.0).abs() < 1e-4);
        assert!((rep.c0_tilde - 3.0).abs() < 1e-6);
        assert!(rep.c1 <= rep.c1_amalgam_bound);
        // one positive tail point: alpha = n, C3 = t(2) * 2 = 2/3
        assert!(!rep.compact_support);
        assert!((rep.c3 - 2.0 / 3.0).abs() < 1e-12);
        assert!(rep.beta > 3.0);
    }
}
