//! Replicated simulation runs and the CSV tables they produce.
//!
//! Replication `r` draws its noise from seed `master + r * 0x9E3779B97F4A7C15`
//! (wrapping), so runs are reproducible and independent of thread count.

use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{format_real, Table};
use crate::metrics::{cp_accuracy, level_errors, mse};
use crate::oracle::risk_bound;
use crate::penalty::{PenaltySpec, DEFAULT_K};
use crate::selector::{select, SelectionResult};
use crate::signal::{generate, snr_to_sigma, PiecewiseSpec};

const SEED_STRIDE: u64 = 0x9E37_79B9_7F4A_7C15;

pub const DEFAULT_MAX_CHANGES: usize = 20;
pub const DEFAULT_TOL: usize = 5;

/// Seed of replication `rep` under master seed `master`.
pub fn rep_seed(master: u64, rep: usize) -> u64 {
    master.wrapping_add((rep as u64).wrapping_mul(SEED_STRIDE))
}

/// How the noise level is given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NoiseLevel {
    /// Smallest jump over variance.
    Snr(f64),
    Sigma(f64),
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub spec: PiecewiseSpec,
    pub noise: NoiseLevel,
    pub reps: usize,
    pub seed: u64,
    pub max_changes: usize,
    pub k: f64,
    pub tol: usize,
}

impl ExperimentConfig {
    pub fn new(spec: PiecewiseSpec, noise: NoiseLevel) -> Self {
        Self {
            spec,
            noise,
            reps: 1,
            seed: 0,
            max_changes: DEFAULT_MAX_CHANGES,
            k: DEFAULT_K,
            tol: DEFAULT_TOL,
        }
    }

    pub fn sigma(&self) -> Result<f64> {
        match self.noise {
            NoiseLevel::Snr(snr) => snr_to_sigma(&self.spec, snr),
            NoiseLevel::Sigma(s) if s > 0.0 && s.is_finite() => Ok(s),
            NoiseLevel::Sigma(s) => Err(Error::invalid(format!("sigma must be positive, got {s}"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.reps < 1 {
            return Err(Error::invalid("reps must be >= 1"));
        }
        self.sigma()?;
        self.penalty_spec(1.0)?;
        Ok(())
    }

    fn penalty_spec(&self, sigma: f64) -> Result<PenaltySpec> {
        PenaltySpec::new(self.spec.n(), self.k, sigma * sigma, self.max_changes)
    }
}

/// Outcome of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct RepRow {
    pub rep: usize,
    pub seed: u64,
    pub mse: f64,
    pub bound: f64,
    pub cp_accuracy: f64,
    pub accuracy_undefined: bool,
    pub dprime: usize,
    pub dpp: usize,
    pub change_points: Vec<usize>,
    pub est_levels: Vec<f64>,
    pub level_errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub reps: usize,
    pub sigma: f64,
    pub bound_per_sample: f64,
    pub mean_cp_accuracy: f64,
    /// Correct detections over all detections, pooled across replications.
    pub pooled_cp_accuracy: f64,
    pub mean_mse: f64,
    pub fraction_below_bound: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<RepRow>,
    pub summary: Summary,
}

fn run_rep(cfg: &ExperimentConfig, penalty: &PenaltySpec, sigma: f64, bound: f64, rep: usize) -> Result<(RepRow, usize)> {
    let seed = rep_seed(cfg.seed, rep);
    let y = generate(&cfg.spec, sigma, seed)?;
    let res = select(&y, penalty)?;
    let truth = cfg.spec.ground_truth();
    let acc = cp_accuracy(res.reported_change_points(), &cfg.spec.change_points(), cfg.tol);
    let est_levels = res.cluster_levels();
    let true_levels: Vec<f64> = cfg.spec.clusters().iter().map(|c| c.level).collect();
    let (dprime, dpp) = res.reported_dims();
    Ok((
        RepRow {
            rep,
            seed,
            mse: mse(&res.fitted, &truth)?,
            bound,
            cp_accuracy: acc.value,
            accuracy_undefined: acc.undefined,
            dprime,
            dpp,
            change_points: res.reported_change_points().to_vec(),
            level_errors: level_errors(&est_levels, &true_levels),
            est_levels,
        },
        acc.matched,
    ))
}

/// Runs every replication (in parallel) and summarizes them in rep order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let sigma = cfg.sigma()?;
    let penalty = cfg.penalty_spec(sigma)?;
    let bound = risk_bound(cfg.spec.dprime(), cfg.spec.dpp(), cfg.spec.n(), sigma)?.per_sample;

    let results: Vec<(RepRow, usize)> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| run_rep(cfg, &penalty, sigma, bound, rep))
        .collect::<Result<_>>()?;

    let reps = results.len() as f64;
    let detected: usize = results.iter().map(|(r, _)| r.change_points.len()).sum();
    let matched: usize = results.iter().map(|(_, m)| m).sum();
    let rows: Vec<RepRow> = results.into_iter().map(|(r, _)| r).collect();
    let summary = Summary {
        reps: rows.len(),
        sigma,
        bound_per_sample: bound,
        mean_cp_accuracy: rows.iter().map(|r| r.cp_accuracy).sum::<f64>() / reps,
        pooled_cp_accuracy: if detected == 0 { 0.0 } else { matched as f64 / detected as f64 },
        mean_mse: rows.iter().map(|r| r.mse).sum::<f64>() / reps,
        fraction_below_bound: rows.iter().filter(|r| r.mse < r.bound).count() as f64 / reps,
    };
    Ok(ExperimentOutput { rows, summary })
}

/// CSV tables of an experiment, keyed by file name.
pub fn experiment_tables(out: &ExperimentOutput) -> Vec<(&'static str, Table)> {
    let mut reps = Table::new(&["rep", "seed", "mse", "bound", "cp_accuracy", "dprime", "dpp"]);
    let mut cps = Table::new(&["rep", "index"]);
    let mut levels = Table::new(&["rep", "cluster", "level"]);
    let mut errors = Table::new(&["rep", "true_cluster", "abs_error"]);
    for r in &out.rows {
        reps.push(vec![
            r.rep.to_string(),
            r.seed.to_string(),
            format_real(r.mse),
            format_real(r.bound),
            format_real(r.cp_accuracy),
            r.dprime.to_string(),
            r.dpp.to_string(),
        ]);
        for c in &r.change_points {
            cps.push(vec![r.rep.to_string(), c.to_string()]);
        }
        for (c, l) in r.est_levels.iter().enumerate() {
            levels.push(vec![r.rep.to_string(), (c + 1).to_string(), format_real(*l)]);
        }
        for (c, e) in r.level_errors.iter().enumerate() {
            errors.push(vec![r.rep.to_string(), (c + 1).to_string(), format_real(*e)]);
        }
    }
    let s = &out.summary;
    let mut summary = Table::new(&[
        "reps",
        "sigma",
        "bound_per_sample",
        "mean_cp_accuracy",
        "pooled_cp_accuracy",
        "mean_mse",
        "fraction_below_bound",
    ]);
    summary.push(vec![
        s.reps.to_string(),
        format_real(s.sigma),
        format_real(s.bound_per_sample),
        format_real(s.mean_cp_accuracy),
        format_real(s.pooled_cp_accuracy),
        format_real(s.mean_mse),
        format_real(s.fraction_below_bound),
    ]);
    vec![
        ("reps.csv", reps),
        ("summary.csv", summary),
        ("changepoints.csv", cps),
        ("levels.csv", levels),
        ("level_errors.csv", errors),
    ]
}

pub fn write_experiment(dir: &Path, out: &ExperimentOutput) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for (name, table) in experiment_tables(out) {
        table.write(&dir.join(name))?;
    }
    Ok(())
}

/// CSV tables of a single fit, keyed by file name.
pub fn fit_tables(res: &SelectionResult, sigma: f64, runtime_ms: f64) -> Vec<(&'static str, Table)> {
    let (dprime, dpp) = res.reported_dims();
    let (pre_dprime, pre_dpp) = res.dims();
    let mut result = Table::new(&[
        "dprime",
        "dpp",
        "dprime_premerge",
        "dpp_premerge",
        "crit",
        "sigma",
        "runtime_ms",
    ]);
    result.push(vec![
        dprime.to_string(),
        dpp.to_string(),
        pre_dprime.to_string(),
        pre_dpp.to_string(),
        format_real(res.crit_value),
        format_real(sigma),
        format_real(runtime_ms),
    ]);

    let mut cps = Table::new(&["index"]);
    for c in res.reported_change_points() {
        cps.push(vec![c.to_string()]);
    }

    let levels = res.cluster_levels();
    let mut clusters = Table::new(&["seg_start", "seg_end", "cluster", "level"]);
    for ((a, b), &c) in res
        .reported
        .segmentation()
        .segments()
        .zip(res.reported.assignment().cluster_of())
    {
        clusters.push(vec![
            a.to_string(),
            b.to_string(),
            (c + 1).to_string(),
            format_real(levels[c]),
        ]);
    }

    let mut fitted = Table::new(&["fitted"]);
    for v in &res.fitted {
        fitted.push(vec![format_real(*v)]);
    }
    vec![
        ("result.csv", result),
        ("changepoints.csv", cps),
        ("clusters.csv", clusters),
        ("fitted.csv", fitted),
    ]
}
