//! End-to-end model selection: both dynamic-programming passes, the
//! `B(d, δ) = C_d + G(d, δ) + sigma^2 K pen(δ-1, d-1)` table and its argmin.

use crate::clusterdp::{fitted_values, reconstruct, second_pass, segment_levels, FullPartition};
use crate::error::{Error, Result};
use crate::penalty::{Penalty, PenaltySpec};
use crate::segdp::first_pass_with;
use crate::signal::Signal;
use crate::stats::{CostTables, WeightedLevels};

/// Outcome of [`select`].
#[derive(Debug, Clone)]
pub struct SelectionResult {
    /// Chosen model as reconstructed, before merging adjacent same-cluster
    /// segments.
    pub partition: FullPartition,
    /// Same model with adjacent same-cluster segments fused.
    pub reported: FullPartition,
    pub fitted: Vec<f64>,
    /// `B(d_hat, δ_hat)`.
    pub crit_value: f64,
    /// Number of segments `d_hat` of the first-pass model.
    pub segments: usize,
    /// Number of clusters `δ_hat`.
    pub clusters: usize,
    /// `C_d(N)` for `d = 1..=D+1` (index `d - 1`).
    pub seg_costs: Vec<f64>,
    /// `G(d, δ)` at `[d-1][δ-1]`.
    pub cluster_costs: Vec<Vec<f64>>,
    /// `B(d, δ)` at `[d-1][δ-1]`; `+inf` marks cells with no admissible model.
    pub b_table: Vec<Vec<f64>>,
}

impl SelectionResult {
    /// Change points after merging (last index of each reported segment).
    pub fn reported_change_points(&self) -> &[usize] {
        self.reported.segmentation().change_points()
    }

    /// Pre-merge `(d', d'')` used in the criterion.
    pub fn dims(&self) -> (usize, usize) {
        (self.clusters - 1, self.segments - 1)
    }

    /// Post-merge `(d', d'')`.
    pub fn reported_dims(&self) -> (usize, usize) {
        (self.reported.dprime(), self.reported.dpp())
    }

    /// Level of every reported cluster, by label.
    pub fn cluster_levels(&self) -> Vec<f64> {
        let mut levels = vec![f64::NAN; self.clusters];
        for (c, f) in self.partition.labels().into_iter().zip(&self.fitted) {
            levels[c] = *f;
        }
        levels
    }
}

/// Minimizes the relaxed criterion over `1 <= δ <= d <= D + 1`, `d` counting
/// segments and `δ` clusters. Ties go to the smallest `d`, then smallest `δ`.
pub fn select(y: &Signal, spec: &PenaltySpec) -> Result<SelectionResult> {
    let n = y.len();
    if n < 2 {
        return Err(Error::invalid("selection needs at least two samples"));
    }
    if spec.n != n {
        return Err(Error::invalid(format!(
            "penalty spec is for N={}, signal has {n} samples",
            spec.n
        )));
    }
    let penalty = Penalty::new(spec.clone())?;
    let tables = CostTables::new(y.values());
    let max_segments = spec.max_changes + 1;
    let seg_dp = first_pass_with(&tables, max_segments)?;

    let mut seg_costs = Vec::with_capacity(max_segments);
    let mut cluster_costs = Vec::with_capacity(max_segments);
    let mut b_table = Vec::with_capacity(max_segments);
    let mut second = Vec::with_capacity(max_segments);
    let mut best = (f64::INFINITY, 1, 1);

    for d in 1..=max_segments {
        let seg = seg_dp.segmentation(d);
        let (means, lens) = segment_levels(&tables, seg);
        let levels = WeightedLevels::new(&means, &lens)?;
        let cdp = second_pass(&levels, d)?;
        let c_d = seg_dp.optimal_cost(d);

        let mut g_row = Vec::with_capacity(d);
        let mut b_row = Vec::with_capacity(d);
        for delta in 1..=d {
            let g = cdp.optimal_cost(delta);
            let b = match penalty.scaled_pen(delta - 1, d - 1) {
                Ok(p) => c_d + g + p,
                Err(Error::Inadmissible { .. }) => f64::INFINITY,
                Err(e) => return Err(e),
            };
            if b < best.0 {
                best = (b, d, delta);
            }
            g_row.push(g);
            b_row.push(b);
        }
        seg_costs.push(c_d);
        cluster_costs.push(g_row);
        b_table.push(b_row);
        second.push((levels, cdp));
    }

    let (crit_value, d_hat, delta_hat) = best;
    let (levels, cdp) = &second[d_hat - 1];
    let partition = reconstruct(seg_dp.segmentation(d_hat), &cdp.blocks(delta_hat), levels.perm())?;
    let fitted = fitted_values(y, &partition)?;
    let reported = partition.merged();

    Ok(SelectionResult {
        partition,
        reported,
        fitted,
        crit_value,
        segments: d_hat,
        clusters: delta_hat,
        seg_costs,
        cluster_costs,
        b_table,
    })
}

/// `||y - f_p||^2 + sigma^2 K pen(d'_p, d''_p)` for an explicit partition.
pub fn crit_of_partition(y: &Signal, p: &FullPartition, spec: &PenaltySpec) -> Result<f64> {
    crit_with(&Penalty::new(spec.clone())?, y, p)
}

/// As [`crit_of_partition`] with a prebuilt penalty evaluator.
pub fn crit_with(penalty: &Penalty, y: &Signal, p: &FullPartition) -> Result<f64> {
    if penalty.spec().n != y.len() {
        return Err(Error::invalid("penalty spec and signal differ in length"));
    }
    Ok(residual_sum_of_squares(y, p)? + penalty.scaled_pen(p.dprime(), p.dpp())?)
}

pub fn residual_sum_of_squares(y: &Signal, p: &FullPartition) -> Result<f64> {
    let f = fitted_values(y, p)?;
    Ok(y.values().iter().zip(&f).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Noise scale from first differences: `median|y_{i+1} - y_i| / (sqrt(2) * 0.6745)`.
///
/// A convenience for data whose variance is unknown; it is not part of the
/// selection criterion, which takes sigma as given.
pub fn estimate_sigma_mad(y: &Signal) -> Result<f64> {
    if y.len() < 2 {
        return Err(Error::invalid("need at least two samples to estimate sigma"));
    }
    let mut diffs: Vec<f64> = y.values().windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    diffs.sort_by(f64::total_cmp);
    let m = diffs.len();
    let median = if m % 2 == 1 {
        diffs[m / 2]
    } else {
        0.5 * (diffs[m / 2 - 1] + diffs[m / 2])
    };
    // 0.6745 is the standard normal's 75% quantile
    Ok(median / (std::f64::consts::SQRT_2 * 0.674_489_750_196_081_7))
}
