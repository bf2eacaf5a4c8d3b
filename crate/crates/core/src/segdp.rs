//! First pass: optimal least-squares segmentation for every segment count.
//!
//! `C_1(n) = R[1,n]` and `C_d(n) = min_{d <= i <= n} C_{d-1}(i-1) + R[i,n]`,
//! where `R` is the within-segment sum of squared deviations. The dimension
//! `d` counts segments, so the change-point dimension is `d - 1`.

use crate::error::{Error, Result};
use crate::signal::Signal;
use crate::stats::CostTables;

/// Breakpoints `0 = i_0 < i_1 < .. < i_s = n`; segment `j` covers
/// `i_j + 1 ..= i_{j+1}` and the interior breakpoints are the change points.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Segmentation {
    breakpoints: Vec<usize>,
}

impl Segmentation {
    pub fn new(breakpoints: Vec<usize>) -> Result<Self> {
        if breakpoints.len() < 2 || breakpoints[0] != 0 {
            return Err(Error::invalid(
                "breakpoints must start at 0 and contain at least one segment",
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("breakpoints must be strictly increasing"));
        }
        Ok(Self { breakpoints })
    }

    /// One segment covering `1..=n`.
    pub fn whole(n: usize) -> Result<Self> {
        Self::new(vec![0, n])
    }

    /// Builds from change points (last index of each segment except the final).
    pub fn from_change_points(change_points: &[usize], n: usize) -> Result<Self> {
        let mut b = Vec::with_capacity(change_points.len() + 2);
        b.push(0);
        b.extend_from_slice(change_points);
        b.push(n);
        Self::new(b)
    }

    pub fn breakpoints(&self) -> &[usize] {
        &self.breakpoints
    }

    pub fn n(&self) -> usize {
        *self.breakpoints.last().unwrap()
    }

    pub fn num_segments(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn change_points(&self) -> &[usize] {
        &self.breakpoints[1..self.breakpoints.len() - 1]
    }

    /// Closed 1-indexed `(start, end)` of every segment.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.breakpoints.windows(2).map(|w| (w[0] + 1, w[1]))
    }

    pub fn lengths(&self) -> Vec<usize> {
        self.breakpoints.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// DP tables of the first pass plus the backtracked optimum for each `d`.
#[derive(Debug, Clone)]
pub struct SegDpResult {
    n: usize,
    // cost[d-1][m] = C_d(m); +inf where m < d
    cost: Vec<Vec<f64>>,
    // start[d-1][m] = argmin i (start index of the last segment)
    start: Vec<Vec<usize>>,
    segmentations: Vec<Segmentation>,
}

impl SegDpResult {
    pub fn max_segments(&self) -> usize {
        self.cost.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `C_d(m)`: best cost of splitting `y_1..y_m` into `d` segments.
    pub fn cost(&self, d: usize, m: usize) -> f64 {
        self.cost[d - 1][m]
    }

    /// `C_d(N)`.
    pub fn optimal_cost(&self, d: usize) -> f64 {
        self.cost[d - 1][self.n]
    }

    /// Start index of the last segment in the optimum behind `C_d(m)`.
    pub fn last_start(&self, d: usize, m: usize) -> usize {
        self.start[d - 1][m]
    }

    /// The optimal `d`-segment segmentation of the whole signal.
    pub fn segmentation(&self, d: usize) -> &Segmentation {
        &self.segmentations[d - 1]
    }
}

/// Runs the first pass on `y` for segment counts `1..=max_segments`.
pub fn first_pass(y: &Signal, max_segments: usize) -> Result<SegDpResult> {
    first_pass_with(&CostTables::new(y.values()), max_segments)
}

pub fn first_pass_with(tables: &CostTables, max_segments: usize) -> Result<SegDpResult> {
    let n = tables.n();
    if max_segments < 1 || max_segments > n {
        return Err(Error::range(format!(
            "max_segments must lie in [1,{n}], got {max_segments}"
        )));
    }

    let mut cost = Vec::with_capacity(max_segments);
    let mut start = Vec::with_capacity(max_segments);

    let mut row = vec![f64::INFINITY; n + 1];
    for (m, c) in row.iter_mut().enumerate().skip(1) {
        *c = tables.cost_unchecked(1, m);
    }
    cost.push(row);
    start.push(vec![1; n + 1]);

    for d in 2..=max_segments {
        let prev = &cost[d - 2];
        let mut row = vec![f64::INFINITY; n + 1];
        let mut arg = vec![0; n + 1];
        for m in d..=n {
            let mut best = f64::INFINITY;
            let mut best_i = d;
            for i in d..=m {
                let c = prev[i - 1] + tables.cost_unchecked(i, m);
                if c < best {
                    best = c;
                    best_i = i;
                }
            }
            row[m] = best;
            arg[m] = best_i;
        }
        cost.push(row);
        start.push(arg);
    }

    let segmentations = (1..=max_segments)
        .map(|d| {
            let mut b = vec![n];
            let mut m = n;
            for dd in (2..=d).rev() {
                m = start[dd - 1][m] - 1;
                b.push(m);
            }
            b.push(0);
            b.reverse();
            Segmentation { breakpoints: b }
        })
        .collect();

    Ok(SegDpResult {
        n,
        cost,
        start,
        segmentations,
    })
}

/// Residual sum of squares of the piecewise-mean fit on `seg`.
pub fn segmentation_cost(y: &Signal, seg: &Segmentation) -> Result<f64> {
    segmentation_cost_with(&CostTables::new(y.values()), seg)
}

pub fn segmentation_cost_with(tables: &CostTables, seg: &Segmentation) -> Result<f64> {
    if seg.n() != tables.n() {
        return Err(Error::invalid(format!(
            "segmentation covers {} samples, signal has {}",
            seg.n(),
            tables.n()
        )));
    }
    Ok(seg.segments().map(|(a, b)| tables.cost_unchecked(a, b)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn signal(v: &[f64]) -> Signal {
        Signal::new(v.to_vec()).unwrap()
    }

    /// Exhaustive minimum over all ways to place d-1 cuts among n-1 gaps.
    fn brute_force(y: &[f64], d: usize) -> f64 {
        let n = y.len();
        let sse = |s: &[f64]| {
            let m = s.iter().sum::<f64>() / s.len() as f64;
            s.iter().map(|v| (v - m) * (v - m)).sum::<f64>()
        };
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << (n - 1)) {
            if mask.count_ones() as usize != d - 1 {
                continue;
            }
            let mut total = 0.0;
            let mut a = 0;
            for g in 0..n - 1 {
                if mask & (1 << g) != 0 {
                    total += sse(&y[a..=g]);
                    a = g + 1;
                }
            }
            total += sse(&y[a..]);
            best = best.min(total);
        }
        best
    }

    #[test]
    fn two_constant_halves() {
        let y = signal(&[0.0, 0.0, 10.0, 10.0]);
        let r = first_pass(&y, 2).unwrap();
        assert_eq!(r.optimal_cost(2), 0.0);
        assert_eq!(r.segmentation(2).change_points(), &[2]);
        assert_eq!(segmentation_cost(&y, r.segmentation(2)).unwrap(), 0.0);
    }

    #[test]
    fn base_case_is_whole_segment() {
        let y = signal(&[1.0, 4.0, 2.0, 8.0, 5.0]);
        let r = first_pass(&y, 3).unwrap();
        let t = CostTables::new(y.values());
        assert_eq!(r.optimal_cost(1), t.segment_cost(1, 5).unwrap());
        assert_eq!(
            segmentation_cost(&y, &Segmentation::whole(5).unwrap()).unwrap(),
            t.segment_cost(1, 5).unwrap()
        );
    }

    #[test]
    fn finest_segmentation_costs_zero() {
        let y = signal(&[1.0, 4.0, 2.0, 8.0]);
        let seg = Segmentation::new(vec![0, 1, 2, 3, 4]).unwrap();
        assert_eq!(segmentation_cost(&y, &seg).unwrap(), 0.0);
        let r = first_pass(&y, 4).unwrap();
        assert_eq!(r.cost(4, 4), 0.0);
        assert_eq!(r.cost(2, 2), 0.0);
    }

    #[test]
    fn rejects_bad_bounds() {
        let y = signal(&[1.0, 2.0]);
        assert!(first_pass(&y, 0).is_err());
        assert!(first_pass(&y, 3).is_err());
        assert!(Segmentation::new(vec![0, 2, 2]).is_err());
        assert!(Segmentation::new(vec![1, 2]).is_err());
        assert!(segmentation_cost(&signal(&[1.0, 2.0, 3.0]), &Segmentation::whole(2).unwrap()).is_err());
    }

    #[test]
    fn ties_pick_smallest_split() {
        // Every 2-split of a constant signal costs 0.
        let y = signal(&[1.0; 5]);
        let r = first_pass(&y, 3).unwrap();
        assert_eq!(r.segmentation(2).change_points(), &[1]);
        assert_eq!(r.segmentation(3).change_points(), &[1, 2]);
    }

    #[test]
    fn matches_exhaustive_segmentation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let n = rng.random_range(5..=10);
            let y: Vec<f64> = (0..n).map(|_| rng.random_range(-5.0..5.0)).collect();
            let s = signal(&y);
            let r = first_pass(&s, 5).unwrap();
            for d in 1..=5 {
                assert!((r.optimal_cost(d) - brute_force(&y, d)).abs() <= 1e-9);
                let seg = r.segmentation(d);
                assert_eq!(seg.num_segments(), d);
                assert!((segmentation_cost(&s, seg).unwrap() - r.optimal_cost(d)).abs() <= 1e-9);
                if d > 1 {
                    assert!(r.optimal_cost(d) <= r.optimal_cost(d - 1) + 1e-12);
                }
            }
        }
    }
}
