//! Second pass: grouping sorted segment means into contiguous blocks.
//!
//! Only clusterings that respect the order of the segment means are searched
//! (a cluster holding two means holds every mean between them), which turns
//! the grouping into a weighted 1-D segmentation of the sorted means:
//! `G(t,1) = Rw[1,t]`, `G(t,δ) = min_{δ <= i <= t} G(i-1,δ-1) + Rw[i,t]`.

use crate::error::{Error, Result};
use crate::segdp::Segmentation;
use crate::signal::Signal;
use crate::stats::{CostTables, WeightedLevels};

/// Cluster label (0-based) of every segment, in original segment order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ClusterAssignment {
    cluster_of: Vec<usize>,
    num_clusters: usize,
}

impl ClusterAssignment {
    /// Labels must cover `0..k` for some `k >= 1` with no empty label.
    pub fn new(cluster_of: Vec<usize>) -> Result<Self> {
        let num_clusters = cluster_of
            .iter()
            .max()
            .map(|&m| m + 1)
            .ok_or_else(|| Error::invalid("assignment must label at least one segment"))?;
        let mut seen = vec![false; num_clusters];
        for &c in &cluster_of {
            seen[c] = true;
        }
        if seen.iter().any(|s| !s) {
            return Err(Error::invalid("cluster labels must be contiguous and nonempty"));
        }
        Ok(Self {
            cluster_of,
            num_clusters,
        })
    }

    pub fn cluster_of(&self) -> &[usize] {
        &self.cluster_of
    }

    pub fn num_clusters(&self) -> usize {
        self.num_clusters
    }

    pub fn num_segments(&self) -> usize {
        self.cluster_of.len()
    }

    /// True when, in the sorted order of `means`, every cluster occupies a
    /// contiguous run. Ties in the means may be ordered either way.
    pub fn respects_order(&self, means: &[f64]) -> bool {
        if means.len() != self.cluster_of.len() {
            return false;
        }
        let (mut lo, mut hi) = (
            vec![f64::INFINITY; self.num_clusters],
            vec![f64::NEG_INFINITY; self.num_clusters],
        );
        for (&c, &m) in self.cluster_of.iter().zip(means) {
            lo[c] = lo[c].min(m);
            hi[c] = hi[c].max(m);
        }
        self.cluster_of
            .iter()
            .zip(means)
            .all(|(&c, &m)| (0..self.num_clusters).all(|k| k == c || !(lo[k] < m && m < hi[k])))
    }
}

/// Segments plus the cluster of each segment.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FullPartition {
    segmentation: Segmentation,
    assignment: ClusterAssignment,
}

impl FullPartition {
    pub fn new(segmentation: Segmentation, assignment: ClusterAssignment) -> Result<Self> {
        if segmentation.num_segments() != assignment.num_segments() {
            return Err(Error::invalid(format!(
                "{} segments but {} cluster labels",
                segmentation.num_segments(),
                assignment.num_segments()
            )));
        }
        Ok(Self {
            segmentation,
            assignment,
        })
    }

    /// Builds from a per-index label vector; maximal runs become segments and
    /// labels are renumbered by first appearance.
    pub fn from_labels(labels: &[usize]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("labels must be nonempty"));
        }
        let mut breaks = vec![0];
        let mut raw = vec![labels[0]];
        for i in 1..labels.len() {
            if labels[i] != labels[i - 1] {
                breaks.push(i);
                raw.push(labels[i]);
            }
        }
        breaks.push(labels.len());
        let mut remap = std::collections::HashMap::new();
        let cluster_of = raw
            .iter()
            .map(|l| {
                let next = remap.len();
                *remap.entry(*l).or_insert(next)
            })
            .collect();
        Self::new(Segmentation::new(breaks)?, ClusterAssignment::new(cluster_of)?)
    }

    pub fn segmentation(&self) -> &Segmentation {
        &self.segmentation
    }

    pub fn assignment(&self) -> &ClusterAssignment {
        &self.assignment
    }

    pub fn n(&self) -> usize {
        self.segmentation.n()
    }

    pub fn num_clusters(&self) -> usize {
        self.assignment.num_clusters()
    }

    pub fn num_segments(&self) -> usize {
        self.segmentation.num_segments()
    }

    /// d' = clusters - 1.
    pub fn dprime(&self) -> usize {
        self.num_clusters() - 1
    }

    /// d'' = segments - 1.
    pub fn dpp(&self) -> usize {
        self.num_segments() - 1
    }

    /// Cluster label of every sample.
    pub fn labels(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.n());
        for ((a, b), &c) in self.segmentation.segments().zip(self.assignment.cluster_of()) {
            out.extend(std::iter::repeat_n(c, b - a + 1));
        }
        out
    }

    /// Fuses index-adjacent segments that share a cluster. Labels are kept.
    pub fn merged(&self) -> FullPartition {
        let b = self.segmentation.breakpoints();
        let c = self.assignment.cluster_of();
        let mut breaks = vec![0];
        let mut labels = vec![c[0]];
        for j in 1..c.len() {
            if c[j] != c[j - 1] {
                breaks.push(b[j]);
                labels.push(c[j]);
            }
        }
        breaks.push(self.n());
        FullPartition {
            segmentation: Segmentation::new(breaks).expect("merging keeps breakpoints ordered"),
            assignment: ClusterAssignment::new(labels).expect("merging keeps every label"),
        }
    }

    /// Per-cluster mean of `y` over the union of its segments.
    pub fn cluster_means(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.n() {
            return Err(Error::invalid(format!(
                "partition covers {} samples, signal has {}",
                self.n(),
                y.len()
            )));
        }
        let k = self.num_clusters();
        let mut sum = vec![0.0; k];
        let mut count = vec![0usize; k];
        for ((a, b), &c) in self.segmentation.segments().zip(self.assignment.cluster_of()) {
            sum[c] += y[a - 1..b].iter().sum::<f64>();
            count[c] += b - a + 1;
        }
        Ok(sum.iter().zip(&count).map(|(s, &n)| s / n as f64).collect())
    }
}

/// Tables of the second pass over one sorted, weighted set of means.
#[derive(Debug, Clone)]
pub struct ClusterDpResult {
    t: usize,
    cost: Vec<Vec<f64>>,
    start: Vec<Vec<usize>>,
}

impl ClusterDpResult {
    pub fn max_clusters(&self) -> usize {
        self.cost.len()
    }

    /// `G(u, δ)` for the first `u` sorted means.
    pub fn cost(&self, u: usize, delta: usize) -> f64 {
        self.cost[delta - 1][u]
    }

    /// `G(t, δ)` over all sorted means.
    pub fn optimal_cost(&self, delta: usize) -> f64 {
        self.cost[delta - 1][self.t]
    }

    /// Contiguous blocks over sorted positions achieving `G(t, δ)`, given as
    /// breakpoints on `0..=t`.
    pub fn blocks(&self, delta: usize) -> Segmentation {
        let mut b = vec![self.t];
        let mut u = self.t;
        for dd in (2..=delta).rev() {
            u = self.start[dd - 1][u] - 1;
            b.push(u);
        }
        b.push(0);
        b.reverse();
        Segmentation::new(b).expect("backtracking yields increasing breakpoints")
    }
}

/// Runs the second pass for cluster counts `1..=max_clusters`.
pub fn second_pass(w: &WeightedLevels, max_clusters: usize) -> Result<ClusterDpResult> {
    let t = w.len();
    if max_clusters < 1 || max_clusters > t {
        return Err(Error::range(format!(
            "max_clusters must lie in [1,{t}], got {max_clusters}"
        )));
    }
    let mut cost = Vec::with_capacity(max_clusters);
    let mut start = Vec::with_capacity(max_clusters);

    let mut row = vec![f64::INFINITY; t + 1];
    for (u, c) in row.iter_mut().enumerate().skip(1) {
        *c = w.cost_unchecked(1, u);
    }
    cost.push(row);
    start.push(vec![1; t + 1]);

    for delta in 2..=max_clusters {
        let prev = &cost[delta - 2];
        let mut row = vec![f64::INFINITY; t + 1];
        let mut arg = vec![0; t + 1];
        for u in delta..=t {
            let mut best = f64::INFINITY;
            let mut best_i = delta;
            for i in delta..=u {
                let c = prev[i - 1] + w.cost_unchecked(i, u);
                if c < best {
                    best = c;
                    best_i = i;
                }
            }
            row[u] = best;
            arg[u] = best_i;
        }
        cost.push(row);
        start.push(arg);
    }
    Ok(ClusterDpResult { t, cost, start })
}

/// Maps sorted blocks back through the permutation onto the segments of
/// `seg`. Cluster labels follow block order, so label 0 has the lowest means.
pub fn reconstruct(seg: &Segmentation, blocks: &Segmentation, perm: &[usize]) -> Result<FullPartition> {
    let s = seg.num_segments();
    if perm.len() != s || blocks.n() != s {
        return Err(Error::invalid(format!(
            "{s} segments but permutation of length {} and blocks over {}",
            perm.len(),
            blocks.n()
        )));
    }
    let mut seen = vec![false; s];
    for &p in perm {
        if p >= s || seen[p] {
            return Err(Error::invalid("permutation is not a bijection"));
        }
        seen[p] = true;
    }
    let mut cluster_of = vec![0; s];
    for (label, (a, b)) in blocks.segments().enumerate() {
        for &orig in &perm[a - 1..b] {
            cluster_of[orig] = label;
        }
    }
    FullPartition::new(seg.clone(), ClusterAssignment::new(cluster_of)?)
}

/// Projection of `y` onto signals constant on each cluster.
pub fn fitted_values(y: &Signal, p: &FullPartition) -> Result<Vec<f64>> {
    let means = p.cluster_means(y.values())?;
    Ok(p.labels().into_iter().map(|c| means[c]).collect())
}

/// Segment means and lengths of `seg`, in segment order.
pub fn segment_levels(tables: &CostTables, seg: &Segmentation) -> (Vec<f64>, Vec<usize>) {
    seg.segments()
        .map(|(a, b)| (tables.mean_unchecked(a, b), b - a + 1))
        .unzip()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Exhaustive minimum over all contiguous partitions of the sorted means.
    fn brute_force(w: &WeightedLevels, delta: usize) -> f64 {
        let t = w.len();
        let mut best = f64::INFINITY;
        for mask in 0u32..(1 << (t - 1)) {
            if mask.count_ones() as usize != delta - 1 {
                continue;
            }
            let mut total = 0.0;
            let mut a = 1;
            for g in 1..t {
                if mask & (1 << (g - 1)) != 0 {
                    total += direct(w, a, g);
                    a = g + 1;
                }
            }
            total += direct(w, a, t);
            best = best.min(total);
        }
        best
    }

    fn direct(w: &WeightedLevels, k: usize, l: usize) -> f64 {
        let (m, a) = (&w.means()[k - 1..l], &w.weights()[k - 1..l]);
        let tw: f64 = a.iter().map(|&x| x as f64).sum();
        let mu = m.iter().zip(a).map(|(m, &a)| m * a as f64).sum::<f64>() / tw;
        m.iter().zip(a).map(|(m, &a)| a as f64 * (m - mu) * (m - mu)).sum()
    }

    #[test]
    fn singleton_clusters_cost_nothing() {
        let w = WeightedLevels::new(&[3.0, -1.0, 2.0, 7.5], &[2, 1, 4, 3]).unwrap();
        let r = second_pass(&w, 4).unwrap();
        assert_eq!(r.optimal_cost(4), 0.0);
    }

    #[test]
    fn two_clusters_of_three_means() {
        let w = WeightedLevels::new(&[0.0, 0.1, 5.0], &[10, 10, 10]).unwrap();
        let r = second_pass(&w, 2).unwrap();
        assert!((r.optimal_cost(2) - 0.05).abs() < 1e-12);
        assert_eq!(r.blocks(2).breakpoints(), &[0, 2, 3]);
    }

    #[test]
    fn rejects_bad_cluster_count() {
        let w = WeightedLevels::new(&[0.0, 1.0], &[1, 1]).unwrap();
        assert!(second_pass(&w, 0).is_err());
        assert!(second_pass(&w, 3).is_err());
    }

    #[test]
    fn matches_exhaustive_contiguous_partitions() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let t = rng.random_range(1..=10);
            let means: Vec<f64> = (0..t).map(|_| rng.random_range(-10.0..10.0)).collect();
            let weights: Vec<usize> = (0..t).map(|_| rng.random_range(1..20)).collect();
            let w = WeightedLevels::new(&means, &weights).unwrap();
            let r = second_pass(&w, t).unwrap();
            for delta in 1..=t {
                assert!((r.optimal_cost(delta) - brute_force(&w, delta)).abs() <= 1e-9);
                let blocks = r.blocks(delta);
                assert_eq!(blocks.num_segments(), delta);
                let via_blocks: f64 = blocks.segments().map(|(a, b)| direct(&w, a, b)).sum();
                assert!((via_blocks - r.optimal_cost(delta)).abs() <= 1e-9);
                if delta > 1 {
                    assert!(r.optimal_cost(delta) <= r.optimal_cost(delta - 1) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn reconstruct_identity_one_block() {
        let seg = Segmentation::new(vec![0, 2, 5, 6]).unwrap();
        let p = reconstruct(&seg, &Segmentation::whole(3).unwrap(), &[0, 1, 2]).unwrap();
        assert_eq!(p.assignment().cluster_of(), &[0, 0, 0]);
    }

    #[test]
    fn reconstruct_traces_permutation() {
        // sorted order is segment 2, 1, 3 (1-indexed)
        let seg = Segmentation::new(vec![0, 2, 5, 6]).unwrap();
        let blocks = Segmentation::new(vec![0, 2, 3]).unwrap();
        let p = reconstruct(&seg, &blocks, &[1, 0, 2]).unwrap();
        assert_eq!(p.assignment().cluster_of(), &[0, 0, 1]);
        assert_eq!(p.dprime(), 1);
        assert_eq!(p.dpp(), 2);
    }

    #[test]
    fn reconstruct_then_resort_round_trips() {
        let y = Signal::new(vec![5.0, 5.0, 1.0, 1.0, 9.0, 1.5, 1.5, 4.0]).unwrap();
        let seg = Segmentation::new(vec![0, 2, 4, 5, 7, 8]).unwrap();
        let t = CostTables::new(y.values());
        let (means, lens) = segment_levels(&t, &seg);
        let w = WeightedLevels::new(&means, &lens).unwrap();
        let blocks = Segmentation::new(vec![0, 2, 4, 5]).unwrap();
        let p = reconstruct(&seg, &blocks, w.perm()).unwrap();
        // sorted labels read back in sorted order must give the same blocks
        let sorted_labels: Vec<usize> = w.perm().iter().map(|&s| p.assignment().cluster_of()[s]).collect();
        assert_eq!(sorted_labels, vec![0, 0, 1, 1, 2]);
        assert!(p.assignment().respects_order(&means));
    }

    #[test]
    fn reconstruct_rejects_bad_inputs() {
        let seg = Segmentation::new(vec![0, 1, 2, 3]).unwrap();
        let blocks = Segmentation::new(vec![0, 1, 3]).unwrap();
        assert!(reconstruct(&seg, &blocks, &[0, 0, 2]).is_err());
        assert!(reconstruct(&seg, &Segmentation::whole(2).unwrap(), &[0, 1, 2]).is_err());
    }

    #[test]
    fn fitted_values_examples() {
        let y = Signal::new(vec![1.0, 2.0, 6.0]).unwrap();
        let p = FullPartition::from_labels(&[0, 0, 0]).unwrap();
        assert!(fitted_values(&y, &p).unwrap().iter().all(|&v| (v - 3.0).abs() < 1e-12));

        let y = Signal::new(vec![0.0, 0.0, 10.0, 10.0]).unwrap();
        let p = FullPartition::from_labels(&[0, 0, 1, 1]).unwrap();
        assert_eq!(fitted_values(&y, &p).unwrap(), vec![0.0, 0.0, 10.0, 10.0]);

        let y = Signal::new(vec![1.0, 5.0, 3.0]).unwrap();
        let p = FullPartition::from_labels(&[0, 1, 0]).unwrap();
        let f = fitted_values(&y, &p).unwrap();
        assert_eq!((f[0], f[1], f[2]), (2.0, 5.0, 2.0));
    }

    #[test]
    fn merge_fuses_adjacent_same_cluster_segments() {
        let seg = Segmentation::new(vec![0, 2, 4, 6, 8]).unwrap();
        let p = FullPartition::new(seg, ClusterAssignment::new(vec![0, 0, 1, 0]).unwrap()).unwrap();
        let m = p.merged();
        assert_eq!(m.segmentation().breakpoints(), &[0, 4, 6, 8]);
        assert_eq!(m.assignment().cluster_of(), &[0, 1, 0]);
        assert_eq!(m.labels(), p.labels());
    }

    #[test]
    fn assignment_validation() {
        assert!(ClusterAssignment::new(vec![0, 2]).is_err());
        assert!(ClusterAssignment::new(vec![]).is_err());
        let a = ClusterAssignment::new(vec![0, 1, 0]).unwrap();
        assert!(!a.respects_order(&[1.0, 2.0, 3.0]));
        assert!(a.respects_order(&[1.0, 3.0, 2.0]));
    }
}
