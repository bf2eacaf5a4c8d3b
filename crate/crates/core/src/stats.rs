//! Prefix-sum tables for constant-time segment means and within-segment sums
//! of squared deviations, over the raw signal and over sorted, weighted
//! segment means.
//!
//! Both tables use closed 1-indexed ranges `[k, l]`.

use crate::error::{Error, Result};

/// Prefix sums `cum[l] = y_1 + .. + y_l` and `cumsq[l] = y_1^2 + .. + y_l^2`.
#[derive(Debug, Clone)]
pub struct CostTables {
    cum: Vec<f64>,
    cumsq: Vec<f64>,
}

impl CostTables {
    pub fn new(y: &[f64]) -> Self {
        let mut cum = Vec::with_capacity(y.len() + 1);
        let mut cumsq = Vec::with_capacity(y.len() + 1);
        let (mut s, mut s2) = (0.0, 0.0);
        cum.push(s);
        cumsq.push(s2);
        for &v in y {
            s += v;
            s2 += v * v;
            cum.push(s);
            cumsq.push(s2);
        }
        Self { cum, cumsq }
    }

    pub fn n(&self) -> usize {
        self.cum.len() - 1
    }

    pub fn cum(&self) -> &[f64] {
        &self.cum
    }

    pub fn cumsq(&self) -> &[f64] {
        &self.cumsq
    }

    fn check(&self, k: usize, l: usize) -> Result<()> {
        if k < 1 || k > l || l > self.n() {
            return Err(Error::range(format!(
                "segment [{k},{l}] not within [1,{}]",
                self.n()
            )));
        }
        Ok(())
    }

    pub fn segment_mean(&self, k: usize, l: usize) -> Result<f64> {
        self.check(k, l)?;
        Ok(self.mean_unchecked(k, l))
    }

    pub fn segment_cost(&self, k: usize, l: usize) -> Result<f64> {
        self.check(k, l)?;
        Ok(self.cost_unchecked(k, l))
    }

    #[inline]
    pub(crate) fn mean_unchecked(&self, k: usize, l: usize) -> f64 {
        (self.cum[l] - self.cum[k - 1]) / (l - k + 1) as f64
    }

    /// Sum of squares minus squared sum over length; cancellation can leave a
    /// tiny negative residue, which is clamped.
    #[inline]
    pub(crate) fn cost_unchecked(&self, k: usize, l: usize) -> f64 {
        let s = self.cum[l] - self.cum[k - 1];
        let s2 = self.cumsq[l] - self.cumsq[k - 1];
        let r = s2 - s * s / (l - k + 1) as f64;
        debug_assert!(r >= -1e-9 * (1.0 + s2.abs()), "segment cost {r} too negative");
        r.max(0.0)
    }
}

/// Segment means sorted ascending, with their lengths as weights and the
/// permutation back to the original segment order.
#[derive(Debug, Clone)]
pub struct WeightedLevels {
    means: Vec<f64>,
    weights: Vec<usize>,
    perm: Vec<usize>,
    cw: Vec<f64>,
    cwm: Vec<f64>,
    cwm2: Vec<f64>,
}

impl WeightedLevels {
    /// Sorts `(mean, weight)` pairs given in original segment order. Ties in
    /// the mean keep the original order, so the permutation is deterministic.
    pub fn new(means: &[f64], weights: &[usize]) -> Result<Self> {
        if means.len() != weights.len() {
            return Err(Error::invalid("means and weights differ in length"));
        }
        if means.is_empty() {
            return Err(Error::invalid("need at least one level"));
        }
        if weights.contains(&0) {
            return Err(Error::invalid("weights must be >= 1"));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("means must be finite"));
        }
        let mut perm: Vec<usize> = (0..means.len()).collect();
        perm.sort_by(|&a, &b| means[a].total_cmp(&means[b]).then(a.cmp(&b)));
        let sorted_means: Vec<f64> = perm.iter().map(|&i| means[i]).collect();
        let sorted_weights: Vec<usize> = perm.iter().map(|&i| weights[i]).collect();

        let t = means.len();
        let (mut cw, mut cwm, mut cwm2) = (
            Vec::with_capacity(t + 1),
            Vec::with_capacity(t + 1),
            Vec::with_capacity(t + 1),
        );
        let (mut a, mut b, mut c) = (0.0, 0.0, 0.0);
        cw.push(a);
        cwm.push(b);
        cwm2.push(c);
        for (&m, &w) in sorted_means.iter().zip(&sorted_weights) {
            let w = w as f64;
            a += w;
            b += w * m;
            c += w * m * m;
            cw.push(a);
            cwm.push(b);
            cwm2.push(c);
        }
        Ok(Self {
            means: sorted_means,
            weights: sorted_weights,
            perm,
            cw,
            cwm,
            cwm2,
        })
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn weights(&self) -> &[usize] {
        &self.weights
    }

    /// `perm()[p]` is the original (0-based) segment at sorted position `p`.
    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    fn check(&self, k: usize, l: usize) -> Result<()> {
        if k < 1 || k > l || l > self.len() {
            return Err(Error::range(format!(
                "sorted range [{k},{l}] not within [1,{}]",
                self.len()
            )));
        }
        Ok(())
    }

    /// Weighted mean of sorted positions `k..=l`.
    pub fn weighted_mean(&self, k: usize, l: usize) -> Result<f64> {
        self.check(k, l)?;
        Ok(self.mean_unchecked(k, l))
    }

    /// Weighted sum of squared deviations of sorted means `k..=l` about their
    /// weighted mean.
    pub fn weighted_cost(&self, k: usize, l: usize) -> Result<f64> {
        self.check(k, l)?;
        Ok(self.cost_unchecked(k, l))
    }

    #[inline]
    pub(crate) fn mean_unchecked(&self, k: usize, l: usize) -> f64 {
        (self.cwm[l] - self.cwm[k - 1]) / (self.cw[l] - self.cw[k - 1])
    }

    #[inline]
    pub(crate) fn cost_unchecked(&self, k: usize, l: usize) -> f64 {
        let w = self.cw[l] - self.cw[k - 1];
        let s = self.cwm[l] - self.cwm[k - 1];
        let s2 = self.cwm2[l] - self.cwm2[k - 1];
        (s2 - s * s / w).max(0.0)
    }
}
