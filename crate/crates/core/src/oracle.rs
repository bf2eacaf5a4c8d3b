//! Brute-force references and the closed-form risk bound.
//!
//! The enumerator walks every set partition of `1..=n` as a restricted-growth
//! string (`a_1 = 0`, `a_i <= 1 + max(a_1..a_{i-1})`), so each partition is
//! produced once and in a fixed order.

use std::collections::BTreeMap;

use crate::clusterdp::FullPartition;
use crate::error::{Error, Result};
use crate::penalty::{log_binomial, log_stirling_restricted, Penalty, PenaltySpec};
use crate::selector::crit_with;
use crate::signal::Signal;

pub const MAX_ENUMERATION_N: usize = 12;
pub const MAX_EXACT_CRIT_N: usize = 9;

/// Stream of every set partition of `1..=n`.
#[derive(Debug, Clone)]
pub struct PartitionEnumeration {
    labels: Vec<usize>,
    done: bool,
}

impl Iterator for PartitionEnumeration {
    type Item = FullPartition;

    fn next(&mut self) -> Option<FullPartition> {
        if self.done {
            return None;
        }
        let out = FullPartition::from_labels(&self.labels).expect("restricted-growth strings are valid");

        // advance to the next restricted-growth string
        let n = self.labels.len();
        let mut prefix_max = vec![0; n];
        for i in 1..n {
            prefix_max[i] = prefix_max[i - 1].max(self.labels[i - 1]);
        }
        match (1..n).rev().find(|&i| self.labels[i] <= prefix_max[i]) {
            Some(i) => {
                self.labels[i] += 1;
                self.labels[i + 1..].fill(0);
            }
            None => self.done = true,
        }
        Some(out)
    }
}

pub fn enumerate_partitions(n: usize) -> Result<PartitionEnumeration> {
    if n == 0 {
        return Err(Error::invalid("n must be >= 1"));
    }
    if n > MAX_ENUMERATION_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_ENUMERATION_N,
        });
    }
    Ok(PartitionEnumeration {
        labels: vec![0; n],
        done: false,
    })
}

/// Number of partitions of `1..=n` in each `(d', d'')` class.
pub fn class_counts(n: usize) -> Result<BTreeMap<(usize, usize), u64>> {
    let mut counts = BTreeMap::new();
    for p in enumerate_partitions(n)? {
        *counts.entry((p.dprime(), p.dpp())).or_insert(0) += 1;
    }
    Ok(counts)
}

/// Exhaustive minimum of the criterion over all partitions of `1..=n`; the
/// first partition in enumeration order wins ties.
pub fn exact_min_crit(y: &Signal, spec: &PenaltySpec) -> Result<(f64, FullPartition)> {
    let n = y.len();
    if n > MAX_EXACT_CRIT_N {
        return Err(Error::TooLarge {
            n,
            limit: MAX_EXACT_CRIT_N,
        });
    }
    let penalty = Penalty::new(spec.clone())?;
    let mut best: Option<(f64, FullPartition)> = None;
    for p in enumerate_partitions(n)? {
        let c = crit_with(&penalty, y, &p)?;
        if best.as_ref().is_none_or(|(b, _)| c < *b) {
            best = Some((c, p));
        }
    }
    Ok(best.expect("at least one partition"))
}

/// Adaptive risk bound for a true model with dimensions `(d', d'')`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskBound {
    /// Bound on `E ||f_hat - f*||^2`.
    pub total: f64,
    /// `total / N`.
    pub per_sample: f64,
    /// `d'' ln N / N`; the bound is consistent when this vanishes with `N`.
    pub consistency_ratio: f64,
}

/// `x ln(y)` with `0 ln 0 = 0`.
fn xlny(x: f64, y: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * y.ln()
    }
}

/// `4 sigma^2 (7 + 3(d'+1) ln(N/d') + 6(d' ln(d'' e^{13/6}) + d'' ln(d' e^2) + d'' ln(N/d'')))`.
///
/// At `d' = 0` the `(d'+1) ln(N/d')` term follows the penalty's `ln N`
/// convention and the remaining `0 ln 0` products vanish.
pub fn risk_bound(dprime: usize, dpp: usize, n: usize, sigma: f64) -> Result<RiskBound> {
    if dprime > dpp || dpp > n || n == 0 {
        return Err(Error::range(format!(
            "need d' <= d'' <= N, got ({dprime}, {dpp}, {n})"
        )));
    }
    if dprime == 0 && dpp > 0 {
        return Err(Error::Inadmissible { dprime, dpp });
    }
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let (a, b, nf) = (dprime as f64, dpp as f64, n as f64);
    let cluster_term = if dprime == 0 {
        nf.ln()
    } else {
        (a + 1.0) * (nf / a).ln()
    };
    let inner = xlny(a, b * (13.0f64 / 6.0).exp())
        + xlny(b, a * std::f64::consts::E.powi(2))
        + xlny(b, nf / b);
    let total = 4.0 * sigma * sigma * (7.0 + 3.0 * cluster_term + 6.0 * inner);
    Ok(RiskBound {
        total,
        per_sample: total / nf,
        consistency_ratio: b * nf.ln() / nf,
    })
}

/// Side-by-side class sizes: enumerated count vs `S2(b+1,a+1) C(n,b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassCountRow {
    pub dprime: usize,
    pub dpp: usize,
    pub enumerated: u64,
    pub formula: f64,
}

pub fn class_count_table(n: usize) -> Result<Vec<ClassCountRow>> {
    let counts = class_counts(n)?;
    let mut rows = Vec::new();
    for dpp in 0..n {
        for dprime in 0..=dpp {
            let formula = if dprime == 0 && dpp > 0 {
                0.0
            } else {
                let s2 = log_stirling_restricted(dpp + 1, dprime + 1)?;
                (s2 + log_binomial(n, dpp)?).exp()
            };
            rows.push(ClassCountRow {
                dprime,
                dpp,
                enumerated: counts.get(&(dprime, dpp)).copied().unwrap_or(0),
                formula,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::penalty::DEFAULT_K;
    use crate::selector::select;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::HashSet;

    fn bell(n: usize) -> u64 {
        // Bell triangle
        let mut row = vec![1u64];
        for _ in 1..n {
            let mut next = vec![*row.last().unwrap()];
            for &v in &row {
                let last = *next.last().unwrap();
                next.push(last + v);
            }
            row = next;
        }
        *row.last().unwrap()
    }

    #[test]
    fn counts_match_bell_numbers() {
        assert_eq!(enumerate_partitions(1).unwrap().count(), 1);
        assert_eq!(enumerate_partitions(4).unwrap().count(), 15);
        for n in 1..=9 {
            let all: HashSet<_> = enumerate_partitions(n).unwrap().map(|p| p.labels()).collect();
            assert_eq!(all.len() as u64, bell(n));
        }
    }

    #[test]
    fn classes_of_three() {
        let c = class_counts(3).unwrap();
        assert_eq!(c[&(0, 0)], 1);
        assert_eq!(c.values().sum::<u64>(), 5);
    }

    #[test]
    fn size_guards() {
        assert!(matches!(enumerate_partitions(13), Err(Error::TooLarge { .. })));
        let y = Signal::new(vec![0.0; 10]).unwrap();
        let spec = PenaltySpec::new(10, DEFAULT_K, 1.0, 3).unwrap();
        assert!(exact_min_crit(&y, &spec).is_err());
    }

    #[test]
    fn exact_min_on_constant_is_minimal_model() {
        let y = Signal::new(vec![1.0; 7]).unwrap();
        let spec = PenaltySpec::new(7, DEFAULT_K, 1.0, 3).unwrap();
        let (_, p) = exact_min_crit(&y, &spec).unwrap();
        assert_eq!((p.dprime(), p.dpp()), (0, 0));
    }

    #[test]
    fn exact_min_below_true_model() {
        let y = Signal::new(vec![0.0, 0.0, 10.0, 10.0]).unwrap();
        let spec = PenaltySpec::new(4, DEFAULT_K, 1.0, 3).unwrap();
        let truth = FullPartition::from_labels(&[0, 0, 1, 1]).unwrap();
        let (best, _) = exact_min_crit(&y, &spec).unwrap();
        assert!(best <= crate::selector::crit_of_partition(&y, &truth, &spec).unwrap());
    }

    #[test]
    fn exact_min_bounds_the_relaxation() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..20 {
            let y: Vec<f64> = (0..8).map(|_| rng.random_range(-4.0..4.0)).collect();
            let y = Signal::new(y).unwrap();
            let spec = PenaltySpec::new(8, DEFAULT_K, rng.random_range(0.01..1.0), 4).unwrap();
            let (best, _) = exact_min_crit(&y, &spec).unwrap();
            assert!(best <= select(&y, &spec).unwrap().crit_value + 1e-9);
        }
    }

    #[test]
    fn exact_min_is_order_invariant() {
        let y = Signal::new(vec![0.3, 2.0, 1.9, 0.1, 5.0, 0.2, 2.1]).unwrap();
        let spec = PenaltySpec::new(7, 1.0, 0.05, 3).unwrap();
        let penalty = Penalty::new(spec.clone()).unwrap();
        let mut all: Vec<FullPartition> = enumerate_partitions(7).unwrap().collect();
        all.reverse();
        let rev_min = all
            .iter()
            .map(|p| crit_with(&penalty, &y, p).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(rev_min, exact_min_crit(&y, &spec).unwrap().0);
    }

    #[test]
    fn risk_bound_example() {
        let want = 4.0
            * (7.0
                + 15.0 * 500f64.ln()
                + 6.0 * (4.0 * (12f64.ln() + 13.0 / 6.0) + 12.0 * (4f64.ln() + 2.0) + 12.0 * (2000.0f64 / 12.0).ln()));
        let b = risk_bound(4, 12, 2000, 1.0).unwrap();
        assert!((b.total - want).abs() < 1e-9);
        assert!((b.total - 3296.09).abs() < 0.01);
        assert!((b.per_sample - want / 2000.0).abs() < 1e-12);
        assert!((b.consistency_ratio - 12.0 * 2000f64.ln() / 2000.0).abs() < 1e-15);
        let twice = risk_bound(4, 12, 2000, 2.0).unwrap();
        assert!((twice.total - 4.0 * b.total).abs() < 1e-9);
    }

    #[test]
    fn risk_bound_edges() {
        let b = risk_bound(0, 0, 100, 1.0).unwrap();
        assert!((b.total - 4.0 * (7.0 + 3.0 * 100f64.ln())).abs() < 1e-12);
        assert!(risk_bound(2, 1, 100, 1.0).is_err());
        assert!(risk_bound(0, 3, 100, 1.0).is_err());
        assert!(risk_bound(1, 1, 100, 0.0).is_err());
    }

    #[test]
    fn class_table_reports_both_counts() {
        let rows = class_count_table(6).unwrap();
        let total: u64 = rows.iter().map(|r| r.enumerated).sum();
        assert_eq!(total, bell(6));
        // (d', d'') = (1, 1): two clusters, one change point. Enumeration finds
        // n-1 placements, the prior's count uses C(n, 1) = n.
        let r = rows.iter().find(|r| r.dprime == 1 && r.dpp == 1).unwrap();
        assert_eq!(r.enumerated, 5);
        assert!((r.formula - 6.0).abs() < 1e-9);
    }
}
