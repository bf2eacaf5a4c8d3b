//! Evaluation statistics for simulated runs: per-sample squared error,
//! change-point precision and per-cluster level error.

use crate::error::{Error, Result};

/// `||fhat - fstar||^2 / N`.
pub fn mse(fhat: &[f64], fstar: &[f64]) -> Result<f64> {
    if fhat.len() != fstar.len() {
        return Err(Error::invalid(format!(
            "length mismatch: {} vs {}",
            fhat.len(),
            fstar.len()
        )));
    }
    if fhat.is_empty() {
        return Err(Error::invalid("cannot take the mse of empty sequences"));
    }
    let ss: f64 = fhat.iter().zip(fstar).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok(ss / fhat.len() as f64)
}

/// Fraction of detected change points that match a true one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpAccuracy {
    pub value: f64,
    pub matched: usize,
    /// Set when nothing was detected but true change points exist; the ratio
    /// is then undefined and `value` is reported as 0.
    pub undefined: bool,
}

/// Greedy one-to-one matching: candidate pairs within `tol` are taken in
/// order of distance, each true and each estimated point used at most once.
/// Returns `matched / |est|`.
pub fn cp_accuracy(est: &[usize], truth: &[usize], tol: usize) -> CpAccuracy {
    let mut est: Vec<usize> = est.to_vec();
    let mut truth: Vec<usize> = truth.to_vec();
    est.sort_unstable();
    est.dedup();
    truth.sort_unstable();
    truth.dedup();

    if est.is_empty() {
        return CpAccuracy {
            value: if truth.is_empty() { 1.0 } else { 0.0 },
            matched: 0,
            undefined: !truth.is_empty(),
        };
    }

    let mut pairs = Vec::new();
    for (ti, &t) in truth.iter().enumerate() {
        for (ei, &e) in est.iter().enumerate() {
            let dist = t.abs_diff(e);
            if dist <= tol {
                pairs.push((dist, t, e, ti, ei));
            }
        }
    }
    pairs.sort_unstable();
    let mut used_t = vec![false; truth.len()];
    let mut used_e = vec![false; est.len()];
    let mut matched = 0;
    for (_, _, _, ti, ei) in pairs {
        if !used_t[ti] && !used_e[ei] {
            used_t[ti] = true;
            used_e[ei] = true;
            matched += 1;
        }
    }
    CpAccuracy {
        value: matched as f64 / est.len() as f64,
        matched,
        undefined: false,
    }
}

/// Absolute error between estimated and true cluster levels under greedy
/// nearest-value one-to-one matching.
///
/// Entry `i` belongs to `truth[i]`; unmatched true levels get `+inf`, and one
/// `+inf` is appended per unmatched estimated level.
pub fn level_errors(est: &[f64], truth: &[f64]) -> Vec<f64> {
    let mut pairs = Vec::with_capacity(est.len() * truth.len());
    for (ti, t) in truth.iter().enumerate() {
        for (ei, e) in est.iter().enumerate() {
            pairs.push(((t - e).abs(), ti, ei));
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut out = vec![f64::INFINITY; truth.len()];
    let mut used_e = vec![false; est.len()];
    let mut used_t = vec![false; truth.len()];
    for (dist, ti, ei) in pairs {
        if !used_t[ti] && !used_e[ei] {
            used_t[ti] = true;
            used_e[ei] = true;
            out[ti] = dist;
        }
    }
    out.extend(used_e.iter().filter(|u| !**u).map(|_| f64::INFINITY));
    out
}

/// Per-run evaluation summary.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mse_per_sample: f64,
    pub bound_per_sample: f64,
    pub cp_accuracy: f64,
    pub accuracy_undefined: bool,
    pub n_detected: usize,
    pub n_true: usize,
    pub level_errors: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(mse(&[1.0; 4], &[0.0; 4]).unwrap(), 1.0);
        assert_eq!(mse(&[0.0, 2.0], &[0.0, 0.0]).unwrap(), 2.0);
        assert!(mse(&[0.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn accuracy_examples() {
        assert_eq!(cp_accuracy(&[10, 40, 90], &[10, 40, 90], 0).value, 1.0);
        assert_eq!(cp_accuracy(&[10, 50], &[12], 5).value, 0.5);
        assert_eq!(cp_accuracy(&[10, 11], &[10], 2).value, 0.5);
        assert_eq!(cp_accuracy(&[], &[], 5).value, 1.0);
        let a = cp_accuracy(&[], &[7], 5);
        assert_eq!(a.value, 0.0);
        assert!(a.undefined);
    }

    #[test]
    fn nearest_pairs_are_matched_first() {
        // 14 may match 10 or 16; nearest-first gives it 16 and leaves 10 for 9.
        let a = cp_accuracy(&[9, 14], &[10, 16], 4);
        assert_eq!(a.matched, 2);
    }

    #[test]
    fn level_error_examples() {
        assert_eq!(level_errors(&[5.0, 0.0], &[0.0, 5.0]), vec![0.0, 0.0]);
        let e = level_errors(&[0.1, 5.2], &[0.0, 5.0]);
        assert!((e[0] - 0.1).abs() < 1e-12 && (e[1] - 0.2).abs() < 1e-12);
        assert_eq!(level_errors(&[0.0], &[0.0, 5.0]), vec![0.0, f64::INFINITY]);
        assert_eq!(level_errors(&[0.0, 9.0], &[0.0]), vec![0.0, f64::INFINITY]);
    }

    proptest! {
        #[test]
        fn accuracy_is_permutation_invariant_and_monotone(
            est in prop::collection::vec(0usize..200, 0..12),
            truth in prop::collection::vec(0usize..200, 0..12),
            tol in 0usize..10,
        ) {
            let a = cp_accuracy(&est, &truth, tol);
            let mut er = est.clone();
            er.reverse();
            let mut tr = truth.clone();
            tr.reverse();
            prop_assert_eq!(a, cp_accuracy(&er, &tr, tol));
            prop_assert!((0.0..=1.0).contains(&a.value));
            prop_assert!(cp_accuracy(&est, &truth, tol + 1).value >= a.value);
        }

        #[test]
        fn mse_scales_quadratically(
            f in prop::collection::vec(-10.0f64..10.0, 1..30),
            c in -5.0f64..5.0,
        ) {
            let g: Vec<f64> = f.iter().map(|v| v + 1.0).collect();
            prop_assert_eq!(mse(&f, &f).unwrap(), 0.0);
            let fc: Vec<f64> = f.iter().map(|v| v * c).collect();
            let gc: Vec<f64> = g.iter().map(|v| v * c).collect();
            let base = mse(&f, &g).unwrap();
            prop_assert!((mse(&fc, &gc).unwrap() - c * c * base).abs() < 1e-9 * (1.0 + c * c));
        }
    }
}
