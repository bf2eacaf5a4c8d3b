//! Combinatorics of the model prior and the resulting penalty.
//!
//! The prior mass of a partition with `d'+1` clusters and `d''+1` segments is
//!
//! ```text
//! p_m = exp(-d' - d'') / (B_N * S2(d''+1, d'+1) * C(N, d''))
//! ```
//!
//! with `S2(n, k) = S(n-1, k-1)` counting partitions whose classes never hold
//! two neighbouring indices, and the penalty is
//! `pen = 2 ln(1/p_m) + (d'+1) ln(N/d')`. Everything is kept in log domain;
//! `S(2001, k)` is far beyond any fixed-width integer.

use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// How the `(d'+1) ln(N/d')` term is evaluated at `d' = 0`, where it is
/// undefined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ZeroDimConvention {
    /// Substitute `ln N`.
    #[default]
    LogN,
    /// Drop the term.
    Omit,
}

/// Parameters of `Crit(m) = ||y - f_m||^2 + sigma2 * K * pen(m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PenaltySpec {
    pub n: usize,
    pub k: f64,
    pub sigma2: f64,
    /// Largest number of change points explored (`D`).
    pub max_changes: usize,
    pub zero_dprime: ZeroDimConvention,
}

/// Default penalty multiplier, `K = 3a` with `a = 2`.
pub const DEFAULT_K: f64 = 6.0;

impl PenaltySpec {
    pub fn new(n: usize, k: f64, sigma2: f64, max_changes: usize) -> Result<Self> {
        let spec = Self {
            n,
            k,
            sigma2,
            max_changes,
            zero_dprime: ZeroDimConvention::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.k.is_finite() || self.k <= 0.0 {
            return Err(Error::invalid(format!("K must be positive, got {}", self.k)));
        }
        if !self.sigma2.is_finite() || self.sigma2 <= 0.0 {
            return Err(Error::invalid(format!(
                "sigma^2 must be positive, got {}",
                self.sigma2
            )));
        }
        if self.n < 2 || self.max_changes < 1 || self.max_changes > self.n - 1 {
            return Err(Error::invalid(format!(
                "need 1 <= D <= N-1, got D={} with N={}",
                self.max_changes, self.n
            )));
        }
        Ok(())
    }
}

/// `ln(e^a + e^b)` without overflow; `-inf` acts as zero.
fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// `ln C(n, k)` through log-gamma.
pub fn log_binomial(n: usize, k: usize) -> Result<f64> {
    if k > n {
        return Err(Error::range(format!("C({n},{k}) needs k <= n")));
    }
    if k == 0 || k == n {
        return Ok(0.0);
    }
    Ok(ln_gamma(n as f64 + 1.0) - ln_gamma(k as f64 + 1.0) - ln_gamma((n - k) as f64 + 1.0))
}

/// `ln S(n, k)` by the recurrence `S(n,k) = S(n-1,k-1) + k S(n-1,k)`, one row
/// at a time, keeping only columns `0..=k`.
pub fn log_stirling2nd(n: usize, k: usize) -> Result<f64> {
    if k < 1 || k > n {
        return Err(Error::range(format!("S({n},{k}) needs 1 <= k <= n")));
    }
    let mut row = vec![f64::NEG_INFINITY; k + 1];
    row[0] = 0.0;
    for m in 1..=n {
        let top = m.min(k);
        for j in (1..=top).rev() {
            let stay = if j < m {
                (j as f64).ln() + row[j]
            } else {
                f64::NEG_INFINITY
            };
            row[j] = log_add(row[j - 1], stay);
        }
        row[0] = f64::NEG_INFINITY;
    }
    Ok(row[k])
}

/// `ln S2(n, k) = ln S(n-1, k-1)` for `n, k >= 2`, and `S2(1,1) = 1`.
pub fn log_stirling_restricted(n: usize, k: usize) -> Result<f64> {
    if n == 1 && k == 1 {
        return Ok(0.0);
    }
    if n < 2 || k < 2 || k > n {
        return Err(Error::range(format!("S2({n},{k}) needs 2 <= k <= n")));
    }
    log_stirling2nd(n - 1, k - 1)
}

/// Limit of the prior normalizer, `e^3 / ((e-1)^2 (e+1))`.
pub fn b_n_limit() -> f64 {
    let e = std::f64::consts::E;
    e.powi(3) / ((e - 1.0).powi(2) * (e + 1.0))
}

/// `ln B_N`, the closed-form normalizer of the prior.
pub fn log_b_n(n: usize) -> f64 {
    let n = n as f64;
    let t = -(-2.0 * n).exp() - (-n - 1.0).exp() + (-2.0 * n - 1.0).exp() - (-n - 2.0).exp()
        + (-2.0 * n - 2.0).exp();
    b_n_limit().ln() + t.ln_1p()
}

/// Triangular table of `ln S(n, k)` for `n <= cap`, with on-demand fallback
/// beyond it.
#[derive(Debug, Clone)]
pub struct LogCombinatorics {
    stirling: Vec<Vec<f64>>,
}

impl LogCombinatorics {
    pub fn new(cap: usize) -> Self {
        let mut stirling: Vec<Vec<f64>> = Vec::with_capacity(cap + 1);
        stirling.push(vec![0.0]);
        for m in 1..=cap {
            let prev = &stirling[m - 1];
            let mut row = vec![f64::NEG_INFINITY; m + 1];
            for j in 1..=m {
                let stay = if j < m {
                    (j as f64).ln() + prev[j]
                } else {
                    f64::NEG_INFINITY
                };
                row[j] = log_add(prev[j - 1], stay);
            }
            stirling.push(row);
        }
        Self { stirling }
    }

    pub fn cap(&self) -> usize {
        self.stirling.len() - 1
    }

    pub fn log_stirling2nd(&self, n: usize, k: usize) -> Result<f64> {
        if k < 1 || k > n {
            return Err(Error::range(format!("S({n},{k}) needs 1 <= k <= n")));
        }
        match self.stirling.get(n) {
            Some(row) => Ok(row[k]),
            None => log_stirling2nd(n, k),
        }
    }

    pub fn log_stirling_restricted(&self, n: usize, k: usize) -> Result<f64> {
        if n == 1 && k == 1 {
            return Ok(0.0);
        }
        if n < 2 || k < 2 || k > n {
            return Err(Error::range(format!("S2({n},{k}) needs 2 <= k <= n")));
        }
        self.log_stirling2nd(n - 1, k - 1)
    }
}

/// Penalty evaluator bound to one [`PenaltySpec`].
#[derive(Debug, Clone)]
pub struct Penalty {
    spec: PenaltySpec,
    comb: LogCombinatorics,
    log_b: f64,
}

impl Penalty {
    pub fn new(spec: PenaltySpec) -> Result<Self> {
        spec.validate()?;
        let comb = LogCombinatorics::new(spec.max_changes + 1);
        let log_b = log_b_n(spec.n);
        Ok(Self { spec, comb, log_b })
    }

    pub fn spec(&self) -> &PenaltySpec {
        &self.spec
    }

    /// `ln(1/p_m)` without the `d'' <= N-1` cap; the prior's normalizing sum
    /// reaches `d'' = N`.
    fn log_inv_prior_raw(&self, dprime: usize, dpp: usize) -> Result<f64> {
        if dprime > dpp {
            return Err(Error::range(format!("need d' <= d'', got d'={dprime}, d''={dpp}")));
        }
        if dprime == 0 && dpp > 0 {
            return Err(Error::Inadmissible { dprime, dpp });
        }
        let s2 = self.comb.log_stirling_restricted(dpp + 1, dprime + 1)?;
        let c = log_binomial(self.spec.n, dpp)?;
        Ok(self.log_b + s2 + c + (dprime + dpp) as f64)
    }

    /// `ln(1/p_m) = ln B_N + ln S2(d''+1, d'+1) + ln C(N, d'') + d' + d''`.
    pub fn log_inv_prior(&self, dprime: usize, dpp: usize) -> Result<f64> {
        if dpp >= self.spec.n {
            return Err(Error::range(format!("need d'' <= N-1, got {dpp}")));
        }
        self.log_inv_prior_raw(dprime, dpp)
    }

    /// `(d'+1) ln(N/d')`, with the configured convention at `d' = 0`.
    pub fn cluster_term(&self, dprime: usize) -> f64 {
        let n = self.spec.n as f64;
        if dprime == 0 {
            match self.spec.zero_dprime {
                ZeroDimConvention::LogN => n.ln(),
                ZeroDimConvention::Omit => 0.0,
            }
        } else {
            (dprime as f64 + 1.0) * (n / dprime as f64).ln()
        }
    }

    /// `pen = 2 ln(1/p_m) + (d'+1) ln(N/d')`.
    pub fn pen(&self, dprime: usize, dpp: usize) -> Result<f64> {
        Ok(2.0 * self.log_inv_prior(dprime, dpp)? + self.cluster_term(dprime))
    }

    /// `sigma^2 * K * pen`.
    pub fn scaled_pen(&self, dprime: usize, dpp: usize) -> Result<f64> {
        Ok(self.spec.sigma2 * self.spec.k * self.pen(dprime, dpp)?)
    }

    /// Total prior mass of the class `(d', d'')` as counted by the prior's
    /// normalization: `|A(d',d'')| * p_m` with `|A| = S2(d''+1,d'+1) C(N,d'')`.
    ///
    /// For the empty classes `d' = 0 < d''` the count and the prior's
    /// denominator cancel formally, leaving `exp(-d'-d'') / B_N`; that is the
    /// reading under which the masses sum to one.
    pub fn class_mass(&self, dprime: usize, dpp: usize) -> Result<f64> {
        if dprime > dpp || dpp > self.spec.n {
            return Err(Error::range(format!("class ({dprime},{dpp}) out of range")));
        }
        if dprime == 0 && dpp > 0 {
            return Ok((-(dpp as f64) - self.log_b).exp());
        }
        let log_count = self.comb.log_stirling_restricted(dpp + 1, dprime + 1)?
            + log_binomial(self.spec.n, dpp)?;
        Ok((log_count - self.log_inv_prior_raw(dprime, dpp)?).exp())
    }
}

/// One-shot `ln(1/p_m)` for `spec`.
pub fn log_inv_prior(dprime: usize, dpp: usize, spec: &PenaltySpec) -> Result<f64> {
    Penalty::new(spec.clone())?.log_inv_prior(dprime, dpp)
}

/// One-shot `pen(m)` for `spec`.
pub fn pen(dprime: usize, dpp: usize, spec: &PenaltySpec) -> Result<f64> {
    Penalty::new(spec.clone())?.pen(dprime, dpp)
}
