//! Observed sequences, ground-truth piecewise-constant specifications and the
//! Gaussian sampler.
//!
//! Segments are closed, 1-indexed intervals `(start, end)` over `1..=n`.
//! Noise is drawn from a ChaCha8 stream seeded with `seed_from_u64(seed)` and
//! shaped by the ziggurat standard normal of `rand_distr`, so a given
//! `(spec, sigma, seed)` always yields the same bits.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// An observed real-valued sequence of length `N >= 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    values: Vec<f64>,
}

impl Signal {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("signal must contain at least one value"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!(
                "signal value at index {} is not finite",
                i + 1
            )));
        }
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Multiplies every value by `c`.
    pub fn scaled(&self, c: f64) -> Result<Signal> {
        Signal::new(self.values.iter().map(|v| v * c).collect())
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

/// One cluster of a ground-truth model: a level shared by a set of segments.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub level: f64,
    pub segments: Vec<(usize, usize)>,
}

/// Ground-truth partition of `1..=n` into clusters of maximal segments.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseSpec {
    clusters: Vec<Cluster>,
    n: usize,
    // (start, end, cluster index) sorted by start
    ordered: Vec<(usize, usize, usize)>,
}

impl PiecewiseSpec {
    /// Validates coverage, disjointness, maximality and distinct levels.
    pub fn new(clusters: Vec<Cluster>, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("spec length n must be >= 1"));
        }
        if clusters.is_empty() {
            return Err(Error::invalid("spec needs at least one cluster"));
        }
        for (c, cl) in clusters.iter().enumerate() {
            if !cl.level.is_finite() {
                return Err(Error::invalid(format!("cluster {} level is not finite", c + 1)));
            }
            if cl.segments.is_empty() {
                return Err(Error::invalid(format!("cluster {} has no segments", c + 1)));
            }
            for other in &clusters[..c] {
                if other.level == cl.level {
                    return Err(Error::invalid(format!(
                        "duplicate cluster level {}",
                        cl.level
                    )));
                }
            }
        }

        let mut ordered = Vec::new();
        for (c, cl) in clusters.iter().enumerate() {
            for &(a, b) in &cl.segments {
                if a < 1 || a > b || b > n {
                    return Err(Error::invalid(format!(
                        "segment [{a},{b}] of cluster {} is not inside [1,{n}]",
                        c + 1
                    )));
                }
                ordered.push((a, b, c));
            }
        }
        ordered.sort_unstable();

        let mut next = 1;
        for (i, &(a, b, c)) in ordered.iter().enumerate() {
            if a < next {
                return Err(Error::invalid(format!("segment [{a},{b}] overlaps its predecessor")));
            }
            if a > next {
                return Err(Error::invalid(format!("indices {next}..{} are not covered", a - 1)));
            }
            if i > 0 && ordered[i - 1].2 == c {
                return Err(Error::invalid(format!(
                    "segments ending at {} and starting at {a} are adjacent in the same cluster",
                    a - 1
                )));
            }
            next = b + 1;
        }
        if next != n + 1 {
            return Err(Error::invalid(format!("indices {next}..{n} are not covered")));
        }

        Ok(Self {
            clusters,
            n,
            ordered,
        })
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Clustering dimension d' (clusters minus one).
    pub fn dprime(&self) -> usize {
        self.clusters.len() - 1
    }

    /// Change-point dimension d'' (segments minus one).
    pub fn dpp(&self) -> usize {
        self.ordered.len() - 1
    }

    /// Segments in index order as `(start, end, cluster index)`.
    pub fn segments_in_order(&self) -> &[(usize, usize, usize)] {
        &self.ordered
    }

    /// Last index of every segment but the final one.
    pub fn change_points(&self) -> Vec<usize> {
        self.ordered[..self.ordered.len() - 1]
            .iter()
            .map(|&(_, b, _)| b)
            .collect()
    }

    /// The noiseless signal f*.
    pub fn ground_truth(&self) -> Vec<f64> {
        let mut f = vec![0.0; self.n];
        for &(a, b, c) in &self.ordered {
            f[a - 1..b].fill(self.clusters[c].level);
        }
        f
    }

    /// Smallest absolute level difference between index-adjacent segments.
    pub fn smallest_jump(&self) -> Option<f64> {
        self.ordered
            .windows(2)
            .map(|w| (self.clusters[w[0].2].level - self.clusters[w[1].2].level).abs())
            .min_by(|a, b| a.total_cmp(b))
    }
}

/// Draws `y_i = f*_i + sigma * e_i` with i.i.d. standard normal `e_i`.
pub fn generate(spec: &PiecewiseSpec, sigma: f64, seed: u64) -> Result<Signal> {
    if !sigma.is_finite() || sigma <= 0.0 {
        return Err(Error::invalid(format!("sigma must be positive, got {sigma}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = spec
        .ground_truth()
        .into_iter()
        .map(|f| {
            let e: f64 = StandardNormal.sample(&mut rng);
            f + sigma * e
        })
        .collect();
    Signal::new(values)
}

/// Default levels of the built-in example, clusters [1]..[5]: equally spaced with unit
/// gap. Only the [1]/[3] boundaries carry a unit jump.
pub const EXAMPLE1_DEFAULT_LEVELS: [f64; 5] = [1.0, 3.0, 0.0, 2.0, 4.0];

/// Built-in example boundaries as listed, cluster by cluster. The listing
/// overlaps at index 926; see [`example1_spec`].
const EXAMPLE1_LISTING: [&[(usize, usize)]; 5] = [
    &[(615, 678), (821, 926), (1019, 1211), (1753, 2000)],
    &[(1, 100), (679, 820), (1212, 1280)],
    &[(101, 214), (505, 614), (926, 1018), (1281, 1600)],
    &[(215, 504)],
    &[(1601, 1752)],
];

/// Five-cluster, thirteen-segment partition of `1..=2000`.
///
/// Indices claimed by two listed segments go to the one listed first; the
/// later segment is shrunk, so `[926,1018]` of cluster [3] becomes
/// `[927,1018]`.
pub fn example1_spec(levels: [f64; 5]) -> Result<PiecewiseSpec> {
    let mut claimed = vec![false; 2001];
    let mut clusters = Vec::with_capacity(5);
    for (segs, &level) in EXAMPLE1_LISTING.iter().zip(levels.iter()) {
        let mut kept = Vec::with_capacity(segs.len());
        for &(mut a, mut b) in segs.iter() {
            while a <= b && claimed[a] {
                a += 1;
            }
            while b >= a && claimed[b] {
                b -= 1;
            }
            if a > b {
                continue;
            }
            claimed[a..=b].fill(true);
            kept.push((a, b));
        }
        clusters.push(Cluster {
            level,
            segments: kept,
        });
    }
    PiecewiseSpec::new(clusters, 2000)
}

/// Noise level for a signal-to-noise ratio defined as the smallest jump of
/// f* divided by the noise variance: `sigma = sqrt(J / snr)`.
pub fn snr_to_sigma(spec: &PiecewiseSpec, snr: f64) -> Result<f64> {
    if !snr.is_finite() || snr <= 0.0 {
        return Err(Error::invalid(format!("snr must be positive, got {snr}")));
    }
    let jump = spec
        .smallest_jump()
        .ok_or_else(|| Error::invalid("a single-segment spec has no jump"))?;
    Ok((jump / snr).sqrt())
}
