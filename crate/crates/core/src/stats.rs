//! Test statistics used to compare simulation output with the model.

use statrs::distribution::{ChiSquared, ContinuousCDF, Normal};

use crate::error::StatsError;

/// Smallest expected count per bin after pooling.
pub const MIN_EXPECTED: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ChiSquareResult {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    /// `(observed, expected)` per bin after pooling.
    pub bins: Vec<(u64, f64)>,
}

/// Pearson goodness of fit of `observed` counts against category
/// probabilities `probs` (same length, summing to one). Adjacent categories
/// are pooled left to right until each bin expects at least five counts.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquareResult, StatsError> {
    assert_eq!(observed.len(), probs.len(), "one probability per category");
    let n: u64 = observed.iter().sum();
    if n == 0 {
        return Err(StatsError::TooFewSamples { needed: 1, got: 0 });
    }
    let n = n as f64;
    let mut bins: Vec<(u64, f64)> = Vec::new();
    let mut acc = (0u64, 0.0f64);
    for (&o, &p) in observed.iter().zip(probs) {
        acc.0 += o;
        acc.1 += p * n;
        if acc.1 >= MIN_EXPECTED {
            bins.push(acc);
            acc = (0, 0.0);
        }
    }
    if acc.1 > 0.0 || acc.0 > 0 {
        match bins.last_mut() {
            Some(last) => {
                last.0 += acc.0;
                last.1 += acc.1;
            }
            None => bins.push(acc),
        }
    }
    if bins.len() < 2 {
        return Err(StatsError::TooFewBins(bins.len()));
    }
    let statistic = bins
        .iter()
        .map(|&(o, e)| (o as f64 - e).powi(2) / e)
        .sum::<f64>();
    let dof = bins.len() - 1;
    let dist = ChiSquared::new(dof as f64).expect("positive degrees of freedom");
    Ok(ChiSquareResult {
        statistic,
        dof,
        p_value: dist.sf(statistic),
        bins,
    })
}

/// Goodness of fit of success intervals (in whole periods, each ≥ 1)
/// against the geometric law `(1 - p) p^(i - 1)`.
pub fn geometric_gof(intervals: &[u64], p_d: f64) -> Result<ChiSquareResult, StatsError> {
    let max = intervals.iter().copied().max().unwrap_or(0).max(2) as usize;
    let mut observed = vec![0u64; max];
    for &i in intervals {
        assert!(i >= 1, "intervals are whole periods >= 1");
        observed[i as usize - 1] += 1;
    }
    let mut probs: Vec<f64> = (1..max)
        .map(|i| (1.0 - p_d) * p_d.powi(i as i32 - 1))
        .collect();
    // Last category is the tail P(s >= max).
    probs.push(p_d.powi(max as i32 - 1));
    chi_square_gof(&observed, &probs)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MannWhitney {
    /// U statistic of the first sample.
    pub u: f64,
    pub z: f64,
    /// One-sided: the first sample tends to be larger than the second.
    pub p_value: f64,
}

/// One-sided Mann-Whitney U test by normal approximation, with tie and
/// continuity corrections.
pub fn mann_whitney_greater(x: &[f64], y: &[f64]) -> Result<MannWhitney, StatsError> {
    for s in [x, y] {
        if s.len() < 2 {
            return Err(StatsError::TooFewSamples {
                needed: 2,
                got: s.len(),
            });
        }
    }
    let mut all: Vec<(f64, bool)> = x
        .iter()
        .map(|&v| (v, true))
        .chain(y.iter().map(|&v| (v, false)))
        .collect();
    all.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = all.len();
    let mut rank_x = 0.0;
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        let mid_rank = (i + j) as f64 / 2.0 + 1.0;
        rank_x += mid_rank * all[i..=j].iter().filter(|e| e.1).count() as f64;
        tie_term += t * t * t - t;
        i = j + 1;
    }
    let (nx, ny, nf) = (x.len() as f64, y.len() as f64, n as f64);
    let u = rank_x - nx * (nx + 1.0) / 2.0;
    let mean = nx * ny / 2.0;
    let var = nx * ny / 12.0 * ((nf + 1.0) - tie_term / (nf * (nf - 1.0)));
    if var <= 0.0 {
        // Every value tied: no evidence either way.
        return Ok(MannWhitney {
            u,
            z: 0.0,
            p_value: 0.5,
        });
    }
    let z = (u - mean - 0.5) / var.sqrt();
    let p_value = Normal::standard().sf(z);
    Ok(MannWhitney { u, z, p_value })
}

/// `sigmas` standard deviations of a binomial proportion.
pub fn binomial_bound(p: f64, n: u64, sigmas: f64) -> f64 {
    sigmas * (p * (1.0 - p) / n as f64).sqrt()
}

pub fn median(samples: &[f64]) -> Option<f64> {
    if samples.is_empty() {
        return None;
    }
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len().is_multiple_of(2) {
        (v[m - 1] + v[m]) / 2.0
    } else {
        v[m]
    })
}
