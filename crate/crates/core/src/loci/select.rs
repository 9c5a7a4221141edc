use serde::Serialize;

use super::fdr::FdrMethod;
use super::null::{NullDistribution, NullMode};
use crate::error::{Error, Result};
use crate::graph::ZoneId;
use crate::markov::StationaryDistribution;

/// Relative slack under which a null value counts as tying the observed one.
///
/// Mathematically equal stationary values computed from different weight
/// assignments can differ in the last few bits.
pub const TIE_RTOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailEstimator {
    /// `(1 + #exceed) / (B + 1)` for sampled permutations.
    PlusOne,
    /// `#exceed / B` over a complete enumeration, which contains the
    /// observed assignment itself.
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TailProbabilities {
    pub p: Vec<f64>,
    pub estimator: TailEstimator,
}

/// Per-vertex probability that a null stationary value reaches the observed one.
pub fn tail_probabilities(pi: &StationaryDistribution, null: &NullDistribution) -> Result<TailProbabilities> {
    if pi.len() != null.n() {
        return Err(Error::DimensionMismatch {
            expected: pi.len(),
            actual: null.n(),
        });
    }
    let b = null.replicates() as f64;
    let estimator = match null.mode() {
        NullMode::Sampled => TailEstimator::PlusOne,
        NullMode::Enumerated => TailEstimator::Exact,
    };
    let p = pi
        .values()
        .iter()
        .enumerate()
        .map(|(i, &observed)| {
            let threshold = observed - TIE_RTOL * observed.abs();
            let exceed = null.column(i).filter(|&x| x >= threshold).count() as f64;
            match estimator {
                TailEstimator::PlusOne => (1.0 + exceed) / (b + 1.0),
                TailEstimator::Exact => exceed / b,
            }
        })
        .collect();
    Ok(TailProbabilities { p, estimator })
}

/// `p_i <= alpha`, before any multiple-comparison adjustment.
pub fn unadjusted_locus_flags(p: &TailProbabilities, alpha: f64) -> Vec<bool> {
    p.p.iter().map(|&x| x <= alpha).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocusRecord {
    /// 1-based position in descending stationary order.
    pub rank: usize,
    pub zone: ZoneId,
    pub pi: f64,
    pub raw_p: f64,
    /// Adjusted over the top `k_star` vertices; `None` below the cut.
    pub adjusted_p: Option<f64>,
    pub is_locus: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LociReport {
    pub alpha: f64,
    pub method: FdrMethod,
    pub k_star: usize,
    pub num_loci: usize,
    /// `significant_by_k[k - 1]` is the number of adjusted p-values below
    /// `alpha` when only the top `k` vertices are tested.
    pub significant_by_k: Vec<usize>,
    /// One record per vertex, in descending stationary order.
    pub records: Vec<LocusRecord>,
}

impl LociReport {
    pub fn loci(&self) -> impl Iterator<Item = &LocusRecord> {
        self.records.iter().filter(|r| r.is_locus)
    }

    pub fn is_locus(&self, zone: &str) -> bool {
        self.records
            .iter()
            .any(|r| r.is_locus && r.zone.as_str() == zone)
    }
}

/// Number of adjusted values below `alpha` for a sorted p-vector, without
/// materializing the adjustment.
///
/// For the step-up methods the adjusted value at rank `i` is below `alpha`
/// exactly when some rank `j >= i` has a scaled value below `alpha`, so the
/// count is the largest such `j`.
pub(crate) fn significant_count(sorted: &[f64], alpha: f64, method: FdrMethod) -> usize {
    let m = sorted.len();
    let h = method.harmonic_for(m);
    match method {
        FdrMethod::Bonferroni => sorted
            .iter()
            .filter(|&&p| method.scaled(p, 0, m, h) < alpha)
            .count(),
        FdrMethod::Bh | FdrMethod::By => (1..=m)
            .rev()
            .find(|&j| method.scaled(sorted[j - 1], j, m, h) < alpha)
            .unwrap_or(0),
    }
}

/// Max-k loci selection.
///
/// Vertices are ordered by descending stationary value. For each prefix size
/// `k` the top-`k` tail probabilities are adjusted and those below `alpha`
/// counted; `k_star` is the smallest `k` with the largest count, and the
/// loci are the top-`k_star` vertices whose adjusted value is below `alpha`.
pub fn select_loci(
    pi: &StationaryDistribution,
    p: &TailProbabilities,
    alpha: f64,
    method: FdrMethod,
) -> Result<LociReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if pi.len() != p.p.len() {
        return Err(Error::DimensionMismatch {
            expected: pi.len(),
            actual: p.p.len(),
        });
    }
    if let Some(&bad) = p.p.iter().find(|&&x| !(x > 0.0 && x <= 1.0)) {
        return Err(Error::InvalidPValue(bad));
    }
    let n = pi.len();
    let order = pi.descending_order();

    let mut sorted: Vec<f64> = Vec::with_capacity(n);
    let mut significant_by_k = Vec::with_capacity(n);
    for &v in &order {
        let x = p.p[v];
        let at = sorted.partition_point(|&y| y <= x);
        sorted.insert(at, x);
        significant_by_k.push(significant_count(&sorted, alpha, method));
    }
    let (k_star, best) = significant_by_k
        .iter()
        .enumerate()
        .fold((1usize, 0usize), |(bk, bc), (i, &c)| if c > bc { (i + 1, c) } else { (bk, bc) });

    let top: Vec<f64> = order[..k_star.min(n)].iter().map(|&v| p.p[v]).collect();
    let adjusted = method.adjust(&top)?;
    let records: Vec<LocusRecord> = order
        .iter()
        .enumerate()
        .map(|(pos, &v)| {
            let adjusted_p = adjusted.get(pos).copied();
            LocusRecord {
                rank: pos + 1,
                zone: pi.zones()[v].clone(),
                pi: pi.values()[v],
                raw_p: p.p[v],
                adjusted_p,
                is_locus: adjusted_p.is_some_and(|a| a < alpha),
            }
        })
        .collect();
    let num_loci = records.iter().filter(|r| r.is_locus).count();
    debug_assert_eq!(num_loci, best);
    Ok(LociReport {
        alpha,
        method,
        k_star,
        num_loci,
        significant_by_k,
        records,
    })
}
