use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::MobilityGraph;
use crate::markov::{row_normalize, StationaryOptions, StationarySolver};

/// Tolerance on the row sums of a null sample matrix.
pub const NULL_ROW_SUM_TOL: f64 = 1e-10;

/// Independent random stream `stream` of the master `seed`.
///
/// Every replicate draws from its own stream, so results do not depend on
/// how replicates are scheduled across threads.
pub fn substream(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Same edges, with the weight multiset shuffled uniformly across them.
pub fn permute_weights<R: Rng + ?Sized>(g: &MobilityGraph, rng: &mut R) -> MobilityGraph {
    let mut weights = g.weights();
    weights.shuffle(rng);
    g.with_weights(&weights)
        .expect("a permutation of positive weights is valid")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NullMode {
    /// Uniformly random weight permutations.
    Sampled,
    /// Every weight permutation exactly once, identity included.
    Enumerated,
}

#[derive(Clone, Debug)]
pub struct NullConfig {
    pub replicates: usize,
    pub seed: u64,
    pub mode: NullMode,
    /// Largest `E!` for which enumeration is allowed.
    pub enumeration_cap: usize,
    /// Extra attempts per replicate whose solve fails.
    pub retry_cap: usize,
    /// Worker threads; `None` uses the ambient rayon pool.
    pub workers: Option<usize>,
    pub stationary: StationaryOptions,
}

impl Default for NullConfig {
    fn default() -> Self {
        NullConfig {
            replicates: 1000,
            seed: 0,
            mode: NullMode::Sampled,
            enumeration_cap: 5040,
            retry_cap: 10,
            workers: None,
            stationary: StationaryOptions::default(),
        }
    }
}

/// Stationary vectors of the permuted graphs, one row per replicate.
#[derive(Clone, Debug, PartialEq)]
pub struct NullDistribution {
    samples: Vec<f64>,
    replicates: usize,
    n: usize,
    seed: Option<u64>,
    mode: NullMode,
}

impl NullDistribution {
    /// Validates a row-major `replicates x n` sample matrix.
    pub fn from_samples(
        samples: Vec<f64>,
        replicates: usize,
        n: usize,
        seed: Option<u64>,
        mode: NullMode,
    ) -> Result<Self> {
        if replicates == 0 {
            return Err(Error::InvalidArgument("null distribution needs at least one replicate".into()));
        }
        if samples.len() != replicates * n {
            return Err(Error::DimensionMismatch {
                expected: replicates * n,
                actual: samples.len(),
            });
        }
        for (b, row) in samples.chunks(n.max(1)).enumerate() {
            let total: f64 = row.iter().sum();
            if row.iter().any(|&x| !(x >= 0.0)) || (total - 1.0).abs() > NULL_ROW_SUM_TOL {
                return Err(Error::InvalidArgument(format!(
                    "replicate {b} is not a probability vector"
                )));
            }
        }
        Ok(NullDistribution {
            samples,
            replicates,
            n,
            seed,
            mode,
        })
    }

    pub fn replicates(&self) -> usize {
        self.replicates
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn mode(&self) -> NullMode {
        self.mode
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn row(&self, b: usize) -> &[f64] {
        &self.samples[b * self.n..(b + 1) * self.n]
    }

    pub fn column(&self, i: usize) -> impl Iterator<Item = f64> + '_ {
        self.samples.iter().skip(i).step_by(self.n).copied()
    }

    /// Linearly interpolated quantile of vertex `i`'s null values
    /// (the usual "type 7" definition).
    pub fn quantile(&self, i: usize, level: f64) -> f64 {
        let mut col: Vec<f64> = self.column(i).collect();
        col.sort_by(f64::total_cmp);
        let h = (col.len() - 1) as f64 * level.clamp(0.0, 1.0);
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        col[lo] + (h - lo as f64) * (col[hi] - col[lo])
    }
}

fn factorial_capped(e: usize, cap: usize) -> Option<usize> {
    (1..=e).try_fold(1usize, |acc, k| acc.checked_mul(k).filter(|&f| f <= cap))
}

/// Permutation of `0..len` with lexicographic rank `rank`.
fn nth_permutation(len: usize, mut rank: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..len).collect();
    let mut fact = vec![1usize; len + 1];
    for k in 1..=len {
        fact[k] = fact[k - 1] * k;
    }
    let mut out = Vec::with_capacity(len);
    for slot in (0..len).rev() {
        let pick = rank / fact[slot];
        rank %= fact[slot];
        out.push(pool.remove(pick));
    }
    out
}

pub(crate) fn run_with_workers<T, F>(workers: Option<usize>, f: F) -> Result<T>
where
    T: Send,
    F: FnOnce() -> T + Send,
{
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::InvalidArgument("worker count must be positive".into())),
        Some(k) => rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .map(|pool| pool.install(f))
            .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}"))),
    }
}

/// Samples the permuted-weight null distribution of stationary vectors.
///
/// In [`NullMode::Sampled`] replicate `b` shuffles the weights with
/// `substream(seed, b)`. A replicate whose solve fails is redrawn from
/// streams `B, B + 1, ...`, assigned in replicate order. In
/// [`NullMode::Enumerated`] all `E!` assignments are visited in
/// lexicographic order and `replicates` is ignored.
pub fn sample_null(g: &MobilityGraph, cfg: &NullConfig) -> Result<NullDistribution> {
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    if cfg.replicates == 0 {
        return Err(Error::InvalidArgument("at least one replicate is required".into()));
    }
    let p = row_normalize(g)?;
    let solver = StationarySolver::new(&p, &cfg.stationary)?;
    let base = g.weights();
    let n = g.vertex_count();

    let solve = |weights: &[f64]| -> Result<Vec<f64>> {
        let permuted = g.with_weights(weights)?;
        let p = row_normalize(&permuted)?;
        solver.solve_values(&p).map(|(v, _, _)| v)
    };

    let rows: Vec<Vec<f64>> = match cfg.mode {
        NullMode::Enumerated => {
            let e = base.len();
            let total = factorial_capped(e, cfg.enumeration_cap).ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "{e}! weight assignments exceed the enumeration cap {}",
                    cfg.enumeration_cap
                ))
            })?;
            run_with_workers(cfg.workers, || {
                (0..total)
                    .into_par_iter()
                    .map(|rank| {
                        let weights: Vec<f64> =
                            nth_permutation(e, rank).into_iter().map(|k| base[k]).collect();
                        solve(&weights)
                    })
                    .collect::<Result<Vec<_>>>()
            })??
        }
        NullMode::Sampled => {
            let b_total = cfg.replicates;
            let draw = |stream: u64| -> Result<Vec<f64>> {
                let mut rng = substream(cfg.seed, stream);
                let mut weights = base.clone();
                weights.shuffle(&mut rng);
                solve(&weights)
            };
            let first: Vec<Result<Vec<f64>>> = run_with_workers(cfg.workers, || {
                (0..b_total)
                    .into_par_iter()
                    .map(|b| draw(b as u64))
                    .collect()
            })?;
            let mut next_stream = b_total as u64;
            let mut rows = Vec::with_capacity(b_total);
            for (b, outcome) in first.into_iter().enumerate() {
                let mut outcome = outcome;
                let mut attempts = 0;
                while let Err(e) = &outcome {
                    if attempts == cfg.retry_cap {
                        return Err(Error::Singular(format!(
                            "replicate {b} failed after {attempts} retries: {e}"
                        )));
                    }
                    log::warn!("replicate {b}: {e}; retrying with stream {next_stream}");
                    outcome = draw(next_stream);
                    next_stream += 1;
                    attempts += 1;
                }
                rows.push(outcome?);
            }
            rows
        }
    };

    let replicates = rows.len();
    NullDistribution::from_samples(
        rows.into_iter().flatten().collect(),
        replicates,
        n,
        Some(cfg.seed),
        cfg.mode,
    )
}
