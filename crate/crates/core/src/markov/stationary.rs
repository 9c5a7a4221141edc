use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Lu, SymbolicLu};
use faer::sparse::{SparseColMat, Triplet};
use faer::Mat;
use serde::Serialize;

use super::TransitionMatrix;
use crate::error::{Error, Result};
use crate::graph::ZoneId;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMethod {
    Direct,
    Iterative,
    PowerOracle,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StationaryOptions {
    /// Bound on the max-norm balance residual, and the clamp threshold for
    /// small negative entries.
    pub tol: f64,
    /// Chains with more states than this use the iterative solver.
    pub direct_threshold: usize,
    /// Iteration cap for the iterative solver.
    pub max_iter: usize,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        StationaryOptions {
            tol: 1e-10,
            direct_threshold: 20_000,
            max_iter: 1_000_000,
        }
    }
}

impl StationaryOptions {
    pub fn with_tol(tol: f64) -> Self {
        StationaryOptions {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StationaryDistribution {
    zones: Vec<ZoneId>,
    values: Vec<f64>,
    residual: f64,
    method: SolveMethod,
}

impl StationaryDistribution {
    pub fn from_parts(
        zones: Vec<ZoneId>,
        values: Vec<f64>,
        residual: f64,
        method: SolveMethod,
    ) -> Result<Self> {
        if zones.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: zones.len(),
                actual: values.len(),
            });
        }
        Ok(StationaryDistribution {
            zones,
            values,
            residual,
            method,
        })
    }

    pub fn zones(&self) -> &[ZoneId] {
        &self.zones
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

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn method(&self) -> SolveMethod {
        self.method
    }

    pub fn value_of(&self, zone: &str) -> Option<f64> {
        self.zones
            .iter()
            .position(|z| z.as_str() == zone)
            .map(|i| self.values[i])
    }

    /// Vertex indices by descending value, ties by ascending zone.
    pub fn descending_order(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        order.sort_by(|&a, &b| {
            self.values[b]
                .total_cmp(&self.values[a])
                .then_with(|| self.zones[a].cmp(&self.zones[b]))
        });
        order
    }
}

/// Solves `pi * P = pi`, `sum(pi) = 1` for an irreducible chain.
///
/// Chains up to `opts.direct_threshold` states are solved with a sparse LU
/// factorization of the balance equations, one of which is replaced by the
/// normalization row. Larger chains fall back to lazy power iteration.
pub fn stationary(p: &TransitionMatrix, opts: &StationaryOptions) -> Result<StationaryDistribution> {
    StationarySolver::new(p, opts)?.solve(p)
}

/// Reusable solver for chains that share one sparsity pattern.
///
/// The symbolic LU analysis is computed once; every [`Self::solve`] call
/// with a matrix of the same pattern only redoes the numeric factorization.
#[derive(Clone, Debug)]
pub struct StationarySolver {
    opts: StationaryOptions,
    pattern: Option<(Vec<usize>, Vec<usize>)>,
    symbolic: Option<SymbolicLu<usize>>,
}

impl StationarySolver {
    pub fn new(p: &TransitionMatrix, opts: &StationaryOptions) -> Result<Self> {
        if !(opts.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance must be positive, got {}", opts.tol)));
        }
        if p.n() == 0 {
            return Err(Error::InvalidArgument("empty transition matrix".into()));
        }
        super::periodicity::ensure_irreducible(p)?;
        let mut solver = StationarySolver {
            opts: *opts,
            pattern: None,
            symbolic: None,
        };
        if p.n() <= opts.direct_threshold {
            let a = augmented_system(p)?;
            solver.symbolic = Some(
                SymbolicLu::try_new(a.symbolic())
                    .map_err(|e| Error::Singular(format!("symbolic factorization: {e:?}")))?,
            );
        }
        let (rows, cols) = p.pattern();
        solver.pattern = Some((rows.to_vec(), cols.to_vec()));
        Ok(solver)
    }

    pub fn options(&self) -> &StationaryOptions {
        &self.opts
    }

    pub fn solve(&self, p: &TransitionMatrix) -> Result<StationaryDistribution> {
        let (values, residual, method) = self.solve_values(p)?;
        StationaryDistribution::from_parts(p.index().to_vec(), values, residual, method)
    }

    /// Stationary values and residual without copying the zone index.
    pub fn solve_values(&self, p: &TransitionMatrix) -> Result<(Vec<f64>, f64, SolveMethod)> {
        if p.n() > self.opts.direct_threshold {
            if self.pattern.as_ref().is_none_or(|(r, c)| (r.as_slice(), c.as_slice()) != p.pattern()) {
                super::periodicity::ensure_irreducible(p)?;
            }
            let (v, residual) = lazy_power(p, self.opts.tol, self.opts.max_iter)?;
            return Ok((v, residual, SolveMethod::Iterative));
        }
        let a = augmented_system(p)?;
        let same_pattern = self
            .pattern
            .as_ref()
            .is_some_and(|(r, c)| (r.as_slice(), c.as_slice()) == p.pattern());
        let symbolic = match (&self.symbolic, same_pattern) {
            (Some(s), true) => s.clone(),
            _ => {
                super::periodicity::ensure_irreducible(p)?;
                SymbolicLu::try_new(a.symbolic())
                    .map_err(|e| Error::Singular(format!("symbolic factorization: {e:?}")))?
            }
        };
        let lu = Lu::try_new_with_symbolic(symbolic, a.as_ref())
            .map_err(|e| Error::Singular(format!("numeric factorization: {e:?}")))?;
        let n = p.n();
        let mut rhs = Mat::<f64>::zeros(n, 1);
        rhs[(n - 1, 0)] = 1.0;
        let x = lu.solve(&rhs);
        let raw: Vec<f64> = (0..n).map(|i| x[(i, 0)]).collect();
        let values = finalize(raw, self.opts.tol)?;
        let residual = p.balance_residual(&values);
        if !(residual <= self.opts.tol) {
            return Err(Error::Singular(format!(
                "balance residual {residual:e} exceeds tolerance {:e}",
                self.opts.tol
            )));
        }
        Ok((values, residual, SolveMethod::Direct))
    }
}

/// Column-compressed `(P - I)^T` with its last row replaced by ones.
///
/// Column `i` holds the coefficients of `pi_i`: `P[i][j]` in row `j`, `-1`
/// on the diagonal, and `1` in the normalization row `n - 1`.
fn augmented_system(p: &TransitionMatrix) -> Result<SparseColMat<usize, f64>> {
    let n = p.n();
    let last = n - 1;
    let mut triplets = Vec::with_capacity(p.nnz() + 2 * n);
    for i in 0..n {
        let (cols, vals) = p.row(i);
        let mut diagonal_seen = false;
        for (&j, &v) in cols.iter().zip(vals) {
            if j == last {
                continue;
            }
            if j == i {
                diagonal_seen = true;
                triplets.push(Triplet::new(j, i, v - 1.0));
            } else {
                triplets.push(Triplet::new(j, i, v));
            }
        }
        if i != last && !diagonal_seen {
            triplets.push(Triplet::new(i, i, -1.0));
        }
        triplets.push(Triplet::new(last, i, 1.0));
    }
    SparseColMat::try_new_from_triplets(n, n, &triplets)
        .map_err(|e| Error::Singular(format!("assembling augmented system: {e:?}")))
}

/// Checks finiteness and sign, clamps entries in `(-tol, 0)` and rescales to sum one.
fn finalize(mut v: Vec<f64>, tol: f64) -> Result<Vec<f64>> {
    for (i, x) in v.iter_mut().enumerate() {
        if !x.is_finite() {
            return Err(Error::Singular(format!("non-finite entry at state {i}")));
        }
        if *x < 0.0 {
            if *x > -tol {
                *x = 0.0;
            } else {
                return Err(Error::Singular(format!("negative entry {x:e} at state {i}")));
            }
        }
    }
    let total: f64 = v.iter().sum();
    if !(total > 0.0) {
        return Err(Error::Singular("solution sums to zero".into()));
    }
    v.iter_mut().for_each(|x| *x /= total);
    Ok(v)
}

/// Iterates `v <- (v + v P) / 2` from the uniform vector until the balance
/// residual `|v P - v|` drops below `tol`.
///
/// The half step is the lazy chain `(I + P) / 2`, which has the same
/// stationary vector as `P` but is aperiodic, so periodic chains converge.
fn lazy_power(p: &TransitionMatrix, tol: f64, max_iter: usize) -> Result<(Vec<f64>, f64)> {
    let n = p.n();
    let mut v = vec![1.0 / n as f64; n];
    let mut residual = f64::INFINITY;
    for _ in 0..max_iter {
        let vp = p.left_multiply(&v);
        residual = vp
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if residual < tol {
            let total: f64 = v.iter().sum();
            v.iter_mut().for_each(|x| *x /= total);
            let residual = p.balance_residual(&v);
            return Ok((v, residual));
        }
        for (x, y) in v.iter_mut().zip(&vp) {
            *x = 0.5 * (*x + y);
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual,
    })
}

/// Power-iteration reference for cross-checking [`stationary`].
///
/// Each step averages the current iterate with its image under `P`, which
/// removes the oscillation of periodic chains. Stops once successive
/// iterates differ by less than `tol` in max-norm.
pub fn stationary_power_oracle(
    p: &TransitionMatrix,
    tol: f64,
    max_iter: usize,
) -> Result<StationaryDistribution> {
    if p.n() == 0 {
        return Err(Error::InvalidArgument("empty transition matrix".into()));
    }
    let n = p.n();
    let mut v = vec![1.0 / n as f64; n];
    for _ in 0..max_iter {
        let vp = p.left_multiply(&v);
        let next: Vec<f64> = v.iter().zip(&vp).map(|(a, b)| 0.5 * (a + b)).collect();
        let step = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        v = next;
        if step < tol {
            let residual = p.balance_residual(&v);
            return StationaryDistribution::from_parts(
                p.index().to_vec(),
                v,
                residual,
                SolveMethod::PowerOracle,
            );
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iter,
        residual: p.balance_residual(&v),
    })
}
