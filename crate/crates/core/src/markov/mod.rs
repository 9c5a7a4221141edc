//! Row-stochastic transition matrices and their stationary distributions.
//!
//! The transition matrix `P` is obtained by dividing every row of the count
//! matrix by its row sum. Stationary vectors follow the left-eigenvector
//! convention: `pi` is a row vector with `pi * P = pi`, `pi >= 0` and
//! `sum(pi) = 1`.

mod periodicity;
mod stationary;

use crate::error::{Error, Result};
use crate::graph::{MobilityGraph, ZoneId};

pub use periodicity::{check_aperiodic, check_aperiodic_matrix_power, PeriodMethod, PeriodicityReport};
pub use stationary::{
    stationary, stationary_power_oracle, SolveMethod, StationaryDistribution, StationaryOptions,
    StationarySolver,
};

/// Tolerance on row sums of a transition matrix.
pub const ROW_SUM_TOL: f64 = 1e-12;

/// Sparse row-stochastic matrix in compressed-row form.
#[derive(Clone, Debug, PartialEq)]
pub struct TransitionMatrix {
    index: Vec<ZoneId>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<f64>,
}

impl TransitionMatrix {
    /// Validates a matrix given as sorted sparse rows of `(column, probability)`.
    pub fn from_sparse_rows(index: Vec<ZoneId>, rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = index.len();
        if rows.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                actual: rows.len(),
            });
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (i, row) in rows.into_iter().enumerate() {
            let mut last = None;
            for (j, p) in row {
                if j >= n || last.is_some_and(|l| l >= j) {
                    return Err(Error::NotStochastic {
                        row: i,
                        reason: format!("column {j} out of range or out of order"),
                    });
                }
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::NotStochastic {
                        row: i,
                        reason: format!("entry {p} outside [0, 1]"),
                    });
                }
                last = Some(j);
                if p > 0.0 {
                    cols.push(j);
                    values.push(p);
                }
            }
            row_ptr.push(cols.len());
        }
        let m = TransitionMatrix {
            index,
            row_ptr,
            cols,
            values,
        };
        m.check_row_sums()?;
        Ok(m)
    }

    /// Dense rows; zero entries are dropped from the sparsity pattern.
    pub fn from_dense(index: Vec<ZoneId>, rows: &[Vec<f64>]) -> Result<Self> {
        let sparse = rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if r.len() != index.len() {
                    return Err(Error::NotStochastic {
                        row: i,
                        reason: format!("length {} for {} columns", r.len(), index.len()),
                    });
                }
                Ok(r.iter().copied().enumerate().filter(|&(_, p)| p != 0.0).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_sparse_rows(index, sparse)
    }

    fn check_row_sums(&self) -> Result<()> {
        for i in 0..self.n() {
            let s: f64 = self.row(i).1.iter().sum();
            if (s - 1.0).abs() > ROW_SUM_TOL {
                return Err(Error::NotStochastic {
                    row: i,
                    reason: format!("row sums to {s}"),
                });
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.index.len()
    }

    pub fn index(&self) -> &[ZoneId] {
        &self.index
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Column indices and probabilities of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        (&self.cols[r.clone()], &self.values[r])
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        cols.binary_search(&j).map_or(0.0, |k| vals[k])
    }

    pub(crate) fn pattern(&self) -> (&[usize], &[usize]) {
        (&self.row_ptr, &self.cols)
    }

    /// Row vector times matrix, `v * P`.
    pub fn left_multiply(&self, v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n()];
        for (i, &vi) in v.iter().enumerate() {
            if vi == 0.0 {
                continue;
            }
            let (cols, vals) = self.row(i);
            for (&j, &p) in cols.iter().zip(vals) {
                out[j] += vi * p;
            }
        }
        out
    }

    /// Max-norm of `v * P - v`.
    pub fn balance_residual(&self, v: &[f64]) -> f64 {
        self.left_multiply(v)
            .iter()
            .zip(v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Divides each row of the count matrix by its out-weight.
pub fn row_normalize(g: &MobilityGraph) -> Result<TransitionMatrix> {
    let n = g.vertex_count();
    let mut row_ptr = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(g.edge_count());
    let mut values = Vec::with_capacity(g.edge_count());
    row_ptr.push(0);
    for i in 0..n {
        let out = g.out_edges(i);
        let total: f64 = out.iter().map(|e| e.weight).sum();
        if out.is_empty() || total <= 0.0 {
            return Err(Error::DanglingVertex(g.zone(i).to_string()));
        }
        for e in out {
            cols.push(e.to);
            values.push(e.weight / total);
        }
        row_ptr.push(cols.len());
    }
    let m = TransitionMatrix {
        index: g.zones().to_vec(),
        row_ptr,
        cols,
        values,
    };
    m.check_row_sums()?;
    Ok(m)
}
