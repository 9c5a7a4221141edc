use std::collections::VecDeque;

use serde::Serialize;

use super::TransitionMatrix;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum PeriodMethod {
    BfsGcd,
    MatrixPower,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PeriodicityReport {
    pub aperiodic: bool,
    pub period: usize,
    pub method: PeriodMethod,
}

impl PeriodicityReport {
    fn new(period: usize, method: PeriodMethod) -> Self {
        PeriodicityReport {
            aperiodic: period == 1,
            period,
            method,
        }
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// BFS levels from vertex 0 over the nonzero pattern, following rows
/// (`forward`) or columns.
fn bfs_levels(p: &TransitionMatrix, forward: bool) -> Vec<Option<usize>> {
    let n = p.n();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        for &j in p.row(i).0 {
            if forward {
                adj[i].push(j);
            } else {
                adj[j].push(i);
            }
        }
    }
    let mut level = vec![None; n];
    if n == 0 {
        return level;
    }
    let mut queue = VecDeque::from([0usize]);
    level[0] = Some(0);
    while let Some(u) = queue.pop_front() {
        let next = level[u].unwrap() + 1;
        for &v in &adj[u] {
            if level[v].is_none() {
                level[v] = Some(next);
                queue.push_back(v);
            }
        }
    }
    level
}

/// Errors unless every state reaches and is reached from state 0.
pub(crate) fn ensure_irreducible(p: &TransitionMatrix) -> Result<()> {
    require_irreducible(p, &bfs_levels(p, true))
}

fn require_irreducible(p: &TransitionMatrix, forward: &[Option<usize>]) -> Result<()> {
    if p.n() == 0 {
        return Err(Error::Reducible("matrix has no states".into()));
    }
    if let Some(v) = forward.iter().position(Option::is_none) {
        return Err(Error::Reducible(format!(
            "{} is not reachable from {}",
            p.index()[v],
            p.index()[0]
        )));
    }
    if let Some(v) = bfs_levels(p, false).iter().position(Option::is_none) {
        return Err(Error::Reducible(format!(
            "{} cannot reach {}",
            p.index()[v],
            p.index()[0]
        )));
    }
    Ok(())
}

/// Period of an irreducible chain as the gcd of `level(u) + 1 - level(v)`
/// over all transitions `u -> v`, with BFS levels from a fixed root.
pub fn check_aperiodic(p: &TransitionMatrix) -> Result<PeriodicityReport> {
    let level = bfs_levels(p, true);
    require_irreducible(p, &level)?;
    let mut period = 0usize;
    for u in 0..p.n() {
        let lu = level[u].unwrap();
        for &v in p.row(u).0 {
            let lv = level[v].unwrap();
            // BFS guarantees lv <= lu + 1
            period = gcd(period, lu + 1 - lv);
        }
    }
    Ok(PeriodicityReport::new(period, PeriodMethod::BfsGcd))
}

/// Period as the gcd of every `m <= n` with `(P^m)_{ii} > 0` for some `i`.
///
/// Walks the boolean pattern from each state, so the cost is
/// `O(n^2 * nnz)`; intended for small chains and cross-checks.
pub fn check_aperiodic_matrix_power(p: &TransitionMatrix) -> Result<PeriodicityReport> {
    let level = bfs_levels(p, true);
    require_irreducible(p, &level)?;
    let n = p.n();
    let mut period = 0usize;
    for i in 0..n {
        let mut frontier = vec![false; n];
        frontier[i] = true;
        for m in 1..=n {
            let mut next = vec![false; n];
            for (u, _) in frontier.iter().enumerate().filter(|(_, &on)| on) {
                for &v in p.row(u).0 {
                    next[v] = true;
                }
            }
            frontier = next;
            if frontier[i] {
                period = gcd(period, m);
            }
        }
    }
    Ok(PeriodicityReport::new(period, PeriodMethod::MatrixPower))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::graph_of;
    use crate::markov::row_normalize;

    fn both(edges: &[(&str, &str, f64)]) -> (PeriodicityReport, PeriodicityReport) {
        let p = row_normalize(&graph_of(edges)).unwrap();
        (
            check_aperiodic(&p).unwrap(),
            check_aperiodic_matrix_power(&p).unwrap(),
        )
    }

    #[test]
    fn two_cycle_has_period_two() {
        let (bfs, power) = both(&[("A", "B", 1.0), ("B", "A", 1.0)]);
        assert_eq!((bfs.period, bfs.aperiodic), (2, false));
        assert_eq!(power.period, 2);
        assert_eq!(bfs.method, PeriodMethod::BfsGcd);
    }

    #[test]
    fn mixed_cycle_lengths_are_aperiodic() {
        let (bfs, power) = both(&[("A", "B", 1.0), ("B", "C", 1.0), ("C", "A", 1.0), ("A", "C", 1.0)]);
        assert_eq!((bfs.period, bfs.aperiodic), (1, true));
        assert_eq!(power.period, 1);
    }

    #[test]
    fn four_cycle_with_chord_keeps_period_two() {
        // cycle lengths 4 and 2
        let (bfs, power) = both(&[
            ("A", "B", 1.0),
            ("B", "C", 1.0),
            ("C", "D", 1.0),
            ("D", "A", 1.0),
            ("B", "A", 1.0),
        ]);
        assert_eq!(bfs.period, 2);
        assert_eq!(power.period, 2);
    }

    #[test]
    fn reducible_input_is_rejected() {
        let g = graph_of(&[("A", "B", 1.0), ("B", "A", 1.0), ("C", "A", 1.0)]);
        let p = row_normalize(&g).unwrap();
        assert!(matches!(check_aperiodic(&p), Err(Error::Reducible(_))));
        assert!(matches!(check_aperiodic_matrix_power(&p), Err(Error::Reducible(_))));
    }
}
