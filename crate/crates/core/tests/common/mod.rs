//! Brute-force references and generators for the property suites.

#![allow(dead_code)]

use std::collections::BTreeSet;

use mobility_loci::graph::{MobilityGraph, ZoneId};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use proptest::prelude::*;

pub fn zone(i: usize) -> ZoneId {
    ZoneId::new(format!("v{i}")).unwrap()
}

pub fn graph(n: usize, edges: &[(usize, usize, f64)]) -> MobilityGraph {
    MobilityGraph::from_edges((0..n).map(zone), edges.iter().map(|&(a, b, w)| (zone(a), zone(b), w))).unwrap()
}

pub fn int_graph(n: usize, edges: &[(usize, usize, i64)]) -> MobilityGraph {
    graph(n, &edges.iter().map(|&(a, b, w)| (a, b, w as f64)).collect::<Vec<_>>())
}

/// Any simple digraph on `1..=max_n` vertices.
pub fn arb_digraph(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize)>)> {
    (1..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(proptest::bool::weighted(0.3), n * n).prop_map(move |mask| {
            let edges = (0..n * n)
                .filter(|&k| mask[k] && k / n != k % n)
                .map(|k| (k / n, k % n))
                .collect();
            (n, edges)
        })
    })
}

/// Strongly connected digraph on `2..=max_n` vertices: a Hamiltonian cycle
/// through a shuffled vertex order plus random chords, with integer weights.
pub fn arb_strong_digraph(max_n: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize, i64)>)> {
    (2..=max_n).prop_flat_map(|n| {
        (
            Just((0..n).collect::<Vec<usize>>()).prop_shuffle(),
            proptest::collection::vec(proptest::bool::weighted(0.3), n * n),
            proptest::collection::vec(1i64..=20, n * n),
        )
            .prop_map(move |(order, mask, weights)| {
                let mut set = BTreeSet::new();
                for i in 0..n {
                    set.insert((order[i], order[(i + 1) % n]));
                }
                for k in 0..n * n {
                    if mask[k] && k / n != k % n {
                        set.insert((k / n, k % n));
                    }
                }
                let edges = set.into_iter().map(|(a, b)| (a, b, weights[a * n + b])).collect();
                (n, edges)
            })
    })
}

pub fn transitive_closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    // Floyd-Warshall on booleans
    for k in 0..n {
        for i in 0..n {
            if reach[i][k] {
                for j in 0..n {
                    if reach[k][j] {
                        reach[i][j] = true;
                    }
                }
            }
        }
    }
    reach
}

pub fn closure_components(n: usize, edges: &[(usize, usize)]) -> BTreeSet<BTreeSet<usize>> {
    let reach = transitive_closure(n, edges);
    (0..n)
        .map(|i| (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect())
        .collect()
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// gcd of all `m <= n` with a positive diagonal entry in the m-th boolean
/// power of the adjacency matrix.
pub fn matrix_power_period(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut a = vec![vec![false; n]; n];
    for &(u, v) in edges {
        a[u][v] = true;
    }
    let mut power = a.clone();
    let mut period = 0;
    for m in 1..=n {
        if (0..n).any(|i| power[i][i]) {
            period = gcd(period, m);
        }
        let mut next = vec![vec![false; n]; n];
        for i in 0..n {
            for k in 0..n {
                if power[i][k] {
                    for j in 0..n {
                        next[i][j] |= a[k][j];
                    }
                }
            }
        }
        power = next;
    }
    period
}

/// Exact null-space solution of `pi (P - I) = 0`, `sum pi = 1` for the chain
/// with rows proportional to the integer weights.
pub fn rational_stationary(n: usize, edges: &[(usize, usize, i64)]) -> Vec<BigRational> {
    let mut out_weight = vec![0i64; n];
    for &(a, _, w) in edges {
        out_weight[a] += w;
    }
    let mut m = vec![vec![BigRational::zero(); n + 1]; n];
    for (j, row) in m.iter_mut().enumerate() {
        row[j] = -BigRational::one();
    }
    for &(a, b, w) in edges {
        m[b][a] += BigRational::new(BigInt::from(w), BigInt::from(out_weight[a]));
    }
    m[n - 1] = vec![BigRational::one(); n + 1];
    for col in 0..n {
        let pivot = (col..n).find(|&r| !m[r][col].is_zero()).expect("irreducible chain");
        m.swap(col, pivot);
        let lead = m[col][col].clone();
        for x in m[col].iter_mut() {
            *x /= &lead;
        }
        for r in 0..n {
            if r != col && !m[r][col].is_zero() {
                let factor = m[r][col].clone();
                for c in col..=n {
                    let delta = &factor * &m[col][c];
                    m[r][c] -= delta;
                }
            }
        }
    }
    m.into_iter().map(|row| row[n].clone()).collect()
}

/// Fraction of all weight assignments under which each vertex's stationary
/// value is at least the observed one.
pub fn exact_tail_probabilities(n: usize, edges: &[(usize, usize, i64)]) -> Vec<BigRational> {
    let observed = rational_stationary(n, edges);
    let weights: Vec<i64> = edges.iter().map(|e| e.2).collect();
    let mut perm: Vec<usize> = (0..edges.len()).collect();
    let mut exceed = vec![0i64; n];
    let mut total = 0i64;
    loop {
        let permuted: Vec<_> = edges.iter().zip(&perm).map(|(&(a, b, _), &k)| (a, b, weights[k])).collect();
        let pi = rational_stationary(n, &permuted);
        for i in 0..n {
            if pi[i] >= observed[i] {
                exceed[i] += 1;
            }
        }
        total += 1;
        if !next_permutation(&mut perm) {
            break;
        }
    }
    exceed
        .into_iter()
        .map(|c| BigRational::new(BigInt::from(c), BigInt::from(total)))
        .collect()
}

fn next_permutation(a: &mut [usize]) -> bool {
    let Some(i) = (1..a.len()).rev().find(|&i| a[i - 1] < a[i]) else {
        return false;
    };
    let j = (i..a.len()).rev().find(|&j| a[j] > a[i - 1]).unwrap();
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}

pub fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap()
}
