//! Reference computations and generators shared by the integration suites.
//! Nothing here calls into the library's algorithms; each helper is an
//! independent, brute-force route to the same answer.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use mobility_loci::graph::{MobilityGraph, ZoneId};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;

pub fn zone(i: usize) -> ZoneId {
    ZoneId::new(format!("z{i:02}")).unwrap()
}

/// Builds a graph on zones `z00..` from index triples.
pub fn graph(n: usize, edges: &[(usize, usize, f64)]) -> MobilityGraph {
    MobilityGraph::from_edges(
        (0..n).map(zone),
        edges.iter().map(|&(a, b, w)| (zone(a), zone(b), w)),
    )
    .unwrap()
}

/// `reach[i][j]`: a directed path of length zero or more leads from i to j.
pub fn transitive_closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut reach = vec![vec![false; n]; n];
    for (i, row) in reach.iter_mut().enumerate() {
        row[i] = true;
    }
    for &(a, b) in edges {
        reach[a][b] = true;
    }
    // repeated relaxation until nothing changes
    loop {
        let mut changed = false;
        for i in 0..n {
            for k in 0..n {
                if !reach[i][k] {
                    continue;
                }
                for j in 0..n {
                    if reach[k][j] && !reach[i][j] {
                        reach[i][j] = true;
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return reach;
        }
    }
}

/// Mutual-reachability classes as sets of vertex indices.
pub fn closure_components(n: usize, edges: &[(usize, usize)]) -> BTreeSet<BTreeSet<usize>> {
    let reach = transitive_closure(n, edges);
    (0..n)
        .map(|i| (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect())
        .collect()
}

pub fn strongly_connected(n: usize, edges: &[(usize, usize)]) -> bool {
    closure_components(n, edges).len() == 1
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// gcd of every `m <= n` for which some diagonal entry of `A^m` is
/// positive, using dense boolean matrix products.
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

pub fn rational(x: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(x))
}

/// Exact stationary vector of the chain obtained by row-normalizing integer
/// edge weights: Gauss-Jordan elimination on `pi (P - I) = 0`, `sum pi = 1`.
pub fn rational_stationary(n: usize, edges: &[(usize, usize, i64)]) -> Vec<BigRational> {
    let mut out_weight = vec![0i64; n];
    for &(a, _, w) in edges {
        out_weight[a] += w;
    }
    // row j of the system is the balance equation for state j, transposed
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

pub fn to_f64(x: &BigRational) -> f64 {
    let scale = BigInt::from(1u64 << 62);
    let scaled = (x * BigRational::from_integer(scale.clone())).round().to_integer();
    let numer: f64 = scaled.to_string().parse().unwrap();
    numer / (1u64 << 62) as f64
}

/// All permutations of `0..k` by Heap's algorithm.
pub fn all_permutations(k: usize) -> Vec<Vec<usize>> {
    fn heap(k: usize, a: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(a.clone());
            return;
        }
        heap(k - 1, a, out);
        for i in 0..k - 1 {
            if k % 2 == 0 {
                a.swap(i, k - 1);
            } else {
                a.swap(0, k - 1);
            }
            heap(k - 1, a, out);
        }
    }
    let mut a: Vec<usize> = (0..k).collect();
    let mut out = Vec::new();
    heap(k, &mut a, &mut out);
    out
}

/// Exact permutation tail probability per vertex: the fraction of weight
/// assignments whose stationary value at the vertex is at least the
/// observed one, in rational arithmetic.
pub fn exact_tail_probabilities(n: usize, edges: &[(usize, usize, i64)]) -> Vec<BigRational> {
    let observed = rational_stationary(n, edges);
    let weights: Vec<i64> = edges.iter().map(|e| e.2).collect();
    let perms = all_permutations(edges.len());
    let mut exceed = vec![0i64; n];
    for perm in &perms {
        let permuted: Vec<(usize, usize, i64)> = edges
            .iter()
            .zip(perm)
            .map(|(&(a, b, _), &k)| (a, b, weights[k]))
            .collect();
        let pi = rational_stationary(n, &permuted);
        for i in 0..n {
            if pi[i] >= observed[i] {
                exceed[i] += 1;
            }
        }
    }
    let total = perms.len() as i64;
    exceed
        .into_iter()
        .map(|c| BigRational::new(BigInt::from(c), BigInt::from(total)))
        .collect()
}

/// Random simple digraph on `n` vertices with edge probability `density`.
pub fn random_digraph<R: Rng>(rng: &mut R, n: usize, density: f64) -> Vec<(usize, usize)> {
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.random_bool(density) {
                edges.push((a, b));
            }
        }
    }
    edges
}

/// Random digraph made strongly connected by threading a Hamiltonian cycle
/// through a random vertex order.
pub fn random_strong_digraph<R: Rng>(rng: &mut R, n: usize, density: f64) -> Vec<(usize, usize)> {
    let mut set: BTreeSet<(usize, usize)> = random_digraph(rng, n, density).into_iter().collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    for i in 0..n {
        set.insert((order[i], order[(i + 1) % n]));
    }
    set.into_iter().collect()
}

/// Strongly connected digraph whose edges only advance a layer index by one
/// modulo `layers`, so every cycle length is a multiple of `layers`.
pub fn random_layered_digraph<R: Rng>(rng: &mut R, n: usize, layers: usize) -> Vec<(usize, usize)> {
    loop {
        let layer: Vec<usize> = (0..n).map(|i| if i < layers { i } else { rng.random_range(0..layers) }).collect();
        let mut edges = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b && layer[b] == (layer[a] + 1) % layers && rng.random_bool(0.6) {
                    edges.push((a, b));
                }
            }
        }
        if strongly_connected(n, &edges) {
            return edges;
        }
    }
}

/// Writes `text` to `dir/name` and returns the path.
pub fn write_file(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

/// Every regular file under `dir`, keyed by relative path.
pub fn read_tree(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                out.insert(path.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Parses a CSV table with a header into rows of string cells.
pub fn csv_rows(text: &str) -> Vec<BTreeMap<String, String>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    lines
        .map(|l| {
            header
                .iter()
                .zip(l.split(','))
                .map(|(h, v)| (h.to_string(), v.to_string()))
                .collect()
        })
        .collect()
}

pub fn abs_diff(a: &BigRational, b: f64) -> f64 {
    (to_f64(a) - b).abs()
}

pub fn is_nonnegative(x: &BigRational) -> bool {
    !x.is_negative()
}

/// Random strongly connected graph on `n` zones with integer base weights
/// in `1..=10`, and a hub zone whose incoming weights are multiplied by
/// `hub_scale`. Returns the edges and the hub index.
pub fn planted_hub<R: Rng>(rng: &mut R, n: usize, density: f64, hub_scale: f64) -> (Vec<(usize, usize, f64)>, usize) {
    let structure = random_strong_digraph(rng, n, density);
    let hub = rng.random_range(0..n);
    let edges = structure
        .into_iter()
        .map(|(a, b)| {
            let w = rng.random_range(1..=10) as f64;
            (a, b, if b == hub { w * hub_scale } else { w })
        })
        .collect();
    (edges, hub)
}

/// The same edges written as two-zone trajectories.
pub fn as_trajectory_file(edges: &[(usize, usize, f64)]) -> String {
    let mut text = String::from("count,path\n");
    for &(a, b, w) in edges {
        text += &format!("{},{}|{}\n", w as u64, zone(a), zone(b));
    }
    text
}
