//! Weighted directed mobility graph and the structural algorithms run on it.
//!
//! Vertices are kept in ascending [`ZoneId`] order and edges in ascending
//! `(from, to)` index order, so two graphs built from the same data are
//! identical regardless of input row order. Edge weights are transition
//! counts widened to `f64`.

mod components;
mod degree;

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use components::{strong_components, ComponentPartition};
pub use degree::{degree_features, edge_weight_histogram, DegreeRow, DegreeTable, HistogramBin};

/// Opaque zone token such as an SA2 code. Compared by exact bytes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ZoneId(String);

impl ZoneId {
    pub fn new(id: impl Into<String>) -> Result<Self> {
        let id = id.into();
        if id.is_empty() {
            return Err(Error::InvalidArgument("zone id must be non-empty".into()));
        }
        Ok(ZoneId(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for ZoneId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for ZoneId {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

#[derive(Clone, Debug)]
pub struct MobilityGraph {
    zones: Vec<ZoneId>,
    edges: Vec<Edge>,
    /// `edges[offsets[i]..offsets[i + 1]]` are the out-edges of vertex `i`.
    offsets: Vec<usize>,
}

impl PartialEq for MobilityGraph {
    fn eq(&self, other: &Self) -> bool {
        self.zones == other.zones && self.edges == other.edges
    }
}

impl MobilityGraph {
    /// Builds a graph from an explicit vertex list plus weighted edges.
    ///
    /// Edge endpoints missing from `zones` are added to the vertex set.
    pub fn from_edges<Z, E>(zones: Z, edges: E) -> Result<Self>
    where
        Z: IntoIterator<Item = ZoneId>,
        E: IntoIterator<Item = (ZoneId, ZoneId, f64)>,
    {
        let edges: Vec<(ZoneId, ZoneId, f64)> = edges.into_iter().collect();
        let mut set: BTreeSet<ZoneId> = zones.into_iter().collect();
        for (from, to, weight) in &edges {
            if from == to {
                return Err(Error::SelfLoop(from.to_string()));
            }
            if !(weight.is_finite() && *weight > 0.0) {
                return Err(Error::NonPositiveWeight {
                    from: from.to_string(),
                    to: to.to_string(),
                    weight: *weight,
                });
            }
            set.insert(from.clone());
            set.insert(to.clone());
        }
        let zones: Vec<ZoneId> = set.into_iter().collect();
        let position = |z: &ZoneId| zones.binary_search(z).expect("endpoint inserted above");
        let mut indexed: Vec<Edge> = edges
            .iter()
            .map(|(from, to, weight)| Edge {
                from: position(from),
                to: position(to),
                weight: *weight,
            })
            .collect();
        indexed.sort_by_key(|e| (e.from, e.to));
        if let Some(w) = indexed
            .windows(2)
            .find(|w| (w[0].from, w[0].to) == (w[1].from, w[1].to))
        {
            return Err(Error::DuplicateEdge {
                from: zones[w[0].from].to_string(),
                to: zones[w[0].to].to_string(),
            });
        }
        Ok(Self::assemble(zones, indexed))
    }

    /// `zones` must be sorted and unique, `edges` sorted by `(from, to)`,
    /// free of duplicates and self-loops, with positive weights.
    pub(crate) fn from_sorted_parts(zones: Vec<ZoneId>, edges: Vec<Edge>) -> Self {
        debug_assert!(zones.windows(2).all(|w| w[0] < w[1]));
        debug_assert!(edges
            .windows(2)
            .all(|w| (w[0].from, w[0].to) < (w[1].from, w[1].to)));
        Self::assemble(zones, edges)
    }

    fn assemble(zones: Vec<ZoneId>, edges: Vec<Edge>) -> Self {
        let mut offsets = vec![0usize; zones.len() + 1];
        for e in &edges {
            offsets[e.from + 1] += 1;
        }
        for i in 0..zones.len() {
            offsets[i + 1] += offsets[i];
        }
        MobilityGraph {
            zones,
            edges,
            offsets,
        }
    }

    /// Same structure with a new weight per edge, in [`Self::edges`] order.
    pub fn with_weights(&self, weights: &[f64]) -> Result<Self> {
        if weights.len() != self.edges.len() {
            return Err(Error::DimensionMismatch {
                expected: self.edges.len(),
                actual: weights.len(),
            });
        }
        let mut out = self.clone();
        for (e, &w) in out.edges.iter_mut().zip(weights) {
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::NonPositiveWeight {
                    from: self.zones[e.from].to_string(),
                    to: self.zones[e.to].to_string(),
                    weight: w,
                });
            }
            e.weight = w;
        }
        Ok(out)
    }

    pub fn zones(&self) -> &[ZoneId] {
        &self.zones
    }

    pub fn zone(&self, index: usize) -> &ZoneId {
        &self.zones[index]
    }

    pub fn index_of(&self, zone: &str) -> Option<usize> {
        self.zones
            .binary_search_by(|z| z.as_str().cmp(zone))
            .ok()
    }

    pub fn index_of_zone(&self, zone: &ZoneId) -> Option<usize> {
        self.zones.binary_search(zone).ok()
    }

    pub fn vertex_count(&self) -> usize {
        self.zones.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn out_edges(&self, vertex: usize) -> &[Edge] {
        &self.edges[self.offsets[vertex]..self.offsets[vertex + 1]]
    }

    pub fn weights(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.weight).collect()
    }

    pub fn weight(&self, from: &str, to: &str) -> Option<f64> {
        let (f, t) = (self.index_of(from)?, self.index_of(to)?);
        let out = self.out_edges(f);
        out.binary_search_by_key(&t, |e| e.to)
            .ok()
            .map(|k| out[k].weight)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Edges as `(from, to, weight)` zone triples in canonical order.
    pub fn edge_triples(&self) -> impl Iterator<Item = (&ZoneId, &ZoneId, f64)> + '_ {
        self.edges
            .iter()
            .map(move |e| (&self.zones[e.from], &self.zones[e.to], e.weight))
    }

    /// Subgraph on `vertices`, keeping exactly the edges with both endpoints inside.
    pub fn induced_subgraph<'a, I>(&self, vertices: I) -> Result<MobilityGraph>
    where
        I: IntoIterator<Item = &'a ZoneId>,
    {
        let mut keep = vec![false; self.zones.len()];
        for z in vertices {
            let i = self
                .index_of_zone(z)
                .ok_or_else(|| Error::UnknownZone(z.to_string()))?;
            keep[i] = true;
        }
        let mut remap = vec![usize::MAX; self.zones.len()];
        let mut zones = Vec::new();
        for (i, z) in self.zones.iter().enumerate() {
            if keep[i] {
                remap[i] = zones.len();
                zones.push(z.clone());
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| keep[e.from] && keep[e.to])
            .map(|e| Edge {
                from: remap[e.from],
                to: remap[e.to],
                weight: e.weight,
            })
            .collect();
        Ok(MobilityGraph::from_sorted_parts(zones, edges))
    }

    /// Reverses every edge; the vertex set is unchanged.
    pub fn transpose(&self) -> MobilityGraph {
        let mut edges: Vec<Edge> = self
            .edges
            .iter()
            .map(|e| Edge {
                from: e.to,
                to: e.from,
                weight: e.weight,
            })
            .collect();
        edges.sort_by_key(|e| (e.from, e.to));
        MobilityGraph::from_sorted_parts(self.zones.clone(), edges)
    }
}

/// Free-function form of [`MobilityGraph::transpose`].
pub fn transpose(g: &MobilityGraph) -> MobilityGraph {
    g.transpose()
}

/// Free-function form of [`MobilityGraph::induced_subgraph`].
pub fn induced_subgraph<'a, I>(g: &MobilityGraph, vertices: I) -> Result<MobilityGraph>
where
    I: IntoIterator<Item = &'a ZoneId>,
{
    g.induced_subgraph(vertices)
}

#[cfg(test)]
pub(crate) fn z(s: &str) -> ZoneId {
    ZoneId::new(s).unwrap()
}

#[cfg(test)]
pub(crate) fn graph_of(edges: &[(&str, &str, f64)]) -> MobilityGraph {
    MobilityGraph::from_edges(
        std::iter::empty(),
        edges.iter().map(|&(a, b, w)| (z(a), z(b), w)),
    )
    .unwrap()
}
