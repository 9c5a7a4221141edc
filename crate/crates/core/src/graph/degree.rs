use serde::Serialize;

use super::{MobilityGraph, ZoneId};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeRow {
    pub zone: ZoneId,
    pub in_degree: usize,
    pub out_degree: usize,
    pub weighted_in: f64,
    pub weighted_out: f64,
}

/// Per-vertex degree counts on the raw count graph, in vertex order.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DegreeTable {
    pub rows: Vec<DegreeRow>,
}

impl DegreeTable {
    pub fn get(&self, zone: &str) -> Option<&DegreeRow> {
        self.rows.iter().find(|r| r.zone.as_str() == zone)
    }
}

pub fn degree_features(g: &MobilityGraph) -> DegreeTable {
    let mut rows: Vec<DegreeRow> = g
        .zones()
        .iter()
        .map(|zone| DegreeRow {
            zone: zone.clone(),
            in_degree: 0,
            out_degree: 0,
            weighted_in: 0.0,
            weighted_out: 0.0,
        })
        .collect();
    for e in g.edges() {
        rows[e.from].out_degree += 1;
        rows[e.from].weighted_out += e.weight;
        rows[e.to].in_degree += 1;
        rows[e.to].weighted_in += e.weight;
    }
    DegreeTable { rows }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HistogramBin {
    pub low: f64,
    pub high: f64,
    pub count: usize,
}

/// Equal-width histogram of edge weights over `[min, max]`.
///
/// The first bin is closed on both ends, later bins are `(low, high]`. When
/// every weight is equal a single zero-width bin holds all edges.
pub fn edge_weight_histogram(g: &MobilityGraph, bins: usize) -> Result<Vec<HistogramBin>> {
    if bins == 0 {
        return Err(Error::InvalidArgument("histogram needs at least one bin".into()));
    }
    if g.edge_count() == 0 {
        return Err(Error::EmptyGraph);
    }
    let (min, max) = g
        .edges()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
            (lo.min(e.weight), hi.max(e.weight))
        });
    if min == max {
        return Ok(vec![HistogramBin {
            low: min,
            high: max,
            count: g.edge_count(),
        }]);
    }
    let width = (max - min) / bins as f64;
    let mut out: Vec<HistogramBin> = (0..bins)
        .map(|b| HistogramBin {
            low: min + width * b as f64,
            high: if b + 1 == bins { max } else { min + width * (b + 1) as f64 },
            count: 0,
        })
        .collect();
    for e in g.edges() {
        let slot = if e.weight <= min {
            0
        } else {
            (((e.weight - min) / width).ceil() as usize).saturating_sub(1)
        };
        out[slot.min(bins - 1)].count += 1;
    }
    Ok(out)
}
