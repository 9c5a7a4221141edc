//! Local comparison features and their linear association with the
//! stationary distribution.

mod ols;

use std::collections::{HashMap, HashSet};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{degree_features, MobilityGraph, ZoneId};
use crate::ingest::TrajectorySet;
use crate::markov::StationaryDistribution;

pub use ols::{ols_fit, ols_multi, MultiFit, OlsFit};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Feature {
    InDegree,
    WeightedInDegree,
    /// Commuters whose trajectory ends at the zone.
    TotalIncoming,
    /// Commuters whose trajectory visits the zone at all.
    TotalTraffic,
}

impl Feature {
    pub const ALL: [Feature; 4] = [
        Feature::InDegree,
        Feature::WeightedInDegree,
        Feature::TotalIncoming,
        Feature::TotalTraffic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Feature::InDegree => "in_degree",
            Feature::WeightedInDegree => "weighted_in_degree",
            Feature::TotalIncoming => "total_incoming",
            Feature::TotalTraffic => "total_traffic",
        }
    }

    pub fn needs_trajectories(self) -> bool {
        matches!(self, Feature::TotalIncoming | Feature::TotalTraffic)
    }
}

impl fmt::Display for Feature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureRow {
    pub zone: ZoneId,
    pub in_degree: usize,
    pub weighted_in_degree: f64,
    pub total_incoming: Option<f64>,
    pub total_traffic: Option<f64>,
}

/// Features per vertex of the analysed graph, in its vertex order.
/// Trajectory features are `None` when only an edge list was available.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FeatureTable {
    pub rows: Vec<FeatureRow>,
}

impl FeatureTable {
    pub fn has_trajectory_features(&self) -> bool {
        self.rows.iter().all(|r| r.total_incoming.is_some())
    }

    pub fn available(&self) -> Vec<Feature> {
        Feature::ALL
            .into_iter()
            .filter(|f| !f.needs_trajectories() || self.has_trajectory_features())
            .collect()
    }

    pub fn column(&self, feature: Feature) -> Option<Vec<f64>> {
        self.rows
            .iter()
            .map(|r| match feature {
                Feature::InDegree => Some(r.in_degree as f64),
                Feature::WeightedInDegree => Some(r.weighted_in_degree),
                Feature::TotalIncoming => r.total_incoming,
                Feature::TotalTraffic => r.total_traffic,
            })
            .collect()
    }

    pub fn get(&self, zone: &str) -> Option<&FeatureRow> {
        self.rows.iter().find(|r| r.zone.as_str() == zone)
    }
}

/// Degree features from `g` plus, when trajectories are given, trajectory
/// counts for each vertex of `g`. Trajectories may pass through zones
/// outside `g`; only vertices of `g` are reported.
pub fn comparison_features(g: &MobilityGraph, trajs: Option<&TrajectorySet>) -> FeatureTable {
    let degrees = degree_features(g);
    let counts = trajs.map(|trajs| {
        let mut incoming: HashMap<&ZoneId, f64> = HashMap::new();
        let mut traffic: HashMap<&ZoneId, f64> = HashMap::new();
        for t in trajs.iter() {
            let c = t.count() as f64;
            *incoming.entry(t.destination()).or_insert(0.0) += c;
            let visited: HashSet<&ZoneId> = t.zones().iter().collect();
            for z in visited {
                *traffic.entry(z).or_insert(0.0) += c;
            }
        }
        (incoming, traffic)
    });
    let rows = degrees
        .rows
        .into_iter()
        .map(|d| {
            let (total_incoming, total_traffic) = match &counts {
                Some((inc, tra)) => (
                    Some(inc.get(&d.zone).copied().unwrap_or(0.0)),
                    Some(tra.get(&d.zone).copied().unwrap_or(0.0)),
                ),
                None => (None, None),
            };
            FeatureRow {
                zone: d.zone,
                in_degree: d.in_degree,
                weighted_in_degree: d.weighted_in,
                total_incoming,
                total_traffic,
            }
        })
        .collect();
    FeatureTable { rows }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Response {
    SqrtPi,
    Pi,
}

impl Response {
    pub fn name(self) -> &'static str {
        match self {
            Response::SqrtPi => "sqrt_pi",
            Response::Pi => "pi",
        }
    }

    pub fn transform(self, pi: f64) -> f64 {
        match self {
            Response::SqrtPi => pi.sqrt(),
            Response::Pi => pi,
        }
    }
}

/// One regression of a response on a single feature. `fit` is `None` when
/// the regression is undefined (for example a constant feature), with the
/// reason in `error`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssociationRow {
    pub feature: Feature,
    pub response: Response,
    pub fit: Option<OlsFit>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AssociationReport {
    pub rows: Vec<AssociationRow>,
    /// Both trajectory features jointly on `sqrt(pi)`.
    pub joint: Option<MultiFit>,
}

impl AssociationReport {
    pub fn fit(&self, feature: Feature, response: Response) -> Option<&OlsFit> {
        self.rows
            .iter()
            .find(|r| r.feature == feature && r.response == response)
            .and_then(|r| r.fit.as_ref())
    }
}

/// Regresses `sqrt(pi)`, and untransformed `pi`, on each available feature.
pub fn association_report(features: &FeatureTable, pi: &StationaryDistribution) -> Result<AssociationReport> {
    if features.rows.len() != pi.len()
        || features.rows.iter().zip(pi.zones()).any(|(r, z)| &r.zone != z)
    {
        return Err(Error::InvalidArgument(
            "feature table and stationary distribution cover different zones".into(),
        ));
    }
    let mut rows = Vec::new();
    for response in [Response::SqrtPi, Response::Pi] {
        let y: Vec<f64> = pi.values().iter().map(|&v| response.transform(v)).collect();
        for feature in features.available() {
            let x = features.column(feature).expect("feature is available");
            let (fit, error) = match ols_fit(&x, &y) {
                Ok(fit) => (Some(fit), None),
                Err(e) => (None, Some(e.to_string())),
            };
            rows.push(AssociationRow {
                feature,
                response,
                fit,
                error,
            });
        }
    }
    let joint = if features.has_trajectory_features() {
        let a = features.column(Feature::TotalIncoming).expect("trajectory features");
        let b = features.column(Feature::TotalTraffic).expect("trajectory features");
        let y: Vec<f64> = pi.values().iter().map(|v| v.sqrt()).collect();
        ols_multi(&[&a, &b], &y).ok()
    } else {
        None
    };
    Ok(AssociationReport { rows, joint })
}
