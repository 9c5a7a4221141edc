//! Trajectory and edge-list readers, and aggregation of commuter
//! trajectories into a [`MobilityGraph`].
//!
//! Trajectory files look like
//!
//! ```text
//! count,path
//! # comment
//! 3,A|B|C
//! 2,A|C
//! ```
//!
//! and edge lists like
//!
//! ```text
//! from,to,weight
//! A,B,3
//! ```

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Edge, MobilityGraph, ZoneId};

pub const TRAJECTORY_HEADER: &str = "count,path";
pub const EDGE_LIST_HEADER: &str = "from,to,weight";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Morning,
    Evening,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::Morning => Direction::Evening,
            Direction::Evening => Direction::Morning,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::Morning => "morning",
            Direction::Evening => "evening",
        })
    }
}

impl FromStr for Direction {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "morning" => Ok(Direction::Morning),
            "evening" => Ok(Direction::Evening),
            other => Err(Error::InvalidArgument(format!("unknown direction {other:?}"))),
        }
    }
}

/// An ordered zone sequence followed by `count` commuters.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Trajectory {
    zones: Vec<ZoneId>,
    count: u64,
}

impl Trajectory {
    /// Consecutive repeats of a zone are collapsed into one visit.
    pub fn new(zones: Vec<ZoneId>, count: u64) -> Result<Self> {
        if count < 1 {
            return Err(Error::InvalidArgument("trajectory count must be at least 1".into()));
        }
        let mut zones = zones;
        zones.dedup();
        if zones.is_empty() {
            return Err(Error::InvalidArgument("trajectory has no zones".into()));
        }
        Ok(Trajectory { zones, count })
    }

    pub fn zones(&self) -> &[ZoneId] {
        &self.zones
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn origin(&self) -> &ZoneId {
        &self.zones[0]
    }

    pub fn destination(&self) -> &ZoneId {
        self.zones.last().expect("trajectory is non-empty")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectorySet {
    pub trajectories: Vec<Trajectory>,
    pub direction: Direction,
}

impl TrajectorySet {
    pub fn new(trajectories: Vec<Trajectory>, direction: Direction) -> Self {
        TrajectorySet {
            trajectories,
            direction,
        }
    }

    pub fn len(&self) -> usize {
        self.trajectories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.trajectories.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Trajectory> {
        self.trajectories.iter()
    }
}

/// Content lines of a text source with their 1-based line numbers; blank and
/// `#` lines are skipped.
fn content_lines<R: BufRead>(source: R) -> impl Iterator<Item = Result<(usize, String)>> {
    source
        .lines()
        .enumerate()
        .filter_map(|(i, line)| match line {
            Err(e) => Some(Err(Error::Io(e))),
            Ok(line) => {
                let trimmed = line.trim();
                if trimmed.is_empty() || trimmed.starts_with('#') {
                    None
                } else {
                    Some(Ok((i + 1, trimmed.to_string())))
                }
            }
        })
}

fn expect_header(line: usize, text: &str, header: &str) -> Result<()> {
    if text.replace(' ', "") == header {
        Ok(())
    } else {
        Err(Error::Parse {
            line,
            message: format!("expected header {header:?}, found {text:?}"),
        })
    }
}

fn parse_zone(line: usize, token: &str) -> Result<ZoneId> {
    let token = token.trim();
    ZoneId::new(token).map_err(|_| Error::Parse {
        line,
        message: "empty zone id".into(),
    })
}

/// Reads a trajectory file. Records are kept as written, identical
/// sequences are not merged. The set is tagged with `direction`.
pub fn parse_trajectories<R: BufRead>(source: R, direction: Direction) -> Result<TrajectorySet> {
    let mut lines = content_lines(source);
    let (line, header) = lines.next().ok_or(Error::EmptyInput)??;
    expect_header(line, &header, TRAJECTORY_HEADER)?;

    let mut trajectories = Vec::new();
    for item in lines {
        let (line, text) = item?;
        let (count, path) = text.split_once(',').ok_or_else(|| Error::Parse {
            line,
            message: "expected `count,zone1|zone2|...`".into(),
        })?;
        let count: u64 = count.trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid count {:?}", count.trim()),
        })?;
        if count < 1 {
            return Err(Error::Parse {
                line,
                message: "count must be at least 1".into(),
            });
        }
        if path.trim().is_empty() {
            return Err(Error::Parse {
                line,
                message: "empty zone sequence".into(),
            });
        }
        let zones = path
            .split('|')
            .map(|t| parse_zone(line, t))
            .collect::<Result<Vec<_>>>()?;
        trajectories.push(Trajectory::new(zones, count)?);
    }
    if trajectories.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(TrajectorySet::new(trajectories, direction))
}

/// Reads an edge list with header `from,to,weight`.
pub fn parse_edge_list<R: BufRead>(source: R) -> Result<MobilityGraph> {
    let mut lines = content_lines(source);
    let (line, header) = lines.next().ok_or(Error::EmptyInput)??;
    expect_header(line, &header, EDGE_LIST_HEADER)?;

    let mut edges = Vec::new();
    for item in lines {
        let (line, text) = item?;
        let fields: Vec<&str> = text.split(',').collect();
        let [from, to, weight] = fields[..] else {
            return Err(Error::Parse {
                line,
                message: format!("expected 3 fields, found {}", fields.len()),
            });
        };
        let weight: f64 = weight.trim().parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid weight {:?}", weight.trim()),
        })?;
        edges.push((parse_zone(line, from)?, parse_zone(line, to)?, weight));
    }
    if edges.is_empty() {
        return Err(Error::EmptyInput);
    }
    MobilityGraph::from_edges(std::iter::empty(), edges)
}

/// Writes `g` in the format read by [`parse_edge_list`].
pub fn write_edge_list<W: Write>(g: &MobilityGraph, mut out: W) -> std::io::Result<()> {
    writeln!(out, "{EDGE_LIST_HEADER}")?;
    for (from, to, weight) in g.edge_triples() {
        writeln!(out, "{from},{to},{weight}")?;
    }
    Ok(())
}

/// Sums trajectory counts over every consecutive zone pair.
pub fn aggregate(trajs: &TrajectorySet) -> MobilityGraph {
    let zones: Vec<ZoneId> = trajs
        .iter()
        .flat_map(|t| t.zones().iter().cloned())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let position = |z: &ZoneId| zones.binary_search(z).expect("zone collected above");

    let mut weights: HashMap<(usize, usize), f64> = HashMap::new();
    for t in trajs.iter() {
        for pair in t.zones().windows(2) {
            *weights
                .entry((position(&pair[0]), position(&pair[1])))
                .or_insert(0.0) += t.count() as f64;
        }
    }
    let mut edges: Vec<Edge> = weights
        .into_iter()
        .map(|((from, to), weight)| Edge { from, to, weight })
        .collect();
    edges.sort_by_key(|e| (e.from, e.to));
    MobilityGraph::from_sorted_parts(zones, edges)
}

/// Reverses every sequence and flips the direction tag.
pub fn reverse(trajs: &TrajectorySet) -> TrajectorySet {
    let trajectories = trajs
        .iter()
        .map(|t| {
            let mut zones = t.zones().to_vec();
            zones.reverse();
            Trajectory {
                zones,
                count: t.count(),
            }
        })
        .collect();
    TrajectorySet::new(trajectories, trajs.direction.flipped())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{graph_of, z};
    use proptest::prelude::*;

    fn traj(path: &[&str], count: u64) -> Trajectory {
        Trajectory::new(path.iter().map(|s| z(s)).collect(), count).unwrap()
    }

    fn set(items: &[(&[&str], u64)]) -> TrajectorySet {
        TrajectorySet::new(
            items.iter().map(|(p, c)| traj(p, *c)).collect(),
            Direction::Morning,
        )
    }

    fn parse(text: &str) -> Result<TrajectorySet> {
        parse_trajectories(text.as_bytes(), Direction::Morning)
    }

    #[test]
    fn parses_records() {
        let t = parse("count,path\n# note\n3,A|B|C\n2,A|A|B\n1,A\n3,A|B|C\n").unwrap();
        assert_eq!(t.len(), 4);
        assert_eq!(t.trajectories[0], traj(&["A", "B", "C"], 3));
        assert_eq!(t.trajectories[1], traj(&["A", "B"], 2));
        assert_eq!(t.trajectories[1].zones().len(), 2);
        assert_eq!(t.trajectories[2], traj(&["A"], 1));
        assert_eq!(t.trajectories[3], t.trajectories[0]);
    }

    #[test]
    fn reports_bad_lines() {
        let bad = |text: &str| match parse(text) {
            Err(Error::Parse { line, .. }) => line,
            other => panic!("expected parse error, got {other:?}"),
        };
        assert_eq!(bad("count,path\n1,A|B\nnonsense\n"), 3);
        assert_eq!(bad("count,path\n0,A|B\n"), 2);
        assert_eq!(bad("count,path\n-1,A|B\n"), 2);
        assert_eq!(bad("count,path\n2,\n"), 2);
        assert_eq!(bad("count,path\n2,A||B\n"), 2);
        assert_eq!(bad("3,A|B\n"), 1);
        assert!(matches!(parse(""), Err(Error::EmptyInput)));
        assert!(matches!(parse("count,path\n"), Err(Error::EmptyInput)));
    }

    #[test]
    fn parses_edge_lists() {
        let g = parse_edge_list("from,to,weight\nA,B,3\nB,C,3\nA,C,2\n".as_bytes()).unwrap();
        assert_eq!((g.vertex_count(), g.edge_count()), (3, 3));
        assert!(matches!(
            parse_edge_list("from,to,weight\nA,A,5\n".as_bytes()),
            Err(Error::SelfLoop(_))
        ));
        assert!(matches!(
            parse_edge_list("from,to,weight\nA,B,0\n".as_bytes()),
            Err(Error::NonPositiveWeight { .. })
        ));
        assert!(matches!(
            parse_edge_list("from,to,weight\nA,B,1\nA,B,2\n".as_bytes()),
            Err(Error::DuplicateEdge { .. })
        ));
        assert!(matches!(
            parse_edge_list("from,to,weight\nA,B\n".as_bytes()),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn aggregates_counts() {
        let g = aggregate(&set(&[(&["A", "B", "C"], 3), (&["A", "C"], 2)]));
        assert_eq!(g, graph_of(&[("A", "B", 3.0), ("B", "C", 3.0), ("A", "C", 2.0)]));
        let g = aggregate(&set(&[(&["A", "B"], 1), (&["A", "B"], 4)]));
        assert_eq!(g.weight("A", "B"), Some(5.0));
        let g = aggregate(&set(&[(&["A"], 7)]));
        assert_eq!((g.vertex_count(), g.edge_count()), (1, 0));
    }

    #[test]
    fn reverse_flips_sequences() {
        let r = reverse(&set(&[(&["A", "B", "C"], 3), (&["A"], 1)]));
        assert_eq!(r.direction, Direction::Evening);
        assert_eq!(r.trajectories[0], traj(&["C", "B", "A"], 3));
        assert_eq!(r.trajectories[1], traj(&["A"], 1));
    }

    fn arb_set() -> impl Strategy<Value = TrajectorySet> {
        let path = prop::collection::vec(0u8..6, 1..7);
        prop::collection::vec((path, 1u64..20), 1..15).prop_map(|items| {
            let trajectories = items
                .into_iter()
                .map(|(p, c)| traj(&p.iter().map(|i| ["A", "B", "C", "D", "E", "F"][*i as usize]).collect::<Vec<_>>(), c))
                .collect();
            TrajectorySet::new(trajectories, Direction::Morning)
        })
    }

    proptest! {
        #[test]
        fn total_weight_counts_transitions(t in arb_set()) {
            let expected: u64 = t.iter().map(|t| t.count() * (t.zones().len() as u64 - 1)).sum();
            prop_assert_eq!(aggregate(&t).total_weight(), expected as f64);
        }

        #[test]
        fn reversal_transposes_the_graph(t in arb_set()) {
            prop_assert_eq!(aggregate(&reverse(&t)), aggregate(&t).transpose());
        }

        #[test]
        fn edge_list_round_trips(t in arb_set()) {
            let g = aggregate(&t);
            prop_assume!(g.edge_count() > 0);
            let mut buf = Vec::new();
            write_edge_list(&g, &mut buf).unwrap();
            let back = parse_edge_list(buf.as_slice()).unwrap();
            // isolated vertices are not representable in an edge list
            let connected = g.induced_subgraph(back.zones()).unwrap();
            prop_assert_eq!(back, connected);
        }
    }
}
