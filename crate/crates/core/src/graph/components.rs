use super::{MobilityGraph, ZoneId};

/// Strong components of a graph, largest first.
///
/// Ties in size are broken by the smallest member zone. Members inside a
/// component are listed in ascending zone order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ComponentPartition {
    zones: Vec<ZoneId>,
    assignment: Vec<usize>,
    components: Vec<Vec<ZoneId>>,
}

impl ComponentPartition {
    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn components(&self) -> &[Vec<ZoneId>] {
        &self.components
    }

    pub fn largest(&self) -> Option<&[ZoneId]> {
        self.components.first().map(Vec::as_slice)
    }

    pub fn component(&self, index: usize) -> Option<&[ZoneId]> {
        self.components.get(index).map(Vec::as_slice)
    }

    pub fn component_of(&self, zone: &ZoneId) -> Option<usize> {
        self.zones
            .binary_search(zone)
            .ok()
            .map(|i| self.assignment[i])
    }

    /// `(zone, component index)` pairs in ascending zone order.
    pub fn assignments(&self) -> impl Iterator<Item = (&ZoneId, usize)> + '_ {
        self.zones.iter().zip(self.assignment.iter().copied())
    }
}

/// Tarjan's algorithm with an explicit call stack, linear in vertices plus edges.
pub fn strong_components(g: &MobilityGraph) -> ComponentPartition {
    const UNVISITED: usize = usize::MAX;
    let n = g.vertex_count();
    let mut order = vec![UNVISITED; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    // (vertex, position of next out-edge to examine)
    let mut call: Vec<(usize, usize)> = Vec::new();
    let mut raw: Vec<Vec<usize>> = Vec::new();
    let mut counter = 0usize;

    for root in 0..n {
        if order[root] != UNVISITED {
            continue;
        }
        order[root] = counter;
        low[root] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root] = true;
        call.push((root, 0));

        while let Some(&mut (v, ref mut next)) = call.last_mut() {
            let out = g.out_edges(v);
            if *next < out.len() {
                let w = out[*next].to;
                *next += 1;
                if order[w] == UNVISITED {
                    order[w] = counter;
                    low[w] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w] = true;
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(order[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent] = low[parent].min(low[v]);
            }
            if low[v] == order[v] {
                let mut members = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w] = false;
                    members.push(w);
                    if w == v {
                        break;
                    }
                }
                members.sort_unstable();
                raw.push(members);
            }
        }
    }

    // Vertex indices follow zone order, so the first member is the smallest zone.
    raw.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    let mut assignment = vec![0usize; n];
    for (c, members) in raw.iter().enumerate() {
        for &v in members {
            assignment[v] = c;
        }
    }
    let components = raw
        .into_iter()
        .map(|m| m.into_iter().map(|v| g.zone(v).clone()).collect())
        .collect();
    ComponentPartition {
        zones: g.zones().to_vec(),
        assignment,
        components,
    }
}
