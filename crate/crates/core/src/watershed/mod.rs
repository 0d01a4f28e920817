//! Watershed transform on edge-weighted graphs.
//!
//! Water flows from a vertex along its minimal incident edges. The steepest
//! descent graph records, per source edge, whether it is minimal for one
//! endpoint, both, or neither. Saddles keep only the outgoing edge to their
//! lowest-id target, and every non-minimal plateau is split by a single
//! FIFO breadth-first search seeded from all plateau corners in id order.
//! The connected components of what is left are the basins.
//!
//! Every step is a linear pass over vertices or edges.

pub mod oracle;

use std::collections::VecDeque;

use crate::graph::{DisaffinityGraph, PreprocessParams};
use crate::segmentation::Segmentation;

pub use oracle::{oracle_basins, OracleBasins, ORACLE_MAX_VERTICES};

/// State of one source edge `{u, v}` in the descent graph, where `u` and `v`
/// are the edge's stored endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeState {
    /// Minimal for neither endpoint.
    Absent,
    /// `u -> v`: minimal for `u` only.
    Forward,
    /// `v -> u`: minimal for `v` only.
    Backward,
    /// Minimal for both endpoints.
    Bidirectional,
    /// Dropped by saddle resolution or plateau division.
    Removed,
}

impl EdgeState {
    #[inline]
    fn is_kept(self) -> bool {
        matches!(
            self,
            EdgeState::Forward | EdgeState::Backward | EdgeState::Bidirectional
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexClass {
    /// No incident edges.
    Isolated,
    /// Exactly one strictly-outgoing edge and no bidirectional edge.
    Interior,
    /// More than one strictly-outgoing edge and no bidirectional edge.
    Saddle,
    /// Plateau vertex with at least one strictly-outgoing edge.
    PlateauCorner,
    /// Non-corner vertex of a non-minimal plateau.
    Plateau,
    /// Vertex of a plateau without corners (a regional minimum).
    Minimal,
}

/// Incident edge indices per vertex, each list sorted by neighbour id.
#[derive(Debug, Clone)]
struct Adjacency {
    offsets: Vec<usize>,
    incident: Vec<u32>,
}

impl Adjacency {
    fn new(g: &DisaffinityGraph) -> Self {
        let n = g.vertex_count();
        let edges = g.edges();
        let mut offsets = vec![0usize; n + 1];
        for e in edges {
            offsets[e.u as usize + 1] += 1;
            offsets[e.v as usize + 1] += 1;
        }
        for i in 0..n {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut incident = vec![0u32; offsets[n]];
        for (idx, e) in edges.iter().enumerate() {
            for end in [e.u, e.v] {
                incident[fill[end as usize]] = idx as u32;
                fill[end as usize] += 1;
            }
        }
        for v in 0..n {
            let slot = &mut incident[offsets[v]..offsets[v + 1]];
            if slot.len() > 1 {
                slot.sort_unstable_by_key(|&e| edges[e as usize].other(v as u32));
            }
        }
        Adjacency { offsets, incident }
    }

    #[inline]
    fn of(&self, v: u32) -> &[u32] {
        &self.incident[self.offsets[v as usize]..self.offsets[v as usize + 1]]
    }
}

/// Directed edge-state overlay on a [`DisaffinityGraph`], keyed by source
/// edge index.
#[derive(Debug, Clone)]
pub struct DescentGraph<'g> {
    graph: &'g DisaffinityGraph,
    adjacency: Adjacency,
    states: Vec<EdgeState>,
    classes: Vec<VertexClass>,
}

impl<'g> DescentGraph<'g> {
    /// Keeps, for every vertex, all incident edges of minimal weight, and
    /// classifies vertices into saddles, plateau corners and minima.
    pub fn build(graph: &'g DisaffinityGraph) -> Self {
        let n = graph.vertex_count();
        let edges = graph.edges();
        let mut min_w = vec![f32::INFINITY; n];
        for e in edges {
            let (u, v) = (e.u as usize, e.v as usize);
            min_w[u] = min_w[u].min(e.w);
            min_w[v] = min_w[v].min(e.w);
        }
        let states = edges
            .iter()
            .map(|e| {
                let for_u = e.w == min_w[e.u as usize];
                let for_v = e.w == min_w[e.v as usize];
                match (for_u, for_v) {
                    (true, true) => EdgeState::Bidirectional,
                    (true, false) => EdgeState::Forward,
                    (false, true) => EdgeState::Backward,
                    (false, false) => EdgeState::Absent,
                }
            })
            .collect();
        let mut d = DescentGraph {
            graph,
            adjacency: Adjacency::new(graph),
            states,
            classes: Vec::new(),
        };
        d.classes = d.classify();
        d
    }

    fn classify(&self) -> Vec<VertexClass> {
        let n = self.graph.vertex_count();
        let mut classes = vec![VertexClass::Isolated; n];
        let mut plateau_seen = vec![false; n];
        let mut members = Vec::new();
        let mut queue = VecDeque::new();
        for v in 0..n as u32 {
            if self.adjacency.of(v).is_empty() {
                continue;
            }
            let strict = self.strictly_outgoing(v).count();
            if !self.has_bidirectional(v) {
                classes[v as usize] = if strict > 1 {
                    VertexClass::Saddle
                } else {
                    VertexClass::Interior
                };
                continue;
            }
            if plateau_seen[v as usize] {
                continue;
            }
            // Collect the plateau containing v.
            members.clear();
            plateau_seen[v as usize] = true;
            queue.push_back(v);
            let mut has_corner = false;
            while let Some(x) = queue.pop_front() {
                members.push(x);
                has_corner |= self.strictly_outgoing(x).next().is_some();
                for (e, y) in self.neighbors(x) {
                    if self.states[e as usize] == EdgeState::Bidirectional
                        && !plateau_seen[y as usize]
                    {
                        plateau_seen[y as usize] = true;
                        queue.push_back(y);
                    }
                }
            }
            for &x in &members {
                classes[x as usize] = if !has_corner {
                    VertexClass::Minimal
                } else if self.strictly_outgoing(x).next().is_some() {
                    VertexClass::PlateauCorner
                } else {
                    VertexClass::Plateau
                };
            }
        }
        classes
    }

    #[inline]
    fn neighbors(&self, v: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        let edges = self.graph.edges();
        self.adjacency
            .of(v)
            .iter()
            .map(move |&e| (e, edges[e as usize].other(v)))
    }

    #[inline]
    fn points_out_of(&self, e: u32, v: u32) -> bool {
        let edge = &self.graph.edges()[e as usize];
        match self.states[e as usize] {
            EdgeState::Forward => edge.u == v,
            EdgeState::Backward => edge.v == v,
            _ => false,
        }
    }

    /// Edges directed strictly out of `v`, as `(edge index, target)`.
    pub fn strictly_outgoing(&self, v: u32) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.neighbors(v)
            .filter(move |&(e, _)| self.points_out_of(e, v))
    }

    pub fn has_bidirectional(&self, v: u32) -> bool {
        self.adjacency
            .of(v)
            .iter()
            .any(|&e| self.states[e as usize] == EdgeState::Bidirectional)
    }

    pub fn graph(&self) -> &'g DisaffinityGraph {
        self.graph
    }

    pub fn states(&self) -> &[EdgeState] {
        &self.states
    }

    pub fn state(&self, edge: usize) -> EdgeState {
        self.states[edge]
    }

    /// Classification computed when the descent graph was built.
    pub fn class(&self, v: u32) -> VertexClass {
        self.classes[v as usize]
    }

    /// Keeps only the outgoing edge to the lowest-id target at every vertex
    /// with more than one strictly-outgoing edge.
    pub fn resolve_saddles(mut self) -> Self {
        let n = self.graph.vertex_count() as u32;
        let mut drop = Vec::new();
        for v in 0..n {
            drop.clear();
            // Neighbours are sorted by id, so the first outgoing edge wins.
            drop.extend(self.strictly_outgoing(v).skip(1).map(|(e, _)| e));
            for &e in &drop {
                self.states[e as usize] = EdgeState::Removed;
            }
        }
        self
    }

    /// Splits non-minimal plateaus: breadth-first search from all plateau
    /// corners at once, corners queued in id order. A vertex first reached
    /// over `{v, u}` gets the edge `u -> v`; bidirectional edges between
    /// already-visited vertices are removed.
    pub fn divide_plateaus(mut self) -> Self {
        let n = self.graph.vertex_count();
        let edges = self.graph.edges();
        let mut visited = vec![false; n];
        let mut queue = VecDeque::new();
        for v in 0..n {
            if self.classes[v] == VertexClass::PlateauCorner {
                visited[v] = true;
                queue.push_back(v as u32);
            }
        }
        while let Some(v) = queue.pop_front() {
            for &e in self.adjacency.of(v) {
                let idx = e as usize;
                if self.states[idx] != EdgeState::Bidirectional {
                    continue;
                }
                let edge = &edges[idx];
                let u = edge.other(v);
                if visited[u as usize] {
                    self.states[idx] = EdgeState::Removed;
                } else {
                    visited[u as usize] = true;
                    queue.push_back(u);
                    self.states[idx] = if edge.u == u {
                        EdgeState::Forward
                    } else {
                        EdgeState::Backward
                    };
                }
            }
        }
        self
    }

    /// The single vertex `v` flows to, if any. Defined once saddles are
    /// resolved and plateaus divided; vertices of minimal plateaus and
    /// isolated vertices have none.
    pub fn descent_target(&self, v: u32) -> Option<u32> {
        self.strictly_outgoing(v).next().map(|(_, t)| t)
    }

    /// Connected components of the kept edges, numbered by smallest member
    /// vertex. Background vertices get label 0.
    pub fn label_basins(&self) -> Segmentation {
        let n = self.graph.vertex_count();
        let mut labels = vec![0u32; n];
        let mut sizes = Vec::new();
        let mut stack = Vec::new();
        for start in 0..n as u32 {
            if labels[start as usize] != 0 || self.graph.is_background(start) {
                continue;
            }
            let label = sizes.len() as u32 + 1;
            let mut size = 0u64;
            labels[start as usize] = label;
            stack.push(start);
            while let Some(x) = stack.pop() {
                size += 1;
                for (e, y) in self.neighbors(x) {
                    if self.states[e as usize].is_kept() && labels[y as usize] == 0 {
                        labels[y as usize] = label;
                        stack.push(y);
                    }
                }
            }
            sizes.push(size);
        }
        Segmentation::from_parts(labels, sizes)
    }
}

/// Watershed basins of `g` without preprocessing.
pub fn watershed_basins(g: &DisaffinityGraph) -> Segmentation {
    DescentGraph::build(g)
        .resolve_saddles()
        .divide_plateaus()
        .label_basins()
}

/// Applies the thresholds in `params` and returns the watershed basins of
/// the preprocessed graph.
pub fn watershed(g: &DisaffinityGraph, params: &PreprocessParams) -> Segmentation {
    watershed_basins(&params.apply(g))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Edge;

    fn chain(weights: &[f32]) -> DisaffinityGraph {
        let edges = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Edge::new(i as u32, i as u32 + 1, w))
            .collect();
        DisaffinityGraph::new(weights.len() + 1, edges).unwrap()
    }

    #[test]
    fn two_minimal_plateaus_on_short_chain() {
        let g = chain(&[1.0, 2.0, 1.0]);
        let d = DescentGraph::build(&g);
        assert_eq!(
            d.states(),
            &[
                EdgeState::Bidirectional,
                EdgeState::Absent,
                EdgeState::Bidirectional
            ]
        );
        assert!((0..4).all(|v| d.class(v) == VertexClass::Minimal));
        let seg = watershed_basins(&g);
        assert_eq!(seg.labels(), &[1, 1, 2, 2]);
    }

    #[test]
    fn total_tie_is_one_plateau() {
        let g = chain(&[0.3, 0.3]);
        let d = DescentGraph::build(&g);
        assert!(d.states().iter().all(|&s| s == EdgeState::Bidirectional));
        assert!((0..3).all(|v| d.class(v) == VertexClass::Minimal));
        assert_eq!(watershed_basins(&g).labels(), &[1, 1, 1]);
    }

    // Vertices x1..x7 are ids 0..6.
    fn seven_chain() -> DisaffinityGraph {
        chain(&[0.1, 1.0, 1.0, 1.0, 1.0, 0.1])
    }

    #[test]
    fn seven_chain_classification() {
        let g = seven_chain();
        let d = DescentGraph::build(&g);
        use EdgeState::*;
        assert_eq!(
            d.states(),
            &[
                Bidirectional,
                Backward,
                Bidirectional,
                Bidirectional,
                Forward,
                Bidirectional
            ]
        );
        use VertexClass::*;
        let classes: Vec<_> = (0..7).map(|v| d.class(v)).collect();
        assert_eq!(
            classes,
            vec![
                Minimal,
                Minimal,
                PlateauCorner,
                Plateau,
                PlateauCorner,
                Minimal,
                Minimal
            ]
        );
    }

    #[test]
    fn seven_chain_plateau_division() {
        let g = seven_chain();
        let d = DescentGraph::build(&g).resolve_saddles();
        // No saddles: nothing changes.
        assert_eq!(d.states(), DescentGraph::build(&g).states());
        let d = d.divide_plateaus();
        use EdgeState::*;
        // x4 is reached from x3 first (x4 -> x3); the x4-x5 edge joins two
        // visited vertices and is removed.
        assert_eq!(d.states()[2], Backward);
        assert_eq!(d.states()[3], Removed);
        assert_eq!(d.descent_target(3), Some(2));
        let seg = d.label_basins();
        assert_eq!(seg.labels(), &[1, 1, 1, 1, 2, 2, 2]);
        assert_eq!(seg.basin_sizes(), &[4, 3]);
    }

    #[test]
    fn saddle_keeps_lowest_target() {
        // x1..x5 with weights (0.1, 1, 1, 0.1): x3 (id 2) is a saddle.
        let g = chain(&[0.1, 1.0, 1.0, 0.1]);
        let d = DescentGraph::build(&g);
        assert_eq!(d.class(2), VertexClass::Saddle);
        let d = d.resolve_saddles();
        assert_eq!(d.state(1), EdgeState::Backward);
        assert_eq!(d.state(2), EdgeState::Removed);
        assert_eq!(d.descent_target(2), Some(1));
        assert_eq!(d.label_basins().labels(), &[1, 1, 1, 2, 2]);
    }

    #[test]
    fn star_saddle() {
        // Centre 0 with equal edges to 7, 3, 9; each leaf has a cheaper edge.
        let g = DisaffinityGraph::new(
            12,
            vec![
                Edge::new(0, 7, 0.5),
                Edge::new(0, 3, 0.5),
                Edge::new(0, 9, 0.5),
                Edge::new(7, 8, 0.1),
                Edge::new(3, 4, 0.1),
                Edge::new(9, 10, 0.1),
            ],
        )
        .unwrap();
        let d = DescentGraph::build(&g).resolve_saddles();
        let out: Vec<_> = d.strictly_outgoing(0).map(|(_, t)| t).collect();
        assert_eq!(out, vec![3]);
        assert_eq!(d.state(0), EdgeState::Removed);
        assert_eq!(d.state(2), EdgeState::Removed);
    }

    #[test]
    fn symmetric_plateau_goes_to_lower_corner() {
        // a' - a - c1 - m - c2 - b - b' with m=0, c1=1, c2=2, a=3, b=4.
        let g = DisaffinityGraph::new(
            7,
            vec![
                Edge::new(1, 0, 0.5),
                Edge::new(0, 2, 0.5),
                Edge::new(1, 3, 0.5),
                Edge::new(2, 4, 0.5),
                Edge::new(3, 5, 0.1),
                Edge::new(4, 6, 0.1),
            ],
        )
        .unwrap();
        let d = DescentGraph::build(&g);
        assert_eq!(d.class(0), VertexClass::Plateau);
        assert_eq!(d.class(1), VertexClass::PlateauCorner);
        assert_eq!(d.class(2), VertexClass::PlateauCorner);
        let d = d.resolve_saddles().divide_plateaus();
        assert_eq!(d.descent_target(0), Some(1));
        assert_eq!(d.label_basins().labels(), &[1, 1, 2, 1, 2, 1, 2]);
    }

    #[test]
    fn minimal_plateau_untouched_by_division() {
        let g = chain(&[0.2, 0.2, 0.2]);
        let d = DescentGraph::build(&g);
        let before = d.states().to_vec();
        assert_eq!(d.divide_plateaus().states(), &before[..]);
    }

    #[test]
    fn background_and_single_vertex() {
        let g = DisaffinityGraph::new(1, vec![]).unwrap();
        let seg = watershed(&g, &PreprocessParams::none());
        assert_eq!(seg.labels(), &[1]);

        let g = chain(&[0.95, 0.5, 0.4]);
        let p = PreprocessParams::new(None, Some(0.9)).unwrap();
        let seg = watershed(&g, &p);
        assert_eq!(seg.labels(), &[0, 1, 1, 1]);
        assert_eq!(seg.basin_count(), 1);
    }

    #[test]
    fn all_below_tmin_is_one_basin() {
        let g = chain(&[0.001, 0.005, 0.002, 0.009]);
        let p = PreprocessParams::new(Some(0.01), None).unwrap();
        assert_eq!(watershed(&g, &p).basin_count(), 1);
        assert_eq!(watershed_basins(&g).basin_count(), 2);
    }

    #[test]
    fn default_benchmark_thresholds() {
        let g = chain(&[0.005, 0.5, 0.95, 0.3, 0.6]);
        let p = PreprocessParams::new(Some(0.01), Some(0.9)).unwrap();
        let seg = watershed(&g, &p);
        assert_eq!(seg.labels(), &[1, 1, 1, 2, 2, 2]);
        // Raw watershed gives the same split here.
        assert_eq!(watershed_basins(&g).labels(), &[1, 1, 1, 2, 2, 2]);
    }

    #[test]
    fn edge_listing_order_does_not_matter() {
        let g = seven_chain();
        let mut rev: Vec<_> = g
            .edges()
            .iter()
            .rev()
            .map(|e| Edge::new(e.v, e.u, e.w))
            .collect();
        rev.swap(0, 3);
        let h = DisaffinityGraph::new(7, rev).unwrap();
        assert_eq!(watershed_basins(&g), watershed_basins(&h));
    }
}
