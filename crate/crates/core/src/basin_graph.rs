//! Region adjacency graph over watershed basins.
//!
//! Basin ids are 0-based: basin `b` is segmentation label `b + 1`. Each
//! edge carries the saliency of its two basins, the minimal disaffinity of
//! any source edge straddling them.

use std::collections::HashMap;

use crate::agglomeration::union_find::UnionFind;
use crate::error::{Error, Result};
use crate::graph::{DisaffinityGraph, Edge};
use crate::segmentation::Segmentation;

#[derive(Debug, Clone, PartialEq)]
pub struct BasinGraph {
    sizes: Vec<u64>,
    edges: Vec<Edge>,
}

impl BasinGraph {
    /// Edges must have `u < v`, be unique, sorted by `(u, v)` and reference
    /// existing basins.
    pub fn new(sizes: Vec<u64>, mut edges: Vec<Edge>) -> Result<Self> {
        let n = sizes.len();
        for e in &mut edges {
            if e.u == e.v {
                return Err(Error::SelfLoop(e.u));
            }
            for id in [e.u, e.v] {
                if id as usize >= n {
                    return Err(Error::VertexOutOfRange { id, count: n });
                }
            }
            if !e.w.is_finite() || e.w < 0.0 {
                return Err(Error::InvalidWeight {
                    u: e.u,
                    v: e.v,
                    w: e.w,
                });
            }
            let (u, v) = e.ordered();
            e.u = u;
            e.v = v;
        }
        edges.sort_by_key(|e| (e.u, e.v));
        if let Some(pair) = edges
            .windows(2)
            .find(|p| (p[0].u, p[0].v) == (p[1].u, p[1].v))
        {
            return Err(Error::DuplicateEdge(pair[0].u, pair[0].v));
        }
        Ok(BasinGraph { sizes, edges })
    }

    pub fn basin_count(&self) -> usize {
        self.sizes.len()
    }

    /// Voxel count per basin.
    pub fn sizes(&self) -> &[u64] {
        &self.sizes
    }

    /// Sorted by `(u, v)` with `u < v`.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Saliency between two basins, if they are adjacent.
    pub fn saliency(&self, a: u32, b: u32) -> Option<f32> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.edges
            .binary_search_by_key(&key, |e| (e.u, e.v))
            .ok()
            .map(|i| self.edges[i].w)
    }
}

/// One pass over the source edges; straddling edges are aggregated by
/// minimum. Edges touching background contribute nothing.
pub fn build_basin_graph(g: &DisaffinityGraph, seg: &Segmentation) -> Result<BasinGraph> {
    if seg.len() != g.vertex_count() {
        return Err(Error::DomainMismatch {
            left: seg.len(),
            right: g.vertex_count(),
        });
    }
    let labels = seg.labels();
    let count = seg.basin_count();
    if let Some(&label) = labels.iter().find(|&&l| l > count) {
        return Err(Error::LabelOutOfRange {
            label,
            basin_count: count,
        });
    }
    let mut pairs: HashMap<(u32, u32), f32> = HashMap::new();
    for e in g.edges() {
        let (a, b) = (labels[e.u as usize], labels[e.v as usize]);
        if a == b || a == 0 || b == 0 {
            continue;
        }
        let key = if a < b {
            (a - 1, b - 1)
        } else {
            (b - 1, a - 1)
        };
        pairs
            .entry(key)
            .and_modify(|w| *w = w.min(e.w))
            .or_insert(e.w);
    }
    let mut edges: Vec<Edge> = pairs
        .into_iter()
        .map(|((u, v), w)| Edge::new(u, v, w))
        .collect();
    edges.sort_by_key(|e| (e.u, e.v));
    Ok(BasinGraph {
        sizes: seg.basin_sizes().to_vec(),
        edges,
    })
}

/// Clusters formed by merging every basin pair with saliency strictly below
/// `t`. Returns a cluster label (from 1, by smallest member basin) per basin.
pub fn merge_below(bg: &BasinGraph, t: f32) -> Vec<u32> {
    let mut uf = UnionFind::new(bg.basin_count());
    for e in bg.edges() {
        if e.w < t {
            uf.union(e.u, e.v);
        }
    }
    uf.component_labels()
}
