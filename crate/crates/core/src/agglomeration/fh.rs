//! Felzenszwalb-Huttenlocher graph segmentation, kept as a baseline.

use super::union_find::UnionFind;
use super::{order_edges, EdgeOrder};
use crate::error::{Error, Result};
use crate::graph::Edge;

/// Segments any weighted graph with the internal-difference criterion:
/// components `C1`, `C2` joined by an edge of weight `w` merge when
/// `w <= min(Int(C1) + k/|C1|, Int(C2) + k/|C2|)`. `|C|` sums `sizes` when
/// given, else counts vertices. Returns a label per vertex from 1, by
/// smallest member.
pub fn fh_cluster(
    vertex_count: usize,
    edges: &[Edge],
    k: f64,
    sizes: Option<&[u64]>,
) -> Result<Vec<u32>> {
    fh_cluster_ordered(vertex_count, edges, &order_edges(edges), k, sizes)
}

/// As [`fh_cluster`], reusing a precomputed order from
/// [`order_edges`](super::order_edges).
pub fn fh_cluster_ordered(
    vertex_count: usize,
    edges: &[Edge],
    order: &EdgeOrder,
    k: f64,
    sizes: Option<&[u64]>,
) -> Result<Vec<u32>> {
    if !(k >= 0.0) {
        return Err(Error::InvalidThreshold(format!(
            "k = {k} must be non-negative"
        )));
    }
    let mut size: Vec<f64> = match sizes {
        Some(s) if s.len() != vertex_count => {
            return Err(Error::DomainMismatch {
                left: s.len(),
                right: vertex_count,
            })
        }
        Some(s) => s.iter().map(|&x| x as f64).collect(),
        None => vec![1.0; vertex_count],
    };
    let mut internal = vec![0.0f64; vertex_count];
    let mut uf = UnionFind::new(vertex_count);
    for &idx in order.as_slice() {
        let e = &edges[idx as usize];
        let ra = uf.find(e.u);
        let rb = uf.find(e.v);
        if ra == rb {
            continue;
        }
        let (a, b) = (ra as usize, rb as usize);
        let w = e.w as f64;
        let limit = (internal[a] + k / size[a]).min(internal[b] + k / size[b]);
        if w > limit {
            continue;
        }
        let root = uf.link(ra, rb) as usize;
        size[root] = size[a] + size[b];
        // Edges arrive sorted, so w is the largest internal weight so far.
        internal[root] = internal[a].max(internal[b]).max(w);
    }
    Ok(uf.component_labels())
}
