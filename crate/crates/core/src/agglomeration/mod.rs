//! Size-dependent single linkage clustering of a basin graph.
//!
//! Edges are visited once in non-decreasing saliency order (ties broken by
//! basin ids). Two clusters merge when the predicate Λ is *not* satisfied:
//! their saliency is too low for the size of the smaller cluster. Since
//! cluster sizes only grow and edges arrive sorted, the saliency between the
//! clusters is simply the weight of the edge being visited.

mod fh;
mod threshold;
pub mod union_find;

pub use fh::{fh_cluster, fh_cluster_ordered};
pub use threshold::{ThresholdFn, ThresholdForm, ThresholdKind};

use std::str::FromStr;

use crate::basin_graph::BasinGraph;
use crate::error::{Error, Result};
use crate::graph::Edge;
use union_find::UnionFind;

/// What a cluster's size counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SizeMeasure {
    /// Sum of member basin voxel counts.
    #[default]
    Voxels,
    /// Number of member basins.
    Basins,
}

impl FromStr for SizeMeasure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "voxels" => Ok(SizeMeasure::Voxels),
            "basins" => Ok(SizeMeasure::Basins),
            _ => Err(Error::InvalidThreshold(format!(
                "`{s}`: expected voxels or basins"
            ))),
        }
    }
}

/// Visiting order of edges: indices into an edge slice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EdgeOrder(Vec<u32>);

impl EdgeOrder {
    pub fn as_slice(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Orders edges by `(weight, smaller id, larger id)`.
pub fn order_edges(edges: &[Edge]) -> EdgeOrder {
    let mut order: Vec<u32> = (0..edges.len() as u32).collect();
    order.sort_unstable_by(|&a, &b| {
        let (ea, eb) = (&edges[a as usize], &edges[b as usize]);
        ea.w.total_cmp(&eb.w)
            .then_with(|| ea.ordered().cmp(&eb.ordered()))
    });
    EdgeOrder(order)
}

pub fn sort_edges(bg: &BasinGraph) -> EdgeOrder {
    order_edges(bg.edges())
}

/// One agglomeration step. `a < b` are the smallest member basins of the
/// two clusters joined; `size` is the size of the resulting cluster.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub a: u32,
    pub b: u32,
    pub saliency: f32,
    pub size: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cut {
    /// Replay the first `k` merges.
    Level(usize),
    /// Replay every merge with saliency strictly below the threshold.
    Saliency(f32),
}

impl FromStr for Cut {
    type Err = Error;

    /// `level:<k>` or a bare saliency.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidThreshold(format!("`{s}`: expected <saliency> or level:<k>"));
        if let Some(k) = s.strip_prefix("level:") {
            return k.parse().map(Cut::Level).map_err(|_| bad());
        }
        let t: f32 = s.parse().map_err(|_| bad())?;
        if t.is_nan() {
            return Err(bad());
        }
        Ok(Cut::Saliency(t))
    }
}

/// Ordered merge log over a fixed set of basins.
#[derive(Debug, Clone, PartialEq)]
pub struct Dendrogram {
    basin_count: usize,
    merges: Vec<Merge>,
}

impl Dendrogram {
    pub fn new(basin_count: usize, merges: Vec<Merge>) -> Result<Self> {
        for m in &merges {
            if m.a.max(m.b) as usize >= basin_count {
                return Err(Error::VertexOutOfRange {
                    id: m.a.max(m.b),
                    count: basin_count,
                });
            }
        }
        if merges.len() >= basin_count.max(1) {
            return Err(Error::Format(format!(
                "{} merges for {} basins",
                merges.len(),
                basin_count
            )));
        }
        Ok(Dendrogram {
            basin_count,
            merges,
        })
    }

    pub fn basin_count(&self) -> usize {
        self.basin_count
    }

    pub fn merges(&self) -> &[Merge] {
        &self.merges
    }

    /// Cluster label per basin at the requested level, numbered from 1 by
    /// smallest member basin.
    pub fn flat_cut(&self, cut: Cut) -> Result<Vec<u32>> {
        let k = match cut {
            Cut::Level(k) => {
                if k > self.merges.len() {
                    return Err(Error::LevelOutOfRange {
                        level: k,
                        merges: self.merges.len(),
                    });
                }
                k
            }
            Cut::Saliency(t) => self.merges.iter().take_while(|m| m.saliency < t).count(),
        };
        let mut uf = UnionFind::new(self.basin_count);
        for m in &self.merges[..k] {
            uf.union(m.a, m.b);
        }
        Ok(uf.component_labels())
    }

    /// The top level of the hierarchy.
    pub fn final_partition(&self) -> Vec<u32> {
        self.flat_cut(Cut::Level(self.merges.len()))
            .expect("full replay is in range")
    }
}

/// Runs the agglomeration over `bg` with the default voxel size measure.
pub fn cluster(bg: &BasinGraph, tf: &ThresholdFn) -> Dendrogram {
    cluster_with(bg, tf, SizeMeasure::Voxels)
}

pub fn cluster_with(bg: &BasinGraph, tf: &ThresholdFn, size: SizeMeasure) -> Dendrogram {
    cluster_ordered(bg, &sort_edges(bg), tf, size)
}

/// Agglomeration over a precomputed visiting order. The order may cover a
/// subset of the edges (see [`cluster_mst`]).
pub fn cluster_ordered(
    bg: &BasinGraph,
    order: &EdgeOrder,
    tf: &ThresholdFn,
    size: SizeMeasure,
) -> Dendrogram {
    let n = bg.basin_count();
    let mut uf = UnionFind::new(n);
    // Size and smallest member basin, valid at union-find roots.
    let mut root_data: Vec<(u64, u32)> = match size {
        SizeMeasure::Voxels => bg.sizes().iter().copied().zip(0..).collect(),
        SizeMeasure::Basins => (0..n as u32).map(|b| (1, b)).collect(),
    };
    let edges = bg.edges();
    let sorted: Vec<Edge> = order
        .as_slice()
        .iter()
        .map(|&i| edges[i as usize])
        .collect();
    let mut merges = Vec::new();
    for e in &sorted {
        let ra = uf.find(e.u);
        let rb = uf.find(e.v);
        if ra == rb {
            continue;
        }
        let ((sa, ma), (sb, mb)) = (root_data[ra as usize], root_data[rb as usize]);
        if tf.keeps_apart(e.w as f64, sa.min(sb) as f64) {
            continue;
        }
        let root = uf.link(ra, rb);
        root_data[root as usize] = (sa + sb, ma.min(mb));
        merges.push(Merge {
            a: ma.min(mb),
            b: ma.max(mb),
            saliency: e.w,
            size: sa + sb,
        });
    }
    Dendrogram {
        basin_count: n,
        merges,
    }
}

/// Kruskal's minimum spanning forest, visiting edges in `order`. The
/// returned order lists the forest edges in the same relative order.
pub fn minimum_spanning_forest(bg: &BasinGraph, order: &EdgeOrder) -> EdgeOrder {
    let mut uf = UnionFind::new(bg.basin_count());
    let edges = bg.edges();
    EdgeOrder(
        order
            .as_slice()
            .iter()
            .copied()
            .filter(|&i| uf.union(edges[i as usize].u, edges[i as usize].v).is_some())
            .collect(),
    )
}

/// Same agglomeration restricted to the minimum spanning forest of `bg`.
pub fn cluster_mst(bg: &BasinGraph, tf: &ThresholdFn, size: SizeMeasure) -> Dendrogram {
    let order = sort_edges(bg);
    let forest = minimum_spanning_forest(bg, &order);
    cluster_ordered(bg, &forest, tf, size)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn three_basins() -> BasinGraph {
        BasinGraph::new(
            vec![100, 100, 5000],
            vec![Edge::new(0, 1, 0.2), Edge::new(1, 2, 0.5)],
        )
        .unwrap()
    }

    fn omega(form: ThresholdForm) -> ThresholdFn {
        ThresholdFn::omega(form).unwrap()
    }

    #[test]
    fn sort_ties_by_basin_pair() {
        let bg = BasinGraph::new(
            vec![1; 4],
            vec![
                Edge::new(2, 3, 0.5),
                Edge::new(0, 1, 0.2),
                Edge::new(0, 3, 0.5),
            ],
        )
        .unwrap();
        // Stored edges: (0,1,.2) (0,3,.5) (2,3,.5).
        assert_eq!(sort_edges(&bg).as_slice(), &[0, 1, 2]);
        let empty = BasinGraph::new(vec![1], vec![]).unwrap();
        assert!(sort_edges(&empty).is_empty());
        let raw = [
            Edge::new(5, 1, 0.5),
            Edge::new(0, 9, 0.5),
            Edge::new(3, 4, 0.2),
        ];
        assert_eq!(order_edges(&raw).as_slice(), &[2, 1, 0]);
    }

    #[test]
    fn permissive_linear_merges_everything() {
        let d = cluster(&three_basins(), &omega(ThresholdForm::Linear(1000.0)));
        assert_eq!(
            d.merges(),
            &[
                Merge {
                    a: 0,
                    b: 1,
                    saliency: 0.2,
                    size: 200
                },
                Merge {
                    a: 0,
                    b: 2,
                    saliency: 0.5,
                    size: 5200
                },
            ]
        );
        assert_eq!(d.final_partition(), vec![1, 1, 1]);
    }

    #[test]
    fn stricter_linear_stops_early() {
        // 300 * 0.8 = 240 > 100 merges; 300 * 0.5 = 150 <= 200 does not.
        let d = cluster(&three_basins(), &omega(ThresholdForm::Linear(300.0)));
        assert_eq!(d.merges().len(), 1);
        assert_eq!(d.final_partition(), vec![1, 1, 2]);
    }

    #[test]
    fn zero_omega_never_merges() {
        let bg = three_basins();
        let f = omega(ThresholdForm::Const(0.0));
        assert!(cluster(&bg, &f).merges().is_empty());
        assert!(cluster_mst(&bg, &f, SizeMeasure::Voxels)
            .merges()
            .is_empty());
    }

    #[test]
    fn large_scale_linear_form() {
        let d = cluster(&three_basins(), &omega(ThresholdForm::Linear(3000.0)));
        assert_eq!(d.merges().len(), 2);
    }

    #[test]
    fn basin_count_measure() {
        // Sizes count basins: 3 * 0.8 = 2.4 > 1, then 3 * 0.5 = 1.5 > min(2, 1).
        let d = cluster_with(
            &three_basins(),
            &omega(ThresholdForm::Linear(3.0)),
            SizeMeasure::Basins,
        );
        assert_eq!(d.merges().len(), 2);
        assert_eq!(d.merges()[1].size, 3);
    }

    #[test]
    fn mst_drops_heavy_triangle_edge() {
        let bg = BasinGraph::new(
            vec![10, 10, 10],
            vec![
                Edge::new(0, 1, 0.1),
                Edge::new(1, 2, 0.2),
                Edge::new(0, 2, 0.9),
            ],
        )
        .unwrap();
        let forest = minimum_spanning_forest(&bg, &sort_edges(&bg));
        assert_eq!(forest.len(), 2);
        let f = omega(ThresholdForm::Linear(1e6));
        let full = cluster(&bg, &f);
        let mst = cluster_mst(&bg, &f, SizeMeasure::Voxels);
        assert_eq!(full, mst);
        assert_eq!(full.final_partition(), vec![1, 1, 1]);
    }

    #[test]
    fn tree_graph_same_sequence() {
        let bg = three_basins();
        let f = omega(ThresholdForm::Square(700.0));
        assert_eq!(cluster(&bg, &f), cluster_mst(&bg, &f, SizeMeasure::Voxels));
    }

    #[test]
    fn flat_cuts() {
        let d = cluster(&three_basins(), &omega(ThresholdForm::Linear(1000.0)));
        assert_eq!(d.flat_cut(Cut::Level(0)).unwrap(), vec![1, 2, 3]);
        assert_eq!(d.flat_cut(Cut::Level(1)).unwrap(), vec![1, 1, 2]);
        assert_eq!(d.flat_cut(Cut::Level(2)).unwrap(), vec![1, 1, 1]);
        assert!(matches!(
            d.flat_cut(Cut::Level(3)),
            Err(Error::LevelOutOfRange {
                level: 3,
                merges: 2
            })
        ));
        assert_eq!(d.flat_cut(Cut::Saliency(0.2)).unwrap(), vec![1, 2, 3]);
        assert_eq!(d.flat_cut(Cut::Saliency(0.3)).unwrap(), vec![1, 1, 2]);
    }

    #[test]
    fn parse_cut() {
        assert_eq!("level:3".parse::<Cut>().unwrap(), Cut::Level(3));
        assert_eq!("0.25".parse::<Cut>().unwrap(), Cut::Saliency(0.25));
        assert!("level:x".parse::<Cut>().is_err());
        assert!("NaN".parse::<Cut>().is_err());
    }

    #[test]
    fn dendrogram_validation() {
        assert!(Dendrogram::new(
            2,
            vec![Merge {
                a: 0,
                b: 2,
                saliency: 0.1,
                size: 2
            }]
        )
        .is_err());
        assert!(Dendrogram::new(
            2,
            vec![
                Merge {
                    a: 0,
                    b: 1,
                    saliency: 0.1,
                    size: 2
                },
                Merge {
                    a: 0,
                    b: 1,
                    saliency: 0.1,
                    size: 2
                }
            ]
        )
        .is_err());
    }
}
