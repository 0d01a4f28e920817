//! Segmentation of edge-weighted disaffinity graphs.
//!
//! A graph watershed over-segments the input into basins of attraction of
//! steepest descent. The basins and their saliencies form a region adjacency
//! graph, which is merged bottom-up by single linkage clustering whose merge
//! predicate depends on cluster size. A Felzenszwalb-Huttenlocher baseline
//! and split/merge scores are included for comparisons.

pub mod agglomeration;
pub mod basin_graph;
pub mod error;
pub mod graph;
pub mod io;
pub mod metrics;
pub mod pipeline;
pub mod segmentation;
pub mod synth;
pub mod watershed;

pub use agglomeration::{
    cluster, cluster_mst, cluster_with, fh_cluster, sort_edges, Cut, Dendrogram, Merge,
    SizeMeasure, ThresholdFn, ThresholdForm, ThresholdKind,
};
pub use basin_graph::{build_basin_graph, merge_below, BasinGraph};
pub use error::{Error, Result};
pub use graph::{AffinityVolume, DisaffinityGraph, Edge, PreprocessParams};
pub use metrics::{contingency, split_merge_scores, ContingencyTable, ScorePair, Unlabeled};
pub use segmentation::Segmentation;
pub use watershed::{watershed, watershed_basins, DescentGraph};
