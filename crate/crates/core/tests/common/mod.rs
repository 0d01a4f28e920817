#![allow(dead_code)]

use std::collections::HashSet;

use basinseg::{BasinGraph, DisaffinityGraph, Edge};
use proptest::prelude::*;

/// Weights on a coarse grid so that ties and plateaus are common.
pub fn grid_weight() -> impl Strategy<Value = f32> {
    (0u8..=10).prop_map(|k| k as f32 / 10.0)
}

fn dedup_edges(raw: Vec<(u32, u32, f32)>) -> Vec<Edge> {
    let mut seen = HashSet::new();
    raw.into_iter()
        .filter(|&(u, v, _)| u != v && seen.insert((u.min(v), u.max(v))))
        .map(|(u, v, w)| Edge::new(u, v, w))
        .collect()
}

/// Random graphs with `1..=max_vertices` vertices and at most `max_edges`
/// distinct edges.
pub fn small_graph(max_vertices: u32, max_edges: usize) -> impl Strategy<Value = DisaffinityGraph> {
    (1..=max_vertices).prop_flat_map(move |n| {
        prop::collection::vec((0..n, 0..n, grid_weight()), 0..=max_edges).prop_map(move |raw| {
            DisaffinityGraph::new(n as usize, dedup_edges(raw)).expect("valid graph")
        })
    })
}

pub fn basin_graph(max_basins: u32, max_edges: usize) -> impl Strategy<Value = BasinGraph> {
    (1..=max_basins).prop_flat_map(move |n| {
        (
            prop::collection::vec(1u64..=5000, n as usize),
            prop::collection::vec((0..n, 0..n, grid_weight()), 0..=max_edges),
        )
            .prop_map(|(sizes, raw)| BasinGraph::new(sizes, dedup_edges(raw)).expect("valid"))
    })
}

/// Canonical form of a labelling: labels renumbered by first occurrence.
pub fn partition(labels: &[u32]) -> Vec<u32> {
    basinseg::segmentation::canonical_labels(labels)
}
