mod common;

use std::collections::HashMap;

use basinseg::agglomeration::{cluster_mst, cluster_with, Cut, SizeMeasure};
use basinseg::{
    build_basin_graph, merge_below, watershed_basins, BasinGraph, Dendrogram, ThresholdFn,
    ThresholdForm,
};
use common::{basin_graph, grid_weight, partition, small_graph};
use proptest::prelude::*;

fn threshold() -> impl Strategy<Value = ThresholdFn> {
    (
        0usize..3,
        prop::sample::select(vec![10.0, 300.0, 10000.0]),
        any::<bool>(),
    )
        .prop_map(|(f, s0, tau)| {
            let form = [
                ThresholdForm::Const,
                ThresholdForm::Linear,
                ThresholdForm::Square,
            ][f](s0);
            if tau {
                ThresholdFn::tau(form).unwrap()
            } else {
                ThresholdFn::omega(form).unwrap()
            }
        })
}

fn cluster_sizes(bg: &BasinGraph, clusters: &[u32]) -> HashMap<u32, u64> {
    let mut sizes = HashMap::new();
    for (b, &c) in clusters.iter().enumerate() {
        *sizes.entry(c).or_insert(0) += bg.sizes()[b];
    }
    sizes
}

fn saliency_cuts(d: &Dendrogram) -> Vec<Cut> {
    let mut cuts: Vec<Cut> = d
        .merges()
        .iter()
        .map(|m| Cut::Saliency(m.saliency))
        .collect();
    cuts.push(Cut::Saliency(f32::INFINITY));
    cuts.extend((0..=d.merges().len()).map(Cut::Level));
    cuts
}

proptest! {
    #[test]
    fn final_clusters_satisfy_predicate(bg in basin_graph(50, 150), tf in threshold()) {
        let d = cluster_with(&bg, &tf, SizeMeasure::Voxels);
        for pair in d.merges().windows(2) {
            prop_assert!(pair[0].saliency <= pair[1].saliency);
        }
        let clusters = d.final_partition();
        let sizes = cluster_sizes(&bg, &clusters);
        let mut between: HashMap<(u32, u32), f32> = HashMap::new();
        for e in bg.edges() {
            let (a, b) = (clusters[e.u as usize], clusters[e.v as usize]);
            if a != b {
                let d = between.entry((a.min(b), a.max(b))).or_insert(f32::INFINITY);
                *d = d.min(e.w);
            }
        }
        for ((a, b), d) in between {
            let min_size = sizes[&a].min(sizes[&b]) as f64;
            prop_assert!(tf.keeps_apart(d as f64, min_size), "{a},{b} d={d} s={min_size}");
        }
    }

    #[test]
    fn merges_grow_clusters(bg in basin_graph(50, 150), tf in threshold()) {
        let d = cluster_with(&bg, &tf, SizeMeasure::Voxels);
        let mut cluster: Vec<usize> = (0..bg.basin_count()).collect();
        let mut size: Vec<u64> = bg.sizes().to_vec();
        for m in d.merges() {
            let (ca, cb) = (cluster[m.a as usize], cluster[m.b as usize]);
            prop_assert_ne!(ca, cb);
            let merged = size[ca] + size[cb];
            prop_assert!(merged > size[ca] && merged > size[cb]);
            prop_assert_eq!(m.size, merged);
            for c in cluster.iter_mut().filter(|c| **c == cb) {
                *c = ca;
            }
            size[ca] = merged;
            let brute: u64 = (0..bg.basin_count())
                .filter(|&b| cluster[b] == ca)
                .map(|b| bg.sizes()[b])
                .sum();
            prop_assert_eq!(brute, merged);
        }
    }

    #[test]
    fn mst_cuts_agree(bg in basin_graph(50, 150), tf in threshold()) {
        let full = cluster_with(&bg, &tf, SizeMeasure::Voxels);
        let mst = cluster_mst(&bg, &tf, SizeMeasure::Voxels);
        for cut in saliency_cuts(&full) {
            prop_assert_eq!(full.flat_cut(cut).unwrap(), mst.flat_cut(cut).unwrap());
        }
    }

    #[test]
    fn plain_linkage_cut_is_merge_below(bg in basin_graph(50, 150), t in grid_weight()) {
        let d = cluster_with(&bg, &ThresholdFn::always_merge(), SizeMeasure::Voxels);
        let cut = d.flat_cut(Cut::Saliency(t)).unwrap();
        prop_assert_eq!(partition(&cut), partition(&merge_below(&bg, t)));
    }

    #[test]
    fn basin_graph_matches_scan(g in small_graph(12, 20), t in prop::option::of(grid_weight())) {
        let g = t.map_or(g.clone(), |t| g.apply_tmax(t));
        let seg = watershed_basins(&g);
        let bg = build_basin_graph(&g, &seg).unwrap();
        prop_assert_eq!(bg.basin_count(), seg.basin_count() as usize);
        prop_assert_eq!(bg.sizes().iter().sum::<u64>(), seg.foreground_count());
        prop_assert!(bg.edges().len() <= g.edges().len());
        let labels = seg.labels();
        let mut expected: HashMap<(u32, u32), f32> = HashMap::new();
        for e in g.edges() {
            let (a, b) = (labels[e.u as usize], labels[e.v as usize]);
            if a != b && a != 0 && b != 0 {
                let w = expected.entry((a.min(b) - 1, a.max(b) - 1)).or_insert(f32::INFINITY);
                *w = w.min(e.w);
            }
        }
        prop_assert_eq!(expected.len(), bg.edges().len());
        for ((a, b), w) in expected {
            prop_assert_eq!(bg.saliency(a, b), Some(w));
        }
    }

    #[test]
    fn rebuild_commutes_with_merge(
        g in small_graph(12, 20),
        assign in prop::collection::vec(0u32..4, 12),
    ) {
        let seg = watershed_basins(&g);
        let bg = build_basin_graph(&g, &seg).unwrap();
        let clusters: Vec<u32> = (0..bg.basin_count()).map(|b| assign[b] + 1).collect();
        let clusters = partition(&clusters);
        let merged = seg.merge_basins(&clusters).unwrap();
        let rebuilt = build_basin_graph(&g, &merged).unwrap();

        let label_of = |c: u32| -> u32 {
            let v = seg.labels().iter().position(|&l| l != 0 && clusters[l as usize - 1] == c).unwrap();
            merged.labels()[v] - 1
        };
        let mut contracted: HashMap<(u32, u32), f32> = HashMap::new();
        for e in bg.edges() {
            let (a, b) = (label_of(clusters[e.u as usize]), label_of(clusters[e.v as usize]));
            if a != b {
                let w = contracted.entry((a.min(b), a.max(b))).or_insert(f32::INFINITY);
                *w = w.min(e.w);
            }
        }
        prop_assert_eq!(contracted.len(), rebuilt.edges().len());
        for ((a, b), w) in contracted {
            prop_assert_eq!(rebuilt.saliency(a, b), Some(w));
        }
        for (c, s) in cluster_sizes(&bg, &clusters) {
            prop_assert_eq!(rebuilt.sizes()[label_of(c) as usize], s);
        }
    }

    #[test]
    fn cluster_is_deterministic(bg in basin_graph(50, 150), tf in threshold()) {
        prop_assert_eq!(
            cluster_with(&bg, &tf, SizeMeasure::Basins),
            cluster_with(&bg, &tf, SizeMeasure::Basins)
        );
    }
}
