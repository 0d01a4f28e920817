//! Watershed followed by agglomeration, and the method-comparison sweep.

use std::fmt::Write as _;

use crate::agglomeration::{
    cluster_ordered, fh_cluster_ordered, order_edges, sort_edges, Cut, Dendrogram, SizeMeasure,
    ThresholdFn, ThresholdForm,
};
use crate::basin_graph::{build_basin_graph, BasinGraph};
use crate::error::Result;
use crate::graph::{DisaffinityGraph, PreprocessParams};
use crate::metrics::{score, ScorePair, Unlabeled};
use crate::segmentation::Segmentation;
use crate::watershed::watershed_basins;

#[derive(Debug, Clone)]
pub struct SegmentOutput {
    pub basins: Segmentation,
    pub basin_graph: BasinGraph,
    pub dendrogram: Dendrogram,
    /// Voxel labels at the requested cut.
    pub segmentation: Segmentation,
}

/// Preprocesses `g`, runs the watershed, builds the basin graph on the
/// preprocessed graph and clusters it. `cut` defaults to the top level.
pub fn segment(
    g: &DisaffinityGraph,
    params: &PreprocessParams,
    tf: &ThresholdFn,
    size: SizeMeasure,
    cut: Option<Cut>,
) -> Result<SegmentOutput> {
    let pre = params.apply(g);
    let basins = watershed_basins(&pre);
    let basin_graph = build_basin_graph(&pre, &basins)?;
    let dendrogram = cluster_ordered(&basin_graph, &sort_edges(&basin_graph), tf, size);
    let clusters = dendrogram.flat_cut(cut.unwrap_or(Cut::Level(dendrogram.merges().len())))?;
    let segmentation = basins.merge_basins(&clusters)?;
    Ok(SegmentOutput {
        basins,
        basin_graph,
        dendrogram,
        segmentation,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    SlcConst,
    SlcLinear,
    SlcSquare,
    /// Single linkage cut at a saliency threshold.
    SlcPlain,
    FhDisaffinity,
    FhBasin,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::SlcConst,
        Method::SlcLinear,
        Method::SlcSquare,
        Method::SlcPlain,
        Method::FhDisaffinity,
        Method::FhBasin,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::SlcConst => "slc-const",
            Method::SlcLinear => "slc-linear",
            Method::SlcSquare => "slc-square",
            Method::SlcPlain => "slc-plain",
            Method::FhDisaffinity => "fh-disaffinity",
            Method::FhBasin => "fh-basin",
        }
    }

    /// Size-dependent single linkage families.
    pub fn is_size_dependent(&self) -> bool {
        matches!(
            self,
            Method::SlcConst | Method::SlcLinear | Method::SlcSquare
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkConfig {
    pub preprocess: PreprocessParams,
    pub size: SizeMeasure,
    pub unlabeled: Unlabeled,
    pub const_grid: Vec<f64>,
    pub linear_grid: Vec<f64>,
    pub square_grid: Vec<f64>,
    pub plain_grid: Vec<f64>,
    pub fh_disaffinity_grid: Vec<f64>,
    pub fh_basin_grid: Vec<f64>,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        let sizes = vec![
            10.0, 30.0, 100.0, 300.0, 1000.0, 3000.0, 10000.0, 30000.0, 100000.0,
        ];
        BenchmarkConfig {
            preprocess: PreprocessParams::new(Some(0.01), Some(0.9)).expect("valid thresholds"),
            size: SizeMeasure::Voxels,
            unlabeled: Unlabeled::Singleton,
            const_grid: sizes.clone(),
            linear_grid: sizes.clone(),
            square_grid: sizes,
            plain_grid: (1..=10).map(|i| i as f64 / 10.0).collect(),
            fh_disaffinity_grid: vec![0.05, 0.1, 0.2, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 50.0, 100.0],
            fh_basin_grid: vec![1.0, 10.0, 100.0, 1000.0, 10000.0, 100000.0, 1000000.0],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub parameter: f64,
    pub scores: ScorePair,
}

/// Scores every operating point against `ground_truth`. Rows come out
/// grouped by method in [`Method::ALL`] order, each family sorted by
/// ascending parameter.
pub fn run_benchmark(
    g: &DisaffinityGraph,
    ground_truth: &[u32],
    cfg: &BenchmarkConfig,
) -> Result<Vec<BenchRow>> {
    let pre = cfg.preprocess.apply(g);
    let basins = watershed_basins(&pre);
    let bg = build_basin_graph(&pre, &basins)?;
    let order = sort_edges(&bg);

    let mut rows = Vec::new();
    let mut push = |method, parameter: f64, labels: &[u32]| -> Result<()> {
        let (scores, _) = score(labels, ground_truth, cfg.unlabeled)?;
        rows.push(BenchRow {
            method,
            parameter,
            scores,
        });
        Ok(())
    };

    let sorted = |grid: &[f64]| {
        let mut grid = grid.to_vec();
        grid.sort_by(f64::total_cmp);
        grid
    };

    let families: [(Method, &[f64], fn(f64) -> ThresholdForm); 3] = [
        (Method::SlcConst, &cfg.const_grid, ThresholdForm::Const),
        (Method::SlcLinear, &cfg.linear_grid, ThresholdForm::Linear),
        (Method::SlcSquare, &cfg.square_grid, ThresholdForm::Square),
    ];
    for (method, grid, form) in families {
        for s0 in sorted(grid) {
            let tf = ThresholdFn::omega(form(s0))?;
            let dendrogram = cluster_ordered(&bg, &order, &tf, cfg.size);
            let seg = basins.merge_basins(&dendrogram.final_partition())?;
            push(method, s0, seg.labels())?;
        }
    }

    let full = cluster_ordered(&bg, &order, &ThresholdFn::always_merge(), cfg.size);
    for t in sorted(&cfg.plain_grid) {
        let seg = basins.merge_basins(&full.flat_cut(Cut::Saliency(t as f32))?)?;
        push(Method::SlcPlain, t, seg.labels())?;
    }

    let raw_order = order_edges(g.edges());
    for k in sorted(&cfg.fh_disaffinity_grid) {
        let labels = fh_cluster_ordered(g.vertex_count(), g.edges(), &raw_order, k, None)?;
        push(Method::FhDisaffinity, k, &labels)?;
    }

    for k in sorted(&cfg.fh_basin_grid) {
        let clusters =
            fh_cluster_ordered(bg.basin_count(), bg.edges(), &order, k, Some(bg.sizes()))?;
        let seg = basins.merge_basins(&clusters)?;
        push(Method::FhBasin, k, seg.labels())?;
    }
    Ok(rows)
}

pub fn format_benchmark_csv(rows: &[BenchRow]) -> String {
    let mut out = String::from("method,parameter,v_split,v_merge\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{:.6},{:.6}",
            r.method.name(),
            r.parameter,
            r.scores.v_split,
            r.scores.v_merge
        );
    }
    out
}
