use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use basinseg::agglomeration::{cluster_with, fh_cluster, Cut, SizeMeasure, ThresholdFn};
use basinseg::agglomeration::{ThresholdForm, ThresholdKind};
use basinseg::pipeline::{format_benchmark_csv, run_benchmark, segment, BenchmarkConfig};
use basinseg::synth::{synthesize, SynthSpec};
use basinseg::{io, metrics, watershed, DisaffinityGraph, PreprocessParams, Segmentation};

#[derive(Parser)]
#[command(
    name = "basinseg",
    version,
    about = "Watershed + size-dependent single linkage segmentation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a seeded synthetic affinity volume and its ground truth.
    Synth(SynthArgs),
    /// Watershed basins and basin graph of a volume or edge list.
    Watershed(WatershedArgs),
    /// Cluster a basin graph into a dendrogram.
    Cluster(ClusterArgs),
    /// Watershed followed by clustering.
    Segment(SegmentArgs),
    /// Split/merge scores of a segmentation against ground truth.
    Eval(EvalArgs),
    /// Sweep every method family against ground truth and write a CSV.
    Benchmark(BenchmarkArgs),
    /// Felzenszwalb-Huttenlocher segmentation of the disaffinity graph.
    BaselineFh(BaselineArgs),
}

#[derive(Args)]
struct InputArgs {
    /// Raw affinity volume with a `.json` sidecar.
    #[arg(long, conflicts_with = "edges", required_unless_present = "edges")]
    volume: Option<PathBuf>,
    /// Edge list file (`u v w` lines).
    #[arg(long)]
    edges: Option<PathBuf>,
}

struct Input {
    graph: DisaffinityGraph,
    shape: Option<[usize; 3]>,
}

impl InputArgs {
    fn load(&self) -> Result<Input> {
        if let Some(path) = &self.volume {
            let vol =
                io::read_volume(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(Input {
                graph: DisaffinityGraph::from_volume(&vol),
                shape: Some(vol.shape()),
            })
        } else {
            let path = self.edges.as_ref().expect("clap enforces an input");
            let graph =
                io::read_edge_list(path).with_context(|| format!("reading {}", path.display()))?;
            Ok(Input { graph, shape: None })
        }
    }
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    tmin: Option<f32>,
    #[arg(long)]
    tmax: Option<f32>,
}

impl ThresholdArgs {
    fn params(&self) -> Result<PreprocessParams> {
        Ok(PreprocessParams::new(self.tmin, self.tmax)?)
    }
}

#[derive(Args)]
struct ClusterFnArgs {
    /// Threshold function: `const:<s0>`, `linear:<s0>` or `square:<s0>`.
    #[arg(long = "fn", default_value = "linear:3000")]
    function: ThresholdForm,
    #[arg(long, default_value = "omega", value_parser = parse_kind)]
    form: ThresholdKind,
    /// Cluster size measure: `voxels` or `basins`.
    #[arg(long, default_value = "voxels")]
    size: SizeMeasure,
    /// Flat cut: a saliency threshold or `level:<k>`. Defaults to the top level.
    #[arg(long)]
    cut: Option<Cut>,
}

fn parse_kind(s: &str) -> Result<ThresholdKind, basinseg::Error> {
    s.parse()
}

impl ClusterFnArgs {
    fn threshold(&self) -> Result<ThresholdFn> {
        Ok(ThresholdFn::new(self.form, self.function)?)
    }
}

#[derive(Args)]
struct SynthArgs {
    /// `Z,Y,X`
    #[arg(long, default_value = "64,64,64", value_parser = parse_shape)]
    shape: [usize; 3],
    #[arg(long, default_value_t = 8)]
    blobs: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    interior_mean: f64,
    #[arg(long, default_value_t = 0.05)]
    interior_sd: f64,
    #[arg(long, default_value_t = 0.9)]
    boundary_mean: f64,
    #[arg(long, default_value_t = 0.05)]
    boundary_sd: f64,
    /// Probability that an edge draws from the opposite distribution.
    #[arg(long, default_value_t = 0.0)]
    swap_prob: f64,
    #[arg(long, default_value_t = 2.0)]
    roughness: f64,
    #[arg(long)]
    out_aff: PathBuf,
    #[arg(long)]
    out_gt: PathBuf,
}

impl SynthArgs {
    fn spec(&self) -> SynthSpec {
        SynthSpec {
            shape: self.shape,
            blobs: self.blobs,
            interior_mean: self.interior_mean,
            interior_sd: self.interior_sd,
            boundary_mean: self.boundary_mean,
            boundary_sd: self.boundary_sd,
            swap_prob: self.swap_prob,
            roughness: self.roughness,
            seed: self.seed,
        }
    }
}

fn parse_shape(s: &str) -> Result<[usize; 3], String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| format!("`{s}`: expected Z,Y,X"))?;
    <[usize; 3]>::try_from(parts).map_err(|_| format!("`{s}`: expected Z,Y,X"))
}

#[derive(Args)]
struct WatershedArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    #[arg(long)]
    out_seg: PathBuf,
    #[arg(long)]
    out_basins: PathBuf,
}

#[derive(Args)]
struct ClusterArgs {
    /// Basin graph file written by `watershed`.
    #[arg(long)]
    basins: PathBuf,
    #[command(flatten)]
    function: ClusterFnArgs,
    #[arg(long)]
    out_dendrogram: PathBuf,
    /// Basin segmentation, to write the flat cut as a voxel segmentation.
    #[arg(long, requires = "out_seg")]
    segmentation: Option<PathBuf>,
    #[arg(long, requires = "segmentation")]
    out_seg: Option<PathBuf>,
    /// Writes `basin cluster` lines for the flat cut.
    #[arg(long)]
    out_clusters: Option<PathBuf>,
}

#[derive(Args)]
struct SegmentArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    #[command(flatten)]
    function: ClusterFnArgs,
    #[arg(long)]
    out_seg: PathBuf,
    #[arg(long)]
    out_dendrogram: Option<PathBuf>,
    #[arg(long)]
    out_basins: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    proposed: PathBuf,
    #[arg(long)]
    gt: PathBuf,
    /// Proposed background inside ground-truth foreground: `singleton` or `drop`.
    #[arg(long, default_value = "singleton")]
    unlabeled: metrics::Unlabeled,
    /// Also write the contingency table as CSV.
    #[arg(long)]
    table: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    /// Affinity volume to score; a synthetic volume is generated if omitted.
    #[arg(long, requires = "gt")]
    volume: Option<PathBuf>,
    #[arg(long, requires = "volume")]
    gt: Option<PathBuf>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value = "64,64,64", value_parser = parse_shape)]
    shape: [usize; 3],
    #[arg(long, default_value_t = 8)]
    blobs: usize,
    #[arg(long, default_value_t = 0.01)]
    tmin: f32,
    #[arg(long, default_value_t = 0.9)]
    tmax: f32,
    #[arg(long, default_value = "voxels")]
    size: SizeMeasure,
    #[arg(long, default_value = "singleton")]
    unlabeled: metrics::Unlabeled,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BaselineArgs {
    #[command(flatten)]
    input: InputArgs,
    /// Scale parameter.
    #[arg(long)]
    k: f64,
    #[arg(long)]
    out_seg: PathBuf,
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_synth(args: &SynthArgs) -> Result<()> {
    let v = synthesize(&args.spec())?;
    io::write_volume(&args.out_aff, &v.affinity)
        .with_context(|| format!("writing {}", args.out_aff.display()))?;
    io::write_label_volume(&args.out_gt, &v.ground_truth, args.shape)
        .with_context(|| format!("writing {}", args.out_gt.display()))?;
    println!("voxels: {} segments: {}", v.ground_truth.len(), args.blobs);
    Ok(())
}

fn cmd_watershed(args: &WatershedArgs) -> Result<()> {
    let input = args.input.load()?;
    let pre = args.thresholds.params()?.apply(&input.graph);
    let seg = watershed::watershed_basins(&pre);
    let bg = basinseg::build_basin_graph(&pre, &seg)?;
    io::write_labels(&args.out_seg, seg.labels(), input.shape)
        .with_context(|| format!("writing {}", args.out_seg.display()))?;
    write(&args.out_basins, &io::format_basin_graph(&bg))?;
    println!("basins: {}", seg.basin_count());
    Ok(())
}

fn cmd_cluster(args: &ClusterArgs) -> Result<()> {
    let text = fs::read_to_string(&args.basins)
        .with_context(|| format!("reading {}", args.basins.display()))?;
    let bg = io::parse_basin_graph(&text)
        .with_context(|| format!("parsing {}", args.basins.display()))?;
    let tf = args.function.threshold()?;
    let dendrogram = cluster_with(&bg, &tf, args.function.size);
    write(&args.out_dendrogram, &io::format_dendrogram(&dendrogram))?;
    let cut = args
        .function
        .cut
        .unwrap_or(Cut::Level(dendrogram.merges().len()));
    let clusters = dendrogram.flat_cut(cut)?;
    if let Some(path) = &args.out_clusters {
        let mut out = String::new();
        for (b, c) in clusters.iter().enumerate() {
            out.push_str(&format!("{} {c}\n", b + 1));
        }
        write(path, &out)?;
    }
    if let (Some(seg_path), Some(out_seg)) = (&args.segmentation, &args.out_seg) {
        let (labels, shape) =
            io::read_labels(seg_path).with_context(|| format!("reading {}", seg_path.display()))?;
        let basins = Segmentation::from_labels(labels)?;
        if basins.basin_count() as usize != bg.basin_count() {
            bail!(
                "segmentation has {} basins, basin graph has {}",
                basins.basin_count(),
                bg.basin_count()
            );
        }
        let merged = basins.merge_basins(&clusters)?;
        io::write_labels(out_seg, merged.labels(), shape)
            .with_context(|| format!("writing {}", out_seg.display()))?;
    }
    let segments = clusters.iter().copied().max().unwrap_or(0);
    println!("merges: {} segments: {segments}", dendrogram.merges().len());
    Ok(())
}

fn cmd_segment(args: &SegmentArgs) -> Result<()> {
    let input = args.input.load()?;
    let out = segment(
        &input.graph,
        &args.thresholds.params()?,
        &args.function.threshold()?,
        args.function.size,
        args.function.cut,
    )?;
    io::write_labels(&args.out_seg, out.segmentation.labels(), input.shape)
        .with_context(|| format!("writing {}", args.out_seg.display()))?;
    if let Some(path) = &args.out_dendrogram {
        write(path, &io::format_dendrogram(&out.dendrogram))?;
    }
    if let Some(path) = &args.out_basins {
        write(path, &io::format_basin_graph(&out.basin_graph))?;
    }
    println!(
        "basins: {} segments: {}",
        out.basins.basin_count(),
        out.segmentation.basin_count()
    );
    Ok(())
}

fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let (proposed, _) = io::read_labels(&args.proposed)
        .with_context(|| format!("reading {}", args.proposed.display()))?;
    let (gt, _) =
        io::read_labels(&args.gt).with_context(|| format!("reading {}", args.gt.display()))?;
    let table = metrics::contingency(&proposed, &gt, args.unlabeled)?;
    let s = metrics::split_merge_scores(&table);
    if let Some(path) = &args.table {
        write(path, &table.to_csv())?;
    }
    println!(
        "V_split={} V_merge={} N={}",
        s.v_split,
        s.v_merge,
        table.total()
    );
    Ok(())
}

fn cmd_benchmark(args: &BenchmarkArgs) -> Result<()> {
    let (graph, gt) = match (&args.volume, &args.gt) {
        (Some(vol), Some(gt)) => {
            let vol = io::read_volume(vol).with_context(|| format!("reading {}", vol.display()))?;
            let (labels, _) =
                io::read_labels(gt).with_context(|| format!("reading {}", gt.display()))?;
            (DisaffinityGraph::from_volume(&vol), labels)
        }
        _ => {
            let v = synthesize(&SynthSpec::new(args.shape, args.blobs, args.seed))?;
            (DisaffinityGraph::from_volume(&v.affinity), v.ground_truth)
        }
    };
    let cfg = BenchmarkConfig {
        preprocess: PreprocessParams::new(Some(args.tmin), Some(args.tmax))?,
        size: args.size,
        unlabeled: args.unlabeled,
        ..BenchmarkConfig::default()
    };
    let rows = run_benchmark(&graph, &gt, &cfg)?;
    write(&args.out, &format_benchmark_csv(&rows))?;
    println!("rows: {}", rows.len());
    Ok(())
}

fn cmd_baseline(args: &BaselineArgs) -> Result<()> {
    let input = args.input.load()?;
    let g = &input.graph;
    let labels = fh_cluster(g.vertex_count(), g.edges(), args.k, None)?;
    io::write_labels(&args.out_seg, &labels, input.shape)
        .with_context(|| format!("writing {}", args.out_seg.display()))?;
    println!("segments: {}", labels.iter().copied().max().unwrap_or(0));
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match &cli.command {
        Command::Synth(a) => cmd_synth(a),
        Command::Watershed(a) => cmd_watershed(a),
        Command::Cluster(a) => cmd_cluster(a),
        Command::Segment(a) => cmd_segment(a),
        Command::Eval(a) => cmd_eval(a),
        Command::Benchmark(a) => cmd_benchmark(a),
        Command::BaselineFh(a) => cmd_baseline(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let rendered = e.render().to_string();
            let message: Vec<&str> = rendered
                .lines()
                .take_while(|l| !l.starts_with("Usage:"))
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .collect();
            eprintln!("{}", message.join(" "));
            return ExitCode::from(2);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
