//! Python bindings for `basinseg`.

use pyo3::exceptions::{PyOSError, PyValueError};
use pyo3::prelude::*;

use basinseg::agglomeration::{self, Cut, SizeMeasure};
use basinseg::metrics::{self, Unlabeled};
use basinseg::synth::{synthesize, SynthSpec};
use basinseg::{Edge, PreprocessParams, ThresholdFn, ThresholdForm, ThresholdKind};

fn err(e: basinseg::Error) -> PyErr {
    match e {
        basinseg::Error::Io(e) => PyOSError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn parse<T: std::str::FromStr<Err = basinseg::Error>>(s: &str) -> PyResult<T> {
    s.parse().map_err(err)
}

fn to_edges(edges: Vec<(u32, u32, f32)>) -> Vec<Edge> {
    edges
        .into_iter()
        .map(|(u, v, w)| Edge::new(u, v, w))
        .collect()
}

fn from_edges(edges: &[Edge]) -> Vec<(u32, u32, f32)> {
    edges.iter().map(|e| (e.u, e.v, e.w)).collect()
}

fn threshold(function: &str, form: &str) -> PyResult<ThresholdFn> {
    let f: ThresholdForm = parse(function)?;
    let kind: ThresholdKind = parse(form)?;
    ThresholdFn::new(kind, f).map_err(err)
}

/// A cut is either a saliency threshold (float) or a string accepted by the
/// command line, such as `"level:3"` or `"0.5"`.
fn extract_cut(cut: &Bound<'_, PyAny>) -> PyResult<Cut> {
    if let Ok(s) = cut.extract::<String>() {
        return parse(&s);
    }
    let t: f32 = cut.extract()?;
    if t.is_nan() {
        return Err(PyValueError::new_err("cut threshold is NaN"));
    }
    Ok(Cut::Saliency(t))
}

/// Undirected graph with disaffinity weights in [0, 1].
#[pyclass(
    name = "DisaffinityGraph",
    module = "pybasinseg",
    frozen,
    skip_from_py_object
)]
struct PyGraph(basinseg::DisaffinityGraph);

#[pymethods]
impl PyGraph {
    #[new]
    fn new(vertex_count: usize, edges: Vec<(u32, u32, f32)>) -> PyResult<Self> {
        basinseg::DisaffinityGraph::new(vertex_count, to_edges(edges))
            .map(PyGraph)
            .map_err(err)
    }

    /// Graph of a `(3, Z, Y, X)` affinity volume given as a flat C-order list.
    #[staticmethod]
    fn from_volume(shape: (usize, usize, usize), data: Vec<f32>) -> PyResult<Self> {
        let vol = basinseg::AffinityVolume::new([shape.0, shape.1, shape.2], data).map_err(err)?;
        Ok(PyGraph(basinseg::DisaffinityGraph::from_volume(&vol)))
    }

    /// Parses `u v w` lines.
    #[staticmethod]
    fn parse_edge_list(text: &str) -> PyResult<Self> {
        basinseg::DisaffinityGraph::parse_edge_list(text)
            .map(PyGraph)
            .map_err(err)
    }

    fn to_edge_list(&self) -> String {
        self.0.to_edge_list()
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.0.vertex_count()
    }

    #[getter]
    fn edges(&self) -> Vec<(u32, u32, f32)> {
        from_edges(self.0.edges())
    }

    #[getter]
    fn background(&self) -> Vec<bool> {
        self.0.background().to_vec()
    }

    fn apply_tmin(&self, t_min: f32) -> Self {
        PyGraph(self.0.apply_tmin(t_min))
    }

    fn apply_tmax(&self, t_max: f32) -> Self {
        PyGraph(self.0.apply_tmax(t_max))
    }

    #[pyo3(signature = (tmin=None, tmax=None))]
    fn preprocess(&self, tmin: Option<f32>, tmax: Option<f32>) -> PyResult<Self> {
        let p = PreprocessParams::new(tmin, tmax).map_err(err)?;
        Ok(PyGraph(p.apply(&self.0)))
    }

    fn __len__(&self) -> usize {
        self.0.edges().len()
    }

    fn __repr__(&self) -> String {
        format!(
            "DisaffinityGraph(vertices={}, edges={})",
            self.0.vertex_count(),
            self.0.edges().len()
        )
    }
}

/// Basins as vertices, weighted by saliency. Basin `b` is label `b + 1`.
#[pyclass(
    name = "BasinGraph",
    module = "pybasinseg",
    frozen,
    skip_from_py_object
)]
struct PyBasinGraph(basinseg::BasinGraph);

#[pymethods]
impl PyBasinGraph {
    #[new]
    fn new(sizes: Vec<u64>, edges: Vec<(u32, u32, f32)>) -> PyResult<Self> {
        basinseg::BasinGraph::new(sizes, to_edges(edges))
            .map(PyBasinGraph)
            .map_err(err)
    }

    /// Basin graph of `graph` under the basin labelling `labels` (0 is
    /// background).
    #[staticmethod]
    fn build(graph: &PyGraph, labels: Vec<u32>) -> PyResult<Self> {
        let seg = basinseg::Segmentation::from_labels(labels).map_err(err)?;
        basinseg::build_basin_graph(&graph.0, &seg)
            .map(PyBasinGraph)
            .map_err(err)
    }

    #[getter]
    fn basin_count(&self) -> usize {
        self.0.basin_count()
    }

    #[getter]
    fn sizes(&self) -> Vec<u64> {
        self.0.sizes().to_vec()
    }

    #[getter]
    fn edges(&self) -> Vec<(u32, u32, f32)> {
        from_edges(self.0.edges())
    }

    fn saliency(&self, a: u32, b: u32) -> Option<f32> {
        self.0.saliency(a, b)
    }

    /// Basin clusters after merging every edge with saliency below `t`.
    fn merge_below(&self, t: f32) -> Vec<u32> {
        basinseg::merge_below(&self.0, t)
    }

    fn __repr__(&self) -> String {
        format!(
            "BasinGraph(basins={}, edges={})",
            self.0.basin_count(),
            self.0.edges().len()
        )
    }
}

/// Ordered merge log over basins.
#[pyclass(
    name = "Dendrogram",
    module = "pybasinseg",
    frozen,
    skip_from_py_object
)]
struct PyDendrogram(basinseg::Dendrogram);

#[pymethods]
impl PyDendrogram {
    #[getter]
    fn basin_count(&self) -> usize {
        self.0.basin_count()
    }

    /// `(a, b, saliency, size)` per merge; `a` and `b` are the smallest
    /// member basins of the merged clusters.
    #[getter]
    fn merges(&self) -> Vec<(u32, u32, f32, u64)> {
        self.0
            .merges()
            .iter()
            .map(|m| (m.a, m.b, m.saliency, m.size))
            .collect()
    }

    /// Cluster label per basin at `cut`.
    fn flat_cut(&self, cut: &Bound<'_, PyAny>) -> PyResult<Vec<u32>> {
        self.0.flat_cut(extract_cut(cut)?).map_err(err)
    }

    fn final_partition(&self) -> Vec<u32> {
        self.0.final_partition()
    }

    fn __len__(&self) -> usize {
        self.0.merges().len()
    }
}

/// Watershed basin labels; 0 marks background.
#[pyfunction]
#[pyo3(signature = (graph, tmin=None, tmax=None))]
fn watershed(graph: &PyGraph, tmin: Option<f32>, tmax: Option<f32>) -> PyResult<Vec<u32>> {
    let p = PreprocessParams::new(tmin, tmax).map_err(err)?;
    Ok(basinseg::watershed(&graph.0, &p).into_labels())
}

/// Size-dependent single linkage clustering of a basin graph.
#[pyfunction]
#[pyo3(signature = (basin_graph, function="linear:3000", form="omega", size="voxels", mst=false))]
fn cluster(
    basin_graph: &PyBasinGraph,
    function: &str,
    form: &str,
    size: &str,
    mst: bool,
) -> PyResult<PyDendrogram> {
    let tf = threshold(function, form)?;
    let size: SizeMeasure = parse(size)?;
    let d = if mst {
        agglomeration::cluster_mst(&basin_graph.0, &tf, size)
    } else {
        agglomeration::cluster_with(&basin_graph.0, &tf, size)
    };
    Ok(PyDendrogram(d))
}

/// Watershed followed by clustering; returns voxel labels.
#[pyfunction]
#[pyo3(signature = (graph, tmin=None, tmax=None, function="linear:3000", form="omega", size="voxels", cut=None))]
fn segment(
    graph: &PyGraph,
    tmin: Option<f32>,
    tmax: Option<f32>,
    function: &str,
    form: &str,
    size: &str,
    cut: Option<&Bound<'_, PyAny>>,
) -> PyResult<Vec<u32>> {
    let p = PreprocessParams::new(tmin, tmax).map_err(err)?;
    let tf = threshold(function, form)?;
    let cut = cut.map(extract_cut).transpose()?;
    let out = basinseg::pipeline::segment(&graph.0, &p, &tf, parse(size)?, cut).map_err(err)?;
    Ok(out.segmentation.into_labels())
}

/// Felzenszwalb-Huttenlocher clustering with scale `k`.
#[pyfunction]
#[pyo3(signature = (vertex_count, edges, k, sizes=None))]
fn fh_cluster(
    vertex_count: usize,
    edges: Vec<(u32, u32, f32)>,
    k: f64,
    sizes: Option<Vec<u64>>,
) -> PyResult<Vec<u32>> {
    basinseg::fh_cluster(vertex_count, &to_edges(edges), k, sizes.as_deref()).map_err(err)
}

/// `(v_split, v_merge, n)` over ground-truth foreground voxels.
#[pyfunction]
#[pyo3(signature = (proposed, ground_truth, unlabeled="singleton"))]
fn split_merge_scores(
    proposed: Vec<u32>,
    ground_truth: Vec<u32>,
    unlabeled: &str,
) -> PyResult<(f64, f64, u64)> {
    let u: Unlabeled = parse(unlabeled)?;
    let (s, n) = metrics::score(&proposed, &ground_truth, u).map_err(err)?;
    Ok((s.v_split, s.v_merge, n))
}

/// Seeded synthetic volume; returns the flat `(3, Z, Y, X)` affinities and
/// the ground-truth labels.
#[pyfunction]
#[pyo3(signature = (shape, blobs, seed, swap_prob=0.0))]
fn synth(
    shape: (usize, usize, usize),
    blobs: usize,
    seed: u64,
    swap_prob: f64,
) -> PyResult<(Vec<f32>, Vec<u32>)> {
    let spec = SynthSpec {
        swap_prob,
        ..SynthSpec::new([shape.0, shape.1, shape.2], blobs, seed)
    };
    let v = synthesize(&spec).map_err(err)?;
    Ok((v.affinity.data().to_vec(), v.ground_truth))
}

#[pymodule]
fn pybasinseg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyBasinGraph>()?;
    m.add_class::<PyDendrogram>()?;
    m.add_function(wrap_pyfunction!(watershed, m)?)?;
    m.add_function(wrap_pyfunction!(cluster, m)?)?;
    m.add_function(wrap_pyfunction!(segment, m)?)?;
    m.add_function(wrap_pyfunction!(fh_cluster, m)?)?;
    m.add_function(wrap_pyfunction!(split_merge_scores, m)?)?;
    m.add_function(wrap_pyfunction!(synth, m)?)?;
    Ok(())
}
