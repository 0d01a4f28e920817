//! Disaffinity graphs, affinity volumes and threshold preprocessing.
//!
//! Vertex ids double as the vertex ordering used by every tie-break in the
//! crate. Volume voxels are numbered in row-major (z, y, x) order.

use std::collections::HashSet;

use crate::error::{Error, Result};

/// Undirected weighted edge. Also used for basin-graph edges, where the
/// endpoints are basin ids and the weight is a saliency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: u32,
    pub v: u32,
    pub w: f32,
}

impl Edge {
    pub fn new(u: u32, v: u32, w: f32) -> Self {
        Edge { u, v, w }
    }

    #[inline]
    pub fn other(&self, x: u32) -> u32 {
        if x == self.u {
            self.v
        } else {
            self.u
        }
    }

    /// Endpoints with the smaller id first.
    #[inline]
    pub fn ordered(&self) -> (u32, u32) {
        if self.u < self.v {
            (self.u, self.v)
        } else {
            (self.v, self.u)
        }
    }
}

/// Nearest-neighbour disaffinities of a 3D grid.
///
/// `data` holds three channels (x, y, z) in C order with shape
/// `(3, Z, Y, X)`. Entry `(axis, z, y, x)` is the disaffinity between voxel
/// `(z, y, x)` and its positive neighbour along `axis`. Entries whose
/// neighbour falls outside the grid are ignored.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityVolume {
    shape: [usize; 3],
    data: Vec<f32>,
}

pub const AXIS_X: usize = 0;
pub const AXIS_Y: usize = 1;
pub const AXIS_Z: usize = 2;

impl AffinityVolume {
    pub fn new(shape: [usize; 3], data: Vec<f32>) -> Result<Self> {
        if shape.contains(&0) {
            return Err(Error::EmptyVolume(shape));
        }
        let expected = 3 * shape.iter().product::<usize>();
        if data.len() != expected {
            return Err(Error::VolumeLength {
                expected,
                got: data.len(),
            });
        }
        let vol = AffinityVolume { shape, data };
        for (axis, z, y, x) in vol.in_range_entries() {
            let value = vol.get(axis, z, y, x);
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::DisaffinityOutOfRange {
                    axis,
                    z,
                    y,
                    x,
                    value,
                });
            }
        }
        Ok(vol)
    }

    /// `(Z, Y, X)`.
    pub fn shape(&self) -> [usize; 3] {
        self.shape
    }

    pub fn voxel_count(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    #[inline]
    fn offset(&self, axis: usize, z: usize, y: usize, x: usize) -> usize {
        let [zs, ys, xs] = self.shape;
        ((axis * zs + z) * ys + y) * xs + x
    }

    #[inline]
    pub fn get(&self, axis: usize, z: usize, y: usize, x: usize) -> f32 {
        self.data[self.offset(axis, z, y, x)]
    }

    fn has_neighbor(&self, axis: usize, z: usize, y: usize, x: usize) -> bool {
        let [zs, ys, xs] = self.shape;
        match axis {
            AXIS_X => x + 1 < xs,
            AXIS_Y => y + 1 < ys,
            _ => z + 1 < zs,
        }
    }

    fn in_range_entries(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        let [zs, ys, xs] = self.shape;
        (0..3).flat_map(move |axis| {
            (0..zs).flat_map(move |z| {
                (0..ys).flat_map(move |y| {
                    (0..xs)
                        .filter(move |&x| self.has_neighbor(axis, z, y, x))
                        .map(move |x| (axis, z, y, x))
                })
            })
        })
    }

    /// Number of in-range neighbour pairs: `3ZYX - (YX + ZX + ZY)`.
    pub fn edge_count(&self) -> usize {
        let [z, y, x] = self.shape;
        3 * z * y * x - (y * x + z * x + z * y)
    }
}

/// Undirected disaffinity graph.
///
/// Vertices flagged as background lost all their edges to upper-threshold
/// erasure; the watershed leaves them unlabeled.
#[derive(Debug, Clone, PartialEq)]
pub struct DisaffinityGraph {
    vertex_count: usize,
    edges: Vec<Edge>,
    background: Vec<bool>,
}

impl DisaffinityGraph {
    /// Builds a graph, rejecting self-loops, duplicate undirected edges,
    /// out-of-range endpoints and negative or non-finite weights.
    pub fn new(vertex_count: usize, edges: Vec<Edge>) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::EmptyGraph);
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            for id in [e.u, e.v] {
                if id as usize >= vertex_count {
                    return Err(Error::VertexOutOfRange {
                        id,
                        count: vertex_count,
                    });
                }
            }
            if e.u == e.v {
                return Err(Error::SelfLoop(e.u));
            }
            if !e.w.is_finite() || e.w < 0.0 {
                return Err(Error::InvalidWeight {
                    u: e.u,
                    v: e.v,
                    w: e.w,
                });
            }
            if !seen.insert(e.ordered()) {
                return Err(Error::DuplicateEdge(e.u, e.v));
            }
        }
        Ok(DisaffinityGraph {
            vertex_count,
            edges,
            background: vec![false; vertex_count],
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn is_background(&self, v: u32) -> bool {
        self.background[v as usize]
    }

    pub fn background(&self) -> &[bool] {
        &self.background
    }

    /// Replaces every weight strictly below `t_min` with 0.
    pub fn apply_tmin(&self, t_min: f32) -> Self {
        let mut out = self.clone();
        for e in &mut out.edges {
            if e.w < t_min {
                e.w = 0.0;
            }
        }
        out
    }

    /// Erases every edge with weight strictly above `t_max`. Vertices that
    /// had edges and lose all of them are flagged as background.
    pub fn apply_tmax(&self, t_max: f32) -> Self {
        let n = self.vertex_count;
        let mut before = vec![false; n];
        let mut after = vec![false; n];
        let mut edges = Vec::with_capacity(self.edges.len());
        for e in &self.edges {
            before[e.u as usize] = true;
            before[e.v as usize] = true;
            if e.w <= t_max {
                after[e.u as usize] = true;
                after[e.v as usize] = true;
                edges.push(*e);
            }
        }
        let background = (0..n)
            .map(|i| self.background[i] || (before[i] && !after[i]))
            .collect();
        DisaffinityGraph {
            vertex_count: n,
            edges,
            background,
        }
    }

    /// Nearest-neighbour graph of a volume, one edge per in-range voxel pair.
    pub fn from_volume(vol: &AffinityVolume) -> Self {
        let [zs, ys, xs] = vol.shape();
        let mut edges = Vec::with_capacity(vol.edge_count());
        let strides = [1usize, xs, xs * ys];
        for z in 0..zs {
            for y in 0..ys {
                for x in 0..xs {
                    let i = (z * ys + y) * xs + x;
                    for (axis, stride) in strides.iter().enumerate() {
                        if vol.has_neighbor(axis, z, y, x) {
                            edges.push(Edge::new(
                                i as u32,
                                (i + stride) as u32,
                                vol.get(axis, z, y, x),
                            ));
                        }
                    }
                }
            }
        }
        DisaffinityGraph {
            vertex_count: vol.voxel_count(),
            edges,
            background: vec![false; vol.voxel_count()],
        }
    }

    /// Parses `u v w` lines. `#` starts a comment; blank lines are skipped.
    pub fn parse_edge_list(text: &str) -> Result<Self> {
        let mut edges = Vec::new();
        let mut max_id: Option<u32> = None;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let fields: Vec<&str> = content.split_whitespace().collect();
            if fields.len() != 3 {
                return Err(Error::Parse {
                    line,
                    msg: format!("expected `u v w`, got {} fields", fields.len()),
                });
            }
            let id = |s: &str| {
                s.parse::<u32>().map_err(|_| Error::Parse {
                    line,
                    msg: format!("invalid vertex id `{s}`"),
                })
            };
            let u = id(fields[0])?;
            let v = id(fields[1])?;
            let w = fields[2].parse::<f32>().map_err(|_| Error::Parse {
                line,
                msg: format!("invalid weight `{}`", fields[2]),
            })?;
            max_id = Some(max_id.unwrap_or(0).max(u).max(v));
            edges.push(Edge::new(u, v, w));
        }
        let n = max_id.map_or(0, |m| m as usize + 1);
        DisaffinityGraph::new(n, edges)
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = String::with_capacity(self.edges.len() * 16);
        for e in &self.edges {
            out.push_str(&format!("{} {} {}\n", e.u, e.v, e.w));
        }
        out
    }
}

/// Lower and upper disaffinity thresholds applied before the watershed.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PreprocessParams {
    t_min: Option<f32>,
    t_max: Option<f32>,
}

impl PreprocessParams {
    pub fn new(t_min: Option<f32>, t_max: Option<f32>) -> Result<Self> {
        for t in [t_min, t_max].into_iter().flatten() {
            if !t.is_finite() || t < 0.0 {
                return Err(Error::InvalidThreshold(format!(
                    "{t} must be finite and non-negative"
                )));
            }
        }
        if let (Some(lo), Some(hi)) = (t_min, t_max) {
            if lo > hi {
                return Err(Error::InvalidThreshold(format!(
                    "t_min {lo} exceeds t_max {hi}"
                )));
            }
        }
        Ok(PreprocessParams { t_min, t_max })
    }

    pub fn none() -> Self {
        Self::default()
    }

    pub fn t_min(&self) -> Option<f32> {
        self.t_min
    }

    pub fn t_max(&self) -> Option<f32> {
        self.t_max
    }

    /// Upper threshold first, then lower. The two commute when
    /// `t_min <= t_max`.
    pub fn apply(&self, g: &DisaffinityGraph) -> DisaffinityGraph {
        let g = match self.t_max {
            Some(t) => g.apply_tmax(t),
            None => g.clone(),
        };
        match self.t_min {
            Some(t) => g.apply_tmin(t),
            None => g,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(weights: &[f32]) -> DisaffinityGraph {
        let edges = weights
            .iter()
            .enumerate()
            .map(|(i, &w)| Edge::new(i as u32, i as u32 + 1, w))
            .collect();
        DisaffinityGraph::new(weights.len() + 1, edges).unwrap()
    }

    #[test]
    fn smallest_volume() {
        let vol = AffinityVolume::new([1, 1, 2], vec![0.4, 1.0, 1.0, 1.0, 1.0, 1.0]).unwrap();
        let g = DisaffinityGraph::from_volume(&vol);
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edges(), &[Edge::new(0, 1, 0.4)]);
    }

    #[test]
    fn volume_edge_counts() {
        let vol = AffinityVolume::new([1, 2, 2], vec![0.5; 12]).unwrap();
        let g = DisaffinityGraph::from_volume(&vol);
        assert_eq!(g.vertex_count(), 4);
        assert_eq!(g.edges().len(), 4);
        let pairs: Vec<_> = g.edges().iter().map(|e| (e.u, e.v)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 3), (2, 3)]);

        // 2x2x2 by hand: 4 x-pairs, 4 y-pairs, 4 z-pairs.
        let vol = AffinityVolume::new([2, 2, 2], vec![0.5; 24]).unwrap();
        let g = DisaffinityGraph::from_volume(&vol);
        assert_eq!(g.vertex_count(), 8);
        assert_eq!(g.edges().len(), 12);
        assert_eq!(vol.edge_count(), 12);
    }

    #[test]
    fn out_of_range_entries_are_ignored() {
        let mut data = vec![0.2; 6];
        data[1] = f32::NAN; // x-channel of the last voxel has no neighbour
        let vol = AffinityVolume::new([1, 1, 2], data).unwrap();
        assert_eq!(DisaffinityGraph::from_volume(&vol).edges().len(), 1);

        let mut data = vec![0.2; 6];
        data[0] = 1.5;
        assert!(matches!(
            AffinityVolume::new([1, 1, 2], data),
            Err(Error::DisaffinityOutOfRange { .. })
        ));
    }

    #[test]
    fn empty_volume_rejected() {
        assert!(matches!(
            AffinityVolume::new([0, 2, 2], vec![]),
            Err(Error::EmptyVolume(_))
        ));
    }

    #[test]
    fn tmin_zeroes_low_weights() {
        let g = chain(&[0.005, 0.5]);
        let t = g.apply_tmin(0.01);
        assert_eq!(t.edges(), &[Edge::new(0, 1, 0.0), Edge::new(1, 2, 0.5)]);
        assert_eq!(g.apply_tmin(0.0), g);
    }

    #[test]
    fn tmax_erases_and_flags_background() {
        let g = chain(&[0.95, 0.5]);
        let t = g.apply_tmax(0.9);
        assert_eq!(t.edges(), &[Edge::new(1, 2, 0.5)]);
        assert!(t.is_background(0));
        assert!(!t.is_background(1));
        assert_eq!(g.apply_tmax(1.0), g);

        let exact = chain(&[0.9]).apply_tmax(0.9);
        assert_eq!(exact.edges().len(), 1);
    }

    #[test]
    fn isolated_input_vertex_is_not_background() {
        let g = DisaffinityGraph::new(3, vec![Edge::new(0, 1, 0.2)]).unwrap();
        assert!(!g.apply_tmax(0.1).is_background(2));
        assert!(g.apply_tmax(0.1).is_background(0));
    }

    #[test]
    fn parse_edge_lists() {
        let g = DisaffinityGraph::parse_edge_list("0 1 0.5").unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert_eq!(g.edges().len(), 1);

        let g = DisaffinityGraph::parse_edge_list("# header\n\n0 2 0.5 # trailing\n").unwrap();
        assert_eq!(g.vertex_count(), 3);

        assert!(matches!(
            DisaffinityGraph::parse_edge_list("0 1 0.5\n1 0 0.3"),
            Err(Error::DuplicateEdge(1, 0))
        ));
        assert!(matches!(
            DisaffinityGraph::parse_edge_list("0 1 -1"),
            Err(Error::InvalidWeight { .. })
        ));
        assert!(matches!(
            DisaffinityGraph::parse_edge_list("3 3 0.1"),
            Err(Error::SelfLoop(3))
        ));
        assert!(matches!(
            DisaffinityGraph::parse_edge_list("0 1"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            DisaffinityGraph::parse_edge_list("0 x 0.1"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            DisaffinityGraph::parse_edge_list("# nothing"),
            Err(Error::EmptyGraph)
        ));
    }

    #[test]
    fn edge_list_round_trip() {
        let g = chain(&[0.1, 0.30000001, 1.0 / 3.0]);
        let back = DisaffinityGraph::parse_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn preprocess_validation() {
        assert!(PreprocessParams::new(Some(0.5), Some(0.1)).is_err());
        assert!(PreprocessParams::new(Some(-0.1), None).is_err());
        assert!(PreprocessParams::new(Some(0.01), Some(0.9)).is_ok());
    }
}
