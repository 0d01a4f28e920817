use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("volume shape {0:?} has an empty axis")]
    EmptyVolume([usize; 3]),

    #[error("volume data has {got} values, shape needs {expected}")]
    VolumeLength { expected: usize, got: usize },

    #[error("disaffinity {value} at (axis {axis}, z {z}, y {y}, x {x}) is outside [0, 1]")]
    DisaffinityOutOfRange {
        axis: usize,
        z: usize,
        y: usize,
        x: usize,
        value: f32,
    },

    #[error("graph has no vertices")]
    EmptyGraph,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("edge ({0}, {1}) appears more than once")]
    DuplicateEdge(u32, u32),

    #[error("self-loop on vertex {0}")]
    SelfLoop(u32),

    #[error("edge ({u}, {v}) has invalid weight {w}")]
    InvalidWeight { u: u32, v: u32, w: f32 },

    #[error("vertex {id} out of range for a graph with {count} vertices")]
    VertexOutOfRange { id: u32, count: usize },

    #[error("invalid threshold: {0}")]
    InvalidThreshold(String),

    #[error("oracle is limited to {max} vertices, graph has {got}")]
    GraphTooLarge { max: usize, got: usize },

    #[error("label {label} exceeds basin count {basin_count}")]
    LabelOutOfRange { label: u32, basin_count: u32 },

    #[error("domain mismatch: {left} vs {right} elements")]
    DomainMismatch { left: usize, right: usize },

    #[error("contingency table is empty (no scorable foreground voxels)")]
    EmptyContingency,

    #[error("cut level {level} exceeds the {merges} recorded merges")]
    LevelOutOfRange { level: usize, merges: usize },

    #[error("threshold function argument {0} is outside its domain")]
    ThresholdDomain(f64),

    #[error("invalid synthetic volume spec: {0}")]
    InvalidSynth(String),

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
