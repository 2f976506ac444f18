use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("nonpositive length {length} on edge '{edge}'")]
    NonpositiveLength { edge: String, length: f64 },

    #[error("negative potential {potential} on edge '{edge}'")]
    NegativePotential { edge: String, potential: f64 },

    #[error("nonpositive weight {weight} for edge '{edge}' at vertex '{vertex}'")]
    NonpositiveWeight {
        vertex: String,
        edge: String,
        weight: f64,
    },

    #[error("vertex '{vertex}' lists a weight for edge '{edge}', which is not incident to it")]
    UnknownWeightEdge { vertex: String, edge: String },

    #[error("graph has no edges")]
    EmptyGraph,

    #[error("graph is disconnected: vertex '{vertex}' is unreachable")]
    Disconnected { vertex: String },

    #[error("robin block at vertex '{vertex}' has {found} entries, expected {expected} (degree squared)")]
    RobinSize {
        vertex: String,
        expected: usize,
        found: usize,
    },

    #[error("robin block at vertex '{vertex}' is not symmetric")]
    RobinNotSymmetric { vertex: String },

    #[error("robin block at vertex '{vertex}' has positive off-diagonal entry {value} at ({row}, {col})")]
    RobinPositiveOffDiagonal {
        vertex: String,
        row: usize,
        col: usize,
        value: f64,
    },

    #[error("{edges} edges exceed the exhaustive subset enumeration cap of {cap}; use the snap tolerance path of the accumulation estimate instead")]
    SubsetCap { edges: usize, cap: usize },

    #[error("eigenvalue scan could not reconcile window [{lo}, {hi}]: counted {expected} eigenvalues, resolved {found}; decrease the scan step")]
    ScanBudget {
        lo: f64,
        hi: f64,
        expected: usize,
        found: usize,
    },

    #[error("numerical nullspace at lambda = {lambda} has dimension {nullity}, recorded multiplicity is {multiplicity}")]
    InconsistentNullspace {
        lambda: f64,
        nullity: usize,
        multiplicity: usize,
    },

    #[error("nullity {nullity} at lambda = {lambda} exceeds the degree sum {cap}")]
    MultiplicityCap {
        lambda: f64,
        nullity: usize,
        cap: usize,
    },

    #[error("need at least {needed} {what}, got {got}")]
    TooFew {
        what: &'static str,
        needed: usize,
        got: usize,
    },

    #[error("x = {x} lies outside the edge [0, {length}]")]
    OutOfRange { x: f64, length: f64 },

    #[error("function vanishes identically")]
    ZeroFunction,

    #[error("basis table row {row} is not in the eigenspace (relative residual {residual:e})")]
    TableRowNotInEigenspace { row: usize, residual: f64 },

    #[error("basis table rows {first} and {second} are not orthogonal (cosine {cosine:e})")]
    TableRowsNotOrthogonal {
        first: usize,
        second: usize,
        cosine: f64,
    },

    #[error("basis table: {0}")]
    TableShape(String),

    #[error("edge {edge} carries a two-dimensional profile space; per-edge table coefficients are ambiguous")]
    EdgeProfileAmbiguous { edge: usize },

    #[error("lambda = {lambda} is below the admissible threshold {threshold}")]
    BelowThreshold { lambda: f64, threshold: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
