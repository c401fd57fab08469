use thiserror::Error;

/// Errors raised anywhere in the meshing / assembly / solve pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("degenerate element: {0}")]
    DegenerateElement(String),
    #[error("fan triangulation failed: {0}")]
    TriangulationFailure(String),
    #[error("no seed points left inside the region")]
    EmptySeedSet,
    #[error("meshing failed for seed {seed}: {reason}")]
    MeshingFailure { seed: usize, reason: String },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("constitutive matrix is singular: {0}")]
    ConstitutiveSingularity(String),
    #[error("invalid material: {0}")]
    InvalidMaterial(String),
    #[error("constraint '{name}' matches nothing on the mesh boundary ({geometry})")]
    UnmatchedConstraint { name: String, geometry: String },
    #[error("conflicting prescriptions on dof {dof}: {first} vs {second}")]
    ConstraintConflict { dof: usize, first: f64, second: f64 },
    #[error("linear solve failed (estimated null-space dimension {null_space_estimate}): {reason}")]
    SolveFailure {
        null_space_estimate: usize,
        reason: String,
    },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionError { expected: usize, got: usize },
    #[error("norm undefined: {0}")]
    NormUndefined(String),
    #[error("element {element}: {source}")]
    Element {
        element: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: index {index} out of range (have {len})")]
    IndexError { line: usize, index: usize, len: usize },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DegenerateElement(_) => "degenerate-element",
            Error::TriangulationFailure(_) => "triangulation-failure",
            Error::EmptySeedSet => "empty-seed-set",
            Error::MeshingFailure { .. } => "meshing-failure",
            Error::Unsupported(_) => "unsupported",
            Error::ConstitutiveSingularity(_) => "constitutive-singularity",
            Error::InvalidMaterial(_) => "invalid-material",
            Error::UnmatchedConstraint { .. } => "unmatched-constraint",
            Error::ConstraintConflict { .. } => "constraint-conflict",
            Error::SolveFailure { .. } => "solve-failure",
            Error::DimensionError { .. } => "dimension-error",
            Error::NormUndefined(_) => "norm-undefined",
            Error::Element { source, .. } => source.kind(),
            Error::Syntax { .. } => "syntax",
            Error::IndexError { .. } => "index-error",
            Error::InvalidInput(_) => "invalid-input",
            Error::Io(_) => "io",
        }
    }

    pub(crate) fn in_element(self, element: usize) -> Error {
        match self {
            e @ Error::Element { .. } => e,
            e => Error::Element {
                element,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
