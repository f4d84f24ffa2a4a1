use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("degenerate tetrahedron: volume {volume:e} below threshold {threshold:e}")]
    DegenerateTet { volume: f64, threshold: f64 },

    #[error("singular degree-of-freedom matrix (pivot {pivot:e})")]
    SingularDofMatrix { pivot: f64 },

    #[error("non-conforming mesh: face {face:?} has {owners} owners")]
    NonConformingMesh { face: [usize; 3], owners: usize },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("solver breakdown: {0}")]
    SolverBreakdown(String),

    #[error("tolerance not reached: relative residual {residual:e} > {tol:e}")]
    ToleranceNotReached { residual: f64, tol: f64 },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
