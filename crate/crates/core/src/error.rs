use thiserror::Error;

/// Errors raised by the laminate, mesh, solver and optimizer layers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid material: {0}")]
    InvalidMaterial(String),

    #[error("invalid layup: {0}")]
    InvalidLayup(String),

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh parse error at line {line}: {msg}")]
    MeshParse { line: usize, msg: String },

    #[error("singular geometry: {0}")]
    SingularGeometry(String),

    #[error("singular stiffness: {0}")]
    SingularSystem(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("undefined slope: {0}")]
    UndefinedSlope(String),

    #[error("invalid optimizer setting: {0}")]
    InvalidOptimizer(String),

    #[error("unloaded-shape iteration did not converge after {iterations} iterations")]
    Divergence {
        iterations: usize,
        trace: crate::unloaded::IterationTrace,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for failures of the numerical procedure itself (as opposed to bad input).
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::SingularGeometry(_) | Error::SingularSystem(_) | Error::UndefinedSlope(_) | Error::Divergence { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
