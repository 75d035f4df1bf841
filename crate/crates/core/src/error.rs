use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("mesh file line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("mesh generation failed: {0}")]
    Generation(String),

    #[error("cell is not star-shaped with respect to its centroid or any kernel point")]
    NotStarShaped,

    #[error("newton iteration did not converge for {0}")]
    NoConvergence(&'static str),

    #[error("singular system in {0}")]
    Singular(&'static str),

    #[error("gram-schmidt pivot {index} collapsed to {value:.3e}")]
    GramSchmidtPivot { index: usize, value: f64 },

    #[error("edge dof mismatch between cells on edge {edge}: {distance:.3e}")]
    OrientationMismatch { edge: usize, distance: f64 },

    #[error("cholesky factorization broke down: {0}")]
    Factorization(String),

    #[error("system too large for dense condition number: {size} > {cap} free dofs, use a smaller mesh")]
    TooLarge { size: usize, cap: usize },
}
