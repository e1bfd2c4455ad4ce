use thiserror::Error;

/// Errors raised by model construction and the invariant computations.
#[derive(Debug, Error)]
pub enum GermError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("arcs are disconnected in the mesh at rung t = {rung}")]
    Disconnected { rung: f64 },

    #[error("not a map onto target: image of sheet {sheet:?} is {distance:e} away at t = {t}")]
    NotOnTarget { sheet: String, t: f64, distance: f64 },

    #[error("no generic projection found after {attempts} attempts")]
    NoGenericProjection { attempts: usize },

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("construction failed: {0}")]
    Construction(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = GermError> = std::result::Result<T, E>;
