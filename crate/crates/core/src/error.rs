use thiserror::Error;

/// Errors raised by the solvers and the finite-volume oracle.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("coupling must be nonzero")]
    InvalidCoupling,

    #[error("{op}: energy {z} lies inside the continuum [{lo}, {hi}]")]
    Domain {
        op: &'static str,
        z: f64,
        lo: f64,
        hi: f64,
    },

    #[error("{op}: energy {z} is not on the bound-state side (determinant {delta} at p = {node:?})")]
    InvalidEnergy {
        op: &'static str,
        z: f64,
        node: Vec<f64>,
        delta: f64,
    },

    #[error("{op}: non-finite integrand value {value} at node {node:?}")]
    NonFinite {
        op: &'static str,
        node: Vec<f64>,
        value: f64,
    },

    #[error("{op}: failed to bracket a root ({detail})")]
    Bracket { op: &'static str, detail: String },

    #[error(
        "unresolved three-body bound state: largest Birman-Schwinger eigenvalue {lambda_near} < 1 \
         at distance {delta} from the threshold {threshold} (n = {n})"
    )]
    UnresolvedBoundState {
        lambda_near: f64,
        delta: f64,
        threshold: f64,
        n: usize,
    },

    #[error("quasimomentum {point:?} is not on the {l}-point grid")]
    OffGrid { point: Vec<f64>, l: usize },

    #[error("matrix dimension {dim} exceeds the dense diagonalization budget {budget}")]
    SizeBudget { dim: usize, budget: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Bracket { .. } | Error::UnresolvedBoundState { .. } | Error::NonFinite { .. } => {
                3
            }
            Error::Invariant(_) => 1,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
