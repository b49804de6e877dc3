use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("entry ({row}, {col}) = {value} is outside the domain of the conversion: {reason}")]
    Domain {
        row: usize,
        col: usize,
        value: f64,
        reason: &'static str,
    },

    #[error("matrix is not symmetric: entry ({i}, {j}) = {a} but entry ({j}, {i}) = {b}")]
    Asymmetric { i: usize, j: usize, a: f64, b: f64 },

    #[error("invalid matrix: {0}")]
    Validation(String),

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("graph is disconnected: {components} connected components")]
    Disconnected { components: usize },

    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("node {node} has fewer than two finite neighbour distances")]
    TooFewNeighbours { node: usize },

    #[error("degenerate input: nodes {node} and {other} are at zero distance")]
    Degenerate { node: usize, other: usize },

    #[error("need at least {needed} nodes, got {got}")]
    TooSmall { needed: usize, got: usize },

    #[error("no usable ratio spread: every index in the averaging window has mu = 1")]
    NoRatioSpread,
}

pub type Result<T> = std::result::Result<T, Error>;
