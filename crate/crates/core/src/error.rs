use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be 1 or 2, got {0}")]
    InvalidDimension(usize),
    #[error("mu = {mu} must lie strictly inside (0, {upper}) for dimension {dimension}")]
    InvalidMu { mu: f64, upper: f64, dimension: usize },
    #[error("at least 16 points per axis are required, got {0}")]
    TooFewPoints(usize),
    #[error("half width must be positive, got {0}")]
    InvalidHalfWidth(f64),

    #[error("potential value {value} at node {index} violates the positive floor")]
    FloorViolated { index: usize, value: f64 },
    #[error("boundary potential {boundary} is below the central value {center}")]
    ConfinementSuspect { boundary: f64, center: f64 },
    #[error("table has {found} rows, grid has {expected} nodes")]
    TableLength { expected: usize, found: usize },

    #[error("grid mismatch: expected {expected} nodes, got {found}")]
    GridMismatch { expected: usize, found: usize },
    #[error("kernel is not symmetric (max defect {0:e})")]
    NotSymmetric(f64),
    #[error("zero vector has no Rayleigh quotient")]
    ZeroVector,

    #[error("eigensolver did not converge within {max_iters} iterations")]
    NoConvergence { max_iters: usize },
    #[error("eigensolve failed: {0}")]
    EigensolveFailed(String),

    #[error("lambda = {lambda} does not exceed the principal eigenvalue {threshold}")]
    LambdaBelowThreshold { lambda: f64, threshold: f64 },
    #[error("line search failed at iteration {iteration}")]
    LineSearchFailed { iteration: usize },
    #[error("no convergence after {iterations} iterations (gradient norm {grad_norm:e})")]
    MaxIters { iterations: usize, grad_norm: f64 },
    #[error("self-consistent iteration stalled at residual {residual:e} after {iterations} iterations")]
    ScfStagnation { residual: f64, iterations: usize },
    #[error("could not bracket the root: {0}")]
    BracketFailure(String),
    #[error("kappa must be positive, got {0}")]
    KappaNonpositive(f64),
    #[error("diagonal gap {gap:e} at node {index} is negative")]
    NegativeDiagonal { index: usize, gap: f64 },

    #[error("independent re-evaluation gives residual {recomputed:e}, solver reported {reported:e}")]
    VerificationMismatch { reported: f64, recomputed: f64 },

    #[error("config error: {0}")]
    Config(String),
    #[error("parse error in {context}: {message}")]
    Parse { context: String, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Machine-readable category used in CLI error reports.
    pub fn category(&self) -> &'static str {
        use Error::*;
        match self {
            InvalidDimension(_)
            | InvalidMu { .. }
            | TooFewPoints(_)
            | InvalidHalfWidth(_)
            | FloorViolated { .. }
            | ConfinementSuspect { .. }
            | TableLength { .. }
            | GridMismatch { .. }
            | NotSymmetric(_)
            | Config(_)
            | Parse { .. }
            | Io(_) => "config",
            LambdaBelowThreshold { .. } | KappaNonpositive(_) => "infeasible",
            ZeroVector
            | NoConvergence { .. }
            | EigensolveFailed(_)
            | LineSearchFailed { .. }
            | MaxIters { .. }
            | ScfStagnation { .. }
            | BracketFailure(_)
            | NegativeDiagonal { .. }
            | VerificationMismatch { .. } => "solver",
        }
    }

    /// Process exit code for the category: 2 config, 3 infeasible, 4 solver.
    pub fn exit_code(&self) -> i32 {
        match self.category() {
            "config" => 2,
            "infeasible" => 3,
            _ => 4,
        }
    }
}
