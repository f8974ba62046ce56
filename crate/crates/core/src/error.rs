use thiserror::Error;

#[derive(Debug, Error)]
pub enum PegError {
    #[error("invalid curve: {0}")]
    InvalidCurve(String),
    #[error("unsupported derivative order {0} (expected 1 or 2)")]
    UnsupportedOrder(u32),
    #[error("ellipse axes must be positive, got a={a}, b={b}")]
    NonPositiveAxis { a: f64, b: f64 },
    #[error("curve is not embedded: |gamma({s}) - gamma({t})| = {distance:e}")]
    NotEmbedded { s: f64, t: f64, distance: f64 },
    #[error("invalid shape data: {0}")]
    InvalidData(String),
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("quadruple lies on the diagonal (min parameter gap {gap:e})")]
    DegenerateQuadruple { gap: f64 },
    #[error("residual {norm:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { norm: f64, tol: f64 },
    #[error("peg invariant violated: {0}")]
    PegInvariant(String),
    #[error("coincident vertices")]
    CoincidentVertices,
    #[error("intersection is not transverse (|det| = {det:e})")]
    NonTransverse { det: f64 },
    #[error("solution {0} carries no orientation sign")]
    UnsignedSolution(usize),
    #[error("orbit integrity failure: {0}")]
    OrbitIntegrity(String),
    #[error("intersection ledger does not balance: total {total}")]
    LedgerImbalance { total: i64 },
    #[error("parity assignment inconsistent within orbit {0}")]
    InconsistentParity(usize),
    #[error("euler characteristic {chi} differs from signed count {expected}")]
    EulerMismatch { chi: i64, expected: i64 },
    #[error("report contains degenerate solutions")]
    DegenerateReport,
    #[error("expected 2 transverse zeros near the diagonal, found {found}")]
    DiagonalCount { found: usize },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = PegError> = std::result::Result<T, E>;
