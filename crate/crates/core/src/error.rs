use crate::numerics::QuadResult;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("quadrature budget exhausted after {intervals} intervals (best {best:?})")]
    BudgetExhausted { intervals: usize, best: QuadResult },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("pole of the gamma function at {0}")]
    Pole(String),
    #[error("range error: {0}")]
    Range(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("malformed contour: {0}")]
    MalformedContour(String),
    #[error("decay diagnostic: {0}")]
    Decay(String),
    #[error("bessel method failure: {0}")]
    MethodFailure(String),
    #[error("winding number inconclusive: defect {defect:.3e} (value {value:.6})")]
    Inconclusive { value: f64, defect: f64 },
    #[error("zero on or near the contour: |F| = {modulus:.3e} at {at}")]
    OnContourZero { modulus: f64, at: String },
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("spectral parameter too close to the spectrum: {0}")]
    NearSpectrum(String),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("grid error: {0}")]
    Grid(String),
    #[error("unsafe contour: {0}")]
    Safety(String),
}
