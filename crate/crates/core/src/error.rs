use num_complex::Complex64;
use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {re}+{im}i lies outside the open unit disc")]
    OutsideDisc { re: f64, im: f64 },

    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },

    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },

    #[error("non-integer exponent at byte {offset}")]
    NonIntegerExponent { offset: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("non-finite value at z = {z}")]
    NonFinite { z: Complex64 },

    #[error("function is not analytic on the probe circle: {0}")]
    NonAnalytic(String),

    #[error("quadrature did not converge after {subdivisions} subdivisions (error estimate {estimate:e})")]
    QuadratureNonConvergence { subdivisions: usize, estimate: f64 },

    #[error("step size underflow; integration reached z = {reached}")]
    StepUnderflow { reached: Complex64 },

    #[error("solution blew up (|g'| > {guard:e}); last good point z = {reached}")]
    BlowUp { reached: Complex64, guard: f64 },

    #[error("contour passes through a zero after {attempts} perturbations")]
    ContourThroughZero { attempts: usize },

    #[error("zero count mismatch: winding number {winding}, located {located}")]
    CountMismatch { winding: usize, located: usize },

    #[error("multiple zero near {z} (multiplicity {multiplicity})")]
    MultipleZero { z: Complex64, multiplicity: usize },

    #[error("f/B vanishes near {z}: a zero was missed")]
    MissedZero { z: Complex64 },

    #[error("interpolation residual {residual:e} at zero {z} exceeds {tol:e}: quotient has a pole")]
    GenuinePole { z: Complex64, residual: f64, tol: f64 },

    #[error("derivative of w vanishes at {z}")]
    CriticalPoint { z: Complex64 },

    #[error("coefficient C vanishes at {z} and no direct (A, B) form was supplied")]
    CoefficientVanishes { z: Complex64 },

    #[error("empty grid: {0}")]
    EmptyGrid(String),
}

pub type Result<T> = std::result::Result<T, Error>;
