//! Initial value problems in the disc: f″ + A f = 0 and the Riccati equation
//! g″ = A + B g′ + C (g′)², with zero localization by the argument principle.

pub mod field;
pub mod riccati;
pub mod rk;
pub mod zeros;

pub use field::{
    continue_to, maclaurin_solve, residual_check, waypoint_radius, ContinuedValue, OdeProblem,
    SolutionField, SolverConfig,
};
pub use zeros::{find_zeros, locate_zeros, ZeroReport};
pub use riccati::{
    riccati_residual, riccati_solve, DirectCoefficients, RiccatiProblem, TransformedCoefficients,
    TransformedField, BLOW_UP_GUARD,
};
