//! Particle simulation of controlled mean-field jump diffusions.
//!
//! The state equation is stepped with explicit Euler–Maruyama over `N`
//! particles. Jumps enter compensated, so the scheme adds
//! `Σ_{events} γ(ζ) − Δt Σ_j rate_j γ(ζ_j)` on every step. Noise is drawn once
//! per particle from a counter-based stream and kept, so control variants
//! can be compared on common random numbers.

mod derivative;
mod model;
mod noise;
mod performance;
mod simulate;

pub use derivative::{l2_derivative_error, simulate_derivative_process, DerivativePaths};
pub use model::{
    central_difference, Coefficient, ControlPair, ControlledModel, Direction, DirectionValues,
    Dynamics, FnDynamics, InfoPattern, MeasureControl, Observation, Player, Point, ScalarControl,
    Var, FD_STEP,
};
pub use noise::{JumpEvent, NoiseBundle, TimeGrid};
pub use performance::{
    evaluate_performance, performance_samples, CostPoint, Estimate, FnPerformance, Negated,
    Performance, TerminalPoint,
};
pub use simulate::{mean_and_se, replay, simulate, simulate_with_noise, MuMode, ParticleBundle};
