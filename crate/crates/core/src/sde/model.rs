use std::sync::Arc;

use crate::error::{Error, Result};
use crate::lawproc::LevyMeasure;
use crate::measures::{DiscreteMeasure, MeasureFunctional};

/// Step used for central finite-difference partials.
pub const FD_STEP: f64 = 1e-5;

/// Arguments of the coefficients `b, σ, γ` at one particle and time.
/// `mu` holds the values of the model's measure functionals at the measure
/// argument.
#[derive(Debug, Clone, Copy)]
pub struct Point<'a> {
    pub t: f64,
    pub x: f64,
    pub mu: &'a [f64],
    pub u: f64,
    pub particle: usize,
}

/// Which coefficient of the dynamics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Coefficient {
    Drift,
    Diffusion,
    /// Jump coefficient at jump size `ζ`.
    Jump(f64),
}

/// Differentiation variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    State,
    Control,
    /// The `j`-th measure functional of the measure argument.
    Measure(usize),
}

/// Central difference of `f` in `var` around `p`.
pub fn central_difference(f: impl Fn(&Point) -> f64, var: Var, p: &Point) -> f64 {
    let h = FD_STEP;
    match var {
        Var::State => {
            let up = Point { x: p.x + h, ..*p };
            let dn = Point { x: p.x - h, ..*p };
            (f(&up) - f(&dn)) / (2.0 * h)
        }
        Var::Control => {
            let up = Point { u: p.u + h, ..*p };
            let dn = Point { u: p.u - h, ..*p };
            (f(&up) - f(&dn)) / (2.0 * h)
        }
        Var::Measure(j) => {
            let mut hi = p.mu.to_vec();
            let mut lo = p.mu.to_vec();
            hi[j] += h;
            lo[j] -= h;
            let up = Point { mu: &hi, ..*p };
            let dn = Point { mu: &lo, ..*p };
            (f(&up) - f(&dn)) / (2.0 * h)
        }
    }
}

/// Coefficients of the controlled state equation
/// `dX = b dt + σ dB + ∫ γ(ζ) Ñ(dt, dζ)`.
///
/// Partial derivatives default to central finite differences; models with
/// closed-form partials override [`Dynamics::partial`].
pub trait Dynamics: Send + Sync {
    fn drift(&self, p: &Point) -> f64;
    fn diffusion(&self, p: &Point) -> f64;
    fn jump(&self, p: &Point, zeta: f64) -> f64;

    fn coefficient(&self, c: Coefficient, p: &Point) -> f64 {
        match c {
            Coefficient::Drift => self.drift(p),
            Coefficient::Diffusion => self.diffusion(p),
            Coefficient::Jump(z) => self.jump(p, z),
        }
    }

    fn partial(&self, c: Coefficient, wrt: Var, p: &Point) -> f64 {
        central_difference(|q| self.coefficient(c, q), wrt, p)
    }
}

/// Model built from three closures.
pub struct FnDynamics<B, S, G> {
    pub drift: B,
    pub diffusion: S,
    pub jump: G,
}

impl<B, S, G> Dynamics for FnDynamics<B, S, G>
where
    B: Fn(&Point) -> f64 + Send + Sync,
    S: Fn(&Point) -> f64 + Send + Sync,
    G: Fn(&Point, f64) -> f64 + Send + Sync,
{
    fn drift(&self, p: &Point) -> f64 {
        (self.drift)(p)
    }

    fn diffusion(&self, p: &Point) -> f64 {
        (self.diffusion)(p)
    }

    fn jump(&self, p: &Point, zeta: f64) -> f64 {
        (self.jump)(p, zeta)
    }
}

/// A controlled mean-field jump diffusion on `[0, T]`.
#[derive(Clone)]
pub struct ControlledModel {
    pub dynamics: Arc<dyn Dynamics>,
    /// Functionals through which the coefficients read the measure argument.
    pub functionals: Vec<MeasureFunctional>,
    pub levy: LevyMeasure,
    pub x0: f64,
    pub horizon: f64,
    /// Declared Lipschitz constant in `x`; informational.
    pub lipschitz: f64,
}

impl ControlledModel {
    pub fn new(
        dynamics: Arc<dyn Dynamics>,
        functionals: Vec<MeasureFunctional>,
        levy: LevyMeasure,
        x0: f64,
        horizon: f64,
    ) -> Result<Self> {
        if !x0.is_finite() || !(horizon > 0.0 && horizon.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "model needs finite x0 and T > 0 (x0 = {x0}, T = {horizon})"
            )));
        }
        Ok(Self {
            dynamics,
            functionals,
            levy,
            x0,
            horizon,
            lipschitz: f64::INFINITY,
        })
    }

    pub fn with_lipschitz(mut self, constant: f64) -> Self {
        self.lipschitz = constant;
        self
    }

    pub fn n_functionals(&self) -> usize {
        self.functionals.len()
    }

    /// Functional coordinates of a measure.
    pub fn coordinates(&self, m: &DiscreteMeasure) -> Vec<f64> {
        self.functionals.iter().map(|f| f.eval(m)).collect()
    }
}

/// What a player observes when choosing its control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InfoPattern {
    /// Current state, noise and law.
    Full,
    /// State, noise and law as of `(t − δ)⁺`.
    Delay(f64),
}

impl InfoPattern {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Delay(d) if !(*d >= 0.0 && d.is_finite()) => Err(Error::InvalidInput(format!(
                "delay must be non-negative, got {d}"
            ))),
            _ => Ok(()),
        }
    }
}

/// Information available to a control at grid step `step`.
#[derive(Debug, Clone, Copy)]
pub struct Observation<'a> {
    pub step: usize,
    /// Current time `t_k`.
    pub t: f64,
    /// Grid step the information refers to, `(k − d)⁺`.
    pub observed_step: usize,
    pub observed_t: f64,
    pub state: f64,
    /// Brownian level `B(t_obs)` of the particle.
    pub brownian: f64,
    /// Measure functionals of the observed law.
    pub law: &'a [f64],
    pub particle: usize,
}

/// Measure-valued control, reported through the model's functionals.
pub trait MeasureControl: Send + Sync {
    /// Writes the functional values of `μ(t)` into `out`.
    fn eval(&self, obs: &Observation, out: &mut [f64]);
}

impl<F> MeasureControl for F
where
    F: Fn(&Observation, &mut [f64]) + Send + Sync,
{
    fn eval(&self, obs: &Observation, out: &mut [f64]) {
        self(obs, out)
    }
}

/// Real-valued control `u(t)`.
pub trait ScalarControl: Send + Sync {
    fn value(&self, obs: &Observation) -> f64;
}

impl<F> ScalarControl for F
where
    F: Fn(&Observation) -> f64 + Send + Sync,
{
    fn value(&self, obs: &Observation) -> f64 {
        self(obs)
    }
}

/// A measure-valued control for player 1 and a real control for player 2.
#[derive(Clone)]
pub struct ControlPair {
    pub mu: Arc<dyn MeasureControl>,
    pub u: Arc<dyn ScalarControl>,
    /// Information patterns of player 1 (measure) and player 2 (control).
    pub info: [InfoPattern; 2],
    /// The convex set `U = [lo, hi]`.
    pub u_bounds: (f64, f64),
}

impl ControlPair {
    pub fn new(mu: Arc<dyn MeasureControl>, u: Arc<dyn ScalarControl>) -> Self {
        Self {
            mu,
            u,
            info: [InfoPattern::Full, InfoPattern::Full],
            u_bounds: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// A pair whose measure control reports constant functional values.
    pub fn constant(mu_values: Vec<f64>, u: f64) -> Self {
        Self::new(
            Arc::new(move |_: &Observation, out: &mut [f64]| out.copy_from_slice(&mu_values)),
            Arc::new(move |_: &Observation| u),
        )
    }

    pub fn with_info(mut self, info: [InfoPattern; 2]) -> Self {
        self.info = info;
        self
    }

    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Self {
        self.u_bounds = (lo, hi);
        self
    }
}

/// Which player a perturbation or residual belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Player {
    /// Chooses the measure-valued control.
    Measure,
    /// Chooses the real-valued control.
    Control,
}

/// Step perturbation of one player's control: `α·1_{[start, T]}(t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    /// `η(t) = η₀·1_{[start, T]}(t)` for a signed measure `η₀`.
    Measure { start: f64, eta: DiscreteMeasure },
    /// `π(t) = amplitude·1_{[start, T]}(t)`.
    Control { start: f64, amplitude: f64 },
}

impl Direction {
    pub fn player(&self) -> Player {
        match self {
            Self::Measure { .. } => Player::Measure,
            Self::Control { .. } => Player::Control,
        }
    }

    pub fn start(&self) -> f64 {
        match self {
            Self::Measure { start, .. } | Self::Control { start, .. } => *start,
        }
    }

    /// The direction in functional coordinates: the functional values of
    /// `η₀`, or the control amplitude.
    pub fn coordinates(&self, model: &ControlledModel) -> DirectionValues {
        match self {
            Self::Measure { start, eta } => DirectionValues {
                start: *start,
                mu: model.coordinates(eta),
                u: 0.0,
            },
            Self::Control { start, amplitude } => DirectionValues {
                start: *start,
                mu: vec![0.0; model.n_functionals()],
                u: *amplitude,
            },
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Self::Measure { eta, .. } => eta.atoms().iter().all(|a| a.weight == 0.0),
            Self::Control { amplitude, .. } => *amplitude == 0.0,
        }
    }
}

/// A [`Direction`] resolved against a model's functionals.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectionValues {
    pub start: f64,
    pub mu: Vec<f64>,
    pub u: f64,
}
