use rayon::prelude::*;

use super::model::{Coefficient, ControlledModel, DirectionValues, Point, Var};
use super::simulate::{MuMode, ParticleBundle};
use crate::error::{Error, Result};

/// Paths of the derivative process, `N × (M + 1)` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct DerivativePaths {
    steps: usize,
    values: Vec<f64>,
}

impl DerivativePaths {
    pub fn path(&self, i: usize) -> &[f64] {
        &self.values[i * (self.steps + 1)..(i + 1) * (self.steps + 1)]
    }

    pub fn n_particles(&self) -> usize {
        self.values.len() / (self.steps + 1)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&z| z == 0.0)
    }
}

/// Euler scheme for the derivative process
///
/// ```text
/// dZ = [b_x Z + b_μ·η + b_u π] dt + [σ_x Z + σ_μ·η + σ_u π] dB
///      + ∫ [γ_x Z + γ_μ·η + γ_u π](ζ) Ñ(dt, dζ),   Z(0) = 0,
/// ```
///
/// driven by the same increments and jump events as `bundle`. Partials are
/// evaluated along the recorded base path.
pub fn simulate_derivative_process(
    bundle: &ParticleBundle,
    model: &ControlledModel,
    direction: &DirectionValues,
) -> Result<DerivativePaths> {
    if bundle.mu_mode() == MuMode::Empirical && direction.mu.iter().any(|&v| v != 0.0) {
        return Err(Error::Unsupported(
            "measure directions need an exogenous measure argument".into(),
        ));
    }
    if direction.mu.len() != model.n_functionals() {
        return Err(Error::InvalidInput(
            "direction has the wrong number of functionals".into(),
        ));
    }
    let grid = bundle.grid();
    let m = grid.steps();
    let dt = grid.dt();
    let levy = &model.levy;
    let dynamics = &model.dynamics;

    // Directional derivative of one coefficient: ∂_x c·z + Σ_j ∂_{μ_j} c·η_j + ∂_u c·π.
    let sensitivity = |c: Coefficient, p: &Point, z: f64, on: bool| -> f64 {
        let mut v = dynamics.partial(c, Var::State, p) * z;
        if on {
            for (j, &eta) in direction.mu.iter().enumerate() {
                if eta != 0.0 {
                    v += dynamics.partial(c, Var::Measure(j), p) * eta;
                }
            }
            if direction.u != 0.0 {
                v += dynamics.partial(c, Var::Control, p) * direction.u;
            }
        }
        v
    };

    let rows: Vec<Vec<f64>> = (0..bundle.n_particles())
        .into_par_iter()
        .map(|i| {
            let path = bundle.path(i);
            let db = bundle.noise().increments(i);
            let events = bundle.noise().events_by_step(i);
            let mut z = vec![0.0; m + 1];
            for k in 0..m {
                let p = Point {
                    t: grid.time(k),
                    x: path[k],
                    mu: bundle.mu_values(i, k),
                    u: bundle.control(i, k),
                    particle: i,
                };
                let on = grid.at_or_after(k, direction.start);
                let zk = z[k];
                let mut next = zk
                    + sensitivity(Coefficient::Drift, &p, zk, on) * dt
                    + sensitivity(Coefficient::Diffusion, &p, zk, on) * db[k];
                for &atom in &events[k] {
                    next += sensitivity(Coefficient::Jump(levy.jump_sizes()[atom]), &p, zk, on);
                }
                for (&zeta, &rate) in levy.jump_sizes().iter().zip(levy.rates()) {
                    next -= rate * sensitivity(Coefficient::Jump(zeta), &p, zk, on) * dt;
                }
                z[k + 1] = next;
            }
            z
        })
        .collect();
    Ok(DerivativePaths {
        steps: m,
        values: rows.concat(),
    })
}

/// `E[∫₀ᵀ ((X^λ − X)/λ − Z)² dt]` with a right-endpoint rule (`Z(0) = 0`).
pub fn l2_derivative_error(
    base: &ParticleBundle,
    perturbed: &ParticleBundle,
    z: &DerivativePaths,
    lambda: f64,
) -> f64 {
    let grid = base.grid();
    let m = grid.steps();
    let dt = grid.dt();
    let n = base.n_particles();
    let total: f64 = (0..n)
        .map(|i| {
            let (x0, x1, zi) = (base.path(i), perturbed.path(i), z.path(i));
            (1..=m)
                .map(|k| {
                    let e = (x1[k] - x0[k]) / lambda - zi[k];
                    e * e * dt
                })
                .sum::<f64>()
        })
        .sum();
    total / n as f64
}
