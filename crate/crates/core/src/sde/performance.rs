use rayon::prelude::*;

use super::model::{Var, FD_STEP};
use super::simulate::{mean_and_se, ParticleBundle};
use crate::error::{Error, Result};

/// Arguments of the running cost `ℓ(t, x, m, μ, u, ω)`. `m` and `mu` are the
/// functional values of the law `M(t)` and of the measure control.
#[derive(Debug, Clone, Copy)]
pub struct CostPoint<'a> {
    pub t: f64,
    pub x: f64,
    pub m: &'a [f64],
    pub mu: &'a [f64],
    pub u: f64,
    pub particle: usize,
    /// Brownian level of the particle at `t`, for scenario-dependent costs.
    pub brownian: f64,
}

/// Arguments of the terminal reward `g(x, m, ω)`.
#[derive(Debug, Clone, Copy)]
pub struct TerminalPoint<'a> {
    pub x: f64,
    pub m: &'a [f64],
    pub particle: usize,
    pub brownian: f64,
}

/// `J = E[∫₀ᵀ ℓ dt + g(X(T), M(T))]`.
pub trait Performance: Send + Sync {
    fn running(&self, p: &CostPoint) -> f64;
    fn terminal(&self, p: &TerminalPoint) -> f64;

    /// Partial of `ℓ` in `x`, `u` or a measure-control functional.
    fn running_partial(&self, wrt: Var, p: &CostPoint) -> f64 {
        let h = FD_STEP;
        match wrt {
            Var::State => {
                (self.running(&CostPoint { x: p.x + h, ..*p })
                    - self.running(&CostPoint { x: p.x - h, ..*p }))
                    / (2.0 * h)
            }
            Var::Control => {
                (self.running(&CostPoint { u: p.u + h, ..*p })
                    - self.running(&CostPoint { u: p.u - h, ..*p }))
                    / (2.0 * h)
            }
            Var::Measure(j) => {
                let mut hi = p.mu.to_vec();
                let mut lo = p.mu.to_vec();
                hi[j] += h;
                lo[j] -= h;
                (self.running(&CostPoint { mu: &hi, ..*p })
                    - self.running(&CostPoint { mu: &lo, ..*p }))
                    / (2.0 * h)
            }
        }
    }

    fn terminal_dx(&self, p: &TerminalPoint) -> f64 {
        let h = FD_STEP;
        (self.terminal(&TerminalPoint { x: p.x + h, ..*p })
            - self.terminal(&TerminalPoint { x: p.x - h, ..*p }))
            / (2.0 * h)
    }
}

/// Performance functional from two closures.
pub struct FnPerformance<L, G> {
    pub running: L,
    pub terminal: G,
}

impl<L, G> Performance for FnPerformance<L, G>
where
    L: Fn(&CostPoint) -> f64 + Send + Sync,
    G: Fn(&TerminalPoint) -> f64 + Send + Sync,
{
    fn running(&self, p: &CostPoint) -> f64 {
        (self.running)(p)
    }

    fn terminal(&self, p: &TerminalPoint) -> f64 {
        (self.terminal)(p)
    }
}

/// `−J`, the payoff of the minimising player in a zero-sum game.
pub struct Negated<P>(pub P);

impl<P: Performance> Performance for Negated<P> {
    fn running(&self, p: &CostPoint) -> f64 {
        -self.0.running(p)
    }

    fn terminal(&self, p: &TerminalPoint) -> f64 {
        -self.0.terminal(p)
    }

    fn running_partial(&self, wrt: Var, p: &CostPoint) -> f64 {
        -self.0.running_partial(wrt, p)
    }

    fn terminal_dx(&self, p: &TerminalPoint) -> f64 {
        -self.0.terminal_dx(p)
    }
}

impl<P: Performance + ?Sized> Performance for std::sync::Arc<P> {
    fn running(&self, p: &CostPoint) -> f64 {
        (**self).running(p)
    }

    fn terminal(&self, p: &TerminalPoint) -> f64 {
        (**self).terminal(p)
    }

    fn running_partial(&self, wrt: Var, p: &CostPoint) -> f64 {
        (**self).running_partial(wrt, p)
    }

    fn terminal_dx(&self, p: &TerminalPoint) -> f64 {
        (**self).terminal_dx(p)
    }
}

/// Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
}

impl Estimate {
    pub fn from_samples(xs: &[f64]) -> Self {
        let (mean, std_error) = mean_and_se(xs);
        Self { mean, std_error }
    }
}

/// Per-particle realisations of `∫₀ᵀ ℓ dt + g`, with a left-endpoint rule
/// in time.
pub fn performance_samples(bundle: &ParticleBundle, spec: &dyn Performance) -> Result<Vec<f64>> {
    let grid = bundle.grid();
    let m = grid.steps();
    let dt = grid.dt();
    (0..bundle.n_particles())
        .into_par_iter()
        .map(|i| {
            let path = bundle.path(i);
            let db = bundle.noise().increments(i);
            let mut b = 0.0;
            let mut total = 0.0;
            for k in 0..m {
                let p = CostPoint {
                    t: grid.time(k),
                    x: path[k],
                    m: bundle.law_values(k),
                    mu: bundle.mu_values(i, k),
                    u: bundle.control(i, k),
                    particle: i,
                    brownian: b,
                };
                total += spec.running(&p) * dt;
                b += db[k];
            }
            total += spec.terminal(&TerminalPoint {
                x: path[m],
                m: bundle.law_values(m),
                particle: i,
                brownian: b,
            });
            if total.is_finite() {
                Ok(total)
            } else {
                Err(Error::Simulation {
                    what: "performance",
                    particle: i,
                    step: m,
                })
            }
        })
        .collect()
}

/// Monte Carlo estimate of the performance functional.
pub fn evaluate_performance(bundle: &ParticleBundle, spec: &dyn Performance) -> Result<Estimate> {
    Ok(Estimate::from_samples(&performance_samples(bundle, spec)?))
}
