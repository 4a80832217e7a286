use std::sync::Arc;

use rayon::prelude::*;

use super::model::{
    ControlPair, ControlledModel, DirectionValues, InfoPattern, Observation, Point,
};
use super::noise::{NoiseBundle, TimeGrid};
use crate::error::{Error, Result};
use crate::lawproc::{empirical_law, MeasurePath};
use crate::measures::DiscreteMeasure;
use crate::output::{num, CsvTable};

/// Which measure the coefficients receive.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MuMode {
    /// The measure-valued control `μ(t)`.
    Exogenous,
    /// The empirical law of the particles at the left endpoint of the step,
    /// which realises the mean-field equation driven by `L(X(t))`.
    Empirical,
}

/// `N` simulated paths on a uniform grid together with the noise that drove
/// them and the control values that were applied.
#[derive(Debug, Clone)]
pub struct ParticleBundle {
    grid: TimeGrid,
    noise: Arc<NoiseBundle>,
    x0: f64,
    n_functionals: usize,
    mu_mode: MuMode,
    states: Vec<f64>,
    controls: Vec<f64>,
    mu_values: Vec<f64>,
    law_values: Vec<f64>,
}

impl ParticleBundle {
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn noise(&self) -> &Arc<NoiseBundle> {
        &self.noise
    }

    pub fn seed(&self) -> u64 {
        self.noise.seed()
    }

    pub fn n_particles(&self) -> usize {
        self.noise.n_particles()
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn mu_mode(&self) -> MuMode {
        self.mu_mode
    }

    pub fn n_functionals(&self) -> usize {
        self.n_functionals
    }

    /// Path of particle `i`, `M + 1` values.
    pub fn path(&self, i: usize) -> &[f64] {
        let w = self.grid.steps() + 1;
        &self.states[i * w..(i + 1) * w]
    }

    pub fn state(&self, i: usize, k: usize) -> f64 {
        self.path(i)[k]
    }

    /// Cross-section `X_·(t_k)`.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.n_particles()).map(|i| self.state(i, k)).collect()
    }

    /// Control `u` applied to particle `i` on step `k`.
    pub fn control(&self, i: usize, k: usize) -> f64 {
        self.controls[i * self.grid.steps() + k]
    }

    /// Functional values of the measure argument used on step `k`.
    pub fn mu_values(&self, i: usize, k: usize) -> &[f64] {
        let f = self.n_functionals;
        let base = (i * self.grid.steps() + k) * f;
        &self.mu_values[base..base + f]
    }

    /// Functional values of the empirical law at `t_k`.
    pub fn law_values(&self, k: usize) -> &[f64] {
        let f = self.n_functionals;
        &self.law_values[k * f..(k + 1) * f]
    }

    pub fn law_at(&self, k: usize) -> Result<DiscreteMeasure> {
        empirical_law(&self.column(k))
    }

    /// Empirical laws at every grid time.
    pub fn law_path(&self) -> Result<MeasurePath> {
        let values = (0..=self.grid.steps())
            .map(|k| self.law_at(k))
            .collect::<Result<Vec<_>>>()?;
        MeasurePath::new(self.grid.times(), values)
    }

    /// Cross-sectional mean of `f(X(t_k))` and its standard error.
    pub fn mean_of(&self, k: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
        mean_and_se(
            &(0..self.n_particles())
                .map(|i| f(self.state(i, k)))
                .collect::<Vec<_>>(),
        )
    }

    /// Rows `(particle, step, time, state)`.
    pub fn states_csv(&self) -> CsvTable {
        let mut table = CsvTable::new(&["particle", "step", "time", "state"], Some(self.seed()));
        for i in 0..self.n_particles() {
            for (k, x) in self.path(i).iter().enumerate() {
                table.push(vec![
                    i.to_string(),
                    k.to_string(),
                    num(self.grid.time(k)),
                    num(*x),
                ]);
            }
        }
        table
    }

    /// The states table and the jump-events table.
    pub fn to_csv(&self) -> (CsvTable, CsvTable) {
        (self.states_csv(), self.noise.events_csv())
    }
}

/// Sample mean and `std/√n` with a fixed summation order.
pub fn mean_and_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

enum Source<'a> {
    Policy(&'a ControlPair),
    Replay {
        base: &'a ParticleBundle,
        shift: Option<(&'a DirectionValues, f64)>,
    },
}

#[derive(Clone, Copy, Default)]
struct Running {
    observed_b: [f64; 2],
    cursor: usize,
}

/// Simulates the controlled state equation with fresh noise from `seed`.
pub fn simulate(
    model: &ControlledModel,
    controls: &ControlPair,
    n_particles: usize,
    n_steps: usize,
    seed: u64,
    mu_mode: MuMode,
) -> Result<ParticleBundle> {
    let grid = TimeGrid::new(model.horizon, n_steps)?;
    let noise = NoiseBundle::generate(&model.levy, n_particles, grid, seed)?;
    simulate_with_noise(model, controls, Arc::new(noise), mu_mode)
}

/// Simulates with supplied noise, so several control variants share the
/// same Brownian increments and jump events.
pub fn simulate_with_noise(
    model: &ControlledModel,
    controls: &ControlPair,
    noise: Arc<NoiseBundle>,
    mu_mode: MuMode,
) -> Result<ParticleBundle> {
    for p in &controls.info {
        p.validate()?;
    }
    run(
        model,
        Source::Policy(controls),
        controls.info,
        controls.u_bounds,
        noise,
        mu_mode,
    )
}

/// Re-runs `base` with its recorded controls shifted by `λ·direction`.
/// With `shift = None` or `λ = 0` the result reproduces `base` bit for bit.
pub fn replay(
    model: &ControlledModel,
    base: &ParticleBundle,
    shift: Option<(&DirectionValues, f64)>,
    u_bounds: (f64, f64),
) -> Result<ParticleBundle> {
    run(
        model,
        Source::Replay { base, shift },
        [InfoPattern::Full; 2],
        u_bounds,
        base.noise.clone(),
        base.mu_mode,
    )
}

fn run(
    model: &ControlledModel,
    source: Source,
    info: [InfoPattern; 2],
    u_bounds: (f64, f64),
    noise: Arc<NoiseBundle>,
    mu_mode: MuMode,
) -> Result<ParticleBundle> {
    let grid = noise.grid();
    if (grid.horizon() - model.horizon).abs() > 1e-12 * model.horizon {
        return Err(Error::InvalidInput(format!(
            "noise horizon {} differs from model horizon {}",
            grid.horizon(),
            model.horizon
        )));
    }
    if noise.levy() != &model.levy {
        return Err(Error::InvalidInput(
            "noise was generated for a different Lévy measure".into(),
        ));
    }
    let n = noise.n_particles();
    let m = grid.steps();
    let f = model.n_functionals();
    let dt = grid.dt();
    let delays = info.map(|p| match p {
        InfoPattern::Full => 0,
        InfoPattern::Delay(d) => grid.delay_steps(d),
    });
    if let Source::Replay { base, shift } = &source {
        if base.n_particles() != n || base.grid.steps() != m || base.n_functionals != f {
            return Err(Error::InvalidInput(
                "replay base does not match the model".into(),
            ));
        }
        if let Some((dir, _)) = shift {
            if dir.mu.len() != f {
                return Err(Error::InvalidInput(
                    "direction has the wrong number of functionals".into(),
                ));
            }
        }
    }

    let levy = &model.levy;
    let compensator: Vec<(f64, f64)> = levy
        .jump_sizes()
        .iter()
        .copied()
        .zip(levy.rates().iter().copied())
        .collect();

    let mut states = vec![0.0; n * (m + 1)];
    for i in 0..n {
        states[i * (m + 1)] = model.x0;
    }
    let mut controls = vec![0.0; n * m];
    // One dummy slot per step when there are no functionals keeps the
    // parallel zip aligned.
    let mut mu_values = vec![0.0; n * m * f.max(1)];
    let mut law_values = vec![0.0; (m + 1) * f];
    let mut running = vec![Running::default(); n];
    let mut column = vec![0.0; n];

    for k in 0..m {
        for (i, c) in column.iter_mut().enumerate() {
            *c = states[i * (m + 1) + k];
        }
        for (j, func) in model.functionals.iter().enumerate() {
            law_values[k * f + j] = func.eval_empirical(&column);
        }
        let law_hist = &law_values;
        let t = grid.time(k);
        let active = |start: f64| grid.at_or_after(k, start);

        states
            .par_chunks_mut(m + 1)
            .zip(controls.par_chunks_mut(m))
            .zip(mu_values.par_chunks_mut(m * f.max(1)))
            .zip(running.par_iter_mut())
            .enumerate()
            .try_for_each(|(i, (((path, upath), mupath), run))| -> Result<()> {
                let x = path[k];
                let obs = |player: usize| {
                    let ko = k.saturating_sub(delays[player]);
                    Observation {
                        step: k,
                        t,
                        observed_step: ko,
                        observed_t: grid.time(ko),
                        state: path[ko],
                        brownian: run.observed_b[player],
                        law: &law_hist[ko * f..(ko + 1) * f],
                        particle: i,
                    }
                };
                let mu_slot = &mut mupath[k * f..(k + 1) * f];
                let u = match &source {
                    Source::Policy(pair) => {
                        match mu_mode {
                            MuMode::Exogenous => pair.mu.eval(&obs(0), mu_slot),
                            MuMode::Empirical => {
                                mu_slot.copy_from_slice(&law_hist[k * f..(k + 1) * f])
                            }
                        }
                        pair.u.value(&obs(1))
                    }
                    Source::Replay { base, shift } => {
                        match mu_mode {
                            MuMode::Exogenous => mu_slot.copy_from_slice(base.mu_values(i, k)),
                            MuMode::Empirical => {
                                mu_slot.copy_from_slice(&law_hist[k * f..(k + 1) * f])
                            }
                        }
                        let mut u = base.control(i, k);
                        if let Some((dir, lambda)) = shift {
                            if active(dir.start) {
                                for (slot, d) in mu_slot.iter_mut().zip(&dir.mu) {
                                    *slot += lambda * d;
                                }
                                u += lambda * dir.u;
                            }
                        }
                        u
                    }
                };
                if !u.is_finite() {
                    return Err(Error::Simulation {
                        what: "control",
                        particle: i,
                        step: k,
                    });
                }
                if u < u_bounds.0 || u > u_bounds.1 {
                    return Err(Error::Inadmissible(format!(
                        "control {u} outside [{}, {}] for particle {i} at step {k}",
                        u_bounds.0, u_bounds.1
                    )));
                }
                upath[k] = u;
                let p = Point {
                    t,
                    x,
                    mu: mu_slot,
                    u,
                    particle: i,
                };
                let dynamics = &model.dynamics;
                let b = dynamics.drift(&p);
                let s = dynamics.diffusion(&p);
                let db = noise.increments(i)[k];
                let mut jump = 0.0;
                let events = noise.events(i);
                while run.cursor < events.len() && events[run.cursor].step as usize == k {
                    let zeta = levy.jump_sizes()[events[run.cursor].atom as usize];
                    jump += dynamics.jump(&p, zeta);
                    run.cursor += 1;
                }
                let comp: f64 = compensator
                    .iter()
                    .map(|&(zeta, rate)| rate * dynamics.jump(&p, zeta))
                    .sum();
                let next = x + b * dt + s * db + jump - comp * dt;
                if !next.is_finite() {
                    return Err(Error::Simulation {
                        what: "state",
                        particle: i,
                        step: k,
                    });
                }
                path[k + 1] = next;
                for player in 0..2 {
                    if k >= delays[player] {
                        run.observed_b[player] += noise.increments(i)[k - delays[player]];
                    }
                }
                Ok(())
            })?;
    }
    for (i, c) in column.iter_mut().enumerate() {
        *c = states[i * (m + 1) + m];
    }
    for (j, func) in model.functionals.iter().enumerate() {
        law_values[m * f + j] = func.eval_empirical(&column);
    }

    Ok(ParticleBundle {
        grid,
        noise,
        x0: model.x0,
        n_functionals: f,
        mu_mode,
        states,
        controls,
        mu_values,
        law_values,
    })
}
