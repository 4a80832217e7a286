use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lawproc::LevyMeasure;
use crate::output::{num, CsvTable};

/// Uniform grid `t_k = k·T/M`, `k = 0..=M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    horizon: f64,
    steps: usize,
}

impl TimeGrid {
    pub fn new(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0 && horizon.is_finite()) || steps == 0 {
            return Err(Error::InvalidInput(format!(
                "time grid needs T > 0 and at least one step (T = {horizon}, M = {steps})"
            )));
        }
        Ok(Self { horizon, steps })
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn dt(&self) -> f64 {
        self.horizon / self.steps as f64
    }

    pub fn time(&self, k: usize) -> f64 {
        if k == self.steps {
            self.horizon
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.time(k)).collect()
    }

    /// Number of whole steps covered by a delay `δ ≥ 0`.
    pub fn delay_steps(&self, delay: f64) -> usize {
        (delay / self.dt()).round() as usize
    }

    /// True when `t_k ≥ start`, with a tolerance for grid round-off.
    pub fn at_or_after(&self, k: usize, start: f64) -> bool {
        self.time(k) >= start - 1e-9 * self.dt()
    }
}

/// A jump of the compensated Poisson random measure inside `(t_k, t_{k+1}]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JumpEvent {
    pub step: u32,
    pub atom: u32,
}

/// Brownian increments and Poisson jump events for `N` particles.
///
/// Particle `i` draws from its own ChaCha stream `(seed, i)`, so the noise
/// does not depend on how work is scheduled across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseBundle {
    grid: TimeGrid,
    levy: LevyMeasure,
    seed: u64,
    n: usize,
    dbrownian: Vec<f64>,
    jumps: Vec<Vec<JumpEvent>>,
}

impl NoiseBundle {
    pub fn generate(
        levy: &LevyMeasure,
        n_particles: usize,
        grid: TimeGrid,
        seed: u64,
    ) -> Result<Self> {
        if n_particles == 0 {
            return Err(Error::InvalidInput("need at least one particle".into()));
        }
        let m = grid.steps();
        let sqrt_dt = grid.dt().sqrt();
        let rate = levy.total_rate();
        let per_particle: Vec<(Vec<f64>, Vec<JumpEvent>)> = (0..n_particles)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i as u64);
                let db: Vec<f64> = (0..m)
                    .map(|_| {
                        let z: f64 = StandardNormal.sample(&mut rng);
                        z * sqrt_dt
                    })
                    .collect();
                let mut events = Vec::new();
                if rate > 0.0 {
                    let exp = Exp::new(rate).expect("positive rate");
                    let mut tau = 0.0;
                    loop {
                        tau += exp.sample(&mut rng);
                        if tau > grid.horizon() {
                            break;
                        }
                        let step = ((tau / grid.dt()) as usize).min(m - 1);
                        let atom = levy.pick(rng.random::<f64>());
                        events.push(JumpEvent {
                            step: step as u32,
                            atom: atom as u32,
                        });
                    }
                }
                (db, events)
            })
            .collect();
        let mut dbrownian = Vec::with_capacity(n_particles * m);
        let mut jumps = Vec::with_capacity(n_particles);
        for (db, ev) in per_particle {
            dbrownian.extend_from_slice(&db);
            jumps.push(ev);
        }
        Ok(Self {
            grid,
            levy: levy.clone(),
            seed,
            n: n_particles,
            dbrownian,
            jumps,
        })
    }

    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn levy(&self) -> &LevyMeasure {
        &self.levy
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n_particles(&self) -> usize {
        self.n
    }

    /// Brownian increments of particle `i` over each step.
    pub fn increments(&self, i: usize) -> &[f64] {
        let m = self.grid.steps();
        &self.dbrownian[i * m..(i + 1) * m]
    }

    pub fn events(&self, i: usize) -> &[JumpEvent] {
        &self.jumps[i]
    }

    /// `B_i(t_k)` for `k = 0..=M`.
    pub fn brownian_levels(&self, i: usize) -> Vec<f64> {
        let mut levels = Vec::with_capacity(self.grid.steps() + 1);
        let mut b = 0.0;
        levels.push(b);
        for &d in self.increments(i) {
            b += d;
            levels.push(b);
        }
        levels
    }

    /// Jump events of particle `i` grouped by step.
    pub fn events_by_step(&self, i: usize) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.grid.steps()];
        for e in self.events(i) {
            out[e.step as usize].push(e.atom as usize);
        }
        out
    }

    /// Rows `(particle, step, time, jump_size)`.
    pub fn events_csv(&self) -> CsvTable {
        let mut table = CsvTable::new(&["particle", "step", "time", "jump_size"], Some(self.seed));
        for (i, ev) in self.jumps.iter().enumerate() {
            for e in ev {
                table.push(vec![
                    i.to_string(),
                    e.step.to_string(),
                    num(self.grid.time(e.step as usize)),
                    num(self.levy.jump_sizes()[e.atom as usize]),
                ]);
            }
        }
        table
    }
}
