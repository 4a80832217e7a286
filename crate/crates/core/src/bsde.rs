//! Linear BSDEs with jumps,
//!
//! ```text
//! dP = −[φ + αP + βQ + Σ_j rate_j ψ(ζ_j) R(ζ_j)] dt + Q dB + ∫ R(ζ) Ñ(dt, dζ),   P(T) = θ,
//! ```
//!
//! solved through the Γ-representation
//! `P(t) = E[θ Γ(T)/Γ(t) + ∫_t^T Γ(s)/Γ(t) φ(s) ds | F_t]` with
//! `dΓ = Γ(α dt + β dB + ∫ ψ Ñ(dt, dζ))`, `Γ(0) = 1`.
//!
//! On the simulation grid the ratio `Γ_{k+1}/Γ_k` is the Euler growth factor,
//! so the pathwise target `Y_k = φ_k Δt + (Γ_{k+1}/Γ_k) Y_{k+1}` is computed
//! backwards without dividing by Γ. `Y_k` is exactly the discrete adjoint of
//! an Euler-discretised state equation.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lawproc::LevyMeasure;
use crate::output::{num, CsvTable};
use crate::regression::{project, Basis};
use crate::sde::{
    ControlledModel, CostPoint, NoiseBundle, ParticleBundle, Performance, Point, TerminalPoint,
    TimeGrid, Var,
};

/// Noise seen by a coefficient: the Brownian level and the (uncompensated)
/// compound Poisson level of one path at grid step `step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseState {
    pub particle: usize,
    pub step: usize,
    pub t: f64,
    pub brownian: f64,
    pub jump_level: f64,
}

pub type NoiseFn = Arc<dyn Fn(&NoiseState) -> f64 + Send + Sync>;
pub type NoiseJumpFn = Arc<dyn Fn(&NoiseState, f64) -> f64 + Send + Sync>;

/// Coefficients given as functions of the driving noise. Such specs can be
/// re-simulated from any intermediate state, which nested Monte Carlo needs.
#[derive(Clone)]
pub struct NoiseCoefficients {
    pub phi: NoiseFn,
    pub alpha: NoiseFn,
    pub beta: NoiseFn,
    pub jump_phi: NoiseJumpFn,
    /// θ, evaluated at the terminal noise state.
    pub terminal: NoiseFn,
    /// Declares that none of the functions reads the noise.
    pub deterministic: bool,
}

impl NoiseCoefficients {
    /// Constant coefficients and deterministic `θ`.
    pub fn constant(phi: f64, alpha: f64, beta: f64, jump_phi: f64, theta: f64) -> Self {
        Self {
            phi: Arc::new(move |_| phi),
            alpha: Arc::new(move |_| alpha),
            beta: Arc::new(move |_| beta),
            jump_phi: Arc::new(move |_, _| jump_phi),
            terminal: Arc::new(move |_| theta),
            deterministic: true,
        }
    }
}

/// Coefficients tabulated along the paths of a particular noise bundle, e.g.
/// adjoint drivers read off a simulated state. Rows are particles.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCoefficients {
    pub n: usize,
    pub steps: usize,
    /// `n × steps`.
    pub phi: Vec<f64>,
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
    /// `n × steps × atoms`.
    pub jump_phi: Vec<f64>,
    /// `n`.
    pub terminal: Vec<f64>,
}

#[derive(Clone)]
pub enum Coefficients {
    Noise(NoiseCoefficients),
    Tabulated(TabulatedCoefficients),
}

#[derive(Clone)]
pub struct LinearBsdeSpec {
    pub coefficients: Coefficients,
    pub levy: LevyMeasure,
}

/// What the conditional expectations are regressed on.
#[derive(Debug, Clone, PartialEq)]
pub enum Regressor {
    /// The Brownian level of the path.
    Brownian,
    /// Caller-supplied values, `n × (steps + 1)` row-major.
    Values(Arc<Vec<f64>>),
}

impl Regressor {
    /// The state paths of a bundle.
    pub fn states(bundle: &ParticleBundle) -> Self {
        let values = (0..bundle.n_particles())
            .flat_map(|i| bundle.path(i).to_vec())
            .collect();
        Self::Values(Arc::new(values))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    /// Deterministic coefficients and θ: the conditional expectation is a
    /// plain expectation and is computed without sampling.
    ClosedForm,
    /// Re-simulates `n_inner` continuations from every grid point.
    NestedMc { n_inner: usize, seed: u64 },
    /// Projects the pathwise target on a basis of the regressor observed
    /// `delay_steps` earlier.
    Regression {
        basis: Basis,
        regressor: Regressor,
        delay_steps: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatorKind {
    ClosedForm,
    NestedMc,
    Regression,
}

impl EstimatorKind {
    pub fn name(&self) -> &'static str {
        match self {
            Self::ClosedForm => "closed-form",
            Self::NestedMc => "nested-mc",
            Self::Regression => "regression",
        }
    }
}

impl Estimator {
    pub fn kind(&self) -> EstimatorKind {
        match self {
            Self::ClosedForm => EstimatorKind::ClosedForm,
            Self::NestedMc { .. } => EstimatorKind::NestedMc,
            Self::Regression { .. } => EstimatorKind::Regression,
        }
    }
}

/// Estimates of `P` on every path and grid time.
#[derive(Debug, Clone, PartialEq)]
pub struct BsdeSolution {
    grid: TimeGrid,
    kind: EstimatorKind,
    n: usize,
    p: Vec<f64>,
    targets: Option<Vec<f64>>,
    std_errors: Vec<f64>,
    seed: Option<u64>,
}

impl BsdeSolution {
    pub fn grid(&self) -> TimeGrid {
        self.grid
    }

    pub fn kind(&self) -> EstimatorKind {
        self.kind
    }

    pub fn n_paths(&self) -> usize {
        self.n
    }

    pub fn p(&self, i: usize, k: usize) -> f64 {
        self.p[i * (self.grid.steps() + 1) + k]
    }

    pub fn path(&self, i: usize) -> &[f64] {
        let w = self.grid.steps() + 1;
        &self.p[i * w..(i + 1) * w]
    }

    /// The pathwise target `Y_k` before conditioning, when it was formed.
    pub fn target(&self, i: usize, k: usize) -> Option<f64> {
        self.targets
            .as_ref()
            .map(|t| t[i * (self.grid.steps() + 1) + k])
    }

    /// Standard error of the cross-sectional mean of `P(t_k)`.
    pub fn std_error(&self, k: usize) -> f64 {
        self.std_errors[k]
    }

    pub fn mean(&self, k: usize) -> f64 {
        (0..self.n).map(|i| self.p(i, k)).sum::<f64>() / self.n as f64
    }

    /// Rows `(time, scenario, P, std_error)` for the first `max_paths` paths.
    pub fn to_csv(&self, max_paths: usize) -> CsvTable {
        let mut table = CsvTable::new(&["time", "scenario", "P", "std_error"], self.seed);
        for i in 0..self.n.min(max_paths) {
            for k in 0..=self.grid.steps() {
                table.push(vec![
                    num(self.grid.time(k)),
                    i.to_string(),
                    num(self.p(i, k)),
                    num(self.std_errors[k]),
                ]);
            }
        }
        table
    }
}

fn noise_states(noise: &NoiseBundle, i: usize) -> Vec<NoiseState> {
    let grid = noise.grid();
    let levy = noise.levy();
    let events = noise.events_by_step(i);
    let mut out = Vec::with_capacity(grid.steps() + 1);
    let (mut b, mut j) = (0.0, 0.0);
    for k in 0..=grid.steps() {
        out.push(NoiseState {
            particle: i,
            step: k,
            t: grid.time(k),
            brownian: b,
            jump_level: j,
        });
        if k < grid.steps() {
            b += noise.increments(i)[k];
            j += events[k].iter().map(|&a| levy.jump_sizes()[a]).sum::<f64>();
        }
    }
    out
}

/// Evaluates noise-driven coefficients along every path of `noise`.
pub fn tabulate(c: &NoiseCoefficients, noise: &NoiseBundle) -> TabulatedCoefficients {
    let m = noise.grid().steps();
    let atoms = noise.levy().jump_sizes().to_vec();
    let rows: Vec<_> = (0..noise.n_particles())
        .into_par_iter()
        .map(|i| {
            let states = noise_states(noise, i);
            let mut phi = Vec::with_capacity(m);
            let mut alpha = Vec::with_capacity(m);
            let mut beta = Vec::with_capacity(m);
            let mut jump = Vec::with_capacity(m * atoms.len());
            for s in &states[..m] {
                phi.push((c.phi)(s));
                alpha.push((c.alpha)(s));
                beta.push((c.beta)(s));
                jump.extend(atoms.iter().map(|&z| (c.jump_phi)(s, z)));
            }
            (phi, alpha, beta, jump, (c.terminal)(&states[m]))
        })
        .collect();
    let mut t = TabulatedCoefficients {
        n: noise.n_particles(),
        steps: m,
        phi: Vec::new(),
        alpha: Vec::new(),
        beta: Vec::new(),
        jump_phi: Vec::new(),
        terminal: Vec::new(),
    };
    for (phi, alpha, beta, jump, theta) in rows {
        t.phi.extend(phi);
        t.alpha.extend(alpha);
        t.beta.extend(beta);
        t.jump_phi.extend(jump);
        t.terminal.push(theta);
    }
    t
}

fn tabulated(spec: &LinearBsdeSpec, noise: &NoiseBundle) -> Result<TabulatedCoefficients> {
    if noise.levy() != &spec.levy {
        return Err(Error::InvalidInput(
            "noise was generated for a different Lévy measure".into(),
        ));
    }
    match &spec.coefficients {
        Coefficients::Noise(c) => Ok(tabulate(c, noise)),
        Coefficients::Tabulated(t) => {
            let (n, m, a) = (noise.n_particles(), noise.grid().steps(), spec.levy.len());
            if t.n != n
                || t.steps != m
                || t.phi.len() != n * m
                || t.alpha.len() != n * m
                || t.beta.len() != n * m
                || t.jump_phi.len() != n * m * a
                || t.terminal.len() != n
            {
                return Err(Error::InvalidInput(
                    "tabulated coefficients do not match the noise".into(),
                ));
            }
            Ok(t.clone())
        }
    }
}

/// One Euler growth factor `Γ_{k+1}/Γ_k`.
fn growth(
    alpha: f64,
    beta: f64,
    jump: &[f64],
    levy: &LevyMeasure,
    events: &[usize],
    dt: f64,
    db: f64,
) -> f64 {
    let comp: f64 = levy.rates().iter().zip(jump).map(|(r, g)| r * g).sum();
    1.0 + alpha * dt + beta * db + events.iter().map(|&a| jump[a]).sum::<f64>() - comp * dt
}

fn growth_factors(t: &TabulatedCoefficients, noise: &NoiseBundle, i: usize) -> Vec<f64> {
    let m = t.steps;
    let a = noise.levy().len();
    let dt = noise.grid().dt();
    let events = noise.events_by_step(i);
    (0..m)
        .map(|k| {
            let row = i * m + k;
            growth(
                t.alpha[row],
                t.beta[row],
                &t.jump_phi[row * a..(row + 1) * a],
                noise.levy(),
                &events[k],
                dt,
                noise.increments(i)[k],
            )
        })
        .collect()
}

/// Γ paths, `n × (steps + 1)` row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaPaths {
    steps: usize,
    values: Vec<f64>,
}

impl GammaPaths {
    pub fn path(&self, i: usize) -> &[f64] {
        &self.values[i * (self.steps + 1)..(i + 1) * (self.steps + 1)]
    }
}

/// Euler scheme for Γ on the supplied noise. Fails if Γ leaves `(0, ∞)`,
/// which signals a step too coarse for the jump coefficient.
pub fn simulate_gamma(spec: &LinearBsdeSpec, noise: &NoiseBundle) -> Result<GammaPaths> {
    let t = tabulated(spec, noise)?;
    let m = t.steps;
    let rows: Vec<Vec<f64>> = (0..noise.n_particles())
        .into_par_iter()
        .map(|i| {
            let mut g = Vec::with_capacity(m + 1);
            g.push(1.0);
            for (k, f) in growth_factors(&t, noise, i).into_iter().enumerate() {
                let next = g[k] * f;
                if !(next > 0.0 && next.is_finite()) {
                    return Err(Error::GammaNonPositive {
                        value: next,
                        path: i,
                        step: k + 1,
                    });
                }
                g.push(next);
            }
            Ok(g)
        })
        .collect::<Result<_>>()?;
    Ok(GammaPaths {
        steps: m,
        values: rows.concat(),
    })
}

/// Pathwise targets `Y`, `n × (steps + 1)`.
fn targets(t: &TabulatedCoefficients, noise: &NoiseBundle) -> Result<Vec<f64>> {
    let m = t.steps;
    let dt = noise.grid().dt();
    let rows: Vec<Vec<f64>> = (0..noise.n_particles())
        .into_par_iter()
        .map(|i| {
            let factors = growth_factors(t, noise, i);
            let mut y = vec![0.0; m + 1];
            y[m] = t.terminal[i];
            for k in (0..m).rev() {
                if !(factors[k] > 0.0) {
                    return Err(Error::GammaNonPositive {
                        value: factors[k],
                        path: i,
                        step: k + 1,
                    });
                }
                y[k] = t.phi[i * m + k] * dt + factors[k] * y[k + 1];
            }
            Ok(y)
        })
        .collect::<Result<_>>()?;
    Ok(rows.concat())
}

fn se_of(values: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = values.collect();
    crate::sde::mean_and_se(&v).1
}

/// Solves on fresh noise with `n_outer` paths.
pub fn solve(
    spec: &LinearBsdeSpec,
    grid: TimeGrid,
    n_outer: usize,
    estimator: &Estimator,
    seed: u64,
) -> Result<BsdeSolution> {
    let noise = NoiseBundle::generate(&spec.levy, n_outer, grid, seed)?;
    solve_with_noise(spec, &noise, estimator)
}

/// Solves along the paths of `noise`.
pub fn solve_with_noise(
    spec: &LinearBsdeSpec,
    noise: &NoiseBundle,
    estimator: &Estimator,
) -> Result<BsdeSolution> {
    let grid = noise.grid();
    let n = noise.n_particles();
    let m = grid.steps();
    let w = m + 1;
    let seed = Some(noise.seed());
    match estimator {
        Estimator::ClosedForm => {
            let c = match &spec.coefficients {
                Coefficients::Noise(c) if c.deterministic => c,
                _ => {
                    return Err(Error::Unsupported(
                        "the closed-form estimator needs deterministic noise-free coefficients"
                            .into(),
                    ))
                }
            };
            let p = closed_form_path(c, grid, false);
            Ok(BsdeSolution {
                grid,
                kind: EstimatorKind::ClosedForm,
                n,
                p: (0..n).flat_map(|_| p.iter().copied()).collect(),
                targets: None,
                std_errors: vec![0.0; w],
                seed,
            })
        }
        Estimator::Regression {
            basis,
            regressor,
            delay_steps,
        } => {
            let t = tabulated(spec, noise)?;
            let y = targets(&t, noise)?;
            let reg: Vec<f64> = match regressor {
                Regressor::Brownian => (0..n).flat_map(|i| noise.brownian_levels(i)).collect(),
                Regressor::Values(v) => {
                    if v.len() != n * w {
                        return Err(Error::LengthMismatch {
                            left: v.len(),
                            right: n * w,
                        });
                    }
                    v.to_vec()
                }
            };
            let columns: Vec<Vec<f64>> = (0..m)
                .into_par_iter()
                .map(|k| {
                    let ko = k.saturating_sub(*delay_steps);
                    let x: Vec<f64> = (0..n).map(|i| reg[i * w + ko]).collect();
                    let yk: Vec<f64> = (0..n).map(|i| y[i * w + k]).collect();
                    project(&x, &yk, basis, k).map(|f| f.fitted)
                })
                .collect::<Result<_>>()?;
            let mut p = vec![0.0; n * w];
            for i in 0..n {
                for (k, col) in columns.iter().enumerate() {
                    p[i * w + k] = col[i];
                }
                p[i * w + m] = t.terminal[i];
            }
            let std_errors = (0..w)
                .map(|k| se_of((0..n).map(|i| y[i * w + k])))
                .collect();
            Ok(BsdeSolution {
                grid,
                kind: EstimatorKind::Regression,
                n,
                p,
                targets: Some(y),
                std_errors,
                seed,
            })
        }
        Estimator::NestedMc {
            n_inner,
            seed: inner_seed,
        } => {
            let c = match &spec.coefficients {
                Coefficients::Noise(c) => c,
                Coefficients::Tabulated(_) => {
                    return Err(Error::Unsupported(
                        "nested Monte Carlo needs coefficients that are functions of the noise"
                            .into(),
                    ))
                }
            };
            if *n_inner < 2 {
                return Err(Error::InvalidInput(
                    "nested Monte Carlo needs at least two inner paths".into(),
                ));
            }
            nested(c, &spec.levy, noise, *n_inner, *inner_seed)
        }
    }
}

fn nested(
    c: &NoiseCoefficients,
    levy: &LevyMeasure,
    noise: &NoiseBundle,
    n_inner: usize,
    inner_seed: u64,
) -> Result<BsdeSolution> {
    let grid = noise.grid();
    let n = noise.n_particles();
    let m = grid.steps();
    let w = m + 1;
    let dt = grid.dt();
    let sqrt_dt = dt.sqrt();
    let rate = levy.total_rate();
    let rows: Vec<Vec<(f64, f64)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let states = noise_states(noise, i);
            let mut row = Vec::with_capacity(w);
            for start in &states[..m] {
                let k0 = start.step;
                let mut rng = ChaCha8Rng::seed_from_u64(inner_seed);
                rng.set_stream((i * w + k0) as u64);
                let mut samples = Vec::with_capacity(n_inner);
                for _ in 0..n_inner {
                    let mut events = vec![Vec::new(); m - k0];
                    let dbs: Vec<f64> = (k0..m)
                        .map(|_| {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            z * sqrt_dt
                        })
                        .collect();
                    if rate > 0.0 {
                        let exp = Exp::new(rate).expect("positive rate");
                        let mut tau = grid.time(k0);
                        loop {
                            tau += exp.sample(&mut rng);
                            if tau > grid.horizon() {
                                break;
                            }
                            let step = ((tau / dt) as usize).clamp(k0, m - 1);
                            events[step - k0].push(levy.pick(rng.random::<f64>()));
                        }
                    }
                    let mut s = *start;
                    let (mut g, mut acc) = (1.0, 0.0);
                    for k in k0..m {
                        let jump: Vec<f64> = levy
                            .jump_sizes()
                            .iter()
                            .map(|&z| (c.jump_phi)(&s, z))
                            .collect();
                        acc += g * (c.phi)(&s) * dt;
                        let ev = &events[k - k0];
                        g *= growth(
                            (c.alpha)(&s),
                            (c.beta)(&s),
                            &jump,
                            levy,
                            ev,
                            dt,
                            dbs[k - k0],
                        );
                        if !(g > 0.0 && g.is_finite()) {
                            return Err(Error::GammaNonPositive {
                                value: g,
                                path: i,
                                step: k + 1,
                            });
                        }
                        s = NoiseState {
                            particle: i,
                            step: k + 1,
                            t: grid.time(k + 1),
                            brownian: s.brownian + dbs[k - k0],
                            jump_level: s.jump_level
                                + ev.iter().map(|&a| levy.jump_sizes()[a]).sum::<f64>(),
                        };
                    }
                    samples.push(acc + g * (c.terminal)(&s));
                }
                row.push(crate::sde::mean_and_se(&samples));
            }
            row.push(((c.terminal)(&states[m]), 0.0));
            Ok(row)
        })
        .collect::<Result<_>>()?;
    let p: Vec<f64> = rows.iter().flat_map(|r| r.iter().map(|v| v.0)).collect();
    let std_errors = (0..w)
        .map(|k| {
            let cross = se_of((0..n).map(|i| rows[i][k].0));
            let inner = (0..n).map(|i| rows[i][k].1.powi(2)).sum::<f64>() / n as f64;
            (cross * cross + inner / n as f64).sqrt()
        })
        .collect();
    Ok(BsdeSolution {
        grid,
        kind: EstimatorKind::NestedMc,
        n,
        p,
        targets: None,
        std_errors,
        seed: Some(noise.seed()),
    })
}

/// Backward sweep `P_k = φ_k Δt + (1 + α_k Δt) P_{k+1}`, or the implicit
/// variant `P_k = (P_{k+1} + φ_k Δt)/(1 − α_k Δt)`.
fn closed_form_path(c: &NoiseCoefficients, grid: TimeGrid, implicit: bool) -> Vec<f64> {
    let m = grid.steps();
    let dt = grid.dt();
    let at = |k: usize| NoiseState {
        particle: 0,
        step: k,
        t: grid.time(k),
        brownian: 0.0,
        jump_level: 0.0,
    };
    let mut p = vec![0.0; m + 1];
    p[m] = (c.terminal)(&at(m));
    for k in (0..m).rev() {
        let s = at(k);
        let alpha = (c.alpha)(&s);
        p[k] = if implicit {
            (p[k + 1] + (c.phi)(&s) * dt) / (1.0 - alpha * dt)
        } else {
            (c.phi)(&s) * dt + (1.0 + alpha * dt) * p[k + 1]
        };
    }
    p
}

/// Implicit backward-Euler sweep of the BSDE for deterministic coefficients,
/// an independent cross-check of the Γ-representation.
pub fn backward_euler(spec: &LinearBsdeSpec, grid: TimeGrid) -> Result<Vec<f64>> {
    match &spec.coefficients {
        Coefficients::Noise(c) if c.deterministic => {
            if (0..grid.steps()).any(|k| {
                let s = NoiseState {
                    particle: 0,
                    step: k,
                    t: grid.time(k),
                    brownian: 0.0,
                    jump_level: 0.0,
                };
                (c.alpha)(&s) * grid.dt() >= 1.0
            }) {
                return Err(Error::InvalidInput("implicit step needs α Δt < 1".into()));
            }
            Ok(closed_form_path(c, grid, true))
        }
        _ => Err(Error::Unsupported(
            "backward Euler is implemented for deterministic coefficients only".into(),
        )),
    }
}

/// The adjoint `p⁰` of a player with payoff `perf` along the paths of
/// `bundle`: terminal `g_x`, driver `ℓ_x + p b_x + q σ_x + ∫ r γ_x ν`.
pub fn adjoint_p0_solve(
    model: &ControlledModel,
    perf: &dyn Performance,
    bundle: &ParticleBundle,
    estimator: &Estimator,
) -> Result<BsdeSolution> {
    if let Estimator::NestedMc { .. } = estimator {
        return Err(Error::Unsupported(
            "adjoint drivers depend on the state path and cannot be re-simulated".into(),
        ));
    }
    let grid = bundle.grid();
    let m = grid.steps();
    let atoms = model.levy.jump_sizes().to_vec();
    let dyn_ = &model.dynamics;
    let rows: Vec<_> = (0..bundle.n_particles())
        .into_par_iter()
        .map(|i| {
            let path = bundle.path(i);
            let db = bundle.noise().increments(i);
            let (mut phi, mut alpha, mut beta, mut jump) = (
                Vec::with_capacity(m),
                Vec::with_capacity(m),
                Vec::with_capacity(m),
                Vec::new(),
            );
            let mut b = 0.0;
            for k in 0..m {
                let p = Point {
                    t: grid.time(k),
                    x: path[k],
                    mu: bundle.mu_values(i, k),
                    u: bundle.control(i, k),
                    particle: i,
                };
                let cp = CostPoint {
                    t: p.t,
                    x: p.x,
                    m: bundle.law_values(k),
                    mu: p.mu,
                    u: p.u,
                    particle: i,
                    brownian: b,
                };
                phi.push(perf.running_partial(Var::State, &cp));
                alpha.push(dyn_.partial(crate::sde::Coefficient::Drift, Var::State, &p));
                beta.push(dyn_.partial(crate::sde::Coefficient::Diffusion, Var::State, &p));
                jump.extend(
                    atoms
                        .iter()
                        .map(|&z| dyn_.partial(crate::sde::Coefficient::Jump(z), Var::State, &p)),
                );
                b += db[k];
            }
            let theta = perf.terminal_dx(&TerminalPoint {
                x: path[m],
                m: bundle.law_values(m),
                particle: i,
                brownian: b,
            });
            (phi, alpha, beta, jump, theta)
        })
        .collect();
    let mut t = TabulatedCoefficients {
        n: bundle.n_particles(),
        steps: m,
        phi: Vec::new(),
        alpha: Vec::new(),
        beta: Vec::new(),
        jump_phi: Vec::new(),
        terminal: Vec::new(),
    };
    for (phi, alpha, beta, jump, theta) in rows {
        t.phi.extend(phi);
        t.alpha.extend(alpha);
        t.beta.extend(beta);
        t.jump_phi.extend(jump);
        t.terminal.push(theta);
    }
    if let Some(bad) = t.phi.iter().chain(&t.terminal).position(|v| !v.is_finite()) {
        return Err(Error::Simulation {
            what: "adjoint driver",
            particle: bad / m.max(1),
            step: bad % m.max(1),
        });
    }
    let spec = LinearBsdeSpec {
        coefficients: Coefficients::Tabulated(t),
        levy: model.levy.clone(),
    };
    solve_with_noise(&spec, bundle.noise(), estimator)
}
