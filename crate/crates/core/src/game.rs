//! Two-player games with a measure-valued player.
//!
//! Player 0 chooses the measure control `μ`, player 1 the real control `u`,
//! and each maximises its own payoff `J_i`. A zero-sum game stores one
//! payoff `J` for player 1 and gives player 0 the payoff `−J`, so `μ`
//! minimises `J`.
//!
//! Everything here verifies candidates rather than computing equilibria:
//! Hamiltonian first-order residuals, finite-difference against adjoint
//! Gâteaux slopes, and perturbation sweeps on common random numbers. The
//! Hamiltonian keeps the `p⁰ b` term; `q⁰ σ` and `r⁰ γ` are not estimated,
//! so partials of σ and γ in the controls are not part of the residuals.

use std::sync::Arc;

use rayon::prelude::*;

use crate::bsde::{adjoint_p0_solve, BsdeSolution, Estimator};
use crate::error::{Error, Result};
use crate::measures::{FourierTable, QuadratureRule};
use crate::output::{num, CsvTable};
use crate::regression::{project, Basis};
use crate::sde::{
    performance_samples, replay, simulate_derivative_process, Coefficient, ControlledModel,
    CostPoint, Direction, DirectionValues, Estimate, InfoPattern, MuMode, Negated, ParticleBundle,
    Performance, Player, Point, TerminalPoint, Var,
};

/// Index of a player in per-player arrays.
pub fn index(player: Player) -> usize {
    match player {
        Player::Measure => 0,
        Player::Control => 1,
    }
}

#[derive(Clone)]
pub struct GameSpec {
    pub model: ControlledModel,
    /// Payoffs of the measure player and the control player.
    pub payoffs: [Arc<dyn Performance>; 2],
    pub zero_sum: bool,
    pub mu_mode: MuMode,
    /// The convex control set `U = [lo, hi]`.
    pub u_bounds: (f64, f64),
}

impl GameSpec {
    pub fn new(
        model: ControlledModel,
        measure: Arc<dyn Performance>,
        control: Arc<dyn Performance>,
    ) -> Self {
        Self {
            model,
            payoffs: [measure, control],
            zero_sum: false,
            mu_mode: MuMode::Exogenous,
            u_bounds: (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    /// `u` maximises `perf`, `μ` minimises it.
    pub fn zero_sum(model: ControlledModel, perf: Arc<dyn Performance>) -> Self {
        let neg: Arc<dyn Performance> = Arc::new(Negated(perf.clone()));
        Self {
            zero_sum: true,
            ..Self::new(model, neg, perf)
        }
    }

    pub fn with_bounds(mut self, lo: f64, hi: f64) -> Self {
        self.u_bounds = (lo, hi);
        self
    }

    pub fn payoff(&self, player: Player) -> &dyn Performance {
        self.payoffs[index(player)].as_ref()
    }
}

/// The pairing `⟨p¹(t), β(m)⟩` with `β(m) = m′`, evaluated on the Fourier
/// table of `m′`. Implementations must be linear in the table.
pub trait P1Pairing: Send + Sync {
    fn pair(&self, t: f64, m_prime: &FourierTable) -> f64;
}

/// `p¹ ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroPairing;

impl P1Pairing for ZeroPairing {
    fn pair(&self, _t: f64, _m_prime: &FourierTable) -> f64 {
        0.0
    }
}

/// `p¹(t) = c(t) κ` for a fixed kernel `κ`, paired through the `M^(k)`
/// inner product. Choosing `c(T) = 0` honours the terminal condition.
pub struct KernelPairing {
    kernel: FourierTable,
    quad: QuadratureRule,
    k: u32,
    scale: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl KernelPairing {
    pub fn new(
        kernel: FourierTable,
        quad: QuadratureRule,
        k: u32,
        scale: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    ) -> Result<Self> {
        if kernel.len() != quad.len() {
            return Err(Error::LengthMismatch {
                left: kernel.len(),
                right: quad.len(),
            });
        }
        Ok(Self {
            kernel,
            quad,
            k,
            scale,
        })
    }
}

impl P1Pairing for KernelPairing {
    fn pair(&self, t: f64, m_prime: &FourierTable) -> f64 {
        (self.scale)(t) * self.kernel.inner(m_prime, self.k, &self.quad)
    }
}

/// Adjoint data of one player.
#[derive(Clone)]
pub struct AdjointState {
    pub p0: BsdeSolution,
    pub pairing: Arc<dyn P1Pairing>,
}

/// `p⁰` for both players along `bundle`.
pub fn solve_adjoints(
    spec: &GameSpec,
    bundle: &ParticleBundle,
    estimator: &Estimator,
) -> Result<[BsdeSolution; 2]> {
    let a = adjoint_p0_solve(&spec.model, spec.payoffs[0].as_ref(), bundle, estimator)?;
    let b = adjoint_p0_solve(&spec.model, spec.payoffs[1].as_ref(), bundle, estimator)?;
    Ok([a, b])
}

fn point<'a>(p: &CostPoint<'a>) -> Point<'a> {
    Point {
        t: p.t,
        x: p.x,
        mu: p.mu,
        u: p.u,
        particle: p.particle,
    }
}

/// `H_i = ℓ_i + p⁰ b + ⟨p¹, m′⟩`.
pub fn hamiltonian(
    spec: &GameSpec,
    player: Player,
    p: &CostPoint,
    p0: f64,
    pairing: &dyn P1Pairing,
    m_prime: &FourierTable,
) -> f64 {
    spec.payoff(player).running(p)
        + p0 * spec.model.dynamics.drift(&point(p))
        + pairing.pair(p.t, m_prime)
}

/// `∂H_i/∂v = ℓ_v + p⁰ b_v`; the pairing term does not depend on `x`, `u`
/// or the measure control.
pub fn hamiltonian_partial(
    spec: &GameSpec,
    player: Player,
    wrt: Var,
    p: &CostPoint,
    p0: f64,
) -> f64 {
    spec.payoff(player).running_partial(wrt, p)
        + p0 * spec
            .model
            .dynamics
            .partial(Coefficient::Drift, wrt, &point(p))
}

/// Central second difference of `ℓ_i + p⁰ b` along one coordinate.
pub fn second_difference(
    spec: &GameSpec,
    player: Player,
    wrt: Var,
    p: &CostPoint,
    p0: f64,
    h: f64,
) -> f64 {
    let h_at =
        |q: &CostPoint| spec.payoff(player).running(q) + p0 * spec.model.dynamics.drift(&point(q));
    let shifted = |s: f64| -> f64 {
        match wrt {
            Var::State => h_at(&CostPoint { x: p.x + s, ..*p }),
            Var::Control => h_at(&CostPoint { u: p.u + s, ..*p }),
            Var::Measure(j) => {
                let mut mu = p.mu.to_vec();
                mu[j] += s;
                h_at(&CostPoint { mu: &mu, ..*p })
            }
        }
    };
    (shifted(h) - 2.0 * shifted(0.0) + shifted(-h)) / (h * h)
}

fn cost_point<'a>(bundle: &'a ParticleBundle, i: usize, k: usize, brownian: f64) -> CostPoint<'a> {
    CostPoint {
        t: bundle.grid().time(k),
        x: bundle.state(i, k),
        m: bundle.law_values(k),
        mu: bundle.mu_values(i, k),
        u: bundle.control(i, k),
        particle: i,
        brownian,
    }
}

/// How residuals are conditioned on each player's information.
#[derive(Debug, Clone, PartialEq)]
pub struct Conditioning {
    pub info: [InfoPattern; 2],
    pub basis: Basis,
}

impl Conditioning {
    pub fn full() -> Self {
        Self {
            info: [InfoPattern::Full; 2],
            basis: Basis::default(),
        }
    }
}

/// Cross-sectional means of the conditioned first-order residuals on
/// `t_0, …, t_{M−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Residuals {
    pub times: Vec<f64>,
    /// One curve per measure functional.
    pub measure: Vec<Vec<Estimate>>,
    pub control: Vec<Estimate>,
    /// Steps where some particle's control sits on the boundary of `U`,
    /// where the residual need not vanish.
    pub boundary: Vec<bool>,
    seed: u64,
}

/// `|mean| ≤ n_se · SE + floor` at every time of a curve.
pub fn curve_within(curve: &[Estimate], n_se: f64, floor: f64) -> bool {
    curve
        .iter()
        .all(|e| e.mean.abs() <= n_se * e.std_error + floor)
}

impl Residuals {
    /// True when every curve is statistically zero, ignoring flagged
    /// boundary steps for the control curve.
    pub fn vanish(&self, n_se: f64, floor: f64) -> bool {
        self.measure.iter().all(|c| curve_within(c, n_se, floor))
            && self
                .control
                .iter()
                .zip(&self.boundary)
                .all(|(e, &b)| b || e.mean.abs() <= n_se * e.std_error + floor)
    }

    fn curve_csv(&self, curve: &[Estimate]) -> CsvTable {
        let mut table = CsvTable::new(&["t", "residual", "std_err"], Some(self.seed));
        for (t, e) in self.times.iter().zip(curve) {
            table.push(vec![num(*t), num(e.mean), num(e.std_error)]);
        }
        table
    }

    pub fn measure_csv(&self, j: usize) -> CsvTable {
        self.curve_csv(&self.measure[j])
    }

    pub fn control_csv(&self) -> CsvTable {
        self.curve_csv(&self.control)
    }
}

fn conditioned(
    bundle: &ParticleBundle,
    info: InfoPattern,
    basis: &Basis,
    k: usize,
    values: Vec<f64>,
) -> Result<Estimate> {
    let fitted = match info {
        InfoPattern::Full => values,
        InfoPattern::Delay(d) => {
            let ko = k.saturating_sub(bundle.grid().delay_steps(d));
            project(&bundle.column(ko), &values, basis, k)?.fitted
        }
    };
    Ok(Estimate::from_samples(&fitted))
}

/// Pathwise `∂H/∂v` of one player on step `k`, using `P(t_k)`.
fn partial_column(
    spec: &GameSpec,
    bundle: &ParticleBundle,
    player: Player,
    wrt: Var,
    p0: &BsdeSolution,
    k: usize,
    brownian: &[f64],
) -> Vec<f64> {
    (0..bundle.n_particles())
        .into_par_iter()
        .map(|i| {
            hamiltonian_partial(
                spec,
                player,
                wrt,
                &cost_point(bundle, i, k, brownian[i]),
                p0.p(i, k),
            )
        })
        .collect()
}

fn brownian_columns(bundle: &ParticleBundle) -> Vec<Vec<f64>> {
    let m = bundle.grid().steps();
    let levels: Vec<Vec<f64>> = (0..bundle.n_particles())
        .map(|i| bundle.noise().brownian_levels(i))
        .collect();
    (0..=m)
        .map(|k| levels.iter().map(|l| l[k]).collect())
        .collect()
}

/// `E[∂H_0/∂μ_j | G⁽¹⁾]` for every functional and `E[∂H_1/∂u | G⁽²⁾]`.
pub fn first_order_residuals(
    spec: &GameSpec,
    bundle: &ParticleBundle,
    adjoints: [&BsdeSolution; 2],
    conditioning: &Conditioning,
) -> Result<Residuals> {
    for s in adjoints {
        if s.n_paths() != bundle.n_particles() || s.grid().steps() != bundle.grid().steps() {
            return Err(Error::InvalidInput(
                "adjoint does not match the bundle".into(),
            ));
        }
    }
    let m = bundle.grid().steps();
    let f = spec.model.n_functionals();
    let brownian = brownian_columns(bundle);
    let (lo, hi) = spec.u_bounds;
    let mut measure = vec![Vec::with_capacity(m); f];
    let mut control = Vec::with_capacity(m);
    let mut boundary = Vec::with_capacity(m);
    for k in 0..m {
        for (j, curve) in measure.iter_mut().enumerate() {
            let col = partial_column(
                spec,
                bundle,
                Player::Measure,
                Var::Measure(j),
                adjoints[0],
                k,
                &brownian[k],
            );
            curve.push(conditioned(
                bundle,
                conditioning.info[0],
                &conditioning.basis,
                k,
                col,
            )?);
        }
        let col = partial_column(
            spec,
            bundle,
            Player::Control,
            Var::Control,
            adjoints[1],
            k,
            &brownian[k],
        );
        control.push(conditioned(
            bundle,
            conditioning.info[1],
            &conditioning.basis,
            k,
            col,
        )?);
        boundary.push((0..bundle.n_particles()).any(|i| {
            let u = bundle.control(i, k);
            u <= lo || u >= hi
        }));
    }
    Ok(Residuals {
        times: (0..m).map(|k| bundle.grid().time(k)).collect(),
        measure,
        control,
        boundary,
        seed: bundle.seed(),
    })
}

/// Largest pathwise gap between the measure player's `∂H/∂μ_j` and the
/// negated `∂H/∂μ_j` of the control player's payoff. For a zero-sum game
/// the two code paths must agree to rounding.
pub fn zero_sum_consistency(
    spec: &GameSpec,
    bundle: &ParticleBundle,
    adjoints: [&BsdeSolution; 2],
) -> Result<f64> {
    if !spec.zero_sum {
        return Err(Error::InvalidInput(
            "the consistency identity needs a zero-sum game".into(),
        ));
    }
    let brownian = brownian_columns(bundle);
    let mut worst = 0.0f64;
    for k in 0..bundle.grid().steps() {
        for j in 0..spec.model.n_functionals() {
            let a = partial_column(
                spec,
                bundle,
                Player::Measure,
                Var::Measure(j),
                adjoints[0],
                k,
                &brownian[k],
            );
            let b = partial_column(
                spec,
                bundle,
                Player::Control,
                Var::Measure(j),
                adjoints[1],
                k,
                &brownian[k],
            );
            for (x, y) in a.iter().zip(&b) {
                worst = worst.max((x + y).abs());
            }
        }
    }
    Ok(worst)
}

/// Step perturbations and the magnitudes to try.
#[derive(Debug, Clone, PartialEq)]
pub struct PerturbationPlan {
    pub directions: Vec<Direction>,
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub direction_id: usize,
    pub player: Player,
    pub lambda: f64,
    /// Change of the perturbing player's own payoff.
    pub delta: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub base: [Estimate; 2],
    seed: u64,
}

impl SweepTable {
    /// No unilateral deviation improves the deviating player's payoff by more
    /// than `n_se` standard errors. A certificate at the tested resolution
    /// only.
    pub fn holds_for(&self, player: Player, n_se: f64) -> bool {
        self.rows
            .iter()
            .filter(|r| r.player == player)
            .all(|r| r.delta <= n_se * r.std_error)
    }

    pub fn nash_holds(&self, n_se: f64) -> bool {
        self.holds_for(Player::Measure, n_se) && self.holds_for(Player::Control, n_se)
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut table = CsvTable::new(
            &["direction_id", "player", "lambda", "delta_J", "std_err"],
            Some(self.seed),
        );
        for r in &self.rows {
            table.push(vec![
                r.direction_id.to_string(),
                match r.player {
                    Player::Measure => "measure".into(),
                    Player::Control => "control".into(),
                },
                num(r.lambda),
                num(r.delta),
                num(r.std_error),
            ]);
        }
        table
    }
}

fn paired_difference(a: &[f64], b: &[f64]) -> Estimate {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    Estimate::from_samples(&d)
}

/// Evaluates each player's payoff under its own unilateral perturbations,
/// all on the noise of `bundle`.
pub fn nash_perturbation_sweep(
    spec: &GameSpec,
    bundle: &ParticleBundle,
    plan: &PerturbationPlan,
) -> Result<SweepTable> {
    let base = [
        performance_samples(bundle, spec.payoffs[0].as_ref())?,
        performance_samples(bundle, spec.payoffs[1].as_ref())?,
    ];
    let mut rows = Vec::new();
    for (id, direction) in plan.directions.iter().enumerate() {
        let player = direction.player();
        let pi = index(player);
        let values = direction.coordinates(&spec.model);
        for &lambda in &plan.lambdas {
            let moved = replay(&spec.model, bundle, Some((&values, lambda)), spec.u_bounds)?;
            let samples = performance_samples(&moved, spec.payoffs[pi].as_ref())?;
            let e = paired_difference(&samples, &base[pi]);
            rows.push(SweepRow {
                direction_id: id,
                player,
                lambda,
                delta: e.mean,
                std_error: e.std_error,
            });
        }
    }
    Ok(SweepTable {
        rows,
        base: [
            Estimate::from_samples(&base[0]),
            Estimate::from_samples(&base[1]),
        ],
        seed: bundle.seed(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateauxReport {
    /// Central difference quotients, one per magnitude.
    pub fd_slopes: Vec<(f64, Estimate)>,
    /// Richardson extrapolation of the last two quotients.
    pub fd_slope: Estimate,
    /// Adjoint expression with the discrete pairing `P(t_{k+1})`.
    pub adjoint_slope: Estimate,
    /// The same derivative through the derivative process `Z`, when it can
    /// be formed.
    pub z_slope: Option<Estimate>,
    /// Paired standard error of `fd_slope − adjoint_slope`.
    pub difference: Estimate,
    pub agree: bool,
}

/// Directional derivative of one coefficient along the direction values.
fn along(model: &ControlledModel, c: Coefficient, p: &Point, dir: &DirectionValues) -> f64 {
    let mut v = 0.0;
    for (j, &eta) in dir.mu.iter().enumerate() {
        if eta != 0.0 {
            v += model.dynamics.partial(c, Var::Measure(j), p) * eta;
        }
    }
    if dir.u != 0.0 {
        v += model.dynamics.partial(c, Var::Control, p) * dir.u;
    }
    v
}

fn cost_along(perf: &dyn Performance, p: &CostPoint, dir: &DirectionValues) -> f64 {
    let mut v = 0.0;
    for (j, &eta) in dir.mu.iter().enumerate() {
        if eta != 0.0 {
            v += perf.running_partial(Var::Measure(j), p) * eta;
        }
    }
    if dir.u != 0.0 {
        v += perf.running_partial(Var::Control, p) * dir.u;
    }
    v
}

/// Compares the finite-difference slope of `λ ↦ J_i(candidate + λ·direction)`
/// with the adjoint expression `E[Σ_k (ℓ_v Δt + P_{k+1} ΔX_v)]`, where `ΔX_v`
/// is the first-order change of the Euler increment. Central quotients use
/// `±λ`; `lambdas` should halve successively for the extrapolation.
pub fn gateaux_check(
    spec: &GameSpec,
    player: Player,
    bundle: &ParticleBundle,
    adjoint: &BsdeSolution,
    direction: &Direction,
    lambdas: &[f64],
) -> Result<GateauxReport> {
    if lambdas.is_empty() || lambdas.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::InvalidInput(
            "Gâteaux check needs positive magnitudes".into(),
        ));
    }
    let perf = spec.payoffs[index(player)].as_ref();
    let model = &spec.model;
    let dir = direction.coordinates(model);
    let mut quotients = Vec::with_capacity(lambdas.len());
    for &l in lambdas {
        let up = performance_samples(
            &replay(model, bundle, Some((&dir, l)), spec.u_bounds)?,
            perf,
        )?;
        let dn = performance_samples(
            &replay(model, bundle, Some((&dir, -l)), spec.u_bounds)?,
            perf,
        )?;
        quotients.push(
            up.iter()
                .zip(&dn)
                .map(|(a, b)| (a - b) / (2.0 * l))
                .collect::<Vec<_>>(),
        );
    }
    let extrapolated: Vec<f64> = if lambdas.len() >= 2 {
        let n = lambdas.len();
        let r = lambdas[n - 2] / lambdas[n - 1];
        let w = r * r;
        quotients[n - 1]
            .iter()
            .zip(&quotients[n - 2])
            .map(|(fine, coarse)| (w * fine - coarse) / (w - 1.0))
            .collect()
    } else {
        quotients[0].clone()
    };

    let grid = bundle.grid();
    let m = grid.steps();
    let dt = grid.dt();
    let levy = &model.levy;
    let adjoint_samples: Vec<f64> = (0..bundle.n_particles())
        .into_par_iter()
        .map(|i| {
            let db = bundle.noise().increments(i);
            let events = bundle.noise().events_by_step(i);
            let mut b = 0.0;
            let mut total = 0.0;
            for k in 0..m {
                if grid.at_or_after(k, dir.start) {
                    let cp = cost_point(bundle, i, k, b);
                    let p = point(&cp);
                    let next = adjoint.p(i, k + 1);
                    let mut dx = along(model, Coefficient::Drift, &p, &dir) * dt
                        + along(model, Coefficient::Diffusion, &p, &dir) * db[k];
                    for &a in &events[k] {
                        dx += along(model, Coefficient::Jump(levy.jump_sizes()[a]), &p, &dir);
                    }
                    for (&z, &rate) in levy.jump_sizes().iter().zip(levy.rates()) {
                        dx -= rate * along(model, Coefficient::Jump(z), &p, &dir) * dt;
                    }
                    total += cost_along(perf, &cp, &dir) * dt + next * dx;
                }
                b += db[k];
            }
            total
        })
        .collect();

    let z_slope = match simulate_derivative_process(bundle, model, &dir) {
        Ok(z) => {
            let samples: Vec<f64> = (0..bundle.n_particles())
                .into_par_iter()
                .map(|i| {
                    let db = bundle.noise().increments(i);
                    let zi = z.path(i);
                    let mut b = 0.0;
                    let mut total = 0.0;
                    for k in 0..m {
                        let cp = cost_point(bundle, i, k, b);
                        total += perf.running_partial(Var::State, &cp) * zi[k] * dt;
                        if grid.at_or_after(k, dir.start) {
                            total += cost_along(perf, &cp, &dir) * dt;
                        }
                        b += db[k];
                    }
                    let tp = TerminalPoint {
                        x: bundle.state(i, m),
                        m: bundle.law_values(m),
                        particle: i,
                        brownian: b,
                    };
                    total + perf.terminal_dx(&tp) * zi[m]
                })
                .collect();
            Some(Estimate::from_samples(&samples))
        }
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };

    let fd_slope = Estimate::from_samples(&extrapolated);
    let adjoint_slope = Estimate::from_samples(&adjoint_samples);
    let difference = paired_difference(&extrapolated, &adjoint_samples);
    let tolerance = (3.0 * difference.std_error).max(0.05 * adjoint_slope.mean.abs());
    Ok(GateauxReport {
        fd_slopes: lambdas
            .iter()
            .zip(&quotients)
            .map(|(&l, q)| (l, Estimate::from_samples(q)))
            .collect(),
        fd_slope,
        adjoint_slope,
        z_slope,
        difference,
        agree: difference.mean.abs() <= tolerance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lawproc::LevyMeasure;
    use crate::measures::{gauss_hermite_rule, DiscreteMeasure};
    use crate::sde::{FnDynamics, FnPerformance};
    use num_complex::Complex64;

    fn null_spec() -> GameSpec {
        let dynamics = FnDynamics {
            drift: |_: &Point| 0.0,
            diffusion: |_: &Point| 0.0,
            jump: |_: &Point, _| 0.0,
        };
        let model = ControlledModel::new(Arc::new(dynamics), vec![], LevyMeasure::none(), 0.0, 1.0)
            .unwrap();
        let one: Arc<dyn Performance> = Arc::new(FnPerformance {
            running: |_: &CostPoint| 1.0,
            terminal: |_: &TerminalPoint| 0.0,
        });
        GameSpec::new(model, one.clone(), one)
    }

    #[test]
    fn null_hamiltonian_is_the_running_cost() {
        let spec = null_spec();
        let p = CostPoint {
            t: 0.3,
            x: 1.0,
            m: &[],
            mu: &[],
            u: 0.0,
            particle: 0,
            brownian: 0.0,
        };
        let h = hamiltonian(
            &spec,
            Player::Control,
            &p,
            5.0,
            &ZeroPairing,
            &FourierTable::zeros(0),
        );
        assert_eq!(h, 1.0);
    }

    #[test]
    fn kernel_pairing_is_linear() {
        let quad = gauss_hermite_rule(32, 0).unwrap();
        let kernel = FourierTable::of_measure(&DiscreteMeasure::dirac(0.5), &quad);
        let pairing =
            KernelPairing::new(kernel, quad.clone(), 0, Arc::new(|t: f64| 1.0 - t)).unwrap();
        let a = FourierTable::of_measure(
            &DiscreteMeasure::from_pairs(&[(0.0, 1.0), (1.0, -1.0)]).unwrap(),
            &quad,
        );
        let b = FourierTable::of_measure(&DiscreteMeasure::dirac(-2.0), &quad);
        let sum = a.combine(1.0, &b, 1.0);
        let (pa, pb, ps) = (
            pairing.pair(0.2, &a),
            pairing.pair(0.2, &b),
            pairing.pair(0.2, &sum),
        );
        assert!((ps - pa - pb).abs() < 1e-12);
        assert!((pairing.pair(0.2, &a.scaled(2.0)) - 2.0 * pa).abs() < 1e-12);
        assert_eq!(pairing.pair(1.0, &a), 0.0);
        let zeros = FourierTable::from_values(vec![Complex64::new(0.0, 0.0); quad.len()]);
        assert_eq!(pairing.pair(0.5, &zeros), 0.0);
    }

    #[test]
    fn kernel_pairing_checks_lengths() {
        let quad = gauss_hermite_rule(8, 0).unwrap();
        assert!(KernelPairing::new(FourierTable::zeros(3), quad, 0, Arc::new(|_| 1.0)).is_err());
    }
}
