//! The experiment catalogue. Each experiment returns named checks and the
//! CSV tables it produced; writing them is left to the caller.

use std::f64::consts::PI;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use mfgame::bsde::{
    backward_euler, solve, Coefficients, Estimator, LinearBsdeSpec, NoiseCoefficients, Regressor,
};
use mfgame::consumption::{
    adjoint_basis, closed_form_controls, saddle_plan, verify_section5, ConsumptionModel, MuVariant,
    Theta,
};
use mfgame::game::{gateaux_check, nash_perturbation_sweep, solve_adjoints, GameSpec};
use mfgame::lawproc::{
    abs_continuity_scan, binned_normal_law, dirac_drift_path, law_derivative_fd, loglog_slope,
    poisson_law, uniform_times, LevyMeasure, MeasurePath,
};
use mfgame::measures::{
    gauss_hermite_rule, law_distance_bound_check, measure_norm_sq, trapezoid_rule, Atom,
    DiscreteMeasure, FourierTable, QuadratureRule,
};
use mfgame::output::{num, CsvTable};
use mfgame::sde::{
    l2_derivative_error, mean_and_se, replay, simulate, simulate_derivative_process, ControlPair,
    ControlledModel, Direction, FnDynamics, InfoPattern, MuMode, ParticleBundle, Player, Point,
    TimeGrid,
};

use crate::config::{Experiment, ModelConfig, Settings};
use crate::CliError;

/// One pass/fail line.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub threshold: String,
    pub pass: bool,
}

impl Check {
    fn new(name: impl Into<String>, value: f64, threshold: impl Into<String>, pass: bool) -> Self {
        Self {
            name: name.into(),
            value,
            threshold: threshold.into(),
            pass,
        }
    }

    /// `value ≤ bound`.
    fn at_most(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self::new(name, value, format!("<= {bound:e}"), value <= bound)
    }

    pub fn summary(&self) -> String {
        let tag = if self.pass { "PASS" } else { "FAIL" };
        format!(
            "{tag} {} value={} threshold={}",
            self.name,
            num(self.value),
            self.threshold
        )
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub experiment: Experiment,
    pub checks: Vec<Check>,
    /// `(file name, table)`.
    pub tables: Vec<(String, CsvTable)>,
}

impl Outcome {
    fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            checks: Vec::new(),
            tables: Vec::new(),
        }
    }

    fn table(&mut self, name: &str, table: CsvTable) {
        self.tables.push((format!("{name}.csv"), table));
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn csv(&self, file: &str) -> Option<&CsvTable> {
        self.tables.iter().find(|(n, _)| n == file).map(|(_, t)| t)
    }

    pub fn write(&self, dir: &Path) -> Result<(), CliError> {
        std::fs::create_dir_all(dir)?;
        for (name, table) in &self.tables {
            table.save(dir.join(name))?;
        }
        Ok(())
    }
}

/// `name  description  (n=…, m=…)`, one line per experiment.
pub fn catalogue() -> Vec<String> {
    Experiment::ALL
        .iter()
        .map(|e| {
            let (n, m) = e.default_sizes();
            format!(
                "{:<15} {} (defaults: n={n}, m={m}, seed=42)",
                e.name(),
                e.description()
            )
        })
        .collect()
}

pub fn run(s: &Settings) -> Result<Outcome, CliError> {
    s.validate()?;
    let outcome = match s.experiment {
        Experiment::Norms => norms(s)?,
        Experiment::LawDistance => law_distance(s)?,
        Experiment::LawDerivative => law_derivative(s)?,
        Experiment::SdeMoments => sde_moments(s)?,
        Experiment::BsdeOracles => bsde_oracles(s)?,
        Experiment::Gateaux => gateaux(s)?,
        Experiment::NashSweep => nash_sweep(s)?,
        Experiment::Consumption => consumption(s)?,
    };
    Ok(outcome)
}

fn quad(s: &Settings) -> Result<QuadratureRule, CliError> {
    Ok(gauss_hermite_rule(s.quad_n, 0)?)
}

fn norms(s: &Settings) -> Result<Outcome, CliError> {
    let q = quad(s)?;
    let trap = trapezoid_rule(12.0, 4001, 0)?;
    let mut out = Outcome::new(s.experiment);
    let mut table = CsvTable::new(
        &[
            "measure",
            "k",
            "value",
            "expected",
            "abs_error",
            "trapezoid",
        ],
        None,
    );
    let mut row =
        |label: String, k: u32, m: &DiscreteMeasure, expected: f64| -> Result<f64, CliError> {
            let v = measure_norm_sq(m, k, &q)?;
            let t = measure_norm_sq(m, k, &trap)?;
            table.push(vec![
                label,
                k.to_string(),
                num(v),
                num(expected),
                num((v - expected).abs()),
                num(t),
            ]);
            Ok((v - expected).abs())
        };
    for x in [0.0, 1.0, -3.7] {
        let err = row(
            format!("dirac({x})"),
            0,
            &DiscreteMeasure::dirac(x),
            PI.sqrt(),
        )?;
        out.checks
            .push(Check::at_most(format!("norm_m0_dirac_{x}"), err, 1e-10));
    }
    let err = row(
        "dirac(0)".into(),
        2,
        &DiscreteMeasure::dirac(0.0),
        PI.sqrt() / 2.0,
    )?;
    out.checks
        .push(Check::at_most("norm_m2_dirac_0", err, 1e-10));
    out.table("norms", table);
    Ok(out)
}

pub const BOUND_INSTANCES: usize = 100;

fn law_distance(s: &Settings) -> Result<Outcome, CliError> {
    let q = quad(s)?;
    let mut out = Outcome::new(s.experiment);
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let mut table = CsvTable::new(&["instance", "lhs", "rhs", "holds"], Some(s.seed));
    let mut violations = 0;
    for inst in 0..BOUND_INSTANCES {
        let (loc, scale) = (rng.random_range(-2.0..2.0), rng.random_range(0.1..3.0));
        let (a, b, e) = (
            rng.random_range(0.5..1.5),
            rng.random_range(-1.0..1.0),
            rng.random_range(0.0..1.0),
        );
        let mut x1 = Vec::with_capacity(s.n);
        let mut x2 = Vec::with_capacity(s.n);
        for _ in 0..s.n {
            let z: f64 = rng.sample(StandardNormal);
            let w: f64 = rng.sample(StandardNormal);
            let x = loc + scale * z;
            x1.push(x);
            x2.push(a * x + b + e * w);
        }
        let c = law_distance_bound_check(&x1, &x2, &q)?;
        violations += usize::from(!c.holds);
        table.push(vec![
            inst.to_string(),
            num(c.lhs),
            num(c.rhs),
            c.holds.to_string(),
        ]);
    }
    out.checks.push(Check::new(
        "law_bound_random_violations",
        violations as f64,
        "0",
        violations == 0,
    ));
    out.table("law_bound", table);

    let mut dirac = CsvTable::new(&["c", "value", "exact", "abs_error"], None);
    for c in [0.1, 1.0, 3.0] {
        let d = &DiscreteMeasure::dirac(0.0) - &DiscreteMeasure::dirac(c);
        let v = measure_norm_sq(&d, 0, &q)?;
        let exact = 2.0 * PI.sqrt() * (1.0 - (-c * c / 4.0).exp());
        dirac.push(vec![num(c), num(v), num(exact), num((v - exact).abs())]);
        out.checks.push(Check::at_most(
            format!("law_bound_dirac_{c}"),
            (v - exact).abs(),
            1e-8,
        ));
    }
    out.table("law_bound_dirac", dirac);
    Ok(out)
}

fn table_error(fd: &FourierTable, exact: &FourierTable, q: &QuadratureRule) -> f64 {
    fd.combine(1.0, exact, -1.0).norm_sq(0, q).sqrt()
}

pub const LAW_DERIVATIVE_STEP: f64 = 0.01;

fn law_derivative(s: &Settings) -> Result<Outcome, CliError> {
    let q = quad(s)?;
    let h = LAW_DERIVATIVE_STEP;
    let mut out = Outcome::new(s.experiment);
    let mut table = CsvTable::new(&["case", "h", "m0_error", "threshold"], None);

    // N(0, t): d/dt of e^{-ty²/2} is -y²/2 e^{-ty²/2}.
    let normal = MeasurePath::from_fn(vec![1.0 - h, 1.0, 1.0 + h], |t| {
        binned_normal_law(0.0, t.sqrt(), 12.0, 6000).expect("valid")
    })?;
    let exact = FourierTable::from_values(
        q.nodes()
            .iter()
            .map(|&y| Complex64::new(-0.5 * y * y * (-0.5 * y * y).exp(), 0.0))
            .collect(),
    );
    let err = table_error(&law_derivative_fd(&normal, 1, &q)?, &exact, &q);
    table.push(vec!["brownian".into(), num(h), num(err), num(1e-3)]);
    out.checks
        .push(Check::at_most("law_derivative_brownian", err, 1e-3));

    // Poisson(λ̄t): d/dt p_k = λ̄(p_{k-1} - p_k).
    let rate = 1.0;
    let poisson = MeasurePath::from_fn(vec![1.0 - h, 1.0, 1.0 + h], |t| poisson_law(rate, t, 60))?;
    let p = poisson_law(rate, 1.0, 61);
    let w = p.atoms();
    let derivative = DiscreteMeasure::new(
        (0..=61)
            .map(|k| {
                let prev = if k == 0 { 0.0 } else { w[k - 1].weight };
                Atom::new(k as f64, rate * (prev - w[k].weight))
            })
            .collect(),
    )?;
    let err = table_error(
        &law_derivative_fd(&poisson, 1, &q)?,
        &FourierTable::of_measure(&derivative, &q),
        &q,
    );
    table.push(vec!["poisson".into(), num(h), num(err), num(1e-4)]);
    out.checks
        .push(Check::at_most("law_derivative_poisson", err, 1e-4));
    out.table("law_derivative", table);

    let mut scaling = CsvTable::new(&["path", "h", "max_increment_sq"], Some(s.seed));
    let dirac = dirac_drift_path(uniform_times(0.0, 1.0, s.m))?;
    let scan = abs_continuity_scan(&dirac, &q)?;
    for &(hh, v) in &scan {
        scaling.push(vec!["dirac_drift".into(), num(hh), num(v)]);
    }
    let slope = loglog_slope(&scan, 0.0, 1.0).unwrap_or(f64::NAN);
    out.checks.push(Check::new(
        "scaling_dirac_drift_slope",
        slope,
        ">= 1.8",
        slope >= 1.8,
    ));

    let bundle = brownian_particles(s)?;
    let scan = abs_continuity_scan(&bundle.law_path()?, &q)?;
    for &(hh, v) in &scan {
        scaling.push(vec!["brownian_particles".into(), num(hh), num(v)]);
    }
    let dt = 1.0 / s.m as f64;
    let slope = loglog_slope(&scan, dt, 8.0 * dt).unwrap_or(f64::NAN);
    out.checks.push(Check::new(
        "scaling_brownian_particles_slope",
        slope,
        "in [1.6, 2.2]",
        (1.6..=2.2).contains(&slope),
    ));
    out.table("scaling", scaling);
    Ok(out)
}

fn brownian_particles(s: &Settings) -> Result<ParticleBundle, CliError> {
    let dynamics = FnDynamics {
        drift: |_: &Point| 0.0,
        diffusion: |_: &Point| 1.0,
        jump: |_: &Point, _| 0.0,
    };
    let model = ControlledModel::new(Arc::new(dynamics), vec![], LevyMeasure::none(), 0.0, 1.0)?;
    Ok(simulate(
        &model,
        &ControlPair::constant(vec![], 0.0),
        s.n,
        s.m,
        s.seed,
        MuMode::Exogenous,
    )?)
}

/// `dX = aX dt + sX dB + ∫ jump·ζ X Ñ(dt, dζ)` from `x0 = 1` on `[0, 1]`.
fn geometric(a: f64, sig: f64, levy: LevyMeasure) -> Result<ControlledModel, CliError> {
    let dynamics = FnDynamics {
        drift: move |p: &Point| a * p.x,
        diffusion: move |p: &Point| sig * p.x,
        jump: |p: &Point, z: f64| z * p.x,
    };
    Ok(ControlledModel::new(
        Arc::new(dynamics),
        vec![],
        levy,
        1.0,
        1.0,
    )?)
}

fn sde_moments(s: &Settings) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(s.experiment);
    let mut table = CsvTable::new(
        &["case", "a", "s", "mean", "std_error", "expected", "z_score"],
        Some(s.seed),
    );
    let cases = [
        ("geometric_1", 0.1, 0.2, LevyMeasure::none()),
        ("geometric_2", -0.05, 0.3, LevyMeasure::none()),
        (
            "compensated_jumps",
            0.0,
            0.0,
            LevyMeasure::new(vec![-0.3, 0.5], vec![1.0, 2.0])?,
        ),
    ];
    for (i, (name, a, sig, levy)) in cases.into_iter().enumerate() {
        let model = geometric(a, sig, levy)?;
        let seed = s.seed.wrapping_add(i as u64);
        let bundle = simulate(
            &model,
            &ControlPair::constant(vec![], 0.0),
            s.n,
            s.m,
            seed,
            MuMode::Exogenous,
        )?;
        let (mean, se) = mean_and_se(&bundle.column(s.m));
        let expected = a.exp();
        let z = (mean - expected) / se;
        table.push(vec![
            name.into(),
            num(a),
            num(sig),
            num(mean),
            num(se),
            num(expected),
            num(z),
        ]);
        out.checks.push(Check::new(
            format!("sde_mean_{name}"),
            z.abs(),
            "<= 3 SE",
            z.abs() <= 3.0,
        ));
    }
    out.table("sde_moments", table);
    Ok(out)
}

fn bsde_oracles(s: &Settings) -> Result<Outcome, CliError> {
    let mut out = Outcome::new(s.experiment);
    let theta = s.model.theta;
    let horizon = s.model.horizon;
    let grid = TimeGrid::new(horizon, s.m)?;
    let spec = |phi: f64, alpha: f64| LinearBsdeSpec {
        coefficients: Coefficients::Noise(NoiseCoefficients::constant(phi, alpha, 0.0, 0.0, theta)),
        levy: LevyMeasure::none(),
    };
    let trivial = solve(&spec(0.0, 0.0), grid, 1, &Estimator::ClosedForm, s.seed)?;
    let unit = solve(&spec(1.0, 0.0), grid, 1, &Estimator::ClosedForm, s.seed)?;
    let a = 0.5;
    let exponential = solve(&spec(0.0, a), grid, 1, &Estimator::ClosedForm, s.seed)?;
    let implicit = backward_euler(&spec(0.0, a), grid)?;

    let mut table = CsvTable::new(
        &[
            "t",
            "trivial",
            "unit_driver",
            "unit_exact",
            "exp_gamma",
            "exp_backward_euler",
            "exp_exact",
        ],
        Some(s.seed),
    );
    let (mut dev_trivial, mut dev_unit, mut dev_exp, mut dev_exact) =
        (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (k, &back) in implicit.iter().enumerate() {
        let t = grid.time(k);
        let unit_exact = theta + horizon - t;
        let exp_exact = theta * (a * (horizon - t)).exp();
        dev_trivial = dev_trivial.max((trivial.p(0, k) - theta).abs());
        dev_unit = dev_unit.max((unit.p(0, k) - unit_exact).abs());
        dev_exp = dev_exp.max((exponential.p(0, k) - back).abs());
        dev_exact = dev_exact.max((exponential.p(0, k) - exp_exact).abs());
        table.push(vec![
            num(t),
            num(trivial.p(0, k)),
            num(unit.p(0, k)),
            num(unit_exact),
            num(exponential.p(0, k)),
            num(back),
            num(exp_exact),
        ]);
    }
    let tol = 2.0 * grid.dt() * a * theta;
    out.checks
        .push(Check::at_most("bsde_trivial", dev_trivial, 1e-12));
    out.checks
        .push(Check::at_most("bsde_unit_driver", dev_unit, 1e-12));
    out.checks.push(Check::at_most(
        "bsde_exponential_vs_backward_euler",
        dev_exp,
        tol,
    ));
    out.checks
        .push(Check::at_most("bsde_exponential_vs_exact", dev_exact, tol));
    out.table("bsde_oracles", table);
    Ok(out)
}

fn consumption_model(s: &Settings) -> Result<ConsumptionModel, CliError> {
    let md: &ModelConfig = &s.model;
    let levy = if md.jump_rate > 0.0 {
        LevyMeasure::single(md.jump_size, md.jump_rate)?
    } else {
        LevyMeasure::none()
    };
    let model =
        ConsumptionModel::new(md.x0, md.horizon, md.sigma, levy, Theta::Constant(md.theta))?;
    let info = if s.delay > 0.0 {
        InfoPattern::Delay(s.delay)
    } else {
        InfoPattern::Full
    };
    Ok(model.with_info([info; 2])?)
}

/// Consumption game, its candidate bundle under the derived controls, and
/// both adjoints.
fn consumption_candidate(
    s: &Settings,
) -> Result<
    (
        ConsumptionModel,
        GameSpec,
        ParticleBundle,
        [mfgame::bsde::BsdeSolution; 2],
    ),
    CliError,
> {
    let model = consumption_model(s)?;
    let spec = model.game()?;
    let pair = closed_form_controls(&model).pair(MuVariant::Derived, 1.0, 0.0);
    let bundle = simulate(&spec.model, &pair, s.n, s.m, s.seed, MuMode::Exogenous)?;
    let est = Estimator::Regression {
        basis: adjoint_basis(),
        regressor: Regressor::states(&bundle),
        delay_steps: 0,
    };
    let adjoints = solve_adjoints(&spec, &bundle, &est)?;
    Ok((model, spec, bundle, adjoints))
}

fn gateaux(s: &Settings) -> Result<Outcome, CliError> {
    let mut lambdas: Vec<f64> = s.lambdas.iter().map(|l| l.abs()).collect();
    lambdas.sort_by(|a, b| b.total_cmp(a));
    lambdas.dedup();
    let (model, spec, bundle, adjoints) = consumption_candidate(s)?;
    let mut out = Outcome::new(s.experiment);
    let mut errors = CsvTable::new(
        &["direction", "lambda", "l2_error", "fd_slope", "fd_std_err"],
        Some(s.seed),
    );
    let mut slopes = CsvTable::new(
        &[
            "direction",
            "fd_slope",
            "fd_std_err",
            "adjoint_slope",
            "adjoint_std_err",
            "z_slope",
            "difference_std_err",
        ],
        Some(s.seed),
    );
    let directions = [
        (
            "control",
            Direction::Control {
                start: 0.0,
                amplitude: 1.0,
            },
            Player::Control,
        ),
        (
            "measure",
            Direction::Measure {
                start: 0.0,
                eta: DiscreteMeasure::dirac(model.v.interior_point()),
            },
            Player::Measure,
        ),
    ];
    for (name, dir, player) in directions {
        let values = dir.coordinates(&spec.model);
        let z = simulate_derivative_process(&bundle, &spec.model, &values)?;
        let report = gateaux_check(
            &spec,
            player,
            &bundle,
            &adjoints[mfgame::game::index(player)],
            &dir,
            &lambdas,
        )?;
        let mut l2 = Vec::with_capacity(lambdas.len());
        for (&lambda, (_, q)) in lambdas.iter().zip(&report.fd_slopes) {
            let moved = replay(&spec.model, &bundle, Some((&values, lambda)), spec.u_bounds)?;
            let e = l2_derivative_error(&bundle, &moved, &z, lambda);
            errors.push(vec![
                name.into(),
                num(lambda),
                num(e),
                num(q.mean),
                num(q.std_error),
            ]);
            l2.push(e);
        }
        let monotone = l2.windows(2).all(|w| w[1] < w[0]);
        out.checks.push(Check::new(
            format!("gateaux_{name}_l2_error_decreasing"),
            l2.last().copied().unwrap_or(f64::NAN),
            "strictly decreasing",
            monotone,
        ));
        let tol = (3.0 * report.difference.std_error).max(0.05 * report.adjoint_slope.mean.abs());
        out.checks.push(Check::new(
            format!("gateaux_{name}_fd_vs_adjoint"),
            (report.fd_slope.mean - report.adjoint_slope.mean).abs(),
            format!("<= max(3 SE, 5%) = {}", num(tol)),
            report.agree,
        ));
        slopes.push(vec![
            name.into(),
            num(report.fd_slope.mean),
            num(report.fd_slope.std_error),
            num(report.adjoint_slope.mean),
            num(report.adjoint_slope.std_error),
            report.z_slope.map(|e| num(e.mean)).unwrap_or_default(),
            num(report.difference.std_error),
        ]);
    }
    out.table("gateaux", errors);
    out.table("gateaux_slopes", slopes);
    Ok(out)
}

fn nash_sweep(s: &Settings) -> Result<Outcome, CliError> {
    let (model, spec, bundle, _) = consumption_candidate(s)?;
    let table = nash_perturbation_sweep(&spec, &bundle, &saddle_plan(&model, s.lambdas.clone()))?;
    let mut out = Outcome::new(s.experiment);
    for player in [Player::Control, Player::Measure] {
        let worst = table
            .rows
            .iter()
            .filter(|r| r.player == player)
            .map(|r| r.delta - 2.0 * r.std_error)
            .fold(f64::NEG_INFINITY, f64::max);
        let name = match player {
            Player::Control => "nash_control_side",
            Player::Measure => "nash_measure_side",
        };
        out.checks.push(Check::new(
            name,
            worst,
            "delta - 2 SE <= 0",
            table.holds_for(player, 2.0),
        ));
    }
    out.table("sweep", table.to_csv());
    Ok(out)
}

fn consumption(s: &Settings) -> Result<Outcome, CliError> {
    let model = consumption_model(s)?;
    let report = verify_section5(&model, s.n, s.m, s.seed)?;
    let mut out = Outcome::new(s.experiment);
    for r in &report.rows {
        out.checks.push(Check::new(
            format!("consumption_{}", r.criterion),
            r.value,
            r.threshold.clone(),
            r.pass,
        ));
    }
    out.table("report", report.report_csv());
    out.table("controls", report.controls_csv());
    for (variant, res) in &report.residuals {
        out.table(
            &format!("residuals_{}_mu", variant.name()),
            res.measure_csv(0),
        );
        out.table(
            &format!("residuals_{}_u", variant.name()),
            res.control_csv(),
        );
    }
    out.table("sweep", report.sweep.to_csv());
    out.table("sweep_inflated", report.inflated_sweep.to_csv());
    Ok(out)
}
