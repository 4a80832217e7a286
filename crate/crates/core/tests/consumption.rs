use std::sync::Arc;

use mfgame::consumption::*;
use mfgame::lawproc::LevyMeasure;
use mfgame::measures::Interval;
use mfgame::sde::*;

#[test]
fn closed_forms_at_a_glance() {
    assert!((rho_hat(0.0, 1.0, 0.0) - 1.0).abs() < 1e-15);
    assert!((rho_hat(0.5, 1.0, 1.0) - 1.0 / 1.5).abs() < 1e-15);
    let derived = mu_hat_v(MuVariant::Derived, 0.25, 1.0, 1.0, 1.0);
    assert!((derived - (1.0 - 0.875)).abs() < 1e-15);
    let stated = mu_hat_v(MuVariant::Stated, 0.25, 1.0, 1.0, 1.0);
    assert!((stated - 1.25).abs() < 1e-15);
}

#[test]
fn rho_hat_increases_toward_the_horizon() {
    let ts: Vec<f64> = (0..100).map(|k| k as f64 / 100.0).collect();
    assert!(ts
        .windows(2)
        .all(|w| rho_hat(w[1], 1.0, 0.5) > rho_hat(w[0], 1.0, 0.5)));
}

#[test]
fn invalid_models_are_rejected() {
    let levy = LevyMeasure::single(0.1, 0.5).unwrap();
    assert!(ConsumptionModel::new(0.0, 1.0, 0.2, levy.clone(), Theta::Constant(1.0)).is_err());
    assert!(ConsumptionModel::new(1.0, 1.0, 0.2, levy.clone(), Theta::Constant(0.0)).is_err());
    let crash = LevyMeasure::single(-1.0, 0.5).unwrap();
    assert!(ConsumptionModel::new(1.0, 1.0, 0.2, crash, Theta::Constant(1.0)).is_err());
    let bad = Theta::Brownian {
        f: Arc::new(|b: f64| b),
        lo: -1.0,
        hi: 1.0,
    };
    assert!(ConsumptionModel::new(1.0, 1.0, 0.2, levy, bad).is_err());
}

fn random_theta() -> ConsumptionModel {
    let theta = Theta::Brownian {
        f: Arc::new(|b: f64| 1.0 + 0.5 * b.tanh()),
        lo: 0.5,
        hi: 1.5,
    };
    ConsumptionModel::new(1.0, 1.0, 0.2, LevyMeasure::single(0.1, 0.5).unwrap(), theta).unwrap()
}

#[test]
fn conditional_theta_by_quadrature() {
    let model = random_theta();
    // Odd part integrates out at b = 0; no remaining time returns f(b).
    assert!((model.conditional_theta(0.0, 0.7) - 1.0).abs() < 1e-12);
    assert!((model.conditional_theta(0.3, 0.0) - (1.0 + 0.5 * 0.3f64.tanh())).abs() < 1e-15);
    let quad = model.conditional_theta(0.4, 0.5);
    let n = 200_000;
    let step = 16.0 / n as f64;
    let mc: f64 = (0..n)
        .map(|j| {
            let y = -8.0 + (j as f64 + 0.5) * step;
            let w = (-y * y / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt();
            w * (1.0 + 0.5 * (0.4 + 0.5f64.sqrt() * y).tanh()) * step
        })
        .sum();
    assert!((quad - mc).abs() < 1e-9, "{quad} vs {mc}");
}

#[test]
fn concavity_signs_hold() {
    let model = ConsumptionModel::baseline();
    for p in concavity_probe(&model, 20, 11).unwrap() {
        assert!(p[0] < 0.0 && p[1] < 0.0 && p[2] > 0.0, "{p:?}");
    }
}

#[test]
fn product_process_is_deterministic() {
    let model = ConsumptionModel::baseline();
    let spec = model.game().unwrap();
    let pair = closed_form_controls(&model).pair(MuVariant::Derived, 1.0, 0.0);
    let bundle = simulate(&spec.model, &pair, 500, 50, 5, MuMode::Exogenous).unwrap();
    let est = mfgame::bsde::Estimator::Regression {
        basis: adjoint_basis(),
        regressor: mfgame::bsde::Regressor::states(&bundle),
        delay_steps: 0,
    };
    let adj = mfgame::game::solve_adjoints(&spec, &bundle, &est).unwrap();
    let (dev, profile) = product_process_check(&model, &bundle, &adj[1]);
    assert_eq!(profile.len(), 51);
    assert!(dev < 1e-6, "{dev}");
}

#[test]
fn pipeline_accepts_the_derived_variant() {
    let model = ConsumptionModel::baseline();
    let report = verify_section5(&model, 2_000, 50, 42).unwrap();
    for row in &report.rows {
        assert!(row.pass, "{row:?}");
    }
    assert_eq!(report.accepted, Some(MuVariant::Derived));
    assert!(report.passed());
    let stated = &report
        .residuals
        .iter()
        .find(|(v, _)| *v == MuVariant::Stated)
        .unwrap()
        .1;
    // The stated variant misses by exactly 2(μ − M) + p⁰X = 3(T − t).
    for (t, e) in stated.times.iter().zip(&stated.measure[0]) {
        assert!((e.mean.abs() - 3.0 * (1.0 - t)).abs() < 1e-6, "{t}: {e:?}");
    }
    let controls = String::from_utf8(report.controls_csv().to_bytes().unwrap()).unwrap();
    assert!(controls.starts_with("t,rho_hat,mu_hat_V_paper,mu_hat_V_derived\n"));
    let csv = String::from_utf8(report.report_csv().to_bytes().unwrap()).unwrap();
    assert!(csv.starts_with("criterion,value,threshold,pass\n"));
    assert!(csv.contains("# seed=42"));
}

#[test]
fn inflated_consumption_is_profitably_reduced() {
    let model = ConsumptionModel::baseline();
    let report = verify_section5(&model, 1_000, 40, 7).unwrap();
    let gains: Vec<_> = report
        .inflated_sweep
        .rows
        .iter()
        .filter(|r| r.player == Player::Control && r.lambda < 0.0)
        .collect();
    assert!(gains.iter().any(|r| r.delta > 2.0 * r.std_error));
}

#[test]
fn shifted_scenario_breaks_the_measure_side() {
    let model = ConsumptionModel::baseline();
    let spec = model.game().unwrap();
    let pair = closed_form_controls(&model).pair(MuVariant::Derived, 1.0, 0.5);
    let bundle = simulate(&spec.model, &pair, 1_000, 40, 8, MuMode::Exogenous).unwrap();
    let table = mfgame::game::nash_perturbation_sweep(
        &spec,
        &bundle,
        &saddle_plan(&model, SADDLE_LAMBDAS.to_vec()),
    )
    .unwrap();
    assert!(!table.holds_for(Player::Measure, 2.0));
}

#[test]
fn random_theta_product_has_the_right_mean() {
    let model = random_theta();
    let spec = model.game().unwrap();
    let pair = closed_form_controls(&model).pair(MuVariant::Derived, 1.0, 0.0);
    let bundle = simulate(&spec.model, &pair, 4_000, 40, 12, MuMode::Exogenous).unwrap();
    let est = mfgame::bsde::Estimator::Regression {
        basis: adjoint_basis(),
        regressor: mfgame::bsde::Regressor::states(&bundle),
        delay_steps: 0,
    };
    let adj = mfgame::game::solve_adjoints(&spec, &bundle, &est).unwrap();
    // X(0) = x0 on every path, so p⁰(0)X(0) is the sample mean of the targets.
    let p0 = adj[1].mean(0) * model.x0;
    let expected = model.conditional_theta(0.0, model.horizon) + model.horizon;
    assert!(
        (p0 - expected).abs() < 3.0 * adj[1].std_error(0) * model.x0,
        "{p0} vs {expected}"
    );
}

#[test]
fn delayed_information_pipeline_runs() {
    let model = random_theta()
        .with_info([InfoPattern::Delay(0.1), InfoPattern::Delay(0.1)])
        .unwrap();
    let report = verify_section5(&model, 1_000, 40, 9).unwrap();
    assert!(report.row("positivity_min_state").unwrap().pass);
    assert!(report.row("zero_sum_consistency").unwrap().pass);
    assert!(report.row("concavity_probe").unwrap().pass);
    let stated = report.row("residual_max_abs_paper").unwrap().value;
    let derived = report.row("residual_max_abs_derived").unwrap().value;
    assert!(derived < 0.05 && stated > 2.5, "{derived} {stated}");
}

#[test]
fn bounded_v_is_accepted() {
    let model = ConsumptionModel::baseline().with_v(Interval::new(0.5, 2.0).unwrap());
    let report = verify_section5(&model, 500, 20, 3).unwrap();
    assert!(report.row("positivity_min_state").unwrap().pass);
}
