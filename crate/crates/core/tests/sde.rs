use std::sync::Arc;

use mfgame::lawproc::LevyMeasure;
use mfgame::measures::{DiscreteMeasure, Interval, MeasureFunctional};
use mfgame::sde::*;

fn linear_model(a: f64, s: f64, jump_scale: f64, levy: LevyMeasure) -> ControlledModel {
    let dynamics = FnDynamics {
        drift: move |p: &Point| a * p.x,
        diffusion: move |p: &Point| s * p.x,
        jump: move |p: &Point, z: f64| jump_scale * z * p.x,
    };
    ControlledModel::new(Arc::new(dynamics), vec![], levy, 1.0, 1.0).unwrap()
}

fn idle() -> ControlPair {
    ControlPair::constant(vec![], 0.0)
}

#[test]
fn null_dynamics_keep_x0() {
    let model = linear_model(0.0, 0.0, 0.0, LevyMeasure::none());
    let bundle = simulate(&model, &idle(), 20, 10, 1, MuMode::Exogenous).unwrap();
    assert!((0..20).all(|i| bundle.path(i).iter().all(|&x| x == 1.0)));
    let laws = bundle.law_path().unwrap();
    assert!(laws
        .values()
        .iter()
        .all(|m| *m == DiscreteMeasure::dirac(1.0)));
}

#[test]
fn geometric_mean_matches_exponential() {
    let model = linear_model(0.1, 0.2, 0.0, LevyMeasure::none());
    let bundle = simulate(&model, &idle(), 20_000, 100, 2, MuMode::Exogenous).unwrap();
    let (mean, se) = bundle.mean_of(100, |x| x);
    assert!((mean - 0.1f64.exp()).abs() < 3.0 * se, "{mean} ± {se}");
}

#[test]
fn compensated_jumps_preserve_the_mean() {
    let levy = LevyMeasure::new(vec![0.3, -0.2], vec![2.0, 1.0]).unwrap();
    let model = linear_model(0.0, 0.0, 1.0, levy);
    let bundle = simulate(&model, &idle(), 20_000, 50, 3, MuMode::Exogenous).unwrap();
    let (mean, se) = bundle.mean_of(50, |x| x);
    assert!((mean - 1.0).abs() < 3.0 * se, "{mean} ± {se}");
    assert!(se > 0.0);
}

#[test]
fn simulation_is_deterministic() {
    let levy = LevyMeasure::single(0.1, 0.5).unwrap();
    let model = linear_model(0.05, 0.3, 1.0, levy);
    let a = simulate(&model, &idle(), 300, 40, 9, MuMode::Exogenous).unwrap();
    let b = simulate(&model, &idle(), 300, 40, 9, MuMode::Exogenous).unwrap();
    assert_eq!(
        a.states_csv().to_bytes().unwrap(),
        b.states_csv().to_bytes().unwrap()
    );
    assert_eq!(
        a.noise().events_csv().to_bytes().unwrap(),
        b.noise().events_csv().to_bytes().unwrap()
    );
}

#[test]
fn zero_replay_reproduces_the_base() {
    let levy = LevyMeasure::single(0.1, 0.5).unwrap();
    let v = MeasureFunctional::MassOn(Interval::positive_half_line());
    let dynamics = FnDynamics {
        drift: |p: &Point| (p.mu[0] - p.u) * p.x,
        diffusion: |p: &Point| 0.2 * p.x,
        jump: |p: &Point, z: f64| z * p.x,
    };
    let model = ControlledModel::new(Arc::new(dynamics), vec![v], levy, 1.0, 1.0).unwrap();
    let controls = ControlPair::constant(vec![0.3], 0.5);
    let base = simulate(&model, &controls, 100, 20, 4, MuMode::Exogenous).unwrap();
    let same = replay(&model, &base, None, controls.u_bounds).unwrap();
    assert_eq!(
        base.states_csv().to_bytes().unwrap(),
        same.states_csv().to_bytes().unwrap()
    );
    let dir = Direction::Control {
        start: 0.5,
        amplitude: 1.0,
    }
    .coordinates(&model);
    let zero = replay(&model, &base, Some((&dir, 0.0)), controls.u_bounds).unwrap();
    assert_eq!(
        base.states_csv().to_bytes().unwrap(),
        zero.states_csv().to_bytes().unwrap()
    );
    let moved = replay(&model, &base, Some((&dir, 0.1)), controls.u_bounds).unwrap();
    // The perturbation starts at T/2, so the first half is untouched.
    assert_eq!(base.path(7)[..=10], moved.path(7)[..=10]);
    assert_ne!(base.path(7)[11], moved.path(7)[11]);
}

#[test]
fn replay_enforces_control_bounds() {
    let model = linear_model(0.0, 0.0, 0.0, LevyMeasure::none());
    let controls = ControlPair::constant(vec![], 0.5).with_bounds(0.0, 1.0);
    let base = simulate(&model, &controls, 5, 4, 0, MuMode::Exogenous).unwrap();
    let dir = Direction::Control {
        start: 0.0,
        amplitude: 1.0,
    }
    .coordinates(&model);
    assert!(matches!(
        replay(&model, &base, Some((&dir, 0.6)), controls.u_bounds),
        Err(mfgame::Error::Inadmissible(_))
    ));
}

#[test]
fn blow_up_names_the_particle() {
    let dynamics = FnDynamics {
        drift: |p: &Point| p.x * p.x * 1e200,
        diffusion: |_: &Point| 0.0,
        jump: |_: &Point, _| 0.0,
    };
    let model =
        ControlledModel::new(Arc::new(dynamics), vec![], LevyMeasure::none(), 1e100, 1.0).unwrap();
    assert!(matches!(
        simulate(&model, &idle(), 3, 4, 0, MuMode::Exogenous),
        Err(mfgame::Error::Simulation { what: "state", .. })
    ));
}

#[test]
fn delayed_observation_lags_the_state() {
    let model = linear_model(0.0, 1.0, 0.0, LevyMeasure::none());
    let seen = Arc::new(std::sync::Mutex::new(Vec::new()));
    let log = seen.clone();
    let u = move |o: &Observation| {
        if o.particle == 0 {
            log.lock()
                .unwrap()
                .push((o.step, o.observed_step, o.brownian));
        }
        0.0
    };
    let controls = ControlPair::new(Arc::new(|_: &Observation, _: &mut [f64]| {}), Arc::new(u))
        .with_info([InfoPattern::Full, InfoPattern::Delay(0.2)]);
    let bundle = simulate(&model, &controls, 4, 10, 5, MuMode::Exogenous).unwrap();
    let levels = bundle.noise().brownian_levels(0);
    let mut seen = seen.lock().unwrap().clone();
    seen.sort_by_key(|s| s.0);
    for (k, ko, b) in seen {
        assert_eq!(ko, k.saturating_sub(2));
        assert!((b - levels[ko]).abs() < 1e-12);
    }
}

#[test]
fn empirical_mode_feeds_back_the_law() {
    // b = mean of the law with no noise: X_{k+1} = (1 + Δt) X_k.
    let dynamics = FnDynamics {
        drift: |p: &Point| p.mu[0],
        diffusion: |_: &Point| 0.0,
        jump: |_: &Point, _| 0.0,
    };
    let model = ControlledModel::new(
        Arc::new(dynamics),
        vec![MeasureFunctional::FirstMoment],
        LevyMeasure::none(),
        1.0,
        1.0,
    )
    .unwrap();
    let controls = ControlPair::constant(vec![0.0], 0.0);
    let bundle = simulate(&model, &controls, 10, 1_000, 6, MuMode::Empirical).unwrap();
    let (mean, _) = bundle.mean_of(1_000, |x| x);
    assert!((mean - 1.001f64.powi(1_000)).abs() < 1e-9, "{mean}");
    assert!((bundle.law_values(1_000)[0] - mean).abs() < 1e-12);
}

#[test]
fn constant_performances() {
    let model = linear_model(0.1, 0.2, 0.0, LevyMeasure::none());
    let bundle = simulate(&model, &idle(), 50, 10, 7, MuMode::Exogenous).unwrap();
    let one = FnPerformance {
        running: |_: &CostPoint| 0.0,
        terminal: |_: &TerminalPoint| 1.0,
    };
    let e = evaluate_performance(&bundle, &one).unwrap();
    assert_eq!((e.mean, e.std_error), (1.0, 0.0));
    let time = FnPerformance {
        running: |_: &CostPoint| 1.0,
        terminal: |_: &TerminalPoint| 0.0,
    };
    let e = evaluate_performance(&bundle, &time).unwrap();
    assert!((e.mean - 1.0).abs() < 1e-12 && e.std_error < 1e-12);
    let neg = Negated(time);
    assert!((evaluate_performance(&bundle, &neg).unwrap().mean + 1.0).abs() < 1e-12);
}

#[test]
fn zero_direction_gives_zero_derivative() {
    let model = linear_model(0.1, 0.2, 0.0, LevyMeasure::none());
    let bundle = simulate(&model, &idle(), 20, 10, 8, MuMode::Exogenous).unwrap();
    let dir = Direction::Control {
        start: 0.0,
        amplitude: 0.0,
    };
    let z = simulate_derivative_process(&bundle, &model, &dir.coordinates(&model)).unwrap();
    assert!(z.is_zero());
}

fn growth_model() -> ControlledModel {
    let v = MeasureFunctional::MassOn(Interval::positive_half_line());
    let dynamics = FnDynamics {
        drift: |p: &Point| p.mu[0] * p.x,
        diffusion: |_: &Point| 0.0,
        jump: |_: &Point, _| 0.0,
    };
    ControlledModel::new(Arc::new(dynamics), vec![v], LevyMeasure::none(), 1.0, 1.0).unwrap()
}

#[test]
fn derivative_process_matches_linear_ode() {
    let model = growth_model();
    let c = 0.4;
    let m = 400;
    let bundle = simulate(
        &model,
        &ControlPair::constant(vec![c], 0.0),
        2,
        m,
        0,
        MuMode::Exogenous,
    )
    .unwrap();
    let dir = Direction::Measure {
        start: 0.0,
        eta: DiscreteMeasure::dirac(1.0),
    };
    let z = simulate_derivative_process(&bundle, &model, &dir.coordinates(&model)).unwrap();
    let dt = 1.0 / m as f64;
    for k in [1, 100, 400] {
        let t = k as f64 * dt;
        // Euler solution k Δt x0 (1 + cΔt)^{k−1}, close to t x0 e^{ct}.
        let discrete = t * (1.0 + c * dt).powi(k as i32 - 1);
        assert!((z.path(0)[k] - discrete).abs() < 1e-8);
        assert!((z.path(1)[k] - t * (c * t).exp()).abs() < 2e-3);
    }
}

#[test]
fn measure_direction_is_rejected_under_feedback() {
    let model = growth_model();
    let bundle = simulate(
        &model,
        &ControlPair::constant(vec![0.0], 0.0),
        2,
        4,
        0,
        MuMode::Empirical,
    )
    .unwrap();
    let dir = Direction::Measure {
        start: 0.0,
        eta: DiscreteMeasure::dirac(1.0),
    };
    assert!(matches!(
        simulate_derivative_process(&bundle, &model, &dir.coordinates(&model)),
        Err(mfgame::Error::Unsupported(_))
    ));
}

#[test]
fn difference_quotients_converge_to_z() {
    let levy = LevyMeasure::single(0.1, 0.5).unwrap();
    let v = MeasureFunctional::MassOn(Interval::positive_half_line());
    let dynamics = FnDynamics {
        drift: |p: &Point| (p.mu[0] - p.u) * p.x,
        diffusion: |p: &Point| 0.2 * p.x * p.mu[0],
        jump: |p: &Point, z: f64| z * p.x,
    };
    let model = ControlledModel::new(Arc::new(dynamics), vec![v], levy, 1.0, 1.0).unwrap();
    let controls = ControlPair::constant(vec![0.5], 0.5);
    let base = simulate(&model, &controls, 2_000, 100, 11, MuMode::Exogenous).unwrap();
    let dir = Direction::Measure {
        start: 0.3,
        eta: DiscreteMeasure::dirac(2.0),
    }
    .coordinates(&model);
    let z = simulate_derivative_process(&base, &model, &dir).unwrap();
    let errors: Vec<f64> = [0.1, 0.05, 0.025]
        .iter()
        .map(|&l| {
            let moved = replay(&model, &base, Some((&dir, l)), controls.u_bounds).unwrap();
            l2_derivative_error(&base, &moved, &z, l)
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}
