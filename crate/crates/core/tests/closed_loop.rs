use multilift_core::scenario::{
    run_scenario, run_scenario_partial, ControllerKind, Group, InitialCondition, LogRecord, ScenarioConfig, Simulation,
};
use multilift_core::Error;

fn short(group: Group, kind: ControllerKind, duration: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::for_group(group, kind);
    cfg.integrator.duration = duration;
    cfg
}

#[test]
fn mass_estimate_stays_bounded_under_group_b() {
    let cfg = short(Group::B, ControllerKind::Sanm, 20.0);
    let m_max = cfg.sanm.m_max;
    let mut sim = Simulation::new(cfg).unwrap();
    while !sim.finished() {
        sim.step().unwrap();
        let s = &sim.state().sanm;
        assert!(s.m_bar.iter().all(|&m| m > 0.0 && m <= 1.05 * m_max), "{:?}", s.m_bar);
        assert!(s.j_bar.iter().all(|&j| j > 0.0));
    }
}

#[test]
fn reciprocal_errors_stay_bounded() {
    for g in Group::ALL {
        let out = run_scenario(&short(g, ControllerKind::Sanm, 5.0)).unwrap();
        let m = &out.metrics;
        assert!(m.final_mass_reciprocal_error.iter().all(|v| v.abs() <= 1.0), "{g:?}");
        assert!(m.final_inertia_reciprocal_error.iter().all(|v| v.is_finite()), "{g:?}");
    }
}

#[test]
fn baseline_keeps_reference_model() {
    let cfg = short(Group::B, ControllerKind::Baseline, 2.0);
    let m0 = cfg.model.m0;
    let out = run_scenario(&cfg).unwrap();
    assert!(out.final_state.sanm.m_bar.iter().all(|&m| m == m0));
    assert!(out.log.iter().all(|r| r.phi_x.iter().all(|&v| v == 0.0)));
}

#[test]
fn log_rows_follow_schema() {
    let mut cfg = short(Group::D, ControllerKind::Sanm, 0.1);
    cfg.log_every = 10;
    let out = run_scenario(&cfg).unwrap();
    assert_eq!(out.log.len(), 10);
    assert_eq!(out.control_evaluations, 100);
    let cols = LogRecord::header(3).len();
    for r in &out.log {
        let v = r.values();
        assert_eq!(v.len(), cols);
        assert_eq!(&LogRecord::from_values(3, &v).unwrap(), r);
    }
    assert!(out.log.windows(2).all(|w| (w[1].t - w[0].t - 0.01).abs() < 1e-12));
}

#[test]
fn divergence_is_reported_with_partial_log() {
    let mut cfg = short(Group::B, ControllerKind::Baseline, 1.0);
    cfg.divergence_bound = 2.0;
    assert!(matches!(run_scenario(&cfg), Err(Error::Diverged { .. })));
    let (out, err) = run_scenario_partial(&cfg).unwrap();
    assert!(matches!(err, Some(Error::Diverged { t }) if t < 1.0));
    assert!(out.log.len() < 1000);
}

#[test]
fn invalid_configs_are_rejected_before_running() {
    let mut cfg = short(Group::A, ControllerKind::Sanm, 1.0);
    cfg.integrator.h = 0.0;
    assert!(matches!(run_scenario(&cfg), Err(Error::InvalidConfig(_))));
    let mut cfg = short(Group::A, ControllerKind::Sanm, 1.0);
    cfg.sanm.m_max = 0.5;
    assert!(matches!(run_scenario(&cfg), Err(Error::InvalidConfig(_))));
    let mut cfg = short(Group::A, ControllerKind::Sanm, 1.0);
    cfg.gains.k_d.x = -1.0;
    assert!(run_scenario(&cfg).is_err());
}

#[test]
fn at_rest_start_matches_reference_pose() {
    let mut cfg = short(Group::A, ControllerKind::Baseline, 0.01);
    cfg.initial = InitialCondition::AtRest;
    let s = cfg.initial_state().unwrap();
    assert_eq!(s.system.payload.v.norm(), 0.0);
    let mut on = cfg.clone();
    on.initial = InitialCondition::OnReference;
    let s2 = on.initial_state().unwrap();
    assert_eq!(s.system.payload.x, s2.system.payload.x);
    assert!(s2.system.payload.v.norm() > 0.0);
}

#[test]
fn runs_are_repeatable() {
    let cfg = short(Group::C, ControllerKind::Sanm, 6.0);
    let a = run_scenario(&cfg).unwrap();
    let b = run_scenario(&cfg).unwrap();
    assert_eq!(a.log, b.log);
    assert_eq!(a.metrics, b.metrics);
}
