use sben_core::dynamics::OracleConfig;
use sben_core::scenarios::*;

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn osc(load: LoadProgram) -> OscillatorParams {
    OscillatorParams::new(1.0, 1.0, 1.0, load)
}

/// Implicit Euler for ρü = f − k u, solved in closed form per step.
fn elastic_reference(p: &OscillatorParams, cfg: &OracleConfig) -> Vec<f64> {
    let (rho, k, dt) = (p.mass, p.stiffness, cfg.dt);
    let (mut u, mut v) = (p.u0, p.v0);
    let mut out = vec![u];
    for n in 1..=cfg.steps() {
        let f = p.load.value(n as f64 * dt);
        // v₁ = v₀ + dt(f − k u₁)/ρ, u₁ = u₀ + dt v₁
        let u1 = (u + dt * v + dt * dt * f / rho) / (1.0 + k * dt * dt / rho);
        v = (u1 - u) / dt;
        u = u1;
        out.push(u);
    }
    out
}

#[test]
fn quasi_static_ramp_and_unload_leaves_half_yield_strain() {
    let mut p = osc(LoadProgram::Piecewise { points: vec![(0.0, 0.0), (1.0, 1.5), (2.0, 0.0)] });
    p.drive = DriveKind::Displacement;
    let s = build_elastoplastic_oscillator(&p).unwrap();
    let cfg = OracleConfig::new(0.01, 2.0).unwrap();
    for solver in [Solver::Oracle, Solver::SbenIncremental] {
        let ts = run_scenario(&s, &cfg, solver).unwrap();
        let ep = ts.column("eps_p").unwrap();
        assert!((ep.last().unwrap() - 0.5).abs() < 1e-12, "{solver:?}: {}", ep.last().unwrap());
        let sigma = ts.column("sigma").unwrap();
        assert!(sigma.iter().all(|s| s.abs() <= 1.0 + 1e-9));
        assert!((ts.total_dissipation - 0.5).abs() < 1e-9, "dissipation {}", ts.total_dissipation);
    }
}

#[test]
fn load_below_yield_stays_elastic() {
    let p = osc(LoadProgram::HalfSine { amplitude: 0.4, duration: 2.0 });
    let s = build_elastoplastic_oscillator(&p).unwrap();
    let cfg = OracleConfig::new(0.01, 6.0).unwrap();
    let ts = run_scenario(&s, &cfg, Solver::SbenIncremental).unwrap();
    assert!(ts.column("eps_p").unwrap().iter().all(|e| e.abs() < 1e-14));
    let u = ts.column("u").unwrap();
    assert!(max_abs_diff(&u, &elastic_reference(&p, &cfg)) <= 1e-12);
    assert_eq!(ts.total_dissipation, 0.0);
}

#[test]
fn huge_yield_stress_recovers_the_elastic_oscillator() {
    let mut p = osc(LoadProgram::HalfSine { amplitude: 2.0, duration: 3.0 });
    p.yield_stress = 1e9;
    p.v0 = 0.5;
    let s = build_elastoplastic_oscillator(&p).unwrap();
    let cfg = OracleConfig::new(0.01, 10.0).unwrap();
    let reference = elastic_reference(&p, &cfg);
    let scale = reference.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for solver in [Solver::Oracle, Solver::SbenIncremental] {
        let u = run_scenario(&s, &cfg, solver).unwrap().column("u").unwrap();
        assert!(max_abs_diff(&u, &reference) <= 1e-8 * scale, "{solver:?}");
    }
}

#[test]
fn dynamic_pulse_above_yield_dissipates_with_small_functional() {
    let p = osc(LoadProgram::HalfSine { amplitude: 2.0, duration: 3.0 });
    let s = build_elastoplastic_oscillator(&p).unwrap();
    let cfg = OracleConfig::new(0.01, 10.0).unwrap();
    let oracle = run_scenario(&s, &cfg, Solver::Oracle).unwrap();
    let sben = run_scenario(&s, &cfg, Solver::SbenIncremental).unwrap();
    assert!(sben.total_dissipation > 0.1);
    let umax = oracle.column("u").unwrap().iter().fold(0.0f64, |m, x| m.max(x.abs()));
    assert!(sben.functional.to_f64().abs() <= 1e-6 * umax * umax);
    let err = max_abs_diff(&oracle.column("u").unwrap(), &sben.column("u").unwrap());
    assert!(err <= 1e-6 * umax);
    for ts in [&oracle, &sben] {
        assert!(ts.column("sigma").unwrap().iter().all(|s| s.abs() <= 1.0 + 1e-9));
        assert!(ts.cumulative_dissipation().windows(2).all(|w| w[1] >= w[0]));
        assert!(ts.records.iter().all(|r| r.gap >= -1e-9));
    }
}

#[test]
fn dilatant_flow_rule_runs_under_sben_only() {
    let mut p = osc(LoadProgram::HalfSine { amplitude: 2.0, duration: 3.0 });
    p.flow = PlasticFlow::Dilatant { mu: 0.5 };
    // the cone is the only limit here; the box just has to contain the path
    p.yield_stress = 10.0;
    p.load_direction = Some(vec![1.0, 0.5]);
    let s = build_elastoplastic_oscillator(&p).unwrap();
    let cfg = OracleConfig::new(0.02, 4.0).unwrap();
    assert!(run_scenario(&s, &cfg, Solver::Oracle).is_err());
    let ts = run_scenario(&s, &cfg, Solver::SbenIncremental).unwrap();
    assert_eq!(ts.columns.len(), 6);
    let (st, sn) = (ts.column("sigma_1").unwrap(), ts.column("sigma_2").unwrap());
    for (a, b) in st.iter().zip(&sn) {
        assert!(a.abs() <= 0.5 * b + 1e-9);
    }
    assert!(ts.records.iter().all(|r| r.gap >= -1e-9));
    assert!(ts.column("eps_p_1").unwrap().last().unwrap().abs() > 0.1);
}

#[test]
fn invalid_oscillator_parameters_are_rejected() {
    let mut p = osc(LoadProgram::default());
    p.stiffness = 0.0;
    assert!(build_elastoplastic_oscillator(&p).is_err());
    let mut p = osc(LoadProgram::default());
    p.yield_stress = -1.0;
    assert!(build_elastoplastic_oscillator(&p).is_err());
}

#[test]
fn zero_load_and_zero_state_give_all_zero_series() {
    let s = build_elastoplastic_oscillator(&osc(LoadProgram::default())).unwrap();
    let cfg = OracleConfig::new(0.1, 2.0).unwrap();
    for solver in Solver::ALL {
        let ts = run_scenario(&s, &cfg, solver).unwrap();
        assert!(ts.records.iter().all(|r| r.values.iter().all(|v| *v == 0.0) && r.gap == 0.0), "{solver:?}");
        assert_eq!(ts.functional.to_f64(), 0.0);
    }
}

fn slider(v: f64, tn: f64) -> SliderParams {
    SliderParams {
        mass: 1.0,
        stiffness: [1.0, 1.0],
        normal_force: LoadProgram::Constant { value: tn },
        mu: 0.5,
        drive: LoadProgram::Ramp { rate: v },
        drive_direction: [1.0, 0.0],
    }
}

#[test]
fn slow_drive_never_slips() {
    // peak stick reaction k V/ω = 0.8 < μ t_n = 1
    let s = build_coulomb_slider(&slider(0.8, 2.0)).unwrap();
    let cfg = OracleConfig::new(0.01, 10.0).unwrap();
    let ts = run_scenario(&s, &cfg, Solver::SbenIncremental).unwrap();
    assert!(ts.column("slip_1").unwrap().iter().all(|s| s.abs() < 1e-12));
    assert!(ts.total_dissipation.abs() < 1e-12);
}

#[test]
fn ramp_drive_sticks_then_slips_at_the_cone() {
    let s = build_coulomb_slider(&slider(2.0, 2.0)).unwrap();
    let cfg = OracleConfig::new(0.005, 3.0).unwrap();
    let ts = run_scenario(&s, &cfg, Solver::SbenIncremental).unwrap();
    let slip = ts.column("slip_1").unwrap();
    let first = (1..slip.len()).find(|&k| (slip[k] - slip[k - 1]).abs() > 1e-12).unwrap();
    let t_star = 0.5f64.asin();
    let t = ts.times();
    assert!(t[first - 1] - cfg.dt <= t_star && t_star <= t[first] + cfg.dt);
    let tt = ts.column("t_t1").unwrap();
    assert!((tt[first].abs() - 1.0).abs() < 1e-9);
    for (a, b) in tt.iter().zip(ts.column("t_t2").unwrap()) {
        assert!((a * a + b * b).sqrt() <= 1.0 + 1e-9);
    }
}

#[test]
fn diagonal_drive_matches_the_trial_state_oracle() {
    let mut p = slider(2.0, 2.0);
    p.drive_direction = [0.6, -0.8];
    p.stiffness = [1.0, 1.7];
    let s = build_coulomb_slider(&p).unwrap();
    let cfg = OracleConfig::new(0.01, 6.0).unwrap();
    let o = run_scenario(&s, &cfg, Solver::Oracle).unwrap();
    let i = run_scenario(&s, &cfg, Solver::SbenIncremental).unwrap();
    for c in ["u_1", "u_2", "slip_1", "slip_2"] {
        let err = max_abs_diff(&o.column(c).unwrap(), &i.column(c).unwrap());
        assert!(err <= 1e-6, "{c}: {err}");
    }
    assert!(o.total_dissipation > 0.1);
}

#[test]
fn frictionless_contact_dissipates_nothing() {
    let s = build_coulomb_slider(&slider(2.0, 0.0)).unwrap();
    let cfg = OracleConfig::new(0.01, 4.0).unwrap();
    for solver in [Solver::Oracle, Solver::SbenIncremental] {
        let ts = run_scenario(&s, &cfg, solver).unwrap();
        assert!(ts.cumulative_dissipation().iter().all(|d| d.abs() < 1e-12));
        assert!(ts.column("t_t1").unwrap().iter().all(|t| t.abs() < 1e-12));
    }
}

#[test]
fn negative_normal_force_is_rejected() {
    let mut p = slider(1.0, 1.0);
    p.normal_force = LoadProgram::Piecewise { points: vec![(0.0, 1.0), (1.0, -0.1)] };
    assert!(build_coulomb_slider(&p).is_err());
}

fn crack(g: DrivingForce, load: LoadProgram) -> CrackToyParams {
    CrackToyParams { driving_force: g, toughness: 1.0, a0: 0.5, load }
}

#[test]
fn subcritical_load_keeps_crack_arrested() {
    let s = build_crack_toy(&crack(DrivingForce::Inverse, LoadProgram::Constant { value: 0.5 })).unwrap();
    let ts = run_scenario(&s, &OracleConfig::new(0.01, 2.0).unwrap(), Solver::SbenIncremental).unwrap();
    assert!(ts.column("a").unwrap().iter().all(|a| *a == 0.5));
}

#[test]
fn stable_crack_tracks_toughness_and_freezes_on_unload() {
    let load = LoadProgram::Piecewise { points: vec![(0.0, 0.0), (2.0, 2.0), (3.0, 0.5)] };
    let s = build_crack_toy(&crack(DrivingForce::Inverse, load.clone())).unwrap();
    let cfg = OracleConfig::new(0.01, 3.0).unwrap();
    for solver in [Solver::Oracle, Solver::SbenIncremental] {
        let ts = run_scenario(&s, &cfg, solver).unwrap();
        let a = ts.column("a").unwrap();
        let g = ts.column("G").unwrap();
        assert!(a.windows(2).all(|w| w[1] >= w[0]));
        assert!(g.iter().all(|g| *g <= 1.0 + 1e-9));
        for (k, t) in ts.times().iter().enumerate() {
            let l = load.value(*t);
            if *t <= 2.0 && l * l > 0.5 {
                assert!((a[k] - l * l).abs() <= 1e-9 * l * l, "{solver:?} t={t}");
            }
        }
        let peak = a[200];
        assert!(a[200..].iter().all(|x| *x == peak));
        assert!((ts.total_dissipation - (peak - 0.5)).abs() < 1e-8);
    }
}

#[test]
fn crack_parameters_are_validated() {
    let mut p = crack(DrivingForce::Inverse, LoadProgram::Constant { value: 1.0 });
    p.a0 = 0.0;
    assert!(build_crack_toy(&p).is_err());
    p.driving_force = DrivingForce::Linear;
    assert!(build_crack_toy(&p).is_ok());
    p.toughness = 0.0;
    assert!(build_crack_toy(&p).is_err());
}

#[test]
fn global_solver_runs_on_each_scenario() {
    let cfg = OracleConfig::new(0.05, 2.0).unwrap();
    let scenarios = [
        build_elastoplastic_oscillator(&osc(LoadProgram::HalfSine { amplitude: 2.0, duration: 1.5 })).unwrap(),
        build_coulomb_slider(&slider(2.0, 2.0)).unwrap(),
        build_crack_toy(&crack(DrivingForce::Inverse, LoadProgram::Ramp { rate: 1.0 })).unwrap(),
    ];
    for s in &scenarios {
        let inc = run_scenario(s, &cfg, Solver::SbenIncremental).unwrap();
        let glo = run_scenario(s, &cfg, Solver::SbenGlobal).unwrap();
        assert!(glo.functional.to_f64() <= inc.functional.to_f64().abs() + 1e-9, "{}", s.name);
    }
}
