use sben_core::dynamics::{oracle_trajectory, DissipationLaw, HamiltonianSystem, OracleConfig};
use sben_core::path::DiscretePath;
use sben_core::sben::*;
use sben_core::scenarios::*;
use sben_core::ExtReal;

fn pulse() -> Scenario {
    build_elastoplastic_oscillator(&OscillatorParams::new(1.0, 1.0, 1.0, LoadProgram::HalfSine { amplitude: 2.0, duration: 3.0 })).unwrap()
}

/// `Σ‖ż − X_H(z_{k+1})‖·dt` along the analytic flow sampled on the grid.
fn sampled_flow_residual(dt: f64) -> f64 {
    let sys = HamiltonianSystem::unit_oscillator();
    let n = (2.0 / dt).round() as usize;
    let nodes: Vec<Vec<f64>> = (0..=n).map(|k| vec![(k as f64 * dt).cos(), -(k as f64 * dt).sin()]).collect();
    let path = DiscretePath::uniform(dt, nodes).unwrap();
    (0..n)
        .map(|k| {
            let (_, zi) = step_velocities(&sys, path.flat(k), path.flat(k + 1), path.times()[k + 1], dt);
            zi.iter().map(|v| v * v).sum::<f64>().sqrt() * dt
        })
        .sum()
}

#[test]
fn halving_dt_halves_the_flow_residual() {
    for dt in [0.04, 0.02, 0.01] {
        let ratio = sampled_flow_residual(dt) / sampled_flow_residual(dt / 2.0);
        assert!((1.6..=2.4).contains(&ratio), "dt {dt}: ratio {ratio}");
    }
}

#[test]
fn sampled_flow_is_inadmissible_for_the_reversible_law() {
    let sys = HamiltonianSystem::unit_oscillator();
    let law = DissipationLaw::reversible(1);
    let dt = 0.01;
    let nodes: Vec<Vec<f64>> = (0..=10).map(|k| vec![(k as f64 * dt).cos(), -(k as f64 * dt).sin()]).collect();
    let (pi, _) = assemble_functional(&DiscretePath::uniform(dt, nodes).unwrap(), &law, &sys).unwrap();
    assert_eq!(pi, ExtReal::PosInf);
}

#[test]
fn global_descent_from_the_oracle_path_finds_nothing_to_remove() {
    let s = pulse();
    let cfg = OracleConfig::new(0.05, 6.0).unwrap();
    let law = s.law.clone();
    let oracle = oracle_trajectory(&s.sys, &law, s.resolver.as_deref(), &s.z0, &cfg).unwrap();
    let g = minimize_global(&s.problem(), &oracle, &GlobalOptions::default()).unwrap();
    let (p0, p1) = (g.history[0], *g.history.last().unwrap());
    assert!(p0.abs() < 1e-12 && p1 <= p0 && p0 - p1 <= 1e-12);
}

#[test]
fn single_step_global_equals_incremental() {
    let s = pulse();
    let cfg = SbenConfig::new(0.5, 0.5).unwrap();
    let inc = minimize_incremental(&s.problem(), &s.z0, &cfg).unwrap();
    let start = DiscretePath::uniform(0.5, vec![s.z0.clone(), inc.path.flat(1).to_vec()]).unwrap();
    let g = minimize_global(&s.problem(), &start, &GlobalOptions::default()).unwrap();
    assert_eq!(g.path.flat(1), inc.path.flat(1));
}

#[test]
fn global_descent_is_monotone_from_a_perturbed_path() {
    let s = pulse();
    let dt = 0.1;
    let inc = minimize_incremental(&s.problem(), &s.z0, &SbenConfig::new(dt, 6.0).unwrap()).unwrap();
    let prob = s.problem();
    let reduced: Vec<Vec<f64>> =
        inc.reduced.iter().enumerate().map(|(k, r)| vec![(r[0] + 0.3 * (k as f64).sin()).clamp(-1.0, 1.0)]).collect();
    let start = assemble_path(prob.reduction, inc.path.times(), &s.z0, &reduced).unwrap();
    for window in [1, 4] {
        let g = minimize_global(&prob, &start, &GlobalOptions { window, ..GlobalOptions::default() }).unwrap();
        assert!(g.history.windows(2).all(|w| w[1] <= w[0]), "window {window}");
        assert!(g.history.last().unwrap() < &g.history[0]);
    }
}

#[test]
fn residual_profile_locates_dissipation() {
    let s = pulse();
    let cfg = OracleConfig::new(0.05, 10.0).unwrap();
    let ts = run_scenario(&s, &cfg, Solver::SbenIncremental).unwrap();
    let path = ts.path.as_ref().unwrap();
    let prof = residual_profile(path, &s.law, &s.sys).unwrap();
    let ep = ts.column("eps_p").unwrap();
    for r in &prof {
        let flowing = (ep[r.index + 1] - ep[r.index]).abs() > 1e-12;
        let d = r.dissipation_term.to_f64();
        assert_eq!(flowing, d > 0.0, "step {}", r.index);
    }
}
