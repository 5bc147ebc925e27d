use proptest::prelude::*;
use sben_core::dynamics::OracleConfig;
use sben_core::scenarios::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn oscillator_stress_stays_admissible(mass in 0.5..2.0f64, k in 0.5..3.0f64, sy in 0.3..2.0f64, amp in 0.0..4.0f64, v0 in -1.0..1.0f64) {
        let mut p = OscillatorParams::new(mass, k, sy, LoadProgram::HalfSine { amplitude: amp, duration: 2.0 });
        p.v0 = v0;
        let s = build_elastoplastic_oscillator(&p).unwrap();
        let cfg = OracleConfig::new(0.02, 4.0).unwrap();
        let ts = run_scenario(&s, &cfg, Solver::SbenIncremental).unwrap();
        prop_assert!(ts.column("sigma").unwrap().iter().all(|s| s.abs() <= sy + 1e-9));
        prop_assert!(ts.cumulative_dissipation().windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!(ts.functional.to_f64() <= 1e-9);
    }

    #[test]
    fn slider_reaction_stays_in_the_cone(mu in 0.1..1.0f64, tn in 0.0..3.0f64, rate in 0.1..3.0f64, angle in 0.0..std::f64::consts::TAU) {
        let p = SliderParams {
            mass: 1.0,
            stiffness: [1.0, 2.0],
            normal_force: LoadProgram::Constant { value: tn },
            mu,
            drive: LoadProgram::Ramp { rate },
            drive_direction: [angle.cos(), angle.sin()],
        };
        let s = build_coulomb_slider(&p).unwrap();
        let ts = run_scenario(&s, &OracleConfig::new(0.02, 3.0).unwrap(), Solver::SbenIncremental).unwrap();
        let (a, b) = (ts.column("t_t1").unwrap(), ts.column("t_t2").unwrap());
        prop_assert!(a.iter().zip(&b).all(|(x, y)| x.hypot(*y) <= mu * tn + 1e-9));
        prop_assert!(ts.cumulative_dissipation().windows(2).all(|w| w[1] >= w[0] - 1e-12));
    }

    #[test]
    fn stable_crack_never_heals_or_exceeds_toughness(gc in 0.5..2.0f64, a0 in 0.2..2.0f64, peak in 0.5..3.0f64) {
        let load = LoadProgram::Piecewise { points: vec![(0.0, 0.0), (1.0, peak), (2.0, 0.2 * peak)] };
        let p = CrackToyParams { driving_force: DrivingForce::Inverse, toughness: gc, a0, load };
        let s = build_crack_toy(&p).unwrap();
        let ts = run_scenario(&s, &OracleConfig::new(0.02, 2.0).unwrap(), Solver::SbenIncremental).unwrap();
        let a = ts.column("a").unwrap();
        prop_assert!(a.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(ts.column("G").unwrap().iter().all(|g| *g <= gc + 1e-9));
    }
}
