//! Ramp-driven Coulomb slider: prints when slip starts and the energy
//! dissipated, from the trial-state oracle and from SBEN minimization.

use sben_core::dynamics::OracleConfig;
use sben_core::scenarios::*;

fn main() -> sben_core::Result<()> {
    let p = SliderParams {
        mass: 1.0,
        stiffness: [1.0, 1.0],
        normal_force: LoadProgram::Constant { value: 2.0 },
        mu: 0.5,
        drive: LoadProgram::Ramp { rate: 2.0 },
        drive_direction: [1.0, 0.0],
    };
    let s = build_coulomb_slider(&p)?;
    let cfg = OracleConfig::new(0.005, 10.0)?;
    for solver in [Solver::Oracle, Solver::SbenIncremental] {
        let ts = run_scenario(&s, &cfg, solver)?;
        let slip = ts.column("slip_1").expect("slider readout");
        let first = (1..slip.len()).find(|&k| (slip[k] - slip[k - 1]).abs() > 1e-12);
        println!(
            "{:>16}: slip starts by t = {:?}, dissipated {:.6}, Π = {:.2e}",
            solver.name(),
            first.map(|k| ts.records[k].t),
            ts.total_dissipation,
            ts.functional.to_f64()
        );
    }
    Ok(())
}
