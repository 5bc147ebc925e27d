//! Fixtures shared by the solver benchmarks.

use sben_core::scenarios::*;

pub fn pulse_oscillator() -> Scenario {
    build_elastoplastic_oscillator(&OscillatorParams::new(1.0, 1.0, 1.0, LoadProgram::HalfSine { amplitude: 2.0, duration: 3.0 }))
        .expect("valid oscillator")
}

pub fn ramp_slider() -> Scenario {
    build_coulomb_slider(&SliderParams {
        mass: 1.0,
        stiffness: [1.0, 1.0],
        normal_force: LoadProgram::Constant { value: 2.0 },
        mu: 0.5,
        drive: LoadProgram::Ramp { rate: 2.0 },
        drive_direction: [1.0, 0.0],
    })
    .expect("valid slider")
}

pub fn loaded_crack() -> Scenario {
    build_crack_toy(&CrackToyParams {
        driving_force: DrivingForce::Inverse,
        toughness: 1.0,
        a0: 0.5,
        load: LoadProgram::Piecewise { points: vec![(0.0, 0.0), (2.0, 2.0), (3.0, 0.5)] },
    })
    .expect("valid crack")
}
