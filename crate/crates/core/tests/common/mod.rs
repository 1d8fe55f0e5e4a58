#![allow(dead_code)]

use pelletctl_core::{
    ActuatorMode, ActuatorSpec, ControllerSpec, PlantParams, Scenario, ScenarioF64, Variant,
};

pub const TAU: f64 = 0.1;
pub const R: f64 = 5e19;
pub const ALPHA: f64 = 1e19;
pub const TC_70HZ: f64 = 1.0 / 70.0;
pub const TC_140HZ: f64 = 1.0 / 140.0;

pub fn plant() -> PlantParams<f64> {
    PlantParams::new(TAU, R, ALPHA).unwrap()
}

/// Reference plant driven from `x0 = r` for one second.
pub fn scenario(variant: Variant, t_c: f64, delta: f64) -> ScenarioF64 {
    scenario_with(
        plant(),
        ActuatorSpec::centrifuge(t_c).unwrap(),
        variant,
        delta,
    )
}

pub fn scenario_with(
    plant: PlantParams<f64>,
    actuator: ActuatorSpec<f64>,
    variant: Variant,
    delta: f64,
) -> ScenarioF64 {
    Scenario::new(
        plant,
        actuator,
        ControllerSpec::new(variant, delta).unwrap(),
        plant.r,
        1.0,
    )
    .unwrap()
}

pub fn prep_scenario() -> ScenarioF64 {
    scenario_with(
        plant(),
        ActuatorSpec::new(0.007, 0.0175, ActuatorMode::Centrifuge).unwrap(),
        Variant::Nm,
        4e14,
    )
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}
