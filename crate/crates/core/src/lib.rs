//! Hybrid simulation of pellet-fuelled plasma density control with spiking
//! controllers, together with closed-form stability certificates and checks
//! of simulated trajectories against them.
//!
//! The plant is the first-order error model `x' = (r - x) / tau` with
//! instantaneous pellet jumps `x+ = x - alpha`, launched only at actuator
//! ticks `k * t_c`. Four controllers are provided: integrate-and-fire (NM),
//! plain sigma-delta (SDM), sigma-delta with input clipping (SDM_IC) and
//! sigma-delta with an adjusted jump map (SDM_JM), each optionally gated by
//! a pellet preparation time.
//!
//! All math is generic over [`Scalar`] (`f32`/`f64`); the `*F64` / `*F32`
//! aliases below pin the precision.

pub mod bounds;
pub mod controller;
pub mod engine;
mod error;
pub mod flow;
pub mod model;
pub mod oracle;
mod scalar;
pub mod verify;

pub use bounds::{certify, delta_max, envelope, ic_slow_upper, r_max, tc_max, ub_ic_slow};
pub use controller::{tick_jump, JumpOutcome};
pub use engine::{simulate, steady_state_window, Scenario};
pub use error::{Error, Result};
pub use flow::{flow_x, flow_xi, sat_crossing_time, zero_crossing_time, FlowSegment, XiInput};
pub use model::{
    validate, ActuatorMode, ActuatorSpec, Certificate, ControllerSpec, HybridState, HybridTime,
    Infeasibility, Interval, PlantParams, Sample, Trajectory, Variant,
};
pub use oracle::simulate_numeric;
pub use scalar::Scalar;
pub use verify::{compare, detect_windup, verify, Check, CheckStatus, Comparison, VerifyReport};

pub type PlantParamsF64 = PlantParams<f64>;
pub type ActuatorSpecF64 = ActuatorSpec<f64>;
pub type ControllerSpecF64 = ControllerSpec<f64>;
pub type HybridStateF64 = HybridState<f64>;
pub type ScenarioF64 = Scenario<f64>;
pub type TrajectoryF64 = Trajectory<f64>;
pub type CertificateF64 = Certificate<f64>;
pub type VerifyReportF64 = VerifyReport<f64>;

pub type PlantParamsF32 = PlantParams<f32>;
pub type ActuatorSpecF32 = ActuatorSpec<f32>;
pub type ControllerSpecF32 = ControllerSpec<f32>;
pub type ScenarioF32 = Scenario<f32>;
pub type TrajectoryF32 = Trajectory<f32>;
pub type CertificateF32 = Certificate<f32>;
