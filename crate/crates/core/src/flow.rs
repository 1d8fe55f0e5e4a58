//! Closed-form flow between ticks.
//!
//! During flow `x' = (r - x) / tau`, so `x` is monotone and crosses each of
//! the two kinks of the integrator input (`x = 0`, `x = delta / t_c`) at most
//! once. The integrator is evaluated piecewise with exact crossing times;
//! nothing here steps an ODE.

use serde::{Deserialize, Serialize};

use crate::model::{HybridState, PlantParams, Variant};
use crate::scalar::Scalar;

/// Right-hand side of the membrane potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum XiInput<T> {
    /// `xi' = max(0, x)`.
    MaxZero,
    /// `xi' = sat(x)`, clipped to `[0, delta / t_c]`.
    Saturated { delta: T, t_c: T },
}

impl<T: Scalar> XiInput<T> {
    /// Input of the given controller variant.
    pub fn for_variant(variant: Variant, delta: T, t_c: T) -> Self {
        match variant {
            Variant::SdmIc => XiInput::Saturated { delta, t_c },
            Variant::Nm | Variant::Sdm | Variant::SdmJm => XiInput::MaxZero,
        }
    }

    pub fn x_sat(&self) -> Option<T> {
        match *self {
            XiInput::MaxZero => None,
            XiInput::Saturated { delta, t_c } => Some(delta / t_c),
        }
    }

    /// Pointwise integrand, used by the numerical oracle.
    pub fn eval(&self, x: T) -> T {
        let pos = x.max(T::zero());
        match self.x_sat() {
            None => pos,
            Some(s) => pos.min(s),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BreakpointKind {
    ZeroCrossing,
    SatCrossing,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Breakpoint<T> {
    pub offset: T,
    pub kind: BreakpointKind,
}

/// One flow interval with the kinks it crosses, strictly inside `(0, duration)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSegment<T> {
    pub x_start: T,
    pub xi_start: T,
    pub duration: T,
    pub breakpoints: Vec<Breakpoint<T>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Negative,
    Linear,
    Saturated,
}

/// `x` after flowing for `dt`: `r - exp(-dt / tau) (r - x0)`.
pub fn flow_x<T: Scalar>(x0: T, dt: T, plant: &PlantParams<T>) -> T {
    plant.r - (-dt / plant.tau).exp() * (plant.r - x0)
}

/// Time until `x` reaches 0 from `x0`; `None` when `x0 > 0`.
pub fn zero_crossing_time<T: Scalar>(x0: T, plant: &PlantParams<T>) -> Option<T> {
    if x0 > T::zero() {
        None
    } else if x0 == T::zero() {
        Some(T::zero())
    } else {
        Some(plant.tau * (-x0 / plant.r).ln_1p())
    }
}

/// Time until `x` reaches `x_sat` from `x0`; 0 when already saturated and
/// `None` when the flow limit `r` does not exceed `x_sat`.
pub fn sat_crossing_time<T: Scalar>(x0: T, x_sat: T, plant: &PlantParams<T>) -> Option<T> {
    if x0 >= x_sat {
        Some(T::zero())
    } else if x_sat >= plant.r {
        None
    } else {
        Some(plant.tau * ((x_sat - x0) / (plant.r - x_sat)).ln_1p())
    }
}

/// `u + expm1(-u) = u - 1 + e^{-u}`, accurate for small `u`.
fn one_minus_exp_residual<T: Scalar>(u: T) -> T {
    if u < T::lit(1e-2) {
        // u²/2 - u³/6 + u⁴/24 - ...
        let mut term = u * u / T::lit(2.0);
        let mut sum = term;
        for n in 3..=9u64 {
            term = -term * u / T::count(n);
            sum = sum + term;
        }
        sum
    } else {
        u + (-u).exp_m1()
    }
}

/// Integral of `x` over `[0, len]` when `x` starts at `x_a` and never leaves
/// the unsaturated positive range.
fn linear_increment<T: Scalar>(x_a: T, len: T, plant: &PlantParams<T>) -> T {
    let u = len / plant.tau;
    plant.tau * (x_a * -(-u).exp_m1() + plant.r * one_minus_exp_residual(u))
}

impl<T: Scalar> FlowSegment<T> {
    pub fn new(x0: T, xi0: T, dt: T, plant: &PlantParams<T>, input: XiInput<T>) -> Self {
        let snap = T::lit(1e-15) * plant.tau;
        let inside = |s: T| s > snap && s < dt - snap;
        let mut breakpoints = Vec::with_capacity(2);
        if let Some(tz) = zero_crossing_time(x0, plant) {
            if inside(tz) {
                breakpoints.push(Breakpoint {
                    offset: tz,
                    kind: BreakpointKind::ZeroCrossing,
                });
            }
        }
        if let Some(x_sat) = input.x_sat() {
            if let Some(ts) = sat_crossing_time(x0, x_sat, plant) {
                if inside(ts) {
                    let sat = Breakpoint {
                        offset: ts,
                        kind: BreakpointKind::SatCrossing,
                    };
                    // A tiny x_sat can put both crossings on the same instant;
                    // the linear piece between them is then negligible.
                    match breakpoints.last_mut() {
                        Some(zero) if ts <= zero.offset + snap => *zero = sat,
                        _ => breakpoints.push(sat),
                    }
                }
            }
        }
        assert!(breakpoints.len() <= 2, "x is monotone during flow");
        assert!(breakpoints.windows(2).all(|w| w[0].offset < w[1].offset));
        Self {
            x_start: x0,
            xi_start: xi0,
            duration: dt,
            breakpoints,
        }
    }

    fn initial_phase(&self, plant: &PlantParams<T>, input: &XiInput<T>) -> Phase {
        let snap = T::lit(1e-15) * plant.tau;
        let x0 = self.x_start;
        if let Some(x_sat) = input.x_sat() {
            match sat_crossing_time(x0, x_sat, plant) {
                Some(ts) if ts <= snap => return Phase::Saturated,
                _ => {}
            }
        }
        match zero_crossing_time(x0, plant) {
            Some(tz) if tz > snap => Phase::Negative,
            _ => Phase::Linear,
        }
    }

    pub fn x_end(&self, plant: &PlantParams<T>) -> T {
        flow_x(self.x_start, self.duration, plant)
    }

    /// Membrane potential at the end of the segment.
    pub fn xi_end(&self, plant: &PlantParams<T>, input: &XiInput<T>) -> T {
        let mut phase = self.initial_phase(plant, input);
        let mut start = T::zero();
        let mut x_a = self.x_start;
        let mut acc = T::zero();
        let ends = self
            .breakpoints
            .iter()
            .map(|b| (b.offset, Some(b.kind)))
            .chain(std::iter::once((self.duration, None)));
        for (end, kind) in ends {
            let len = end - start;
            acc = acc
                + match phase {
                    Phase::Negative => T::zero(),
                    Phase::Linear => linear_increment(x_a, len, plant),
                    Phase::Saturated => match *input {
                        XiInput::Saturated { delta, t_c } => delta * (len / t_c),
                        XiInput::MaxZero => unreachable!("saturated phase without clipping"),
                    },
                };
            match kind {
                Some(BreakpointKind::ZeroCrossing) => {
                    phase = Phase::Linear;
                    x_a = T::zero();
                }
                Some(BreakpointKind::SatCrossing) => phase = Phase::Saturated,
                None => {}
            }
            start = end;
        }
        self.xi_start + acc
    }
}

/// Membrane potential after flowing for `dt`.
pub fn flow_xi<T: Scalar>(x0: T, xi0: T, dt: T, plant: &PlantParams<T>, input: XiInput<T>) -> T {
    FlowSegment::new(x0, xi0, dt, plant, input).xi_end(plant, &input)
}

/// Advances the full hybrid state by `dt` of flow (both timers increase).
pub fn flow_state<T: Scalar>(
    state: &HybridState<T>,
    dt: T,
    plant: &PlantParams<T>,
    input: XiInput<T>,
) -> HybridState<T> {
    HybridState {
        x: flow_x(state.x, dt, plant),
        xi: flow_xi(state.x, state.xi, dt, plant, input),
        t_timer: state.t_timer + dt,
        t_prep_timer: state.t_prep_timer + dt,
    }
}
