//! Fixed-step RK4 integration of the flow, used only to cross-check the
//! closed-form engine. Jumps reuse [`tick_jump`]; kinks of the integrator
//! input are resolved only to step resolution.

use crate::controller::tick_jump;
use crate::engine::Scenario;
use crate::error::{Error, Result};
use crate::flow::XiInput;
use crate::model::{HybridState, HybridTime, PlantParams, Sample, Trajectory};
use crate::scalar::Scalar;

/// Classical RK4 over `n` equal steps covering `dt`.
///
/// Steps on which every stage of a clipped input sits at the ceiling are
/// counted and credited their exact share of `delta * dt / t_c`, so a fully
/// saturated tick adds exactly `delta` and the tie `xi = delta` is not lost
/// to rounding of the rate.
pub fn rk4_flow<T: Scalar>(
    x: T,
    xi: T,
    dt: T,
    n: u64,
    plant: &PlantParams<T>,
    input: &XiInput<T>,
) -> (T, T) {
    let h = dt / T::count(n);
    let half = h / T::lit(2.0);
    let six = T::lit(6.0);
    let two = T::lit(2.0);
    let dx = |x: T| (plant.r - x) / plant.tau;
    let ceiling = input.x_sat();
    let (mut x, mut acc, mut saturated) = (x, T::zero(), 0u64);
    for _ in 0..n {
        let x1 = x;
        let k1 = dx(x1);
        let x2 = x + half * k1;
        let k2 = dx(x2);
        let x3 = x + half * k2;
        let k3 = dx(x3);
        let x4 = x + h * k3;
        let k4 = dx(x4);
        x = x + h / six * (k1 + two * k2 + two * k3 + k4);
        let u = [x1, x2, x3, x4].map(|s| input.eval(s));
        if ceiling.is_some_and(|c| u.iter().all(|&v| v == c)) {
            saturated += 1;
        } else {
            acc = acc + h / six * (u[0] + two * u[1] + two * u[2] + u[3]);
        }
    }
    if let XiInput::Saturated { delta, t_c } = *input {
        acc = acc + delta * (dt / t_c) * (T::count(saturated) / T::count(n));
    }
    // RK4 may overshoot the physical bound by rounding only.
    (x.min(plant.r), (xi + acc).max(T::zero()))
}

/// Simulates the scenario with `steps_per_tick` RK4 steps per tick.
/// Samples are recorded at the start, around every jump and at `t_end`.
pub fn simulate_numeric<T: Scalar>(
    scenario: &Scenario<T>,
    steps_per_tick: u32,
) -> Result<Trajectory<T>> {
    if steps_per_tick < 100 {
        return Err(Error::StepTooCoarse(steps_per_tick));
    }
    scenario.validate()?;
    let plant = scenario.plant;
    let actuator = scenario.actuator;
    let controller = scenario.controller;
    let input = scenario.xi_input();
    let t_c = actuator.t_c;
    let n = steps_per_tick as u64;
    let n_ticks = scenario.tick_count();

    let mut samples = Vec::with_capacity(2 * n_ticks as usize + 2);
    let mut state = HybridState::initial(scenario.x0, scenario.xi0, &plant)?;
    let mut j = 0u64;
    let mut push = |t: T, j: u64, state: HybridState<T>, fired: bool| {
        samples.push(Sample {
            time: HybridTime { t, j },
            state,
            fired,
        })
    };
    push(T::zero(), j, state, false);

    let mut since_fire = 0u64;
    for k in 1..=n_ticks {
        let (x, xi) = rk4_flow(state.x, state.xi, t_c, n, &plant, &input);
        let before = HybridState {
            x,
            xi,
            t_timer: t_c,
            t_prep_timer: T::count(since_fire + 1) * t_c,
        };
        let t = T::count(k) * t_c;
        push(t, j, before, false);
        let out = tick_jump(&before, &plant, &controller, &actuator)?;
        j += 1;
        push(t, j, out.state_after, out.fired);
        since_fire = if out.fired { 0 } else { since_fire + 1 };
        state = out.state_after;
    }

    let rem = scenario.t_end - T::count(n_ticks) * t_c;
    if rem > T::lit(1e-12) * t_c {
        let steps = (T::count(n) * rem / t_c)
            .ceil()
            .to_u64()
            .unwrap_or(1)
            .max(1);
        let (x, xi) = rk4_flow(state.x, state.xi, rem, steps, &plant, &input);
        let end = HybridState {
            x,
            xi,
            t_timer: rem,
            t_prep_timer: T::count(since_fire) * t_c + rem,
        };
        push(scenario.t_end, j, end, false);
    }

    Ok(Trajectory {
        samples,
        plant,
        controller,
        actuator,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{flow_x, flow_xi};

    fn plant() -> PlantParams<f64> {
        PlantParams::new(0.1, 5e19, 1e19).unwrap()
    }

    #[test]
    fn fourth_order_on_smooth_flow() {
        let p = plant();
        let input = XiInput::MaxZero;
        let (x0, xi0, dt) = (1e19, 0.0, 0.1);
        let exact = (flow_x(x0, dt, &p), flow_xi(x0, xi0, dt, &p, input));
        let err = |n| {
            let (x, xi) = rk4_flow(x0, xi0, dt, n, &p, &input);
            ((x - exact.0).abs(), (xi - exact.1).abs())
        };
        let (ex4, exi4) = err(4);
        let (ex8, exi8) = err(8);
        assert!(ex4 / ex8 >= 8.0, "x ratio {}", ex4 / ex8);
        assert!(exi4 / exi8 >= 8.0, "xi ratio {}", exi4 / exi8);
    }

    #[test]
    fn saturated_tick_keeps_exact_tie() {
        let p = plant();
        let (delta, t_c) = (2.755e16, 1.0 / 140.0);
        let input = XiInput::Saturated { delta, t_c };
        assert_eq!(rk4_flow(5e19, 0.0, t_c, 1000, &p, &input).1, delta);
        let (_, xi) = rk4_flow(-1e19, 0.0, t_c, 1000, &p, &input);
        assert_eq!(xi, 0.0);
    }

    #[test]
    fn clipped_input_matches_closed_form() {
        let p = plant();
        let input = XiInput::Saturated {
            delta: 1e16,
            t_c: 1.0 / 70.0,
        };
        let (x0, dt) = (-1e18, 0.05);
        let (_, xi) = rk4_flow(x0, 0.0, dt, 20_000, &p, &input);
        let exact = flow_xi(x0, 0.0, dt, &p, input);
        assert!(((xi - exact) / exact).abs() < 1e-6, "{xi} vs {exact}");
    }

    #[test]
    fn rejects_coarse_steps() {
        use crate::model::{ActuatorSpec, ControllerSpec, Variant};
        let s = Scenario::new(
            plant(),
            ActuatorSpec::centrifuge(1.0 / 70.0).unwrap(),
            ControllerSpec::new(Variant::Nm, 1.0).unwrap(),
            5e19,
            0.1,
        )
        .unwrap();
        assert_eq!(
            simulate_numeric(&s, 99).unwrap_err(),
            Error::StepTooCoarse(99)
        );
        assert!(simulate_numeric(&s, 100).is_ok());
    }
}
