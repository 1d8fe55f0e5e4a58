//! Tick-driven hybrid simulation.
//!
//! Tick `k` happens at `t = k * t_c`, computed from the integer `k`. Between
//! ticks the state flows analytically; the jump decision always uses the
//! exact tick-boundary state, intermediate samples are for output only.

use serde::{Deserialize, Serialize};

use crate::controller::tick_jump;
use crate::error::{Error, Result};
use crate::flow::{flow_x, flow_xi, XiInput};
use crate::model::{
    validate, ActuatorSpec, ControllerSpec, HybridState, HybridTime, PlantParams, Sample,
    Trajectory,
};
use crate::scalar::Scalar;

/// Everything needed to run one closed-loop simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario<T> {
    pub plant: PlantParams<T>,
    pub actuator: ActuatorSpec<T>,
    pub controller: ControllerSpec<T>,
    pub x0: T,
    pub xi0: T,
    pub t_end: T,
    pub samples_per_tick: u32,
}

impl<T: Scalar> Scenario<T> {
    /// Scenario starting from `xi0 = 0` with 10 samples per tick.
    pub fn new(
        plant: PlantParams<T>,
        actuator: ActuatorSpec<T>,
        controller: ControllerSpec<T>,
        x0: T,
        t_end: T,
    ) -> Result<Self> {
        let s = Self {
            plant,
            actuator,
            controller,
            x0,
            xi0: T::zero(),
            t_end,
            samples_per_tick: 10,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        validate(&self.plant, &self.actuator, &self.controller)?;
        HybridState::initial(self.x0, self.xi0, &self.plant)?;
        if !self.t_end.is_finite() {
            return Err(Error::NonFinite { name: "t_end" });
        }
        if self.t_end <= T::zero() {
            return Err(Error::NonPositiveParam {
                name: "t_end",
                value: self.t_end.to_f64().unwrap_or(f64::NAN),
            });
        }
        if self.samples_per_tick == 0 {
            return Err(Error::NonPositiveParam {
                name: "samples_per_tick",
                value: 0.0,
            });
        }
        Ok(())
    }

    pub fn xi_input(&self) -> XiInput<T> {
        XiInput::for_variant(
            self.controller.variant,
            self.controller.delta,
            self.actuator.t_c,
        )
    }

    /// Number of ticks in `[t_c, t_end]`.
    pub fn tick_count(&self) -> u64 {
        (self.t_end / self.actuator.t_c + T::lit(1e-9))
            .floor()
            .to_u64()
            .unwrap_or(0)
    }

    /// Same configuration restarted from the given state at `t = 0`.
    pub fn restarted_from(&self, x0: T, xi0: T, t_end: T) -> Self {
        Self {
            x0,
            xi0,
            t_end,
            ..self.clone()
        }
    }
}

struct Recorder<'a, T: Scalar> {
    scenario: &'a Scenario<T>,
    input: XiInput<T>,
    samples: Vec<Sample<T>>,
}

impl<T: Scalar> Recorder<'_, T> {
    /// State reached `offset` into a flow interval that started at `start`,
    /// with the preparation timer counted from `tp_base`.
    fn flowed(&self, start: &HybridState<T>, offset: T, tp_base: T) -> HybridState<T> {
        let plant = &self.scenario.plant;
        HybridState {
            x: flow_x(start.x, offset, plant),
            xi: flow_xi(start.x, start.xi, offset, plant, self.input),
            t_timer: offset,
            t_prep_timer: tp_base + offset,
        }
    }

    fn push(&mut self, t: T, j: u64, state: HybridState<T>, fired: bool) {
        self.samples.push(Sample {
            time: HybridTime { t, j },
            state,
            fired,
        });
    }
}

/// Runs the closed loop from `(x0, xi0)` with both timers at zero until `t_end`.
pub fn simulate<T: Scalar>(scenario: &Scenario<T>) -> Result<Trajectory<T>> {
    scenario.validate()?;
    let plant = scenario.plant;
    let actuator = scenario.actuator;
    let controller = scenario.controller;
    let t_c = actuator.t_c;
    let spt = scenario.samples_per_tick as u64;
    let n_ticks = scenario.tick_count();

    let mut rec = Recorder {
        scenario,
        input: scenario.xi_input(),
        samples: Vec::with_capacity(((n_ticks + 1) * (spt + 1)) as usize + 1),
    };
    let mut state = HybridState::initial(scenario.x0, scenario.xi0, &plant)?;
    let mut j = 0u64;
    rec.push(T::zero(), j, state, false);

    // Ticks elapsed since the last launch; T_p at a tick is that count times t_c.
    let mut since_fire = 0u64;
    for k in 1..=n_ticks {
        let t_start = T::count(k - 1) * t_c;
        let tp_base = T::count(since_fire) * t_c;
        for m in 1..spt {
            let off = t_c * T::count(m) / T::count(spt);
            let s = rec.flowed(&state, off, tp_base);
            rec.push(t_start + off, j, s, false);
        }
        let mut before = rec.flowed(&state, t_c, tp_base);
        before.t_prep_timer = T::count(since_fire + 1) * t_c;
        let t_tick = T::count(k) * t_c;
        rec.push(t_tick, j, before, false);

        let out = tick_jump(&before, &plant, &controller, &actuator)?;
        j += 1;
        rec.push(t_tick, j, out.state_after, out.fired);
        since_fire = if out.fired { 0 } else { since_fire + 1 };
        state = out.state_after;
    }

    let t_last = T::count(n_ticks) * t_c;
    let rem = scenario.t_end - t_last;
    if rem > T::lit(1e-12) * t_c {
        let tp_base = T::count(since_fire) * t_c;
        let parts = (T::count(spt) * rem / t_c)
            .ceil()
            .to_u64()
            .unwrap_or(1)
            .max(1);
        for m in 1..=parts {
            let (off, t) = if m == parts {
                (rem, scenario.t_end)
            } else {
                let off = rem * T::count(m) / T::count(parts);
                (off, t_last + off)
            };
            let s = rec.flowed(&state, off, tp_base);
            rec.push(t, j, s, false);
        }
    }

    Ok(Trajectory {
        samples: rec.samples,
        plant,
        controller,
        actuator,
    })
}

/// Trailing `fraction` of the trajectory's time span.
pub fn steady_state_window<T: Scalar>(traj: &Trajectory<T>, fraction: T) -> Result<(T, T)> {
    let (first, last) = match (traj.first(), traj.last()) {
        (Some(a), Some(b)) => (a.time.t, b.time.t),
        _ => return Err(Error::EmptyTrajectory),
    };
    if !(fraction > T::zero() && fraction < T::one()) {
        return Err(Error::InvalidFraction(
            fraction.to_f64().unwrap_or(f64::NAN),
        ));
    }
    Ok((last - fraction * (last - first), last))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ActuatorSpec, Variant};

    fn reference(delta: f64, variant: Variant) -> Scenario<f64> {
        let plant = PlantParams::new(0.1, 5e19, 1e19).unwrap();
        Scenario::new(
            plant,
            ActuatorSpec::centrifuge(1.0 / 70.0).unwrap(),
            ControllerSpec::new(variant, delta).unwrap(),
            5e19,
            1.0,
        )
        .unwrap()
    }

    #[test]
    fn first_pellet_at_first_tick() {
        let traj = simulate(&reference(1.0, Variant::Nm)).unwrap();
        let first = traj.jumps()[0];
        assert_eq!(first.j, 1);
        assert!(first.fired);
        assert!((first.t - 1.0 / 70.0).abs() < 1e-15);
    }

    #[test]
    fn tick_count_covers_horizon() {
        let s = reference(1.0, Variant::Nm);
        assert_eq!(s.tick_count(), 70);
        let traj = simulate(&s).unwrap();
        assert_eq!(traj.last().unwrap().time.j, 70);
        assert_eq!(traj.samples.len(), 1 + 70 * 11);
    }

    #[test]
    fn trailing_partial_interval() {
        let mut s = reference(1.0, Variant::Nm);
        s.t_end = 2.5 / 70.0;
        let traj = simulate(&s).unwrap();
        assert_eq!(traj.last().unwrap().time.t, s.t_end);
        assert_eq!(traj.last().unwrap().time.j, 2);
    }

    #[test]
    fn window_arithmetic() {
        let traj = simulate(&reference(1.0, Variant::Nm)).unwrap();
        let (a, b) = steady_state_window(&traj, 0.5).unwrap();
        assert!((a - 0.5).abs() < 1e-12 && (b - 1.0).abs() < 1e-12);
        let mut s = reference(1.0, Variant::Nm);
        s.t_end = 2.0;
        let traj = simulate(&s).unwrap();
        let (a, b) = steady_state_window(&traj, 0.25).unwrap();
        assert!((a - 1.5).abs() < 1e-12 && (b - 2.0).abs() < 1e-12);
    }

    #[test]
    fn window_of_empty_trajectory() {
        let mut traj = simulate(&reference(1.0, Variant::Nm)).unwrap();
        traj.samples.clear();
        assert_eq!(steady_state_window(&traj, 0.5), Err(Error::EmptyTrajectory));
    }

    #[test]
    fn single_precision_tracks_double() {
        let s64 = reference(1.569e16, Variant::Nm);
        let s32 = Scenario::new(
            PlantParams::new(0.1f32, 5e19, 1e19).unwrap(),
            ActuatorSpec::centrifuge(1.0f32 / 70.0).unwrap(),
            ControllerSpec::new(Variant::Nm, 1.569e16f32).unwrap(),
            5e19,
            1.0,
        )
        .unwrap();
        let (a, b) = (simulate(&s64).unwrap(), simulate(&s32).unwrap());
        assert_eq!(a.samples.len(), b.samples.len());
        let first_fires = |n: usize| {
            (
                a.fires()[..n].iter().map(|f| f.j).collect::<Vec<_>>(),
                b.fires()[..n].iter().map(|f| f.j).collect::<Vec<_>>(),
            )
        };
        let (fa, fb) = first_fires(10);
        assert_eq!(fa, fb);
    }

    #[test]
    fn rejects_bad_initial_state() {
        let mut s = reference(1.0, Variant::Nm);
        s.x0 = 6e19;
        assert!(matches!(simulate(&s), Err(Error::InvalidState(_))));
        let mut s = reference(1.0, Variant::Nm);
        s.t_end = 0.0;
        assert!(matches!(
            simulate(&s),
            Err(Error::NonPositiveParam { name: "t_end", .. })
        ));
    }
}
