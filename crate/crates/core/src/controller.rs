//! Jump maps applied at each actuator tick.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ActuatorSpec, ControllerSpec, HybridState, PlantParams, Variant};
use crate::scalar::Scalar;

/// Result of one tick.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JumpOutcome<T> {
    pub state_after: HybridState<T>,
    pub fired: bool,
    /// Thresholds removed from `xi` by SDM_JM (0 otherwise).
    pub k_multiples: u64,
}

/// Whether the preparation timer allows a launch. Timers within
/// `1e-12 * t_c` below `t_prep` count as ready.
pub fn prep_ready<T: Scalar>(state: &HybridState<T>, actuator: &ActuatorSpec<T>) -> bool {
    !actuator.prep_enabled() || state.t_prep_timer >= actuator.t_prep - T::lit(1e-12) * actuator.t_c
}

/// Applies the jump taken when the tick timer reaches `t_c`.
///
/// A launch happens when `xi >= delta` and the preparation gate is open;
/// `xi == delta` launches. Without a launch only the tick timer resets.
pub fn tick_jump<T: Scalar>(
    state: &HybridState<T>,
    plant: &PlantParams<T>,
    controller: &ControllerSpec<T>,
    actuator: &ActuatorSpec<T>,
) -> Result<JumpOutcome<T>> {
    let t_c = actuator.t_c;
    if (state.t_timer - t_c).abs() > T::lit(1e-12) * t_c {
        return Err(Error::TickNotDue {
            timer: state.t_timer.to_f64().unwrap_or(f64::NAN),
            t_c: t_c.to_f64().unwrap_or(f64::NAN),
        });
    }
    let delta = controller.delta;
    let fire = state.xi >= delta && prep_ready(state, actuator);
    if !fire {
        return Ok(JumpOutcome {
            state_after: HybridState {
                t_timer: T::zero(),
                ..*state
            },
            fired: false,
            k_multiples: 0,
        });
    }

    let (xi_after, k) = match controller.variant {
        Variant::Nm => (T::zero(), 0),
        Variant::Sdm | Variant::SdmIc => (state.xi - delta, 0),
        Variant::SdmJm => {
            // fmod is exact, so the residue lands in [0, delta).
            let residue = state.xi % delta;
            let k = ((state.xi - residue) / delta)
                .round()
                .to_u64()
                .unwrap_or(u64::MAX);
            (residue, k)
        }
    };
    Ok(JumpOutcome {
        state_after: HybridState {
            x: state.x - plant.alpha,
            xi: xi_after,
            t_timer: T::zero(),
            t_prep_timer: T::zero(),
        },
        fired: true,
        k_multiples: k,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ActuatorMode;

    const DELTA: f64 = 1.569e16;
    const TC: f64 = 1.0 / 70.0;

    fn plant() -> PlantParams<f64> {
        PlantParams::new(0.1, 5e19, 1e19).unwrap()
    }

    fn at_tick(x: f64, xi: f64, tp: f64) -> HybridState<f64> {
        HybridState {
            x,
            xi,
            t_timer: TC,
            t_prep_timer: tp,
        }
    }

    fn ctl(v: Variant) -> ControllerSpec<f64> {
        ControllerSpec::new(v, DELTA).unwrap()
    }

    fn centrifuge() -> ActuatorSpec<f64> {
        ActuatorSpec::centrifuge(TC).unwrap()
    }

    #[test]
    fn nm_fire_resets_xi() {
        let out = tick_jump(
            &at_tick(2e19, 1.6e16, TC),
            &plant(),
            &ctl(Variant::Nm),
            &centrifuge(),
        )
        .unwrap();
        assert!(out.fired);
        assert_eq!(out.state_after.x, 1e19);
        assert_eq!(out.state_after.xi, 0.0);
        assert_eq!(out.state_after.t_timer, 0.0);
        assert_eq!(out.state_after.t_prep_timer, 0.0);
    }

    #[test]
    fn below_threshold_only_resets_timer() {
        for v in Variant::ALL {
            let s = at_tick(2e19, 0.5 * DELTA, 0.3);
            let out = tick_jump(&s, &plant(), &ctl(v), &centrifuge()).unwrap();
            assert!(!out.fired);
            assert_eq!(out.state_after, HybridState { t_timer: 0.0, ..s });
        }
    }

    #[test]
    fn tie_at_threshold_fires() {
        for v in Variant::ALL {
            let out =
                tick_jump(&at_tick(2e19, DELTA, TC), &plant(), &ctl(v), &centrifuge()).unwrap();
            assert!(out.fired, "{v}");
        }
    }

    #[test]
    fn sdm_subtracts_one_threshold() {
        for v in [Variant::Sdm, Variant::SdmIc] {
            let out = tick_jump(
                &at_tick(2e19, 3.5 * DELTA, TC),
                &plant(),
                &ctl(v),
                &centrifuge(),
            )
            .unwrap();
            assert!(out.fired);
            assert_eq!(out.state_after.xi, 3.5 * DELTA - DELTA);
            assert_eq!(out.k_multiples, 0);
        }
    }

    #[test]
    fn jm_subtracts_floor_multiples() {
        let out = tick_jump(
            &at_tick(2e19, 3.5 * DELTA, TC),
            &plant(),
            &ctl(Variant::SdmJm),
            &centrifuge(),
        )
        .unwrap();
        assert!(out.fired);
        assert_eq!(out.k_multiples, 3);
        let expect = 0.5 * DELTA;
        assert!((out.state_after.xi - expect).abs() <= 1e-12 * DELTA);
        assert!(out.state_after.xi >= 0.0 && out.state_after.xi < DELTA);
    }

    #[test]
    fn prep_gate_blocks() {
        let t_prep = 0.0175;
        let act = ActuatorSpec::new(TC, t_prep, ActuatorMode::Centrifuge).unwrap();
        let out = tick_jump(
            &at_tick(2e19, 2.0 * DELTA, 0.5 * t_prep),
            &plant(),
            &ctl(Variant::Nm),
            &act,
        )
        .unwrap();
        assert!(!out.fired);
        assert_eq!(out.state_after.xi, 2.0 * DELTA);
        let out = tick_jump(
            &at_tick(2e19, 2.0 * DELTA, t_prep),
            &plant(),
            &ctl(Variant::Nm),
            &act,
        )
        .unwrap();
        assert!(out.fired);
    }

    #[test]
    fn jump_off_tick_is_rejected() {
        let s = HybridState {
            x: 0.0,
            xi: 0.0,
            t_timer: 0.5 * TC,
            t_prep_timer: 0.0,
        };
        let err = tick_jump(&s, &plant(), &ctl(Variant::Nm), &centrifuge()).unwrap_err();
        assert!(matches!(err, Error::TickNotDue { .. }));
    }
}
