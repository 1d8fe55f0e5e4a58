//! Closed-form tuning conditions and ultimate-bound envelopes.
//!
//! With a preparation gate spanning `l` ticks the NM-family conditions are
//! evaluated with the effective launch period `l * t_c`.

use crate::error::Result;
use crate::model::{
    validate, ActuatorSpec, Certificate, ControllerSpec, Infeasibility, Interval, PlantParams,
    Variant,
};
use crate::scalar::Scalar;

/// Largest admissible tick period.
///
/// NM, SDM_JM (and plain SDM, which has no guarantee anyway): `tau/l * ln(r/(r-alpha))`.
/// SDM_IC needs twice the speed: `tau/(2l) * ln(r/(r-alpha))`, exclusive.
pub fn tc_max<T: Scalar>(plant: &PlantParams<T>, variant: Variant, l: u64) -> T {
    let base = plant.tau_d() / T::count(l.max(1));
    match variant {
        Variant::SdmIc => base / T::lit(2.0),
        Variant::Nm | Variant::Sdm | Variant::SdmJm => base,
    }
}

/// Upper end of the admissible threshold range `(0, delta_max]`.
/// A non-positive result means the range is empty.
pub fn delta_max<T: Scalar>(plant: &PlantParams<T>, t_c: T, variant: Variant, l: u64) -> T {
    let PlantParams { tau, r, alpha } = *plant;
    let period = t_c * T::count(l.max(1));
    match variant {
        Variant::SdmIc => (r - (r - alpha) * (T::lit(2.0) * period / tau).exp()) * period,
        Variant::Nm | Variant::Sdm | Variant::SdmJm => {
            let growth = T::one() - plant.gamma() * (period / tau).exp();
            r * (plant.tau_d() - tau * growth - period)
        }
    }
}

/// Highest reference the actuator can hold: `alpha * e^{lT_c/tau} / (e^{lT_c/tau} - 1)`.
pub fn r_max<T: Scalar>(plant: &PlantParams<T>, t_c: T, l: u64) -> T {
    let u = t_c * T::count(l.max(1)) / plant.tau;
    plant.alpha / -(-u).exp_m1()
}

/// Certified envelope `(lower, upper]` of `x` at time `t` for a solution
/// starting at `x0` (with `xi0 = 0`).
pub fn envelope<T: Scalar>(t: T, x0: T, plant: &PlantParams<T>) -> Interval<T> {
    let alpha = plant.alpha;
    if x0 > T::zero() {
        let exponent = t / plant.tau_d() - T::one();
        Interval {
            lower: -alpha,
            upper: (exponent * plant.gamma().ln()).exp() * x0 + alpha,
        }
    } else {
        let open_loop = plant.r - (-t / plant.tau).exp() * (plant.r - x0);
        Interval {
            lower: open_loop.min(-alpha),
            upper: alpha,
        }
    }
}

/// Upper bound `alpha (2 - alpha/r)` for SDM_IC with a small threshold on an
/// actuator meeting only the NM tick condition.
pub fn ub_ic_slow<T: Scalar>(plant: &PlantParams<T>) -> T {
    plant.alpha * (T::lit(2.0) - plant.alpha / plant.r)
}

/// Steady-state ceiling of SDM_IC on an actuator meeting only the NM tick
/// condition: two ticks of flow from just below the saturation level,
/// `r - e^{-2 t_c/tau} (r - delta/t_c)`.
pub fn ic_slow_upper<T: Scalar>(plant: &PlantParams<T>, t_c: T, delta: T) -> T {
    plant.r - (T::lit(-2.0) * t_c / plant.tau).exp() * (plant.r - delta / t_c)
}

/// Evaluates every applicable condition for the configuration.
pub fn certify<T: Scalar>(
    plant: &PlantParams<T>,
    actuator: &ActuatorSpec<T>,
    controller: &ControllerSpec<T>,
) -> Result<Certificate<T>> {
    validate(plant, actuator, controller)?;
    let variant = controller.variant;
    let l = actuator.prep_ticks();
    let tc_max_v = tc_max(plant, variant, l);
    let delta_max_v = delta_max(plant, actuator.t_c, variant, l);
    let tau_d = plant.tau_d();

    let mut reasons = Vec::new();
    if variant == Variant::Sdm {
        reasons.push(Infeasibility::UnboundedWindup);
    }
    if l > 1 && controller.is_nonstandard_with(actuator) {
        reasons.push(Infeasibility::NonstandardPrep);
    }
    if actuator.prep_enabled() && actuator.t_prep > tau_d {
        reasons.push(Infeasibility::PrepTooLong);
    }
    let tc_ok = match variant {
        Variant::SdmIc => actuator.t_c < tc_max_v,
        _ => actuator.t_c <= tc_max_v,
    };
    if !tc_ok {
        reasons.push(Infeasibility::TcAboveMax);
    }
    if delta_max_v <= T::zero() {
        reasons.push(Infeasibility::EmptyDeltaRange);
    } else if controller.delta > delta_max_v {
        reasons.push(Infeasibility::DeltaAboveMax);
    }

    // The widened bound is the small-threshold limit of `ic_slow_upper`; it is
    // only claimed once the threshold is small enough to stay below it.
    let widened_upper = (variant == Variant::SdmIc
        && l == 1
        && actuator.t_c <= tc_max(plant, Variant::Nm, 1)
        && ic_slow_upper(plant, actuator.t_c, controller.delta) <= ub_ic_slow(plant))
    .then(|| ub_ic_slow(plant));

    Ok(Certificate {
        variant,
        tc_max: tc_max_v,
        delta_max: delta_max_v,
        tau_d,
        gamma: plant.gamma(),
        r_max: r_max(plant, actuator.t_c, l),
        l,
        feasible: reasons.is_empty(),
        bound_interval: Interval {
            lower: -plant.alpha,
            upper: plant.alpha,
        },
        widened_upper,
        reasons,
    })
}
