//! Domain types: plant, actuator, controller, hybrid state and trajectories.
//!
//! Densities are SI doubles (particles/m³, magnitudes around 1e19). The
//! membrane potential `xi` is the time integral of a density error and so
//! carries particles·s/m³.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn finite<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite { name })
    }
}

fn positive<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    finite(name, v)?;
    if v > T::zero() {
        Ok(())
    } else {
        Err(Error::NonPositiveParam {
            name,
            value: v.to_f64().unwrap_or(f64::NAN),
        })
    }
}

fn non_negative<T: Scalar>(name: &'static str, v: T) -> Result<()> {
    finite(name, v)?;
    if v >= T::zero() {
        Ok(())
    } else {
        Err(Error::NegativeParam {
            name,
            value: v.to_f64().unwrap_or(f64::NAN),
        })
    }
}

/// First-order plasma density model: confinement time, reference density and
/// the density increment of a single pellet.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlantParams<T> {
    pub tau: T,
    pub r: T,
    pub alpha: T,
}

impl<T: Scalar> PlantParams<T> {
    pub fn new(tau: T, r: T, alpha: T) -> Result<Self> {
        let p = Self { tau, r, alpha };
        p.validate()?;
        Ok(p)
    }

    /// Builds the plant from the particle count of one pellet and the plasma
    /// volume; only the ratio `m_p / volume` is kept.
    pub fn from_pellet(tau: T, r: T, m_p: T, volume: T) -> Result<Self> {
        positive("m_p", m_p)?;
        positive("volume", volume)?;
        Self::new(tau, r, m_p / volume)
    }

    pub fn validate(&self) -> Result<()> {
        positive("tau", self.tau)?;
        positive("alpha", self.alpha)?;
        positive("r", self.r)?;
        if self.r <= self.alpha {
            return Err(Error::RNotAboveAlpha {
                r: self.r.to_f64().unwrap_or(f64::NAN),
                alpha: self.alpha.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(())
    }

    /// `ln(r / (r - alpha))`, evaluated without forming the ratio.
    pub fn log_ratio(&self) -> T {
        -(-self.alpha / self.r).ln_1p()
    }

    /// Per-cycle contraction factor `(r - alpha) / r`.
    pub fn gamma(&self) -> T {
        (self.r - self.alpha) / self.r
    }

    /// Longest certified time between two launches, `tau * ln(r / (r - alpha))`.
    pub fn tau_d(&self) -> T {
        self.tau * self.log_ratio()
    }

    /// Scale used for relative comparisons of densities.
    pub fn density_scale(&self, v: T) -> T {
        v.abs().max(self.alpha)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ActuatorMode {
    Centrifuge,
    /// Gas gun: `t_c` is the sampling period, `t_prep` enforces shot spacing.
    GasGun,
}

/// Launch timing: tick period, preparation (refractory) time and actuator kind.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActuatorSpec<T> {
    pub t_c: T,
    pub t_prep: T,
    pub mode: ActuatorMode,
}

impl<T: Scalar> ActuatorSpec<T> {
    pub fn centrifuge(t_c: T) -> Result<Self> {
        Self::new(t_c, T::zero(), ActuatorMode::Centrifuge)
    }

    pub fn new(t_c: T, t_prep: T, mode: ActuatorMode) -> Result<Self> {
        let a = Self { t_c, t_prep, mode };
        a.validate()?;
        Ok(a)
    }

    pub fn validate(&self) -> Result<()> {
        positive("t_c", self.t_c)?;
        non_negative("t_prep", self.t_prep)?;
        if self.mode == ActuatorMode::GasGun && self.t_prep <= T::zero() {
            return Err(Error::GasGunWithoutPrep);
        }
        Ok(())
    }

    /// Whether the preparation gate is active at all.
    pub fn prep_enabled(&self) -> bool {
        self.t_prep > T::zero()
    }

    /// Minimum number of ticks between launches, `l = ceil(t_prep / t_c)`,
    /// at least 1. Quotients within 1e-9 above an integer count as that integer.
    pub fn prep_ticks(&self) -> u64 {
        if !self.prep_enabled() {
            return 1;
        }
        let q = (self.t_prep / self.t_c - T::lit(1e-9)).ceil();
        q.to_u64().unwrap_or(u64::MAX).max(1)
    }
}

/// Spiking controller family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Integrate-and-fire: reset to zero on a launch.
    #[serde(rename = "NM")]
    Nm,
    /// Sigma-delta: subtract one threshold on a launch.
    #[serde(rename = "SDM")]
    Sdm,
    /// Sigma-delta with the integrator input clipped at `delta / t_c`.
    #[serde(rename = "SDM_IC")]
    SdmIc,
    /// Sigma-delta subtracting `floor(xi / delta)` thresholds on a launch.
    #[serde(rename = "SDM_JM")]
    SdmJm,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::Nm, Variant::Sdm, Variant::SdmIc, Variant::SdmJm];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Nm => "NM",
            Variant::Sdm => "SDM",
            Variant::SdmIc => "SDM_IC",
            Variant::SdmJm => "SDM_JM",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerSpec<T> {
    pub variant: Variant,
    pub delta: T,
}

impl<T: Scalar> ControllerSpec<T> {
    pub fn new(variant: Variant, delta: T) -> Result<Self> {
        let c = Self { variant, delta };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        positive("delta", self.delta)
    }

    /// Plain SDM and SDM_IC have no defined behaviour with a preparation
    /// time; they run with a single-threshold subtraction and no stability claim.
    pub fn is_nonstandard_with(&self, actuator: &ActuatorSpec<T>) -> bool {
        actuator.prep_enabled() && matches!(self.variant, Variant::Sdm | Variant::SdmIc)
    }
}

/// Checks every parameter invariant of a closed-loop configuration.
pub fn validate<T: Scalar>(
    plant: &PlantParams<T>,
    actuator: &ActuatorSpec<T>,
    controller: &ControllerSpec<T>,
) -> Result<()> {
    plant.validate()?;
    actuator.validate()?;
    controller.validate()
}

/// Full hybrid state `(x, xi, T, T_p)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridState<T> {
    /// Density error `r - n_e`.
    pub x: T,
    /// Membrane potential.
    pub xi: T,
    /// Tick timer `T`.
    pub t_timer: T,
    /// Preparation timer `T_p`.
    pub t_prep_timer: T,
}

impl<T: Scalar> HybridState<T> {
    pub fn new(x: T, xi: T, t_timer: T, t_prep_timer: T, plant: &PlantParams<T>) -> Result<Self> {
        let s = Self {
            x,
            xi,
            t_timer,
            t_prep_timer,
        };
        s.check(plant)?;
        Ok(s)
    }

    /// State at hybrid time (0, 0): both timers at zero.
    pub fn initial(x0: T, xi0: T, plant: &PlantParams<T>) -> Result<Self> {
        Self::new(x0, xi0, T::zero(), T::zero(), plant)
    }

    pub fn check(&self, plant: &PlantParams<T>) -> Result<()> {
        for (name, v) in [
            ("x", self.x),
            ("xi", self.xi),
            ("t_timer", self.t_timer),
            ("t_prep_timer", self.t_prep_timer),
        ] {
            finite(name, v)?;
        }
        if self.xi < T::zero() {
            return Err(Error::InvalidState(format!("xi = {} is negative", self.xi)));
        }
        if self.x > plant.r {
            return Err(Error::InvalidState(format!(
                "x = {} exceeds r = {} (negative density)",
                self.x, plant.r
            )));
        }
        if self.t_timer < T::zero() || self.t_prep_timer < T::zero() {
            return Err(Error::InvalidState("negative timer".into()));
        }
        Ok(())
    }

    /// Electron density `n_e = r - x`.
    pub fn density(&self, plant: &PlantParams<T>) -> T {
        plant.r - self.x
    }
}

/// Hybrid time `(t, j)`: ordinary time and number of jumps so far.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HybridTime<T> {
    pub t: T,
    pub j: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sample<T> {
    pub time: HybridTime<T>,
    pub state: HybridState<T>,
    /// Set on the sample right after a launch jump.
    pub fired: bool,
}

/// Ordered samples over a hybrid time domain together with the
/// configuration that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory<T> {
    pub samples: Vec<Sample<T>>,
    pub plant: PlantParams<T>,
    pub controller: ControllerSpec<T>,
    pub actuator: ActuatorSpec<T>,
}

/// A jump extracted from a trajectory: the states right before and after it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpRecord<T> {
    pub t: T,
    /// Jump count after the jump.
    pub j: u64,
    pub before: HybridState<T>,
    pub after: HybridState<T>,
    pub fired: bool,
}

impl<T: Scalar> Trajectory<T> {
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn first(&self) -> Option<&Sample<T>> {
        self.samples.first()
    }

    pub fn last(&self) -> Option<&Sample<T>> {
        self.samples.last()
    }

    /// Every jump (launch or timer-only), in order.
    pub fn jumps(&self) -> Vec<JumpRecord<T>> {
        self.samples
            .windows(2)
            .filter(|w| w[1].time.j == w[0].time.j + 1)
            .map(|w| JumpRecord {
                t: w[1].time.t,
                j: w[1].time.j,
                before: w[0].state,
                after: w[1].state,
                fired: w[1].fired,
            })
            .collect()
    }

    /// Launch jumps only.
    pub fn fires(&self) -> Vec<JumpRecord<T>> {
        self.jumps().into_iter().filter(|r| r.fired).collect()
    }

    pub fn pellet_count(&self) -> usize {
        self.samples.iter().filter(|s| s.fired).count()
    }
}

/// Half-open interval `(lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval<T> {
    pub lower: T,
    pub upper: T,
}

/// Why a configuration carries no stability guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Infeasibility {
    /// Tick period above the admissible maximum.
    TcAboveMax,
    /// The admissible threshold range `(0, delta_max]` is empty.
    EmptyDeltaRange,
    /// Threshold above `delta_max`.
    DeltaAboveMax,
    /// Preparation time longer than `tau_d`.
    PrepTooLong,
    /// Plain sigma-delta: unbounded wind-up variant.
    UnboundedWindup,
    /// Plain SDM or SDM_IC combined with a preparation gate spanning several ticks.
    NonstandardPrep,
}

/// Closed-form tuning bounds for one configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate<T> {
    pub variant: Variant,
    pub tc_max: T,
    pub delta_max: T,
    pub tau_d: T,
    pub gamma: T,
    pub r_max: T,
    pub l: u64,
    pub feasible: bool,
    /// Ultimate bound `(-alpha, alpha]` claimed when feasible.
    pub bound_interval: Interval<T>,
    /// Wider upper bound `alpha (2 - alpha / r)` for SDM_IC driven by an
    /// actuator that only meets the NM tick condition (small thresholds).
    pub widened_upper: Option<T>,
    pub reasons: Vec<Infeasibility>,
}
