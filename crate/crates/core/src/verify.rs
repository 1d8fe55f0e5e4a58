//! Checks of simulated trajectories against the certified properties, and
//! summary metrics.

use serde::Serialize;

use crate::bounds::envelope;
use crate::engine::steady_state_window;
use crate::error::{Error, Result};
use crate::model::{Certificate, HybridState, JumpRecord, Trajectory, Variant};
use crate::scalar::Scalar;

/// Relative slack (times `r`) applied to every density bound.
pub const DENSITY_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckStatus {
    Pass,
    Fail,
    NotApplicable,
}

/// First sample at which a check failed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Violation<T> {
    pub t: T,
    pub j: u64,
    /// The offending quantity (density, gap length, ...).
    pub value: T,
    /// The bound it broke.
    pub bound: T,
    pub what: &'static str,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Check<T> {
    pub status: CheckStatus,
    pub witness: Option<Violation<T>>,
}

impl<T> Check<T> {
    pub fn pass() -> Self {
        Self {
            status: CheckStatus::Pass,
            witness: None,
        }
    }

    pub fn not_applicable() -> Self {
        Self {
            status: CheckStatus::NotApplicable,
            witness: None,
        }
    }

    pub fn fail(v: Violation<T>) -> Self {
        Self {
            status: CheckStatus::Fail,
            witness: Some(v),
        }
    }

    pub fn passed(&self) -> bool {
        self.status == CheckStatus::Pass
    }

    pub fn failed(&self) -> bool {
        self.status == CheckStatus::Fail
    }

    fn from_first(v: Option<Violation<T>>) -> Self {
        v.map_or_else(Self::pass, Self::fail)
    }
}

/// Every sample lies in the certified envelope (`lower < x <= upper`).
/// The envelope is stated for runs starting with `xi = 0`; other starts are
/// not covered.
pub fn check_envelope<T: Scalar>(traj: &Trajectory<T>, cert: &Certificate<T>) -> Check<T> {
    if !cert.feasible {
        return Check::not_applicable();
    }
    let Some(first) = traj.first() else {
        return Check::pass();
    };
    if first.state.xi != T::zero() {
        return Check::not_applicable();
    }
    let plant = &traj.plant;
    let slack = T::lit(DENSITY_SLACK) * plant.r;
    let x0 = first.state.x;
    Check::from_first(traj.samples.iter().find_map(|s| {
        let env = envelope(s.time.t, x0, plant);
        let x = s.state.x;
        if x <= env.lower - slack {
            Some(Violation {
                t: s.time.t,
                j: s.time.j,
                value: x,
                bound: env.lower,
                what: "lower envelope",
            })
        } else if x > env.upper + slack {
            Some(Violation {
                t: s.time.t,
                j: s.time.j,
                value: x,
                bound: env.upper,
                what: "upper envelope",
            })
        } else {
            None
        }
    }))
}

/// Start of each launch cycle with positive error: the initial state (when
/// `x0 > 0`) and every post-launch state with `x > 0`.
fn positive_cycle_starts<T: Scalar>(traj: &Trajectory<T>) -> Vec<(T, u64, HybridState<T>)> {
    let mut starts = Vec::new();
    if let Some(first) = traj.first() {
        if first.state.x > T::zero() {
            starts.push((first.time.t, first.time.j, first.state));
        }
    }
    starts.extend(
        traj.fires()
            .into_iter()
            .filter(|f| f.after.x > T::zero())
            .map(|f| (f.t, f.j, f.after)),
    );
    starts
}

fn next_fire_after<T: Scalar>(fires: &[JumpRecord<T>], j: u64) -> Option<&JumpRecord<T>> {
    fires.iter().find(|f| f.j > j)
}

/// Time between a launch leaving `x > 0` and the next launch is at most `tau_d`.
/// An open tail longer than `tau_d` without a launch also counts as a violation.
pub fn check_dwell<T: Scalar>(traj: &Trajectory<T>, cert: &Certificate<T>) -> Check<T> {
    if !cert.feasible {
        return Check::not_applicable();
    }
    let Some(last) = traj.last() else {
        return Check::pass();
    };
    let limit = cert.tau_d + T::lit(1e-9) * traj.actuator.t_c;
    let fires = traj.fires();
    Check::from_first(
        positive_cycle_starts(traj)
            .into_iter()
            .find_map(|(t0, j0, _)| {
                let (t_end, j_end, what) = match next_fire_after(&fires, j0) {
                    Some(f) => (f.t, f.j, "launch gap"),
                    None => (last.time.t, last.time.j, "open tail without launch"),
                };
                let gap = t_end - t0;
                (gap > limit).then_some(Violation {
                    t: t_end,
                    j: j_end,
                    value: gap,
                    bound: cert.tau_d,
                    what,
                })
            }),
    )
}

/// Per-cycle contraction `x(after next launch) <= gamma * x(cycle start)` for NM.
pub fn check_contraction<T: Scalar>(traj: &Trajectory<T>, cert: &Certificate<T>) -> Check<T> {
    if !cert.feasible || traj.controller.variant != Variant::Nm {
        return Check::not_applicable();
    }
    let slack = T::lit(DENSITY_SLACK) * traj.plant.r;
    let fires = traj.fires();
    Check::from_first(
        positive_cycle_starts(traj)
            .into_iter()
            .find_map(|(_, j0, s)| {
                let f = next_fire_after(&fires, j0)?;
                let bound = cert.gamma * s.x;
                (f.after.x > bound + slack).then_some(Violation {
                    t: f.t,
                    j: f.j,
                    value: f.after.x,
                    bound,
                    what: "cycle contraction",
                })
            }),
    )
}

/// Hybrid time domain sanity: jumps only on the tick grid, `j` increments by
/// one per jump, and `j <= floor(t / t_c) + 1`.
pub fn check_zeno<T: Scalar>(traj: &Trajectory<T>) -> Check<T> {
    let t_c = traj.actuator.t_c;
    let tol = T::lit(1e-9);
    let mut prev_j = traj.first().map(|s| s.time.j).unwrap_or(0);
    Check::from_first(traj.samples.iter().find_map(|s| {
        let (t, j) = (s.time.t, s.time.j);
        let ticks = t / t_c;
        let bound = (ticks + tol).floor() + T::one();
        let step = j.checked_sub(prev_j);
        let on_grid = (ticks - ticks.round()).abs() <= tol && ticks.round() >= T::one();
        let before = prev_j;
        prev_j = j;
        if T::count(j) > bound {
            Some(Violation {
                t,
                j,
                value: T::count(j),
                bound,
                what: "jump count above t/t_c + 1",
            })
        } else if !matches!(step, Some(0) | Some(1)) {
            Some(Violation {
                t,
                j,
                value: T::count(j),
                bound: T::count(before),
                what: "jump counter skipped",
            })
        } else if step == Some(1) && !on_grid {
            Some(Violation {
                t,
                j,
                value: ticks,
                bound: ticks.round(),
                what: "jump off the tick grid",
            })
        } else {
            None
        }
    }))
}

/// Integrator wind-up: two or more back-to-back launches that each leave
/// `xi >= delta`, or any undershoot below `-alpha`.
pub fn detect_windup<T: Scalar>(traj: &Trajectory<T>, delta: T) -> bool {
    let slack = T::lit(DENSITY_SLACK) * traj.plant.r;
    if traj
        .samples
        .iter()
        .any(|s| s.state.x < -traj.plant.alpha - slack)
    {
        return true;
    }
    let mut run = 0usize;
    let mut last_j = None;
    for f in traj.fires() {
        if f.after.xi >= delta {
            run = if last_j == Some(f.j - 1) { run + 1 } else { 1 };
            if run >= 2 {
                return true;
            }
        } else {
            run = 0;
        }
        // consecutive launches are one timer jump apart
        last_j = Some(f.j);
    }
    false
}

/// Steady state stays under the widened SDM_IC bound `alpha (2 - alpha/r)`.
pub fn check_widened_bound<T: Scalar>(
    traj: &Trajectory<T>,
    cert: &Certificate<T>,
    window_start: T,
) -> Check<T> {
    let Some(ub) = cert.widened_upper else {
        return Check::not_applicable();
    };
    if cert.feasible {
        return Check::not_applicable();
    }
    let slack = T::lit(DENSITY_SLACK) * traj.plant.r;
    let alpha = traj.plant.alpha;
    Check::from_first(
        traj.samples
            .iter()
            .filter(|s| s.time.t >= window_start)
            .find_map(|s| {
                let x = s.state.x;
                if x > ub + slack {
                    Some(Violation {
                        t: s.time.t,
                        j: s.time.j,
                        value: x,
                        bound: ub,
                        what: "widened upper bound",
                    })
                } else if x <= -alpha - slack {
                    Some(Violation {
                        t: s.time.t,
                        j: s.time.j,
                        value: x,
                        bound: -alpha,
                        what: "lower bound",
                    })
                } else {
                    None
                }
            }),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Metrics<T> {
    pub pellet_count: usize,
    pub window_start: T,
    pub min_x_steady: T,
    pub max_x_steady: T,
    /// Time average of `x` over the steady-state window.
    pub mean_x_steady: T,
    /// First time after which `x` stays in `(-alpha, alpha]`; `None` if it never settles.
    pub settling_time: Option<T>,
}

pub fn metrics<T: Scalar>(traj: &Trajectory<T>, fraction: T) -> Result<Metrics<T>> {
    let (start, _) = steady_state_window(traj, fraction)?;
    let window: Vec<_> = traj.samples.iter().filter(|s| s.time.t >= start).collect();
    if window.is_empty() {
        return Err(Error::EmptyTrajectory);
    }
    let min = window.iter().map(|s| s.state.x).fold(T::infinity(), T::min);
    let max = window
        .iter()
        .map(|s| s.state.x)
        .fold(T::neg_infinity(), T::max);

    let (mut area, mut span) = (T::zero(), T::zero());
    for w in window.windows(2) {
        if w[0].time.j == w[1].time.j {
            let dt = w[1].time.t - w[0].time.t;
            area = area + dt * (w[0].state.x + w[1].state.x) / T::lit(2.0);
            span = span + dt;
        }
    }
    let mean = if span > T::zero() {
        area / span
    } else {
        window
            .iter()
            .map(|s| s.state.x)
            .fold(T::zero(), |a, b| a + b)
            / T::count(window.len() as u64)
    };

    let alpha = traj.plant.alpha;
    let inside = |x: T| x > -alpha && x <= alpha;
    let settling_time = match traj.samples.iter().rposition(|s| !inside(s.state.x)) {
        None => Some(traj.samples[0].time.t),
        Some(i) => traj.samples.get(i + 1).map(|s| s.time.t),
    };

    Ok(Metrics {
        pellet_count: traj.pellet_count(),
        window_start: start,
        min_x_steady: min,
        max_x_steady: max,
        mean_x_steady: mean,
        settling_time,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport<T> {
    pub envelope: Check<T>,
    pub dwell: Check<T>,
    pub contraction: Check<T>,
    pub zeno: Check<T>,
    pub widened_bound: Check<T>,
    pub windup_detected: bool,
    pub metrics: Metrics<T>,
}

impl<T> VerifyReport<T> {
    /// Names of the applicable checks that failed.
    pub fn failures(&self) -> Vec<&'static str> {
        [
            ("envelope", &self.envelope),
            ("dwell", &self.dwell),
            ("contraction", &self.contraction),
            ("zeno", &self.zeno),
            ("widened_bound", &self.widened_bound),
        ]
        .into_iter()
        .filter(|(_, c)| c.failed())
        .map(|(n, _)| n)
        .collect()
    }

    pub fn all_applicable_pass(&self) -> bool {
        self.failures().is_empty()
    }
}

/// Runs every check with the steady-state window set to the trailing `fraction`.
pub fn verify<T: Scalar>(
    traj: &Trajectory<T>,
    cert: &Certificate<T>,
    fraction: T,
) -> Result<VerifyReport<T>> {
    let metrics = metrics(traj, fraction)?;
    Ok(VerifyReport {
        envelope: check_envelope(traj, cert),
        dwell: check_dwell(traj, cert),
        contraction: check_contraction(traj, cert),
        zeno: check_zeno(traj),
        widened_bound: check_widened_bound(traj, cert, metrics.window_start),
        windup_detected: detect_windup(traj, traj.controller.delta),
        metrics,
    })
}

/// Tick-boundary agreement of two trajectories on the same grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Comparison<T> {
    /// max |x_a - x_b| / max(|x_a|, alpha)
    pub max_rel_x: T,
    /// max |xi_a - xi_b| / max(|xi_a|, alpha * t_c)
    pub max_rel_xi: T,
    /// Jump index of the first tick where one launched and the other did not.
    pub first_fire_mismatch: Option<u64>,
    pub within_tolerance: bool,
}

pub fn compare<T: Scalar>(a: &Trajectory<T>, b: &Trajectory<T>, rtol: T) -> Result<Comparison<T>> {
    let t_c = a.actuator.t_c;
    if (b.actuator.t_c - t_c).abs() > T::lit(1e-12) * t_c {
        return Err(Error::GridMismatch("different tick periods".into()));
    }
    let (ja, jb) = (a.jumps(), b.jumps());
    if ja.len() != jb.len() {
        return Err(Error::GridMismatch(format!(
            "{} vs {} jumps",
            ja.len(),
            jb.len()
        )));
    }
    let x_scale = |x: T| x.abs().max(a.plant.alpha);
    let xi_scale = |xi: T| xi.abs().max(a.plant.alpha * t_c);
    let (mut max_x, mut max_xi) = (T::zero(), T::zero());
    let mut first_fire_mismatch = None;
    for (ra, rb) in ja.iter().zip(&jb) {
        if ra.j != rb.j || (ra.t - rb.t).abs() > T::lit(1e-9) * t_c {
            return Err(Error::GridMismatch(format!(
                "jump {} at {} vs {}",
                ra.j, ra.t, rb.t
            )));
        }
        for (sa, sb) in [(ra.before, rb.before), (ra.after, rb.after)] {
            max_x = max_x.max((sa.x - sb.x).abs() / x_scale(sa.x));
            max_xi = max_xi.max((sa.xi - sb.xi).abs() / xi_scale(sa.xi));
        }
        if ra.fired != rb.fired && first_fire_mismatch.is_none() {
            first_fire_mismatch = Some(ra.j);
        }
    }
    Ok(Comparison {
        max_rel_x: max_x,
        max_rel_xi: max_xi,
        first_fire_mismatch,
        within_tolerance: max_x <= rtol && max_xi <= rtol && first_fire_mismatch.is_none(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::certify;
    use crate::engine::{simulate, Scenario};
    use crate::model::{ActuatorSpec, ControllerSpec, PlantParams};

    fn run(variant: Variant, delta: f64, x0: f64, xi0: f64) -> (Trajectory<f64>, Certificate<f64>) {
        let plant = PlantParams::new(0.1, 5e19, 1e19).unwrap();
        let mut s = Scenario::new(
            plant,
            ActuatorSpec::centrifuge(1.0 / 70.0).unwrap(),
            ControllerSpec::new(variant, delta).unwrap(),
            x0,
            1.0,
        )
        .unwrap();
        s.xi0 = xi0;
        let cert = certify(&s.plant, &s.actuator, &s.controller).unwrap();
        (simulate(&s).unwrap(), cert)
    }

    #[test]
    fn reference_run_passes() {
        let (traj, cert) = run(Variant::Nm, 1.569e16, 5e19, 0.0);
        let r = verify(&traj, &cert, 0.5).unwrap();
        assert!(r.all_applicable_pass());
        assert!(
            r.envelope.passed() && r.dwell.passed() && r.contraction.passed() && r.zeno.passed()
        );
        assert_eq!(r.widened_bound.status, CheckStatus::NotApplicable);
        assert!(!r.windup_detected);
    }

    #[test]
    fn infeasible_is_not_applicable() {
        let (traj, cert) = run(Variant::Sdm, 1.569e16, 5e19, 0.0);
        assert_eq!(
            check_envelope(&traj, &cert).status,
            CheckStatus::NotApplicable
        );
        assert_eq!(check_dwell(&traj, &cert).status, CheckStatus::NotApplicable);
        assert!(detect_windup(&traj, 1.569e16));
    }

    #[test]
    fn nonzero_initial_potential_not_covered() {
        let (traj, cert) = run(Variant::Nm, 1.569e16, -9e18, 1e18);
        assert!(cert.feasible);
        assert_eq!(
            check_envelope(&traj, &cert).status,
            CheckStatus::NotApplicable
        );
    }

    #[test]
    fn open_loop_violates_forced_envelope() {
        let (traj, mut cert) = run(Variant::Nm, 1e40, 2e19, 0.0);
        cert.feasible = true;
        let c = check_envelope(&traj, &cert);
        let w = c.witness.unwrap();
        assert!(c.failed());
        assert_eq!(w.what, "upper envelope");
        assert!(w.value > w.bound);
        assert!(check_dwell(&traj, &cert).failed());
    }

    #[test]
    fn contraction_only_for_nm() {
        let (traj, cert) = run(Variant::SdmJm, 1.569e16, 5e19, 0.0);
        assert_eq!(
            check_contraction(&traj, &cert).status,
            CheckStatus::NotApplicable
        );
        assert!(!detect_windup(&traj, 1.569e16));
    }

    #[test]
    fn zeno_flags_tampered_counter() {
        let (mut traj, _) = run(Variant::Nm, 1.0, 5e19, 0.0);
        assert!(check_zeno(&traj).passed());
        let last = traj.samples.len() - 1;
        traj.samples[last].time.j += 5;
        let c = check_zeno(&traj);
        assert!(c.failed());
        assert_eq!(c.witness.unwrap().what, "jump count above t/t_c + 1");
    }

    #[test]
    fn single_launch_dwell_is_vacuous() {
        let (mut traj, cert) = run(Variant::Nm, 1.0, 5e19, 0.0);
        let second = traj.samples.iter().position(|s| s.time.j == 2).unwrap();
        traj.samples.truncate(second);
        assert_eq!(traj.pellet_count(), 1);
        assert!(check_dwell(&traj, &cert).passed());
    }

    #[test]
    fn metrics_of_reference_run() {
        let (traj, _) = run(Variant::Nm, 1.569e16, 5e19, 0.0);
        let m = metrics(&traj, 0.5).unwrap();
        assert_eq!(m.pellet_count, traj.pellet_count());
        assert!((m.window_start - 0.5).abs() < 1e-12);
        assert!(m.min_x_steady <= m.mean_x_steady && m.mean_x_steady <= m.max_x_steady);
        assert!(m.settling_time.is_some_and(|t| t < 0.5));
        assert!(matches!(
            metrics(&traj, 1.5),
            Err(Error::InvalidFraction(_))
        ));
    }

    #[test]
    fn compare_reflexive_and_grid_checked() {
        let (a, _) = run(Variant::Nm, 1.569e16, 5e19, 0.0);
        let c = compare(&a, &a, 0.0).unwrap();
        assert_eq!(
            (c.max_rel_x, c.max_rel_xi, c.first_fire_mismatch),
            (0.0, 0.0, None)
        );
        let mut b = a.clone();
        b.samples.pop();
        assert!(matches!(compare(&a, &b, 1e-6), Err(Error::GridMismatch(_))));
    }
}
