//! One-parameter sweeps, evaluated in parallel.

use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;

use pelletctl_core::verify::Metrics;
use pelletctl_core::{CertificateF64, CheckStatus, ScenarioF64};
use rayon::prelude::*;

use crate::error::CliError;
use crate::output::{evaluate, format_sci};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Delta,
    TC,
    R,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::Delta => "delta",
            Axis::TC => "t_c",
            Axis::R => "r",
        }
    }

    fn apply(self, base: &ScenarioF64, v: f64) -> ScenarioF64 {
        let mut s = base.clone();
        match self {
            Axis::Delta => s.controller.delta = v,
            Axis::TC => s.actuator.t_c = v,
            Axis::R => {
                // Keep the starting point relative to the reference.
                s.x0 += v - s.plant.r;
                s.plant.r = v;
            }
        }
        s
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "delta" => Ok(Axis::Delta),
            "t_c" => Ok(Axis::TC),
            "r" => Ok(Axis::R),
            other => Err(format!("unknown axis `{other}` (expected delta, t_c or r)")),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub value: f64,
    pub certificate: CertificateF64,
    pub metrics: Metrics<f64>,
    pub envelope: CheckStatus,
    pub passed: bool,
}

/// Evaluates `base` with `axis` set to each of `values`. Every value is
/// validated before any simulation runs; infeasible configurations are kept.
pub fn sweep(base: &ScenarioF64, axis: Axis, values: &[f64]) -> Result<Vec<SweepRow>, CliError> {
    if values.is_empty() {
        return Err(CliError::EmptyAxis);
    }
    let scenarios: Vec<_> = values.iter().map(|&v| axis.apply(base, v)).collect();
    for s in &scenarios {
        s.validate()?;
    }
    scenarios
        .par_iter()
        .zip(values.par_iter())
        .map(|(s, &value)| {
            let out = evaluate(s, 0.5)?;
            Ok(SweepRow {
                value,
                passed: out.summary.passed(),
                envelope: out.summary.verify.envelope.status,
                certificate: out.summary.certificate,
                metrics: out.summary.metrics,
            })
        })
        .collect()
}

pub fn write_sweep_csv<W: Write>(axis: Axis, rows: &[SweepRow], mut w: W) -> io::Result<()> {
    writeln!(
        w,
        "{axis},feasible,tc_max,delta_max,pellets,min_x_steady,max_x_steady,mean_x_steady,settling_time,envelope,status"
    )?;
    for r in rows {
        let envelope = match r.envelope {
            CheckStatus::Pass => "pass",
            CheckStatus::Fail => "fail",
            CheckStatus::NotApplicable => "n/a",
        };
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            format_sci(r.value),
            u8::from(r.certificate.feasible),
            format_sci(r.certificate.tc_max),
            format_sci(r.certificate.delta_max),
            r.metrics.pellet_count,
            format_sci(r.metrics.min_x_steady),
            format_sci(r.metrics.max_x_steady),
            format_sci(r.metrics.mean_x_steady),
            r.metrics
                .settling_time
                .map_or_else(|| "never".into(), format_sci),
            envelope,
            if r.passed { "pass" } else { "fail" },
        )?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use pelletctl_core::{ActuatorSpec, ControllerSpec, PlantParams, Variant};

    fn base() -> ScenarioF64 {
        ScenarioF64::new(
            PlantParams::new(0.1, 5e19, 1e19).unwrap(),
            ActuatorSpec::centrifuge(1.0 / 70.0).unwrap(),
            ControllerSpec::new(Variant::Nm, 1e16).unwrap(),
            5e19,
            0.2,
        )
        .unwrap()
    }

    #[test]
    fn empty_axis() {
        assert!(matches!(
            sweep(&base(), Axis::Delta, &[]),
            Err(CliError::EmptyAxis)
        ));
    }

    #[test]
    fn rows_keep_input_order_and_infeasible_entries() {
        let values = [1e15, 1e16, 1e17, 1e18];
        let rows = sweep(&base(), Axis::Delta, &values).unwrap();
        assert_eq!(rows.iter().map(|r| r.value).collect::<Vec<_>>(), values);
        assert!(rows[0].certificate.feasible);
        assert!(!rows[3].certificate.feasible);
        let mut buf = Vec::new();
        write_sweep_csv(Axis::Delta, &rows, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);
    }

    #[test]
    fn larger_threshold_raises_mean_error() {
        let base = ScenarioF64 {
            t_end: 1.0,
            ..base()
        };
        let rows = sweep(&base, Axis::Delta, &[1.0, 1e15, 1.569e16]).unwrap();
        let means: Vec<f64> = rows.iter().map(|r| r.metrics.mean_x_steady).collect();
        assert!(means.windows(2).all(|w| w[0] <= w[1]), "{means:?}");
    }

    #[test]
    fn invalid_value_rejected_before_running() {
        let r = sweep(&base(), Axis::R, &[6e19, 0.5e19]);
        assert!(matches!(r, Err(CliError::Validation(_))));
    }

    #[test]
    fn axis_names_round_trip() {
        for a in [Axis::Delta, Axis::TC, Axis::R] {
            assert_eq!(a.name().parse::<Axis>().unwrap(), a);
        }
        assert!("tau".parse::<Axis>().is_err());
    }
}
