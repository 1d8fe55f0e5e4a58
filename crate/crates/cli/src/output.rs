//! Run artifacts: `trajectory.csv`, `summary.json` and an optional SVG plot.

use std::fmt::Write as _;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use pelletctl_core::verify::Metrics;
use pelletctl_core::{
    certify, envelope, simulate, verify, CertificateF64, Check, CheckStatus, ScenarioF64,
    TrajectoryF64, VerifyReportF64,
};
use serde::Serialize;

use crate::error::CliError;
use crate::schema::ScenarioFile;

/// C-style `%.9e`: nine mantissa digits, signed exponent of at least two digits.
pub fn format_sci(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{v:.9e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn write_trajectory_csv<W: Write>(traj: &TrajectoryF64, mut w: W) -> io::Result<()> {
    writeln!(w, "t,j,n_e,x,xi,T,T_p,fired")?;
    for s in &traj.samples {
        let st = &s.state;
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            format_sci(s.time.t),
            s.time.j,
            format_sci(st.density(&traj.plant)),
            format_sci(st.x),
            format_sci(st.xi),
            format_sci(st.t_timer),
            format_sci(st.t_prep_timer),
            u8::from(s.fired),
        )?;
    }
    w.flush()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub status: RunStatus,
    /// Names of the applicable checks that failed.
    pub failures: Vec<&'static str>,
    /// `null` when the check does not apply (e.g. no certificate).
    pub envelope_ok: Option<bool>,
    pub dwell_ok: Option<bool>,
    pub contraction_ok: Option<bool>,
    pub zeno_ok: Option<bool>,
    pub widened_bound_ok: Option<bool>,
    pub windup_detected: bool,
    /// Plain SDM or SDM_IC behind a multi-tick preparation gate.
    pub nonstandard_configuration: bool,
    pub scenario: ScenarioFile,
    pub certificate: CertificateF64,
    pub metrics: Metrics<f64>,
    pub verify: VerifyReportF64,
}

impl Summary {
    pub fn passed(&self) -> bool {
        self.status == RunStatus::Pass
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOptions {
    pub svg: bool,
    /// Trailing fraction of the horizon treated as steady state.
    pub steady_fraction: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        Self {
            svg: false,
            steady_fraction: 0.5,
        }
    }
}

pub struct RunOutcome {
    pub trajectory: TrajectoryF64,
    pub summary: Summary,
}

fn verdict(c: &Check<f64>) -> Option<bool> {
    match c.status {
        CheckStatus::Pass => Some(true),
        CheckStatus::Fail => Some(false),
        CheckStatus::NotApplicable => None,
    }
}

/// Simulates, certifies and verifies without touching the filesystem.
pub fn evaluate(scenario: &ScenarioF64, steady_fraction: f64) -> Result<RunOutcome, CliError> {
    let trajectory = simulate(scenario)?;
    let certificate = certify(&scenario.plant, &scenario.actuator, &scenario.controller)?;
    let report = verify(&trajectory, &certificate, steady_fraction)?;
    let failures = report.failures();
    let summary = Summary {
        status: if failures.is_empty() {
            RunStatus::Pass
        } else {
            RunStatus::Fail
        },
        failures,
        envelope_ok: verdict(&report.envelope),
        dwell_ok: verdict(&report.dwell),
        contraction_ok: verdict(&report.contraction),
        zeno_ok: verdict(&report.zeno),
        widened_bound_ok: verdict(&report.widened_bound),
        windup_detected: report.windup_detected,
        nonstandard_configuration: certificate.l > 1
            && scenario.controller.is_nonstandard_with(&scenario.actuator),
        scenario: ScenarioFile::from_scenario(scenario),
        certificate,
        metrics: report.metrics,
        verify: report,
    };
    Ok(RunOutcome {
        trajectory,
        summary,
    })
}

/// Evaluates the scenario and writes its artifacts into `out_dir`.
pub fn run(
    scenario: &ScenarioF64,
    out_dir: &Path,
    opts: RunOptions,
) -> Result<RunOutcome, CliError> {
    let outcome = evaluate(scenario, opts.steady_fraction)?;
    fs::create_dir_all(out_dir).map_err(|e| CliError::io(out_dir, e))?;

    let csv = out_dir.join("trajectory.csv");
    let f = fs::File::create(&csv).map_err(|e| CliError::io(&csv, e))?;
    write_trajectory_csv(&outcome.trajectory, BufWriter::new(f))
        .map_err(|e| CliError::io(&csv, e))?;

    let json = out_dir.join("summary.json");
    let text = serde_json::to_string_pretty(&outcome.summary).expect("summary serializes");
    fs::write(&json, text + "\n").map_err(|e| CliError::io(&json, e))?;

    if opts.svg {
        let svg = out_dir.join("plot.svg");
        let text = render_svg(
            &outcome.trajectory,
            &outcome.summary.certificate,
            scenario.x0,
        );
        fs::write(&svg, text).map_err(|e| CliError::io(&svg, e))?;
    }
    Ok(outcome)
}

struct Panel {
    top: f64,
    height: f64,
    lo: f64,
    hi: f64,
}

const W: f64 = 900.0;
const PAD: f64 = 60.0;
const PANEL_H: f64 = 260.0;

impl Panel {
    fn new(top: f64, values: impl Iterator<Item = f64>) -> Self {
        let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| {
            (a.min(v), b.max(v))
        });
        let hi = if hi > lo { hi } else { lo + 1.0 };
        Self {
            top,
            height: PANEL_H,
            lo,
            hi,
        }
    }

    fn y(&self, v: f64) -> f64 {
        self.top + self.height * (self.hi - v) / (self.hi - self.lo)
    }

    fn hline(&self, out: &mut String, v: f64, color: &str) {
        let y = self.y(v);
        let _ = writeln!(
            out,
            r#"<line x1="{PAD}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-dasharray="4 4"/>"#,
            W - PAD
        );
    }

    fn label(&self, out: &mut String, text: &str) {
        let _ = writeln!(
            out,
            r#"<text x="{PAD}" y="{:.2}" font-family="sans-serif" font-size="12">{text}</text>"#,
            self.top - 8.0
        );
    }
}

fn polyline(out: &mut String, pts: impl Iterator<Item = (f64, f64)>, style: &str) {
    let pts: Vec<String> = pts.map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
    let _ = writeln!(
        out,
        r#"<polyline points="{}" fill="none" {style}/>"#,
        pts.join(" ")
    );
}

/// Two stacked panels: `x` with the `(-alpha, alpha]` band, the certified
/// envelope edges when there is a certificate and launch markers; `n_e` below.
pub fn render_svg(traj: &TrajectoryF64, cert: &CertificateF64, x0: f64) -> String {
    let plant = traj.plant;
    let alpha = plant.alpha;
    let t_end = traj.last().map_or(1.0, |s| s.time.t).max(f64::MIN_POSITIVE);
    let px = |t: f64| PAD + (W - 2.0 * PAD) * t / t_end;
    let env: Vec<(f64, f64, f64)> = (0..=200)
        .map(|i| {
            let t = t_end * i as f64 / 200.0;
            let e = envelope(t, x0, &plant);
            (t, e.lower, e.upper)
        })
        .collect();

    let xs = traj.samples.iter().map(|s| s.state.x);
    let mut bounds: Vec<f64> = vec![alpha, -alpha];
    if cert.feasible {
        bounds.extend(env.iter().flat_map(|&(_, lo, hi)| [lo, hi]));
    }
    let top = Panel::new(PAD, xs.chain(bounds));
    let bottom = Panel::new(
        2.0 * PAD + PANEL_H,
        traj.samples
            .iter()
            .map(|s| s.state.density(&plant))
            .chain([0.0, plant.r]),
    );
    let h = 3.0 * PAD + 2.0 * PANEL_H;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{h}" viewBox="0 0 {W} {h}">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{h}" fill="white"/>"#);

    top.label(
        &mut out,
        &format!(
            "x = r - n_e [m^-3], {} (t_end = {t_end} s)",
            traj.controller.variant
        ),
    );
    for level in [alpha, -alpha] {
        top.hline(&mut out, level, "#999");
    }
    if cert.feasible {
        let style = r##"stroke="#c33" stroke-dasharray="6 3""##;
        polyline(
            &mut out,
            env.iter().map(|&(t, _, hi)| (px(t), top.y(hi))),
            style,
        );
        polyline(
            &mut out,
            env.iter().map(|&(t, lo, _)| (px(t), top.y(lo))),
            style,
        );
    }
    polyline(
        &mut out,
        traj.samples
            .iter()
            .map(|s| (px(s.time.t), top.y(s.state.x))),
        r##"stroke="#236""##,
    );
    for f in traj.fires() {
        let _ = writeln!(
            out,
            r##"<circle cx="{:.2}" cy="{:.2}" r="2" fill="#e80"/>"##,
            px(f.t),
            top.y(f.after.x)
        );
    }

    bottom.label(&mut out, "n_e [m^-3]");
    bottom.hline(&mut out, plant.r, "#999");
    polyline(
        &mut out,
        traj.samples
            .iter()
            .map(|s| (px(s.time.t), bottom.y(s.state.density(&plant)))),
        r##"stroke="#363""##,
    );
    out.push_str("</svg>\n");
    out
}
