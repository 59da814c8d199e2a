//! Running scenarios, summarizing traces and writing CSV.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::esc::EscController;
use crate::rcesc::RcEscController;
use crate::sampled::{ConstantController, Controller, SampledDataLoop, SimulationTrace};
use crate::scenario::{ControllerKind, PlantSpec, Scenario};

/// Thresholds reported as "first time J drops below".
pub const COST_THRESHOLDS: [f64; 2] = [1e-1, 1e-2];

/// Pure function of a trace; every field can be recomputed from the CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryReport {
    pub rows: usize,
    /// Sum of cost components at the last recorded step.
    pub terminal_cost: f64,
    /// First recorded time with total cost below each of `COST_THRESHOLDS`.
    pub first_below: [Option<f64>; 2],
    /// Peak-to-peak of each input over the final 10% of rows.
    pub final_peak_to_peak: Vec<f64>,
    /// Largest `|d_i|` over the final 10% of rows.
    pub final_max_dither: f64,
}

impl SummaryReport {
    pub fn from_trace(trace: &SimulationTrace) -> Self {
        let n = trace.len();
        let total = |i: usize| trace.rows[i].cost.iter().sum::<f64>();
        let terminal_cost = if n == 0 { f64::NAN } else { total(n - 1) };
        let mut first_below = [None; 2];
        for (slot, thr) in first_below.iter_mut().zip(COST_THRESHOLDS) {
            *slot = (0..n).find(|&i| total(i) < thr).map(|i| trace.rows[i].t);
        }
        let tail = final_window(n);
        let m = trace.rows.first().map_or(0, |r| r.output.u.len());
        let final_peak_to_peak = (0..m)
            .map(|i| {
                let (lo, hi) = trace.rows[tail.clone()]
                    .iter()
                    .map(|r| r.output.u[i])
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
                hi - lo
            })
            .collect();
        let final_max_dither = trace.rows[tail]
            .iter()
            .flat_map(|r| r.output.dither.iter())
            .fold(0.0f64, |acc, d| acc.max(d.abs()));
        SummaryReport { rows: n, terminal_cost, first_below, final_peak_to_peak, final_max_dither }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "rows = {}", self.rows);
        let _ = writeln!(s, "terminal_cost = {}", fmt(self.terminal_cost));
        for (thr, t) in COST_THRESHOLDS.iter().zip(&self.first_below) {
            let t = t.map_or("never".to_string(), fmt);
            let _ = writeln!(s, "first_below_{thr:e} = {t}");
        }
        for (i, p) in self.final_peak_to_peak.iter().enumerate() {
            let _ = writeln!(s, "final_peak_to_peak_u_{} = {}", i + 1, fmt(*p));
        }
        let _ = writeln!(s, "final_max_abs_dither = {}", fmt(self.final_max_dither));
        s
    }
}

/// Rows making up the final 10% of a trace (at least one row when non-empty).
pub fn final_window(rows: usize) -> std::ops::Range<usize> {
    let len = (rows / 10).max(1).min(rows);
    rows - len..rows
}

/// Outcome of running one controller on a scenario.
#[derive(Debug)]
pub struct RunResult {
    pub scenario: String,
    pub controller: ControllerKind,
    pub trace: SimulationTrace,
    pub summary: SummaryReport,
    /// Set when the run stopped early; the trace holds the rows before it.
    pub error: Option<Error>,
}

impl RunResult {
    pub fn stem(&self) -> String {
        format!("{}_{}", self.scenario, self.controller.label())
    }
}

/// Runs the scenario's selected controller.
pub fn run_scenario(s: &Scenario) -> Result<RunResult> {
    run_controller(s, s.controller)
}

/// Runs ESC and RC/ESC on the same plant.
pub fn run_compare(s: &Scenario) -> Result<Vec<RunResult>> {
    Ok(vec![run_controller(s, ControllerKind::Esc)?, run_controller(s, ControllerKind::RcEsc)?])
}

/// Runs one controller. Configuration problems are returned as errors;
/// divergence is reported inside the result along with the partial trace.
pub fn run_controller(s: &Scenario, kind: ControllerKind) -> Result<RunResult> {
    s.validate()?;
    let mut plant = s.plant.build()?;
    let outcome = match kind {
        ControllerKind::RcEsc => {
            let mut c = RcEscController::new(s.rcesc_config()?)?;
            SampledDataLoop::new(s.sample_time, s.substeps, s.horizon)?.run(&mut plant, &mut c)
        }
        ControllerKind::Constant => {
            let value = s.constant.clone().ok_or_else(|| Error::Config {
                field: "controller.value".into(),
                reason: "constant value is missing".into(),
            })?;
            let mut c = ConstantController { value };
            SampledDataLoop::new(s.sample_time, s.substeps, s.horizon)?.run(&mut plant, &mut c)
        }
        ControllerKind::Esc => {
            let cfg = s.esc_config()?;
            let rate = s.esc.as_ref().map_or(1, |e| e.rate);
            let dt = s.sample_time / rate as f64;
            let substeps = match s.plant {
                PlantSpec::VanDerPol { .. } => s.substeps / rate,
                PlantSpec::Static { .. } => 1,
            };
            let mut c = EscController::new(cfg, dt)?;
            let l = SampledDataLoop::new(dt, substeps, s.horizon * rate)?.with_record_every(rate)?;
            let mut outcome = l.run(&mut plant, &mut c as &mut dyn Controller);
            // recorded rows sit on the sample-time grid
            let trace = match &mut outcome {
                Ok(trace) => trace,
                Err(failure) => &mut failure.trace,
            };
            for (i, row) in trace.rows.iter_mut().enumerate() {
                row.t = i as f64 * s.sample_time;
            }
            outcome.map_err(|mut f| {
                if let Error::Diverged { step, .. } = &mut f.error {
                    *step /= rate;
                }
                f
            })
        }
    };
    let (trace, error) = match outcome {
        Ok(trace) => (trace, None),
        Err(failure) => (failure.trace, Some(failure.error)),
    };
    let summary = SummaryReport::from_trace(&trace);
    Ok(RunResult { scenario: s.name.clone(), controller: kind, trace, summary, error })
}

fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// Column names for a trace, taken from the shape of its first row.
pub fn csv_header(trace: &SimulationTrace) -> Vec<String> {
    let mut cols = vec!["t_seconds".to_string()];
    let Some(row) = trace.rows.first() else {
        return cols;
    };
    let o = &row.output;
    let groups: [(&str, usize); 8] = [
        ("u", o.u.len()),
        ("du", o.delta_u.len()),
        ("d", o.dither.len()),
        ("J", row.cost.len()),
        ("z", o.z.len()),
        ("theta", o.theta.len()),
        ("grad", o.gradient.len()),
        ("x", row.state.len()),
    ];
    for (name, len) in groups {
        cols.extend((1..=len).map(|i| format!("{name}_{i}")));
    }
    cols
}

/// Renders the trace as CSV with 17 significant digits per value. An
/// `# error:` footer line is appended when `error` is given.
pub fn trace_to_csv(trace: &SimulationTrace, error: Option<&Error>) -> String {
    let header = csv_header(trace);
    let mut s = header.join(",");
    s.push('\n');
    for row in &trace.rows {
        let o = &row.output;
        let values = std::iter::once(&row.t)
            .chain(&o.u)
            .chain(&o.delta_u)
            .chain(&o.dither)
            .chain(&row.cost)
            .chain(&o.z)
            .chain(&o.theta)
            .chain(&o.gradient)
            .chain(&row.state);
        let line: Vec<String> = values.map(|v| fmt(*v)).collect();
        s.push_str(&line.join(","));
        s.push('\n');
    }
    if let Some(e) = error {
        let _ = writeln!(s, "# error: {e}");
    }
    s
}

pub fn export_csv(trace: &SimulationTrace, error: Option<&Error>, path: &Path) -> Result<()> {
    fs::write(path, trace_to_csv(trace, error)).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}

/// Writes `<stem>.csv` and `<stem>_summary.txt` into `dir`.
pub fn write_result(result: &RunResult, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|source| Error::Io { path: dir.to_path_buf(), source })?;
    let csv = dir.join(format!("{}.csv", result.stem()));
    export_csv(&result.trace, result.error.as_ref(), &csv)?;
    let summary = dir.join(format!("{}_summary.txt", result.stem()));
    let mut text = format!("scenario = {}\ncontroller = {}\n", result.scenario, result.controller.label());
    text.push_str(&result.summary.to_text());
    if let Some(e) = &result.error {
        let _ = writeln!(text, "error = {e}");
    }
    fs::write(&summary, text).map_err(|source| Error::Io { path: summary.clone(), source })?;
    Ok(vec![csv, summary])
}

/// Side-by-side summary of several runs of one scenario.
pub fn joint_summary(results: &[RunResult]) -> String {
    let mut s = String::new();
    for r in results {
        let _ = writeln!(s, "[{}]", r.stem());
        s.push_str(&r.summary.to_text());
        if let Some(e) = &r.error {
            let _ = writeln!(s, "error = {e}");
        }
        s.push('\n');
    }
    s
}
