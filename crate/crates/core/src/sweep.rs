//! Parallel (ξ, T0) grid driver for efficiency/fidelity contour maps.
//!
//! The T0 axis is realized by varying the magnetic field, which drags Δω,
//! finesse and the matched input duration along with it — the same coupling
//! the contour figures imply.

use crate::engine::EngineConfig;
use crate::error::{Error, Result};
use crate::isotope::IsotopeParams;
use crate::scenario::{run_scenario, CombSource, LossModel, Protocol, ScenarioSpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

fn default_linewidth_factor() -> f64 {
    1.0
}
fn default_switch_fraction() -> f64 {
    0.5
}
fn default_one() -> f64 {
    1.0
}
fn default_steps_per_beat() -> usize {
    64
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepPlan {
    pub comb: CombSource,
    pub protocol: Protocol,
    pub loss: LossModel,
    /// Total optical thickness axis, strictly increasing.
    pub xi_values: Vec<f64>,
    /// Rephasing-time axis (µs), strictly increasing.
    pub t0_values: Vec<f64>,
    #[serde(default = "default_linewidth_factor")]
    pub linewidth_factor: f64,
    #[serde(default)]
    pub photoelectric_per_xi: Option<f64>,
    #[serde(default = "default_switch_fraction")]
    pub switch_fraction: f64,
    #[serde(default)]
    pub switch_ramp: f64,
    #[serde(default = "default_one")]
    pub input_duration_factor: f64,
    #[serde(default = "default_steps_per_beat")]
    pub steps_per_beat: usize,
    #[serde(default)]
    pub slices: Option<usize>,
    /// Worker threads; None lets the pool pick.
    #[serde(default)]
    pub threads: Option<usize>,
}

impl SweepPlan {
    fn point_spec(&self, xi: f64, t0: f64) -> ScenarioSpec {
        ScenarioSpec {
            comb: self.comb.clone(),
            protocol: self.protocol,
            loss: self.loss,
            xi,
            t0,
            linewidth_factor: self.linewidth_factor,
            photoelectric_per_xi: self.photoelectric_per_xi,
            switch_fraction: self.switch_fraction,
            switch_ramp: self.switch_ramp,
            input_duration_factor: self.input_duration_factor,
            input_fwhm_us: None,
            switch_time_us: None,
            steps_per_beat: self.steps_per_beat,
            slices: self.slices,
            grid: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, axis) in [("xi_values", &self.xi_values), ("t0_values", &self.t0_values)] {
            if axis.is_empty() {
                return Err(Error::Plan(format!("{name} is empty")));
            }
            if axis.iter().any(|v| !v.is_finite()) {
                return Err(Error::Plan(format!("{name} has non-finite entries")));
            }
            if axis.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Plan(format!("{name} must be strictly increasing")));
            }
        }
        // knob checks are shared with single runs
        self.point_spec(self.xi_values[0], self.t0_values[0]).validate()?;
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepPoint {
    pub xi: f64,
    pub t0_us: f64,
    pub field_tesla: Option<f64>,
    pub xi_eff0: Option<f64>,
    pub finesse: Option<f64>,
    pub beta: Option<f64>,
    pub efficiency: Option<f64>,
    pub fidelity: Option<f64>,
    pub echo_time_us: Option<f64>,
    /// Closed-form uniform-comb prediction at the same working point.
    pub theory_efficiency: Option<f64>,
    /// Resolution guard passed and an echo was identified.
    pub converged: bool,
    /// "ok" or the per-point failure message.
    pub status: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepResult {
    pub plan: SweepPlan,
    pub code_version: String,
    /// Row-major: xi index × t0 index.
    pub points: Vec<SweepPoint>,
}

impl SweepResult {
    pub fn shape(&self) -> (usize, usize) {
        (self.plan.xi_values.len(), self.plan.t0_values.len())
    }

    pub fn point(&self, xi_index: usize, t0_index: usize) -> &SweepPoint {
        &self.points[xi_index * self.plan.t0_values.len() + t0_index]
    }
}

fn failed_point(xi: f64, t0: f64, err: &Error) -> SweepPoint {
    SweepPoint {
        xi,
        t0_us: t0,
        field_tesla: None,
        xi_eff0: None,
        finesse: None,
        beta: None,
        efficiency: None,
        fidelity: None,
        echo_time_us: None,
        theory_efficiency: None,
        converged: false,
        status: err.to_string(),
    }
}

fn run_point(plan: &SweepPlan, table: &[IsotopeParams], xi: f64, t0: f64) -> SweepPoint {
    let spec = plan.point_spec(xi, t0);
    match run_scenario(&spec, table, &EngineConfig::default()) {
        Ok(run) => SweepPoint {
            xi,
            t0_us: t0,
            field_tesla: Some(run.scenario.field_tesla),
            xi_eff0: Some(run.scenario.xi_eff0),
            finesse: Some(run.scenario.comb.finesse),
            beta: Some(run.scenario.beta),
            efficiency: Some(run.report.efficiency),
            fidelity: Some(run.report.fidelity),
            echo_time_us: run.report.peak_time,
            theory_efficiency: Some(run.theory_efficiency),
            converged: run.sim.warnings.is_empty() && run.report.found,
            status: "ok".into(),
        },
        Err(e) => failed_point(xi, t0, &e),
    }
}

/// Evaluate the full grid. Point failures land in the point's `status`;
/// only plan-level problems abort the sweep. Output order is deterministic
/// regardless of scheduling.
pub fn run_sweep(plan: &SweepPlan, table: &[IsotopeParams]) -> Result<SweepResult> {
    plan.validate()?;
    let coords: Vec<(f64, f64)> = plan
        .xi_values
        .iter()
        .flat_map(|&xi| plan.t0_values.iter().map(move |&t0| (xi, t0)))
        .collect();

    let work = || -> Vec<SweepPoint> {
        coords
            .par_iter()
            .map(|&(xi, t0)| run_point(plan, table, xi, t0))
            .collect()
    };
    let points = match plan.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::Plan(format!("worker pool: {e}")))?
            .install(work),
        None => work(),
    };

    Ok(SweepResult {
        plan: plan.clone(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        points,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Optimum {
    pub xi: f64,
    pub t0_us: f64,
    pub xi_index: usize,
    pub t0_index: usize,
    pub efficiency: f64,
    pub xi_eff0: Option<f64>,
    /// False when the best point touches the grid boundary of a >1-point axis.
    pub interior: bool,
    /// Parabolic vertex through the three neighbors, when interior and finite.
    pub refined_xi: Option<f64>,
    pub refined_t0: Option<f64>,
}

fn parabola_vertex(x: [f64; 3], y: [f64; 3]) -> Option<f64> {
    let num = y[0] * (x[1] * x[1] - x[2] * x[2])
        + y[1] * (x[2] * x[2] - x[0] * x[0])
        + y[2] * (x[0] * x[0] - x[1] * x[1]);
    let den = 2.0 * (y[0] * (x[1] - x[2]) + y[1] * (x[2] - x[0]) + y[2] * (x[0] - x[1]));
    if den == 0.0 {
        return None;
    }
    let v = num / den;
    // only trust a vertex that is a maximum inside the bracket
    if v.is_finite() && v > x[0] && v < x[2] && y[1] >= y[0] && y[1] >= y[2] {
        Some(v)
    } else {
        None
    }
}

/// Highest-efficiency grid point; ties break toward smaller ξ, then smaller
/// T0 (the cheaper absorber). Errors when no point produced a positive echo.
pub fn find_optimum(result: &SweepResult) -> Result<Optimum> {
    let (n_xi, n_t0) = result.shape();
    let mut best: Option<(usize, usize, f64)> = None;
    for ix in 0..n_xi {
        for it in 0..n_t0 {
            if let Some(eff) = result.point(ix, it).efficiency {
                if eff > 0.0 && best.map_or(true, |(_, _, b)| eff > b) {
                    best = Some((ix, it, eff));
                }
            }
        }
    }
    let (xi_index, t0_index, efficiency) =
        best.ok_or_else(|| Error::Plan("no optimum: no grid point produced an echo".into()))?;

    let xi_axis = &result.plan.xi_values;
    let t0_axis = &result.plan.t0_values;
    let interior_xi = n_xi == 1 || (xi_index > 0 && xi_index < n_xi - 1);
    let interior_t0 = n_t0 == 1 || (t0_index > 0 && t0_index < n_t0 - 1);

    let eff_at = |ix: usize, it: usize| result.point(ix, it).efficiency;
    let refined_xi = if n_xi >= 3 && xi_index > 0 && xi_index < n_xi - 1 {
        match (
            eff_at(xi_index - 1, t0_index),
            eff_at(xi_index + 1, t0_index),
        ) {
            (Some(lo), Some(hi)) => parabola_vertex(
                [xi_axis[xi_index - 1], xi_axis[xi_index], xi_axis[xi_index + 1]],
                [lo, efficiency, hi],
            ),
            _ => None,
        }
    } else {
        None
    };
    let refined_t0 = if n_t0 >= 3 && t0_index > 0 && t0_index < n_t0 - 1 {
        match (
            eff_at(xi_index, t0_index - 1),
            eff_at(xi_index, t0_index + 1),
        ) {
            (Some(lo), Some(hi)) => parabola_vertex(
                [t0_axis[t0_index - 1], t0_axis[t0_index], t0_axis[t0_index + 1]],
                [lo, efficiency, hi],
            ),
            _ => None,
        }
    } else {
        None
    };

    Ok(Optimum {
        xi: xi_axis[xi_index],
        t0_us: t0_axis[t0_index],
        xi_index,
        t0_index,
        efficiency,
        xi_eff0: result.point(xi_index, t0_index).xi_eff0,
        interior: interior_xi && interior_t0,
        refined_xi,
        refined_t0,
    })
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One row per grid point; `# config=` preamble carries the resolved plan.
pub fn sweep_to_csv(result: &SweepResult) -> Result<String> {
    let envelope = serde_json::json!({
        "plan": result.plan,
        "code_version": result.code_version,
    });
    let mut out = String::new();
    out.push_str("# schema=nfcomb-sweep/1\n");
    out.push_str(&format!("# config={}\n", serde_json::to_string(&envelope)
        .map_err(|e| Error::Plan(format!("plan serialization: {e}")))?));

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "xi",
        "t0_us",
        "field_tesla",
        "xi_eff0",
        "finesse",
        "beta",
        "efficiency",
        "fidelity",
        "echo_time_us",
        "theory_efficiency",
        "converged",
        "status",
    ])
    .map_err(|e| Error::Plan(format!("csv: {e}")))?;
    for p in &result.points {
        w.write_record([
            p.xi.to_string(),
            p.t0_us.to_string(),
            fmt_opt(p.field_tesla),
            fmt_opt(p.xi_eff0),
            fmt_opt(p.finesse),
            fmt_opt(p.beta),
            fmt_opt(p.efficiency),
            fmt_opt(p.fidelity),
            fmt_opt(p.echo_time_us),
            fmt_opt(p.theory_efficiency),
            p.converged.to_string(),
            p.status.clone(),
        ])
        .map_err(|e| Error::Plan(format!("csv: {e}")))?;
    }
    let body = w
        .into_inner()
        .map_err(|e| Error::Plan(format!("csv: {e}")))?;
    out.push_str(&String::from_utf8(body).map_err(|e| Error::Plan(format!("csv: {e}")))?);
    Ok(out)
}

pub fn sweep_to_json(result: &SweepResult) -> Result<String> {
    serde_json::to_string_pretty(result).map_err(|e| Error::Plan(format!("json: {e}")))
}
