//! Deterministic file writers and stdout summaries. Every artifact embeds the
//! resolved configuration so a result file is reproducible on its own; no
//! timestamps or hostnames, so reruns are byte-identical.

use crate::config::RunConfig;
use nfcomb_core::{Error, Result, ScenarioRun, Waveform};
use serde_json::json;

/// Trace CSV: `# config=` preamble, then one row per grid sample.
pub fn trace_csv(config: &RunConfig, input: &Waveform, output: &Waveform) -> Result<String> {
    let envelope = json!({
        "config": config,
        "code_version": env!("CARGO_PKG_VERSION"),
    });
    let mut out = String::new();
    out.push_str("# schema=nfcomb-trace/1\n");
    out.push_str(&format!(
        "# config={}\n",
        serde_json::to_string(&envelope).map_err(|e| Error::InvalidArgument(e.to_string()))?
    ));

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["tau_us", "input_intensity", "output_intensity", "output_phase_rad"])
        .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    for ((t, i), o) in input.grid.times().zip(&input.samples).zip(&output.samples) {
        let phase = if o.norm_sqr() > 0.0 { o.arg() } else { 0.0 };
        w.write_record([
            t.to_string(),
            i.norm_sqr().to_string(),
            o.norm_sqr().to_string(),
            phase.to_string(),
        ])
        .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    }
    let body = w
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv: {e}")))?;
    out.push_str(&String::from_utf8(body).map_err(|e| Error::InvalidArgument(e.to_string()))?);
    Ok(out)
}

/// JSON report for an echo run: resolved config, derived working point, echo
/// grades and engine warnings.
pub fn echo_report_json(config: &RunConfig, run: &ScenarioRun) -> Result<String> {
    let sc = &run.scenario;
    let value = json!({
        "config": config,
        "code_version": env!("CARGO_PKG_VERSION"),
        "derived": {
            "field_mt": sc.field_tesla * 1e3,
            "t0_us": sc.comb.t0,
            "tooth_count": sc.comb.tooth_count(),
            "tooth_spacing_khz": sc.comb.spacing / std::f64::consts::TAU * 1e3,
            "finesse": sc.comb.finesse,
            "xi": sc.stack.segments.iter().map(|s| s.teeth.iter().map(|t| t.thickness).sum::<f64>()).sum::<f64>(),
            "xi_eff0": sc.xi_eff0,
            "beta": sc.beta,
            "thickness_um": sc.thickness_um,
            "input_fwhm_us": sc.input_fwhm,
            "switch_time_us": sc.switch.as_ref().map(|s| s.time),
            "expected_echo_us": sc.echo_time,
            "theory_efficiency": run.theory_efficiency,
        },
        "echo": run.report,
        "warnings": run.sim.warnings,
    });
    serde_json::to_string_pretty(&value)
        .map_err(|e| Error::InvalidArgument(e.to_string()))
        .map(|s| s + "\n")
}

/// Report for a zero-field absorption run: no echo section, just the line
/// transmission bookkeeping.
pub fn absorption_report_json(
    config: &RunConfig,
    isotope: &str,
    xi: f64,
    beta: f64,
    input: &Waveform,
    output: &Waveform,
) -> Result<String> {
    let value = json!({
        "config": config,
        "code_version": env!("CARGO_PKG_VERSION"),
        "derived": {
            "isotope": isotope,
            "xi": xi,
            "beta": beta,
            "energy_transmission": output.energy() / input.energy(),
        },
        "echo": null,
    });
    serde_json::to_string_pretty(&value)
        .map_err(|e| Error::InvalidArgument(e.to_string()))
        .map(|s| s + "\n")
}

pub fn summarize_echo(run: &ScenarioRun) {
    let sc = &run.scenario;
    println!(
        "comb     {} teeth, Δω/2π = {:.3} kHz, F = {:.3}, T0 = {:.4} µs",
        sc.comb.tooth_count(),
        sc.comb.spacing / std::f64::consts::TAU * 1e3,
        sc.comb.finesse,
        sc.comb.t0
    );
    println!(
        "medium   ξ = {:.4}, ξ_eff⁰ = {:.4}, β = {:.4}",
        sc.stack
            .segments
            .iter()
            .map(|s| s.teeth.iter().map(|t| t.thickness).sum::<f64>())
            .sum::<f64>(),
        sc.xi_eff0,
        sc.beta
    );
    println!("input    FWHM {:.4} µs, expected echo at {:.4} µs", sc.input_fwhm, sc.echo_time);
    match run.report.peak_time {
        Some(t) => println!(
            "echo     t = {:.4} µs, efficiency {:.5}, fidelity {:.4}, leaked {:.4}",
            t, run.report.efficiency, run.report.fidelity, run.report.leaked_fraction
        ),
        None => println!("echo     none found"),
    }
    println!("theory   {:.5} (uniform-comb closed form)", run.theory_efficiency);
}

pub fn write_file(path: &std::path::Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)
        .map_err(|e| Error::InvalidArgument(format!("write {}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nfcomb_core::{Complex64, TimeGrid};

    #[test]
    fn trace_csv_has_preamble_and_rows() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"isotope": "181Ta", "field_mt": 23.0, "thickness_um": 2.6}"#,
        )
        .unwrap();
        let grid = TimeGrid::new(0.0, 0.5, 3).unwrap();
        let wave = Waveform::from_fn(grid, |t| Complex64::new(t, 0.0));
        let csv = trace_csv(&cfg, &wave, &wave).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "# schema=nfcomb-trace/1");
        assert!(lines.next().unwrap().starts_with("# config={"));
        assert_eq!(
            lines.next().unwrap(),
            "tau_us,input_intensity,output_intensity,output_phase_rad"
        );
        assert_eq!(csv.lines().count(), 6);
        // zero samples report zero phase, not atan2 noise
        assert!(csv.lines().nth(3).unwrap().ends_with(",0"));
    }
}
