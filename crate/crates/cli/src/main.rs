//! Command-line front end: pulse propagation, parameter sweeps, solver
//! cross-checks and isotope inspection.
//!
//! Exit codes: 0 on success, 1 on usage/config errors, 2 when a strict-mode
//! tolerance check fails.

mod config;
mod output;
mod svg;

use clap::{Args, Parser, Subcommand};
use config::{parse_config, ResolvedRun, RunConfig, ZeroFieldRun};
use nfcomb_core::comb::resonant_thickness;
use nfcomb_core::isotope::eddy_decay_time;
use nfcomb_core::medium::comb_segment;
use nfcomb_core::scenario::lookup_isotope;
use nfcomb_core::{
    analytic_echo, build_comb, gaussian_input, matched_duration, respond, run_scenario,
    simulate_with, CombSource, EngineConfig, Error, IsotopeParams, MediumStack, Protocol,
    SweepPlan, TimeGrid, Waveform,
};
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "nfcomb",
    version,
    about = "Nuclear frequency-comb photon storage: simulate, sweep, cross-check, inspect"
)]
struct Cli {
    /// Extra isotope table (JSON array); entries override built-ins by name.
    #[arg(long, global = true, value_name = "FILE")]
    isotopes: Option<PathBuf>,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Propagate a weak pulse through the comb and grade the echo.
    Simulate(SimulateArgs),
    /// Grid scan over optical thickness and rephasing period.
    Sweep(SweepArgs),
    /// Cross-check time-domain, frequency-domain and closed-form solvers.
    Oracle(OracleArgs),
    /// Print comb properties of an isotope (or list the table).
    Isotope(IsotopeArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Run configuration (JSON).
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Time-trace CSV destination (overrides the config's `outputs.csv`).
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Echo-report JSON destination (overrides `outputs.report`).
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Trace-plot SVG destination (overrides `outputs.svg`).
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
    /// Override the config's magnetic field, mT.
    #[arg(long, value_name = "MT")]
    field_mt: Option<f64>,
    /// Override the foil thickness, µm.
    #[arg(long, value_name = "UM")]
    thickness_um: Option<f64>,
    /// Override the optical thickness directly.
    #[arg(long, value_name = "XI")]
    xi: Option<f64>,
    /// Override the input FWHM, µs.
    #[arg(long, value_name = "US")]
    fwhm_us: Option<f64>,
    /// Override the switch time, µs.
    #[arg(long, value_name = "US")]
    switch_time_us: Option<f64>,
    /// Treat resolution warnings as failures (exit 2).
    #[arg(long)]
    strict: bool,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep plan (JSON): axes, protocol, loss model.
    #[arg(long, value_name = "FILE")]
    plan: PathBuf,
    /// Per-point CSV destination.
    #[arg(long, value_name = "FILE")]
    csv: Option<PathBuf>,
    /// Full-result JSON destination.
    #[arg(long, value_name = "FILE")]
    json: Option<PathBuf>,
    /// Efficiency-heatmap SVG destination.
    #[arg(long, value_name = "FILE")]
    svg: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Run configuration (JSON); must describe a static (no-switch) run.
    #[arg(long, value_name = "FILE")]
    config: PathBuf,
    /// Comparison-report JSON destination.
    #[arg(long, value_name = "FILE")]
    report: Option<PathBuf>,
    /// Exit 2 when a deviation exceeds its tolerance.
    #[arg(long)]
    strict: bool,
    /// Engine-vs-filter relative L2 tolerance.
    #[arg(long, default_value_t = 1e-3, value_name = "TOL")]
    tol_filter: f64,
    /// Engine-vs-closed-form echo amplitude tolerance (uniform combs).
    #[arg(long, default_value_t = 0.05, value_name = "TOL")]
    tol_analytic: f64,
}

#[derive(Args)]
struct IsotopeArgs {
    /// Isotope name, e.g. 181Ta.
    name: Option<String>,
    /// List the whole table instead.
    #[arg(long, conflicts_with = "name")]
    list: bool,
    /// Field for the working-point block, mT.
    #[arg(long, default_value_t = 23.0, value_name = "MT")]
    field_mt: f64,
    /// Foil thickness for the eddy-current estimate, µm.
    #[arg(long, default_value_t = 2.6, value_name = "UM")]
    eddy_thickness_um: f64,
    /// Transverse foil size for the eddy-current estimate, mm.
    #[arg(long, default_value_t = 10.0, value_name = "MM")]
    eddy_width_mm: f64,
    /// Relative permeability for the eddy-current estimate.
    #[arg(long, default_value_t = 1.0, value_name = "MU")]
    eddy_mu_r: f64,
    /// Resistivity for the eddy-current estimate, Ω·m.
    #[arg(long, default_value_t = 1.31e-7, value_name = "OHM_M")]
    eddy_resistivity: f64,
}

/// Errors carry their exit code: usage/config problems exit 1, failed
/// strict-mode tolerance checks exit 2.
enum CliError {
    Usage(String),
    Tolerance(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Usage(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let table = match load_table(cli.isotopes.as_deref()) {
        Ok(t) => t,
        Err(CliError::Usage(msg)) | Err(CliError::Tolerance(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(1);
        }
    };
    let result = match cli.cmd {
        Cmd::Simulate(args) => cmd_simulate(&args, &table),
        Cmd::Sweep(args) => cmd_sweep(&args, &table),
        Cmd::Oracle(args) => cmd_oracle(&args, &table),
        Cmd::Isotope(args) => cmd_isotope(&args, &table),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Tolerance(msg)) => {
            eprintln!("tolerance failure: {msg}");
            ExitCode::from(2)
        }
    }
}

/// Built-in isotopes, with user-table entries replacing same-name records and
/// extending the list otherwise.
fn load_table(path: Option<&Path>) -> CliResult<Vec<IsotopeParams>> {
    let mut table = nfcomb_core::builtin_isotopes().to_vec();
    if let Some(path) = path {
        let text = read_text(path)?;
        let extra = nfcomb_core::load_isotope_table(&text)?;
        for iso in extra {
            match table.iter_mut().find(|t| t.name == iso.name) {
                Some(slot) => *slot = iso,
                None => table.push(iso),
            }
        }
    }
    Ok(table)
}

fn read_text(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("read {}: {e}", path.display())))
}

fn load_run_config(path: &Path) -> CliResult<RunConfig> {
    let text = read_text(path)?;
    Ok(parse_config(&text, &path.display().to_string())?)
}

fn write_out(path: &Path, contents: &str, wrote: &mut Vec<String>) -> CliResult<()> {
    output::write_file(path, contents)?;
    wrote.push(path.display().to_string());
    Ok(())
}

/// Flags beat config-file values; returns the effective path for one artifact.
fn pick_path<'a>(flag: &'a Option<PathBuf>, from_config: &Option<String>) -> Option<PathBuf> {
    flag.clone()
        .or_else(|| from_config.as_ref().map(PathBuf::from))
}

fn apply_overrides(cfg: &mut RunConfig, args: &SimulateArgs) {
    if let Some(v) = args.field_mt {
        cfg.field_mt = Some(v);
    }
    if let Some(v) = args.thickness_um {
        cfg.thickness_um = Some(v);
        cfg.xi = None;
    }
    if let Some(v) = args.xi {
        cfg.xi = Some(v);
    }
    if let Some(v) = args.fwhm_us {
        cfg.input.fwhm_us = Some(v);
    }
    if let Some(v) = args.switch_time_us {
        if let Some(sw) = &mut cfg.switch {
            sw.time_us = Some(v);
        } else {
            cfg.switch = Some(config::SwitchConfig {
                time_us: Some(v),
                fraction: 0.5,
                ramp_us: 0.0,
            });
        }
    }
}

fn engine_config(strict: bool) -> EngineConfig {
    EngineConfig { strict, ..EngineConfig::default() }
}

/// In strict mode a resolution-guard trip is a graded failure, not a typo.
fn grade_engine_error(e: Error, strict: bool) -> CliError {
    if strict && matches!(e, Error::Resolution(_)) {
        CliError::Tolerance(e.to_string())
    } else {
        CliError::Usage(e.to_string())
    }
}

fn print_warnings(warnings: &[String]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn cmd_simulate(args: &SimulateArgs, table: &[IsotopeParams]) -> CliResult<()> {
    let mut cfg = load_run_config(&args.config)?;
    apply_overrides(&mut cfg, args);
    let csv_path = pick_path(&args.csv, &cfg.outputs.csv);
    let report_path = pick_path(&args.report, &cfg.outputs.report);
    let svg_path = pick_path(&args.svg, &cfg.outputs.svg);
    let mut wrote = Vec::new();

    match cfg.resolve(table)? {
        ResolvedRun::Echo(spec) => {
            let run = run_scenario(&spec, table, &engine_config(args.strict))
                .map_err(|e| grade_engine_error(e, args.strict))?;
            print_warnings(&run.sim.warnings);
            output::summarize_echo(&run);
            if let Some(path) = csv_path {
                let csv = output::trace_csv(&cfg, &run.scenario.input, &run.sim.output)?;
                write_out(&path, &csv, &mut wrote)?;
            }
            if let Some(path) = report_path {
                write_out(&path, &output::echo_report_json(&cfg, &run)?, &mut wrote)?;
            }
            if let Some(path) = svg_path {
                let desc = serde_json::to_string(&cfg)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                let title = format!(
                    "{} echo, ξ = {:.2}, T0 = {:.2} µs",
                    spec.protocol.as_str(),
                    spec.xi,
                    spec.t0
                );
                let plot = svg::trace_plot(&run.scenario.input, &run.sim.output, &title, &desc);
                write_out(&path, &plot, &mut wrote)?;
            }
        }
        ResolvedRun::ZeroField(zf) => {
            let (input, sim_output, beta) = run_zero_field(&zf, table, args.strict)?;
            println!(
                "zero field: single unsplit line, ξ = {:.4}, β = {:.4} — absorption only, no echo",
                zf.xi, beta
            );
            println!(
                "energy transmission {:.5}",
                sim_output.energy() / input.energy()
            );
            if let Some(path) = csv_path {
                write_out(&path, &output::trace_csv(&cfg, &input, &sim_output)?, &mut wrote)?;
            }
            if let Some(path) = report_path {
                let report = output::absorption_report_json(
                    &cfg, &zf.isotope, zf.xi, beta, &input, &sim_output,
                )?;
                write_out(&path, &report, &mut wrote)?;
            }
            if let Some(path) = svg_path {
                let desc = serde_json::to_string(&cfg)
                    .map_err(|e| CliError::Usage(e.to_string()))?;
                let title = format!("{} absorption at zero field, ξ = {:.2}", zf.isotope, zf.xi);
                write_out(&path, &svg::trace_plot(&input, &sim_output, &title, &desc), &mut wrote)?;
            }
        }
    }
    for path in &wrote {
        println!("wrote {path}");
    }
    Ok(())
}

/// B = 0: one unsplit line. There is no rephasing period, so the grid runs a
/// few line lifetimes past the pulse instead of out to an echo.
fn run_zero_field(
    zf: &ZeroFieldRun,
    table: &[IsotopeParams],
    strict: bool,
) -> CliResult<(Waveform, Waveform, f64)> {
    let iso = lookup_isotope(table, &zf.isotope)?;
    let comb = build_comb(iso, 0.0, zf.linewidth_factor)?;
    let thickness_um = resonant_thickness(iso, 1.0)
        .ok()
        .map(|xi_per_um| zf.xi / xi_per_um)
        .unwrap_or(0.0);
    let stack = MediumStack::single(comb_segment(
        &comb,
        zf.xi,
        zf.photoelectric_exponent,
        thickness_um,
    )?)?;
    let fwhm = zf
        .input_fwhm_us
        .unwrap_or(zf.matched_factor * matched_duration(&comb));
    let pad = 2.75 * fwhm;
    let over = zf.grid.unwrap_or_default();
    let dt = over.dt_us.unwrap_or(fwhm / 24.0);
    let grid = TimeGrid::spanning(
        over.t_start_us.unwrap_or(-pad),
        over.t_end_us.unwrap_or(pad + 4.0 / comb.linewidth),
        dt,
    )?;
    let input = gaussian_input(grid, fwhm, 0.0)?;
    let mut cfg = engine_config(strict);
    cfg.slices = zf.slices;
    let sim = simulate_with(&input, &stack, None, &cfg)
        .map_err(|e| grade_engine_error(e, strict))?;
    print_warnings(&sim.warnings);
    let beta = (-zf.photoelectric_exponent / 2.0).exp();
    Ok((input, sim.output, beta))
}

fn cmd_sweep(args: &SweepArgs, table: &[IsotopeParams]) -> CliResult<()> {
    let text = read_text(&args.plan)?;
    let plan: SweepPlan = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("{}: {e}", args.plan.display())))?;
    let result = nfcomb_core::run_sweep(&plan, table)?;

    let (n_xi, n_t0) = result.shape();
    let failed = result.points.iter().filter(|p| p.status != "ok").count();
    println!("swept {n_xi} × {n_t0} points ({failed} failed)");
    match nfcomb_core::find_optimum(&result) {
        Ok(best) => {
            println!(
                "best efficiency {:.5} at ξ = {:.4}, T0 = {:.4} µs{}",
                best.efficiency,
                best.xi,
                best.t0_us,
                if best.interior { "" } else { " (on the grid edge)" }
            );
            if let (Some(rx), Some(rt)) = (best.refined_xi, best.refined_t0) {
                println!("refined optimum ξ = {:.4}, T0 = {:.4} µs", rx, rt);
            }
        }
        Err(e) => println!("no optimum: {e}"),
    }

    let mut wrote = Vec::new();
    if let Some(path) = &args.csv {
        write_out(path, &nfcomb_core::sweep_to_csv(&result)?, &mut wrote)?;
    }
    if let Some(path) = &args.json {
        let mut text = nfcomb_core::sweep_to_json(&result)?;
        text.push('\n');
        write_out(path, &text, &mut wrote)?;
    }
    if let Some(path) = &args.svg {
        let desc = serde_json::to_string(&json!({
            "plan": result.plan,
            "code_version": result.code_version,
        }))
        .map_err(|e| CliError::Usage(e.to_string()))?;
        write_out(path, &svg::sweep_heatmap(&result, &desc), &mut wrote)?;
    }
    for path in &wrote {
        println!("wrote {path}");
    }
    Ok(())
}

fn cmd_oracle(args: &OracleArgs, table: &[IsotopeParams]) -> CliResult<()> {
    let cfg = load_run_config(&args.config)?;
    if cfg.switch.is_some() || cfg.protocol != Protocol::PredeterminedZnfc {
        return Err(CliError::Usage(
            "oracle cross-checks static filters; drop `switch` and use the predetermined protocol"
                .into(),
        ));
    }
    let spec = match cfg.resolve(table)? {
        ResolvedRun::Echo(spec) => spec,
        ResolvedRun::ZeroField(_) => {
            return Err(CliError::Usage(
                "oracle needs a split comb; set `field_mt` > 0 or use a synthetic comb".into(),
            ))
        }
    };
    let scenario = nfcomb_core::build_scenario(&spec, table)?;
    let sim = simulate_with(&scenario.input, &scenario.stack, None, &engine_config(false))?;
    print_warnings(&sim.warnings);
    let filter = respond(&scenario.input, &scenario.stack)?;
    let closed = analytic_echo(
        &scenario.input,
        scenario.xi_eff0,
        scenario.comb.finesse,
        scenario.beta,
        spec.t0,
    )?;

    let engine = &sim.output;
    let d_filter = engine.rel_l2_distance(&filter)?;

    // grade the closed form on the echo window; fall back to the full trace
    // when there is no echo to window (ξ = 0)
    let uniform = matches!(spec.comb, CombSource::Uniform { .. });
    let (lo, hi) = (spec.t0 - scenario.input_fwhm, spec.t0 + scenario.input_fwhm);
    let windowed = engine.grid.t_start <= lo && hi <= engine.grid.t_end();
    let closed_echo_energy = if windowed { closed.energy_in(lo, hi)? } else { 0.0 };
    let (analytic_metric, analytic_kind) = if closed_echo_energy > 1e-30 {
        let ratio = (engine.energy_in(lo, hi)? / closed_echo_energy).sqrt();
        (ratio - 1.0, "echo_amplitude_ratio_minus_1")
    } else {
        (engine.rel_l2_distance(&closed)?, "full_trace_rel_l2")
    };

    println!("engine vs spectral filter: rel L2 = {d_filter:.3e}");
    println!(
        "engine vs closed form ({}): {analytic_metric:+.4e}{}",
        analytic_kind,
        if uniform { "" } else { "  [comb has non-uniform weights; reported, not gated]" }
    );

    if let Some(path) = &args.report {
        let value = json!({
            "config": cfg,
            "code_version": env!("CARGO_PKG_VERSION"),
            "uniform_comb": uniform,
            "engine_vs_filter_rel_l2": d_filter,
            "analytic_metric": analytic_metric,
            "analytic_metric_kind": analytic_kind,
            "tolerances": {"filter": args.tol_filter, "analytic": args.tol_analytic},
            "strict": args.strict,
        });
        let text = serde_json::to_string_pretty(&value)
            .map_err(|e| CliError::Usage(e.to_string()))?
            + "\n";
        output::write_file(path, &text)?;
        println!("wrote {}", path.display());
    }

    if args.strict {
        let mut breaches = Vec::new();
        if !(d_filter <= args.tol_filter) {
            breaches.push(format!(
                "engine vs filter rel L2 {d_filter:.3e} > {:.3e}",
                args.tol_filter
            ));
        }
        if uniform && !(analytic_metric.abs() <= args.tol_analytic) {
            breaches.push(format!(
                "engine vs closed form {:.4e} > {:.4e}",
                analytic_metric.abs(),
                args.tol_analytic
            ));
        }
        if !breaches.is_empty() {
            return Err(CliError::Tolerance(breaches.join("; ")));
        }
    }
    Ok(())
}

fn fmt_opt(v: Option<f64>, unit: &str) -> String {
    match v {
        Some(x) => format!("{x:.6}{unit}"),
        None => "missing".into(),
    }
}

fn cmd_isotope(args: &IsotopeArgs, table: &[IsotopeParams]) -> CliResult<()> {
    if args.list {
        for iso in table {
            let rate = iso
                .spacing_rate()
                .map(|r| format!("{:.4} MHz/T", r / std::f64::consts::TAU))
                .unwrap_or_else(|_| "unknown splitting".into());
            let missing = iso.missing_fields();
            let state = if missing.is_empty() {
                "complete".to_string()
            } else {
                format!("missing: {}", missing.join(", "))
            };
            println!(
                "{:8} {} teeth, {rate}, {state}",
                iso.name,
                iso.tooth_count()
            );
        }
        return Ok(());
    }
    let name = args
        .name
        .as_deref()
        .ok_or_else(|| CliError::Usage("pass an isotope name or --list".into()))?;
    let iso = lookup_isotope(table, name)?;

    println!("isotope {}", iso.name);
    println!(
        "  transition      {:.4} keV (multipole rank {})",
        iso.transition_energy_kev, iso.multipole_rank
    );
    println!(
        "  lifetime        {:.4} µs (Γ0 = {:.6} rad/µs)",
        iso.lifetime_us,
        iso.natural_linewidth()
    );
    println!(
        "  spins           {} → {}, comb teeth: {}",
        iso.spin_ground,
        iso.spin_excited,
        iso.tooth_count()
    );
    println!("  g factors       ground {}, excited {}", fmt_opt(iso.g_ground, ""), fmt_opt(iso.g_excited, ""));
    match iso.spacing_rate() {
        Ok(rate) => println!(
            "  splitting rate  {:.6} MHz/T",
            rate / std::f64::consts::TAU
        ),
        Err(_) => println!("  splitting rate  unknown (needs both g factors)"),
    }
    match resonant_thickness(iso, 1.0) {
        Ok(xi_per_um) => println!("  ξ per µm        {:.4}", xi_per_um),
        Err(_) => {
            println!("  ξ per µm        unknown (needs cross-section, density, recoilless fraction)")
        }
    }
    let missing = iso.missing_fields();
    if missing.is_empty() {
        println!("  record          complete");
    } else {
        println!("  record          missing: {}", missing.join(", "));
    }

    if let Ok(rate) = iso.spacing_rate() {
        let gamma = iso.natural_linewidth();
        let at = |b_mt: f64| -> (f64, f64, f64) {
            let spacing = rate * b_mt * 1e-3;
            let t0 = std::f64::consts::TAU / spacing;
            let finesse = spacing / gamma;
            let n = iso.tooth_count() as f64;
            let matched = 8.0 * std::f64::consts::LN_2 / ((n - 1.0) * spacing + gamma);
            (t0, finesse, matched)
        };
        let (t0, finesse, matched) = at(args.field_mt);
        println!("at B = {:.3} mT:", args.field_mt);
        println!(
            "  tooth spacing   Δω/2π = {:.4} kHz",
            rate * args.field_mt * 1e-3 / std::f64::consts::TAU * 1e3
        );
        println!("  rephasing T0    {:.4} µs", t0);
        println!("  finesse         {:.4}", finesse);
        println!("  matched input   {:.4} µs FWHM", matched);
        println!("field table:");
        println!("  B_mT      T0_us     finesse   matched_fwhm_us");
        for b in [5.0, 10.0, 23.0, 50.0, 100.0] {
            let (t0, f, m) = at(b);
            println!("  {b:<9.1} {t0:<9.4} {f:<9.4} {m:.4}");
        }
    }

    let l = args.eddy_thickness_um * 1e-6;
    let l_y = args.eddy_width_mm * 1e-3;
    let tau_s = eddy_decay_time(l, l_y, args.eddy_mu_r, args.eddy_resistivity)?;
    println!(
        "eddy currents ({:.2} µm × {:.1} mm foil, µ_r = {:.1}, ρ = {:.3e} Ω·m):",
        args.eddy_thickness_um, args.eddy_width_mm, args.eddy_mu_r, args.eddy_resistivity
    );
    println!(
        "  decay time      {:.4e} µs — field flips much faster than the comb evolves",
        tau_s * 1e6
    );
    Ok(())
}
