//! Linear time-domain propagation of a weak pulse envelope through a layered
//! resonant absorber, with optional mid-run sign switching (field reversal or
//! velocity reversal).
//!
//! Model per segment, in the retarded frame:
//!   ∂Ω/∂z = i·Σ_j g_j ρ_j − (α/2)Ω,   g_j = ξ_jΓ_j/(4L)
//!   ∂ρ_j/∂τ = −(Γ_j/2 + i δ_j(τ)) ρ_j + i Ω
//! so a CW field on resonance with a single line leaves with amplitude
//! e^(−ξ/2). Segments are processed in z order; within a segment the z axis
//! is split into slices advanced with a Heun (predictor–corrector) step,
//! while the coherence recursion in τ uses the exact exponential
//! integrating factor with linear interpolation of the drive:
//!   ρ_{k+1} = e^(−x) ρ_k + i·dt·[(φ1−φ2)Ω_k + φ2·Ω_{k+1}],  x = (Γ/2+iδ̄)dt.

use crate::error::{Error, Result};
use crate::medium::{MediumSegment, MediumStack};
use crate::waveform::{TimeGrid, Waveform};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SwitchKind {
    /// Reverses the sign of every static line detuning (field reversal).
    ZeemanFlip,
    /// Reverses the sign of every segment Doppler offset (motion reversal).
    VelocityFlip,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct SwitchEvent {
    /// Time at which the sign starts to reverse.
    pub time: f64,
    pub kind: SwitchKind,
    /// Duration of the linear ramp from +1 to −1; 0 = instantaneous.
    pub ramp: f64,
}

impl SwitchEvent {
    pub fn instantaneous(time: f64, kind: SwitchKind) -> Self {
        SwitchEvent { time, kind, ramp: 0.0 }
    }

    fn validate(&self) -> Result<()> {
        if !self.time.is_finite() || !(self.ramp >= 0.0) || !self.ramp.is_finite() {
            return Err(Error::InvalidArgument("switch needs finite time and ramp ≥ 0".into()));
        }
        Ok(())
    }

    /// Mean of the ±1 sign profile over [t0, t1] (piecewise-linear ramp).
    fn mean_sign(&self, t0: f64, t1: f64) -> f64 {
        debug_assert!(t1 > t0);
        let a = self.time;
        let r = self.ramp;
        let mut acc = 0.0;
        // +1 part
        let hi = t1.min(a);
        if hi > t0 {
            acc += hi - t0;
        }
        // ramp part
        if r > 0.0 {
            let p = t0.max(a);
            let q = t1.min(a + r);
            if q > p {
                acc += (q - p) - ((q - a).powi(2) - (p - a).powi(2)) / r;
            }
        }
        // −1 part
        let lo = t0.max(a + r);
        if t1 > lo {
            acc -= t1 - lo;
        }
        acc / (t1 - t0)
    }
}

#[derive(Debug, Clone)]
pub struct EngineConfig {
    /// Baseline slices per segment; stability may raise the effective count.
    pub slices: Option<usize>,
    /// Multiplies the effective slice count (used for convergence studies).
    pub slice_multiplier: usize,
    /// Fail (instead of warn) when the grid under-resolves the detunings.
    pub strict: bool,
    /// Times at which slice-averaged coherences are recorded per segment.
    pub snapshot_times: Vec<f64>,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            slices: None,
            slice_multiplier: 1,
            strict: false,
            snapshot_times: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherenceSnapshot {
    pub segment: usize,
    pub time: f64,
    /// One slice-averaged entrance-field coherence per line, ordered as the
    /// segment's teeth.
    pub coherences: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub struct SimResult {
    pub output: Waveform,
    /// Effective slice count actually used for each segment.
    pub slices_used: Vec<usize>,
    pub warnings: Vec<String>,
    pub snapshots: Vec<CoherenceSnapshot>,
}

/// Largest per-slice on-resonance amplitude exponent the Heun z-step is
/// allowed; keeps |1 − x + x²/2| < 1 with a wide margin.
const SLICE_EXPONENT_LIMIT: f64 = 0.4;
/// Grid must resolve the fastest detuning beat at least this finely.
const MIN_SAMPLES_PER_RADIAN: f64 = 10.0;
/// Below this |x| the φ functions switch to their power series.
const PHI_SERIES_CUTOFF: f64 = 0.02;

#[derive(Clone, Copy)]
struct StepCoeff {
    e: Complex64,
    a: Complex64,
    b: Complex64,
}

enum StepTable {
    Uniform(StepCoeff),
    Varying(Vec<StepCoeff>),
}

impl StepTable {
    #[inline]
    fn at(&self, k: usize) -> StepCoeff {
        match self {
            StepTable::Uniform(c) => *c,
            StepTable::Varying(v) => v[k],
        }
    }
}

struct ToothRun {
    ig: Complex64,
    table: StepTable,
}

fn phi_pair(x: Complex64) -> (Complex64, Complex64) {
    if x.norm() < PHI_SERIES_CUTOFF {
        // φ1 = Σ (−x)^n/(n+1)!, φ2 = Σ (−x)^n/(n+2)!
        let mut phi1 = Complex64::new(0.0, 0.0);
        let mut phi2 = Complex64::new(0.0, 0.0);
        let mut term = Complex64::new(1.0, 0.0);
        let mut fact = 1.0_f64; // (n+1)! running
        for n in 0..=6 {
            fact *= (n + 1) as f64;
            phi1 += term / fact;
            phi2 += term / (fact * (n + 2) as f64);
            term *= -x;
        }
        (phi1, phi2)
    } else {
        let em = (-x).exp();
        let one = Complex64::new(1.0, 0.0);
        let phi1 = (one - em) / x;
        let phi2 = (x - one + em) / (x * x);
        (phi1, phi2)
    }
}

fn step_coeff(linewidth: f64, detuning: f64, dt: f64) -> StepCoeff {
    let x = Complex64::new(linewidth / 2.0, detuning) * dt;
    let (phi1, phi2) = phi_pair(x);
    let idt = Complex64::new(0.0, dt);
    StepCoeff {
        e: (-x).exp(),
        a: idt * (phi1 - phi2),
        b: idt * phi2,
    }
}

fn build_tables(
    segment: &MediumSegment,
    switch: Option<&SwitchEvent>,
    grid: &TimeGrid,
    n_slices: usize,
) -> Vec<ToothRun> {
    let dt = grid.dt;
    let n_steps = grid.len - 1;
    segment
        .teeth
        .iter()
        .map(|tooth| {
            let g = tooth.thickness * tooth.linewidth / (4.0 * n_slices as f64);
            let table = match switch {
                Some(sw) => {
                    let (static_part, signed_part) = match sw.kind {
                        SwitchKind::ZeemanFlip => (segment.doppler_offset, tooth.detuning),
                        SwitchKind::VelocityFlip => (tooth.detuning, segment.doppler_offset),
                    };
                    if signed_part == 0.0 {
                        StepTable::Uniform(step_coeff(
                            tooth.linewidth,
                            static_part + signed_part,
                            dt,
                        ))
                    } else {
                        StepTable::Varying(
                            (0..n_steps)
                                .map(|k| {
                                    let s = sw.mean_sign(grid.t(k), grid.t(k + 1));
                                    step_coeff(tooth.linewidth, static_part + s * signed_part, dt)
                                })
                                .collect(),
                        )
                    }
                }
                None => StepTable::Uniform(step_coeff(
                    tooth.linewidth,
                    tooth.detuning + segment.doppler_offset,
                    dt,
                )),
            };
            ToothRun {
                ig: Complex64::new(0.0, g),
                table,
            }
        })
        .collect()
}

/// One source evaluation S(w) = iΣ g_j ρ_j[w] for a whole slice.
/// When `capture` is given, ρ_j at the listed sample indices is accumulated
/// into it (teeth-major layout).
fn accumulate_source(
    w: &[Complex64],
    teeth: &[ToothRun],
    out: &mut [Complex64],
    capture: Option<(&[usize], &mut [Complex64])>,
) {
    let n = w.len();
    out.fill(Complex64::ZERO);
    let mut capture = capture;
    for (j, tooth) in teeth.iter().enumerate() {
        let mut rho = Complex64::new(0.0, 0.0);
        match &mut capture {
            Some((indices, sink)) => {
                let base = j * indices.len();
                for k in 0..n {
                    if let Some(p) = indices.iter().position(|&i| i == k) {
                        sink[base + p] += rho;
                    }
                    out[k] += tooth.ig * rho;
                    if k + 1 < n {
                        let c = tooth.table.at(k);
                        rho = c.e * rho + c.a * w[k] + c.b * w[k + 1];
                    }
                }
            }
            None => {
                for k in 0..n {
                    out[k] += tooth.ig * rho;
                    if k + 1 < n {
                        let c = tooth.table.at(k);
                        rho = c.e * rho + c.a * w[k] + c.b * w[k + 1];
                    }
                }
            }
        }
    }
}

/// Minimum slice count keeping the per-slice amplitude exponent bounded.
pub fn stable_slice_count(segment: &MediumSegment, baseline: usize) -> usize {
    let peak = segment.peak_amplitude_exponent();
    let floor = (peak / SLICE_EXPONENT_LIMIT).ceil() as usize;
    baseline.max(floor).max(1)
}

/// Step small enough to track the fastest beat in the stack, if any line is
/// off carrier; `None` when every line sits at zero detuning.
pub fn suggested_dt(stack: &MediumStack, steps_per_beat: usize) -> Option<f64> {
    let d = stack.max_abs_detuning();
    if d > 0.0 {
        Some(std::f64::consts::TAU / d / steps_per_beat as f64)
    } else {
        None
    }
}

pub fn simulate(input: &Waveform, stack: &MediumStack) -> Result<SimResult> {
    simulate_with(input, stack, None, &EngineConfig::default())
}

pub fn simulate_on_demand(
    input: &Waveform,
    stack: &MediumStack,
    switch: SwitchEvent,
) -> Result<SimResult> {
    simulate_with(input, stack, Some(&switch), &EngineConfig::default())
}

pub fn simulate_with(
    input: &Waveform,
    stack: &MediumStack,
    switch: Option<&SwitchEvent>,
    cfg: &EngineConfig,
) -> Result<SimResult> {
    if stack.segments.is_empty() {
        return Err(Error::InvalidArgument("stack needs at least one segment".into()));
    }
    if cfg.slice_multiplier == 0 {
        return Err(Error::InvalidArgument("slice_multiplier must be ≥ 1".into()));
    }
    if let Some(sw) = switch {
        sw.validate()?;
    }
    let grid = &input.grid;
    let mut warnings = Vec::new();

    let max_delta = stack.max_abs_detuning();
    if max_delta > 0.0 && grid.dt > 1.0 / (MIN_SAMPLES_PER_RADIAN * max_delta) {
        let msg = format!(
            "time step {:.3e} under-resolves the largest detuning {:.3e} rad/µs \
             (need dt ≤ {:.3e})",
            grid.dt,
            max_delta,
            1.0 / (MIN_SAMPLES_PER_RADIAN * max_delta)
        );
        if cfg.strict {
            return Err(Error::Resolution(msg));
        }
        warnings.push(msg);
    }

    let snap_indices: Vec<usize> = cfg.snapshot_times.iter().map(|&t| grid.nearest(t)).collect();

    let n = grid.len;
    let mut wave = input.samples.clone();
    let mut mid = vec![Complex64::new(0.0, 0.0); n];
    let mut src_a = vec![Complex64::new(0.0, 0.0); n];
    let mut src_b = vec![Complex64::new(0.0, 0.0); n];

    let baseline = cfg.slices.unwrap_or(stack.slices_per_segment);
    let mut slices_used = Vec::with_capacity(stack.segments.len());
    let mut snapshots = Vec::new();

    for (si, segment) in stack.segments.iter().enumerate() {
        if segment.teeth.is_empty() {
            // Pure photoelectric attenuation is a scalar exponential; apply it
            // exactly instead of slicing.
            if segment.photoelectric_exponent != 0.0 {
                let factor = (-segment.photoelectric_exponent / 2.0).exp();
                for w in wave.iter_mut() {
                    *w *= factor;
                }
            }
            slices_used.push(0);
            continue;
        }
        let n_slices = stable_slice_count(segment, baseline) * cfg.slice_multiplier;
        slices_used.push(n_slices);
        let teeth = build_tables(segment, switch, grid, n_slices);
        // The scalar loss commutes with the resonant coupling, so it factors
        // out of each slice exactly; only the coupling needs the Heun update.
        let decay = (-segment.photoelectric_exponent / (2.0 * n_slices as f64)).exp();

        let mut snap_acc = vec![Complex64::new(0.0, 0.0); teeth.len() * snap_indices.len()];
        for _ in 0..n_slices {
            let capture = if snap_indices.is_empty() {
                None
            } else {
                Some((snap_indices.as_slice(), snap_acc.as_mut_slice()))
            };
            accumulate_source(&wave, &teeth, &mut src_a, capture);
            for k in 0..n {
                mid[k] = wave[k] + src_a[k];
            }
            accumulate_source(&mid, &teeth, &mut src_b, None);
            for k in 0..n {
                wave[k] = decay * (wave[k] + 0.5 * (src_a[k] + src_b[k]));
            }
        }

        if wave.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::Unstable(format!(
                "non-finite field after segment {si} ({n_slices} slices)"
            )));
        }

        for (p, &idx) in snap_indices.iter().enumerate() {
            snapshots.push(CoherenceSnapshot {
                segment: si,
                time: grid.t(idx),
                coherences: (0..teeth.len())
                    .map(|j| snap_acc[j * snap_indices.len() + p] / n_slices as f64)
                    .collect(),
            });
        }
    }

    Ok(SimResult {
        output: Waveform {
            grid: grid.clone(),
            samples: wave,
        },
        slices_used,
        warnings,
        snapshots,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    /// Refinement factors compared pairwise, ascending, starting at 1.
    pub dt_factors: Vec<usize>,
    /// rel L2 distance between runs at consecutive dt factors, on the
    /// coarse grid points.
    pub dt_rel_change: Vec<f64>,
    pub slice_factors: Vec<usize>,
    pub slice_rel_change: Vec<f64>,
}

fn on_base_grid(fine: &Waveform, base: &TimeGrid, factor: usize) -> Waveform {
    Waveform {
        grid: base.clone(),
        samples: (0..base.len).map(|k| fine.samples[k * factor]).collect(),
    }
}

/// Self-convergence study: rerun with refined time step (cubic-resampled
/// input) and with multiplied slice counts, reporting successive relative
/// changes. For a second-order scheme consecutive dt-halvings shrink the
/// change ≈ 4×.
pub fn convergence_check(
    input: &Waveform,
    stack: &MediumStack,
    switch: Option<&SwitchEvent>,
    cfg: &EngineConfig,
    dt_factors: &[usize],
    slice_factors: &[usize],
) -> Result<ConvergenceReport> {
    let base = simulate_with(input, stack, switch, cfg)?;
    let grid = &input.grid;

    let mut dt_runs: Vec<(usize, Waveform)> = vec![(1, base.output.clone())];
    for &f in dt_factors {
        if f < 2 {
            return Err(Error::InvalidArgument("dt refinement factors must be ≥ 2".into()));
        }
        let fine_in = input.resample_refined(f);
        let fine_out = simulate_with(&fine_in, stack, switch, cfg)?;
        dt_runs.push((f, on_base_grid(&fine_out.output, grid, f)));
    }
    let mut dt_rel_change = Vec::new();
    for pair in dt_runs.windows(2) {
        dt_rel_change.push(pair[0].1.rel_l2_distance(&pair[1].1)?);
    }

    let mut slice_runs: Vec<(usize, Waveform)> = vec![(1, base.output)];
    for &f in slice_factors {
        if f < 2 {
            return Err(Error::InvalidArgument("slice factors must be ≥ 2".into()));
        }
        let mut c = cfg.clone();
        c.slice_multiplier = cfg.slice_multiplier * f;
        slice_runs.push((f, simulate_with(input, stack, switch, &c)?.output));
    }
    let mut slice_rel_change = Vec::new();
    for pair in slice_runs.windows(2) {
        slice_rel_change.push(pair[0].1.rel_l2_distance(&pair[1].1)?);
    }

    Ok(ConvergenceReport {
        dt_factors: std::iter::once(1).chain(dt_factors.iter().copied()).collect(),
        dt_rel_change,
        slice_factors: std::iter::once(1).chain(slice_factors.iter().copied()).collect(),
        slice_rel_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::medium::{MediumSegment, SegmentTooth};
    use crate::metrics::gaussian_input;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn single_line_stack(xi: f64, linewidth: f64, detuning: f64) -> MediumStack {
        MediumStack::single(MediumSegment {
            teeth: vec![SegmentTooth { detuning, thickness: xi, linewidth }],
            photoelectric_exponent: 0.0,
            doppler_offset: 0.0,
            thickness_um: 1.0,
        })
        .unwrap()
    }

    #[test]
    fn mean_sign_of_instant_switch() {
        let sw = SwitchEvent::instantaneous(1.0, SwitchKind::ZeemanFlip);
        assert_abs_diff_eq!(sw.mean_sign(0.0, 0.5), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sw.mean_sign(2.0, 3.0), -1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sw.mean_sign(0.5, 1.5), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sw.mean_sign(0.75, 1.0), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn mean_sign_of_ramped_switch() {
        let sw = SwitchEvent { time: 1.0, kind: SwitchKind::VelocityFlip, ramp: 2.0 };
        // over the whole ramp the mean is 0
        assert_abs_diff_eq!(sw.mean_sign(1.0, 3.0), 0.0, epsilon = 1e-15);
        // first half of the ramp averages +1/2
        assert_abs_diff_eq!(sw.mean_sign(1.0, 2.0), 0.5, epsilon = 1e-15);
        // straddling: 1 µs at +1, then ramp to the midpoint
        assert_abs_diff_eq!(sw.mean_sign(0.0, 2.0), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn phi_series_matches_direct_form() {
        for &(re, im) in &[(0.019, 0.0), (0.01, 0.015), (0.0, 0.019)] {
            let x = Complex64::new(re, im);
            let (p1, p2) = phi_pair(x);
            let em = (-x).exp();
            let d1 = (Complex64::new(1.0, 0.0) - em) / x;
            let d2 = (x - Complex64::new(1.0, 0.0) + em) / (x * x);
            assert_abs_diff_eq!((p1 - d1).norm(), 0.0, epsilon = 1e-11);
            assert_abs_diff_eq!((p2 - d2).norm(), 0.0, epsilon = 1e-11);
        }
        let (p1, p2) = phi_pair(Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(p1.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(p2.re, 0.5, epsilon = 1e-15);
    }

    /// Quasi-CW resonant drive leaves a single line with amplitude e^(−ξ/2).
    #[test]
    fn resonant_attenuation_matches_closed_form() {
        let gamma = 0.5;
        let xi = 2.0;
        let stack = single_line_stack(xi, gamma, 0.0);
        // long smooth pulse ≫ 1/Γ so the coherence tracks the drive; the
        // leading adiabatic correction scales as 1/(Γ·width)² ≈ 8e-4 here
        let grid = TimeGrid::spanning(-840.0, 840.0, 0.25).unwrap();
        let input = gaussian_input(grid, 240.0, 0.0).unwrap();
        let out = simulate(&input, &stack).unwrap().output;
        let k = grid.nearest(0.0);
        let ratio = out.samples[k].norm() / input.samples[k].norm();
        assert_relative_eq!(ratio, (-xi / 2.0f64).exp(), max_relative = 2e-3);
    }

    /// Far off resonance the line barely touches the pulse.
    #[test]
    fn far_detuned_line_is_transparent() {
        let stack = single_line_stack(3.0, 0.1, 40.0);
        let grid = TimeGrid::spanning(-6.0, 6.0, 0.002).unwrap();
        let input = gaussian_input(grid, 2.0, 0.0).unwrap();
        let out = simulate(&input, &stack).unwrap().output;
        let ratio = out.energy() / input.energy();
        assert!(ratio > 0.995 && ratio <= 1.0 + 1e-9, "energy ratio {ratio}");
    }

    #[test]
    fn photoelectric_loss_scales_energy() {
        let phot = 1.2_f64;
        let stack = MediumStack::single(MediumSegment {
            teeth: vec![],
            photoelectric_exponent: phot,
            doppler_offset: 0.0,
            thickness_um: 2.6,
        })
        .unwrap();
        let grid = TimeGrid::spanning(-4.0, 4.0, 0.01).unwrap();
        let input = gaussian_input(grid, 1.5, 0.0).unwrap();
        let out = simulate(&input, &stack).unwrap().output;
        assert_relative_eq!(out.energy() / input.energy(), (-phot).exp(), max_relative = 1e-6);
    }

    #[test]
    fn empty_segment_is_exact_identity() {
        let stack = MediumStack::single(MediumSegment {
            teeth: vec![SegmentTooth { detuning: 0.3, thickness: 0.0, linewidth: 0.1 }],
            photoelectric_exponent: 0.0,
            doppler_offset: 0.0,
            thickness_um: 1.0,
        })
        .unwrap();
        let grid = TimeGrid::spanning(-3.0, 3.0, 0.01).unwrap();
        let input = gaussian_input(grid, 1.0, 0.0).unwrap();
        let out = simulate(&input, &stack).unwrap().output;
        assert_eq!(out.samples, input.samples);
    }

    #[test]
    fn output_is_linear_in_input() {
        let stack = single_line_stack(4.0, 0.2, 1.0);
        let grid = TimeGrid::spanning(-5.0, 20.0, 0.02).unwrap();
        let input = gaussian_input(grid, 1.5, 0.0).unwrap();
        let a = simulate(&input, &stack).unwrap().output;
        let b = simulate(&input.scaled(Complex64::new(0.0, -2.5)), &stack)
            .unwrap()
            .output;
        for k in 0..grid.len {
            let want = a.samples[k] * Complex64::new(0.0, -2.5);
            assert_abs_diff_eq!((b.samples[k] - want).norm(), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn strict_mode_rejects_coarse_grids() {
        let stack = single_line_stack(1.0, 0.1, 50.0);
        let grid = TimeGrid::spanning(-7.0, 7.0, 0.05).unwrap();
        let input = gaussian_input(grid, 2.0, 0.0).unwrap();
        let cfg = EngineConfig { strict: true, ..Default::default() };
        assert!(matches!(
            simulate_with(&input, &stack, None, &cfg),
            Err(Error::Resolution(_))
        ));
        let lax = simulate(&input, &stack).unwrap();
        assert_eq!(lax.warnings.len(), 1);
    }

    #[test]
    fn stability_floor_raises_slices() {
        let stack = single_line_stack(64.0, 0.2, 0.0);
        let grid = TimeGrid::spanning(-3.0, 3.0, 0.02).unwrap();
        let input = gaussian_input(grid, 1.0, 0.0).unwrap();
        let res = simulate(&input, &stack).unwrap();
        // ξ/2 = 32 → at least 80 slices at limit 0.4
        assert!(res.slices_used[0] >= 80, "slices {}", res.slices_used[0]);
        assert!(res.output.energy() <= input.energy() * (1.0 + 1e-9));
    }

    /// A flip before the pulse arrives must reproduce the mirrored static
    /// comb exactly.
    #[test]
    fn flip_before_start_equals_mirrored_line() {
        let grid = TimeGrid::spanning(-4.0, 14.0, 0.01).unwrap();
        let input = gaussian_input(grid, 1.2, 0.0).unwrap();
        let flipped = simulate_on_demand(
            &input,
            &single_line_stack(2.0, 0.15, 0.8),
            SwitchEvent::instantaneous(-4.0, SwitchKind::ZeemanFlip),
        )
        .unwrap()
        .output;
        let mirrored = simulate(&input, &single_line_stack(2.0, 0.15, -0.8))
            .unwrap()
            .output;
        assert!(flipped.rel_l2_distance(&mirrored).unwrap() < 1e-12);
    }

    #[test]
    fn snapshot_reports_per_segment_coherence() {
        let stack = single_line_stack(1.0, 0.2, 0.0);
        let grid = TimeGrid::spanning(-3.0, 3.0, 0.01).unwrap();
        let input = gaussian_input(grid, 1.0, 0.0).unwrap();
        let cfg = EngineConfig { snapshot_times: vec![0.5, 2.0], ..Default::default() };
        let res = simulate_with(&input, &stack, None, &cfg).unwrap();
        assert_eq!(res.snapshots.len(), 2);
        assert_eq!(res.snapshots[0].segment, 0);
        assert_abs_diff_eq!(res.snapshots[0].time, 0.5, epsilon = 1e-9);
        assert_eq!(res.snapshots[0].coherences.len(), 1);
        // resonant drive builds up coherence with a +i/Γ-ish phase: purely
        // imaginary positive component dominates
        let rho = res.snapshots[0].coherences[0];
        assert!(rho.im > 0.0 && rho.im > rho.re.abs());
    }

    #[test]
    fn convergence_is_second_order_in_dt() {
        let stack = single_line_stack(3.0, 0.3, 1.5);
        let grid = TimeGrid::spanning(-4.0, 12.0, 0.08).unwrap();
        let input = gaussian_input(grid, 1.5, 0.0).unwrap();
        let rep = convergence_check(
            &input,
            &stack,
            None,
            &EngineConfig::default(),
            &[2, 4],
            &[2],
        )
        .unwrap();
        assert_eq!(rep.dt_rel_change.len(), 2);
        let ratio = rep.dt_rel_change[0] / rep.dt_rel_change[1];
        assert!(
            ratio > 3.0 && ratio < 5.0,
            "dt convergence ratio {ratio}, changes {:?}",
            rep.dt_rel_change
        );
        assert!(rep.slice_rel_change[0] < 1e-3);
    }
}
