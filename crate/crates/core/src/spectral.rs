//! Frequency-domain reference path and closed-form echo expressions.
//!
//! The stack's linear response is evaluated exactly per spectral component,
//!   T(Δ) = exp(−Σ_seg [α/2 + Σ_j (ξ_j/4)Γ_j / (Γ_j/2 + i(δ_j + d_seg − Δ))]),
//! and applied by FFT filtering. Power-of-two zero padding long enough for
//! the narrowest line to ring out (≥ 16 spectral samples per linewidth)
//! suppresses wrap-around.

use crate::error::{Error, Result};
use crate::medium::MediumStack;
use crate::waveform::Waveform;
use num_complex::Complex64;
use rustfft::FftPlanner;

/// Hard cap on the padded FFT length (memory guard); reached only by
/// extremely narrow lines on coarse grids.
const MAX_FFT_LEN: usize = 1 << 24;
/// Spectral samples per (narrowest) linewidth.
const SAMPLES_PER_LINEWIDTH: f64 = 16.0;

/// Complex amplitude transmission at the given detunings (rad/µs, relative
/// to the carrier).
pub fn transfer_function(stack: &MediumStack, detunings: &[f64]) -> Result<Vec<Complex64>> {
    if stack.segments.is_empty() {
        return Err(Error::InvalidArgument("stack needs at least one segment".into()));
    }
    Ok(detunings
        .iter()
        .map(|&delta| {
            let mut chi = Complex64::new(0.0, 0.0);
            for seg in &stack.segments {
                chi += Complex64::new(seg.photoelectric_exponent / 2.0, 0.0);
                for t in &seg.teeth {
                    let num = t.thickness * t.linewidth / 4.0;
                    let den = Complex64::new(
                        t.linewidth / 2.0,
                        t.detuning + seg.doppler_offset - delta,
                    );
                    chi += num / den;
                }
            }
            (-chi).exp()
        })
        .collect())
}

/// Detunings of the FFT bins for an m-point transform at step dt,
/// in the aliasing order the FFT produces (k ≤ m/2 positive, then negative).
pub fn fft_detuning_grid(m: usize, dt: f64) -> Vec<f64> {
    let dw = std::f64::consts::TAU / (m as f64 * dt);
    (0..m)
        .map(|k| {
            let signed = if k <= m / 2 { k as isize } else { k as isize - m as isize };
            signed as f64 * dw
        })
        .collect()
}

/// Padded length for filtering an n-sample record: at least 2n, and long
/// enough that 2π/(m·dt) resolves the narrowest line 16-fold.
pub fn padded_len(n: usize, dt: f64, stack: &MediumStack) -> Result<usize> {
    let mut need = 2 * n;
    if let Some(gmin) = stack.min_linewidth() {
        let ring = (SAMPLES_PER_LINEWIDTH * std::f64::consts::TAU / (gmin * dt)).ceil() as usize;
        need = need.max(ring);
    }
    let m = need.next_power_of_two();
    if m > MAX_FFT_LEN {
        return Err(Error::SpectralGrid(format!(
            "padded FFT length {m} exceeds {MAX_FFT_LEN}; the narrowest line \
             is too narrow for this time step"
        )));
    }
    Ok(m)
}

/// Propagate by exact spectral filtering. Independent of the time-domain
/// integrator: same model, different discretization.
pub fn respond(input: &Waveform, stack: &MediumStack) -> Result<Waveform> {
    let n = input.grid.len;
    let dt = input.grid.dt;

    // the sampled band must cover the comb with room to spare
    let half_span = std::f64::consts::PI / dt;
    let comb_edge = stack.max_abs_detuning()
        + 2.0
            * stack
                .segments
                .iter()
                .flat_map(|s| s.teeth.iter().map(|t| t.linewidth))
                .fold(0.0, f64::max);
    if half_span < 4.0 * comb_edge {
        return Err(Error::SpectralGrid(format!(
            "time step {dt:.3e} leaves spectral half-span {half_span:.3e} < 4× comb \
             edge {comb_edge:.3e}"
        )));
    }

    let m = padded_len(n, dt, stack)?;
    let mut buf = vec![Complex64::ZERO; m];
    buf[..n].copy_from_slice(&input.samples);

    let mut planner = FftPlanner::new();
    // analysis with e^{+iΔτ} kernel = unnormalized inverse transform
    planner.plan_fft_inverse(m).process(&mut buf);
    let tf = transfer_function(stack, &fft_detuning_grid(m, dt))?;
    for (b, t) in buf.iter_mut().zip(&tf) {
        *b *= t;
    }
    planner.plan_fft_forward(m).process(&mut buf);
    let scale = 1.0 / m as f64;
    Ok(Waveform {
        grid: input.grid,
        samples: buf[..n].iter().map(|c| c * scale).collect(),
    })
}

fn check_echo_params(xi_eff0: f64, finesse: f64, beta: f64) -> Result<()> {
    if !(xi_eff0 >= 0.0) || !xi_eff0.is_finite() {
        return Err(Error::InvalidArgument(format!("effective thickness {xi_eff0}")));
    }
    if !(finesse > 0.0) {
        return Err(Error::InvalidArgument(format!("finesse {finesse}")));
    }
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::InvalidArgument(format!("off-resonant transmission {beta}")));
    }
    Ok(())
}

/// First-revival output of an ideal infinite comb: attenuated prompt pulse
/// plus one inverted replica after the rephasing time.
///
///   Ω_out(τ) = β e^{−πξ/4} [ Ω_in(τ) − (πξ/2) e^{−π/F} Ω_in(τ − t0) ]
///
/// Exact for an infinite equidistant comb of equal Lorentzian teeth with
/// ξ = ξ_total/(F·N); finite combs deviate only through spectral leakage.
pub fn analytic_echo(
    input: &Waveform,
    xi_eff0: f64,
    finesse: f64,
    beta: f64,
    t0: f64,
) -> Result<Waveform> {
    check_echo_params(xi_eff0, finesse, beta)?;
    if !(t0 > 0.0) || !t0.is_finite() {
        return Err(Error::InvalidArgument(format!("rephasing time {t0}")));
    }
    let prompt = beta * (-std::f64::consts::PI * xi_eff0 / 4.0).exp();
    let echo = -prompt
        * (std::f64::consts::PI * xi_eff0 / 2.0)
        * (-std::f64::consts::PI / finesse).exp();
    Ok(Waveform {
        grid: input.grid,
        samples: input
            .grid
            .times()
            .zip(&input.samples)
            .map(|(t, &s)| s * prompt + input.sample_at(t - t0) * echo)
            .collect(),
    })
}

/// Echo energy fraction of an ideal comb in the static (no-switch) protocol:
///
///   η = (πξ/2)² e^{−πξ/2} e^{−2π/F} β²
///
/// maximal at ξ = 4/π where it reaches 4e⁻² ≈ 0.541 for F → ∞, β = 1.
/// `finesse` may be `f64::INFINITY`.
pub fn predetermined_efficiency(xi_eff0: f64, finesse: f64, beta: f64) -> Result<f64> {
    check_echo_params(xi_eff0, finesse, beta)?;
    let a = std::f64::consts::PI * xi_eff0 / 2.0;
    Ok(a * a * (-a).exp() * (-2.0 * std::f64::consts::PI / finesse).exp() * beta * beta)
}

/// ξ maximizing the static-protocol echo efficiency.
pub const OPTIMAL_EFFECTIVE_THICKNESS: f64 = 4.0 / std::f64::consts::PI;
