//! Input synthesis, echo detection and figures of merit.

use crate::comb::CombSpec;
use crate::error::{Error, Result};
use crate::waveform::{TimeGrid, Waveform};
use num_complex::Complex64;
use serde::Serialize;

const FOUR_LN_2: f64 = 4.0 * std::f64::consts::LN_2;

/// Amplitude the pulse may still carry at the grid edges, relative to peak.
const TRUNCATION_LIMIT: f64 = 1e-8;

/// Echoes below this fraction of the input peak intensity are noise.
const NOISE_FLOOR: f64 = 1e-12;

/// Unit-peak Gaussian field envelope with field FWHM `fwhm` centered at
/// `center`. Rejects grids that clip the pulse above 1e-8 of the peak.
pub fn gaussian_input(grid: TimeGrid, fwhm: f64, center: f64) -> Result<Waveform> {
    if !(fwhm > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "pulse duration must be > 0, got {fwhm}"
        )));
    }
    let envelope = |t: f64| (-FOUR_LN_2 * (t - center).powi(2) / (fwhm * fwhm)).exp();
    if envelope(grid.t_start) > TRUNCATION_LIMIT || envelope(grid.t_end()) > TRUNCATION_LIMIT {
        return Err(Error::Grid(format!(
            "pulse of width {fwhm} at {center} is clipped by the grid [{}, {}]",
            grid.t_start,
            grid.t_end()
        )));
    }
    Ok(Waveform::from_fn(grid, |t| {
        Complex64::new(envelope(t), 0.0)
    }))
}

/// Input duration matched to the comb acceptance bandwidth:
/// Δt = 8 ln 2 / ((N−1)·Δω + Γ) (field FWHM ↔ spectral FWHM identity).
pub fn matched_duration(comb: &CombSpec) -> f64 {
    8.0 * std::f64::consts::LN_2 / comb.bandwidth()
}

/// Energy ratio ∫_window |Ω_out|² dτ / ∫ |Ω_in|² dτ.
pub fn efficiency(output: &Waveform, input: &Waveform, window: (f64, f64)) -> Result<f64> {
    let e_in = input.energy();
    if e_in == 0.0 {
        return Err(Error::Window("input carries no energy".into()));
    }
    Ok(output.energy_in(window.0, window.1)? / e_in)
}

/// Shape overlap between the windowed output and the (time-shifted) input:
/// max over shifts s of |∫ Ω_in*(τ−s) Ω_out(τ) dτ|² normalized by both
/// energies. 1 for a scaled delayed replica, 0 for orthogonal shapes,
/// insensitive to global phase.
pub fn fidelity(output: &Waveform, input: &Waveform, window: (f64, f64)) -> Result<f64> {
    if !output.grid.approx_eq(&input.grid) {
        return Err(Error::Grid("fidelity needs a common grid".into()));
    }
    let win = output.window_indices(window.0, window.1)?;
    let e_in: f64 = input.samples.iter().map(|s| s.norm_sqr()).sum();
    let e_out: f64 = output.samples[win.clone()]
        .iter()
        .map(|s| s.norm_sqr())
        .sum();
    if e_in == 0.0 || e_out == 0.0 {
        return Err(Error::Window("fidelity window has no energy".into()));
    }

    // the input's reference point (its peak) must land inside the window
    let in_peak = input
        .samples
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
        .map(|(k, _)| k as isize)
        .unwrap();
    let j_lo = win.start as isize - in_peak;
    let j_hi = win.end as isize - 1 - in_peak;

    let overlap_at = |j: isize| -> f64 {
        let mut c = Complex64::ZERO;
        for k in win.clone() {
            let src = k as isize - j;
            if src >= 0 && (src as usize) < input.samples.len() {
                c += input.samples[src as usize].conj() * output.samples[k];
            }
        }
        c.norm_sqr()
    };

    let mut best = (j_lo, 0.0);
    for j in j_lo..=j_hi {
        let v = overlap_at(j);
        if v > best.1 {
            best = (j, v);
        }
    }
    // parabolic sub-step refinement around the best integer shift
    let mut peak = best.1;
    let (ym, y0, yp) = (overlap_at(best.0 - 1), best.1, overlap_at(best.0 + 1));
    let denom = ym - 2.0 * y0 + yp;
    if denom < 0.0 {
        let du = 0.5 * (ym - yp) / denom;
        if du.abs() <= 0.5 {
            peak = y0 - 0.25 * (ym - yp) * du;
        }
    }
    Ok((peak / (e_in * e_out)).clamp(0.0, 1.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct EchoReport {
    pub found: bool,
    /// Parabolically refined peak time of |Ω_out|² after `t_min`, µs.
    pub peak_time: Option<f64>,
    /// Analysis window around the peak, µs.
    pub window: Option<(f64, f64)>,
    pub efficiency: f64,
    pub fidelity: f64,
    /// Output energy ahead of `t_min` (transmitted, non-stored light) over input energy.
    pub leaked_fraction: f64,
}

/// Find the strongest output peak after `t_min` and grade it in a window of
/// `window_width` (one rephasing period) centered on the peak.
pub fn detect_echo(
    output: &Waveform,
    input: &Waveform,
    t_min: f64,
    window_width: f64,
) -> Result<EchoReport> {
    if !output.grid.approx_eq(&input.grid) {
        return Err(Error::Grid("echo detection needs a common grid".into()));
    }
    if !(window_width > 0.0) {
        return Err(Error::Window(format!(
            "window width must be > 0, got {window_width}"
        )));
    }
    let e_in = input.energy();
    if e_in == 0.0 {
        return Err(Error::Window("input carries no energy".into()));
    }
    let leaked = if t_min > output.grid.t_start {
        output.energy_in(output.grid.t_start, t_min.min(output.grid.t_end()))? / e_in
    } else {
        0.0
    };

    let start = output.grid.nearest(t_min.max(output.grid.t_start));
    let mut kmax = start;
    let mut vmax = -1.0;
    for k in start..output.grid.len {
        let v = output.samples[k].norm_sqr();
        if v > vmax {
            vmax = v;
            kmax = k;
        }
    }
    let floor = NOISE_FLOOR * input.peak_intensity();
    if vmax <= floor {
        return Ok(EchoReport {
            found: false,
            peak_time: None,
            window: None,
            efficiency: 0.0,
            fidelity: 0.0,
            leaked_fraction: leaked,
        });
    }

    let mut t_peak = output.grid.t(kmax);
    if kmax > start && kmax + 1 < output.grid.len {
        let ym = output.samples[kmax - 1].norm_sqr();
        let yp = output.samples[kmax + 1].norm_sqr();
        let denom = ym - 2.0 * vmax + yp;
        if denom < 0.0 {
            let du = 0.5 * (ym - yp) / denom;
            if du.abs() <= 0.5 {
                t_peak += du * output.grid.dt;
            }
        }
    }

    let half = 0.5 * window_width;
    let window = (
        (t_peak - half).max(output.grid.t_start),
        (t_peak + half).min(output.grid.t_end()),
    );
    Ok(EchoReport {
        found: true,
        peak_time: Some(t_peak),
        window: Some(window),
        efficiency: efficiency(output, input, window)?,
        fidelity: fidelity(output, input, window)?,
        leaked_fraction: leaked,
    })
}
