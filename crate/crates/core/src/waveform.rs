//! Uniform time grids and complex field envelopes.
//!
//! Times are retarded-frame µs; envelopes are dimensionless complex
//! amplitudes (the propagation model is linear, so the scale is free).

use crate::error::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeGrid {
    pub t_start: f64,
    pub dt: f64,
    pub len: usize,
}

impl TimeGrid {
    pub fn new(t_start: f64, dt: f64, len: usize) -> Result<Self> {
        if !(dt > 0.0) || !dt.is_finite() || !t_start.is_finite() {
            return Err(Error::Grid(format!("bad grid: t_start {t_start}, dt {dt}")));
        }
        if len < 2 {
            return Err(Error::Grid(format!("grid needs ≥ 2 samples, got {len}")));
        }
        Ok(TimeGrid { t_start, dt, len })
    }

    /// Grid spanning at least [t_start, t_end] with the given step.
    pub fn spanning(t_start: f64, t_end: f64, dt: f64) -> Result<Self> {
        if !(t_end > t_start) {
            return Err(Error::Grid(format!(
                "empty span [{t_start}, {t_end}]"
            )));
        }
        let len = ((t_end - t_start) / dt).ceil() as usize + 1;
        TimeGrid::new(t_start, dt, len)
    }

    pub fn t(&self, k: usize) -> f64 {
        self.t_start + k as f64 * self.dt
    }

    pub fn t_end(&self) -> f64 {
        self.t(self.len - 1)
    }

    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.len).map(move |k| self.t(k))
    }

    /// Nearest sample index, clamped to the grid.
    pub fn nearest(&self, t: f64) -> usize {
        let k = ((t - self.t_start) / self.dt).round();
        (k.max(0.0) as usize).min(self.len - 1)
    }

    /// Same origin, dt/factor, same end point.
    pub fn refined(&self, factor: usize) -> TimeGrid {
        TimeGrid {
            t_start: self.t_start,
            dt: self.dt / factor as f64,
            len: (self.len - 1) * factor + 1,
        }
    }

    pub fn approx_eq(&self, other: &TimeGrid) -> bool {
        self.len == other.len
            && (self.t_start - other.t_start).abs() < 1e-9 * self.dt
            && (self.dt - other.dt).abs() < 1e-12 * self.dt
    }
}

#[derive(Debug, Clone)]
pub struct Waveform {
    pub grid: TimeGrid,
    pub samples: Vec<Complex64>,
}

impl Waveform {
    pub fn zeros(grid: TimeGrid) -> Self {
        Waveform {
            samples: vec![Complex64::ZERO; grid.len],
            grid,
        }
    }

    pub fn from_fn(grid: TimeGrid, f: impl Fn(f64) -> Complex64) -> Self {
        Waveform {
            samples: grid.times().map(f).collect(),
            grid,
        }
    }

    /// ∫|Ω|² dτ over the whole grid.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() * self.grid.dt
    }

    pub fn peak_intensity(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).fold(0.0, f64::max)
    }

    pub fn scaled(&self, c: Complex64) -> Waveform {
        Waveform {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s * c).collect(),
        }
    }

    /// Relative L2 distance ‖a − b‖ / ‖a‖.
    pub fn rel_l2_distance(&self, other: &Waveform) -> Result<f64> {
        if !self.grid.approx_eq(&other.grid) {
            return Err(Error::Grid("waveforms live on different grids".into()));
        }
        let mut diff = 0.0;
        let mut norm = 0.0;
        for (a, b) in self.samples.iter().zip(&other.samples) {
            diff += (a - b).norm_sqr();
            norm += a.norm_sqr();
        }
        if norm == 0.0 {
            return Err(Error::Grid("reference waveform is identically zero".into()));
        }
        Ok((diff / norm).sqrt())
    }

    /// Sample index range covering [lo, hi], clipped to the grid.
    pub fn window_indices(&self, lo: f64, hi: f64) -> Result<std::ops::Range<usize>> {
        if !(hi > lo) {
            return Err(Error::Window(format!("empty window [{lo}, {hi}]")));
        }
        let g = &self.grid;
        if hi < g.t_start || lo > g.t_end() {
            return Err(Error::Window(format!(
                "window [{lo}, {hi}] lies outside the grid [{}, {}]",
                g.t_start,
                g.t_end()
            )));
        }
        let a = ((lo - g.t_start) / g.dt).ceil().max(0.0) as usize;
        let b = (((hi - g.t_start) / g.dt).floor() as usize).min(g.len - 1);
        Ok(a..b + 1)
    }

    pub fn energy_in(&self, lo: f64, hi: f64) -> Result<f64> {
        let r = self.window_indices(lo, hi)?;
        Ok(self.samples[r].iter().map(|s| s.norm_sqr()).sum::<f64>() * self.grid.dt)
    }

    /// Centripetal-free Catmull-Rom resampling onto `grid.refined(factor)`.
    /// Interpolation error is O(dt³) on smooth data, well below the O(dt²)
    /// integrator error it feeds.
    pub fn resample_refined(&self, factor: usize) -> Waveform {
        assert!(factor >= 1);
        if factor == 1 {
            return self.clone();
        }
        let fine = self.grid.refined(factor);
        let n = self.samples.len();
        // edges extend flat; envelopes are required to vanish there anyway
        let at = |i: isize| -> Complex64 { self.samples[i.clamp(0, n as isize - 1) as usize] };
        let mut out = Vec::with_capacity(fine.len);
        for k in 0..fine.len {
            let i = (k / factor) as isize;
            let u = (k % factor) as f64 / factor as f64;
            if u == 0.0 {
                out.push(at(i));
                continue;
            }
            let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
            let u2 = u * u;
            let u3 = u2 * u;
            out.push(
                (p1 * 2.0
                    + (p2 - p0) * u
                    + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * u2
                    + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * u3)
                    * 0.5,
            );
        }
        Waveform { grid: fine, samples: out }
    }

    /// Cubic (Catmull-Rom) sample at an arbitrary time; zero outside the
    /// grid, exact at the nodes.
    pub fn sample_at(&self, t: f64) -> Complex64 {
        let g = &self.grid;
        let pos = (t - g.t_start) / g.dt;
        if pos < 0.0 || pos > (g.len - 1) as f64 {
            return Complex64::ZERO;
        }
        let i = pos.floor() as isize;
        let u = pos - i as f64;
        let n = self.samples.len() as isize;
        let at = |j: isize| -> Complex64 { self.samples[j.clamp(0, n - 1) as usize] };
        if u == 0.0 {
            return at(i);
        }
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        let u2 = u * u;
        let u3 = u2 * u;
        (p1 * 2.0
            + (p2 - p0) * u
            + (p0 * 2.0 - p1 * 5.0 + p2 * 4.0 - p3) * u2
            + (p1 * 3.0 - p0 - p2 * 3.0 + p3) * u3)
            * 0.5
    }
}

/// Field-amplitude FWHM of |Ω|, by linear interpolation around the peak.
pub fn field_fwhm(wf: &Waveform) -> Option<f64> {
    let mags: Vec<f64> = wf.samples.iter().map(|s| s.norm()).collect();
    let (kmax, &peak) = mags
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?;
    if peak <= 0.0 {
        return None;
    }
    let half = peak / 2.0;
    let cross = |mut k: usize, step: isize| -> Option<f64> {
        loop {
            let next = k as isize + step;
            if next < 0 || next as usize >= mags.len() {
                return None;
            }
            let next = next as usize;
            if mags[next] < half {
                let frac = (mags[k] - half) / (mags[k] - mags[next]);
                return Some(wf.grid.t(k) + frac * step as f64 * wf.grid.dt);
            }
            k = next;
        }
    };
    let left = cross(kmax, -1)?;
    let right = cross(kmax, 1)?;
    Some(right - left)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn grid_accessors() {
        let g = TimeGrid::new(-1.0, 0.25, 9).unwrap();
        assert_eq!(g.t_end(), 1.0);
        assert_eq!(g.nearest(0.3), 5);
        assert_eq!(g.nearest(-5.0), 0);
        assert_eq!(g.nearest(5.0), 8);
        assert!(TimeGrid::new(0.0, -1.0, 4).is_err());
        assert!(TimeGrid::new(0.0, 0.1, 1).is_err());
        let s = TimeGrid::spanning(0.0, 1.0, 0.3).unwrap();
        assert!(s.t_end() >= 1.0 && s.len == 5);
    }

    #[test]
    fn refined_grid_keeps_endpoints() {
        let g = TimeGrid::new(-2.0, 0.5, 11).unwrap();
        let f = g.refined(4);
        assert_eq!(f.len, 41);
        assert_abs_diff_eq!(f.t_end(), g.t_end(), epsilon = 1e-12);
    }

    #[test]
    fn energy_and_windows() {
        let g = TimeGrid::new(0.0, 0.1, 101).unwrap();
        let w = Waveform::from_fn(g, |_| Complex64::new(2.0, 0.0));
        assert_relative_eq!(w.energy(), 4.0 * 101.0 * 0.1, max_relative = 1e-12);
        let r = w.window_indices(0.35, 0.65).unwrap();
        assert_eq!(r, 4..7);
        assert!(w.window_indices(20.0, 30.0).is_err());
        assert!(w.window_indices(1.0, 1.0).is_err());
        // clipping against the grid edges
        let r = w.window_indices(-5.0, 0.25).unwrap();
        assert_eq!(r, 0..3);
    }

    #[test]
    fn resampling_is_faithful_on_smooth_data() {
        let g = TimeGrid::new(-4.0, 0.05, 161).unwrap();
        let w = Waveform::from_fn(g, |t| {
            Complex64::new((-t * t).exp(), 0.3 * (-t * t).exp() * t)
        });
        let fine = w.resample_refined(4);
        // exact at original nodes
        for k in 0..g.len {
            assert_abs_diff_eq!(
                (fine.samples[4 * k] - w.samples[k]).norm(),
                0.0,
                epsilon = 1e-14
            );
        }
        // close to analytic in between
        let mut worst: f64 = 0.0;
        for k in 0..fine.grid.len {
            let t = fine.grid.t(k);
            let exact = Complex64::new((-t * t).exp(), 0.3 * (-t * t).exp() * t);
            worst = worst.max((fine.samples[k] - exact).norm());
        }
        assert!(worst < 2e-5, "cubic resampling error {worst}");
    }

    #[test]
    fn point_samples_match_nodes_and_vanish_outside() {
        let g = TimeGrid::new(-2.0, 0.1, 41).unwrap();
        let w = Waveform::from_fn(g, |t| Complex64::new((-t * t).exp(), t));
        for k in [0, 7, 40] {
            assert_abs_diff_eq!((w.sample_at(g.t(k)) - w.samples[k]).norm(), 0.0, epsilon = 1e-14);
        }
        let t = 0.537_f64;
        let exact = Complex64::new((-t * t).exp(), t);
        assert!((w.sample_at(t) - exact).norm() < 1e-4);
        assert_eq!(w.sample_at(-2.5), Complex64::ZERO);
        assert_eq!(w.sample_at(2.6), Complex64::ZERO);
    }

    #[test]
    fn fwhm_of_gaussian_field() {
        let g = TimeGrid::new(-8.0, 0.01, 1601).unwrap();
        let fw = 2.3;
        let ln2 = std::f64::consts::LN_2;
        let w = Waveform::from_fn(g, |t| {
            Complex64::new((-4.0 * ln2 * t * t / (fw * fw)).exp(), 0.0)
        });
        let measured = field_fwhm(&w).unwrap();
        assert_abs_diff_eq!(measured, fw, epsilon = 0.01);
        assert!(field_fwhm(&Waveform::zeros(g)).is_none());
    }
}
