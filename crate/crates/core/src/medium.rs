//! Layered absorber description fed to the propagation engine.
//!
//! A segment is a slab with its own resonance lines, photoelectric loss and a
//! common Doppler offset (moving-foil trains). `thickness_um` is bookkeeping:
//! the coupling is carried entirely by the per-line optical thickness ξ_j.

use crate::comb::CombSpec;
use crate::error::{Error, Result};
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct SegmentTooth {
    /// Line center relative to the carrier, rad/µs (before Doppler offset).
    pub detuning: f64,
    /// Resonant optical thickness ξ_j of this line over the whole segment.
    pub thickness: f64,
    /// FWHM Γ_j, rad/µs.
    pub linewidth: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MediumSegment {
    pub teeth: Vec<SegmentTooth>,
    /// Photoelectric intensity exponent N·σ_ph·L_seg (amplitude loss e^(−/2)).
    pub photoelectric_exponent: f64,
    /// Common Doppler shift of every line in this segment, rad/µs.
    pub doppler_offset: f64,
    /// Physical slab thickness, µm (reporting only).
    pub thickness_um: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct MediumStack {
    pub segments: Vec<MediumSegment>,
    /// Baseline z-resolution per segment; the engine raises it if stability
    /// needs more.
    pub slices_per_segment: usize,
}

impl MediumSegment {
    fn validate(&self, idx: usize) -> Result<()> {
        for t in &self.teeth {
            if !(t.thickness >= 0.0) || !t.thickness.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "segment {idx}: tooth thickness {}",
                    t.thickness
                )));
            }
            if !(t.linewidth > 0.0) || !t.linewidth.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "segment {idx}: tooth linewidth {}",
                    t.linewidth
                )));
            }
            if !t.detuning.is_finite() {
                return Err(Error::InvalidArgument(format!("segment {idx}: bad detuning")));
            }
        }
        if !(self.photoelectric_exponent >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "segment {idx}: photoelectric exponent {}",
                self.photoelectric_exponent
            )));
        }
        if !self.doppler_offset.is_finite() {
            return Err(Error::InvalidArgument(format!("segment {idx}: bad Doppler offset")));
        }
        Ok(())
    }

    /// Largest |line center| including the Doppler offset.
    pub fn max_abs_detuning(&self) -> f64 {
        self.teeth
            .iter()
            .map(|t| (t.detuning + self.doppler_offset).abs())
            .fold(0.0, f64::max)
    }

    /// Worst on-resonance amplitude exponent ξ_eff/2 seen by any spectral
    /// component, including neighbor-line tails; sets the z-step stability
    /// bound.
    pub fn peak_amplitude_exponent(&self) -> f64 {
        let mut worst = 0.0_f64;
        for probe in &self.teeth {
            let mut acc = 0.0;
            for t in &self.teeth {
                let hw = t.linewidth / 2.0;
                let off = t.detuning - probe.detuning;
                acc += (t.thickness / 4.0) * t.linewidth * hw / (hw * hw + off * off);
            }
            worst = worst.max(acc);
        }
        worst
    }
}

impl MediumStack {
    pub fn new(segments: Vec<MediumSegment>, slices_per_segment: usize) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidArgument("stack needs at least one segment".into()));
        }
        if slices_per_segment == 0 {
            return Err(Error::InvalidArgument("slices_per_segment must be ≥ 1".into()));
        }
        for (i, s) in segments.iter().enumerate() {
            s.validate(i)?;
        }
        Ok(MediumStack {
            segments,
            slices_per_segment,
        })
    }

    pub fn single(segment: MediumSegment) -> Result<Self> {
        MediumStack::new(vec![segment], DEFAULT_SLICES)
    }

    /// Bound on |δ_j ± doppler| across the stack, valid under either flip.
    pub fn max_abs_detuning(&self) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| {
                s.teeth
                    .iter()
                    .map(move |t| t.detuning.abs() + s.doppler_offset.abs())
            })
            .fold(0.0, f64::max)
    }

    pub fn min_linewidth(&self) -> Option<f64> {
        self.segments
            .iter()
            .flat_map(|s| s.teeth.iter().map(|t| t.linewidth))
            .fold(None, |acc: Option<f64>, g| Some(acc.map_or(g, |a| a.min(g))))
    }

    pub fn total_resonant_thickness(&self) -> f64 {
        self.segments
            .iter()
            .flat_map(|s| s.teeth.iter().map(|t| t.thickness))
            .sum()
    }

    pub fn total_photoelectric_exponent(&self) -> f64 {
        self.segments.iter().map(|s| s.photoelectric_exponent).sum()
    }
}

pub const DEFAULT_SLICES: usize = 32;

/// Single Zeeman-split foil: per-tooth thickness w_j·ξ_total.
pub fn comb_segment(
    comb: &CombSpec,
    xi_total: f64,
    photoelectric_exponent: f64,
    thickness_um: f64,
) -> Result<MediumSegment> {
    if !(xi_total >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "total thickness must be ≥ 0, got {xi_total}"
        )));
    }
    Ok(MediumSegment {
        teeth: comb
            .teeth
            .iter()
            .map(|t| SegmentTooth {
                detuning: t.detuning,
                thickness: t.weight * xi_total,
                linewidth: comb.linewidth,
            })
            .collect(),
        photoelectric_exponent,
        doppler_offset: 0.0,
        thickness_um,
    })
}

/// Like `comb_segment` but with the tooth weights flattened to 1/N
/// (idealized uniform comb on the same grid).
pub fn uniform_comb_segment(
    comb: &CombSpec,
    xi_total: f64,
    photoelectric_exponent: f64,
    thickness_um: f64,
) -> Result<MediumSegment> {
    let mut seg = comb_segment(comb, xi_total, photoelectric_exponent, thickness_um)?;
    let w = xi_total / seg.teeth.len() as f64;
    for t in &mut seg.teeth {
        t.thickness = w;
    }
    Ok(seg)
}

/// Doppler comb: `n_segments` equal single-line slabs, slab i offset by
/// (i − (n−1)/2)·spacing. Total thickness and loss are split evenly.
pub fn doppler_train(
    n_segments: usize,
    spacing: f64,
    linewidth: f64,
    xi_total: f64,
    photoelectric_exponent: f64,
    thickness_um: f64,
) -> Result<Vec<MediumSegment>> {
    if n_segments == 0 {
        return Err(Error::InvalidArgument("Doppler train needs ≥ 1 segment".into()));
    }
    if !(spacing >= 0.0) || !(linewidth > 0.0) || !(xi_total >= 0.0) {
        return Err(Error::InvalidArgument(
            "Doppler train needs spacing ≥ 0, linewidth > 0, ξ ≥ 0".into(),
        ));
    }
    let n = n_segments as f64;
    Ok((0..n_segments)
        .map(|i| MediumSegment {
            teeth: vec![SegmentTooth {
                detuning: 0.0,
                thickness: xi_total / n,
                linewidth,
            }],
            photoelectric_exponent: photoelectric_exponent / n,
            doppler_offset: (i as f64 - (n - 1.0) / 2.0) * spacing,
            thickness_um: thickness_um / n,
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::comb::build_comb;
    use crate::isotope::find_isotope;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn comb_segment_carries_weighted_thickness() {
        let ta = find_isotope("181Ta").unwrap();
        let comb = build_comb(ta, 0.023, 1.0).unwrap();
        let seg = comb_segment(&comb, 15.2, 1.29, 2.6).unwrap();
        let total: f64 = seg.teeth.iter().map(|t| t.thickness).sum();
        assert_relative_eq!(total, 15.2, max_relative = 1e-12);
        // center teeth carry 1/6 each
        assert_abs_diff_eq!(seg.teeth[3].thickness, 15.2 / 6.0, epsilon = 1e-9);
        let stack = MediumStack::single(seg).unwrap();
        assert_relative_eq!(stack.total_resonant_thickness(), 15.2, max_relative = 1e-12);
    }

    #[test]
    fn doppler_train_offsets_are_symmetric() {
        let segs = doppler_train(8, 0.5, 0.1, 16.0, 1.6, 2.6).unwrap();
        assert_eq!(segs.len(), 8);
        assert_abs_diff_eq!(segs[0].doppler_offset, -1.75, epsilon = 1e-12);
        assert_abs_diff_eq!(segs[7].doppler_offset, 1.75, epsilon = 1e-12);
        let sum: f64 = segs.iter().map(|s| s.doppler_offset).sum();
        assert_abs_diff_eq!(sum, 0.0, epsilon = 1e-12);
        for s in &segs {
            assert_abs_diff_eq!(s.teeth[0].thickness, 2.0, epsilon = 1e-12);
            assert_abs_diff_eq!(s.photoelectric_exponent, 0.2, epsilon = 1e-12);
        }
        let stack = MediumStack::new(segs, 8).unwrap();
        assert_abs_diff_eq!(stack.max_abs_detuning(), 1.75, epsilon = 1e-12);
        assert_abs_diff_eq!(stack.total_photoelectric_exponent(), 1.6, epsilon = 1e-12);
    }

    #[test]
    fn stability_exponent_tracks_strongest_line() {
        let seg = MediumSegment {
            teeth: vec![
                SegmentTooth { detuning: 0.0, thickness: 8.0, linewidth: 0.1 },
                SegmentTooth { detuning: 1.0, thickness: 1.0, linewidth: 0.1 },
            ],
            photoelectric_exponent: 0.0,
            doppler_offset: 0.0,
            thickness_um: 1.0,
        };
        let peak = seg.peak_amplitude_exponent();
        // dominated by ξ/2 of the strong line, tails add a whisker
        assert!(peak > 4.0 && peak < 4.1, "peak exponent {peak}");
    }

    #[test]
    fn validation_rejects_nonsense() {
        assert!(MediumStack::new(vec![], 32).is_err());
        let seg = MediumSegment {
            teeth: vec![SegmentTooth { detuning: 0.0, thickness: -1.0, linewidth: 0.1 }],
            photoelectric_exponent: 0.0,
            doppler_offset: 0.0,
            thickness_um: 1.0,
        };
        assert!(MediumStack::single(seg).is_err());
        assert!(doppler_train(0, 0.5, 0.1, 1.0, 0.0, 1.0).is_err());
    }
}
