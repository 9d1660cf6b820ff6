//! Zeeman frequency-comb construction and absorber thickness bookkeeping.
//!
//! A static field B splits the recoilless ΔM = 0 transitions of one isotope
//! into 2·min(I_g, I_e)+1 equidistant teeth. Tooth M sits at
//! M·(g_g − g_e)·µ_N·B/ħ and carries the squared ⟨I_g M; k 0 | I_e M⟩
//! coupling as its weight.

use crate::angular::{transition_weight, HalfInt};
use crate::constants::{HBAR_KEV_US, NUCLEAR_MAGNETON_RAD_PER_US_T, SPEED_OF_LIGHT_UM_PER_US, UM_PER_CM};
use crate::error::{Error, Result};
use crate::isotope::IsotopeParams;
use serde::Serialize;

#[derive(Debug, Clone, Serialize)]
pub struct CombTooth {
    /// Magnetic sublevel M of the smaller spin manifold.
    pub sublevel: HalfInt,
    /// rad/µs
    pub detuning: f64,
    /// Normalized: weights over the comb sum to 1.
    pub weight: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CombSpec {
    /// Ascending in detuning.
    pub teeth: Vec<CombTooth>,
    /// Tooth spacing Δω, rad/µs (0 when B = 0).
    pub spacing: f64,
    /// Common tooth linewidth Γ = κ·Γ0, rad/µs.
    pub linewidth: f64,
    /// Rephasing period 2π/Δω, µs (infinite when degenerate).
    pub t0: f64,
    /// Δω/Γ (0 when degenerate).
    pub finesse: f64,
}

impl CombSpec {
    /// Synthetic equal-weight comb of `n` teeth centered on the carrier;
    /// the idealized structure behind the closed-form echo expressions.
    pub fn uniform(n: usize, spacing: f64, linewidth: f64) -> Result<CombSpec> {
        if n == 0 {
            return Err(Error::InvalidArgument("comb needs at least one tooth".into()));
        }
        if !(spacing > 0.0) || !(linewidth > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "uniform comb needs spacing > 0 and linewidth > 0, got {spacing}, {linewidth}"
            )));
        }
        let w = 1.0 / n as f64;
        let comb = CombSpec {
            teeth: (0..n)
                .map(|i| CombTooth {
                    sublevel: HalfInt::from_twice(2 * i as i32 - (n as i32 - 1)),
                    detuning: (i as f64 - (n as f64 - 1.0) / 2.0) * spacing,
                    weight: w,
                })
                .collect(),
            spacing,
            linewidth,
            t0: std::f64::consts::TAU / spacing,
            finesse: spacing / linewidth,
        };
        comb.check_invariants()?;
        Ok(comb)
    }

    pub fn tooth_count(&self) -> usize {
        self.teeth.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.teeth.len() == 1 && self.spacing == 0.0
    }

    /// Edge-to-edge span plus one linewidth, (N−1)Δω + Γ, rad/µs.
    pub fn bandwidth(&self) -> f64 {
        (self.teeth.len() as f64 - 1.0) * self.spacing + self.linewidth
    }

    pub fn max_abs_detuning(&self) -> f64 {
        self.teeth
            .iter()
            .map(|t| t.detuning.abs())
            .fold(0.0, f64::max)
    }

    fn check_invariants(&self) -> Result<()> {
        let sum: f64 = self.teeth.iter().map(|t| t.weight).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidArgument(format!(
                "comb weights sum to {sum}, expected 1"
            )));
        }
        if self.teeth.iter().any(|t| t.weight < 0.0) {
            return Err(Error::InvalidArgument("negative comb weight".into()));
        }
        for pair in self.teeth.windows(2) {
            let d = pair[1].detuning - pair[0].detuning;
            if (d - self.spacing).abs() > 1e-9 * self.spacing.max(1e-300) {
                return Err(Error::InvalidArgument(
                    "comb teeth are not equidistant".into(),
                ));
            }
        }
        // ±M teeth mirror each other
        let n = self.teeth.len();
        for i in 0..n / 2 {
            let (a, b) = (&self.teeth[i], &self.teeth[n - 1 - i]);
            if (a.weight - b.weight).abs() > 1e-12 || (a.detuning + b.detuning).abs() > 1e-9 {
                return Err(Error::InvalidArgument(
                    "comb is not symmetric under M → −M".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Build the ΔM = 0 comb of `iso` at field `b_field` (tesla). `gamma_multiplier`
/// broadens every tooth to κ·Γ0 (κ ≥ 1). B = 0 degenerates to one tooth at zero.
pub fn build_comb(iso: &IsotopeParams, b_field: f64, gamma_multiplier: f64) -> Result<CombSpec> {
    if !(b_field >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "b_field must be ≥ 0, got {b_field}"
        )));
    }
    if !(gamma_multiplier >= 1.0 - 1e-12) {
        return Err(Error::InvalidArgument(format!(
            "gamma_multiplier must be ≥ 1, got {gamma_multiplier}"
        )));
    }
    let linewidth = iso.natural_linewidth() * gamma_multiplier;

    if b_field == 0.0 {
        return Ok(CombSpec {
            teeth: vec![CombTooth {
                sublevel: HalfInt::ZERO,
                detuning: 0.0,
                weight: 1.0,
            }],
            spacing: 0.0,
            linewidth,
            t0: f64::INFINITY,
            finesse: 0.0,
        });
    }

    let gg = iso.require_g_ground()?;
    let ge = iso.require_g_excited()?;
    let small = iso.spin_ground.min(iso.spin_excited);
    let per_sublevel = (gg - ge) * NUCLEAR_MAGNETON_RAD_PER_US_T * b_field;

    let mut teeth = Vec::with_capacity(small.multiplicity());
    let mut total = 0.0;
    for m in small.manifold() {
        let w = transition_weight(iso.spin_ground, iso.spin_excited, iso.multipole_rank, m)?;
        total += w;
        teeth.push(CombTooth {
            sublevel: m,
            detuning: m.value() * per_sublevel,
            weight: w,
        });
    }
    if !(total > 0.0) {
        return Err(Error::AngularMomentum(format!(
            "all ΔM = 0 couplings of `{}` vanish",
            iso.name
        )));
    }
    for t in &mut teeth {
        t.weight /= total;
    }
    teeth.sort_by(|a, b| a.detuning.total_cmp(&b.detuning));

    let spacing = per_sublevel.abs();
    let comb = CombSpec {
        teeth,
        spacing,
        linewidth,
        t0: std::f64::consts::TAU / spacing,
        finesse: spacing / linewidth,
    };
    comb.check_invariants()?;
    Ok(comb)
}

/// Total resonant optical thickness ξ = N·σ_R·f_LM·L of a foil `thickness_um` thick.
pub fn resonant_thickness(iso: &IsotopeParams, thickness_um: f64) -> Result<f64> {
    if !(thickness_um > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "thickness must be > 0, got {thickness_um}"
        )));
    }
    let n = iso.require_number_density()?;
    let sigma = iso.require_cross_section()?;
    let f = iso.require_lamb_mossbauer()?;
    Ok(n * sigma * f * thickness_um / UM_PER_CM)
}

/// Intensity attenuation exponent of the photoelectric background over the
/// full foil, N·σ_ph·L = ξ/(f_LM·ratio). Amplitude transmission is exp(−·/2).
pub fn photoelectric_exponent_for(iso: &IsotopeParams, xi_total: f64) -> Result<f64> {
    let ratio = iso.require_ratio()?;
    let f = iso.require_lamb_mossbauer()?;
    Ok(xi_total / (f * ratio))
}

/// Off-resonant amplitude transmission β = exp(−N σ_ph L / 2).
pub fn offresonant_beta(iso: &IsotopeParams, thickness_um: f64) -> Result<f64> {
    let xi = resonant_thickness(iso, thickness_um)?;
    Ok((-photoelectric_exponent_for(iso, xi)? / 2.0).exp())
}

/// Per-tooth effective thickness of the uniform-comb picture, ξ/(F·N).
pub fn effective_thickness(xi_total: f64, comb: &CombSpec) -> Result<f64> {
    if comb.is_degenerate() {
        return Err(Error::InvalidArgument(
            "effective thickness is undefined for a degenerate (B = 0) comb".into(),
        ));
    }
    Ok(xi_total / (comb.finesse * comb.tooth_count() as f64))
}

/// Velocity step that Doppler-shifts one comb spacing, µm/s.
pub fn doppler_velocity_spacing(comb: &CombSpec, iso: &IsotopeParams) -> f64 {
    SPEED_OF_LIGHT_UM_PER_US * comb.spacing * HBAR_KEV_US / iso.transition_energy_kev * 1e6
}
