//! JSON run-configuration for the command-line front end.
//!
//! Files speak lab units — magnetic field in mT, foil thickness in µm — and
//! are converted here into the solver's (ξ, T0) working point. Unknown keys
//! are rejected so typos fail loudly instead of silently using defaults.

use nfcomb_core::comb::resonant_thickness;
use nfcomb_core::scenario::GridOverrides;
use nfcomb_core::{CombSource, Error, IsotopeParams, LossModel, Protocol, Result, ScenarioSpec};
use serde::{Deserialize, Serialize};

fn default_one() -> f64 {
    1.0
}
fn default_half() -> f64 {
    0.5
}
fn default_steps_per_beat() -> usize {
    64
}
fn default_protocol() -> Protocol {
    Protocol::PredeterminedZnfc
}
fn default_loss() -> LossModel {
    LossModel::Realistic
}

/// Equal-weight synthetic comb (idealized-model studies).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticComb {
    pub teeth: usize,
    /// Tooth spacing over linewidth, Δω/Γ.
    pub finesse: f64,
}

/// Input pulse length: an explicit FWHM wins over the matched-duration multiplier.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    /// Field-envelope FWHM, µs.
    #[serde(default)]
    pub fwhm_us: Option<f64>,
    /// Multiple of the comb-bandwidth-matched duration (default 1).
    #[serde(default = "default_one")]
    pub matched_factor: f64,
}

impl Default for InputSpec {
    fn default() -> Self {
        InputSpec { fwhm_us: None, matched_factor: 1.0 }
    }
}

/// When to reverse the comb (on-demand protocols only).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SwitchConfig {
    /// Absolute switch time, µs; wins over `fraction`.
    #[serde(default)]
    pub time_us: Option<f64>,
    /// Fraction of the rephasing period (default 0.5 → retrieval at T0).
    #[serde(default = "default_half")]
    pub fraction: f64,
    /// Linear ramp duration, µs (0 = instantaneous).
    #[serde(default)]
    pub ramp_us: f64,
}

/// Output paths baked into the config; command-line flags take precedence.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Outputs {
    #[serde(default)]
    pub csv: Option<String>,
    #[serde(default)]
    pub report: Option<String>,
    #[serde(default)]
    pub svg: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Isotope name from the built-in or user-supplied table.
    #[serde(default)]
    pub isotope: Option<String>,
    /// Synthetic comb instead of an isotope (mutually exclusive).
    #[serde(default)]
    pub comb: Option<SyntheticComb>,
    /// Static field, mT. 0 collapses the comb to a single absorption line.
    #[serde(default)]
    pub field_mt: Option<f64>,
    /// Foil thickness, µm; sets ξ through the resonant cross-section.
    #[serde(default)]
    pub thickness_um: Option<f64>,
    /// Total on-resonance optical thickness; overrides `thickness_um`.
    #[serde(default)]
    pub xi: Option<f64>,
    /// Rephasing period, µs (synthetic combs only; isotopes get it from the field).
    #[serde(default)]
    pub t0_us: Option<f64>,
    #[serde(default = "default_protocol")]
    pub protocol: Protocol,
    #[serde(default = "default_loss")]
    pub loss: LossModel,
    /// Homogeneous-broadening multiplier κ on the natural linewidth.
    #[serde(default = "default_one")]
    pub linewidth_factor: f64,
    /// Photoelectric exponent per unit ξ (synthetic combs, or isotope override).
    #[serde(default)]
    pub photoelectric_per_xi: Option<f64>,
    #[serde(default)]
    pub input: InputSpec,
    #[serde(default)]
    pub switch: Option<SwitchConfig>,
    #[serde(default = "default_steps_per_beat")]
    pub steps_per_beat: usize,
    /// Baseline z-slices per segment (the engine may raise the count).
    #[serde(default)]
    pub slices: Option<usize>,
    #[serde(default)]
    pub grid: Option<GridOverrides>,
    #[serde(default)]
    pub outputs: Outputs,
}

/// What a config resolves to: a full echo scenario, or — at B = 0 — a single
/// unsplit absorption line with no rephasing dynamics.
pub enum ResolvedRun {
    Echo(ScenarioSpec),
    ZeroField(ZeroFieldRun),
}

pub struct ZeroFieldRun {
    pub isotope: String,
    pub xi: f64,
    pub photoelectric_exponent: f64,
    pub linewidth_factor: f64,
    pub input_fwhm_us: Option<f64>,
    pub matched_factor: f64,
    pub slices: Option<usize>,
    pub grid: Option<GridOverrides>,
}

fn usage(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

impl RunConfig {
    /// Convert lab units to the solver working point. `table` is the merged
    /// isotope table (built-ins plus any user entries).
    pub fn resolve(&self, table: &[IsotopeParams]) -> Result<ResolvedRun> {
        if self.isotope.is_some() == self.comb.is_some() {
            return Err(usage("config needs exactly one of `isotope` or `comb`"));
        }
        if let Some(sw) = &self.switch {
            if !self.protocol.is_on_demand() {
                return Err(usage(
                    "`switch` requires an on-demand protocol (`ondemand-znfc` or `ondemand-dnfc`)",
                ));
            }
            if sw.ramp_us < 0.0 {
                return Err(usage("`switch.ramp_us` must be ≥ 0"));
            }
            if !(0.0..=1.0).contains(&sw.fraction) {
                return Err(usage("`switch.fraction` must lie in [0, 1]"));
            }
        }
        if let Some(x) = self.xi {
            if !(x >= 0.0) || !x.is_finite() {
                return Err(usage("`xi` must be finite and ≥ 0"));
            }
        }

        let (comb_source, t0, xi) = match (&self.isotope, &self.comb) {
            (Some(name), None) => {
                let iso = nfcomb_core::scenario::lookup_isotope(table, name)?;
                let field_mt = self
                    .field_mt
                    .ok_or_else(|| usage("isotope configs need `field_mt`"))?;
                if !(field_mt >= 0.0) || !field_mt.is_finite() {
                    return Err(usage("`field_mt` must be finite and ≥ 0"));
                }
                if self.t0_us.is_some() {
                    return Err(usage("`t0_us` is for synthetic combs; isotopes take `field_mt`"));
                }
                let xi = self.resolve_xi(iso)?;
                if field_mt == 0.0 {
                    // no Zeeman splitting → no comb, no echo; handled separately
                    if let Some(&field) = iso.missing_fields().first() {
                        return Err(Error::IncompleteIsotope { name: iso.name.clone(), field });
                    }
                    let phot = match self.loss {
                        LossModel::Ideal => 0.0,
                        LossModel::Realistic => match self.photoelectric_per_xi {
                            Some(rate) => rate * xi,
                            None => nfcomb_core::comb::photoelectric_exponent_for(iso, xi)?,
                        },
                    };
                    if self.protocol.is_on_demand() {
                        return Err(usage(
                            "on-demand retrieval needs a split comb; set `field_mt` > 0",
                        ));
                    }
                    return Ok(ResolvedRun::ZeroField(ZeroFieldRun {
                        isotope: iso.name.clone(),
                        xi,
                        photoelectric_exponent: phot,
                        linewidth_factor: self.linewidth_factor,
                        input_fwhm_us: self.input.fwhm_us,
                        matched_factor: self.input.matched_factor,
                        slices: self.slices,
                        grid: self.grid,
                    }));
                }
                let spacing = iso.spacing_rate()? * field_mt * 1e-3;
                let t0 = std::f64::consts::TAU / spacing;
                (CombSource::Isotope { name: iso.name.clone() }, t0, xi)
            }
            (None, Some(synth)) => {
                let t0 = self
                    .t0_us
                    .ok_or_else(|| usage("synthetic-comb configs need `t0_us`"))?;
                let xi = self
                    .xi
                    .ok_or_else(|| usage("synthetic-comb configs need `xi`"))?;
                if self.field_mt.is_some() || self.thickness_um.is_some() {
                    return Err(usage(
                        "`field_mt`/`thickness_um` describe isotope foils; synthetic combs take `xi` and `t0_us`",
                    ));
                }
                (
                    CombSource::Uniform { teeth: synth.teeth, finesse: synth.finesse },
                    t0,
                    xi,
                )
            }
            _ => unreachable!("exclusivity checked above"),
        };

        let (switch_fraction, switch_ramp, switch_time_us) = match &self.switch {
            Some(sw) => (sw.fraction, sw.ramp_us, sw.time_us),
            None => (0.5, 0.0, None),
        };

        Ok(ResolvedRun::Echo(ScenarioSpec {
            comb: comb_source,
            protocol: self.protocol,
            loss: self.loss,
            xi,
            t0,
            linewidth_factor: self.linewidth_factor,
            photoelectric_per_xi: self.photoelectric_per_xi,
            switch_fraction,
            switch_ramp,
            input_duration_factor: self.input.matched_factor,
            input_fwhm_us: self.input.fwhm_us,
            switch_time_us,
            steps_per_beat: self.steps_per_beat,
            slices: self.slices,
            grid: self.grid,
        }))
    }

    /// ξ from the explicit value, else from the foil thickness and the
    /// isotope's resonant cross-section.
    fn resolve_xi(&self, iso: &IsotopeParams) -> Result<f64> {
        match (self.xi, self.thickness_um) {
            (Some(xi), _) => Ok(xi),
            (None, Some(l)) => {
                if !(l > 0.0) {
                    return Err(usage("`thickness_um` must be > 0"));
                }
                resonant_thickness(iso, l)
            }
            (None, None) => Err(usage("isotope configs need `thickness_um` or `xi`")),
        }
    }
}

/// Parse a config file, turning serde's message into a line-precise error.
pub fn parse_config(text: &str, path: &str) -> Result<RunConfig> {
    serde_json::from_str(text).map_err(|e| usage(format!("{path}: {e}")))
}
