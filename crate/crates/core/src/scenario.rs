//! Turn-key run descriptions: comb source + protocol + loss model resolved
//! into a concrete medium, input pulse and switch schedule.

use crate::comb::{
    build_comb, effective_thickness, photoelectric_exponent_for, resonant_thickness, CombSpec,
};
use crate::engine::{self, EngineConfig, SimResult, SwitchEvent, SwitchKind};
use crate::error::{Error, Result};
use crate::isotope::IsotopeParams;
use crate::medium::{comb_segment, doppler_train, MediumStack};
use crate::metrics::{detect_echo, gaussian_input, matched_duration, EchoReport};
use crate::spectral::predetermined_efficiency;
use crate::waveform::{TimeGrid, Waveform};
use serde::{Deserialize, Serialize};

/// Storage/retrieval protocol. The Doppler variant splits the absorber into
/// one moving foil per tooth and retrieves by reversing all velocities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Protocol {
    PredeterminedZnfc,
    OndemandZnfc,
    OndemandDnfc,
}

impl Protocol {
    pub fn is_on_demand(self) -> bool {
        !matches!(self, Protocol::PredeterminedZnfc)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::PredeterminedZnfc => "predetermined-znfc",
            Protocol::OndemandZnfc => "ondemand-znfc",
            Protocol::OndemandDnfc => "ondemand-dnfc",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LossModel {
    /// β = 1: no photoelectric background.
    Ideal,
    /// Photoelectric exponent ξ/(f_LM·ratio) from the isotope record (or the
    /// explicit per-ξ rate for synthetic combs).
    Realistic,
}

/// Where the comb comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CombSource {
    /// Zeeman comb of a real isotope; the field strength follows from the
    /// requested rephasing time.
    Isotope { name: String },
    /// Equal-weight synthetic comb (idealized-model studies).
    Uniform { teeth: usize, finesse: f64 },
}

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

/// Serializable description of a single run; the sweep driver stamps out one
/// of these per grid point.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub comb: CombSource,
    pub protocol: Protocol,
    pub loss: LossModel,
    /// Total resonant optical thickness.
    pub xi: f64,
    /// Rephasing time 2π/Δω, µs.
    pub t0: f64,
    /// Tooth broadening κ ≥ 1 (Γ = κΓ0); also widens synthetic teeth.
    #[serde(default = "default_linewidth_factor")]
    pub linewidth_factor: f64,
    /// Photoelectric exponent per unit ξ; overrides the isotope-derived rate
    /// and is required for realistic synthetic combs.
    #[serde(default)]
    pub photoelectric_per_xi: Option<f64>,
    /// T_sw = fraction × T0 for on-demand protocols.
    #[serde(default = "default_switch_fraction")]
    pub switch_fraction: f64,
    /// Linear switch ramp duration, µs (0 = instantaneous).
    #[serde(default)]
    pub switch_ramp: f64,
    /// Input FWHM = factor × matched duration 8ln2/((N−1)Δω + Γ).
    #[serde(default = "default_one")]
    pub input_duration_factor: f64,
    /// Absolute input FWHM in µs; overrides the factor when set.
    #[serde(default)]
    pub input_fwhm_us: Option<f64>,
    /// Absolute switch time in µs; overrides the fraction when set.
    #[serde(default)]
    pub switch_time_us: Option<f64>,
    /// Time resolution: samples per fastest beat period.
    #[serde(default = "default_steps_per_beat")]
    pub steps_per_beat: usize,
    /// Baseline z-slices per segment (stability may raise it).
    #[serde(default)]
    pub slices: Option<usize>,
    /// Manual grid bounds/step, each optional.
    #[serde(default)]
    pub grid: Option<GridOverrides>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridOverrides {
    #[serde(default)]
    pub t_start_us: Option<f64>,
    #[serde(default)]
    pub t_end_us: Option<f64>,
    #[serde(default)]
    pub dt_us: Option<f64>,
}

impl ScenarioSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.xi >= 0.0) || !self.xi.is_finite() {
            return Err(Error::InvalidArgument(format!("xi must be ≥ 0, got {}", self.xi)));
        }
        if !(self.t0 > 0.0) || !self.t0.is_finite() {
            return Err(Error::InvalidArgument(format!("t0 must be > 0, got {}", self.t0)));
        }
        if !(self.linewidth_factor >= 1.0 - 1e-12) {
            return Err(Error::InvalidArgument(format!(
                "linewidth_factor must be ≥ 1, got {}",
                self.linewidth_factor
            )));
        }
        if !(self.switch_fraction > 0.0 && self.switch_fraction < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "switch_fraction must lie in (0, 1), got {}",
                self.switch_fraction
            )));
        }
        if !(self.switch_ramp >= 0.0) {
            return Err(Error::InvalidArgument("switch_ramp must be ≥ 0".into()));
        }
        if !(self.input_duration_factor > 0.0) {
            return Err(Error::InvalidArgument("input_duration_factor must be > 0".into()));
        }
        if self.steps_per_beat < 63 {
            // below 20π steps/beat the resolution guard of the engine trips
            return Err(Error::InvalidArgument(format!(
                "steps_per_beat must be ≥ 63, got {}",
                self.steps_per_beat
            )));
        }
        if let Some(v) = self.photoelectric_per_xi {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "photoelectric_per_xi must be ≥ 0, got {v}"
                )));
            }
        }
        if let Some(v) = self.input_fwhm_us {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("input_fwhm_us must be > 0, got {v}")));
            }
        }
        if let Some(v) = self.switch_time_us {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidArgument(format!("switch_time_us must be > 0, got {v}")));
            }
        }
        if let Some(g) = &self.grid {
            if let Some(dt) = g.dt_us {
                if !(dt > 0.0) || !dt.is_finite() {
                    return Err(Error::InvalidArgument(format!("grid dt must be > 0, got {dt}")));
                }
            }
        }
        if let CombSource::Uniform { teeth, finesse } = self.comb {
            if teeth < 2 || !(finesse > 0.0) {
                return Err(Error::InvalidArgument(
                    "uniform comb needs ≥ 2 teeth and finesse > 0".into(),
                ));
            }
        }
        Ok(())
    }
}

/// A spec resolved against an isotope table: concrete medium, pulse and
/// switch, plus the derived comb quantities the reports quote.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub comb: CombSpec,
    pub stack: MediumStack,
    pub input: Waveform,
    pub switch: Option<SwitchEvent>,
    /// Magnetic field realizing the requested t0 (0 for synthetic combs).
    pub field_tesla: f64,
    pub xi_eff0: f64,
    pub beta: f64,
    pub input_fwhm: f64,
    /// Time the echo is expected: t0 (predetermined) or 2·T_sw (on-demand).
    pub echo_time: f64,
    /// Foil thickness in µm when the isotope record pins the density.
    pub thickness_um: Option<f64>,
}

pub fn lookup_isotope<'a>(table: &'a [IsotopeParams], name: &str) -> Result<&'a IsotopeParams> {
    table
        .iter()
        .find(|iso| iso.name == name)
        .ok_or_else(|| Error::UnknownIsotope(name.to_string()))
}

pub fn build_scenario(spec: &ScenarioSpec, table: &[IsotopeParams]) -> Result<Scenario> {
    spec.validate()?;
    let spacing = std::f64::consts::TAU / spec.t0;

    let (comb, field_tesla, phot_rate, thickness_um) = match &spec.comb {
        CombSource::Isotope { name } => {
            let iso = lookup_isotope(table, name)?;
            // refuse partially-filled records outright instead of silently
            // substituting defaults for whatever happens to be absent
            if let Some(&field) = iso.missing_fields().first() {
                return Err(Error::IncompleteIsotope { name: iso.name.clone(), field });
            }
            let field = spacing / iso.spacing_rate()?;
            let comb = build_comb(iso, field, spec.linewidth_factor)?;
            let rate = match spec.photoelectric_per_xi {
                Some(v) => v,
                None => match spec.loss {
                    LossModel::Ideal => 0.0,
                    LossModel::Realistic => photoelectric_exponent_for(iso, 1.0)?,
                },
            };
            // invert ξ(L) when the record carries density and cross-section
            let l_um = resonant_thickness(iso, 1.0)
                .ok()
                .map(|xi_per_um| spec.xi / xi_per_um);
            (comb, field, rate, l_um)
        }
        CombSource::Uniform { teeth, finesse } => {
            let linewidth = spacing / finesse * spec.linewidth_factor;
            let comb = CombSpec::uniform(*teeth, spacing, linewidth)?;
            let rate = match spec.loss {
                LossModel::Ideal => 0.0,
                LossModel::Realistic => spec.photoelectric_per_xi.ok_or_else(|| {
                    Error::InvalidArgument(
                        "realistic loss on a uniform comb needs photoelectric_per_xi".into(),
                    )
                })?,
            };
            (comb, 0.0, rate, None)
        }
    };

    let phot = match spec.loss {
        LossModel::Ideal => 0.0,
        LossModel::Realistic => spec.xi * phot_rate,
    };
    let beta = (-phot / 2.0).exp();
    let xi_eff0 = effective_thickness(spec.xi, &comb)?;

    let l_um = thickness_um.unwrap_or(0.0);
    let stack = match spec.protocol {
        Protocol::PredeterminedZnfc | Protocol::OndemandZnfc => {
            MediumStack::single(comb_segment(&comb, spec.xi, phot, l_um)?)?
        }
        Protocol::OndemandDnfc => MediumStack::new(
            doppler_train(
                comb.tooth_count(),
                comb.spacing,
                comb.linewidth,
                spec.xi,
                phot,
                l_um,
            )?,
            crate::medium::DEFAULT_SLICES,
        )?,
    };

    let fwhm = spec
        .input_fwhm_us
        .unwrap_or(spec.input_duration_factor * matched_duration(&comb));
    let switch = if spec.protocol.is_on_demand() {
        let kind = match spec.protocol {
            Protocol::OndemandDnfc => SwitchKind::VelocityFlip,
            _ => SwitchKind::ZeemanFlip,
        };
        Some(SwitchEvent {
            time: spec.switch_time_us.unwrap_or(spec.switch_fraction * spec.t0),
            kind,
            ramp: spec.switch_ramp,
        })
    } else {
        None
    };
    let echo_time = match &switch {
        Some(sw) => 2.0 * sw.time,
        None => spec.t0,
    };

    // grid: cover the pulse (truncated below 1e-8 of peak at 2.75 FWHM) and
    // run past the echo by the same margin
    let pad = 2.75 * fwhm;
    let over = spec.grid.unwrap_or_default();
    let dt = over.dt_us.unwrap_or(
        engine::suggested_dt(&stack, spec.steps_per_beat)
            .unwrap_or(f64::INFINITY)
            .min(fwhm / 24.0),
    );
    let grid = TimeGrid::spanning(
        over.t_start_us.unwrap_or(-pad),
        over.t_end_us.unwrap_or(echo_time + pad),
        dt,
    )?;
    let input = gaussian_input(grid, fwhm, 0.0)?;

    Ok(Scenario {
        comb,
        stack,
        input,
        switch,
        field_tesla,
        xi_eff0,
        beta,
        input_fwhm: fwhm,
        echo_time,
        thickness_um,
    })
}

#[derive(Debug, Clone)]
pub struct ScenarioRun {
    pub scenario: Scenario,
    pub sim: SimResult,
    pub report: EchoReport,
    /// Closed-form uniform-comb prediction for the same (ξ_eff⁰, F, β).
    pub theory_efficiency: f64,
}

/// Build, propagate and grade one scenario.
pub fn run_scenario(
    spec: &ScenarioSpec,
    table: &[IsotopeParams],
    engine_cfg: &EngineConfig,
) -> Result<ScenarioRun> {
    let scenario = build_scenario(spec, table)?;
    let mut cfg = engine_cfg.clone();
    if cfg.slices.is_none() {
        cfg.slices = spec.slices;
    }
    let sim = engine::simulate_with(&scenario.input, &scenario.stack, scenario.switch.as_ref(), &cfg)?;
    let t_min = (scenario.echo_time - scenario.input_fwhm).max(0.55 * scenario.echo_time);
    let report = detect_echo(
        &sim.output,
        &scenario.input,
        t_min,
        2.0 * scenario.input_fwhm,
    )?;
    let theory_efficiency =
        predetermined_efficiency(scenario.xi_eff0, scenario.comb.finesse.max(f64::MIN_POSITIVE), scenario.beta)?
            * (-scenario.comb.linewidth * (scenario.echo_time - scenario.comb.t0)).exp();
    Ok(ScenarioRun {
        scenario,
        sim,
        report,
        theory_efficiency,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isotope::builtin_isotopes;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn ta_spec() -> ScenarioSpec {
        ScenarioSpec {
            comb: CombSource::Isotope { name: "181Ta".into() },
            protocol: Protocol::PredeterminedZnfc,
            loss: LossModel::Realistic,
            xi: 15.216,
            t0: 11.4986,
            linewidth_factor: 1.0,
            photoelectric_per_xi: None,
            switch_fraction: 0.5,
            switch_ramp: 0.0,
            input_duration_factor: 1.0,
            input_fwhm_us: None,
            switch_time_us: None,
            steps_per_beat: 64,
            slices: None,
            grid: None,
        }
    }

    #[test]
    fn tantalum_scenario_reproduces_the_operating_point() {
        let sc = build_scenario(&ta_spec(), builtin_isotopes()).unwrap();
        assert_abs_diff_eq!(sc.field_tesla, 0.023, epsilon = 2e-5);
        assert_abs_diff_eq!(sc.xi_eff0, 0.3987, epsilon = 1e-3);
        assert_abs_diff_eq!(sc.beta, 0.525, epsilon = 1e-3);
        assert_abs_diff_eq!(sc.input_fwhm, 1.41, epsilon = 0.01);
        assert_abs_diff_eq!(sc.echo_time, 11.4986, epsilon = 1e-4);
        assert_eq!(sc.stack.segments.len(), 1);
        assert_relative_eq!(sc.thickness_um.unwrap(), 2.6, max_relative = 1e-3);
        assert!(sc.switch.is_none());
    }

    #[test]
    fn doppler_scenario_splits_into_one_segment_per_tooth() {
        let mut spec = ta_spec();
        spec.protocol = Protocol::OndemandDnfc;
        let sc = build_scenario(&spec, builtin_isotopes()).unwrap();
        assert_eq!(sc.stack.segments.len(), 8);
        let sw = sc.switch.unwrap();
        assert!(matches!(sw.kind, SwitchKind::VelocityFlip));
        assert_abs_diff_eq!(sw.time, 11.4986 / 2.0, epsilon = 1e-3);
        assert_abs_diff_eq!(sc.echo_time, 11.4986, epsilon = 1e-3);
        // total thickness is preserved across the split
        assert_relative_eq!(sc.stack.total_resonant_thickness(), 15.216, max_relative = 1e-9);
    }

    #[test]
    fn uniform_comb_scenario_needs_no_isotope() {
        let spec = ScenarioSpec {
            comb: CombSource::Uniform { teeth: 8, finesse: 2000.0 },
            protocol: Protocol::PredeterminedZnfc,
            loss: LossModel::Ideal,
            xi: 16000.0 * 4.0 / std::f64::consts::PI,
            t0: 11.4986,
            linewidth_factor: 1.0,
            photoelectric_per_xi: None,
            switch_fraction: 0.5,
            switch_ramp: 0.0,
            input_duration_factor: 2.5,
            input_fwhm_us: None,
            switch_time_us: None,
            steps_per_beat: 64,
            slices: None,
            grid: None,
        };
        let sc = build_scenario(&spec, &[]).unwrap();
        assert_relative_eq!(sc.xi_eff0, 4.0 / std::f64::consts::PI, max_relative = 1e-12);
        assert_abs_diff_eq!(sc.beta, 1.0, epsilon = 1e-15);
        assert_eq!(sc.comb.tooth_count(), 8);
        assert_relative_eq!(sc.comb.finesse, 2000.0, max_relative = 1e-12);
    }

    #[test]
    fn realistic_uniform_comb_requires_explicit_loss_rate() {
        let mut spec = ta_spec();
        spec.comb = CombSource::Uniform { teeth: 8, finesse: 100.0 };
        assert!(build_scenario(&spec, &[]).is_err());
        spec.photoelectric_per_xi = Some(0.08469);
        let sc = build_scenario(&spec, &[]).unwrap();
        assert_abs_diff_eq!(sc.beta, (-15.216 * 0.08469 / 2.0f64).exp(), epsilon = 1e-12);
    }

    #[test]
    fn spec_validation_rejects_bad_knobs() {
        let mut s = ta_spec();
        s.xi = -1.0;
        assert!(s.validate().is_err());
        let mut s = ta_spec();
        s.switch_fraction = 1.0;
        assert!(s.validate().is_err());
        let mut s = ta_spec();
        s.steps_per_beat = 32;
        assert!(s.validate().is_err());
        let mut s = ta_spec();
        s.comb = CombSource::Isotope { name: "57Fe".into() };
        assert!(matches!(
            build_scenario(&s, builtin_isotopes()),
            Err(Error::UnknownIsotope(_))
        ));
        // incomplete records refuse simulation rather than guessing
        let mut s = ta_spec();
        s.comb = CombSource::Isotope { name: "73Ge".into() };
        assert!(matches!(
            build_scenario(&s, builtin_isotopes()),
            Err(Error::IncompleteIsotope { .. })
        ));
    }

    #[test]
    fn roundtrips_through_json() {
        let spec = ta_spec();
        let j = serde_json::to_string(&spec).unwrap();
        assert!(j.contains("predetermined-znfc"));
        let back: ScenarioSpec = serde_json::from_str(&j).unwrap();
        assert_eq!(back.protocol, Protocol::PredeterminedZnfc);
        assert!(serde_json::from_str::<ScenarioSpec>(&j.replace("\"xi\"", "\"xk\"")).is_err());
    }
}
