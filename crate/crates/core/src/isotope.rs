//! Isotope records and the built-in table.
//!
//! A record may be partial: fields the literature does not pin down are
//! `None`, and any operation that needs one reports which field is missing
//! instead of guessing. Extra tables can be loaded from user files with the
//! same JSON schema (see `data/isotopes.json`).

use crate::angular::HalfInt;
use crate::constants::NUCLEAR_MAGNETON_RAD_PER_US_T;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsotopeParams {
    pub name: String,
    pub transition_energy_kev: f64,
    /// 2^k multipole order of the transition (1 = dipole, 2 = quadrupole).
    pub multipole_rank: u32,
    /// Excited-state lifetime T1 (not half-life), µs.
    pub lifetime_us: f64,
    pub spin_ground: HalfInt,
    pub spin_excited: HalfInt,
    pub g_ground: Option<f64>,
    pub g_excited: Option<f64>,
    pub resonant_cross_section_cm2: Option<f64>,
    /// σ_R / σ_photoelectric at the transition energy.
    pub cross_section_ratio: Option<f64>,
    pub lamb_mossbauer: Option<f64>,
    pub number_density_per_cm3: Option<f64>,
    pub internal_conversion: Option<f64>,
}

impl IsotopeParams {
    /// Natural linewidth Γ0 = 1/T1, rad/µs. Derived, never stored.
    pub fn natural_linewidth(&self) -> f64 {
        1.0 / self.lifetime_us
    }

    /// Tooth count of the ΔM = 0 comb: 2·min(I_g, I_e) + 1.
    pub fn tooth_count(&self) -> usize {
        self.spin_ground.min(self.spin_excited).multiplicity()
    }

    /// Comb spacing per unit field, |g_e − g_g|·µ_N/ħ, rad µs⁻¹ T⁻¹.
    pub fn spacing_rate(&self) -> Result<f64> {
        let gg = self.require_g_ground()?;
        let ge = self.require_g_excited()?;
        Ok((ge - gg).abs() * NUCLEAR_MAGNETON_RAD_PER_US_T)
    }

    pub fn require_g_ground(&self) -> Result<f64> {
        self.g_ground.ok_or_else(|| self.missing("g_ground"))
    }

    pub fn require_g_excited(&self) -> Result<f64> {
        self.g_excited.ok_or_else(|| self.missing("g_excited"))
    }

    pub fn require_cross_section(&self) -> Result<f64> {
        self.resonant_cross_section_cm2
            .ok_or_else(|| self.missing("resonant_cross_section_cm2"))
    }

    pub fn require_ratio(&self) -> Result<f64> {
        self.cross_section_ratio
            .ok_or_else(|| self.missing("cross_section_ratio"))
    }

    pub fn require_lamb_mossbauer(&self) -> Result<f64> {
        self.lamb_mossbauer
            .ok_or_else(|| self.missing("lamb_mossbauer"))
    }

    pub fn require_number_density(&self) -> Result<f64> {
        self.number_density_per_cm3
            .ok_or_else(|| self.missing("number_density_per_cm3"))
    }

    fn missing(&self, field: &'static str) -> Error {
        Error::IncompleteIsotope {
            name: self.name.clone(),
            field,
        }
    }

    /// Names of absent optional fields, for reports.
    pub fn missing_fields(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.g_ground.is_none() {
            out.push("g_ground");
        }
        if self.g_excited.is_none() {
            out.push("g_excited");
        }
        if self.resonant_cross_section_cm2.is_none() {
            out.push("resonant_cross_section_cm2");
        }
        if self.cross_section_ratio.is_none() {
            out.push("cross_section_ratio");
        }
        if self.lamb_mossbauer.is_none() {
            out.push("lamb_mossbauer");
        }
        if self.number_density_per_cm3.is_none() {
            out.push("number_density_per_cm3");
        }
        if self.internal_conversion.is_none() {
            out.push("internal_conversion");
        }
        out
    }

    pub fn is_complete(&self) -> bool {
        self.missing_fields().is_empty()
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Database(format!("isotope `{}`: {msg}", self.name)));
        if self.name.is_empty() {
            return Err(Error::Database("empty isotope name".into()));
        }
        if !(self.lifetime_us > 0.0) {
            return bad(format!("lifetime_us must be > 0, got {}", self.lifetime_us));
        }
        if !(self.transition_energy_kev > 0.0) {
            return bad("transition_energy_kev must be > 0".into());
        }
        if self.spin_ground.twice() < 0 || self.spin_excited.twice() < 0 {
            return bad("spins must be non-negative".into());
        }
        if self.multipole_rank == 0 {
            return bad("multipole_rank must be ≥ 1".into());
        }
        let di = (self.spin_ground.twice() - self.spin_excited.twice()).abs();
        if di > 2 * self.multipole_rank as i32 {
            return bad(format!(
                "rank-{} radiation cannot connect spins {} and {}",
                self.multipole_rank, self.spin_ground, self.spin_excited
            ));
        }
        if let Some(s) = self.resonant_cross_section_cm2 {
            if !(s > 0.0) {
                return bad("resonant_cross_section_cm2 must be > 0".into());
            }
        }
        if let Some(r) = self.cross_section_ratio {
            if !(r > 0.0) {
                return bad("cross_section_ratio must be > 0".into());
            }
        }
        if let Some(f) = self.lamb_mossbauer {
            if !(f > 0.0 && f <= 1.0) {
                return bad(format!("lamb_mossbauer must be in (0, 1], got {f}"));
            }
        }
        if let Some(n) = self.number_density_per_cm3 {
            if !(n > 0.0) {
                return bad("number_density_per_cm3 must be > 0".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct IsotopeTable {
    schema: String,
    isotopes: Vec<IsotopeParams>,
}

const SCHEMA_ID: &str = "nfcomb-isotope-table/1";
const BUILTIN_JSON: &str = include_str!("../data/isotopes.json");

fn parse_table(json: &str) -> Result<Vec<IsotopeParams>> {
    let table: IsotopeTable =
        serde_json::from_str(json).map_err(|e| Error::Database(e.to_string()))?;
    if table.schema != SCHEMA_ID {
        return Err(Error::Database(format!(
            "unsupported schema `{}` (expected `{SCHEMA_ID}`)",
            table.schema
        )));
    }
    let mut seen = std::collections::HashSet::new();
    for iso in &table.isotopes {
        iso.validate()?;
        if !seen.insert(iso.name.clone()) {
            return Err(Error::Database(format!("duplicate isotope `{}`", iso.name)));
        }
    }
    Ok(table.isotopes)
}

/// The built-in records (¹⁸¹Ta complete; ⁷³Ge and ⁴⁵Sc partial).
pub fn builtin_isotopes() -> &'static [IsotopeParams] {
    static TABLE: OnceLock<Vec<IsotopeParams>> = OnceLock::new();
    TABLE.get_or_init(|| parse_table(BUILTIN_JSON).expect("embedded isotope table is valid"))
}

/// Parse an additional user-supplied table (same schema as the built-in one).
pub fn load_isotope_table(json: &str) -> Result<Vec<IsotopeParams>> {
    parse_table(json)
}

/// Look up by name in the built-in table.
pub fn find_isotope(name: &str) -> Result<&'static IsotopeParams> {
    builtin_isotopes()
        .iter()
        .find(|i| i.name == name)
        .ok_or_else(|| Error::UnknownIsotope(name.to_string()))
}

/// Decay time of eddy currents in a foil of thickness `l` and transverse size
/// `l_y` (meters), relative permeability `mu_r` and resistivity `rho` (Ω·m).
/// Returns seconds; limits the speed of magnetic-field switching.
pub fn eddy_decay_time(l: f64, l_y: f64, mu_r: f64, rho: f64) -> Result<f64> {
    if !(l > 0.0) || !(l_y > 0.0) || !(mu_r > 0.0) || !(rho > 0.0) {
        return Err(Error::InvalidArgument(
            "eddy_decay_time needs positive dimensions, permeability and resistivity".into(),
        ));
    }
    let geometry = (l * l * l_y * l_y) / (l * l + l_y * l_y);
    Ok(geometry * mu_r * crate::constants::MU_0 / (rho * std::f64::consts::PI.powi(2)))
}
