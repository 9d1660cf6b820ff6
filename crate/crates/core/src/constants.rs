//! Physical constants and the internal unit system.
//!
//! Internally everything runs in microseconds, rad/µs, micrometers and tesla;
//! cross sections stay in cm² and number densities in cm⁻³ because optical
//! thickness is the only place they meet. The constants below fold the unit
//! conversions once so the rest of the crate never multiplies by 10^±6.

/// Nuclear magneton over Planck constant, MHz/T (CODATA 2018).
pub const NUCLEAR_MAGNETON_MHZ_PER_T: f64 = 7.622_593_285;

/// Nuclear magneton over ħ, rad µs⁻¹ T⁻¹ (= 2π × the MHz/T value).
pub const NUCLEAR_MAGNETON_RAD_PER_US_T: f64 = std::f64::consts::TAU * NUCLEAR_MAGNETON_MHZ_PER_T;

/// Vacuum permeability, H/m.
pub const MU_0: f64 = 1.256_637_062_12e-6;

/// Speed of light, µm/µs (= m/s).
pub const SPEED_OF_LIGHT_UM_PER_US: f64 = 2.997_924_58e8;

/// ħ in keV·µs, for converting transition energies to angular frequencies.
pub const HBAR_KEV_US: f64 = 6.582_119_569e-13;

/// Micrometers per centimeter; thicknesses are µm, cross sections cm².
pub const UM_PER_CM: f64 = 1.0e4;
