//! CODATA 2018 values, SI units throughout.

use std::f64::consts::PI;

/// Planck constant, J·s (exact).
pub const PLANCK_H: f64 = 6.626_070_15e-34;
/// Reduced Planck constant, J·s.
pub const HBAR: f64 = PLANCK_H / (2.0 * PI);
/// Speed of light in vacuum, m/s (exact).
pub const LIGHT_SPEED: f64 = 299_792_458.0;
/// Unified atomic mass unit, kg.
pub const AMU: f64 = 1.660_539_066_60e-27;
/// Vacuum permittivity, F/m.
pub const EPSILON_0: f64 = 8.854_187_812_8e-12;

/// One cubic ångström in m³.
pub const ANGSTROM3: f64 = 1e-30;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    pub planck_h: f64,
    pub hbar: f64,
    pub light_speed_c: f64,
    pub amu_kg: f64,
}

pub const CODATA: PhysicalConstants = PhysicalConstants {
    planck_h: PLANCK_H,
    hbar: HBAR,
    light_speed_c: LIGHT_SPEED,
    amu_kg: AMU,
};

/// Converts a polarizability volume (m³) into SI polarizability (C·m²/V).
pub fn polarizability_si(volume_m3: f64) -> f64 {
    4.0 * PI * EPSILON_0 * volume_m3
}
