//! Standing-wave grating: imprinted phase, absorbed photons, the coherent
//! and absorptive diffraction parameters, and the closed-form visibility.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grating::{sinc, LaserGrating};
use crate::molecule::Molecule;
use crate::physics::constants::{HBAR, LIGHT_SPEED};
use crate::physics::special::{in_series, jn};
use crate::quadrature::periodic_mean;

/// Which numerical prefactors to use in the phase and photon-number formulas.
///
/// `Derived` integrates the Gaussian-beam fluence at the antinode,
/// `F = 8P/(√(2π)·w_y·v)`, which gives `Φ = 2π·α·F/(ħc)` and
/// `n₀ = σ·λ·F/(2πħc)`. `Printed` keeps the literal constants
/// `8√2·π` and `8/(√2·π)` for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EqPrefactors {
    #[default]
    Derived,
    Printed,
}

impl EqPrefactors {
    fn phase(self) -> f64 {
        match self {
            EqPrefactors::Derived => 8.0 * (2.0 * PI).sqrt(),
            EqPrefactors::Printed => 8.0 * 2f64.sqrt() * PI,
        }
    }

    fn absorption(self) -> f64 {
        match self {
            EqPrefactors::Derived => 4.0 / (PI * (2.0 * PI).sqrt()),
            EqPrefactors::Printed => 8.0 / (2f64.sqrt() * PI),
        }
    }
}

impl std::str::FromStr for EqPrefactors {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "derived" => Ok(EqPrefactors::Derived),
            "printed" => Ok(EqPrefactors::Printed),
            _ => Err(format!("expected `derived` or `printed`, found `{s}`")),
        }
    }
}

impl std::fmt::Display for EqPrefactors {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EqPrefactors::Derived => "derived",
            EqPrefactors::Printed => "printed",
        })
    }
}

fn check_speed(speed: f64) -> Result<()> {
    if speed > 0.0 && speed.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("speed {speed} must be positive")))
    }
}

/// Peak phase at a standing-wave antinode, derived prefactor.
pub fn phi_max(molecule: &Molecule, laser: &LaserGrating, speed: f64) -> Result<f64> {
    phi_max_with(molecule, laser, speed, EqPrefactors::Derived)
}

pub fn phi_max_with(molecule: &Molecule, laser: &LaserGrating, speed: f64, prefactors: EqPrefactors) -> Result<f64> {
    check_speed(speed)?;
    laser.validate()?;
    let alpha = molecule.polarizability_volume()?;
    Ok(prefactors.phase() * alpha * laser.power / (HBAR * LIGHT_SPEED * laser.waist_y * speed))
}

/// Mean number of photons absorbed when crossing an antinode, derived prefactor.
pub fn mean_absorbed_photons(molecule: &Molecule, laser: &LaserGrating, speed: f64) -> Result<f64> {
    mean_absorbed_photons_with(molecule, laser, speed, EqPrefactors::Derived)
}

pub fn mean_absorbed_photons_with(
    molecule: &Molecule,
    laser: &LaserGrating,
    speed: f64,
    prefactors: EqPrefactors,
) -> Result<f64> {
    check_speed(speed)?;
    laser.validate()?;
    Ok(prefactors.absorption() * molecule.absorption_cross_section * laser.wavelength * laser.power
        / (HBAR * LIGHT_SPEED * laser.waist_y * speed))
}

fn check_lengths(l: f64, lt: f64) -> Result<()> {
    if l > 0.0 && lt > 0.0 && l.is_finite() && lt.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("lengths L = {l}, L_T = {lt} must be positive")))
    }
}

/// `ξ_coh = Φ·sin(πL/L_T)`.
pub fn coherent_parameter(phi_max: f64, separation: f64, talbot_length: f64) -> Result<f64> {
    check_lengths(separation, talbot_length)?;
    Ok(phi_max * (PI * separation / talbot_length).sin())
}

/// `ξ_abs = n₀·sin²(πL/(2L_T))`.
pub fn absorption_parameter(n0: f64, separation: f64, talbot_length: f64) -> Result<f64> {
    check_lengths(separation, talbot_length)?;
    if !(n0 >= 0.0) {
        return Err(Error::domain(format!("photon number {n0} must be non-negative")));
    }
    Ok(n0 * (0.5 * PI * separation / talbot_length).sin().powi(2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KdtliParameters {
    pub phi_max: f64,
    pub n0: f64,
    pub xi_coh: f64,
    pub xi_abs: f64,
    pub open_fraction: f64,
}

impl KdtliParameters {
    /// Parameters at the separation-to-Talbot-length ratio `zeta`.
    pub fn at_ratio(phi_max: f64, n0: f64, zeta: f64, open_fraction: f64) -> Result<Self> {
        let p = KdtliParameters {
            phi_max,
            n0,
            xi_coh: phi_max * (PI * zeta).sin(),
            xi_abs: n0 * (0.5 * PI * zeta).sin().powi(2),
            open_fraction,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.n0 >= 0.0 && self.xi_abs >= 0.0) {
            return Err(Error::domain("n0 and xi_abs must be non-negative"));
        }
        if !(self.xi_coh.abs() <= self.phi_max * (1.0 + 1e-12)) {
            return Err(Error::domain("|xi_coh| exceeds phi_max"));
        }
        Ok(())
    }
}

/// Closed-form first-harmonic visibility of the three-grating arrangement
/// with a standing-wave central grating, as a magnitude.
///
/// Uses `ξ̂ = |ξ_coh|`. Below `ξ̂ = ξ_abs` the Bessel factor continues to
/// `−I₂(√(ξ_abs² − ξ̂²))`.
pub fn visibility_closed_form(params: &KdtliParameters) -> Result<f64> {
    let xa = params.xi_abs;
    if !(xa >= 0.0) {
        return Err(Error::domain(format!("xi_abs {xa} must be non-negative")));
    }
    let xc = params.xi_coh.abs();
    let envelope = 2.0 * sinc(PI * params.open_fraction).powi(2);
    if xa == 0.0 {
        return Ok(envelope * jn(2, xc).abs());
    }
    let ratio = (xc - xa) / (xc + xa);
    let bessel = if xc >= xa {
        jn(2, (xc * xc - xa * xa).sqrt())
    } else {
        -in_series(2, (xa * xa - xc * xc).sqrt())
    };
    Ok((envelope * (-xa).exp() * ratio * bessel).abs())
}

/// Talbot-Lau coefficient of the standing-wave grating including Poisson
/// photon absorption with random ±ħk kicks:
/// `(1/2π)∫ exp[iΦ sin(πζ) sinθ]·exp[n₀ cos²(θ/2)(cos πζ − 1)]·e^{−inθ} dθ`.
pub fn tl_coefficient_with_absorption(phi_max: f64, n0: f64, n: i64, zeta: f64) -> Result<Complex64> {
    if !(n0 >= 0.0) {
        return Err(Error::domain(format!("photon number {n0} must be non-negative")));
    }
    let coh = phi_max * (PI * zeta).sin();
    let damp = n0 * ((PI * zeta).cos() - 1.0);
    periodic_mean(
        |theta| {
            let c = (0.5 * theta).cos();
            Complex64::from_polar((damp * c * c).exp(), coh * theta.sin() - n as f64 * theta)
        },
        1e-14,
    )
}
