//! Interferometer signal model: the standing-wave closed form, Talbot-Lau
//! coefficients, fringe harmonics and their velocity average.

mod harmonics;
mod kdtli;
mod velocity;

pub use harmonics::{
    fringe_harmonics, fringe_harmonics_with, velocity_averaged_harmonics, velocity_averaged_harmonics_with,
    visibility_from_harmonics, FringeHarmonics, VisibilityMode,
};
pub use kdtli::{
    absorption_parameter, coherent_parameter, mean_absorbed_photons, mean_absorbed_photons_with, phi_max,
    phi_max_with, tl_coefficient_with_absorption, visibility_closed_form, EqPrefactors, KdtliParameters,
};
pub use velocity::{VelocityDistribution, VelocityShape};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::grating::{sinc, LaserGrating, MaterialGrating};

/// Relative tolerance on the equality of the three grating periods.
pub const PERIOD_MATCH_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Arrangement {
    Tli,
    Kdtli,
}

impl std::str::FromStr for Arrangement {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "tli" => Ok(Arrangement::Tli),
            "kdtli" => Ok(Arrangement::Kdtli),
            _ => Err(format!("expected `tli` or `kdtli`, found `{s}`")),
        }
    }
}

impl std::fmt::Display for Arrangement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Arrangement::Tli => "tli",
            Arrangement::Kdtli => "kdtli",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CentralGrating {
    Material(MaterialGrating),
    Laser(LaserGrating),
}

impl CentralGrating {
    pub fn period(&self) -> f64 {
        match self {
            CentralGrating::Material(g) => g.period,
            CentralGrating::Laser(l) => l.period(),
        }
    }
}

/// Three equally spaced gratings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferometerGeometry {
    pub arrangement: Arrangement,
    pub grating1: MaterialGrating,
    pub grating2: CentralGrating,
    pub grating3: MaterialGrating,
    pub separation: f64,
}

impl InterferometerGeometry {
    pub fn new(
        grating1: MaterialGrating,
        grating2: CentralGrating,
        grating3: MaterialGrating,
        separation: f64,
    ) -> Result<Self> {
        let arrangement = match grating2 {
            CentralGrating::Material(_) => Arrangement::Tli,
            CentralGrating::Laser(_) => Arrangement::Kdtli,
        };
        let g = InterferometerGeometry {
            arrangement,
            grating1,
            grating2,
            grating3,
            separation,
        };
        g.validate()?;
        Ok(g)
    }

    /// Material gratings take the standing-wave period `λ_L/2`.
    pub fn kdtli(laser: LaserGrating, open_fraction: f64, thickness: f64, separation: f64) -> Result<Self> {
        let mask = MaterialGrating::new(laser.period(), open_fraction, thickness, crate::grating::WallModel::None)?;
        Self::new(mask, CentralGrating::Laser(laser), mask, separation)
    }

    /// Three identical material gratings.
    pub fn tli(grating: MaterialGrating, separation: f64) -> Result<Self> {
        Self::new(grating, CentralGrating::Material(grating), grating, separation)
    }

    pub fn validate(&self) -> Result<()> {
        self.grating1.validate()?;
        self.grating3.validate()?;
        match (&self.arrangement, &self.grating2) {
            (Arrangement::Tli, CentralGrating::Material(g)) => g.validate()?,
            (Arrangement::Kdtli, CentralGrating::Laser(l)) => l.validate()?,
            _ => return Err(Error::domain("central grating does not match the arrangement")),
        }
        if !(self.separation > 0.0 && self.separation.is_finite()) {
            return Err(Error::domain(format!("separation {} must be positive", self.separation)));
        }
        let d = self.grating1.period;
        for (name, p) in [("grating2", self.grating2.period()), ("grating3", self.grating3.period)] {
            if ((p - d) / d).abs() > PERIOD_MATCH_TOLERANCE {
                return Err(Error::domain(format!(
                    "{name} period {p:e} m differs from grating1 period {d:e} m"
                )));
            }
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        self.grating1.period
    }

    pub fn laser(&self) -> Option<&LaserGrating> {
        match &self.grating2 {
            CentralGrating::Laser(l) => Some(l),
            CentralGrating::Material(_) => None,
        }
    }

    pub fn with_laser_power(mut self, power: f64) -> Self {
        if let CentralGrating::Laser(l) = &mut self.grating2 {
            l.power = power;
        }
        self
    }
}

/// Visibility reduction from a small period mismatch `δd` accumulated
/// linearly across an illuminated width `W`: `|sinc(π·W·δd/d²)|`.
pub fn period_mismatch_factor(delta_d: f64, illuminated_width: f64, period: f64) -> Result<f64> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::domain(format!("period {period} must be positive")));
    }
    if !(illuminated_width > 0.0 && illuminated_width.is_finite()) {
        return Err(Error::domain(format!("width {illuminated_width} must be positive")));
    }
    if !delta_d.is_finite() {
        return Err(Error::domain("period mismatch must be finite"));
    }
    Ok(sinc(PI * illuminated_width * delta_d / (period * period)).abs())
}

/// Options shared by the harmonic and averaging routines.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineOptions {
    pub prefactors: EqPrefactors,
    /// Visibility change allowed when the velocity grid is doubled.
    pub velocity_tolerance: f64,
    /// Largest velocity grid tried before giving up.
    pub max_velocity_nodes: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions {
            prefactors: EqPrefactors::Derived,
            velocity_tolerance: 1e-4,
            max_velocity_nodes: 3201,
        }
    }
}
