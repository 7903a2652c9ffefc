//! Grating transmission functions and their Fourier spectra.
//!
//! Positions inside the module are measured in units of the grating period,
//! `y = x/d`. Material slits are centred on integer `y`.

mod wall;

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::molecule::Molecule;
use crate::physics::constants::{HBAR, LIGHT_SPEED};
use crate::physics::special::jn_sequence;
use crate::quadrature::periodic_mean;

pub(crate) use wall::{Wall, WallPhase, WallQuadrature};

/// Fractional tail weight allowed in a truncated spectrum.
pub const TAIL_TOLERANCE: f64 = 1e-10;
/// Smallest truncation accepted for spectra dressed with the wall phase.
pub const MIN_CP_TRUNCATION: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WallModel {
    #[default]
    None,
    RetardedCp,
}

impl std::str::FromStr for WallModel {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "none" => Ok(WallModel::None),
            "retarded-cp" => Ok(WallModel::RetardedCp),
            _ => Err(format!("expected `none` or `retarded-cp`, found `{s}`")),
        }
    }
}

impl std::fmt::Display for WallModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            WallModel::None => "none",
            WallModel::RetardedCp => "retarded-cp",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MaterialGrating {
    pub period: f64,
    pub open_fraction: f64,
    pub thickness: f64,
    pub wall_model: WallModel,
}

impl MaterialGrating {
    pub fn new(period: f64, open_fraction: f64, thickness: f64, wall_model: WallModel) -> Result<Self> {
        let g = MaterialGrating {
            period,
            open_fraction,
            thickness,
            wall_model,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.period > 0.0 && self.period.is_finite()) {
            return Err(Error::domain(format!("grating period {} must be positive", self.period)));
        }
        if !(self.open_fraction > 0.0 && self.open_fraction < 1.0) {
            return Err(Error::domain(format!(
                "open fraction {} must lie in (0, 1)",
                self.open_fraction
            )));
        }
        if !(self.thickness > 0.0 && self.thickness.is_finite()) {
            return Err(Error::domain(format!("thickness {} must be positive", self.thickness)));
        }
        Ok(())
    }

    pub fn slit_width(&self) -> f64 {
        self.open_fraction * self.period
    }
}

/// Standing light wave formed by a retro-reflected Gaussian beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaserGrating {
    pub wavelength: f64,
    pub power: f64,
    pub waist_y: f64,
    pub waist_z: f64,
}

impl LaserGrating {
    pub fn new(wavelength: f64, power: f64, waist_y: f64, waist_z: f64) -> Result<Self> {
        let g = LaserGrating {
            wavelength,
            power,
            waist_y,
            waist_z,
        };
        g.validate()?;
        Ok(g)
    }

    /// Power may be zero (grating switched off); everything else must be positive.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("wavelength", self.wavelength),
            ("waist_y", self.waist_y),
            ("waist_z", self.waist_z),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::domain(format!("laser {name} {v} must be positive")));
            }
        }
        if !(self.power >= 0.0 && self.power.is_finite()) {
            return Err(Error::domain(format!("laser power {} must be non-negative", self.power)));
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        0.5 * self.wavelength
    }

    pub fn with_power(mut self, power: f64) -> Self {
        self.power = power;
        self
    }
}

/// Retarded Casimir-Polder wall interaction `V(r) = −C₄/r⁴`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpWallModel {
    pub c4: f64,
}

impl CpWallModel {
    /// Perfect-conductor coefficient `C₄ = 3ħc·α_vol/(8π)`.
    pub fn retarded(molecule: &Molecule) -> Result<Self> {
        let alpha = molecule.polarizability_volume()?;
        Ok(CpWallModel {
            c4: 3.0 * HBAR * LIGHT_SPEED * alpha / (8.0 * PI),
        })
    }

    /// Dimensionless strength `C₄·b/(ħ·v·d⁴)` of the eikonal phase when
    /// positions are measured in periods.
    pub fn normalized_strength(&self, grating: &MaterialGrating, speed: f64) -> f64 {
        self.c4 * grating.thickness / (HBAR * speed * grating.period.powi(4))
    }
}

/// Eikonal wall phase across one slit, `φ(x)` for `|x| < s/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CpPhaseProfile {
    /// `C₄·b/(ħ·v)`, J·m⁴·m/(J·s·m/s) = m⁴.
    pub prefactor: f64,
    pub slit_width: f64,
}

impl CpPhaseProfile {
    pub fn phase(&self, x: f64) -> Result<f64> {
        let half = 0.5 * self.slit_width;
        if !(x.abs() < half) {
            return Err(Error::domain(format!(
                "position {x:e} m lies outside the open slit (half width {half:e} m)"
            )));
        }
        Ok(self.prefactor * ((half - x).powi(-4) + (half + x).powi(-4)))
    }
}

pub fn cp_phase_profile(molecule: &Molecule, grating: &MaterialGrating, speed: f64) -> Result<CpPhaseProfile> {
    grating.validate()?;
    check_speed(speed)?;
    if grating.wall_model != WallModel::RetardedCp {
        return Err(Error::domain("grating has no wall interaction model"));
    }
    let cp = CpWallModel::retarded(molecule)?;
    Ok(CpPhaseProfile {
        prefactor: cp.c4 * grating.thickness / (HBAR * speed),
        slit_width: grating.slit_width(),
    })
}

fn check_speed(speed: f64) -> Result<()> {
    if speed > 0.0 && speed.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("speed {speed} must be positive")))
    }
}

/// Closed-form transmission of one grating period, kept alongside a spectrum
/// whenever the spectrum alone cannot represent it to the tail tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Transmission {
    /// Open slit of the given fraction; `wall_strength` is the normalized
    /// Casimir-Polder phase strength (zero for a bare mask).
    Slit { open_fraction: f64, wall_strength: f64 },
    /// `exp(iΦ·cos²(πy))`.
    StandingWave { phi_max: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GratingSpectrum {
    pub period: f64,
    coefficients: Vec<Complex64>,
    truncation: usize,
    transmission: Option<Transmission>,
}

impl GratingSpectrum {
    pub fn truncation(&self) -> usize {
        self.truncation
    }

    pub fn transmission(&self) -> Option<Transmission> {
        self.transmission
    }

    /// `b_k`, zero beyond the truncation.
    pub fn coefficient(&self, k: i64) -> Complex64 {
        let kk = self.truncation as i64;
        if k.abs() > kk {
            Complex64::new(0.0, 0.0)
        } else {
            self.coefficients[(k + kk) as usize]
        }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn power(&self) -> f64 {
        self.coefficients.iter().map(|b| b.norm_sqr()).sum()
    }

    /// `(|b_K|² + |b_−K|²) / Σ|b_k|²`.
    pub fn tail_fraction(&self) -> f64 {
        let k = self.truncation as i64;
        let edge = self.coefficient(k).norm_sqr() + self.coefficient(-k).norm_sqr();
        let total = self.power();
        if total == 0.0 {
            0.0
        } else {
            edge / total
        }
    }

    pub fn tail_bound_holds(&self) -> bool {
        self.tail_fraction() <= TAIL_TOLERANCE
    }
}

/// Ideal binary mask with centred slits: `b_k = f·sinc(πkf)`.
pub fn binary_mask_spectrum(open_fraction: f64, truncation: usize) -> Result<GratingSpectrum> {
    if !(open_fraction > 0.0 && open_fraction < 1.0) {
        return Err(Error::domain(format!("open fraction {open_fraction} must lie in (0, 1)")));
    }
    if truncation < 8 {
        return Err(Error::domain(format!("truncation {truncation} is below 8")));
    }
    let k = truncation as i64;
    let coefficients = (-k..=k)
        .map(|j| Complex64::new(open_fraction * sinc(PI * j as f64 * open_fraction), 0.0))
        .collect();
    Ok(GratingSpectrum {
        period: 1.0,
        coefficients,
        truncation,
        transmission: Some(Transmission::Slit {
            open_fraction,
            wall_strength: 0.0,
        }),
    })
}

/// Intensity Fourier coefficient `A_s` of a binary mask.
pub fn binary_intensity_coefficient(open_fraction: f64, s: i64) -> f64 {
    open_fraction * sinc(PI * s as f64 * open_fraction)
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// Fourier spectrum of a material grating, optionally dressed with the
/// Casimir-Polder wall phase at the given molecular speed.
pub fn material_grating_spectrum(
    molecule: &Molecule,
    grating: &MaterialGrating,
    speed: f64,
    truncation: usize,
) -> Result<GratingSpectrum> {
    grating.validate()?;
    check_speed(speed)?;
    let f = grating.open_fraction;
    if grating.wall_model == WallModel::None {
        let mut s = binary_mask_spectrum(f, truncation.max(8))?;
        s.period = grating.period;
        return Ok(s);
    }
    if truncation < MIN_CP_TRUNCATION {
        return Err(Error::domain(format!(
            "truncation {truncation} is below {MIN_CP_TRUNCATION} for a wall-dressed grating"
        )));
    }
    let strength = CpWallModel::retarded(molecule)?.normalized_strength(grating, speed);
    let coarse = slit_coefficients(f, strength, truncation, &WallQuadrature::default())?;
    let fine = slit_coefficients(f, strength, truncation, &WallQuadrature::refined())?;
    for (k, (a, b)) in coarse.iter().zip(&fine).enumerate() {
        if (a.norm() - b.norm()).abs() > 1e-8 {
            return Err(Error::Convergence(format!(
                "wall-phase Fourier coefficient b_{k} unstable under refinement ({} vs {})",
                a.norm(),
                b.norm()
            )));
        }
    }
    let kk = truncation as i64;
    let coefficients = (-kk..=kk).map(|k| fine[k.unsigned_abs() as usize]).collect();
    Ok(GratingSpectrum {
        period: grating.period,
        coefficients,
        truncation,
        transmission: Some(Transmission::Slit {
            open_fraction: f,
            wall_strength: strength,
        }),
    })
}

/// `b_0 … b_K` of a symmetric wall-dressed slit.
fn slit_coefficients(f: f64, strength: f64, truncation: usize, q: &WallQuadrature) -> Result<Vec<Complex64>> {
    let half = 0.5 * f;
    let phase = WallPhase::new(
        strength,
        &[
            Wall { position: -half, weight: 1.0 },
            Wall { position: half, weight: 1.0 },
        ],
    );
    (0..=truncation)
        .map(|k| {
            let w = -2.0 * PI * k as f64;
            q.integrate(&phase, -half, half, |y| Complex64::new(0.0, w * y).exp())
        })
        .collect()
}

/// Spectrum of the standing-wave phase grating `exp(iΦ·cos²(πy))`:
/// `b_k = e^{iΦ/2}·i^k·J_k(Φ/2)`.
pub fn laser_phase_spectrum(phi_max: f64, truncation: usize) -> Result<GratingSpectrum> {
    if !(phi_max >= 0.0 && phi_max.is_finite()) {
        return Err(Error::domain(format!("phase {phi_max} must be non-negative")));
    }
    let needed = 8.0 * (1.0 + phi_max);
    if (truncation as f64) < needed {
        return Err(Error::Truncation(format!(
            "truncation {truncation} is below 8(1 + Φ) = {needed:.1} for Φ = {phi_max}"
        )));
    }
    let bessel = jn_sequence(truncation, 0.5 * phi_max);
    let global = Complex64::from_polar(1.0, 0.5 * phi_max);
    let kk = truncation as i64;
    let coefficients = (-kk..=kk)
        .map(|k| {
            let m = k.unsigned_abs() as usize;
            // b_{−k} = b_k since i^{−k}·J_{−k} = i^{k}·J_k
            global * Complex64::i().powu(m as u32) * bessel[m]
        })
        .collect();
    let spectrum = GratingSpectrum {
        period: 1.0,
        coefficients,
        truncation,
        transmission: Some(Transmission::StandingWave { phi_max }),
    };
    if !spectrum.tail_bound_holds() {
        return Err(Error::Truncation(format!(
            "tail weight {:e} exceeds {TAIL_TOLERANCE:e} at K = {truncation}",
            spectrum.tail_fraction()
        )));
    }
    Ok(spectrum)
}

/// Generalized Talbot-Lau coefficient
/// `B_n(ζ) = Σ_k b_{k+n}·conj(b_k)·exp(−iπ(n+2k)ζ)`.
///
/// The coefficient sum is used when the spectrum passes its tail bound;
/// otherwise the equivalent autocorrelation integral of the transmission
/// profile is evaluated. A spectrum with neither raises a truncation error.
pub fn tl_coefficient(spectrum: &GratingSpectrum, n: i64, zeta: f64) -> Result<Complex64> {
    if n.unsigned_abs() as usize > 2 * spectrum.truncation {
        return Err(Error::domain(format!(
            "order {n} exceeds twice the truncation {}",
            spectrum.truncation
        )));
    }
    if spectrum.tail_bound_holds() {
        return Ok(tl_coefficient_series(spectrum, n, zeta));
    }
    match spectrum.transmission {
        Some(t) => tl_coefficient_spatial(&t, n, zeta),
        None => Err(Error::Truncation(format!(
            "tail weight {:e} exceeds {TAIL_TOLERANCE:e} at K = {}",
            spectrum.tail_fraction(),
            spectrum.truncation
        ))),
    }
}

/// The coefficient sum, taken over the stored coefficients as they are.
pub fn tl_coefficient_series(spectrum: &GratingSpectrum, n: i64, zeta: f64) -> Complex64 {
    let kk = spectrum.truncation as i64;
    let lo = (-kk).max(-kk - n);
    let hi = kk.min(kk - n);
    let mut sum = Complex64::new(0.0, 0.0);
    for k in lo..=hi {
        let phase = -PI * (n + 2 * k) as f64 * zeta;
        sum += spectrum.coefficient(k + n) * spectrum.coefficient(k).conj() * Complex64::from_polar(1.0, phase);
    }
    sum
}

/// `B_n(ζ) = ∫₀¹ t(y − ζ/2)·conj(t(y + ζ/2))·e^{−2πiny} dy`.
pub fn tl_coefficient_spatial(transmission: &Transmission, n: i64, zeta: f64) -> Result<Complex64> {
    match *transmission {
        Transmission::StandingWave { phi_max } => {
            let t = |y: f64| Complex64::from_polar(1.0, phi_max * (PI * y).cos().powi(2));
            periodic_mean(
                |theta| {
                    let y = theta / (2.0 * PI);
                    t(y - 0.5 * zeta) * t(y + 0.5 * zeta).conj()
                        * Complex64::from_polar(1.0, -(n as f64) * theta)
                },
                1e-14,
            )
        }
        Transmission::Slit {
            open_fraction,
            wall_strength,
        } => slit_autocorrelation(open_fraction, wall_strength, n, zeta, &WallQuadrature::default()),
    }
}

pub(crate) fn slit_autocorrelation(
    f: f64,
    strength: f64,
    n: i64,
    zeta: f64,
    q: &WallQuadrature,
) -> Result<Complex64> {
    let half = 0.5 * f;
    let c1 = (0.5 * zeta).rem_euclid(1.0);
    let c2 = (-0.5 * zeta).rem_euclid(1.0);
    let w = -2.0 * PI * n as f64;
    let kernel = |y: f64| Complex64::new(0.0, w * y).exp();
    let mut total = Complex64::new(0.0, 0.0);
    for m in -2..=2 {
        let centre = c2 + m as f64;
        let l = (c1 - half).max(centre - half);
        let r = (c1 + half).min(centre + half);
        if r <= l {
            continue;
        }
        if strength == 0.0 {
            total += if n == 0 {
                Complex64::new(r - l, 0.0)
            } else {
                ((Complex64::new(0.0, w * r)).exp() - (Complex64::new(0.0, w * l)).exp())
                    / Complex64::new(0.0, w)
            };
            continue;
        }
        let phase = WallPhase::new(
            strength,
            &[
                Wall { position: c1 - half, weight: 1.0 },
                Wall { position: c1 + half, weight: 1.0 },
                Wall { position: centre - half, weight: -1.0 },
                Wall { position: centre + half, weight: -1.0 },
            ],
        );
        total += q.integrate(&phase, l, r, kernel)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests;
