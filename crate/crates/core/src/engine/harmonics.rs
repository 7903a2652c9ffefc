//! Fringe harmonics of the three-grating signal as a function of the lateral
//! position of the third grating.

use num_complex::Complex64;
use rayon::prelude::*;
use std::collections::HashMap;
use std::f64::consts::PI;

use super::kdtli::{mean_absorbed_photons_with, phi_max_with, tl_coefficient_with_absorption};
use super::velocity::{VelocityGrid, VelocityNode, TRUNCATION_SIGMAS};
use super::{CentralGrating, EngineOptions, InterferometerGeometry, VelocityDistribution};
use crate::error::{Error, Result};
use crate::grating::{binary_intensity_coefficient, tl_coefficient_spatial, CpWallModel, Transmission, WallModel};
use crate::molecule::Molecule;
use crate::physics::constants::{AMU, PLANCK_H};
use crate::physics::kinematics::{de_broglie_wavelength, talbot_length};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VisibilityMode {
    #[default]
    Sinusoidal,
    MinMax,
}

impl std::str::FromStr for VisibilityMode {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "sinusoidal" => Ok(VisibilityMode::Sinusoidal),
            "minmax" => Ok(VisibilityMode::MinMax),
            _ => Err(format!("expected `sinusoidal` or `minmax`, found `{s}`")),
        }
    }
}

impl std::fmt::Display for VisibilityMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            VisibilityMode::Sinusoidal => "sinusoidal",
            VisibilityMode::MinMax => "minmax",
        })
    }
}

/// Fourier components `S_0 … S_smax` of the detected signal
/// `S(x) = S_0 + 2 Σ Re[S_s e^{2πisx/d}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FringeHarmonics {
    pub period: f64,
    components: Vec<Complex64>,
}

/// Samples per period used to bracket the extrema of the signal.
const EXTREMUM_SAMPLES: usize = 1024;

impl FringeHarmonics {
    pub fn new(period: f64, components: Vec<Complex64>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::domain("harmonics need at least S_0"));
        }
        if !(period > 0.0) {
            return Err(Error::domain(format!("period {period} must be positive")));
        }
        Ok(FringeHarmonics { period, components })
    }

    pub fn s0(&self) -> f64 {
        self.components[0].re
    }

    pub fn s_max(&self) -> usize {
        self.components.len() - 1
    }

    pub fn component(&self, s: usize) -> Complex64 {
        self.components.get(s).copied().unwrap_or_default()
    }

    pub fn components(&self) -> &[Complex64] {
        &self.components
    }

    pub fn scaled(&self, k: f64) -> Self {
        FringeHarmonics {
            period: self.period,
            components: self.components.iter().map(|c| c * k).collect(),
        }
    }

    /// Reconstructed signal at lateral shift `x` (metres).
    pub fn signal(&self, x: f64) -> f64 {
        let phase = 2.0 * PI * x / self.period;
        let mut total = self.s0();
        for (s, c) in self.components.iter().enumerate().skip(1) {
            total += 2.0 * (c * Complex64::from_polar(1.0, phase * s as f64)).re;
        }
        total
    }

    /// Smallest and largest value of the signal over one period.
    pub fn extrema(&self) -> (f64, f64) {
        let d = self.period;
        let h = d / EXTREMUM_SAMPLES as f64;
        let samples: Vec<f64> = (0..EXTREMUM_SAMPLES).map(|i| self.signal(i as f64 * h)).collect();
        let (imin, _) = samples
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("samples");
        let (imax, _) = samples
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("samples");
        let refine = |i: usize, sign: f64| {
            let centre = i as f64 * h;
            let x = golden_section(|x| sign * self.signal(x), centre - h, centre + h);
            self.signal(x)
        };
        (
            refine(imin, 1.0).min(samples[imin]),
            refine(imax, -1.0).max(samples[imax]),
        )
    }

    pub fn visibility(&self, mode: VisibilityMode) -> Result<f64> {
        visibility_from_harmonics(self, mode)
    }
}

/// Minimizes a unimodal `f` on `[a, b]`.
fn golden_section<F: Fn(f64) -> f64>(f: F, mut a: f64, mut b: f64) -> f64 {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    for _ in 0..80 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    0.5 * (a + b)
}

pub fn visibility_from_harmonics(h: &FringeHarmonics, mode: VisibilityMode) -> Result<f64> {
    let s0 = h.s0();
    if !(s0 > 0.0) {
        return Err(Error::domain(format!("total flux S_0 = {s0} must be positive")));
    }
    match mode {
        VisibilityMode::Sinusoidal => Ok(2.0 * h.component(1).norm() / s0),
        VisibilityMode::MinMax => {
            if h.components.iter().skip(2).all(|c| *c == Complex64::new(0.0, 0.0)) {
                return Ok(2.0 * h.component(1).norm() / s0);
            }
            let (lo, hi) = h.extrema();
            Ok((hi - lo) / (hi + lo))
        }
    }
}

/// Harmonics at a single molecular speed with default options.
pub fn fringe_harmonics(
    geometry: &InterferometerGeometry,
    molecule: &Molecule,
    speed: f64,
    s_max: usize,
) -> Result<FringeHarmonics> {
    fringe_harmonics_with(geometry, molecule, speed, s_max, &EngineOptions::default())
}

/// `S_s = A_s^{(1)}·B_{2s}(s·L/L_T)·A_s^{(3)}` with binary intensity
/// coefficients for the outer gratings.
pub fn fringe_harmonics_with(
    geometry: &InterferometerGeometry,
    molecule: &Molecule,
    speed: f64,
    s_max: usize,
    options: &EngineOptions,
) -> Result<FringeHarmonics> {
    if s_max < 1 {
        return Err(Error::domain("s_max must be at least 1"));
    }
    geometry.validate()?;
    let d = geometry.period();
    let lambda = de_broglie_wavelength(molecule.mass_amu, speed)?;
    let zeta = geometry.separation / talbot_length(d, lambda)?;
    let f1 = geometry.grating1.open_fraction;
    let f3 = geometry.grating3.open_fraction;

    let coefficient: Box<dyn Fn(i64, f64) -> Result<Complex64>> = match &geometry.grating2 {
        CentralGrating::Laser(laser) => {
            let phi = phi_max_with(molecule, laser, speed, options.prefactors)?;
            let n0 = mean_absorbed_photons_with(molecule, laser, speed, options.prefactors)?;
            Box::new(move |n, z| tl_coefficient_with_absorption(phi, n0, n, z))
        }
        CentralGrating::Material(g) => {
            let strength = match g.wall_model {
                WallModel::None => 0.0,
                WallModel::RetardedCp => CpWallModel::retarded(molecule)?.normalized_strength(g, speed),
            };
            let t = Transmission::Slit {
                open_fraction: g.open_fraction,
                wall_strength: strength,
            };
            Box::new(move |n, z| tl_coefficient_spatial(&t, n, z))
        }
    };

    let mut components = Vec::with_capacity(s_max + 1);
    for s in 0..=s_max as i64 {
        let a1 = binary_intensity_coefficient(f1, s);
        let a3 = binary_intensity_coefficient(f3, s);
        let b = coefficient(2 * s, s as f64 * zeta)?;
        components.push(b * (a1 * a3));
    }
    // S_0 is a total flux; any imaginary part is quadrature noise
    components[0].im = 0.0;
    FringeHarmonics::new(d, components)
}

pub fn velocity_averaged_harmonics(
    geometry: &InterferometerGeometry,
    molecule: &Molecule,
    dist: &VelocityDistribution,
    s_max: usize,
) -> Result<FringeHarmonics> {
    velocity_averaged_harmonics_with(geometry, molecule, dist, s_max, &EngineOptions::default())
}

/// Speeds at which `L/L_T` is an integer. With a material central grating
/// the two slit images coincide there and the harmonics have a cusp.
fn coincidence_speeds(geometry: &InterferometerGeometry, molecule: &Molecule, dist: &VelocityDistribution) -> Vec<f64> {
    let CentralGrating::Material(_) = geometry.grating2 else {
        return Vec::new();
    };
    let d = geometry.period();
    // ζ = L·h/(m·v·d²) = k at v_k = v_1/k
    let v1 = geometry.separation * PLANCK_H / (molecule.mass_amu * AMU * d * d);
    let slowest = dist.mean * (1.0 - TRUNCATION_SIGMAS * dist.relative_sigma);
    let fastest = dist.mean * (1.0 + TRUNCATION_SIGMAS * dist.relative_sigma);
    let k_lo = (v1 / fastest).ceil().max(1.0) as u64;
    let k_hi = if slowest > 0.0 { (v1 / slowest).floor() as u64 } else { u64::MAX };
    (k_lo..=k_hi.min(k_lo + 4096)).map(|k| v1 / k as f64).collect()
}

/// Signal-level average over the velocity distribution. The grid is split
/// at the coincidence speeds and refined by doubling (reusing every
/// previous node) until the sinusoidal visibility moves by no more than
/// `options.velocity_tolerance`.
pub fn velocity_averaged_harmonics_with(
    geometry: &InterferometerGeometry,
    molecule: &Molecule,
    dist: &VelocityDistribution,
    s_max: usize,
    options: &EngineOptions,
) -> Result<FringeHarmonics> {
    dist.validate()?;
    if dist.is_sharp() {
        return fringe_harmonics_with(geometry, molecule, dist.mean, s_max, options);
    }
    let grid = VelocityGrid::new(dist, &coincidence_speeds(geometry, molecule, dist));
    let mut cache: HashMap<(usize, u64), Vec<Complex64>> = HashMap::new();
    let mut average = |level: u32| -> Result<(FringeHarmonics, usize)> {
        let nodes = grid.level(level);
        let fresh: Vec<&VelocityNode> = nodes.iter().filter(|n| !cache.contains_key(&n.key)).collect();
        let values: Vec<Vec<Complex64>> = fresh
            .par_iter()
            .map(|n| fringe_harmonics_with(geometry, molecule, n.speed, s_max, options).map(|h| h.components))
            .collect::<Result<_>>()?;
        for (n, v) in fresh.iter().zip(values) {
            cache.insert(n.key, v);
        }
        // weighted sum in grid order
        let mut total_weight = 0.0;
        let mut acc = vec![Complex64::new(0.0, 0.0); s_max + 1];
        for n in &nodes {
            total_weight += n.weight;
            for (a, c) in acc.iter_mut().zip(&cache[&n.key]) {
                *a += c * n.weight;
            }
        }
        if !(total_weight > 0.0) {
            return Err(Error::domain("velocity distribution has no positive-speed nodes"));
        }
        for a in acc.iter_mut() {
            *a /= total_weight;
        }
        Ok((FringeHarmonics::new(geometry.period(), acc)?, nodes.len()))
    };

    let (mut current, _) = average(0)?;
    for level in 1.. {
        let (refined, count) = average(level)?;
        let change = (refined.visibility(VisibilityMode::Sinusoidal)? - current.visibility(VisibilityMode::Sinusoidal)?).abs();
        if change <= options.velocity_tolerance {
            return Ok(refined);
        }
        if 2 * count > options.max_velocity_nodes.max(dist.node_count) {
            return Err(Error::Convergence(format!(
                "velocity average not converged to {:e} with {count} nodes",
                options.velocity_tolerance
            )));
        }
        current = refined;
    }
    unreachable!("the refinement loop only exits by returning")
}
