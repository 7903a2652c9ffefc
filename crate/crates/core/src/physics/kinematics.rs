use crate::error::{Error, Result};

use super::constants::{AMU, PLANCK_H};

/// A strictly positive wavelength in meters (de Broglie or optical).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Wavelength(f64);

impl Wavelength {
    pub fn new(meters: f64) -> Result<Self> {
        if meters.is_finite() && meters > 0.0 {
            Ok(Wavelength(meters))
        } else {
            Err(Error::domain(format!("wavelength must be positive, got {meters}")))
        }
    }

    pub fn meters(self) -> f64 {
        self.0
    }
}

/// λ = h / (m v) for a mass in amu and a speed in m/s.
pub fn de_broglie_wavelength(mass_amu: f64, speed: f64) -> Result<Wavelength> {
    if !(mass_amu > 0.0 && mass_amu.is_finite()) {
        return Err(Error::domain(format!("mass must be positive, got {mass_amu} amu")));
    }
    if !(speed > 0.0 && speed.is_finite()) {
        return Err(Error::domain(format!("speed must be positive, got {speed} m/s")));
    }
    Wavelength::new(PLANCK_H / (mass_amu * AMU * speed))
}

/// Inverse of [`de_broglie_wavelength`]: the speed giving wavelength λ.
pub fn speed_for_wavelength(mass_amu: f64, wavelength: Wavelength) -> Result<f64> {
    if !(mass_amu > 0.0 && mass_amu.is_finite()) {
        return Err(Error::domain(format!("mass must be positive, got {mass_amu} amu")));
    }
    Ok(PLANCK_H / (mass_amu * AMU * wavelength.meters()))
}

/// Talbot length L_T = d² / λ.
pub fn talbot_length(period: f64, wavelength: Wavelength) -> Result<f64> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::domain(format!("period must be positive, got {period} m")));
    }
    Ok(period * period / wavelength.meters())
}

#[cfg(test)]
mod tests {
    use super::*;

    const D: f64 = 266.38e-9;
    const L: f64 = 0.105;

    #[test]
    fn heavy_cluster_wavelength() {
        let lam = de_broglie_wavelength(11_000.0, 50.0).unwrap().meters();
        assert!((lam - 7.255e-13).abs() < 1e-16);
        // quoted as 700 fm
        assert!((lam / 700e-15 - 1.0).abs() < 0.04);
    }

    #[test]
    fn c70_fourth_talbot_order() {
        let lam = de_broglie_wavelength(840.0, 175.0).unwrap();
        assert!((lam.meters() - 2.715e-12).abs() < 1e-15);
        let four_orders = 4.0 * D * D / L;
        assert!((four_orders - 2.703e-12).abs() < 1e-15);
        assert!((lam.meters() / four_orders - 1.0).abs() < 0.005);

        let lt = talbot_length(D, Wavelength::new(2.715e-12).unwrap()).unwrap();
        assert!((lt - 26.14e-3).abs() < 0.01e-3);
        assert!((L / lt - 4.02).abs() < 0.01);
    }

    #[test]
    fn talbot_length_definition() {
        let d = 3.0e-7;
        let lt = talbot_length(d, Wavelength::new(d * d).unwrap()).unwrap();
        assert!((lt - 1.0).abs() < 1e-15);
    }

    #[test]
    fn doubling_speed_halves_wavelength() {
        let a = de_broglie_wavelength(840.0, 100.0).unwrap().meters();
        let b = de_broglie_wavelength(840.0, 200.0).unwrap().meters();
        assert_eq!(a, 2.0 * b);
    }

    #[test]
    fn c70_talbot_orders_over_beam_range() {
        let order = |v: f64| L / talbot_length(D, de_broglie_wavelength(840.0, v).unwrap()).unwrap();
        assert!((order(200.0) - 3.52).abs() < 0.05);
        assert!((order(80.0) - 8.8).abs() < 0.05);
    }

    #[test]
    fn rejects_non_positive_inputs() {
        assert!(de_broglie_wavelength(0.0, 10.0).is_err());
        assert!(de_broglie_wavelength(10.0, -1.0).is_err());
        assert!(talbot_length(0.0, Wavelength::new(1e-12).unwrap()).is_err());
        assert!(Wavelength::new(0.0).is_err());
        assert!(Wavelength::new(f64::NAN).is_err());
    }

    #[test]
    fn talbot_length_linear_in_speed() {
        let lt = |v: f64| talbot_length(D, de_broglie_wavelength(840.0, v).unwrap()).unwrap();
        let base = lt(100.0);
        for k in [0.5, 1.7, 3.0] {
            let rel = (lt(100.0 * k) / (k * base) - 1.0).abs();
            assert!(rel <= 1e-12, "k = {k}: {rel}");
        }
    }
}
