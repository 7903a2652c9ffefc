//! Constants, matter-wave kinematics and the special functions used by the
//! interferometer models.

pub mod constants;
pub mod kinematics;
pub mod special;

pub use constants::{PhysicalConstants, CODATA};
pub use kinematics::{de_broglie_wavelength, talbot_length, Wavelength};
pub use special::{bessel_j, modified_bessel_i};
