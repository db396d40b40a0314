//! Frequencies, wavelengths, angle conventions and decibel policy.
//!
//! Two angle conventions coexist in phased-array work: the *plot angle*
//! `theta` measured from broadside (array normal), used in every pattern
//! figure and all user-facing I/O, and the *axis angle* `psi` measured from
//! the array axis, which is what the steering-phase formula
//! `phi_n = (n-1) k d cos(psi)` consumes. This module is the single
//! authority for converting between them.
//!
//! Decibel policy: `10 log10` for power quantities, `20 log10` for field and
//! S-parameter magnitudes. Helpers here make that choice explicit at call
//! sites so factor-of-2 mistakes cannot hide.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Speed of light in vacuum (m/s).
pub const C0: f64 = 299_792_458.0;

/// Free-space wave impedance (ohms).
pub const ETA0: f64 = 376.730_313_668;

#[derive(Debug, Error, PartialEq)]
pub enum UnitsError {
    #[error("frequency must be positive, got {0} Hz")]
    NonPositiveFrequency(f64),
}

/// An operating frequency. Always strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Frequency {
    hertz: f64,
}

impl Frequency {
    pub fn from_hertz(hertz: f64) -> Result<Self, UnitsError> {
        if !(hertz > 0.0) || !hertz.is_finite() {
            return Err(UnitsError::NonPositiveFrequency(hertz));
        }
        Ok(Self { hertz })
    }

    pub fn from_megahertz(mhz: f64) -> Result<Self, UnitsError> {
        Self::from_hertz(mhz * 1e6)
    }

    pub fn hertz(&self) -> f64 {
        self.hertz
    }

    /// Free-space wavelength lambda = c / f (meters).
    pub fn wavelength(&self) -> f64 {
        C0 / self.hertz
    }

    /// Wavenumber k = 2 pi / lambda (rad/m).
    pub fn wavenumber(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.wavelength()
    }
}

/// Convert a plot angle (degrees from broadside, in [-180, 180]) to the axis
/// angle (degrees from the array axis, in [0, 180]).
///
/// The map is `psi = |wrap(90 - theta)|`, i.e. 90 - theta folded into
/// [0, 180] so that both half-spaces of the linear array project onto the
/// same axis angle. Restricted to plot angles in [0, 90] this is its own
/// inverse.
pub fn plot_to_axis(theta_plot_deg: f64) -> f64 {
    let wrapped = wrap_degrees(90.0 - theta_plot_deg);
    wrapped.abs()
}

/// Convert an axis angle (degrees from the array axis) back to a plot angle
/// (degrees from broadside).
pub fn axis_to_plot(psi_deg: f64) -> f64 {
    90.0 - psi_deg
}

/// Wrap an angle in degrees to (-180, 180].
pub fn wrap_degrees(deg: f64) -> f64 {
    let mut d = deg % 360.0;
    if d <= -180.0 {
        d += 360.0;
    } else if d > 180.0 {
        d -= 360.0;
    }
    d
}

/// Power ratio to decibels: 10 log10(x).
pub fn power_db(ratio: f64) -> f64 {
    10.0 * ratio.log10()
}

/// Field or S-parameter magnitude to decibels: 20 log10(x).
pub fn field_db(magnitude: f64) -> f64 {
    20.0 * magnitude.log10()
}

/// Inverse of [`power_db`].
pub fn from_power_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn frequency_rejects_nonpositive() {
        assert!(Frequency::from_hertz(0.0).is_err());
        assert!(Frequency::from_hertz(-1.0).is_err());
        assert!(Frequency::from_hertz(f64::NAN).is_err());
    }

    #[test]
    fn wavelength_at_300_mhz() {
        let f = Frequency::from_megahertz(300.0).unwrap();
        assert_relative_eq!(f.wavelength(), 0.999_308_193, epsilon = 1e-9);
        assert_relative_eq!(
            f.wavenumber(),
            2.0 * std::f64::consts::PI / f.wavelength(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn plot_axis_anchor_points() {
        // broadside maps to the array normal
        assert_relative_eq!(plot_to_axis(0.0), 90.0);
        // endfire maps to the array axis
        assert_relative_eq!(plot_to_axis(90.0), 0.0);
        // fixed point of the involution
        assert_relative_eq!(plot_to_axis(45.0), 45.0);
        // rear-hemisphere angles fold into [0, 180]
        assert_relative_eq!(plot_to_axis(-90.0), 180.0);
        assert_relative_eq!(plot_to_axis(180.0), 90.0);
        assert_relative_eq!(plot_to_axis(-135.0), 135.0);
    }

    #[test]
    fn involution_on_forward_quadrant() {
        for i in 0..=90 {
            let theta = i as f64;
            assert_relative_eq!(plot_to_axis(plot_to_axis(theta)), theta, epsilon = 1e-12);
        }
    }

    #[test]
    fn db_policy() {
        assert_relative_eq!(power_db(100.0), 20.0);
        assert_relative_eq!(field_db(100.0), 40.0);
        assert_relative_eq!(from_power_db(3.010_299_956_639_812), 2.0, epsilon = 1e-12);
    }
}
