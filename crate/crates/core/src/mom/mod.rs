//! Thin-wire method-of-moments solver.
//!
//! Wires are straight z-directed rods at lateral positions (x, y); the
//! current on each wire is expanded in piecewise-triangular basis functions
//! (one per segment, peaked at the segment centre, falling to zero at the
//! wire ends) and tested with the same functions (Galerkin), which makes the
//! impedance matrix symmetric. The electric-field integral equation uses the
//! reduced thin-wire kernel R = sqrt((z - z')^2 + rho^2) with rho equal to
//! the wire radius for self-wire interactions and to the axis separation
//! otherwise.
//!
//! Matrix entries are
//!
//! ```text
//! Z[m][n] = (j eta / 4 pi k) * Int Int (k^2 f_m f_n - f_m' f_n') e^(-jkR)/R
//! ```
//!
//! with the 1/R near-singularity of self and adjacent pieces handled by
//! analytic extraction of the static part.

mod farfield;
mod fill;
mod mesh;
mod solve;

pub use farfield::{far_field, solve_element, solve_full_array, solve_full_array_with_solution};
pub use fill::fill_impedance_matrix;
pub use mesh::{
    mesh_antenna, mesh_dipole, mesh_element_array, mesh_placed, PlacedElement, Wire, WireMesh,
};
pub use solve::{input_impedance, s11_db, solve_currents, unit_feed_excitation, CurrentSolution};

use thiserror::Error;

use crate::units::Frequency;

#[derive(Debug, Error)]
pub enum MomError {
    #[error("invalid antenna geometry: {0}")]
    BadGeometry(String),
    #[error("segments per wire must be odd and >= 11, got {0}")]
    BadSegmentCount(usize),
    #[error("mesh too fine on wire '{wire}': segment length {segment_length:.3e} m <= 4 x radius {radius:.3e} m")]
    MeshTooFine {
        wire: String,
        segment_length: f64,
        radius: f64,
    },
    #[error("mesh too coarse at {freq_hz:.3e} Hz: segment length {segment_length:.3e} m >= lambda/10; refine the mesh")]
    RefineMesh { segment_length: f64, freq_hz: f64 },
    #[error("overlapping wires in array geometry (wires {0} and {1})")]
    OverlappingWires(usize, usize),
    #[error("excitation length {0} does not match matrix order {1}")]
    ExcitationMismatch(usize, usize),
    #[error("impedance matrix is numerically singular (estimated condition number {cond:.3e})")]
    SingularMatrix { cond: f64 },
    #[error("feed current below 1e-12 A; no excitation")]
    NoExcitation,
    #[error("empty angle grid")]
    EmptyGrid,
    #[error("linear solve residual {0:.3e} exceeds 1e-8")]
    ResidualTooLarge(f64),
}

/// Geometry of one array element: a driven rod with a parasitic reflector,
/// both vertical, the reflector behind the driven rod along the boresight.
#[derive(Debug, Clone, Copy)]
pub struct WireAntenna {
    /// Driven rod length (m); defaults to 0.51 lambda.
    pub driven_length: f64,
    /// Reflector rod length (m); defaults to 0.53 lambda, ~5% longer.
    pub reflector_length: f64,
    /// Boresight distance between reflector and driven rod (m); 0.29 lambda.
    pub separation: f64,
    /// Rod radius (m); 1 mm for the 2 mm diameter copper rods.
    pub wire_radius: f64,
}

impl WireAntenna {
    /// Element with the canonical fractions of the wavelength at `f`.
    pub fn for_frequency(f: Frequency) -> Self {
        let lambda = f.wavelength();
        Self {
            driven_length: 0.51 * lambda,
            reflector_length: 0.53 * lambda,
            separation: 0.29 * lambda,
            wire_radius: 1e-3,
        }
    }

    /// The fabricated chamber element: 510 mm driven, 530 mm reflector,
    /// 2 mm diameter copper wire.
    pub fn chamber_element() -> Self {
        let f = Frequency::from_megahertz(300.0).expect("300 MHz is valid");
        Self {
            driven_length: 0.510,
            reflector_length: 0.530,
            separation: 0.29 * f.wavelength(),
            wire_radius: 1e-3,
        }
    }

    pub fn validate(&self) -> Result<(), MomError> {
        if self.reflector_length <= self.driven_length {
            return Err(MomError::BadGeometry(format!(
                "reflector ({} m) must be longer than the driven rod ({} m)",
                self.reflector_length, self.driven_length
            )));
        }
        if !(self.separation > 0.0) {
            return Err(MomError::BadGeometry("separation must be positive".into()));
        }
        if self.wire_radius >= self.driven_length / 100.0 {
            return Err(MomError::BadGeometry(format!(
                "wire radius {} m violates thin-wire validity (must be << driven length / 100)",
                self.wire_radius
            )));
        }
        Ok(())
    }
}
