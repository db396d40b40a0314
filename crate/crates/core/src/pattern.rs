//! Radiation patterns over an H-plane cut and the metrics derived from them.
//!
//! A pattern stores the complex far field E(theta) sampled on a uniform plot-
//! angle grid together with the total radiated power of the underlying
//! solution, so gain in dBi is `10 log10(4 pi U(theta) / P_rad)` with
//! `U = r0^2 |E|^2 / (2 eta0)` at the reference distance r0 = 1 m.

use num_complex::Complex64;
use thiserror::Error;

use crate::units::{power_db, Frequency, ETA0};

#[derive(Debug, Error)]
pub enum PatternError {
    #[error("angle grid must be non-empty and uniform")]
    BadGrid,
    #[error("angle grids do not match: {0} vs {1} samples")]
    GridMismatch(usize, usize),
    #[error("no unique pattern peak within 0.01 dB (flat pattern)")]
    AmbiguousPeak,
    #[error("pattern contains no power")]
    NoPower,
}

/// H-plane cut of a radiation pattern, plot-angle convention.
#[derive(Debug, Clone)]
pub struct RadiationPattern {
    /// Uniform grid of plot angles in degrees (typically -180..180, 1 deg step).
    pub angles_deg: Vec<f64>,
    /// Complex E-field samples (V/m at 1 m reference distance).
    pub e_field: Vec<Complex64>,
    /// Total power radiated by the solution that produced this cut (W).
    pub total_radiated_power: f64,
    pub frequency: Frequency,
}

/// Summary metrics of one pattern cut.
#[derive(Debug, Clone, Copy)]
pub struct PatternMetrics {
    pub peak_gain_dbi: f64,
    /// Peak direction in plot angle, degrees (sub-grid refined).
    pub peak_angle_deg: f64,
    /// Half-power beamwidth of the main lobe, degrees.
    pub hpbw_deg: f64,
    /// Highest sidelobe relative to the peak, dB (negative), or -inf if none.
    pub sidelobe_level_db: f64,
}

impl RadiationPattern {
    pub fn new(
        angles_deg: Vec<f64>,
        e_field: Vec<Complex64>,
        total_radiated_power: f64,
        frequency: Frequency,
    ) -> Result<Self, PatternError> {
        if angles_deg.is_empty() || angles_deg.len() != e_field.len() {
            return Err(PatternError::BadGrid);
        }
        if angles_deg.len() > 1 {
            let step = angles_deg[1] - angles_deg[0];
            for w in angles_deg.windows(2) {
                if ((w[1] - w[0]) - step).abs() > 1e-9 {
                    return Err(PatternError::BadGrid);
                }
            }
        }
        if !(total_radiated_power > 0.0) {
            return Err(PatternError::NoPower);
        }
        Ok(Self {
            angles_deg,
            e_field,
            total_radiated_power,
            frequency,
        })
    }

    /// Uniform grid step in degrees.
    pub fn step_deg(&self) -> f64 {
        if self.angles_deg.len() > 1 {
            self.angles_deg[1] - self.angles_deg[0]
        } else {
            0.0
        }
    }

    /// Radiation intensity U(theta) in W/sr at sample `i`.
    pub fn intensity(&self, i: usize) -> f64 {
        self.e_field[i].norm_sqr() / (2.0 * ETA0)
    }

    /// Gain (dBi) at sample `i`: 4 pi U / P_rad in dB.
    pub fn gain_dbi(&self, i: usize) -> f64 {
        power_db(4.0 * std::f64::consts::PI * self.intensity(i) / self.total_radiated_power)
    }

    /// Gain samples over the whole grid.
    pub fn gains_dbi(&self) -> Vec<f64> {
        (0..self.angles_deg.len()).map(|i| self.gain_dbi(i)).collect()
    }

    /// Field phase in degrees at sample `i`.
    pub fn phase_deg(&self, i: usize) -> f64 {
        self.e_field[i].arg().to_degrees()
    }

    /// Gain at the grid sample closest to `angle_deg`.
    pub fn gain_at(&self, angle_deg: f64) -> f64 {
        let i = self
            .angles_deg
            .iter()
            .enumerate()
            .min_by(|a, b| {
                let da = (a.1 - angle_deg).abs();
                let db = (b.1 - angle_deg).abs();
                da.partial_cmp(&db).unwrap()
            })
            .map(|(i, _)| i)
            .unwrap();
        self.gain_dbi(i)
    }

    /// Write the cut as CSV: `angle_deg,gain_dbi,phase_deg` with a header row.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("angle_deg,gain_dbi,phase_deg\n");
        for i in 0..self.angles_deg.len() {
            out.push_str(&format!(
                "{:.4},{:.6},{:.6}\n",
                self.angles_deg[i],
                self.gain_dbi(i),
                self.phase_deg(i)
            ));
        }
        out
    }
}

/// Compute peak gain/direction, HPBW and sidelobe level of a pattern cut.
///
/// The peak direction is refined below the grid step by a parabolic fit of
/// gain (dB) through the peak sample and its neighbours, which recovers the
/// sub-degree beam position the acceptance tolerances need. Errors with
/// [`PatternError::AmbiguousPeak`] when no sample stands 0.01 dB above the
/// rest of the grid.
pub fn pattern_metrics(pattern: &RadiationPattern) -> Result<PatternMetrics, PatternError> {
    let gains = pattern.gains_dbi();
    let n = gains.len();
    if n < 3 {
        return Err(PatternError::BadGrid);
    }
    let (ipk, &gpk) = gains
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
        .unwrap();

    // a flat pattern has no peak standing 0.01 dB above the rest
    let g_min = gains.iter().cloned().fold(f64::INFINITY, f64::min);
    if gpk - g_min < 0.01 {
        return Err(PatternError::AmbiguousPeak);
    }

    let step = pattern.step_deg();
    // parabolic refinement on the dB values (cyclic neighbours)
    let gl = gains[(ipk + n - 1) % n];
    let gr = gains[(ipk + 1) % n];
    let denom = gl - 2.0 * gpk + gr;
    let offset = if denom.abs() > 1e-12 {
        0.5 * (gl - gr) / denom
    } else {
        0.0
    };
    let offset = offset.clamp(-0.5, 0.5);
    let peak_angle = pattern.angles_deg[ipk] + offset * step;
    let peak_gain = gpk - 0.25 * (gl - gr) * offset;

    // half-power beamwidth: walk out from the peak to the -3 dB crossings
    let target = peak_gain - 3.010_299_956_639_812;
    let cross = |dir: isize| -> f64 {
        let mut prev = gpk;
        for s in 1..n {
            let idx = ((ipk as isize + dir * s as isize).rem_euclid(n as isize)) as usize;
            let g = gains[idx];
            if g <= target {
                // linear interpolation between prev and g
                let frac = (prev - target) / (prev - g);
                return (s as f64 - 1.0 + frac) * step;
            }
            prev = g;
        }
        f64::NAN // no crossing: lobe wider than the grid
    };
    let left = cross(-1);
    let right = cross(1);
    let hpbw = left + right;

    // sidelobe level: highest local maximum outside the main lobe
    let main_l = (left / step).ceil() as usize;
    let main_r = (right / step).ceil() as usize;
    let mut sll = f64::NEG_INFINITY;
    for i in 0..n {
        let d_fwd = (i + n - ipk) % n;
        let d_bwd = (ipk + n - i) % n;
        let inside_main = d_fwd <= main_r || d_bwd <= main_l;
        if inside_main {
            continue;
        }
        let prev = gains[(i + n - 1) % n];
        let next = gains[(i + 1) % n];
        if gains[i] >= prev && gains[i] >= next {
            sll = sll.max(gains[i] - peak_gain);
        }
    }

    Ok(PatternMetrics {
        peak_gain_dbi: peak_gain,
        peak_angle_deg: peak_angle,
        hpbw_deg: hpbw,
        sidelobe_level_db: sll,
    })
}

/// Standard plot-angle grid: -180..180 (exclusive) in `step_deg` increments.
pub fn full_circle_grid(step_deg: f64) -> Vec<f64> {
    let n = (360.0 / step_deg).round() as usize;
    (0..n).map(|i| -180.0 + i as f64 * step_deg).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn freq() -> Frequency {
        Frequency::from_megahertz(300.0).unwrap()
    }

    /// Analytic half-wave dipole E-plane cut (sinusoidal current model):
    /// F(theta) = cos(pi/2 cos(theta)) / sin(theta) with theta from the dipole
    /// axis. Sampled here against plot angle where 0 deg is the equator.
    fn analytic_dipole_pattern() -> RadiationPattern {
        let angles = full_circle_grid(1.0);
        let e: Vec<Complex64> = angles
            .iter()
            .map(|&a| {
                let th = (90.0 - a).to_radians();
                let s = th.sin();
                let f = if s.abs() < 1e-9 {
                    0.0
                } else {
                    ((std::f64::consts::FRAC_PI_2) * th.cos()).cos() / s
                };
                Complex64::new(f, 0.0)
            })
            .collect();
        // normalize P_rad so that the peak gain equals the classical 2.151 dBi
        // directivity: choose P = 4 pi U_peak / D with D = 1.640922.
        let u_peak = e
            .iter()
            .map(|x| x.norm_sqr() / (2.0 * ETA0))
            .fold(0.0, f64::max);
        let p = 4.0 * std::f64::consts::PI * u_peak / 1.640_922;
        RadiationPattern::new(angles, e, p, freq()).unwrap()
    }

    #[test]
    fn dipole_hpbw_is_78_degrees() {
        let m = pattern_metrics(&analytic_dipole_pattern()).unwrap();
        assert_abs_diff_eq!(m.hpbw_deg, 78.0, epsilon = 3.0);
        assert_abs_diff_eq!(m.peak_gain_dbi, 2.151, epsilon = 0.01);
        assert_abs_diff_eq!(m.peak_angle_deg, 0.0, epsilon = 0.5);
    }

    #[test]
    fn flat_pattern_is_ambiguous() {
        let angles = full_circle_grid(1.0);
        let e = vec![Complex64::new(1.0, 0.0); angles.len()];
        let p = RadiationPattern::new(angles, e, 1.0, freq()).unwrap();
        assert!(matches!(pattern_metrics(&p), Err(PatternError::AmbiguousPeak)));
    }

    #[test]
    fn gain_lookup_is_idempotent() {
        let p = analytic_dipole_pattern();
        let g1 = p.gain_at(0.0);
        let g2 = p.gain_at(0.0);
        assert_relative_eq!(g1, g2);
    }

    #[test]
    fn csv_has_header_and_rows() {
        let p = analytic_dipole_pattern();
        let csv = p.to_csv();
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), "angle_deg,gain_dbi,phase_deg");
        assert_eq!(csv.lines().count(), 361);
    }

    #[test]
    fn nonuniform_grid_rejected() {
        let angles = vec![0.0, 1.0, 3.0];
        let e = vec![Complex64::new(1.0, 0.0); 3];
        assert!(matches!(
            RadiationPattern::new(angles, e, 1.0, freq()),
            Err(PatternError::BadGrid)
        ));
    }
}
