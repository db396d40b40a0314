//! Linear-array steering: Eq.-1 phases, array factors, pattern
//! multiplication and the gain-versus-UAV-count study.
//!
//! Steering phases follow `phi_n = (n-1) k d_ele cos(psi_steer)` with
//! `psi_steer` the axis angle of the commanded plot direction and element 1
//! the phase reference. Phases are applied in the phase-delay sense, so a
//! positive `phi_2` steers the beam toward positive plot angles.

use num_complex::Complex64;
use thiserror::Error;

use crate::mom::{solve_full_array, PlacedElement, WireAntenna};
use crate::pattern::{full_circle_grid, pattern_metrics, PatternError, RadiationPattern};
use crate::planner::{validate_formation, SwarmConfig};
use crate::units::{plot_to_axis, Frequency};

#[derive(Debug, Error)]
pub enum ArrayError {
    #[error("steering angle {0} deg outside |theta| <= 90")]
    SteeringOutOfRange(f64),
    #[error("element count must be >= 1")]
    EmptyArray,
    #[error("angle grids do not match")]
    GridMismatch,
    #[error("UAV count {0} outside the supported 2..=16 study range")]
    CountOutOfRange(usize),
    #[error("infeasible configuration: {0}")]
    Infeasible(String),
    #[error(transparent)]
    Mom(#[from] crate::mom::MomError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

/// Uniform linear array along the y axis.
#[derive(Debug, Clone)]
pub struct LinearArrayLayout {
    pub element_count: usize,
    pub spacing: f64,
}

impl LinearArrayLayout {
    pub fn new(element_count: usize, spacing: f64) -> Result<Self, ArrayError> {
        if element_count == 0 {
            return Err(ArrayError::EmptyArray);
        }
        Ok(Self { element_count, spacing })
    }

    /// Element positions along the array axis, uniform from zero.
    pub fn positions(&self) -> Vec<f64> {
        (0..self.element_count)
            .map(|n| n as f64 * self.spacing)
            .collect()
    }
}

/// A steering command: plot-angle target and the per-element phases.
#[derive(Debug, Clone)]
pub struct SteeringCommand {
    pub theta_steer_plot_deg: f64,
    /// Phases in degrees, `phases_deg[0] == 0` (reference element).
    pub phases_deg: Vec<f64>,
}

/// Compute Eq.-1 steering phases for a plot-angle target.
pub fn steering_phases(
    layout: &LinearArrayLayout,
    f: Frequency,
    theta_steer_plot_deg: f64,
) -> Result<SteeringCommand, ArrayError> {
    if theta_steer_plot_deg.abs() > 90.0 {
        return Err(ArrayError::SteeringOutOfRange(theta_steer_plot_deg));
    }
    let psi = plot_to_axis(theta_steer_plot_deg).to_radians();
    let k = f.wavenumber();
    let phases_deg = (0..layout.element_count)
        .map(|n| (n as f64 * k * layout.spacing * psi.cos()).to_degrees())
        .collect();
    Ok(SteeringCommand {
        theta_steer_plot_deg,
        phases_deg,
    })
}

/// Array factor samples over a plot-angle grid:
/// `AF(theta) = sum_n exp(j[(n-1) k d sin(theta) - phi_n])`.
///
/// The propagation term `sin(theta)` is `cos(psi)` of the axis angle; the
/// commanded phases enter with a minus sign (phase delay), which places the
/// |AF| peak at the commanded angle.
pub fn array_factor(
    command: &SteeringCommand,
    layout: &LinearArrayLayout,
    f: Frequency,
    angles_deg: &[f64],
) -> Vec<Complex64> {
    let k = f.wavenumber();
    angles_deg
        .iter()
        .map(|&a| {
            let sin_t = a.to_radians().sin();
            (0..layout.element_count)
                .map(|n| {
                    let geo = n as f64 * k * layout.spacing * sin_t;
                    let phi = command.phases_deg[n].to_radians();
                    Complex64::new(0.0, geo - phi).exp()
                })
                .sum()
        })
        .collect()
}

/// Sphere average of |AF|^2 in closed form: for elements on a line,
/// `<|AF|^2> = sum_nm c_n conj(c_m) sinc(k d |n - m|)`, exact for isotropic
/// radiators. Used to normalise pattern-multiplication directivity.
pub fn af_mean_square(command: &SteeringCommand, layout: &LinearArrayLayout, f: Frequency) -> f64 {
    let k = f.wavenumber();
    let coeffs: Vec<Complex64> = command
        .phases_deg
        .iter()
        .map(|&p| Complex64::new(0.0, -p.to_radians()).exp())
        .collect();
    let mut acc = Complex64::new(0.0, 0.0);
    for (n, cn) in coeffs.iter().enumerate() {
        for (m, cm) in coeffs.iter().enumerate() {
            let x = k * layout.spacing * (n as f64 - m as f64);
            let sinc = if x.abs() < 1e-9 { 1.0 } else { x.sin() / x };
            acc += cn * cm.conj() * sinc;
        }
    }
    acc.re
}

/// Pattern multiplication: pointwise product of an element pattern with an
/// array factor on the same grid. The returned pattern's radiated power is
/// scaled by the exact sphere average of |AF|^2 so that gain lookups give the
/// classical pattern-multiplication directivity estimate.
pub fn total_pattern(
    element: &RadiationPattern,
    af: &[Complex64],
    command: &SteeringCommand,
    layout: &LinearArrayLayout,
) -> Result<RadiationPattern, ArrayError> {
    if af.len() != element.angles_deg.len() {
        return Err(ArrayError::GridMismatch);
    }
    let e_field: Vec<Complex64> = element
        .e_field
        .iter()
        .zip(af)
        .map(|(e, a)| e * a)
        .collect();
    let p_rad =
        element.total_radiated_power * af_mean_square(command, layout, element.frequency);
    RadiationPattern::new(element.angles_deg.clone(), e_field, p_rad, element.frequency)
        .map_err(ArrayError::Pattern)
}

/// One row of the gain-versus-count study.
#[derive(Debug, Clone, Copy)]
pub struct GainRow {
    pub n_uavs: usize,
    pub theta_steer_deg: f64,
    pub gain_dbi: f64,
    pub hpbw_deg: f64,
    pub sll_db: f64,
}

/// Full-MoM gain study across UAV counts at a fixed steering angle.
///
/// Each count is validated against the formation rules first; the solver
/// includes mutual coupling, and the reported gain is the steered pattern's
/// peak directivity.
pub fn gain_vs_count(
    base: &SwarmConfig,
    counts: &[usize],
    theta_steer_deg: f64,
) -> Result<Vec<GainRow>, ArrayError> {
    let mut rows = Vec::with_capacity(counts.len());
    for &n in counts {
        if !(2..=16).contains(&n) {
            return Err(ArrayError::CountOutOfRange(n));
        }
        let config = SwarmConfig { n_uavs: n, ..base.clone() };
        let violations = validate_formation(&config);
        if !violations.is_empty() {
            return Err(ArrayError::Infeasible(
                violations
                    .iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join("; "),
            ));
        }
        let pattern = steered_pattern(&config, theta_steer_deg, 31)?;
        let metrics = pattern_metrics(&pattern)?;
        rows.push(GainRow {
            n_uavs: n,
            theta_steer_deg,
            gain_dbi: metrics.peak_gain_dbi,
            hpbw_deg: metrics.hpbw_deg,
            sll_db: metrics.sidelobe_level_db,
        });
    }
    Ok(rows)
}

/// Full-MoM steered pattern for a swarm configuration (1 degree plot grid).
pub fn steered_pattern(
    config: &SwarmConfig,
    theta_steer_deg: f64,
    segments_per_wire: usize,
) -> Result<RadiationPattern, ArrayError> {
    let f = config.frequency;
    let n_elements = config.n_uavs * config.elements_per_uav;
    let layout = LinearArrayLayout::new(n_elements, config.element_spacing)?;
    let command = steering_phases(&layout, f, theta_steer_deg)?;
    let antenna = WireAntenna::for_frequency(f);
    let placed: Vec<PlacedElement> = layout
        .positions()
        .iter()
        .map(|&y| PlacedElement { antenna, y })
        .collect();
    let grid = full_circle_grid(1.0);
    Ok(solve_full_array(
        &placed,
        &command.phases_deg,
        f,
        segments_per_wire,
        &grid,
    )?)
}

/// CSV export of a gain study: `n_uavs,theta_steer_deg,gain_dbi,hpbw_deg,sll_db`.
pub fn gain_table_csv(rows: &[GainRow]) -> String {
    let mut out = String::from("n_uavs,theta_steer_deg,gain_dbi,hpbw_deg,sll_db\n");
    for r in rows {
        out.push_str(&format!(
            "{},{:.2},{:.4},{:.4},{:.4}\n",
            r.n_uavs, r.theta_steer_deg, r.gain_dbi, r.hpbw_deg, r.sll_db
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn f300() -> Frequency {
        Frequency::from_megahertz(300.0).unwrap()
    }

    fn half_wave_layout(n: usize) -> LinearArrayLayout {
        LinearArrayLayout::new(n, 0.5 * f300().wavelength()).unwrap()
    }

    #[test]
    fn broadside_phases_are_zero() {
        let cmd = steering_phases(&half_wave_layout(2), f300(), 0.0).unwrap();
        assert_abs_diff_eq!(cmd.phases_deg[0], 0.0);
        assert_abs_diff_eq!(cmd.phases_deg[1], 0.0, epsilon = 1e-10);
    }

    #[test]
    fn forty_five_degree_phase() {
        let cmd = steering_phases(&half_wave_layout(2), f300(), 45.0).unwrap();
        // 180 deg * cos(45 deg)
        assert_abs_diff_eq!(cmd.phases_deg[1], 127.279_220_613_578_55, epsilon = 0.01);
    }

    #[test]
    fn single_element_is_reference_only() {
        let cmd = steering_phases(&half_wave_layout(1), f300(), 30.0).unwrap();
        assert_eq!(cmd.phases_deg, vec![0.0]);
    }

    #[test]
    fn out_of_range_steering_rejected() {
        assert!(steering_phases(&half_wave_layout(2), f300(), 91.0).is_err());
    }

    #[test]
    fn two_element_broadside_af() {
        let layout = half_wave_layout(2);
        let cmd = steering_phases(&layout, f300(), 0.0).unwrap();
        let af = array_factor(&cmd, &layout, f300(), &[0.0]);
        assert_relative_eq!(af[0].norm(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn half_wave_nulls_at_endfire() {
        let layout = half_wave_layout(2);
        let cmd = steering_phases(&layout, f300(), 0.0).unwrap();
        let af = array_factor(&cmd, &layout, f300(), &[90.0, -90.0]);
        // analytic null: k d cos(psi) = pi at psi = 0 and 180
        assert!(af[0].norm() < 1e-10);
        assert!(af[1].norm() < 1e-10);
    }

    #[test]
    fn af_peak_at_command_for_all_study_angles() {
        // forward half-plane only: a linear array is front-back ambiguous
        let grid: Vec<f64> = full_circle_grid(1.0)
            .into_iter()
            .filter(|a| a.abs() <= 90.0)
            .collect();
        for n in 2..=7 {
            let layout = half_wave_layout(n);
            for steer in [-60.0, -45.0, -30.0, 0.0, 30.0, 45.0, 60.0] {
                let cmd = steering_phases(&layout, f300(), steer).unwrap();
                let af = array_factor(&cmd, &layout, f300(), &grid);
                let ipk = af
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
                    .unwrap()
                    .0;
                assert!(
                    (grid[ipk] - steer).abs() <= 1.0,
                    "N={n} steer={steer}: AF peak at {}",
                    grid[ipk]
                );
                // |AF| peak equals N at the commanded angle
                let af_at: Complex64 = array_factor(&cmd, &layout, f300(), &[steer])[0];
                assert_relative_eq!(af_at.norm(), n as f64, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn seven_element_af_directivity() {
        // brute-force integration of |AF|^2 over the sphere for the uniform
        // broadside array; half-wave spacing makes D = N exactly.
        let layout = half_wave_layout(7);
        let cmd = steering_phases(&layout, f300(), 0.0).unwrap();
        let k = f300().wavenumber();
        let n_psi = 20_000;
        let mut integral = 0.0;
        for i in 0..n_psi {
            let psi = (i as f64 + 0.5) * std::f64::consts::PI / n_psi as f64;
            let af: Complex64 = (0..7)
                .map(|n| {
                    Complex64::new(
                        0.0,
                        n as f64 * k * layout.spacing * psi.cos()
                            - cmd.phases_deg[n].to_radians(),
                    )
                    .exp()
                })
                .sum();
            integral += af.norm_sqr() * psi.sin();
        }
        integral *= std::f64::consts::PI / n_psi as f64 / 2.0; // mean over sphere
        let d_af = 49.0 / integral;
        assert_abs_diff_eq!(crate::units::power_db(d_af), 8.45, epsilon = 0.1);
        // closed-form mean square agrees with the brute force
        assert_relative_eq!(
            af_mean_square(&cmd, &layout, f300()),
            integral,
            max_relative = 1e-3
        );
    }

    #[test]
    fn phase_reference_invariance() {
        let layout = half_wave_layout(5);
        let mut cmd = steering_phases(&layout, f300(), 30.0).unwrap();
        let grid = full_circle_grid(1.0);
        let base = array_factor(&cmd, &layout, f300(), &grid);
        for p in cmd.phases_deg.iter_mut() {
            *p += 77.7;
        }
        let shifted = array_factor(&cmd, &layout, f300(), &grid);
        for (a, b) in base.iter().zip(&shifted) {
            assert_abs_diff_eq!(a.norm(), b.norm(), epsilon = 1e-12);
        }
    }

    #[test]
    fn af_identity_preserves_element_pattern() {
        use crate::units::ETA0;
        let grid = full_circle_grid(1.0);
        let e: Vec<Complex64> = grid
            .iter()
            .map(|&a| Complex64::new(1.0 + 0.5 * (a.to_radians()).cos(), 0.0))
            .collect();
        let u_tot: f64 = e.iter().map(|x| x.norm_sqr() / (2.0 * ETA0)).sum::<f64>();
        let element =
            RadiationPattern::new(grid.clone(), e, u_tot, f300()).unwrap();
        let layout = half_wave_layout(1);
        let cmd = steering_phases(&layout, f300(), 0.0).unwrap();
        let af = array_factor(&cmd, &layout, f300(), &grid);
        let total = total_pattern(&element, &af, &cmd, &layout).unwrap();
        for i in 0..grid.len() {
            assert_relative_eq!(total.gain_dbi(i), element.gain_dbi(i), epsilon = 1e-12);
        }
    }

    #[test]
    fn isotropic_element_gives_pure_af() {
        use crate::units::ETA0;
        let grid = full_circle_grid(1.0);
        // isotropic radiator: unit field everywhere, P = 4 pi U
        let e = vec![Complex64::new(1.0, 0.0); grid.len()];
        let p = 4.0 * std::f64::consts::PI / (2.0 * ETA0);
        let element = RadiationPattern::new(grid.clone(), e, p, f300()).unwrap();
        let layout = half_wave_layout(2);
        let cmd = steering_phases(&layout, f300(), 0.0).unwrap();
        let af = array_factor(&cmd, &layout, f300(), &grid);
        let total = total_pattern(&element, &af, &cmd, &layout).unwrap();
        // broadside gain of the 2-element half-wave AF: D = 2 -> 3.01 dB
        assert_abs_diff_eq!(total.gain_at(0.0), 3.0103, epsilon = 0.01);
    }

    #[test]
    fn grid_mismatch_rejected() {
        use crate::units::ETA0;
        let grid = full_circle_grid(1.0);
        let e = vec![Complex64::new(1.0, 0.0); grid.len()];
        let p = 4.0 * std::f64::consts::PI / (2.0 * ETA0);
        let element = RadiationPattern::new(grid, e, p, f300()).unwrap();
        let layout = half_wave_layout(2);
        let cmd = steering_phases(&layout, f300(), 0.0).unwrap();
        let af = vec![Complex64::new(1.0, 0.0); 10];
        assert!(matches!(
            total_pattern(&element, &af, &cmd, &layout),
            Err(ArrayError::GridMismatch)
        ));
    }

    #[test]
    fn steering_symmetry_of_af() {
        let layout = half_wave_layout(4);
        let grid = full_circle_grid(1.0);
        let plus = steering_phases(&layout, f300(), 45.0).unwrap();
        let minus = steering_phases(&layout, f300(), -45.0).unwrap();
        let af_p = array_factor(&plus, &layout, f300(), &grid);
        let af_m = array_factor(&minus, &layout, f300(), &grid);
        // mirror symmetry: |AF_plus(theta)| = |AF_minus(-theta)|
        let n = grid.len();
        for i in 0..n {
            let j = grid.iter().position(|&a| (a + grid[i]).abs() < 1e-9);
            if let Some(j) = j {
                assert_abs_diff_eq!(af_p[i].norm(), af_m[j].norm(), epsilon = 1e-9);
            }
        }
    }
}
