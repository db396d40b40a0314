//! Swarm scalability planning: how many elements fit per UAV at a given
//! frequency, whether a formation respects the aerodynamic spacing rule, and
//! how many UAVs a target gain requires.
//!
//! The aerodynamic rule applies to UAV centre spacing: docked UAVs in a line
//! have centre spacing `elements_per_uav * d_ele`, and that spacing must stay
//! at or above twice the propeller diameter to avoid turbulence from the
//! neighbour's rotors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::units::Frequency;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("no feasible element count: even {max_elements} elements per UAV give {spacing_mm:.1} mm centre spacing < {required_mm:.1} mm; shrink the platform by a factor of {shrink_factor:.2}")]
    Infeasible {
        max_elements: usize,
        spacing_mm: f64,
        required_mm: f64,
        shrink_factor: f64,
    },
    #[error("target gain {target_dbi:.2} dBi unachievable within the {cap}-UAV cap (predicted {predicted_dbi:.2} dBi at the cap)")]
    UnachievableGain {
        target_dbi: f64,
        cap: usize,
        predicted_dbi: f64,
    },
    #[error("planned configuration failed validation: {0:?}")]
    InvalidPlan(Vec<Violation>),
}

/// Physical UAV parameters that constrain the array layout.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct UavPlatform {
    pub body_length_m: f64,
    pub propeller_diameter_m: f64,
    pub max_elements: usize,
}

impl UavPlatform {
    /// The 175 mm quadcopter with 127 mm propellers used at 300/600 MHz.
    pub fn reference() -> Self {
        Self {
            body_length_m: 0.175,
            propeller_diameter_m: 0.127,
            max_elements: 4,
        }
    }

    /// The halved 87.5 mm platform for 1200 MHz operation. The paper omits
    /// its propeller size; it scales with the body, giving 63.5 mm.
    pub fn half_scale() -> Self {
        Self {
            body_length_m: 0.0875,
            propeller_diameter_m: 0.0635,
            max_elements: 4,
        }
    }
}

/// A planned swarm: N UAVs in a line, each carrying `elements_per_uav`
/// radiators at `element_spacing`.
#[derive(Debug, Clone)]
pub struct SwarmConfig {
    pub platform: UavPlatform,
    pub frequency: Frequency,
    pub elements_per_uav: usize,
    pub element_spacing: f64,
    pub uav_center_spacing: f64,
    pub n_uavs: usize,
}

impl SwarmConfig {
    /// Canonical configuration at `f`: element density from
    /// [`elements_per_uav`], half-wave element spacing.
    pub fn for_frequency(f: Frequency, platform: UavPlatform, n_uavs: usize) -> Result<Self, PlannerError> {
        let plan = elements_per_uav(f, &platform)?;
        Ok(Self {
            platform,
            frequency: f,
            elements_per_uav: plan.count,
            element_spacing: plan.element_spacing,
            uav_center_spacing: plan.count as f64 * plan.element_spacing,
            n_uavs,
        })
    }
}

/// Which rule fixed the element count.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BindingConstraint {
    /// One element per UAV already satisfies the spacing rule.
    MinimumElementCount,
    /// The element density had to rise so that UAV centre spacing cleared
    /// twice the propeller diameter.
    AerodynamicSpacing,
}

/// Result of the per-UAV element-density calculation.
#[derive(Debug, Clone, Copy)]
pub struct ElementPlan {
    pub count: usize,
    pub element_spacing: f64,
    pub uav_center_spacing: f64,
    pub binding: BindingConstraint,
}

/// Smallest element count per UAV such that the UAV centre spacing
/// `m * lambda/2` clears twice the propeller diameter, capped by what the
/// support structure carries.
pub fn elements_per_uav(f: Frequency, platform: &UavPlatform) -> Result<ElementPlan, PlannerError> {
    let d_ele = f.wavelength() / 2.0;
    let required = 2.0 * platform.propeller_diameter_m;
    let mut m = (required / d_ele).ceil() as usize;
    if m < 1 {
        m = 1;
    }
    if m > platform.max_elements {
        let spacing = platform.max_elements as f64 * d_ele;
        return Err(PlannerError::Infeasible {
            max_elements: platform.max_elements,
            spacing_mm: spacing * 1e3,
            required_mm: required * 1e3,
            shrink_factor: required / spacing,
        });
    }
    Ok(ElementPlan {
        count: m,
        element_spacing: d_ele,
        uav_center_spacing: m as f64 * d_ele,
        binding: if m == 1 {
            BindingConstraint::MinimumElementCount
        } else {
            BindingConstraint::AerodynamicSpacing
        },
    })
}

/// One violated formation rule: the constraint, the actual value, the bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: String,
    pub actual: f64,
    pub bound: f64,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{}: actual {:.4} vs bound {:.4}",
            self.constraint, self.actual, self.bound
        )
    }
}

/// Check every formation invariant; an empty list means the configuration is
/// flyable. Violations are data, not errors.
pub fn validate_formation(config: &SwarmConfig) -> Vec<Violation> {
    let mut v = Vec::new();
    if config.n_uavs == 0 {
        v.push(Violation {
            constraint: "swarm must contain at least one UAV".into(),
            actual: 0.0,
            bound: 1.0,
        });
    }
    if config.elements_per_uav == 0 {
        v.push(Violation {
            constraint: "each UAV must carry at least one element".into(),
            actual: 0.0,
            bound: 1.0,
        });
        return v;
    }
    let expected_center = config.elements_per_uav as f64 * config.element_spacing;
    if (config.uav_center_spacing - expected_center).abs() > 1e-9 {
        v.push(Violation {
            constraint: "UAV centre spacing must equal elements-per-UAV x element spacing".into(),
            actual: config.uav_center_spacing,
            bound: expected_center,
        });
    }
    let aero_bound = 2.0 * config.platform.propeller_diameter_m;
    if config.n_uavs > 1 && config.uav_center_spacing < aero_bound {
        v.push(Violation {
            constraint: "UAV centre spacing must be at least twice the propeller diameter".into(),
            actual: config.uav_center_spacing,
            bound: aero_bound,
        });
    }
    if config.elements_per_uav > config.platform.max_elements {
        v.push(Violation {
            constraint: "element count exceeds what the support structure carries".into(),
            actual: config.elements_per_uav as f64,
            bound: config.platform.max_elements as f64,
        });
    }
    v
}

/// Paper anchor gains for the two-UAV array (dBi).
pub const GAIN_ANCHOR_BROADSIDE_DBI: f64 = 8.7;
pub const GAIN_ANCHOR_45DEG_DBI: f64 = 6.01;

/// Coherent-scaling gain prediction from the two-UAV anchors:
/// `G(N) = G(2) + 10 log10(N/2)`, with the 45-degree anchor once the
/// steering command leaves |theta| <= 22.5 deg.
pub fn predicted_gain_dbi(n_uavs: usize, theta_steer_deg: f64) -> f64 {
    let anchor = if theta_steer_deg.abs() > 22.5 {
        GAIN_ANCHOR_45DEG_DBI
    } else {
        GAIN_ANCHOR_BROADSIDE_DBI
    };
    anchor + 10.0 * (n_uavs as f64 / 2.0).log10()
}

/// Maximum swarm size considered by the planner.
pub const UAV_CAP: usize = 32;

/// Smallest swarm whose predicted gain meets the target; the returned
/// configuration always passes [`validate_formation`].
pub fn plan_swarm(
    target_gain_dbi: f64,
    theta_steer_deg: f64,
    f: Frequency,
    platform: &UavPlatform,
) -> Result<SwarmConfig, PlannerError> {
    let plan = elements_per_uav(f, platform)?;
    let n = (2..=UAV_CAP)
        .find(|&n| predicted_gain_dbi(n, theta_steer_deg) >= target_gain_dbi)
        .ok_or(PlannerError::UnachievableGain {
            target_dbi: target_gain_dbi,
            cap: UAV_CAP,
            predicted_dbi: predicted_gain_dbi(UAV_CAP, theta_steer_deg),
        })?;
    let config = SwarmConfig {
        platform: *platform,
        frequency: f,
        elements_per_uav: plan.count,
        element_spacing: plan.element_spacing,
        uav_center_spacing: plan.uav_center_spacing,
        n_uavs: n,
    };
    let violations = validate_formation(&config);
    if !violations.is_empty() {
        return Err(PlannerError::InvalidPlan(violations));
    }
    Ok(config)
}

/// Plan report as `key: value` lines.
pub fn plan_report(config: &SwarmConfig, target_gain_dbi: f64, theta_steer_deg: f64) -> String {
    let predicted = predicted_gain_dbi(config.n_uavs, theta_steer_deg);
    format!(
        "target_gain_dbi: {:.2}\n\
         theta_steer_deg: {:.2}\n\
         frequency_hz: {:.0}\n\
         n_uavs: {}\n\
         elements_per_uav: {}\n\
         element_spacing_m: {:.4}\n\
         uav_center_spacing_m: {:.4}\n\
         predicted_gain_dbi: {:.2}\n\
         platform_body_length_m: {:.4}\n\
         platform_propeller_diameter_m: {:.4}\n",
        target_gain_dbi,
        theta_steer_deg,
        config.frequency.hertz(),
        config.n_uavs,
        config.elements_per_uav,
        config.element_spacing,
        config.uav_center_spacing,
        predicted,
        config.platform.body_length_m,
        config.platform.propeller_diameter_m,
    )
}

/// Machine-readable CSV row matching [`plan_report`].
pub fn plan_csv_row(config: &SwarmConfig, target_gain_dbi: f64, theta_steer_deg: f64) -> String {
    format!(
        "target_gain_dbi,theta_steer_deg,frequency_hz,n_uavs,elements_per_uav,element_spacing_m,uav_center_spacing_m,predicted_gain_dbi\n\
         {:.2},{:.2},{:.0},{},{},{:.4},{:.4},{:.2}\n",
        target_gain_dbi,
        theta_steer_deg,
        config.frequency.hertz(),
        config.n_uavs,
        config.elements_per_uav,
        config.element_spacing,
        config.uav_center_spacing,
        predicted_gain_dbi(config.n_uavs, theta_steer_deg),
    )
}

/// Check that a gain prediction stays self-consistent under re-planning.
pub fn inversion_consistent(n: usize, theta_steer_deg: f64, f: Frequency, platform: &UavPlatform) -> bool {
    match plan_swarm(predicted_gain_dbi(n, theta_steer_deg), theta_steer_deg, f, platform) {
        Ok(cfg) => cfg.n_uavs == n,
        Err(_) => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn fmhz(mhz: f64) -> Frequency {
        Frequency::from_megahertz(mhz).unwrap()
    }

    #[test]
    fn reference_platform_at_300_mhz_carries_one_element() {
        let plan = elements_per_uav(fmhz(300.0), &UavPlatform::reference()).unwrap();
        assert_eq!(plan.count, 1);
        // d_ele = lambda/2 ~ 500 mm
        assert_relative_eq!(plan.element_spacing, 0.4997, epsilon = 5e-4);
        assert_eq!(plan.binding, BindingConstraint::MinimumElementCount);
    }

    #[test]
    fn same_platform_at_600_mhz_carries_two() {
        let plan = elements_per_uav(fmhz(600.0), &UavPlatform::reference()).unwrap();
        assert_eq!(plan.count, 2);
        assert_eq!(plan.binding, BindingConstraint::AerodynamicSpacing);
    }

    #[test]
    fn half_scale_platform_at_1200_mhz() {
        let plan = elements_per_uav(fmhz(1200.0), &UavPlatform::half_scale()).unwrap();
        assert_eq!(plan.count, 2);
        // UAV centre spacing 2 x 125 mm = 250 mm
        assert_relative_eq!(plan.uav_center_spacing, 0.2498, epsilon = 5e-4);
    }

    #[test]
    fn infeasible_platform_names_shrink_factor() {
        // 10 GHz on the reference platform: lambda/2 = 15 mm; even 4 elements
        // give 60 mm < 254 mm.
        let err = elements_per_uav(fmhz(10_000.0), &UavPlatform::reference()).unwrap_err();
        match err {
            PlannerError::Infeasible { shrink_factor, .. } => {
                assert!(shrink_factor > 1.0);
            }
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn paper_config_validates_clean() {
        let cfg = SwarmConfig::for_frequency(fmhz(300.0), UavPlatform::reference(), 2).unwrap();
        assert!(validate_formation(&cfg).is_empty());
        // 500 mm >= 254 mm
        assert!(cfg.uav_center_spacing >= 2.0 * cfg.platform.propeller_diameter_m);
    }

    #[test]
    fn tight_spacing_is_flagged() {
        let mut cfg = SwarmConfig::for_frequency(fmhz(300.0), UavPlatform::reference(), 2).unwrap();
        // force 250 mm UAV spacing against 127 mm propellers
        cfg.element_spacing = 0.250;
        cfg.uav_center_spacing = 0.250;
        let v = validate_formation(&cfg);
        assert!(v.iter().any(|x| x.constraint.contains("propeller")));
        let aero = v.iter().find(|x| x.constraint.contains("propeller")).unwrap();
        assert_relative_eq!(aero.actual, 0.250);
        assert_relative_eq!(aero.bound, 0.254);
    }

    #[test]
    fn empty_swarm_is_a_violation() {
        let mut cfg = SwarmConfig::for_frequency(fmhz(300.0), UavPlatform::reference(), 2).unwrap();
        cfg.n_uavs = 0;
        assert!(!validate_formation(&cfg).is_empty());
    }

    #[test]
    fn plan_for_14_dbi_needs_seven_uavs() {
        let cfg = plan_swarm(14.0, 0.0, fmhz(300.0), &UavPlatform::reference()).unwrap();
        assert_eq!(cfg.n_uavs, 7);
        assert_relative_eq!(predicted_gain_dbi(7, 0.0), 14.14, epsilon = 0.01);
    }

    #[test]
    fn plan_for_anchor_gain_needs_two() {
        let cfg = plan_swarm(8.7, 0.0, fmhz(300.0), &UavPlatform::reference()).unwrap();
        assert_eq!(cfg.n_uavs, 2);
    }

    #[test]
    fn fifty_dbi_is_unachievable() {
        assert!(matches!(
            plan_swarm(50.0, 0.0, fmhz(300.0), &UavPlatform::reference()),
            Err(PlannerError::UnachievableGain { .. })
        ));
    }

    #[test]
    fn planner_inversion_round_trips() {
        for n in 2..=7 {
            for steer in [0.0, 45.0, -45.0] {
                assert!(
                    inversion_consistent(n, steer, fmhz(300.0), &UavPlatform::reference()),
                    "inversion failed for N={n}, steer={steer}"
                );
            }
        }
    }

    #[test]
    fn feasibility_is_monotone_in_frequency() {
        // feasible at 300 MHz stays feasible at every higher frequency that
        // still fits the element cap
        let platform = UavPlatform::reference();
        for mhz in [300.0, 450.0, 600.0, 900.0, 1200.0] {
            let plan = elements_per_uav(fmhz(mhz), &platform);
            if mhz <= 1200.0 {
                assert!(plan.is_ok(), "infeasible at {mhz} MHz");
                let p = plan.unwrap();
                assert!(p.uav_center_spacing >= 2.0 * platform.propeller_diameter_m - 1e-12);
            }
        }
    }

    #[test]
    fn planner_output_always_validates() {
        for target in [6.0, 9.0, 12.0, 15.0, 18.0] {
            for steer in [0.0, 45.0] {
                if let Ok(cfg) = plan_swarm(target, steer, fmhz(300.0), &UavPlatform::reference()) {
                    assert!(validate_formation(&cfg).is_empty());
                }
            }
        }
    }
}
