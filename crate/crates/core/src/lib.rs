//! Desk-scale simulation toolkit for UAV swarm phased arrays joined by
//! magnetically docked RF connectors.
//!
//! The crate covers the full chain from element electromagnetics to swarm
//! behaviour:
//!
//! - [`mom`]: thin-wire method-of-moments solver for the two-rod array
//!   element and full steered arrays, including mutual coupling;
//! - [`array`]: steering phases, array factors, pattern multiplication and
//!   the gain-versus-UAV-count study;
//! - [`connector`]: equivalent-circuit surrogate of the docking RF connector
//!   (design-stage catalog, path loss, misalignment, frequency scaling);
//! - [`planner`]: element density, aerodynamic spacing feasibility and
//!   UAV-count selection for a target gain;
//! - [`docking`]: kinematic docking state machine coupling mechanical state
//!   to live link budget;
//! - [`experiments`]: end-to-end reproduction studies and CSV/report export.

pub mod array;
pub mod config;
pub mod connector;
pub mod docking;
pub mod experiments;
pub mod mom;
pub mod pattern;
pub mod planner;
pub mod twoport;
pub mod units;

pub use pattern::{pattern_metrics, PatternMetrics, RadiationPattern};
pub use units::Frequency;
