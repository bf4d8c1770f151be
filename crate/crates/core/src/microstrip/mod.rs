//! Microstrip layer: quasi-static line models, parallel-coupled bandpass
//! synthesis and analysis, and feature-size checks.
//!
//! All lengths are in metres.

mod analysis;
mod coupled;
mod geometry;
mod line;
mod synthesis;

pub use analysis::{analyze_parallel_coupled, section_abcd, Abcd, SYSTEM_IMPEDANCE_OHMS};
pub use coupled::{coupled_line_parameters, CoupledLineParameters};
pub use geometry::{
    manufacturability_check, CoupledSection, InterdigitalGeometry, Manufacturable,
    ParallelCoupledGeometry, Substrate, Violation, MIN_FEATURE_M,
};
pub use line::{line_parameters, width_for_impedance, LineParameters};
pub use synthesis::{
    inverter_impedances, synthesize_parallel_coupled, CoupledFilterSpec, SectionTarget,
};

/// Speed of light in vacuum, m/s.
pub const C0: f64 = 299_792_458.0;
/// Vacuum permittivity, F/m.
pub const EPS0: f64 = 8.854_187_812_8e-12;
/// Free-space wave impedance, ohm.
pub const ETA0: f64 = 376.730_313_668;
