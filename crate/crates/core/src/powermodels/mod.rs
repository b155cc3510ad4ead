//! Synchronous generator with the stator algebra eliminated, and its turbine-governor extension.

mod generator;
mod governor;
mod resonance;

pub use generator::{generator_jacobians, generator_rhs, stator_solve, GeneratorModel, GeneratorParams, PmProfile, StatorSolution};
pub use governor::{governor_rhs, GovernorModel, GovernorParams};
pub use resonance::{frequency_gain, resonant_frequency, Sweep};

/// Rotor angle and speed the case studies start from.
pub const CASE_X0: [f64; 2] = [-std::f64::consts::FRAC_PI_2 - 0.5, 0.95];
