pub mod bounds;
pub mod envelopes;
pub mod error;
pub mod linalg;
pub mod ode;
pub mod powermodels;
pub mod scalar;
pub mod sensitivity;

pub use error::{Error, Result};
pub use scalar::Real;

/// Double-precision instantiations of the generic core.
pub type Matrix = linalg::Matrix<f64>;
pub type Trajectory = ode::Trajectory<f64>;
pub type LtvSystem = sensitivity::LtvSystem<f64>;
pub type BoundResult = bounds::BoundResult<f64>;

/// Single-precision instantiations.
pub type Matrix32 = linalg::Matrix<f32>;
pub type Trajectory32 = ode::Trajectory<f32>;
pub type LtvSystem32 = sensitivity::LtvSystem<f32>;
pub type BoundResult32 = bounds::BoundResult<f32>;
