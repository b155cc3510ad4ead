//! Small dense linear algebra: norms, eigenvalues, the matrix exponential,
//! the continuous Lyapunov equation and stability tests.

mod eigen;
mod expm;
mod lyapunov;
mod matrix;

pub use eigen::{eigenvalues, is_hurwitz, spectral_norm, symmetric_eigenvalues, Spectrum};
pub use expm::expm;
pub use lyapunov::{lyapunov_residual, solve_lyapunov, solve_lyapunov_general, LyapunovEnvelope};
pub use matrix::{norm2, Lu, Matrix};
