//! Products of random 2x2 matrices and the spectral theory of
//! one-dimensional disordered systems.

pub mod acceptance;
pub mod algebra;
pub mod ensembles;
pub mod error;
pub mod ising;
pub mod lyapunov;
pub mod oracles;
pub mod quad;
pub mod riccati;
pub mod scattering;
pub mod specfun;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
