//! Mesoscopic linear statistics of orthogonal polynomial ensembles at spectral
//! edges, computed from recurrence coefficients.

pub mod acceptance;
pub mod cli;
pub mod cumulant;
pub mod ensemble;
pub mod limit;
pub mod sampler;
pub mod error;
pub mod testfn;
pub mod tridiag;

pub use ensemble::{EdgeSpec, EnsembleSpec, Family, Side};
pub use error::{Error, Result};
pub use tridiag::TridiagonalMatrix;
pub use testfn::{ResolventTestFunction, TestFunction};
