//! Finite symmetric tri-diagonal matrices `J_N - z` and their inverses.

mod decay;
mod free;
mod oracle;
mod resolvent;
mod toeplitz;
mod transfer;

pub use decay::{decay_profile, decay_profile_with, decay_study, DecayComparison, DecayFit};
pub use free::{free_omegas, free_resolvent_entry};
pub use oracle::{invert_dense_oracle, ORACLE_MAX_N};
pub use resolvent::{invert_entry, Resolvent};
pub use toeplitz::{almost_toeplitz_decompose, AlmostToeplitzDecomposition, ToeplitzDiagnostics, ToeplitzStatus};
pub use transfer::{transfer_spectrum, TransferSpectrum};

use nalgebra::DVector;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `J_N - z` with `J_N` real symmetric tri-diagonal.
///
/// `diag[i] = b_i` sits in row `i + 1`; `offdiag[i] = a_{i+1}` couples rows
/// `i + 1` and `i + 2`. Indices in the public API are 1-based, as in the
/// matrix notation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MatrixJson", into = "MatrixJson")]
pub struct TridiagonalMatrix {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    shift: Complex64,
}

impl TridiagonalMatrix {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>, shift: Complex64) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::InvalidInput(format!(
                "offdiag has length {}, expected {}",
                offdiag.len(),
                diag.len() - 1
            )));
        }
        if diag.iter().chain(&offdiag).any(|v| !v.is_finite()) || !shift.is_finite() {
            return Err(Error::InvalidInput("non-finite matrix data".into()));
        }
        Ok(TridiagonalMatrix {
            diag,
            offdiag,
            shift,
        })
    }

    /// Constant coefficients `a`, `b`.
    pub fn toeplitz(size: usize, a: f64, b: f64, shift: Complex64) -> Result<Self> {
        TridiagonalMatrix::new(vec![b; size], vec![a; size.saturating_sub(1)], shift)
    }

    pub fn size(&self) -> usize {
        self.diag.len()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn shift(&self) -> Complex64 {
        self.shift
    }

    pub fn with_shift(&self, shift: Complex64) -> Self {
        TridiagonalMatrix {
            shift,
            ..self.clone()
        }
    }

    /// `b_{j-1}` for row `j`.
    pub fn b(&self, row: usize) -> f64 {
        self.diag[row - 1]
    }

    /// `a_j`, coupling rows `j` and `j + 1`.
    pub fn a(&self, j: usize) -> f64 {
        self.offdiag[j - 1]
    }

    /// `-(J - z) = (-J) - (-z)`: the reflection used at right edges.
    pub fn reflected(&self) -> Self {
        TridiagonalMatrix {
            diag: self.diag.iter().map(|b| -b).collect(),
            offdiag: self.offdiag.clone(),
            shift: -self.shift,
        }
    }

    /// `(J - z) v`.
    pub fn apply(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.size();
        DVector::from_fn(n, |i, _| {
            let mut s = (self.diag[i] - self.shift) * v[i];
            if i > 0 {
                s += self.offdiag[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                s += self.offdiag[i] * v[i + 1];
            }
            s
        })
    }
}

#[derive(Serialize, Deserialize)]
struct ShiftJson {
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixJson {
    #[serde(rename = "N")]
    n: usize,
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    z: ShiftJson,
}

impl TryFrom<MatrixJson> for TridiagonalMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        if m.n != m.diag.len() {
            return Err(Error::InvalidInput(format!(
                "N = {} but diag has {} entries",
                m.n,
                m.diag.len()
            )));
        }
        TridiagonalMatrix::new(m.diag, m.offdiag, Complex64::new(m.z.re, m.z.im))
    }
}

impl From<TridiagonalMatrix> for MatrixJson {
    fn from(t: TridiagonalMatrix) -> Self {
        MatrixJson {
            n: t.size(),
            z: ShiftJson {
                re: t.shift.re,
                im: t.shift.im,
            },
            diag: t.diag,
            offdiag: t.offdiag,
        }
    }
}
