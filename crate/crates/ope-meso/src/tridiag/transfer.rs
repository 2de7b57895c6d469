use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::TridiagonalMatrix;
use crate::error::{Error, Result};

/// Eigenvalues of the two transfer matrices at one index.
///
/// `omega` solves `a_{j-1} w^2 - (b_{j-1} - z) w + a_j = 0`, `lambda` solves
/// `a_j l^2 - (b_{j-1} - z) l + a_{j-1} = 0`, so `lambda^- omega^+ = 1` and
/// `lambda^+ omega^- = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Roots {
    pub op: Complex64,
    pub om: Complex64,
    pub lp: Complex64,
    pub lm: Complex64,
}

impl Roots {
    /// Principal square root of the discriminant; if `w - s` is the larger of
    /// `w +/- s` it is used instead, so that `|omega^+| >= |omega^-|` always.
    pub fn new(a_prev: f64, a: f64, w: Complex64) -> Roots {
        let s = (w * w - 4.0 * a * a_prev).sqrt();
        let u = if (w + s).norm() >= (w - s).norm() { w + s } else { w - s };
        Roots {
            op: u / (2.0 * a_prev),
            om: 2.0 * a / u,
            lp: u / (2.0 * a),
            lm: 2.0 * a_prev / u,
        }
    }

    pub fn rho(&self) -> Complex64 {
        self.om / self.op
    }
}

/// `M_j = V_j^{-1} V_{j+1} - I` with `V_j = [[1, 1], [omega_j^+, omega_j^-]]`.
pub(crate) fn m_matrix(j: &Roots, next: &Roots) -> Matrix2<Complex64> {
    let d = (j.om - j.op).inv();
    Matrix2::new(
        (j.op - next.op) * d,
        (j.om - next.om) * d,
        (next.op - j.op) * d,
        (next.om - j.om) * d,
    )
}

/// `E_j = W_j^{-1} W_{j-1} - I` with `W_j = [[1, 1], [lambda_j^+, lambda_j^-]]`.
pub(crate) fn e_matrix(j: &Roots, prev: &Roots) -> Matrix2<Complex64> {
    let d = (j.lm - j.lp).inv();
    Matrix2::new(
        (j.lp - prev.lp) * d,
        (j.lm - prev.lm) * d,
        (prev.lp - j.lp) * d,
        (prev.lm - j.lm) * d,
    )
}

/// Maximum absolute row sum.
pub(crate) fn row_sum_norm(m: &Matrix2<Complex64>) -> f64 {
    (m[(0, 0)].norm() + m[(0, 1)].norm()).max(m[(1, 0)].norm() + m[(1, 1)].norm())
}

/// Roots for `j = 1..=N`, padding `a_0 := a_1` and `a_N := a_{N-1}`.
pub(crate) fn extended_roots(matrix: &TridiagonalMatrix) -> Result<Vec<Roots>> {
    let n = matrix.size();
    if n < 2 {
        return Err(Error::InvalidInput("transfer data needs N >= 2".into()));
    }
    let a = matrix.offdiag();
    if let Some(i) = a.iter().position(|v| *v == 0.0) {
        return Err(Error::InvalidInput(format!("a_{} = 0", i + 1)));
    }
    let z = matrix.shift();
    let coef = |j: usize| -> f64 { a[j.clamp(1, n - 1) - 1] };
    Ok((1..=n)
        .map(|j| Roots::new(coef(j - 1), coef(j), matrix.b(j) - z))
        .collect())
}

/// Transfer-matrix eigenvalues for `j = 2..=N-1` and the norms of the
/// perturbation matrices `M_j` (`j = 2..=N-2`) and `E_j` (`j = 3..=N-1`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransferSpectrum {
    /// Matrix index of element 0 of the root vectors (always 2).
    pub first_index: usize,
    pub omega_plus: Vec<Complex64>,
    pub omega_minus: Vec<Complex64>,
    pub lambda_plus: Vec<Complex64>,
    pub lambda_minus: Vec<Complex64>,
    /// `||M_j||`, `j = 2..=N-2`, max row sum
    pub m_norms: Vec<f64>,
    /// `||E_j||`, `j = 3..=N-1`, max row sum
    pub e_norms: Vec<f64>,
}

impl TransferSpectrum {
    /// Roots at matrix index `j`.
    pub fn omega(&self, j: usize) -> (Complex64, Complex64) {
        let i = j - self.first_index;
        (self.omega_plus[i], self.omega_minus[i])
    }

    pub fn lambda(&self, j: usize) -> (Complex64, Complex64) {
        let i = j - self.first_index;
        (self.lambda_plus[i], self.lambda_minus[i])
    }
}

/// Requires `N >= 3` and nonzero off-diagonals.
pub fn transfer_spectrum(matrix: &TridiagonalMatrix) -> Result<TransferSpectrum> {
    let n = matrix.size();
    if n < 3 {
        return Err(Error::InvalidInput("transfer_spectrum needs N >= 3".into()));
    }
    let ext = extended_roots(matrix)?;
    let inner = &ext[1..n - 1];
    let m_norms = (2..=n - 2)
        .map(|j| row_sum_norm(&m_matrix(&ext[j - 1], &ext[j])))
        .collect();
    let e_norms = (3..=n - 1)
        .map(|j| row_sum_norm(&e_matrix(&ext[j - 1], &ext[j - 2])))
        .collect();
    Ok(TransferSpectrum {
        first_index: 2,
        omega_plus: inner.iter().map(|r| r.op).collect(),
        omega_minus: inner.iter().map(|r| r.om).collect(),
        lambda_plus: inner.iter().map(|r| r.lp).collect(),
        lambda_minus: inner.iter().map(|r| r.lm).collect(),
        m_norms,
        e_norms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_discriminant() {
        let t = TridiagonalMatrix::toeplitz(3, 1.0, 2.0, c(0.0, 0.0)).unwrap();
        let s = transfer_spectrum(&t).unwrap();
        assert_eq!(s.omega(2), (c(1.0, 0.0), c(1.0, 0.0)));
    }

    #[test]
    fn free_roots_near_edge() {
        let eta = c(0.0, 1.0);
        let t = TridiagonalMatrix::toeplitz(5, 1.0, 2.0, eta / 100.0).unwrap();
        let s = transfer_spectrum(&t).unwrap();
        let (op, om) = s.omega(3);
        let r = (-eta / 100.0).sqrt();
        assert!((op - (1.0 + r)).norm() < 1e-2);
        assert!((om - (1.0 - r)).norm() < 1e-2);
        assert!(op.norm() > om.norm());
    }

    #[test]
    fn identities_on_varying_data() {
        let diag: Vec<f64> = (0..30).map(|i| 1.5 + (i as f64 * 0.37).sin()).collect();
        let off: Vec<f64> = (0..29).map(|i| 0.8 + 0.3 * (i as f64 * 0.11).cos()).collect();
        let t = TridiagonalMatrix::new(diag, off.clone(), c(0.3, 0.4)).unwrap();
        let s = transfer_spectrum(&t).unwrap();
        for j in 2..=29 {
            let (op, om) = s.omega(j);
            let (lp, lm) = s.lambda(j);
            assert!((lm * op - 1.0).norm() < 1e-13);
            assert!((lp * om - 1.0).norm() < 1e-13);
            assert!((op * om - off[j - 1] / off[j - 2]).norm() < 1e-13);
            assert!(op.norm() >= om.norm());
        }
        assert_eq!(s.m_norms.len(), 27);
        assert_eq!(s.e_norms.len(), 27);
    }

    #[test]
    fn constant_data_has_zero_perturbations() {
        let t = TridiagonalMatrix::toeplitz(10, 1.0, 2.5, c(0.1, 0.2)).unwrap();
        let s = transfer_spectrum(&t).unwrap();
        assert!(s.m_norms.iter().chain(&s.e_norms).all(|v| *v == 0.0));
    }

    #[test]
    fn zero_offdiagonal_rejected() {
        let t = TridiagonalMatrix::new(vec![1.0; 4], vec![1.0, 0.0, 1.0], c(0.0, 1.0)).unwrap();
        assert!(transfer_spectrum(&t).is_err());
    }
}
