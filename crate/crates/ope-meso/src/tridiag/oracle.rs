use nalgebra::DMatrix;
use num_complex::Complex64;

use super::TridiagonalMatrix;
use crate::error::{Error, Result};

/// Largest size accepted by [`invert_dense_oracle`].
pub const ORACLE_MAX_N: usize = 5000;

fn norm1(m: &DMatrix<Complex64>) -> f64 {
    m.column_iter()
        .map(|c| c.iter().map(|v| v.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Full inverse through a dense LU factorization. Independent of the pivot
/// recursions; meant as a test oracle. Fails with `Singular` when the
/// factorization breaks down or the 1-norm condition number exceeds `1/eps`.
pub fn invert_dense_oracle(matrix: &TridiagonalMatrix) -> Result<DMatrix<Complex64>> {
    let n = matrix.size();
    if n > ORACLE_MAX_N {
        return Err(Error::InvalidInput(format!(
            "dense oracle limited to N <= {ORACLE_MAX_N}, got {n}"
        )));
    }
    let z = matrix.shift();
    let mut dense = DMatrix::<Complex64>::zeros(n, n);
    for i in 0..n {
        dense[(i, i)] = matrix.diag()[i] - z;
        if i + 1 < n {
            let a = Complex64::new(matrix.offdiag()[i], 0.0);
            dense[(i, i + 1)] = a;
            dense[(i + 1, i)] = a;
        }
    }
    let forward_norm = norm1(&dense);
    let inverse = dense
        .lu()
        .try_inverse()
        .ok_or_else(|| Error::Singular("LU factorization found a zero pivot".into()))?;
    let cond = forward_norm * norm1(&inverse);
    if !cond.is_finite() || cond > 1.0 / f64::EPSILON {
        return Err(Error::Singular(format!("condition number {cond:.3e} exceeds 1/eps")));
    }
    Ok(inverse)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity() {
        // J = I + 1, z = 1
        let t = TridiagonalMatrix::new(vec![2.0; 5], vec![0.0; 4], Complex64::new(1.0, 0.0)).unwrap();
        let inv = invert_dense_oracle(&t).unwrap();
        assert_eq!(inv, DMatrix::identity(5, 5));
    }

    #[test]
    fn ill_conditioned_is_flagged() {
        let mut diag: Vec<f64> = (0..8).map(|i| 1.0 / (1.0 + i as f64)).collect();
        diag[7] = 1e-17;
        let t = TridiagonalMatrix::new(diag, vec![0.0; 7], Complex64::new(0.0, 0.0)).unwrap();
        assert!(matches!(invert_dense_oracle(&t), Err(Error::Singular(_))));
    }
}
