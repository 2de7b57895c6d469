//! Eigenvalues of a real symmetric tridiagonal matrix by implicit QL with
//! Wilkinson shifts.

use crate::error::{Error, Result};

/// Eigenvalues (ascending) of the matrix with diagonal `d` and off-diagonal `e`
/// (`e.len() == d.len() - 1`).
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    if n == 0 || off.len() + 1 != n {
        return Err(Error::InvalidInput("need n >= 1 diagonal and n - 1 off-diagonal entries".into()));
    }
    let mut d = diag.to_vec();
    let mut e = off.to_vec();
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::Singular("tridiagonal QL did not converge".into()));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    d.sort_by(f64::total_cmp);
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    #[test]
    fn free_chain_eigenvalues() {
        // a = 1, b = 0: eigenvalues 2 cos(k pi / (n + 1))
        let n = 30;
        let ev = tridiagonal_eigenvalues(&vec![0.0; n], &vec![1.0; n - 1]).unwrap();
        let mut want: Vec<f64> = (1..=n)
            .map(|k| 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
            .collect();
        want.sort_by(f64::total_cmp);
        for (a, b) in ev.iter().zip(&want) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn matches_dense_solver() {
        let d = [0.3, -1.2, 2.5, 0.0, 4.1, -0.7];
        let e = [1.1, 0.2, -0.9, 3.0, 0.05];
        let m = DMatrix::from_fn(6, 6, |i, k| {
            if i == k {
                d[i]
            } else if i + 1 == k {
                e[i]
            } else if k + 1 == i {
                e[k]
            } else {
                0.0
            }
        });
        let mut want: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().cloned().collect();
        want.sort_by(f64::total_cmp);
        let got = tridiagonal_eigenvalues(&d, &e).unwrap();
        for (a, b) in got.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn scalar_and_split() {
        assert_eq!(tridiagonal_eigenvalues(&[3.0], &[]).unwrap(), vec![3.0]);
        let got = tridiagonal_eigenvalues(&[1.0, 2.0, 5.0], &[0.0, 0.0]).unwrap();
        assert_eq!(got, vec![1.0, 2.0, 5.0]);
        assert!(tridiagonal_eigenvalues(&[1.0, 2.0], &[]).is_err());
    }
}
