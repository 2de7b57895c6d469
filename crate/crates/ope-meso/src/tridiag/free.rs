use num_complex::Complex64;

use crate::ensemble::Side;
use crate::error::{Error, Result};

/// Roots `omega_+`, `omega_-` of `w^2 - (2 - eta / n^alpha) w + 1 = 0`,
/// ordered so that `|omega_+| >= |omega_-|`; `omega_- = 1 / omega_+`.
pub fn free_omegas(eta: Complex64, n_alpha: f64) -> (Complex64, Complex64) {
    let w = 2.0 - eta / n_alpha;
    let s = (w * w - 4.0).sqrt();
    let (p, m) = ((w + s) / 2.0, (w - s) / 2.0);
    if p.norm() >= m.norm() {
        (p, m)
    } else {
        (m, p)
    }
}

/// Entry `(j, k)` of the resolvent of the free Jacobi matrix (`a = 1`, `b = 0`)
/// on the half line, zoomed at the edge `x0 = -2` (left) or `x0 = 2` (right):
/// `((J - x0 - eta/n^alpha)^{-1})_{jk}`.
///
/// Left: `((-omega_-)^{|j-k|} - (-omega_-)^{j+k}) / (omega_+ - omega_-)`.
/// Right: `-(-1)^{j+k}` times the left value at `-eta`.
pub fn free_resolvent_entry(eta: Complex64, n_alpha: f64, side: Side, j: usize, k: usize) -> Result<Complex64> {
    if j == 0 || k == 0 {
        return Err(Error::InvalidInput("indices start at 1".into()));
    }
    if eta.im == 0.0 || !(n_alpha > 0.0) {
        return Err(Error::InvalidInput("need Im eta != 0 and n^alpha > 0".into()));
    }
    let left = |eta: Complex64| {
        let (p, m) = free_omegas(eta, n_alpha);
        let q = -m;
        (q.powi(j.abs_diff(k) as i32) - q.powi((j + k) as i32)) / (p - m)
    };
    Ok(match side {
        Side::Left => left(eta),
        Side::Right => {
            let sign = if (j + k) % 2 == 0 { -1.0 } else { 1.0 };
            sign * left(-eta)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tridiag::{Resolvent, TridiagonalMatrix};

    #[test]
    fn symmetric() {
        let eta = Complex64::new(0.3, 1.0);
        for side in [Side::Left, Side::Right] {
            let a = free_resolvent_entry(eta, 7.0, side, 3, 11).unwrap();
            let b = free_resolvent_entry(eta, 7.0, side, 11, 3).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn matches_truncation_at_corner() {
        let eta = Complex64::new(0.0, 1.0);
        for (side, x0) in [(Side::Left, -2.0), (Side::Right, 2.0)] {
            let t = TridiagonalMatrix::toeplitz(2000, 1.0, 0.0, x0 + eta).unwrap();
            let r = Resolvent::new(&t).unwrap();
            for (j, k) in [(1, 1), (1, 2), (3, 7), (10, 10)] {
                let want = free_resolvent_entry(eta, 1.0, side, j, k).unwrap();
                assert!((r.entry(j, k).unwrap() - want).norm() < 1e-10, "{side} {j} {k}");
            }
        }
    }
}
