use nalgebra::{DMatrix, Matrix2};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::transfer::{e_matrix, extended_roots, m_matrix, row_sum_norm, Roots};
use super::{Resolvent, TridiagonalMatrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum ToeplitzStatus {
    Applicable,
    NotApplicable { reason: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToeplitzDiagnostics {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
    /// `N max_j ||M_j||`
    pub epsilon1: f64,
    /// `prod_{l=2}^{N-1} |omega_l^- / omega_l^+|`
    pub epsilon2: f64,
    /// `(1 + sqrt 5) c1 / (2 c0)`
    pub kappa: f64,
    pub epsilon1_tilde: f64,
    /// Bound on the prefactor of `T`; infinite when its denominator is not positive.
    pub constant: f64,
    /// `|C(k)|`, `k = 1..=N`
    pub c_values: Vec<f64>,
    /// `|D(j)|`, `j = 1..=N`
    pub d_values: Vec<f64>,
    /// `|Z - 1 - (gamma2/gamma1) prod rho|`, the correction in the exact denominator
    pub denominator_correction: f64,
    /// max over entries of `|K X Y / Z - G| / max |G|`, where `G` is the inverse
    /// from the pivot recursions
    pub reconstruction_error: f64,
}

/// `J^{-1} = T + H` with `T` nearly constant along diagonals and `H` a
/// corner-localized remainder.
///
/// For `j <= k`, with `K_{jk} = (-1)^{k-j} omega^-_{N-1} / (omega^+_{N-1} - omega^-_{N-1})
/// * prod_{l=j}^{k-1} omega^-_l / (a_{k-1} omega^-_j)`, the inverse factors
/// exactly as `K_{jk} X(j) Y(k) / Z` with
/// `X(j) = 1 + r_g prod_{l=2}^j rho_l + D(j)`,
/// `Y(k) = 1 + r_b prod_{l=k}^{N-1} rho_l + C(k)` and `rho_l = omega^-_l / omega^+_l`;
/// `T_{jk} = K_{jk} (1 + D(j)) (1 + C(k)) / Z`. Outside indices use the padding
/// `a_0 := a_1`, `a_N := a_{N-1}`.
#[derive(Clone, Debug)]
pub struct AlmostToeplitzDecomposition {
    pub t: DMatrix<Complex64>,
    pub h: DMatrix<Complex64>,
    pub diagnostics: ToeplitzDiagnostics,
    pub status: ToeplitzStatus,
}

impl AlmostToeplitzDecomposition {
    pub fn is_applicable(&self) -> bool {
        self.status == ToeplitzStatus::Applicable
    }

    /// `Err(NotApplicable)` when the smallness conditions failed.
    pub fn require_applicable(&self) -> Result<()> {
        match &self.status {
            ToeplitzStatus::Applicable => Ok(()),
            ToeplitzStatus::NotApplicable { reason } => Err(Error::NotApplicable(reason.clone())),
        }
    }

    pub fn inverse(&self) -> DMatrix<Complex64> {
        &self.t + &self.h
    }
}

fn diag2(x: Complex64, y: Complex64) -> Matrix2<Complex64> {
    let zero = Complex64::new(0.0, 0.0);
    Matrix2::new(x, zero, zero, y)
}

/// `[1 1] m [1; r]`
fn fold(m: &Matrix2<Complex64>, r: Complex64) -> Complex64 {
    m[(0, 0)] + m[(1, 0)] + (m[(0, 1)] + m[(1, 1)]) * r
}

/// Splits `(J - z)^{-1}` into `T + H`. Always returns the decomposition when the
/// inverse exists; `status` records whether the smallness conditions hold.
/// Needs `N >= 4` and nonzero off-diagonals.
pub fn almost_toeplitz_decompose(matrix: &TridiagonalMatrix) -> Result<AlmostToeplitzDecomposition> {
    let n = matrix.size();
    if n < 4 {
        return Err(Error::InvalidInput("almost-Toeplitz split needs N >= 4".into()));
    }
    let g = Resolvent::new(matrix)?.dense();
    let ext = extended_roots(matrix)?;
    let r = |j: usize| -> &Roots { &ext[j - 1] };
    let a_pad = |j: usize| -> f64 { matrix.a(j.clamp(1, n - 1)) };
    let z = matrix.shift();
    let one = Complex64::new(1.0, 0.0);
    let id = Matrix2::identity();

    let w0 = matrix.b(1) - z;
    let wn = matrix.b(n) - z;
    let gamma1 = r(2).lm * matrix.a(1) - w0;
    let gamma2 = -r(2).lp * matrix.a(1) + w0;
    let r_gamma = gamma2 / gamma1;
    let beta1 = r(n - 1).om * matrix.a(n - 1) - wn;
    let beta2 = -r(n - 1).op * matrix.a(n - 1) + wn;
    let r_beta = beta2 / beta1;
    let delta1 = wn * r(n - 1).lp - matrix.a(n - 1);
    let delta2 = wn * r(n - 1).lm - matrix.a(n - 1);

    // forward: Q_2 = diag(1, rho_2), Q_j = diag(1, rho_j)(I + E_j) Q_{j-1}
    let mut x = vec![one + r_gamma; n + 1];
    let mut d_values = vec![0.0; n];
    let mut q = diag2(one, r(2).rho());
    let mut prod = r(2).rho();
    x[2] = one + r_gamma * prod;
    let mut z_tilde = one;
    for j in 3..=n {
        q = diag2(one, r(j).rho()) * (id + e_matrix(r(j), r(j - 1))) * q;
        prod *= r(j).rho();
        let dj = fold(&(q - diag2(one, prod)), r_gamma);
        d_values[j - 1] = dj.norm();
        x[j] = one + r_gamma * prod + dj;
        if j == n - 1 {
            let dh = q - diag2(one, prod);
            z_tilde = one
                + dh[(0, 0)]
                + dh[(0, 1)] * r_gamma
                + delta2 / delta1 * (dh[(1, 0)] + dh[(1, 1)] * r_gamma + r_gamma * prod);
        }
    }
    let rho_full: Complex64 = (2..n).map(|l| r(l).rho()).product();
    let denominator_correction = (z_tilde - one - r_gamma * rho_full).norm();

    // backward: P_{N-1} = diag(1, rho_{N-1}), P_k = diag(1, rho_k)(I + M_k) P_{k+1}
    let mut y = vec![one + r_beta; n + 1];
    let mut c_values = vec![0.0; n];
    let mut p = diag2(one, r(n - 1).rho());
    let mut prod = r(n - 1).rho();
    y[n - 1] = one + r_beta * prod;
    for k in (1..=n - 2).rev() {
        p = diag2(one, r(k).rho()) * (id + m_matrix(r(k), r(k + 1))) * p;
        prod *= r(k).rho();
        let ck = fold(&(p - diag2(one, prod)), r_beta);
        c_values[k - 1] = ck.norm();
        y[k] = one + r_beta * prod + ck;
    }

    // D(j) and C(k) as the parts of X and Y beyond the leading terms
    let mut dfull = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut prod = one;
    for j in 2..=n {
        prod *= r(j).rho();
        if j > 2 {
            dfull[j] = x[j] - one - r_gamma * prod;
        }
    }
    let mut cfull = vec![Complex64::new(0.0, 0.0); n + 1];
    let mut prod = one;
    for k in (1..=n - 1).rev() {
        prod *= r(k).rho();
        if k < n - 1 {
            cfull[k] = y[k] - one - r_beta * prod;
        }
    }

    let lead = r(n - 1).om / (r(n - 1).op - r(n - 1).om);
    let g_max = g.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut t = DMatrix::<Complex64>::zeros(n, n);
    let mut recon: f64 = 0.0;
    for j in 1..=n {
        // running prod_{l=j}^{k-1} omega^-_l / omega^-_j
        let mut pr = r(j).om.inv();
        for k in j..=n {
            if k > j {
                pr *= r(k - 1).om;
            }
            let sign = if (k - j) % 2 == 0 { 1.0 } else { -1.0 };
            let kk = lead * pr * sign / a_pad(k - 1);
            let exact = kk * x[j] * y[k] / z_tilde;
            recon = recon.max((exact - g[(j - 1, k - 1)]).norm());
            let v = kk * (one + dfull[j]) * (one + cfull[k]) / z_tilde;
            t[(j - 1, k - 1)] = v;
            t[(k - 1, j - 1)] = v;
        }
    }
    let h = &g - &t;

    let c0 = matrix.offdiag().iter().map(|v| v.abs()).fold(f64::INFINITY, f64::min);
    let c1 = (1..=n)
        .map(|j| (matrix.b(j) - z).norm())
        .chain(matrix.offdiag().iter().map(|v| v.abs()))
        .fold(0.0, f64::max);
    let left = ((-matrix.a(1) + r(2).om * w0) / (matrix.a(1) - r(2).op * w0)).norm();
    let right = ((-r(n - 1).op * matrix.a(n - 1) + wn) / (r(n - 1).om * matrix.a(n - 1) - wn)).norm();
    let c2 = 1f64.max(left).max(right);
    let m_max = (2..=n - 2)
        .map(|j| row_sum_norm(&m_matrix(r(j), r(j + 1))))
        .fold(0.0, f64::max);
    let epsilon1 = n as f64 * m_max;
    let epsilon2 = rho_full.norm();
    let kappa = (1.0 + 5f64.sqrt()) * c1 / (2.0 * c0);
    let k2 = kappa * kappa;
    let epsilon1_tilde = 12.0 * (1.0 + k2 * c2 * c2) * k2 * epsilon1;
    let den = 1.0 - k2 * c2 * epsilon2 - epsilon1_tilde;
    let constant = if den > 0.0 {
        2.0 * kappa * (1.0 + epsilon1_tilde).powi(2) / den
    } else {
        f64::INFINITY
    };

    let mut reasons = vec![];
    if let Some(j) = (1..=n).find(|&j| matrix.b(j) - z.re <= 0.0) {
        reasons.push(format!("b_{} - Re z <= 0", j - 1));
    }
    if !(c0 > 0.0) {
        reasons.push("c0 = 0".to_string());
    }
    if !(epsilon1 < 1.0 / (3.0 * k2)) {
        reasons.push(format!("epsilon1 = {epsilon1:.3e} >= 1/(3 kappa^2) = {:.3e}", 1.0 / (3.0 * k2)));
    }
    let lhs = 12.0 * (1.0 + k2 * c2 * c2) * epsilon1 + c2 * epsilon2;
    if !(lhs < 1.0 / k2) {
        reasons.push(format!(
            "12(1 + kappa^2 c2^2) epsilon1 + c2 epsilon2 = {lhs:.3e} >= kappa^-2 = {:.3e}",
            1.0 / k2
        ));
    }
    let status = if reasons.is_empty() {
        ToeplitzStatus::Applicable
    } else {
        ToeplitzStatus::NotApplicable {
            reason: reasons.join("; "),
        }
    };

    Ok(AlmostToeplitzDecomposition {
        t,
        h,
        diagnostics: ToeplitzDiagnostics {
            c0,
            c1,
            c2,
            epsilon1,
            epsilon2,
            kappa,
            epsilon1_tilde,
            constant,
            c_values,
            d_values,
            denominator_correction,
            reconstruction_error: if g_max > 0.0 { recon / g_max } else { recon },
        },
        status,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tridiag::{free_omegas, invert_dense_oracle};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn varying(n: usize, z: Complex64) -> TridiagonalMatrix {
        let diag = (0..n).map(|i| 2.2 + 0.1 * (i as f64 / n as f64)).collect();
        let off = (0..n - 1).map(|i| 1.0 - 0.05 * (i as f64 / n as f64)).collect();
        TridiagonalMatrix::new(diag, off, z).unwrap()
    }

    #[test]
    fn exact_factorization_reconstructs_inverse() {
        for n in [4, 5, 17, 120] {
            let d = almost_toeplitz_decompose(&varying(n, c(0.05, 0.3))).unwrap();
            assert!(d.diagnostics.reconstruction_error < 1e-11, "n={n}: {}", d.diagnostics.reconstruction_error);
        }
    }

    #[test]
    fn t_plus_h_matches_oracle() {
        let m = varying(300, c(0.0, 0.1));
        let d = almost_toeplitz_decompose(&m).unwrap();
        let oracle = invert_dense_oracle(&m).unwrap();
        let scale = oracle.iter().map(|v| v.norm()).fold(0.0, f64::max);
        let dev = (d.inverse() - oracle).iter().map(|v| v.norm()).fold(0.0, f64::max);
        assert!(dev <= 1e-10 * scale, "{dev}");
    }

    #[test]
    fn toeplitz_remainder_is_the_reflection_term() {
        // a = 1, b = 2, z = i/10: the free resolvent with n^alpha = 10, eta = -i
        let n = 200;
        let z = c(0.0, 0.1);
        let d = almost_toeplitz_decompose(&TridiagonalMatrix::toeplitz(n, 1.0, 2.0, z).unwrap()).unwrap();
        d.require_applicable().unwrap();
        let (p, m) = free_omegas(z * 10.0, 10.0);
        for (j, k) in [(1, 1), (2, 5), (4, 4), (10, 13)] {
            let want = -(-m).powi((j + k) as i32) / (p - m);
            let got = d.h[(j - 1, k - 1)];
            assert!((got / want - 1.0).norm() < 1e-6, "({j},{k}) {got} {want}");
        }
        // T is constant along diagonals away from the corners
        let ratio = d.t[(20, 25)] / d.t[(60, 65)];
        assert!((ratio - 1.0).norm() < 1e-9);
    }

    #[test]
    fn slowly_varying_is_applicable() {
        let n = 100;
        let diag = (0..n).map(|i| 2.2 + 1e-5 * (i as f64 / n as f64)).collect();
        let off = (0..n - 1).map(|i| 1.0 - 1e-5 * (i as f64 / n as f64)).collect();
        let m = TridiagonalMatrix::new(diag, off, c(0.0, 0.5)).unwrap();
        let d = almost_toeplitz_decompose(&m).unwrap();
        assert!(d.is_applicable(), "{:?}", d.status);
        assert!(d.diagnostics.constant.is_finite());
        let worst = d.diagnostics.c_values.iter().chain(&d.diagnostics.d_values).cloned().fold(0.0, f64::max);
        assert!(worst <= d.diagnostics.epsilon1_tilde);
    }

    #[test]
    fn not_applicable_is_reported() {
        // b - Re z < 0 everywhere
        let m = TridiagonalMatrix::toeplitz(10, 1.0, -2.0, c(0.0, 0.5)).unwrap();
        let d = almost_toeplitz_decompose(&m).unwrap();
        assert!(!d.is_applicable());
        assert!(matches!(d.require_applicable(), Err(Error::NotApplicable(_))));
        assert!(d.diagnostics.reconstruction_error < 1e-10);
    }
}
