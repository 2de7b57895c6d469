//! Limiting edge variance `sigma_f^2 = 1/(8 pi^2) int int ((f(s x^2) - f(s y^2)) / (x - y))^2 dx dy`
//! with `s = +1` at a left edge and `s = -1` at a right edge, plus the weighted
//! Lipschitz norm and rational approximation used to pass from resolvent test
//! functions to compactly supported ones.

mod fit;
mod lipschitz;
pub mod quad;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::ensemble::Side;
use crate::error::{Error, Result};
use crate::testfn::ResolventTestFunction;

pub use fit::{fit_resolvent_approximation, FitResult};
pub use lipschitz::{weighted_lipschitz_norm, Grid};
pub use quad::{integrate, integrate_plane, Domain, Estimate, Tolerance};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Quadrature,
    Residue,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LimitVariance {
    pub value: f64,
    pub method: Method,
    pub side: Side,
    pub est_error: f64,
}

/// Sign `s` in `f(s x^2)`.
fn edge_sign(side: Side) -> f64 {
    match side {
        Side::Left => 1.0,
        Side::Right => -1.0,
    }
}

/// Five-point central difference.
fn derivative<F: Fn(f64) -> f64>(f: &F, u: f64) -> f64 {
    let h = 1e-3 * u.abs().max(1.0);
    (f(u - 2.0 * h) - 8.0 * f(u - h) + 8.0 * f(u + h) - f(u + 2.0 * h)) / (12.0 * h)
}

/// `(g(x) - g(y)) / (x - y)` for `g(x) = f(s x^2)`, switching to `g'` at the midpoint
/// when the two points nearly coincide.
fn divided_difference<F: Fn(f64) -> f64>(f: &F, s: f64, x: f64, y: f64) -> f64 {
    let scale = x.abs().max(y.abs()).max(1.0);
    if (x - y).abs() <= 1e-6 * scale {
        let m = 0.5 * (x + y);
        2.0 * s * m * derivative(f, s * m * m)
    } else {
        (f(s * x * x) - f(s * y * y)) / (x - y)
    }
}

/// `sigma_f^2` by nested adaptive quadrature. `domain_halfwidth = None` covers
/// the whole plane exactly (no truncation); `Some(l)` restricts to `[-l, l]^2`.
pub fn sigma2_quadrature<F: Fn(f64) -> f64 + Sync>(
    f: &F,
    side: Side,
    domain_halfwidth: Option<f64>,
    tol: f64,
) -> Result<LimitVariance> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    let s = edge_sign(side);
    let norm = 1.0 / (8.0 * PI * PI);
    let h = |x: f64, y: f64| {
        let d = divided_difference(f, s, x, y);
        d * d
    };
    let domain = domain_halfwidth.map_or(Domain::Plane, Domain::Square);
    let est = integrate_plane(&h, domain, tol / norm)?;
    Ok(LimitVariance {
        value: est.value * norm,
        method: Method::Quadrature,
        side,
        est_error: est.error * norm,
    })
}

/// `sigma_f^2` for a C^1 compactly supported `f`, straight from the double integral.
pub fn sigma2_for_c1<F: Fn(f64) -> f64 + Sync>(f: &F, side: Side) -> Result<LimitVariance> {
    sigma2_quadrature(f, side, None, 1e-9)
}

/// Closed form `sum_{r,s} c_r c_s / (4 w_r w_s (w_r + w_s)^2)` with `w = sqrt(-eta)`
/// at a left edge and `sqrt(eta)` at a right edge, over the conjugate-closed expansion.
pub fn sigma2_residue(f: &ResolventTestFunction, side: Side) -> LimitVariance {
    let terms: Vec<(Complex64, Complex64)> = f
        .expanded()
        .into_iter()
        .map(|(c, eta)| {
            let w = match side {
                Side::Left => (-eta).sqrt(),
                Side::Right => eta.sqrt(),
            };
            (c, w)
        })
        .collect();
    let mut total = Complex64::new(0.0, 0.0);
    let mut size = 0.0;
    for (cr, wr) in &terms {
        for (cs, ws) in &terms {
            let t = cr * cs / (4.0 * wr * ws * (wr + ws) * (wr + ws));
            size += t.norm();
            total += t;
        }
    }
    LimitVariance {
        value: total.re,
        method: Method::Residue,
        side,
        est_error: total.im.abs() + 16.0 * f64::EPSILON * size,
    }
}

/// `int int ((x + y) / (sqrt(x^4 + 1) sqrt(y^4 + 1)))^2 dx dy` over the plane or a square.
pub fn pi_squared_integral(domain_halfwidth: Option<f64>, tol: f64) -> Result<Estimate> {
    let h = |x: f64, y: f64| {
        let s = x + y;
        s * s / ((x.powi(4) + 1.0) * (y.powi(4) + 1.0))
    };
    integrate_plane(&h, domain_halfwidth.map_or(Domain::Plane, Domain::Square), tol)
}

/// The double integral over the whole plane, which equals `pi^2`.
pub fn pi_squared_check() -> Result<f64> {
    Ok(pi_squared_integral(None, 1e-9)?.value)
}

/// Comparison of `sigma_f^2` and `sigma_h^2` against the Cauchy-Schwarz bound
/// `|sigma_f^2 - sigma_h^2| <= sigma_{f-h} sigma_{f+h} <= ||f-h|| ||f+h|| / 8`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApproximationCheck {
    pub sigma2_f: f64,
    pub sigma2_h: f64,
    pub difference: f64,
    pub norm_diff: f64,
    pub norm_sum: f64,
    /// `||f-h|| ||f+h|| / 8`
    pub bound: f64,
    /// `||f-h||^2 ||f+h||^2 / 16`, the squared form, reported for comparison
    pub squared_form: f64,
    pub holds: bool,
}

pub fn variance_approximation_check<F, H>(f: &F, h: &H, side: Side, grid: &Grid) -> Result<ApproximationCheck>
where
    F: Fn(f64) -> f64 + Sync,
    H: Fn(f64) -> f64 + Sync,
{
    let sf = sigma2_quadrature(f, side, None, 1e-10)?;
    let sh = sigma2_quadrature(h, side, None, 1e-10)?;
    let norm_diff = weighted_lipschitz_norm(&|x| f(x) - h(x), grid);
    let norm_sum = weighted_lipschitz_norm(&|x| f(x) + h(x), grid);
    let difference = (sf.value - sh.value).abs();
    let bound = norm_diff * norm_sum / 8.0;
    Ok(ApproximationCheck {
        sigma2_f: sf.value,
        sigma2_h: sh.value,
        difference,
        norm_diff,
        norm_sum,
        bound,
        squared_form: (norm_diff * norm_sum).powi(2) / 16.0,
        holds: difference <= bound + sf.est_error + sh.est_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn im_g(x: f64) -> f64 {
        1.0 / (x * x + 1.0)
    }

    fn re_g(x: f64) -> f64 {
        x / (x * x + 1.0)
    }

    #[test]
    fn residue_constants() {
        let im: ResolventTestFunction = "im:1/(x-i)".parse().unwrap();
        let re: ResolventTestFunction = "re:1/(x-i)".parse().unwrap();
        for side in [Side::Left, Side::Right] {
            assert!((sigma2_residue(&im, side).value - 3.0 / 32.0).abs() < 1e-15);
            assert!((sigma2_residue(&re, side).value - 1.0 / 32.0).abs() < 1e-15);
        }
    }

    #[test]
    fn quadrature_constants() {
        for side in [Side::Left, Side::Right] {
            let a = sigma2_quadrature(&im_g, side, None, 1e-9).unwrap();
            let b = sigma2_quadrature(&re_g, side, None, 1e-9).unwrap();
            assert!((a.value - 3.0 / 32.0).abs() < 1e-8, "{a:?}");
            assert!((b.value - 1.0 / 32.0).abs() < 1e-8, "{b:?}");
        }
    }

    #[test]
    fn scaling_invariance() {
        let base = sigma2_quadrature(&im_g, Side::Right, None, 1e-10).unwrap().value;
        for a in [0.5, 2.0, 3.0] {
            let scaled = sigma2_quadrature(&|x: f64| im_g(a * a * x), Side::Right, None, 1e-10).unwrap().value;
            assert!((scaled - base).abs() < 1e-8, "a={a}");
        }
    }

    #[test]
    fn not_translation_invariant() {
        let base = sigma2_quadrature(&im_g, Side::Left, None, 1e-9).unwrap().value;
        let moved = sigma2_quadrature(&|x: f64| im_g(x - 1.0), Side::Left, None, 1e-9).unwrap().value;
        assert!((base - moved).abs() > 1e-3);
    }

    #[test]
    fn pi_squared() {
        assert!((pi_squared_check().unwrap() - PI * PI).abs() < 1e-6);
        let half = pi_squared_integral(Some(1.0), 1e-9).unwrap().value;
        let full = pi_squared_integral(Some(2.0), 1e-9).unwrap().value;
        assert!((full - half).abs() > 1e-6);
        assert!((full - PI * PI).abs() > 1e-6);
    }

    #[test]
    fn hat_is_positive_and_bounded() {
        let hat = |x: f64| (1.0 - (2.0 * x - 1.0).abs()).max(0.0);
        let v = sigma2_for_c1(&hat, Side::Left).unwrap();
        assert!(v.value > 0.0);
        let norm = weighted_lipschitz_norm(&hat, &Grid::new(-4.0, 4.0, 1600).unwrap());
        assert!(v.value <= norm * norm / 8.0);
    }
}
