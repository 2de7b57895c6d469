use std::io::Write;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::lipschitz::{weighted_lipschitz_norm, Grid};
use crate::error::{Error, Result};
use crate::testfn::ResolventTestFunction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub function: ResolventTestFunction,
    /// `||f - h||` in the weighted Lipschitz norm on the fit grid
    pub achieved_norm: f64,
    pub condition: f64,
}

impl FitResult {
    /// CSV `pole_re,pole_im,weight` (weights are real).
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["pole_re", "pole_im", "weight"])?;
        for (p, d) in self.function.poles().iter().zip(self.function.weights()) {
            w.write_record([format!("{:.16e}", p.re), format!("{:.16e}", p.im), format!("{:.16e}", d.re)])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Least-squares fit of `h(x) = Im sum_r d_r / (x - lambda_r)` to `f`, with the
/// poles fixed at `lambda_r = x_r + i height` on a uniform grid over
/// `1.5 x support` (same centre). Rows of the system are the grid values
/// weighted by `1 + x^2` and the neighbour slopes weighted by
/// `sqrt(1 + x^2) sqrt(1 + y^2)`, the two pieces of the weighted Lipschitz norm.
pub fn fit_resolvent_approximation<F: Fn(f64) -> f64 + Sync>(
    f: &F,
    poles: usize,
    height: f64,
    support: (f64, f64),
    grid: &Grid,
) -> Result<FitResult> {
    if poles == 0 || !(height > 0.0) || !(support.0 < support.1) {
        return Err(Error::InvalidInput("need poles >= 1, height > 0 and a nonempty support".into()));
    }
    let centre = 0.5 * (support.0 + support.1);
    let half = 0.75 * (support.1 - support.0);
    let lambdas: Vec<Complex64> = (0..poles)
        .map(|r| {
            let x = if poles == 1 {
                centre
            } else {
                centre - half + 2.0 * half * r as f64 / (poles - 1) as f64
            };
            Complex64::new(x, height)
        })
        .collect();
    let basis = |r: usize, x: f64| (1.0 / (x - lambdas[r])).im;
    let xs = grid.points();
    let rows = 2 * xs.len() - 1;
    let mut a = DMatrix::zeros(rows, poles);
    let mut b = DVector::zeros(rows);
    for (k, &x) in xs.iter().enumerate() {
        let w = 1.0 + x * x;
        b[k] = w * f(x);
        for r in 0..poles {
            a[(k, r)] = w * basis(r, x);
        }
    }
    for k in 0..xs.len() - 1 {
        let (x, y) = (xs[k], xs[k + 1]);
        let w = (1.0 + x * x).sqrt() * (1.0 + y * y).sqrt() / (y - x);
        let row = xs.len() + k;
        b[row] = w * (f(y) - f(x));
        for r in 0..poles {
            a[(row, r)] = w * (basis(r, y) - basis(r, x));
        }
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if !(condition <= 1e12) {
        return Err(Error::IllConditioned(condition));
    }
    let d = svd.solve(&b, 0.0).map_err(|e| Error::Singular(e.to_string()))?;
    let function = ResolventTestFunction::from_real(lambdas, d.as_slice())?;
    let achieved_norm = weighted_lipschitz_norm(&|x| f(x) - function.eval(x), grid);
    Ok(FitResult {
        function,
        achieved_norm,
        condition,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bump(x: f64) -> f64 {
        if x.abs() < 1.0 {
            (-1.0 / (1.0 - x * x)).exp()
        } else {
            0.0
        }
    }

    #[test]
    fn exact_representation_recovered() {
        let grid = Grid::new(-6.0, 6.0, 1200).unwrap();
        // poles of a 5-pole fit over support [-1, 1]: x_r = -1.5 + 0.75 r
        let truth = ResolventTestFunction::from_real(
            vec![Complex64::new(-0.75, 0.5), Complex64::new(0.75, 0.5)],
            &[0.3, -1.2],
        )
        .unwrap();
        let r = fit_resolvent_approximation(&|x| truth.eval(x), 5, 0.5, (-1.0, 1.0), &grid).unwrap();
        assert!(r.achieved_norm <= 1e-8, "{}", r.achieved_norm);
    }

    #[test]
    fn bump_fit_improves_with_poles() {
        let grid = Grid::new(-6.0, 6.0, 1200).unwrap();
        let norms: Vec<f64> = [10, 20, 40]
            .iter()
            .map(|&m| fit_resolvent_approximation(&bump, m, 0.25, (-1.0, 1.0), &grid).unwrap().achieved_norm)
            .collect();
        let base = weighted_lipschitz_norm(&bump, &grid);
        assert!(norms[1] <= 0.1 * base, "{norms:?} vs {base}");
        assert!(norms[0] >= norms[1] && norms[1] >= norms[2], "{norms:?}");
    }

    #[test]
    fn ill_conditioned_reported() {
        let grid = Grid::new(-6.0, 6.0, 600).unwrap();
        let r = fit_resolvent_approximation(&bump, 200, 5.0, (-1.0, 1.0), &grid);
        assert!(matches!(r, Err(Error::IllConditioned(_))));
    }
}
