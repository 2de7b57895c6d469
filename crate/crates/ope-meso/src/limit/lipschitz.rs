use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform grid `lo, lo + h, .., hi` with `intervals` steps. Refinement by
/// doubling keeps the old points, so grid suprema never decrease under it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub lo: f64,
    pub hi: f64,
    pub intervals: usize,
}

impl Grid {
    pub fn new(lo: f64, hi: f64, intervals: usize) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) || intervals == 0 {
            return Err(Error::InvalidInput(format!("bad grid [{lo}, {hi}] / {intervals}")));
        }
        Ok(Grid { lo, hi, intervals })
    }

    pub fn points(&self) -> Vec<f64> {
        let h = (self.hi - self.lo) / self.intervals as f64;
        (0..=self.intervals).map(|k| self.lo + k as f64 * h).collect()
    }

    pub fn refined(&self) -> Grid {
        Grid {
            intervals: 2 * self.intervals,
            ..*self
        }
    }
}

/// `sup sqrt(1+x^2) sqrt(1+y^2) |f(x) - f(y)| / |x - y|` over grid pairs, with
/// `(1 + x^2) |f'(x)|` on the diagonal (five-point differences, fixed step).
pub fn weighted_lipschitz_norm<F: Fn(f64) -> f64 + Sync>(f: &F, grid: &Grid) -> f64 {
    let xs = grid.points();
    let vals: Vec<f64> = xs.iter().map(|&x| f(x)).collect();
    let wts: Vec<f64> = xs.iter().map(|&x| (1.0 + x * x).sqrt()).collect();
    (0..xs.len())
        .into_par_iter()
        .map(|i| {
            let x = xs[i];
            let h = 1e-5 * x.abs().max(1.0);
            let d = (f(x - 2.0 * h) - 8.0 * f(x - h) + 8.0 * f(x + h) - f(x + 2.0 * h)) / (12.0 * h);
            let mut best = (1.0 + x * x) * d.abs();
            for k in i + 1..xs.len() {
                let q = wts[i] * wts[k] * (vals[i] - vals[k]).abs() / (xs[k] - x);
                best = best.max(q);
            }
            best
        })
        .reduce(|| 0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_function() {
        assert_eq!(weighted_lipschitz_norm(&|_| 0.0, &Grid::new(-5.0, 5.0, 100).unwrap()), 0.0);
    }

    #[test]
    fn refinement_is_monotone() {
        let f = |x: f64| 1.0 / (1.0 + x * x);
        let mut g = Grid::new(-40.0, 40.0, 400).unwrap();
        let mut last = 0.0;
        for _ in 0..3 {
            let v = weighted_lipschitz_norm(&f, &g);
            assert!(v >= last);
            last = v;
            g = g.refined();
        }
    }

    #[test]
    fn not_scale_invariant() {
        let g = Grid::new(-40.0, 40.0, 1600).unwrap();
        let a = weighted_lipschitz_norm(&|x: f64| 1.0 / (1.0 + x * x), &g);
        let b = weighted_lipschitz_norm(&|x: f64| 1.0 / (1.0 + 16.0 * x * x), &g);
        assert!((a - b).abs() > 0.1);
    }

    #[test]
    fn bad_grid() {
        assert!(Grid::new(1.0, 1.0, 4).is_err());
        assert!(Grid::new(0.0, 1.0, 0).is_err());
    }
}
