//! Adaptive Gauss-Kronrod (7/15) quadrature in one and two dimensions.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use rayon::prelude::*;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
// Gauss weights on the odd Kronrod nodes 1, 3, 5 and the centre
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub error: f64,
    pub evals: usize,
}

/// Absolute and relative targets; the run stops when `error <= max(abs, rel |value|)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl Tolerance {
    pub fn absolute(abs: f64) -> Self {
        Tolerance {
            abs,
            rel: 0.0,
            max_intervals: 4000,
        }
    }

    fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }
}

fn rule<F: Fn(f64) -> f64 + Sync>(f: &F, a: f64, b: f64, parallel: bool) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let xs: Vec<f64> = (0..15)
        .map(|k| match k.cmp(&7) {
            Ordering::Less => c - h * XGK[k],
            Ordering::Equal => c,
            Ordering::Greater => c + h * XGK[14 - k],
        })
        .collect();
    let ys: Vec<f64> = if parallel {
        xs.par_iter().map(|&x| f(x)).collect()
    } else {
        xs.iter().map(|&x| f(x)).collect()
    };
    let mut kron = WGK[7] * ys[7];
    let mut gauss = WG[3] * ys[7];
    for k in 0..7 {
        let pair = ys[k] + ys[14 - k];
        kron += WGK[k] * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn adaptive<F: Fn(f64) -> f64 + Sync>(
    f: &F,
    breaks: &[f64],
    tol: Tolerance,
    parallel: bool,
) -> Result<Estimate> {
    let mut heap = BinaryHeap::new();
    let mut evals = 0;
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (value, error) = rule(f, w[0], w[1], parallel);
            evals += 15;
            heap.push(Piece { a: w[0], b: w[1], value, error });
        }
    }
    loop {
        let value: f64 = heap.iter().map(|p| p.value).sum();
        let error: f64 = heap.iter().map(|p| p.error).sum();
        if error <= tol.target(value) {
            return Ok(Estimate { value, error, evals });
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::NoConvergence {
                estimate: error,
                tol: tol.target(value),
            });
        }
        let worst = heap.pop().expect("at least one interval");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // interval exhausted at double precision
            return Err(Error::NoConvergence {
                estimate: error,
                tol: tol.target(value),
            });
        }
        for (a, b) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = rule(f, a, b, parallel);
            evals += 15;
            heap.push(Piece { a, b, value, error });
        }
    }
}

/// `int_a^b f` with breakpoints `a = breaks[0] < .. < breaks[last] = b`.
pub fn integrate<F: Fn(f64) -> f64 + Sync>(f: &F, breaks: &[f64], tol: Tolerance) -> Result<Estimate> {
    if breaks.len() < 2 {
        return Err(Error::InvalidInput("need at least two breakpoints".into()));
    }
    adaptive(f, breaks, tol, false)
}

/// Integration domain for [`integrate_plane`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Domain {
    /// All of `R^2`, through `x = tan(theta)` on each axis.
    Plane,
    /// `[-l, l]^2`.
    Square(f64),
}

/// `int int h(x, y) dx dy` by nested adaptive quadrature. The inner integral
/// splits at `0` and at the diagonal `y = x`, where the integrands of this crate
/// have removable singularities. Outer nodes run in parallel.
pub fn integrate_plane<H: Fn(f64, f64) -> f64 + Sync>(h: &H, domain: Domain, tol: f64) -> Result<Estimate> {
    let (lim, map): (f64, fn(f64) -> (f64, f64)) = match domain {
        Domain::Plane => (FRAC_PI_2, |t| {
            let c = t.cos();
            (t.tan(), 1.0 / (c * c))
        }),
        Domain::Square(l) => {
            if !(l > 0.0) {
                return Err(Error::InvalidInput("square half-width must be positive".into()));
            }
            (l, |t| (t, 1.0))
        }
    };
    let inner_tol = Tolerance::absolute(tol / (20.0 * lim));
    let worst_inner = std::sync::Mutex::new(0.0f64);
    let failure = std::sync::Mutex::new(None);
    let outer = |s: f64| {
        let (x, jx) = map(s);
        let g = |t: f64| {
            let (y, jy) = map(t);
            h(x, y) * jx * jy
        };
        let mut breaks = vec![-lim, 0.0, lim];
        if s != 0.0 {
            breaks.insert(if s < 0.0 { 1 } else { 2 }, s);
        }
        match adaptive(&g, &breaks, inner_tol, false) {
            Ok(e) => {
                let mut w = worst_inner.lock().expect("lock");
                *w = w.max(e.error);
                e.value
            }
            Err(e) => {
                failure.lock().expect("lock").get_or_insert(e);
                f64::NAN
            }
        }
    };
    let est = adaptive(
        &outer,
        &[-lim, 0.0, lim],
        Tolerance {
            abs: tol / 2.0,
            rel: 0.0,
            max_intervals: 2000,
        },
        true,
    );
    if let Some(e) = failure.into_inner().expect("lock") {
        return Err(e);
    }
    let est = est?;
    let inner = worst_inner.into_inner().expect("lock") * 2.0 * lim;
    Ok(Estimate {
        value: est.value,
        error: est.error + inner,
        evals: est.evals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let e = integrate(&|x: f64| x.powi(6) - 3.0 * x, &[0.0, 2.0], Tolerance::absolute(1e-14)).unwrap();
        assert!((e.value - (128.0 / 7.0 - 6.0)).abs() < 1e-13);
    }

    #[test]
    fn kink_resolved_adaptively() {
        let e = integrate(&|x: f64| (x - 0.3).abs(), &[0.0, 1.0], Tolerance::absolute(1e-12)).unwrap();
        assert!((e.value - 0.29).abs() < 1e-12);
    }

    #[test]
    fn plane_gaussian() {
        let e = integrate_plane(&|x: f64, y: f64| (-(x * x + y * y)).exp(), Domain::Plane, 1e-10).unwrap();
        assert!((e.value - std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn stalls_report_no_convergence() {
        let tol = Tolerance {
            abs: 1e-14,
            rel: 0.0,
            max_intervals: 4,
        };
        let r = integrate(&|x: f64| 1.0 / x.sqrt(), &[0.0, 1.0], tol);
        assert!(matches!(r, Err(Error::NoConvergence { .. })));
    }
}
