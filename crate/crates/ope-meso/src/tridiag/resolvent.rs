use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{invert_dense_oracle, TridiagonalMatrix, ORACLE_MAX_N};
use crate::error::{Error, Result};

/// Products of more than this many ratios are assembled from log-space prefix sums.
const DIRECT_SPAN: usize = 64;
/// Magnitudes below this are flushed to zero in dense assembly.
const FLUSH: f64 = 1e-300;

/// Entries of `(J - z)^{-1}` from the forward pivots
/// `delta_1 = b_0 - z`, `delta_j = b_{j-1} - z - a_{j-1}^2 / delta_{j-1}`
/// and the backward pivots
/// `d_N = b_{N-1} - z`, `d_j = b_{j-1} - z - a_j^2 / d_{j+1}`.
///
/// `G_kk = 1 / (delta_k - a_k^2 / d_{k+1})` and, for `j < k`,
/// `G_jk = G_kk * prod_{l=j}^{k-1} (-a_l / delta_l)`.
#[derive(Clone, Debug)]
pub struct Resolvent {
    off: Vec<f64>,
    /// `delta_1..delta_N`
    forward: Vec<Complex64>,
    /// `d_1..d_N`
    backward: Vec<Complex64>,
    /// `G_11..G_NN`
    diagonal: Vec<Complex64>,
    /// `-a_l / delta_l`, `l = 1..N-1`
    ratio: Vec<Complex64>,
    /// prefix sums over `ratio` of log-magnitude, phase and exact zeros
    log_abs: Vec<f64>,
    phase: Vec<f64>,
    zeros: Vec<usize>,
}

fn pivot_ok(p: Complex64) -> bool {
    p.is_finite() && p.norm() > f64::MIN_POSITIVE
}

impl Resolvent {
    /// Runs both pivot recursions. With a real shift the dense oracle must first
    /// confirm the matrix is invertible.
    pub fn new(matrix: &TridiagonalMatrix) -> Result<Self> {
        let n = matrix.size();
        let z = matrix.shift();
        if z.im == 0.0 {
            if n > ORACLE_MAX_N {
                return Err(Error::Singular(format!(
                    "real shift with N = {n} > {ORACLE_MAX_N}: invertibility cannot be confirmed"
                )));
            }
            invert_dense_oracle(matrix)?;
        }
        let b = matrix.diag();
        let a = matrix.offdiag();
        let mut forward = Vec::with_capacity(n);
        forward.push(b[0] - z);
        for j in 1..n {
            let prev = forward[j - 1];
            if !pivot_ok(prev) {
                return Err(Error::Singular(format!("forward pivot {j} vanishes")));
            }
            forward.push(b[j] - z - a[j - 1] * a[j - 1] / prev);
        }
        let mut backward = vec![Complex64::new(0.0, 0.0); n];
        backward[n - 1] = b[n - 1] - z;
        for j in (0..n - 1).rev() {
            let next = backward[j + 1];
            if !pivot_ok(next) {
                return Err(Error::Singular(format!("backward pivot {} vanishes", j + 2)));
            }
            backward[j] = b[j] - z - a[j] * a[j] / next;
        }
        let mut diagonal = Vec::with_capacity(n);
        for k in 0..n {
            let den = if k + 1 < n {
                forward[k] - a[k] * a[k] / backward[k + 1]
            } else {
                forward[k]
            };
            if !pivot_ok(den) {
                return Err(Error::Singular(format!("diagonal entry {} is unbounded", k + 1)));
            }
            diagonal.push(den.inv());
        }
        let ratio: Vec<Complex64> = (0..n - 1).map(|l| -a[l] / forward[l]).collect();
        let mut log_abs = vec![0.0; n];
        let mut phase = vec![0.0; n];
        let mut zeros = vec![0usize; n];
        for l in 0..n - 1 {
            let r = ratio[l];
            if r.norm() == 0.0 {
                log_abs[l + 1] = log_abs[l];
                phase[l + 1] = phase[l];
                zeros[l + 1] = zeros[l] + 1;
            } else {
                log_abs[l + 1] = log_abs[l] + r.norm().ln();
                phase[l + 1] = phase[l] + r.arg();
                zeros[l + 1] = zeros[l];
            }
        }
        Ok(Resolvent {
            off: a.to_vec(),
            forward,
            backward,
            diagonal,
            ratio,
            log_abs,
            phase,
            zeros,
        })
    }

    pub fn size(&self) -> usize {
        self.diagonal.len()
    }

    pub fn forward_pivots(&self) -> &[Complex64] {
        &self.forward
    }

    pub fn backward_pivots(&self) -> &[Complex64] {
        &self.backward
    }

    fn check(&self, j: usize, k: usize) -> Result<()> {
        let n = self.size();
        if j == 0 || k == 0 || j > n || k > n {
            return Err(Error::InvalidInput(format!(
                "entry ({j}, {k}) outside 1..={n}"
            )));
        }
        Ok(())
    }

    /// `(J - z)^{-1}_{jk}`, 1-based. Symmetric by construction.
    pub fn entry(&self, j: usize, k: usize) -> Result<Complex64> {
        self.check(j, k)?;
        let (j, k) = (j.min(k), j.max(k));
        let g = self.diagonal[k - 1];
        if k - j <= DIRECT_SPAN {
            return Ok(self.ratio[j - 1..k - 1].iter().fold(g, |acc, r| acc * r));
        }
        if self.zeros[k - 1] != self.zeros[j - 1] {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let mag = self.log_abs[k - 1] - self.log_abs[j - 1];
        let arg = self.phase[k - 1] - self.phase[j - 1];
        Ok(g * Complex64::from_polar(mag.exp(), arg))
    }

    /// `ln |(J - z)^{-1}_{jk}|`; never underflows. `-inf` for exact zeros.
    pub fn log_entry(&self, j: usize, k: usize) -> Result<f64> {
        self.check(j, k)?;
        let (j, k) = (j.min(k), j.max(k));
        if self.zeros[k - 1] != self.zeros[j - 1] {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.diagonal[k - 1].norm().ln() + self.log_abs[k - 1] - self.log_abs[j - 1])
    }

    /// Row `j` of the inverse.
    pub fn row(&self, j: usize) -> Result<Vec<Complex64>> {
        self.check(j, j)?;
        let n = self.size();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        out[j - 1] = self.diagonal[j - 1];
        // k > j: G_jk = G_kk * prod_{l=j}^{k-1} ratio_l
        let mut p = Complex64::new(1.0, 0.0);
        for k in j + 1..=n {
            p *= self.ratio[k - 2];
            if p.norm() < FLUSH {
                break;
            }
            out[k - 1] = self.diagonal[k - 1] * p;
        }
        // k < j: G_kj = G_jj * prod_{l=k}^{j-1} ratio_l
        let mut g = self.diagonal[j - 1];
        for k in (1..j).rev() {
            g *= self.ratio[k - 1];
            if g.norm() < FLUSH {
                break;
            }
            out[k - 1] = g;
        }
        Ok(out)
    }

    /// Visits every entry of the upper triangle, column by column going up,
    /// stopping a column once its entries fall below the flush threshold.
    fn for_each_upper(&self, mut visit: impl FnMut(usize, usize, Complex64)) {
        for k in 0..self.size() {
            let mut g = self.diagonal[k];
            visit(k, k, g);
            for i in (0..k).rev() {
                g *= self.ratio[i];
                if g.norm() < FLUSH {
                    break;
                }
                visit(i, k, g);
            }
        }
    }

    /// The full inverse, `O(N^2)`.
    pub fn dense(&self) -> DMatrix<Complex64> {
        let n = self.size();
        let mut m = DMatrix::zeros(n, n);
        self.for_each_upper(|i, k, g| {
            m[(i, k)] = g;
            m[(k, i)] = g;
        });
        m
    }

    /// `out += Re(coef * (J - z)^{-1})`.
    pub fn add_real_part(&self, coef: Complex64, out: &mut DMatrix<f64>) {
        let n = self.size();
        assert_eq!(out.shape(), (n, n), "accumulator shape");
        self.for_each_upper(|i, k, g| {
            let v = (coef * g).re;
            out[(i, k)] += v;
            if i != k {
                out[(k, i)] += v;
            }
        });
    }

    /// `(J - z)^{-1} v` by forward elimination and back substitution with the
    /// forward pivots.
    pub fn solve(&self, v: &DVector<Complex64>) -> DVector<Complex64> {
        let n = self.size();
        assert_eq!(v.len(), n, "vector length");
        let mut y = v.clone();
        for i in 1..n {
            let m = self.off[i - 1] / self.forward[i - 1];
            let prev = y[i - 1];
            y[i] -= m * prev;
        }
        y[n - 1] /= self.forward[n - 1];
        for i in (0..n - 1).rev() {
            let next = y[i + 1];
            y[i] = (y[i] - self.off[i] * next) / self.forward[i];
        }
        y
    }

    /// Spectral norm of `(J - z)^{-1}` by power iteration on `G^H G`. The matrix
    /// is complex symmetric, so `G^H v = conj(G conj(v))`.
    pub fn operator_norm_estimate(&self, iterations: usize) -> f64 {
        let n = self.size();
        let mut v = DVector::from_fn(n, |i, _| Complex64::new(1.0 + 0.1 * (i % 7) as f64, 0.0));
        let mut est = 0.0;
        for _ in 0..iterations.max(1) {
            let norm = v.norm();
            if norm == 0.0 {
                return 0.0;
            }
            v /= Complex64::new(norm, 0.0);
            let w = self.solve(&v);
            est = w.norm();
            let back = self.solve(&w.map(|c| c.conj())).map(|c| c.conj());
            v = back;
        }
        est
    }
}

/// `(J - z)^{-1}_{jk}` for a single entry, `O(N)`.
pub fn invert_entry(matrix: &TridiagonalMatrix, j: usize, k: usize) -> Result<Complex64> {
    Resolvent::new(matrix)?.entry(j, k)
}
