use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Resolvent, TridiagonalMatrix};
use crate::error::{Error, Result};

/// Least-squares line through `(|k - ref|, ln |G_{ref,k}|)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub ref_row: usize,
    pub slope: f64,
    pub intercept: f64,
    /// `-slope`
    pub rate: f64,
    /// `(offset, ln |entry|)` on both sides of the reference row
    pub points: Vec<(f64, f64)>,
}

impl DecayFit {
    /// True when no sampled entry exceeds the diagonal one.
    pub fn diagonal_is_max(&self) -> bool {
        let diag = self
            .points
            .iter()
            .filter(|p| p.0 == 0.0)
            .map(|p| p.1)
            .fold(f64::NEG_INFINITY, f64::max);
        self.points.iter().all(|p| p.1 <= diag)
    }

    /// CSV rows `offset,log_abs`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["offset", "log_abs"])?;
        for (d, l) in &self.points {
            w.write_record([format!("{}", *d as usize), format!("{l:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Fit over offsets `0..=min(ref-1, N-ref)/2`.
pub fn decay_profile(matrix: &TridiagonalMatrix, ref_row: usize) -> Result<DecayFit> {
    let n = matrix.size();
    if ref_row == 0 || ref_row > n {
        return Err(Error::InvalidInput(format!("reference row {ref_row} outside 1..={n}")));
    }
    let reach = (ref_row - 1).min(n - ref_row) / 2;
    decay_profile_with(matrix, ref_row, reach)
}

/// Fit over offsets `0..=max_offset`, on each side where the row exists.
pub fn decay_profile_with(matrix: &TridiagonalMatrix, ref_row: usize, max_offset: usize) -> Result<DecayFit> {
    let n = matrix.size();
    if matrix.shift().im == 0.0 {
        return Err(Error::InvalidInput("decay profile needs Im z != 0".into()));
    }
    if ref_row == 0 || ref_row > n {
        return Err(Error::InvalidInput(format!("reference row {ref_row} outside 1..={n}")));
    }
    let r = Resolvent::new(matrix)?;
    let mut points = Vec::new();
    for d in 0..=max_offset {
        let mut cols = vec![];
        if ref_row > d {
            cols.push(ref_row - d);
        }
        if d > 0 && ref_row + d <= n {
            cols.push(ref_row + d);
        }
        for k in cols {
            let l = r.log_entry(ref_row, k)?;
            if l.is_finite() {
                points.push((d as f64, l));
            }
        }
    }
    if points.len() < 2 {
        return Err(Error::InvalidInput("fewer than two usable entries".into()));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidInput("need at least two distinct offsets".into()));
    }
    let slope = sxy / sxx;
    Ok(DecayFit {
        ref_row,
        slope,
        intercept: my - slope * mx,
        rate: -slope,
        points,
    })
}

/// Edge (`x0 = 2`) and bulk (`x0 = 0`) decay rates of the free chain
/// `a = 1, b = 0` at `z = x0 + eta / n^alpha`, reference row `size / 2`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecayComparison {
    pub n_alpha: f64,
    pub edge_rate: f64,
    pub bulk_rate: f64,
    /// `Re sqrt(-eta) / sqrt(n^alpha)`
    pub predicted_edge_rate: f64,
}

pub fn decay_study(n_alphas: &[f64], eta: Complex64, size: usize) -> Result<Vec<DecayComparison>> {
    if size < 8 {
        return Err(Error::InvalidInput("decay study needs size >= 8".into()));
    }
    n_alphas
        .iter()
        .map(|&na| {
            if !(na > 0.0) {
                return Err(Error::InvalidInput("n^alpha must be positive".into()));
            }
            let rate = |x0: f64| -> Result<f64> {
                let m = TridiagonalMatrix::toeplitz(size, 1.0, 0.0, x0 + eta / na)?;
                Ok(decay_profile(&m, size / 2)?.rate)
            };
            Ok(DecayComparison {
                n_alpha: na,
                edge_rate: rate(2.0)?,
                bulk_rate: rate(0.0)?,
                predicted_edge_rate: (-eta).sqrt().re / na.sqrt(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn free_edge_rate() {
        // interior decay of the free resolvent is |omega_-|^d
        let na = 400.0;
        let eta = Complex64::new(0.0, 1.0);
        let t = TridiagonalMatrix::toeplitz(4000, 1.0, 0.0, 2.0 + eta / na).unwrap();
        let fit = decay_profile_with(&t, 2000, 500).unwrap();
        let want = (-eta).sqrt().re / na.sqrt();
        assert!((fit.rate / want - 1.0).abs() < 0.2, "{} vs {}", fit.rate, want);
        assert!(fit.diagonal_is_max());
    }

    #[test]
    fn csv_rows() {
        let t = TridiagonalMatrix::toeplitz(20, 1.0, 0.0, Complex64::new(0.0, 1.0)).unwrap();
        let fit = decay_profile(&t, 10).unwrap();
        let mut buf = Vec::new();
        fit.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("offset,log_abs\n0,"));
        assert_eq!(text.lines().count(), 1 + fit.points.len());
    }

    #[test]
    fn real_shift_rejected() {
        let t = TridiagonalMatrix::toeplitz(20, 1.0, 0.0, Complex64::new(3.0, 0.0)).unwrap();
        assert!(decay_profile(&t, 10).is_err());
    }
}
