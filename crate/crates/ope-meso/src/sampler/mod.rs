//! Monte-Carlo spectra of the Hermite and Laguerre ensembles at `beta = 2` from
//! their tridiagonal matrix models, and empirical moments of the zoomed linear
//! statistic.
//!
//! Sample `k` of seed `s` draws from ChaCha8 seeded with `s` on stream `k`, so a
//! batch is identical whatever the thread count or the order of evaluation.

mod eigen;
mod io;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensemble::{EdgeSpec, EnsembleSpec, Family};
use crate::error::{Error, Result};

pub use eigen::tridiagonal_eigenvalues;
pub use io::{read_batch, write_batch};

pub const MAX_N: usize = 2000;
pub const MAX_COUNT: usize = 1_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SampleBatch {
    pub ensemble: EnsembleSpec,
    pub n: usize,
    pub seed: u64,
    /// One ascending spectrum per sample.
    pub spectra: Vec<Vec<f64>>,
}

fn check(spec: &EnsembleSpec, n: usize, count: usize) -> Result<()> {
    if !matches!(spec.family(), Family::Hermite | Family::Laguerre) || spec.is_custom() {
        return Err(Error::Unsupported(format!(
            "sampling is available for hermite and laguerre only, not {}",
            spec.family().name()
        )));
    }
    if n == 0 || n > MAX_N || count > MAX_COUNT {
        return Err(Error::InvalidInput(format!(
            "need 1 <= n <= {MAX_N} and count <= {MAX_COUNT}"
        )));
    }
    Ok(())
}

fn chi(rng: &mut ChaCha8Rng, dof: f64) -> f64 {
    ChiSquared::new(dof).expect("positive degrees of freedom").sample(rng).sqrt()
}

/// Spectrum of sample `index`.
///
/// Hermite: diagonal `N(0, 2) / sqrt(2n)`, off-diagonal `k`: `chi_{2(n-k)} / sqrt(2n)`.
/// Laguerre (`x^gamma e^{-n x}`): `B B^T / n` with `B` lower bidiagonal,
/// `B_kk = chi_{2(n+gamma-k+1)} / sqrt 2` and `B_{k+1,k} = chi_{2(n-k)} / sqrt 2`.
pub fn sample_spectrum(spec: &EnsembleSpec, n: usize, seed: u64, index: u64) -> Result<Vec<f64>> {
    check(spec, n, 0)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let nf = n as f64;
    let (diag, off) = match spec.family() {
        Family::Hermite => {
            let scale = (2.0 * nf).sqrt();
            let diag: Vec<f64> = (0..n)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z * 2f64.sqrt() / scale
                })
                .collect();
            let off: Vec<f64> = (1..n).map(|k| chi(&mut rng, 2.0 * (nf - k as f64)) / scale).collect();
            (diag, off)
        }
        _ => {
            let gamma = spec.params().get("gamma").copied().unwrap_or(0.0);
            let r2 = 2f64.sqrt();
            let d: Vec<f64> = (1..=n).map(|k| chi(&mut rng, 2.0 * (nf + gamma - k as f64 + 1.0)) / r2).collect();
            let s: Vec<f64> = (1..n).map(|k| chi(&mut rng, 2.0 * (nf - k as f64)) / r2).collect();
            let diag = (0..n)
                .map(|i| (d[i] * d[i] + if i > 0 { s[i - 1] * s[i - 1] } else { 0.0 }) / nf)
                .collect();
            let off = (0..n - 1).map(|i| d[i] * s[i] / nf).collect();
            (diag, off)
        }
    };
    tridiagonal_eigenvalues(&diag, &off)
}

/// `count` spectra; sample `k` uses stream `k` of `seed`.
pub fn sample_spectra(spec: &EnsembleSpec, n: usize, count: usize, seed: u64) -> Result<SampleBatch> {
    check(spec, n, count)?;
    let spectra = (0..count as u64)
        .into_par_iter()
        .map(|k| sample_spectrum(spec, n, seed, k))
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleBatch {
        ensemble: spec.clone(),
        n,
        seed,
        spectra,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalStatistic {
    pub count: usize,
    pub mean: f64,
    /// unbiased
    pub variance: f64,
    /// standard error of `variance` from the fourth central moment
    pub std_error: f64,
    pub skewness: f64,
}

/// Moments of `X = sum_i f(n^alpha (x_i - x0))` over the given samples, taken in order.
pub fn moments(values: &[f64]) -> Result<EmpiricalStatistic> {
    let count = values.len();
    if count < 2 {
        return Err(Error::InvalidInput("need at least two samples".into()));
    }
    let c = count as f64;
    let mean = values.iter().sum::<f64>() / c;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    let (m2, m3, m4) = (m2 / c, m3 / c, m4 / c);
    let variance = m2 * c / (c - 1.0);
    let std_error = ((m4 - variance * variance * (c - 3.0) / (c - 1.0)) / c).max(0.0).sqrt();
    let skewness = if m2 > 0.0 { m3 / m2.powf(1.5) } else { 0.0 };
    Ok(EmpiricalStatistic {
        count,
        mean,
        variance,
        std_error,
        skewness,
    })
}

fn statistic<F: Fn(f64) -> f64>(spectrum: &[f64], f: &F, edge: &EdgeSpec, n_alpha: f64) -> f64 {
    spectrum.iter().map(|x| f(n_alpha * (x - edge.x0))).sum()
}

pub fn empirical_statistic<F: Fn(f64) -> f64 + Sync>(
    batch: &SampleBatch,
    f: &F,
    edge: &EdgeSpec,
) -> Result<EmpiricalStatistic> {
    let na = (batch.n as f64).powf(edge.alpha);
    let xs: Vec<f64> = batch.spectra.par_iter().map(|s| statistic(s, f, edge, na)).collect();
    moments(&xs)
}

/// Same as sampling a batch and calling [`empirical_statistic`], without
/// keeping the spectra.
pub fn sample_statistic<F: Fn(f64) -> f64 + Sync>(
    spec: &EnsembleSpec,
    n: usize,
    count: usize,
    seed: u64,
    f: &F,
    edge: &EdgeSpec,
) -> Result<EmpiricalStatistic> {
    check(spec, n, count)?;
    let na = (n as f64).powf(edge.alpha);
    let xs = (0..count as u64)
        .into_par_iter()
        .map(|k| Ok(statistic(&sample_spectrum(spec, n, seed, k)?, f, edge, na)))
        .collect::<Result<Vec<f64>>>()?;
    moments(&xs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::Side;

    #[test]
    fn deterministic_and_sorted() {
        let h = EnsembleSpec::hermite();
        let a = sample_spectra(&h, 30, 5, 42).unwrap();
        let b = sample_spectra(&h, 30, 5, 42).unwrap();
        assert_eq!(a, b);
        assert!(a.spectra.iter().all(|s| s.windows(2).all(|w| w[0] <= w[1])));
        assert_ne!(a.spectra[0], a.spectra[1]);
        assert_ne!(a, sample_spectra(&h, 30, 5, 43).unwrap());
    }

    #[test]
    fn semicircle_bulk_fraction() {
        let b = sample_spectra(&EnsembleSpec::hermite(), 200, 1000, 7).unwrap();
        let inside = b.spectra.iter().flatten().filter(|x| x.abs() <= 1.0).count();
        let frac = inside as f64 / (200.0 * 1000.0);
        let want = 1.0 / 3.0 + 3f64.sqrt() / (2.0 * std::f64::consts::PI);
        assert!((frac - want).abs() < 0.02, "{frac}");
        let top = b.spectra.iter().map(|s| s[199]).sum::<f64>() / 1000.0;
        assert!((1.9..=2.05).contains(&top), "{top}");
    }

    #[test]
    fn laguerre_support() {
        let b = sample_spectra(&EnsembleSpec::laguerre(0.0).unwrap(), 150, 200, 3).unwrap();
        let all: Vec<f64> = b.spectra.iter().flatten().cloned().collect();
        assert!(all.iter().all(|&x| x > 0.0));
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        // Marchenko-Pastur with ratio 1 has mean 1
        assert!((mean - 1.0).abs() < 0.01, "{mean}");
        let top = b.spectra.iter().map(|s| s[149]).sum::<f64>() / 200.0;
        assert!((3.8..=4.1).contains(&top), "{top}");
    }

    #[test]
    fn constant_statistic() {
        let b = sample_spectra(&EnsembleSpec::hermite(), 20, 50, 1).unwrap();
        let edge = EdgeSpec::new(Side::Right, 2.0, 0.5, 0.1).unwrap();
        let s = empirical_statistic(&b, &|_| 3.0, &edge).unwrap();
        assert_eq!(s.variance, 0.0);
        assert!((s.mean - 60.0).abs() < 1e-12);
    }

    #[test]
    fn streaming_matches_batch() {
        let h = EnsembleSpec::hermite();
        let edge = EdgeSpec::new(Side::Right, 2.0, 0.4, 0.1).unwrap();
        let f = |x: f64| 1.0 / (1.0 + x * x);
        let a = empirical_statistic(&sample_spectra(&h, 40, 100, 9).unwrap(), &f, &edge).unwrap();
        let b = sample_statistic(&h, 40, 100, 9, &f, &edge).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn unsupported_family() {
        assert!(matches!(
            sample_spectra(&EnsembleSpec::chebyshev2(), 10, 1, 0),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn file_round_trip() {
        let b = sample_spectra(&EnsembleSpec::laguerre(1.0).unwrap(), 12, 4, 5).unwrap();
        let mut buf = Vec::new();
        write_batch(&b, &mut buf).unwrap();
        assert_eq!(read_batch(buf.as_slice()).unwrap(), b);
        assert!(read_batch(&buf[..20]).is_err());
    }
}
