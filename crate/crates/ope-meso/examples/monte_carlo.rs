//! Monte-Carlo moments of a zoomed linear statistic for Hermite matrices,
//! next to the exact variance from the recurrence coefficients.
use ope_meso::cumulant::{cumulant_report, SweepOptions};
use ope_meso::sampler::sample_statistic;
use ope_meso::{EdgeSpec, EnsembleSpec, ResolventTestFunction, Side};

fn main() -> ope_meso::Result<()> {
    let count: usize = std::env::args().nth(1).map(|s| s.parse().expect("count")).unwrap_or(2000);
    let n = 200;
    let spec = EnsembleSpec::hermite();
    let edge = EdgeSpec::at_edge(&spec, n, Side::Right, 0.5, 0.2)?;
    let f: ResolventTestFunction = "im:1/(x-i)".parse()?;
    let s = sample_statistic(&spec, n, count, 7, &|x| f.eval(x), &edge)?;
    let exact = cumulant_report(&spec, n, &edge, &f, &SweepOptions::default())?;
    println!("count {}  mean {:.6}  variance {:.6} +/- {:.6}  skewness {:+.4}", s.count, s.mean, s.variance, s.std_error, s.skewness);
    println!("exact mean {:.6}  exact variance {:.6}  limit 3/32 = {:.6}", exact.scaled(1).re, exact.scaled(2).re, 3.0 / 32.0);
    Ok(())
}
