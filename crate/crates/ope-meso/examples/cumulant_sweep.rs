//! Scaled cumulants of `Im 1/(x - i)` at the right edge of the Chebyshev
//! ensemble, approaching the Gaussian limit with variance 3/32.
use ope_meso::cumulant::{convergence_sweep, EdgeConfig, SweepOptions};
use ope_meso::{EnsembleSpec, ResolventTestFunction, Side};

fn main() -> ope_meso::Result<()> {
    let n_list: Vec<usize> = std::env::args()
        .nth(1)
        .map(|s| s.split(',').map(|v| v.parse().expect("n")).collect())
        .unwrap_or_else(|| vec![250, 500, 1000]);
    let spec = EnsembleSpec::chebyshev2();
    let edge = EdgeConfig { side: Side::Right, alpha: 0.5, epsilon: 0.2, x0: Some(2.0) };
    let f: ResolventTestFunction = "im:1/(x-i)".parse()?;
    let opts = SweepOptions::default();
    for r in convergence_sweep(&spec, &edge, &f, &n_list, &opts)? {
        println!(
            "n={:5} window={:?} C2={:.10} (limit {:.10}) C3={:+.3e} C4={:+.3e}",
            r.n,
            r.window,
            r.scaled(2).re,
            3.0 / 32.0,
            r.scaled(3).re,
            r.scaled(4).re
        );
    }
    Ok(())
}
