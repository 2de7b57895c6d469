//! Recurrence coefficients near row n and the slow-variation checks at an edge.
use ope_meso::ensemble::check_hypotheses;
use ope_meso::{EdgeSpec, EnsembleSpec, Side};

fn main() -> ope_meso::Result<()> {
    let n = 1000;
    let cases = [
        ("chebyshev2", EnsembleSpec::chebyshev2(), Side::Right),
        ("hermite", EnsembleSpec::hermite(), Side::Right),
        ("laguerre(0)", EnsembleSpec::laguerre(0.0)?, Side::Left),
        ("modified_jacobi(0.5,-0.5)", EnsembleSpec::modified_jacobi(0.5, -0.5)?, Side::Right),
    ];
    for (name, spec, side) in cases {
        let (a, b) = spec.recurrence(n, n)?;
        let x0 = spec.edge_location(n, side)?;
        println!("{name}: a_n = {a:.8}, b_n = {b:.8}, {side} edge at {x0:.8}");
        let edge = EdgeSpec::at_edge(&spec, n, side, 0.5, 0.2)?;
        let r = check_hypotheses(&spec, n, &edge, None)?;
        for (q, v) in [
            ("slow_a", &r.slow_a),
            ("slow_b", &r.slow_b),
            ("second_difference", &r.second_difference),
            ("edge_balance", &r.edge_balance),
        ] {
            println!("  {q:18} max {:.3e}  threshold {:.3e}  {}", v.max, v.threshold, if v.pass { "ok" } else { "FAIL" });
        }
    }
    Ok(())
}
