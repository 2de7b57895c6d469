//! Closed-form recurrences of the discrete families against Lanczos runs on
//! their weights.
use ope_meso::ensemble::{discrete_recurrence, hahn_weight};
use ope_meso::EnsembleSpec;
use statrs::function::gamma::ln_gamma;

const N: usize = 60;

#[test]
fn krawtchouk_matches_binomial_weight() {
    let (p, t) = (0.3f64, 1.5f64);
    let k = (t * N as f64).round();
    let nodes: Vec<f64> = (0..=k as usize).map(|x| x as f64 / N as f64).collect();
    let weights: Vec<f64> = (0..=k as usize)
        .map(|x| {
            let x = x as f64;
            (ln_gamma(k + 1.0) - ln_gamma(x + 1.0) - ln_gamma(k - x + 1.0) + x * p.ln() + (k - x) * (1.0 - p).ln()).exp()
        })
        .collect();
    let (diag, off) = discrete_recurrence(&nodes, &weights, 40).unwrap();
    let spec = EnsembleSpec::krawtchouk(p, t).unwrap();
    for j in 1..40 {
        assert!((spec.a(j, N).unwrap() - off[j - 1]).abs() < 1e-10, "a_{j}");
        assert!((spec.b(j, N).unwrap() - diag[j]).abs() < 1e-10, "b_{j}");
    }
}

#[test]
fn hahn_closed_form_differs_from_its_weight() {
    let (t1, t2, t3) = (0.5, 0.8, 1.5);
    let (a, b, nn) = ((t1 * N as f64).round(), (t2 * N as f64).round(), (t3 * N as f64).round());
    let (nodes, weights) = hahn_weight(t1, t2, t3, N);
    let (diag, off) = discrete_recurrence(&nodes, &weights, 40).unwrap();

    // the classical Hahn recurrence on x = 0..N, rescaled to the nodes x / n,
    // reproduces the Lanczos run
    let s = a + b;
    let upper = |j: f64| (j + s + 1.0) * (j + a + 1.0) * (nn - j) / ((2.0 * j + s + 1.0) * (2.0 * j + s + 2.0));
    let lower = |j: f64| j * (j + s + nn + 1.0) * (j + b) / ((2.0 * j + s) * (2.0 * j + s + 1.0));
    for j in 1..40 {
        let jf = j as f64;
        let b_classical = (upper(jf) + lower(jf)) / N as f64;
        let a_classical = (upper(jf - 1.0) * lower(jf)).sqrt() / N as f64;
        assert!((b_classical - diag[j]).abs() < 1e-9, "b_{j}");
        assert!((a_classical - off[j - 1]).abs() < 1e-9, "a_{j}");
    }

    // the implemented closed form is off by tens of percent
    let spec = EnsembleSpec::hahn(t1, t2, t3).unwrap();
    for j in [1, 5, 20, 39] {
        assert!((spec.a(j, N).unwrap() / off[j - 1] - 1.0).abs() > 0.2);
        assert!((spec.b(j, N).unwrap() / diag[j] - 1.0).abs() > 0.2);
    }
}
