use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;

use ope_meso::cumulant::{c2_commutator, default_margin, c2_off_block, cumulant_report, cumulants, cumulants_boundary, SweepOptions};
use ope_meso::limit::{sigma2_quadrature, sigma2_residue, weighted_lipschitz_norm, Grid};
use ope_meso::sampler::sample_spectrum;
use ope_meso::tridiag::{invert_dense_oracle, transfer_spectrum, Resolvent};
use ope_meso::{EdgeSpec, EnsembleSpec, ResolventTestFunction, Side, TridiagonalMatrix};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

prop_compose! {
    fn jacobi(max: usize)(size in 3..=max)
        (diag in prop::collection::vec(-3.0..3.0f64, size),
         off in prop::collection::vec(prop_oneof![0.2..2.0f64, -2.0..-0.2f64], size - 1),
         re in -3.0..3.0f64, im in prop_oneof![0.1..2.0f64, -2.0..-0.1f64])
        -> TridiagonalMatrix {
        TridiagonalMatrix::new(diag, off, c(re, im)).unwrap()
    }
}

prop_compose! {
    fn test_function(max_poles: usize)(k in 1..=max_poles)
        (poles in prop::collection::vec((-2.0..2.0f64, 0.3..2.0f64), k),
         weights in prop::collection::vec((-1.5..1.5f64, -1.5..1.5f64), k))
        -> ResolventTestFunction {
        ResolventTestFunction::new(
            poles.into_iter().map(|(a, b)| c(a, b)).collect(),
            weights.into_iter().map(|(a, b)| c(a, b)).collect(),
        ).unwrap()
    }
}

prop_compose! {
    fn symmetric(max: usize)(size in 2..=max)
        (vals in prop::collection::vec(-1.0..1.0f64, size * size), size in Just(size), n in 1..size)
        -> (DMatrix<f64>, usize) {
        let a = DMatrix::from_vec(size, size, vals);
        (&a + a.transpose(), n)
    }
}

fn max_abs(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|v| v.norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn recursion_matches_dense_inverse(m in jacobi(64)) {
        let oracle = invert_dense_oracle(&m).unwrap();
        let g = Resolvent::new(&m).unwrap().dense();
        prop_assert!(max_abs(&(g - &oracle)) <= 1e-10 * max_abs(&oracle));
    }

    #[test]
    fn resolvent_solves_the_system(m in jacobi(64), k in 1usize..64) {
        let n = m.size();
        let k = 1 + (k - 1) % n;
        let g = Resolvent::new(&m).unwrap();
        let col = nalgebra::DVector::from_iterator(n, (1..=n).map(|j| g.entry(j, k).unwrap()));
        let mut r = m.apply(&col);
        r[k - 1] -= c(1.0, 0.0);
        prop_assert!(r.iter().all(|v| v.norm() < 1e-9 * (1.0 + max_abs(&g.dense()))));
        for j in 1..=n {
            prop_assert_eq!(g.entry(j, k).unwrap(), g.entry(k, j).unwrap());
        }
    }

    #[test]
    fn resolvent_norm_at_most_inverse_distance(m in jacobi(64)) {
        let g = Resolvent::new(&m).unwrap();
        prop_assert!(g.operator_norm_estimate(60) * m.shift().im.abs() <= 1.0 + 1e-9);
    }

    #[test]
    fn transfer_roots_are_reciprocal(m in jacobi(40)) {
        let t = transfer_spectrum(&m).unwrap();
        for j in t.first_index..t.first_index + t.omega_plus.len() {
            let (op, om) = t.omega(j);
            let (lp, lm) = t.lambda(j);
            prop_assert!((lm * op - 1.0).norm() < 1e-13);
            prop_assert!((lp * om - 1.0).norm() < 1e-13);
            prop_assert!(op.norm() >= om.norm());
        }
    }

    #[test]
    fn boundary_expansion_equals_composition_sum((f, n) in symmetric(10)) {
        let a = cumulants(&f, n, 5).unwrap();
        let b = cumulants_boundary(&f, n, 5).unwrap();
        let scale = f.amax().max(1.0);
        for (m, (x, y)) in a.iter().zip(&b).enumerate() {
            prop_assert!((x - y).norm() <= 1e-10 * scale.powi(m as i32 + 1), "m={} {} {}", m + 1, x, y);
        }
    }

    #[test]
    fn second_cumulant_three_ways((f, n) in symmetric(12)) {
        let c2 = cumulants(&f, n, 2).unwrap()[1];
        let off = c2_off_block(&f, n).unwrap();
        let comm = c2_commutator(&f, n).unwrap();
        let scale = 1e-11 * (1.0 + f.amax().powi(2));
        prop_assert!((c2 - off).norm() <= scale);
        prop_assert!((c2 - comm).norm() <= scale);
        prop_assert!(c2.re >= -scale);
    }

    #[test]
    fn sampler_is_deterministic(seed in any::<u64>(), index in 0u64..1000) {
        let spec = EnsembleSpec::hermite();
        let a = sample_spectrum(&spec, 20, seed, index).unwrap();
        prop_assert_eq!(&a, &sample_spectrum(&spec, 20, seed, index).unwrap());
        prop_assert_ne!(&a, &sample_spectrum(&spec, 20, seed, index + 1).unwrap());
        prop_assert!(a.windows(2).all(|w| w[0] <= w[1]));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn residue_matches_quadrature(f in test_function(3), left in any::<bool>()) {
        let side = if left { Side::Left } else { Side::Right };
        let r = sigma2_residue(&f, side).value;
        let q = sigma2_quadrature(&|x| f.eval(x), side, None, 1e-9).unwrap().value;
        prop_assert!((r - q).abs() <= 1e-6 * r.abs().max(1e-3), "{} {}", r, q);
    }

    #[test]
    fn variance_is_scale_invariant(f in test_function(4), s in 0.1..10.0f64, left in any::<bool>()) {
        let side = if left { Side::Left } else { Side::Right };
        let a = sigma2_residue(&f, side).value;
        let b = sigma2_residue(&f.dilate(s).unwrap(), side).value;
        prop_assert!((a - b).abs() <= 1e-10 * a.abs().max(1e-12));
    }

    #[test]
    fn variance_below_norm_bound(f in test_function(2), left in any::<bool>()) {
        let side = if left { Side::Left } else { Side::Right };
        let v = sigma2_residue(&f, side).value;
        let norm = weighted_lipschitz_norm(&|x| f.eval(x), &Grid::new(-12.0, 12.0, 600).unwrap());
        prop_assert!(v >= -1e-14);
        prop_assert!(v <= norm * norm / 8.0 * (1.0 + 1e-6), "{} {}", v, norm);
    }

    #[test]
    fn chebyshev_edges_mirror(f in test_function(2), n in 60usize..160) {
        // x -> -x maps the right edge of the symmetric ensemble to the left one
        let mirrored = ResolventTestFunction::new(
            f.poles().iter().map(|p| -p.conj()).collect(),
            f.weights().iter().map(|d| d.conj()).collect(),
        ).unwrap();
        let spec = EnsembleSpec::chebyshev2();
        let opts = SweepOptions::default();
        let right = cumulant_report(&spec, n, &EdgeSpec::new(Side::Right, 2.0, 0.5, 0.2).unwrap(), &f, &opts).unwrap();
        let left = cumulant_report(&spec, n, &EdgeSpec::new(Side::Left, -2.0, 0.5, 0.2).unwrap(), &mirrored, &opts).unwrap();
        for m in 1..=4 {
            let (a, b) = (right.scaled(m), left.scaled(m));
            prop_assert!((a - b).norm() <= 1e-9 * a.norm().max(1e-6), "m={} {} {}", m, a, b);
        }
    }

    #[test]
    fn second_cumulant_stable_under_wider_margin(f in test_function(2), n in 100usize..300) {
        // Relative change bounded by the slowest pole's decay across the default
        // margin, exp(-r m) with r = min Re sqrt(eta) / n^(alpha/2); only cases
        // where that is small say anything.
        let spec = EnsembleSpec::chebyshev2();
        let edge = EdgeSpec::new(Side::Right, 2.0, 0.5, 0.2).unwrap();
        let r = f.poles().iter().map(|p| p.sqrt().re).fold(f64::INFINITY, f64::min) / (n as f64).powf(0.25);
        let reflection = (-r * default_margin(n, &edge) as f64).exp();
        prop_assume!(reflection <= 1e-2);
        let narrow = cumulant_report(&spec, n, &edge, &f, &SweepOptions::default()).unwrap().scaled(2).re;
        let opts = SweepOptions { margin_factor: 2.0, ..SweepOptions::default() };
        let wide = cumulant_report(&spec, n, &edge, &f, &opts).unwrap().scaled(2).re;
        prop_assert!((narrow - wide).abs() <= reflection * wide.abs().max(1e-6), "{} {} {}", narrow, wide, reflection);
    }
}
