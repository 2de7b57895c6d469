use approx::assert_relative_eq;
use ope_meso::cumulant::{cumulant_report, write_reports_csv, SweepOptions};
use ope_meso::limit::{sigma2_quadrature, weighted_lipschitz_norm, Grid};
use ope_meso::{EdgeSpec, EnsembleSpec, ResolventTestFunction, Side, TestFunction};

const CHEBYSHEV_GOLDEN: &str = include_str!("golden/chebyshev2_n200_alpha0.5_right.csv");

#[test]
fn chebyshev_scaled_cumulants() {
    let spec = EnsembleSpec::chebyshev2();
    let edge = EdgeSpec::new(Side::Right, 2.0, 0.5, 0.2).unwrap();
    let f: ResolventTestFunction = "im:1/(x-i)".parse().unwrap();
    let r = cumulant_report(&spec, 200, &edge, &f, &SweepOptions::default()).unwrap();
    let mut rows = csv::Reader::from_reader(CHEBYSHEV_GOLDEN.as_bytes());
    let mut seen = 0;
    for row in rows.records() {
        let row = row.unwrap();
        let m: usize = row[2].parse().unwrap();
        let want: f64 = row[3].parse().unwrap();
        assert_relative_eq!(r.scaled(m).re, want, max_relative = 1e-9);
        assert!(r.scaled(m).im.abs() < 1e-14);
        seen += 1;
    }
    assert_eq!(seen, 4);

    let mut out = Vec::new();
    write_reports_csv(&[r], &mut out).unwrap();
    let header = String::from_utf8(out).unwrap();
    assert_eq!(header.lines().next(), CHEBYSHEV_GOLDEN.lines().next());
}

#[test]
fn hat_variance_left() {
    let hat: TestFunction = "hat".parse().unwrap();
    let v = sigma2_quadrature(&|x| hat.eval(x), Side::Left, None, 1e-11).unwrap();
    // the kinks of the hat are not quadrature breakpoints, which costs about 3e-8
    assert_relative_eq!(v.value, 0.129434346898394, max_relative = 1e-7);
}

#[test]
fn weighted_norm_of_unit_resolvent() {
    let g: ResolventTestFunction = "im:1/(x-i)".parse().unwrap();
    let norm = weighted_lipschitz_norm(&|x| g.eval(x), &Grid::new(-8.0, 8.0, 1600).unwrap());
    assert_relative_eq!(norm, 1.0, max_relative = 1e-6);
}
