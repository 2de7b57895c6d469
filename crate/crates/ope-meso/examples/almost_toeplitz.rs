//! Splits the inverse of a Jacobi block into a nearly Toeplitz part and a
//! corner remainder, once for a slowly varying block where the smallness
//! conditions hold and once for a shifted Hermite block where they do not.
//! In both cases the sum is checked against a dense inverse.
use num_complex::Complex64;
use ope_meso::tridiag::{almost_toeplitz_decompose, invert_dense_oracle};
use ope_meso::{EnsembleSpec, Side, TridiagonalMatrix};

fn report(name: &str, m: &TridiagonalMatrix) -> ope_meso::Result<()> {
    let d = almost_toeplitz_decompose(m)?;
    let oracle = invert_dense_oracle(m)?;
    let diff = (d.inverse() - &oracle).camax() / oracle.camax();
    let dg = &d.diagnostics;
    println!("{name}");
    println!("  status {:?}", d.status);
    println!("  c0 {:.4e} c1 {:.4e} c2 {:.4e}", dg.c0, dg.c1, dg.c2);
    println!("  epsilon1 {:.4e} epsilon2 {:.4e} kappa {:.4e}", dg.epsilon1, dg.epsilon2, dg.kappa);
    println!("  max |H| / max |T| = {:.3e}", d.h.camax() / d.t.camax());
    println!("  |T + H - J^-1| / max |J^-1| = {diff:.3e}");
    Ok(())
}

fn main() -> ope_meso::Result<()> {
    let n = 100;
    let diag = (0..n).map(|i| 2.2 + 1e-5 * (i as f64 / n as f64)).collect();
    let off = (0..n - 1).map(|i| 1.0 - 1e-5 * (i as f64 / n as f64)).collect();
    report("slowly varying", &TridiagonalMatrix::new(diag, off, Complex64::new(0.0, 0.5))?)?;

    let n = 300;
    let spec = EnsembleSpec::hermite();
    let x0 = spec.edge_location(n, Side::Right)?;
    let m = spec
        .jacobi_matrix(n, n)?
        .reflected()
        .with_shift(Complex64::new(-x0, 1.0 / (n as f64).sqrt()));
    report("hermite, reflected right edge", &m)
}
