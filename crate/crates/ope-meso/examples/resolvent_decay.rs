//! Resolvent entries of the free chain near the edge: the two-sided recursion
//! against the closed form, then edge versus bulk off-diagonal decay.
use num_complex::Complex64;
use ope_meso::tridiag::{decay_study, free_resolvent_entry, Resolvent};
use ope_meso::{Side, TridiagonalMatrix};

fn main() -> ope_meso::Result<()> {
    let eta = Complex64::new(0.3, 1.0);
    let na = 100.0;
    let m = TridiagonalMatrix::toeplitz(3000, 1.0, 0.0, Complex64::new(-2.0, 0.0) + eta / na)?;
    let g = Resolvent::new(&m)?;
    for (j, k) in [(1, 1), (1, 5), (10, 40), (100, 100)] {
        let exact = free_resolvent_entry(eta, na, Side::Left, j, k)?;
        println!("G({j},{k}) = {:.12}  closed form {:.12}", g.entry(j, k)?, exact);
    }
    println!("operator norm estimate {:.6}, 1/|Im z| = {:.6}", g.operator_norm_estimate(50), na / eta.im);

    println!("\n n^alpha   edge rate   predicted   bulk rate");
    for r in decay_study(&[1e2, 1e3, 1e4], Complex64::i(), 4000)? {
        println!("{:8.0}  {:.6e}  {:.6e}  {:.6e}", r.n_alpha, r.edge_rate, r.predicted_edge_rate, r.bulk_rate);
    }
    Ok(())
}
