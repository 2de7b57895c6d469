//! Limiting edge variance: closed form for resolvent test functions, the
//! double integral for anything else, and the approximation bound between two.
use ope_meso::limit::{pi_squared_check, sigma2_quadrature, sigma2_residue, variance_approximation_check, Grid};
use ope_meso::{ResolventTestFunction, Side, TestFunction};

fn main() -> ope_meso::Result<()> {
    let g: ResolventTestFunction = "im:1/(x-i)".parse()?;
    for side in [Side::Left, Side::Right] {
        let r = sigma2_residue(&g, side);
        let q = sigma2_quadrature(&|x| g.eval(x), side, None, 1e-10)?;
        println!("{side}: residue {:.15}  quadrature {:.15} (+/- {:.1e})", r.value, q.value, q.est_error);
    }
    let p = pi_squared_check()?;
    println!("pi^2 integral {p:.15} (error {:.1e})", (p - std::f64::consts::PI.powi(2)).abs());

    let hat: TestFunction = "hat".parse()?;
    let bump: TestFunction = "bump".parse()?;
    let grid = Grid::new(-4.0, 4.0, 800)?;
    let c = variance_approximation_check(&|x| hat.eval(x), &|x| bump.eval(x), Side::Left, &grid)?;
    println!(
        "hat {:.6} vs bump {:.6}: |difference| {:.3e} <= {:.3e} ({})",
        c.sigma2_f, c.sigma2_h, c.difference, c.bound, c.holds
    );
    Ok(())
}
