//! Least-squares fit of the smooth bump by sums of `Im 1/(x - p)` with poles
//! on a horizontal line, for increasing numbers of poles.
use ope_meso::limit::{fit_resolvent_approximation, sigma2_residue, weighted_lipschitz_norm, Grid};
use ope_meso::{Side, TestFunction};

fn main() -> ope_meso::Result<()> {
    let bump: TestFunction = "bump".parse()?;
    let f = |x: f64| bump.eval(x);
    let grid = Grid::new(-6.0, 6.0, 1200)?;
    let norm = weighted_lipschitz_norm(&f, &grid);
    for poles in [10, 20, 40] {
        let r = fit_resolvent_approximation(&f, poles, 0.25, (-1.0, 1.0), &grid)?;
        println!(
            "M={poles:3}: ||f - h|| / ||f|| = {:.4}  cond {:.2e}  sigma_h^2 (left) {:.6}",
            r.achieved_norm / norm,
            r.condition,
            sigma2_residue(&r.function, Side::Left).value
        );
    }
    Ok(())
}
