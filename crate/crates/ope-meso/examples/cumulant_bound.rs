//! Builds `F` for a two-pole test function at the right edge of a modified
//! Jacobi ensemble and compares each higher cumulant with its domination
//! bound. `F` is unscaled, so `C_m` carries a factor `n^(m alpha)`.
use ope_meso::cumulant::{build_f, cumulant_bound_check, default_margin};
use ope_meso::{EdgeSpec, EnsembleSpec, ResolventTestFunction, Side};

fn main() -> ope_meso::Result<()> {
    let n = 400;
    let spec = EnsembleSpec::modified_jacobi(0.5, -0.5)?;
    let edge = EdgeSpec::at_edge(&spec, n, Side::Right, 0.6, 0.2)?;
    let f: ResolventTestFunction = "im:1/(x-(0.5+i)) + re:0.3/(x-(-1+2i))".parse()?;
    let margin = default_margin(n, &edge);
    let op = build_f(&spec, n, &edge, &f, (1, n + margin))?;
    println!("F is {}x{}, margin {margin}", op.matrix.nrows(), op.matrix.ncols());
    for m in 3..=6 {
        let r = cumulant_bound_check(&op.matrix, op.rank, m)?;
        println!(
            "m={m}: |C_m| {:.3e}  bound {:.3e}  slack {:.3e}  ||F|| {:.4}  C2 {:.6}",
            r.cumulant_abs, r.bound, r.slack, r.op_norm, r.c2
        );
    }
    Ok(())
}
