//! Principal eigenpair of `-Δ + V - S[ρ]` for the harmonic oscillator with and
//! without an exchange kernel, plus the gap to the second eigenvalue.

use hartree_iop::spectral::lowest_two;
use hartree_iop::{build_grid, build_potential, principal_eigenpair, GridSpec, Kernel, PotentialPreset, Problem};

fn main() -> hartree_iop::Result<()> {
    let grid = build_grid(GridSpec::one_dimensional(12.0, 401, 0.5))?;
    let v = build_potential(&grid, &PotentialPreset::HarmonicPlus(1.0), true)?;
    let problem = Problem::new(grid, v, 1.0)?;

    for (name, rho) in [
        ("zero", problem.zero_kernel()),
        (
            "gaussian_product(0.5, 1)",
            Kernel::gaussian_product(problem.grid(), 0.5, 1.0),
        ),
    ] {
        let op = problem.assemble_operator(&rho)?;
        let pair = principal_eigenpair(&op, 1e-10)?;
        let (_, second) = lowest_two(&op);
        println!(
            "rho = {name:<26} lambda1 = {:.10}  gap = {:.6}  residual = {:.1e}",
            pair.lambda1,
            second - pair.lambda1,
            pair.residual
        );
    }
    Ok(())
}
