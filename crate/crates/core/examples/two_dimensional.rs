//! The same pipeline on a two-dimensional grid with `μ = 1`.

use hartree_iop::spectral::lambda1;
use hartree_iop::{build_grid, build_potential, iop_solve, GridSpec, Kernel, PotentialPreset, Problem, ScfOptions};

fn main() -> hartree_iop::Result<()> {
    let spec = GridSpec {
        dimension: 2,
        half_width: 6.0,
        points_per_axis: 31,
        mu: 1.0,
    };
    let grid = build_grid(spec)?;
    let v = build_potential(&grid, &PotentialPreset::HarmonicPlus(1.0), true)?;
    let problem = Problem::new(grid, v, 1.0)?;
    let rho_bar = Kernel::gaussian_product(problem.grid(), 0.5, 1.0);
    let l1 = lambda1(&problem, &rho_bar)?;
    let sol = iop_solve(&problem, l1 + 1.0, &rho_bar, &ScfOptions::default())?;
    println!("lambda1 = {l1:.8}");
    println!(
        "lambda = {:.8}  P_hat = {:.8e}  lambda1(rho_hat) = {:.8}  residual = {:.1e}",
        sol.lambda, sol.phat, sol.lambda_check, sol.pde_residual
    );
    Ok(())
}
