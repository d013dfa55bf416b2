//! Dual problem: the largest principal eigenvalue reachable within squared
//! kernel distance `κ`, checked against the forward map `λ ↦ P̂(λ)`.

use hartree_iop::iop::phat;
use hartree_iop::spectral::lambda1;
use hartree_iop::{build_grid, build_potential, dual_solve, DualOptions, GridSpec, Kernel, PotentialPreset, Problem};

fn main() -> hartree_iop::Result<()> {
    let grid = build_grid(GridSpec::one_dimensional(12.0, 201, 0.5))?;
    let v = build_potential(&grid, &PotentialPreset::HarmonicPlus(1.0), true)?;
    let problem = Problem::new(grid, v, 1.0)?;
    let rho_bar = Kernel::gaussian_product(problem.grid(), 0.5, 1.0);
    let l1 = lambda1(&problem, &rho_bar)?;
    let opts = DualOptions::default();

    for kappa in [0.01, 0.1, 1.0] {
        let dual = dual_solve(&problem, kappa, &rho_bar, &opts)?;
        let back = phat(&problem, dual.lambda_star, &rho_bar, &opts.scf)?;
        println!(
            "kappa {kappa:<5} lambda* = {:.10} (lambda1 + {:.6})  P_hat(lambda*) = {back:.10e}  solves = {}",
            dual.lambda_star,
            dual.lambda_star - l1,
            dual.evaluations
        );
    }
    Ok(())
}
