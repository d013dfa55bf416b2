//! Ground state of the energy functional by descent, with its stability
//! certificate, compared with the principal solution of the inverse problem.

use hartree_iop::spectral::lambda1;
use hartree_iop::{
    build_grid, build_potential, ground_state, principal_solve, GridSpec, GroundStateOptions, Kernel, PotentialPreset,
    Problem, ScfOptions,
};

fn main() -> hartree_iop::Result<()> {
    let grid = build_grid(GridSpec::one_dimensional(12.0, 201, 0.5))?;
    let v = build_potential(&grid, &PotentialPreset::HarmonicPlus(1.0), true)?;
    let problem = Problem::new(grid, v, 1.0)?;
    let rho_bar = Kernel::gaussian_product(problem.grid(), 0.5, 1.0);
    let lambda = lambda1(&problem, &rho_bar)? + 1.0;

    let gs = ground_state(&problem, lambda, &rho_bar, &GroundStateOptions::default())?;
    println!("lambda           {lambda:.10}");
    println!("energy           {:.10e}", gs.energy);
    println!("gradient norm    {:.2e} after {} steps", gs.grad_norm, gs.iterations);
    println!("hessian min eig  {:.6e}", gs.hessian_min_eig.unwrap_or(f64::NAN));
    println!("sign definite    {}", gs.sign_definite);

    let principal = principal_solve(&problem, lambda, &rho_bar, &ScfOptions::default())?;
    let gap = problem.aligned_distance(&gs.u, &principal.u) / problem.l2_norm(&principal.u);
    println!("relative distance to the principal solution {gap:.2e}");
    Ok(())
}
