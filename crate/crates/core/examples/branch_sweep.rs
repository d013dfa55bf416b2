//! Continuation of principal solutions from the threshold `λ₁(ρ̄)`, written as
//! CSV to stdout, followed by a kernel perturbation probe.

use hartree_iop::cli::branch_csv;
use hartree_iop::iop::kernel_perturbation_probe;
use hartree_iop::spectral::lambda1;
use hartree_iop::{branch_sweep, build_grid, build_potential, GridSpec, Kernel, PotentialPreset, Problem, ScfOptions};

fn main() -> hartree_iop::Result<()> {
    let grid = build_grid(GridSpec::one_dimensional(12.0, 201, 0.5))?;
    let v = build_potential(&grid, &PotentialPreset::HarmonicPlus(1.0), true)?;
    let problem = Problem::new(grid, v, 1.0)?;
    let rho_bar = Kernel::gaussian_product(problem.grid(), 0.5, 1.0);
    let l1 = lambda1(&problem, &rho_bar)?;
    let opts = ScfOptions::default();

    let lambdas: Vec<f64> = (0..=20).map(|k| l1 + 0.1 * k as f64).collect();
    let points = branch_sweep(&problem, &rho_bar, &lambdas, &opts)?;
    print!("{}", branch_csv(&points));

    let sigma0 = Kernel::gaussian_product(problem.grid(), 1e-3, 1.0);
    let sigmas: Vec<Kernel> = (0..8).map(|k| &sigma0 * 0.5f64.powi(k)).collect();
    let report = kernel_perturbation_probe(&problem, &rho_bar, l1 + 1.0, &sigmas, &opts)?;
    eprintln!("sigma_norm, distance, ratio");
    for e in &report.entries {
        eprintln!("{:.3e}, {:.3e}, {:.4}", e.sigma_norm, e.distance_l2, e.ratio);
    }
    Ok(())
}
