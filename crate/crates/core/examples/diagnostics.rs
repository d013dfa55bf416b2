//! Directional derivative of `λ₁` against finite differences and a concavity
//! probe along a chord between two kernels.

use hartree_iop::spectral::{concavity_probe, dlambda1, lambda1};
use hartree_iop::{build_grid, build_potential, GridSpec, Kernel, PotentialPreset, Problem};

fn main() -> hartree_iop::Result<()> {
    let grid = build_grid(GridSpec::one_dimensional(12.0, 201, 0.5))?;
    let v = build_potential(&grid, &PotentialPreset::HarmonicPlus(1.0), true)?;
    let problem = Problem::new(grid, v, 1.0)?;
    let rho = Kernel::gaussian_product(problem.grid(), 0.5, 1.0);
    let h = Kernel::gaussian_product(problem.grid(), -0.3, 2.0);

    let eps = 1e-5;
    let fd = (lambda1(&problem, &(&rho + &(&h * eps)))? - lambda1(&problem, &(&rho - &(&h * eps)))?) / (2.0 * eps);
    let exact = dlambda1(&problem, &rho, &h)?;
    println!("d lambda1: analytic {exact:.10e}  central difference {fd:.10e}");

    let ts: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    let report = concavity_probe(&problem, &rho, &h, &ts)?;
    for (t, d) in &report.defects {
        println!("t = {t:.1}  defect = {d:.6e}");
    }
    println!("min defect {:.3e} (nonnegative for a concave map)", report.min_defect);
    Ok(())
}
