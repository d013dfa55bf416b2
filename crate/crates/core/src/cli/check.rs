//! Seeded invariant suite run by `hartree check`.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{scf_options, RunConfig};
use crate::error::Result;
use crate::grid::Grid;
use crate::iop::{dual_solve, iop_solve, recover_u_from_diagonals, DualOptions};
use crate::operators::{Kernel, Problem, WaveFunction};
use crate::spectral::{concavity_probe, dlambda1, lambda1 as lambda1_of};
use crate::variational::{energy, energy_grad, ground_state, GroundStateOptions};

#[derive(Debug, Clone, Serialize)]
pub struct CheckItem {
    pub name: &'static str,
    pub passed: bool,
    /// Worst observed value of the checked quantity.
    pub value: f64,
    pub tolerance: f64,
}

fn item(name: &'static str, value: f64, tolerance: f64, passed: bool) -> CheckItem {
    CheckItem {
        name,
        passed,
        value,
        tolerance,
    }
}

/// Smooth random profile: a few Gaussian bumps with random centers, widths
/// and signs.
fn random_profile(grid: &Grid, rng: &mut ChaCha8Rng) -> DVector<f64> {
    let mut f = DVector::zeros(grid.len());
    for _ in 0..3 {
        let cx = rng.gen_range(-2.0..2.0);
        let cy = if grid.dimension() == 2 {
            rng.gen_range(-2.0..2.0)
        } else {
            0.0
        };
        let s: f64 = rng.gen_range(0.5..1.5);
        let a = rng.gen_range(-1.0..1.0);
        for (k, [x, y]) in grid.coords().iter().enumerate() {
            f[k] += a * (-((x - cx).powi(2) + (y - cy).powi(2)) / (2.0 * s * s)).exp();
        }
    }
    f
}

/// Symmetric kernel `Σ_k ±f_k ⊗ f_k` from random profiles.
pub(crate) fn random_kernel(grid: &Grid, rng: &mut ChaCha8Rng) -> Kernel {
    let mut k = Kernel::zero(grid.len());
    for _ in 0..2 {
        let f = random_profile(grid, rng);
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        k = &k + &Kernel::rank_one(&f, sign);
    }
    k
}

pub fn run_checks(cfg: &RunConfig, problem: &Problem, rho_bar: &Kernel, lambda1: f64) -> Result<Vec<CheckItem>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let grid = problem.grid();
    let scf = scf_options(cfg);
    let mut items = Vec::new();

    let zero = WaveFunction::zeros(problem.dim());
    let e0 = energy(problem, lambda1 + 1.0, rho_bar, &zero)?;
    items.push(item("energy_at_zero", e0.abs(), 0.0, e0 == 0.0));

    // energy gradient against central differences
    let mut worst = 0.0f64;
    for _ in 0..cfg.check.directions {
        let u = WaveFunction::new(random_profile(grid, &mut rng));
        let h = WaveFunction::new(random_profile(grid, &mut rng));
        let lambda = lambda1 + rng.gen_range(0.1..2.0);
        let eps = 1e-6;
        let ep = energy(
            problem,
            lambda,
            rho_bar,
            &WaveFunction::new(u.values() + h.values() * eps),
        )?;
        let em = energy(
            problem,
            lambda,
            rho_bar,
            &WaveFunction::new(u.values() - h.values() * eps),
        )?;
        let fd = (ep - em) / (2.0 * eps);
        let an = problem.inner(&energy_grad(problem, lambda, rho_bar, &u)?, &h);
        worst = worst.max((fd - an).abs() / an.abs().max(1e-300));
    }
    items.push(item("energy_gradient_fd", worst, 1e-6, worst <= 1e-6));

    // derivative of λ₁ against central differences
    let mut worst = 0.0f64;
    for _ in 0..cfg.check.directions {
        let h = random_kernel(grid, &mut rng);
        let eps = 1e-5;
        let plus = lambda1_of(problem, &(rho_bar + &(&h * eps)))?;
        let minus = lambda1_of(problem, &(rho_bar - &(&h * eps)))?;
        let fd = (plus - minus) / (2.0 * eps);
        let an = dlambda1(problem, rho_bar, &h)?;
        worst = worst.max((fd - an).abs() / an.abs().max(1e-300));
    }
    items.push(item("dlambda1_fd", worst, 1e-5, worst <= 1e-5));

    // concavity along random chords
    let ts: Vec<f64> = (1..10).map(|k| k as f64 / 10.0).collect();
    let mut worst = f64::INFINITY;
    let mut scale = 1.0f64;
    for _ in 0..cfg.check.chords {
        let r1 = random_kernel(grid, &mut rng);
        let r2 = random_kernel(grid, &mut rng);
        let rep = concavity_probe(problem, &r1, &r2, &ts)?;
        scale = scale.max(rep.lambda_rho1.abs()).max(rep.lambda_rho2.abs());
        worst = worst.min(rep.min_defect);
    }
    let tol = 1e-9 * scale;
    items.push(item("concavity", worst, -tol, worst >= -tol));

    // self-adjointness and Hartree positivity
    let op = problem.assemble_operator(rho_bar)?;
    let u = WaveFunction::new(random_profile(grid, &mut rng));
    let v = WaveFunction::new(random_profile(grid, &mut rng));
    let luv = problem.inner(&WaveFunction::new(op.matrix() * u.values()), &v);
    let ulv = problem.inner(&u, &WaveFunction::new(op.matrix() * v.values()));
    let rel = (luv - ulv).abs() / luv.abs().max(ulv.abs()).max(1e-300);
    items.push(item("self_adjoint", rel, 1e-12, rel <= 1e-12));
    let wh = problem.hartree_potential(&u)?;
    let min_wh = wh.min();
    items.push(item("hartree_positive", min_wh, 0.0, min_wh > 0.0));

    // P̂ strictly increasing above the threshold
    let points = cfg.check.lambda_points.max(2);
    let mut phats = Vec::with_capacity(points);
    for k in 0..points {
        let lambda = lambda1 + 0.25 + 1.75 * k as f64 / (points - 1) as f64;
        phats.push(iop_solve(problem, lambda, rho_bar, &scf)?.phat);
    }
    let min_step = phats.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
    items.push(item("phat_increasing", min_step, 0.0, min_step > 0.0));

    // reconstruction at λ₁ + 1
    let lambda = lambda1 + 1.0;
    let sol = iop_solve(problem, lambda, rho_bar, &scf)?;
    let tol_res = 1e-6 * problem.l2_norm(&sol.u_hat).max(1.0);
    items.push(item(
        "pde_residual",
        sol.pde_residual,
        tol_res,
        sol.pde_residual <= tol_res,
    ));
    let dl = (sol.lambda_check - lambda).abs();
    items.push(item("lambda_check", dl, 1e-6, dl <= 1e-6));
    let recovered = recover_u_from_diagonals(rho_bar, &sol.rho_hat, problem.gamma(), 1e-10)?;
    let diag = (recovered - sol.u_hat.values().abs()).amax();
    items.push(item("diagonal_recovery", diag, 1e-10, diag <= 1e-10));

    // dual round trip
    let dual = dual_solve(
        problem,
        sol.phat,
        rho_bar,
        &DualOptions {
            scf,
            tol: cfg.tol.dual,
            ..DualOptions::default()
        },
    )?;
    let dl = (dual.lambda_star - lambda).abs();
    items.push(item("dual_round_trip", dl, 1e-6, dl <= 1e-6));

    // ground state against the principal solution
    if rho_bar.is_nonnegative() {
        let opts = GroundStateOptions {
            tol: cfg.tol.ground,
            eig_tol: cfg.tol.eig,
            ..GroundStateOptions::default()
        };
        let gs = ground_state(problem, lambda, rho_bar, &opts)?;
        let rel = problem.aligned_distance(&gs.u, &sol.u_hat) / problem.l2_norm(&sol.u_hat);
        items.push(item("ground_principal_coincidence", rel, 1e-4, rel <= 1e-4));
        let worst = gs.decrements.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        items.push(item("descent_monotone", worst, 0.0, worst <= 0.0));
    }
    Ok(items)
}
