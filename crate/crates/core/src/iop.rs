//! Inverse optimal problem
//!
//! ```text
//! P̂(λ, ρ̄) = min { ‖ρ̄ - ρ‖²_{L²_μ} : λ₁(ρ) = λ },
//! ```
//!
//! solved through its rank-one optimality structure `ρ̂ = ρ̄ - γ û ⊗ û`, where
//! `û` is the principal solution of the Hartree equation at level `λ`. The
//! principal solution comes from a damped self-consistent field iteration:
//! for the current shape `ψ` the amplitude `t` is tuned so that
//! `λ₁(L[ρ̄] + γ t² diag(w_H(ψ))) = λ`, and `u` moves toward `t φ`.
//!
//! The dual problem `sup { λ₁(ρ) : ‖ρ̄ - ρ‖² = κ }` is solved by inverting the
//! increasing map `λ ↦ P̂(λ)`.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{Kernel, OperatorMatrix, Problem, WaveFunction};
use crate::spectral::{principal_eigenpair_with, smallest_eigenpair, EigenOptions, DEFAULT_EIG_TOL};
use crate::variational::energy_with;

#[derive(Debug, Clone, Copy)]
pub struct ScfOptions {
    /// Mixing weight of the new iterate.
    pub beta: f64,
    pub min_beta: f64,
    /// Relative L² change of `u` required for convergence.
    pub change_tol: f64,
    /// PDE residual bound, relative to `max(1, ‖u‖)`.
    pub residual_tol: f64,
    pub max_outer: usize,
    /// Iterations with a converged residual and no 10% drop in the change
    /// after which the change is taken to be at its roundoff floor.
    pub change_floor_window: usize,
    /// Iterations without a new best residual before giving up.
    pub stagnation_window: usize,
    /// `λ` within this distance of `λ₁(ρ̄)` counts as the threshold.
    pub margin: f64,
    pub eig_tol: f64,
    pub amplitude_doublings: usize,
    /// Stop the amplitude search at `|λ₁(t) - λ| ≤ amplitude_tol · max(1, |λ|)`.
    pub amplitude_tol: f64,
}

impl Default for ScfOptions {
    fn default() -> Self {
        Self {
            beta: 0.5,
            min_beta: 1.0 / 64.0,
            change_tol: 1e-10,
            residual_tol: 1e-8,
            max_outer: 500,
            change_floor_window: 20,
            stagnation_window: 50,
            margin: 1e-10,
            eig_tol: DEFAULT_EIG_TOL,
            amplitude_doublings: 60,
            amplitude_tol: 1e-12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PrincipalSolution {
    /// Sign-fixed principal solution `û`.
    pub u: WaveFunction,
    pub lambda: f64,
    pub lambda1_rho_bar: f64,
    /// Final amplitude `t` of the SCF step.
    pub amplitude: f64,
    pub iterations: usize,
    pub pde_residual: f64,
    pub last_change: f64,
}

#[derive(Debug, Clone)]
pub struct IopSolution {
    pub rho_hat: Kernel,
    pub u_hat: WaveFunction,
    /// `ϖ = γ ‖û‖²`, the amplitude of the rank-one correction.
    pub varpi: f64,
    /// `‖ρ̄ - ρ̂‖²_{L²_μ}`.
    pub phat: f64,
    /// `λ₁(ρ̂)` from an independent eigensolve.
    pub lambda_check: f64,
    pub lambda: f64,
    pub lambda1_rho_bar: f64,
    pub pde_residual: f64,
    /// `max |ρ̂ + γ û⊗û - ρ̄|`.
    pub reconstruction_defect: f64,
    /// Aligned L² distance between `û / ‖û‖` and `φ₁[ρ̂]`.
    pub principal_defect: f64,
    pub iterations: usize,
}

impl IopSolution {
    pub fn u_norm_l2(&self, problem: &Problem) -> f64 {
        problem.l2_norm(&self.u_hat)
    }
}

fn base_eigen(problem: &Problem, op: &OperatorMatrix, eig_tol: f64) -> Result<(f64, WaveFunction)> {
    let pair = principal_eigenpair_with(op, &EigenOptions::with_tol(eig_tol), None)?;
    Ok((pair.lambda1, pair.phi1)).map(|(l, p)| {
        debug_assert_eq!(p.len(), problem.dim());
        (l, p)
    })
}

fn with_diagonal(base: &DMatrix<f64>, scale: f64, d: &DVector<f64>) -> DMatrix<f64> {
    let mut m = base.clone();
    for (i, v) in d.iter().enumerate() {
        m[(i, i)] += scale * v;
    }
    m
}

struct AmplitudeRoot {
    amplitude: f64,
    /// Euclidean unit eigenvector at the root.
    vector: DVector<f64>,
}

/// Finds `s = t²` with `λ₁(base + s diag(d)) = λ`. The map is increasing in
/// `s` for `d ≥ 0`; the bracket `[0, 1]` is expanded by doubling `t` and then
/// narrowed by bisection with Illinois secant steps.
fn amplitude_root(
    base: &DMatrix<f64>,
    d: &DVector<f64>,
    lambda: f64,
    lambda_base: f64,
    guess: &DVector<f64>,
    opts: &ScfOptions,
) -> Result<AmplitudeRoot> {
    let eig = EigenOptions::with_tol(opts.eig_tol);
    let tol = opts.amplitude_tol * lambda.abs().max(1.0);
    let mut last_vec = guess.clone();
    let eval = |s: f64, start: &DVector<f64>| -> Result<(f64, DVector<f64>)> {
        let (l, v, _) = smallest_eigenpair(&with_diagonal(base, s, d), Some(start), &eig)?;
        Ok((l - lambda, v))
    };

    let mut lo = (0.0, lambda_base - lambda);
    let mut lo_vec = guess.clone();
    let mut s = 1.0;
    let (mut f, mut v) = eval(s, &last_vec)?;
    let mut doublings = 0;
    while f < 0.0 {
        if doublings >= opts.amplitude_doublings {
            return Err(Error::BracketFailure(format!(
                "amplitude bracket still below lambda after {doublings} doublings"
            )));
        }
        lo = (s, f);
        lo_vec = v.clone();
        last_vec = v;
        s *= 4.0;
        doublings += 1;
        (f, v) = eval(s, &last_vec)?;
    }
    if f.abs() <= tol {
        return Ok(AmplitudeRoot {
            amplitude: s.sqrt(),
            vector: v,
        });
    }
    let mut hi = (s, f);
    let mut hi_vec = v;
    // Illinois bookkeeping: which side moved last
    let mut side = 0i8;
    for it in 0..200 {
        let width = hi.0 - lo.0;
        let mut s = if it % 4 == 3 {
            0.5 * (lo.0 + hi.0)
        } else {
            (lo.0 * hi.1 - hi.0 * lo.1) / (hi.1 - lo.1)
        };
        if !(s > lo.0 && s < hi.0) {
            s = 0.5 * (lo.0 + hi.0);
        }
        let start = if s - lo.0 < hi.0 - s { &lo_vec } else { &hi_vec };
        let (f, v) = eval(s, start)?;
        if f.abs() <= tol || width <= 4.0 * f64::EPSILON * hi.0 {
            return Ok(AmplitudeRoot {
                amplitude: s.sqrt(),
                vector: v,
            });
        }
        if f < 0.0 {
            lo = (s, f);
            lo_vec = v;
            if side == -1 {
                hi.1 *= 0.5;
            }
            side = -1;
        } else {
            hi = (s, f);
            hi_vec = v;
            if side == 1 {
                lo.1 *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::BracketFailure("amplitude search did not converge".into()))
}

/// `λ₁(L[ρ̄] + γ t² diag(w_H(ψ)))` for each `t`, with `ψ` normalized in L².
pub fn amplitude_curve(
    problem: &Problem,
    rho_bar: &Kernel,
    shape: &WaveFunction,
    amplitudes: &[f64],
) -> Result<Vec<f64>> {
    let op = problem.assemble_operator(rho_bar)?;
    let norm = problem.l2_norm(shape);
    if norm == 0.0 {
        return Err(Error::ZeroVector);
    }
    let d = problem.hartree_potential(&shape.scaled(1.0 / norm))? * problem.gamma();
    let eig = EigenOptions::default();
    amplitudes
        .iter()
        .map(|&t| smallest_eigenpair(&with_diagonal(op.matrix(), t * t, &d), None, &eig).map(|r| r.0))
        .collect()
}

pub fn principal_solve(
    problem: &Problem,
    lambda: f64,
    rho_bar: &Kernel,
    opts: &ScfOptions,
) -> Result<PrincipalSolution> {
    principal_solve_from(problem, lambda, rho_bar, opts, None)
}

/// Principal solve with an optional warm start; only the shape of `init`
/// matters since the amplitude is re-tuned at every step.
pub fn principal_solve_from(
    problem: &Problem,
    lambda: f64,
    rho_bar: &Kernel,
    opts: &ScfOptions,
    init: Option<&WaveFunction>,
) -> Result<PrincipalSolution> {
    let op = problem.assemble_operator(rho_bar)?;
    let (lambda1, phi1) = base_eigen(problem, &op, opts.eig_tol)?;
    if !(lambda > lambda1 + opts.margin) {
        return Err(Error::LambdaBelowThreshold {
            lambda,
            threshold: lambda1,
        });
    }
    if let Some(u) = init {
        problem.check_len(u.len())?;
    }
    let w = problem.weight();
    let gamma = problem.gamma();
    if gamma == 0.0 {
        return Err(Error::Config("principal solutions need gamma > 0".into()));
    }
    let mut u = match init {
        Some(u0) if !u0.is_zero() => u0.values().clone(),
        _ => phi1.values() * (0.1 * (lambda - lambda1).sqrt()),
    };
    let mut guess = phi1.values() * w.sqrt();
    let residual_of =
        |u: &DVector<f64>| -> Result<f64> { problem.pde_residual(&op, lambda, &WaveFunction::new(u.clone())) };
    let mut beta = opts.beta;
    let mut prev_res = residual_of(&u)?;
    let mut best_res = prev_res;
    let mut since_best = 0;
    let mut best_change = f64::INFINITY;
    let mut since_change = 0;
    let mut amplitude = 0.0;
    let mut change = f64::INFINITY;
    for it in 1..=opts.max_outer {
        let unorm = (w * u.norm_squared()).sqrt();
        let shape = WaveFunction::new(&u / unorm);
        let d = problem.hartree_potential(&shape)? * gamma;
        let root = amplitude_root(op.matrix(), &d, lambda, lambda1, &guess, opts)?;
        amplitude = root.amplitude;
        let mut phi = &root.vector / w.sqrt();
        if phi.dot(&u) < 0.0 {
            phi.neg_mut();
        }
        guess = root.vector;
        let next = &u * (1.0 - beta) + phi * (beta * amplitude);
        change = (&next - &u).norm() / u.norm();
        let res = residual_of(&next)?;
        // increases far below the tolerance are roundoff, not divergence
        let floor = 1e-3 * opts.residual_tol * (w * u.norm_squared()).sqrt().max(1.0);
        if res > prev_res && res > floor {
            beta = (0.5 * beta).max(opts.min_beta);
        } else {
            beta = (1.25 * beta).min(opts.beta);
        }
        prev_res = res;
        u = next;
        let unorm = (w * u.norm_squared()).sqrt();
        let res_ok = res <= opts.residual_tol * unorm.max(1.0);
        // Close to the threshold the amplitude root is only as precise as
        // eigenvalue roundoff over (λ - λ₁), so the change can floor above
        // change_tol while the residual is already converged.
        if res_ok && change < 0.9 * best_change {
            best_change = change;
            since_change = 0;
        } else if res_ok {
            since_change += 1;
        }
        if res_ok && (change <= opts.change_tol || since_change >= opts.change_floor_window) {
            return Ok(PrincipalSolution {
                u: WaveFunction::new(u).sign_fixed(),
                lambda,
                lambda1_rho_bar: lambda1,
                amplitude,
                iterations: it,
                pde_residual: res,
                last_change: change,
            });
        }
        if res < best_res * (1.0 - 1e-6) {
            best_res = res;
            since_best = 0;
        } else {
            since_best += 1;
            if since_best >= opts.stagnation_window && res > opts.residual_tol * unorm.max(1.0) {
                return Err(Error::ScfStagnation {
                    residual: res,
                    iterations: it,
                });
            }
        }
    }
    log::debug!("SCF hit the iteration cap with last change {change:e}, amplitude {amplitude}");
    Err(Error::ScfStagnation {
        residual: prev_res,
        iterations: opts.max_outer,
    })
}

pub fn iop_solve(problem: &Problem, lambda: f64, rho_bar: &Kernel, opts: &ScfOptions) -> Result<IopSolution> {
    iop_solve_from(problem, lambda, rho_bar, opts, None)
}

pub fn iop_solve_from(
    problem: &Problem,
    lambda: f64,
    rho_bar: &Kernel,
    opts: &ScfOptions,
    init: Option<&WaveFunction>,
) -> Result<IopSolution> {
    let op = problem.assemble_operator(rho_bar)?;
    let (lambda1, _) = base_eigen(problem, &op, opts.eig_tol)?;
    if (lambda - lambda1).abs() <= opts.margin {
        // threshold: ρ̂ = ρ̄, P̂ = 0, û = 0
        return Ok(IopSolution {
            rho_hat: rho_bar.clone(),
            u_hat: WaveFunction::zeros(problem.dim()),
            varpi: 0.0,
            phat: 0.0,
            lambda_check: lambda1,
            lambda,
            lambda1_rho_bar: lambda1,
            pde_residual: 0.0,
            reconstruction_defect: 0.0,
            principal_defect: 0.0,
            iterations: 0,
        });
    }
    let sol = principal_solve_from(problem, lambda, rho_bar, opts, init)?;
    let gamma = problem.gamma();
    let rho_hat = rho_bar.minus_rank_one(&sol.u, gamma);
    let phat = problem.lmu_dist2(rho_bar, &rho_hat)?;
    let rebuilt = rho_hat.minus_rank_one(&sol.u, -gamma);
    let reconstruction_defect = rebuilt.max_abs_diff(rho_bar);

    let hat_op = problem.assemble_operator(&rho_hat)?;
    let check = principal_eigenpair_with(&hat_op, &EigenOptions::with_tol(opts.eig_tol), None)?;
    let unorm = problem.l2_norm(&sol.u);
    let principal_defect = problem.aligned_distance(&sol.u.scaled(1.0 / unorm), &check.phi1);
    Ok(IopSolution {
        varpi: gamma * unorm * unorm,
        rho_hat,
        phat,
        lambda_check: check.lambda1,
        lambda,
        lambda1_rho_bar: lambda1,
        pde_residual: sol.pde_residual,
        reconstruction_defect,
        principal_defect,
        iterations: sol.iterations,
        u_hat: sol.u,
    })
}

/// `|û_i| = sqrt((ρ̄_ii - ρ̂_ii) / γ)`. Gaps below `-tol_neg` are rejected;
/// smaller negative gaps are clamped to zero.
pub fn recover_u_from_diagonals(rho_bar: &Kernel, rho_hat: &Kernel, gamma: f64, tol_neg: f64) -> Result<DVector<f64>> {
    if rho_bar.len() != rho_hat.len() {
        return Err(Error::GridMismatch {
            expected: rho_bar.len(),
            found: rho_hat.len(),
        });
    }
    if !(gamma > 0.0) {
        return Err(Error::Config(format!("gamma must be positive, got {gamma}")));
    }
    let gaps = rho_bar.diagonal() - rho_hat.diagonal();
    if let Some((index, &gap)) = gaps.iter().enumerate().find(|(_, g)| **g < -tol_neg) {
        return Err(Error::NegativeDiagonal { index, gap });
    }
    Ok(gaps.map(|g| (g.max(0.0) / gamma).sqrt()))
}

/// `P̂(λ, ρ̄)`; zero at the threshold `λ = λ₁(ρ̄)`.
pub fn phat(problem: &Problem, lambda: f64, rho_bar: &Kernel, opts: &ScfOptions) -> Result<f64> {
    Ok(iop_solve(problem, lambda, rho_bar, opts)?.phat)
}

#[derive(Debug, Clone, Copy)]
pub struct DualOptions {
    pub scf: ScfOptions,
    /// Stop at `|P̂ - κ| ≤ tol · max(1, κ)`.
    pub tol: f64,
    pub lower_offset: f64,
    pub max_expansions: usize,
    pub max_iters: usize,
}

impl Default for DualOptions {
    fn default() -> Self {
        Self {
            scf: ScfOptions::default(),
            tol: 1e-8,
            lower_offset: 1e-8,
            max_expansions: 60,
            max_iters: 200,
        }
    }
}

#[derive(Debug, Clone)]
pub struct DualSolution {
    pub kappa: f64,
    /// `λ₁^κ(ρ̄)`.
    pub lambda_star: f64,
    pub rho_check: Kernel,
    pub u_hat: WaveFunction,
    /// `|‖ρ̄ - ρ̌‖² - κ|`.
    pub constraint_defect: f64,
    /// `λ₁(ρ̌)` from an independent eigensolve.
    pub lambda_check: f64,
    pub lambda1_rho_bar: f64,
    pub evaluations: usize,
}

pub fn dual_solve(problem: &Problem, kappa: f64, rho_bar: &Kernel, opts: &DualOptions) -> Result<DualSolution> {
    if !(kappa > 0.0) {
        return Err(Error::KappaNonpositive(kappa));
    }
    let op = problem.assemble_operator(rho_bar)?;
    let (lambda1, _) = base_eigen(problem, &op, opts.scf.eig_tol)?;
    let tol = opts.tol * kappa.max(1.0);
    let mut evaluations = 0;
    let mut solve = |lambda: f64, init: Option<&WaveFunction>| -> Result<IopSolution> {
        evaluations += 1;
        iop_solve_from(problem, lambda, rho_bar, &opts.scf, init)
    };

    let lo_lambda = lambda1 + opts.lower_offset;
    let mut lo = solve(lo_lambda, None)?;
    let finish = |s: IopSolution, evaluations: usize| DualSolution {
        kappa,
        lambda_star: s.lambda,
        constraint_defect: (s.phat - kappa).abs(),
        lambda_check: s.lambda_check,
        lambda1_rho_bar: lambda1,
        rho_check: s.rho_hat,
        u_hat: s.u_hat,
        evaluations,
    };
    if (lo.phat - kappa).abs() <= tol {
        return Ok(finish(lo, evaluations));
    }
    if lo.phat > kappa {
        return Err(Error::BracketFailure(format!(
            "kappa = {kappa:e} is below P̂ at the lower bracket λ₁ + {:e}",
            opts.lower_offset
        )));
    }
    let mut offset = 1.0;
    let mut hi = solve(lambda1 + offset, Some(&lo.u_hat))?;
    let mut expansions = 0;
    while hi.phat < kappa {
        if expansions >= opts.max_expansions {
            return Err(Error::BracketFailure(format!(
                "P̂ stays below kappa = {kappa:e} up to λ = {}",
                hi.lambda
            )));
        }
        offset *= 2.0;
        expansions += 1;
        let next = solve(lambda1 + offset, Some(&hi.u_hat))?;
        lo = std::mem::replace(&mut hi, next);
    }
    let mut side = 0i8;
    let (mut flo, mut fhi) = (lo.phat - kappa, hi.phat - kappa);
    for it in 0..opts.max_iters {
        if (hi.phat - kappa).abs() <= tol {
            return Ok(finish(hi, evaluations));
        }
        let mut lambda = if it % 4 == 3 {
            0.5 * (lo.lambda + hi.lambda)
        } else {
            (lo.lambda * fhi - hi.lambda * flo) / (fhi - flo)
        };
        if !(lambda > lo.lambda && lambda < hi.lambda) {
            lambda = 0.5 * (lo.lambda + hi.lambda);
        }
        let init = if lambda - lo.lambda < hi.lambda - lambda {
            &lo.u_hat
        } else {
            &hi.u_hat
        };
        let init = if init.is_zero() { None } else { Some(init.clone()) };
        let mid = solve(lambda, init.as_ref())?;
        let f = mid.phat - kappa;
        if f.abs() <= tol || hi.lambda - lo.lambda <= 4.0 * f64::EPSILON * hi.lambda.abs() {
            return Ok(finish(mid, evaluations));
        }
        if f < 0.0 {
            lo = mid;
            flo = f;
            if side == -1 {
                fhi *= 0.5;
            }
            side = -1;
        } else {
            hi = mid;
            fhi = f;
            if side == 1 {
                flo *= 0.5;
            }
            side = 1;
        }
    }
    Err(Error::BracketFailure("dual bisection did not converge".into()))
}

#[derive(Debug, Clone, Serialize)]
pub struct BranchPoint {
    pub lambda: f64,
    pub u_norm_l2: f64,
    pub energy: f64,
    pub pde_residual: f64,
    pub iterations: usize,
    pub error: Option<String>,
    #[serde(skip)]
    pub u: Option<WaveFunction>,
}

/// Principal solutions along an ascending `λ` grid with warm starts. The
/// threshold `λ = λ₁(ρ̄)` gives `û = 0`; failures are recorded per point.
pub fn branch_sweep(
    problem: &Problem,
    rho_bar: &Kernel,
    lambda_grid: &[f64],
    opts: &ScfOptions,
) -> Result<Vec<BranchPoint>> {
    if lambda_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config("lambda grid must be strictly ascending".into()));
    }
    let op = problem.assemble_operator(rho_bar)?;
    let (lambda1, _) = base_eigen(problem, &op, opts.eig_tol)?;
    let mut warm: Option<WaveFunction> = None;
    let mut points = Vec::with_capacity(lambda_grid.len());
    for &lambda in lambda_grid {
        if (lambda - lambda1).abs() <= opts.margin {
            points.push(BranchPoint {
                lambda,
                u_norm_l2: 0.0,
                energy: 0.0,
                pde_residual: 0.0,
                iterations: 0,
                error: None,
                u: Some(WaveFunction::zeros(problem.dim())),
            });
            continue;
        }
        match principal_solve_from(problem, lambda, rho_bar, opts, warm.as_ref()) {
            Ok(sol) => {
                let energy = energy_with(problem, &op, lambda, &sol.u)?;
                points.push(BranchPoint {
                    lambda,
                    u_norm_l2: problem.l2_norm(&sol.u),
                    energy,
                    pde_residual: sol.pde_residual,
                    iterations: sol.iterations,
                    error: None,
                    u: Some(sol.u.clone()),
                });
                warm = Some(sol.u);
            }
            Err(e) => points.push(BranchPoint {
                lambda,
                u_norm_l2: f64::NAN,
                energy: f64::NAN,
                pde_residual: f64::NAN,
                iterations: 0,
                error: Some(format!("{}: {e}", e.category())),
                u: None,
            }),
        }
    }
    Ok(points)
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationEntry {
    /// `‖σ‖_{L²_μ}`.
    pub sigma_norm: f64,
    /// Sign-aligned L² distance to the unperturbed solution.
    pub distance_l2: f64,
    pub distance_w: f64,
    /// `distance_l2 / sigma_norm`.
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PerturbationReport {
    pub lambda: f64,
    pub base_norm_l2: f64,
    pub entries: Vec<PerturbationEntry>,
}

/// Distances `‖û(λ, ρ̄ + σ_k) - û(λ, ρ̄)‖` for a sequence of perturbations.
pub fn kernel_perturbation_probe(
    problem: &Problem,
    rho_bar: &Kernel,
    lambda: f64,
    perturbations: &[Kernel],
    opts: &ScfOptions,
) -> Result<PerturbationReport> {
    let base = principal_solve(problem, lambda, rho_bar, opts)?;
    let mut entries = Vec::with_capacity(perturbations.len());
    for sigma in perturbations {
        problem.check_len(sigma.len())?;
        let sigma_norm = problem.lmu_norm2(sigma).sqrt();
        if sigma.is_zero() {
            entries.push(PerturbationEntry {
                sigma_norm,
                distance_l2: 0.0,
                distance_w: 0.0,
                ratio: f64::NAN,
            });
            continue;
        }
        let sol = principal_solve_from(problem, lambda, &(rho_bar + sigma), opts, Some(&base.u))?;
        let distance_l2 = problem.aligned_distance(&sol.u, &base.u);
        let minus = WaveFunction::new(sol.u.values() - base.u.values());
        let plus = WaveFunction::new(sol.u.values() + base.u.values());
        let distance_w = problem.w_norm2(&minus).min(problem.w_norm2(&plus)).sqrt();
        entries.push(PerturbationEntry {
            sigma_norm,
            distance_l2,
            distance_w,
            ratio: distance_l2 / sigma_norm,
        });
    }
    Ok(PerturbationReport {
        lambda,
        base_norm_l2: problem.l2_norm(&base.u),
        entries,
    })
}
