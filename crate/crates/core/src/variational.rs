//! Energy functional
//!
//! ```text
//! E_λ(u) = ½[⟨∇u,∇u⟩ + ⟨Vu,u⟩ - ⟨S[ρ̄]u,u⟩ - λ⟨u,u⟩] + (γ/4) ∫ w_H(u) u²
//! ```
//!
//! with its L² gradient and second variation, and a ground-state solver by
//! Armijo gradient descent with Barzilai–Borwein trial steps.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::operators::{Kernel, OperatorMatrix, Problem, WaveFunction};
use crate::spectral::{principal_eigenpair, DEFAULT_EIG_TOL};

pub fn energy(problem: &Problem, lambda: f64, rho_bar: &Kernel, u: &WaveFunction) -> Result<f64> {
    let op = problem.assemble_operator(rho_bar)?;
    energy_with(problem, &op, lambda, u)
}

pub(crate) fn energy_with(problem: &Problem, op: &OperatorMatrix, lambda: f64, u: &WaveFunction) -> Result<f64> {
    problem.check_len(u.len())?;
    let w = problem.weight();
    let v = u.values();
    let quad = v.dot(&(op.matrix() * v)) - lambda * v.norm_squared();
    let wh = problem.hartree_potential(u)?;
    let quartic: f64 = wh.iter().zip(v.iter()).map(|(h, x)| h * x * x).sum();
    Ok(0.5 * w * quad + 0.25 * problem.gamma() * w * quartic)
}

/// Node values of `L[ρ̄]u - λu + γ w_H(u) u`; `⟨grad, h⟩_{L²}` is the
/// directional derivative of the energy.
pub fn energy_grad(problem: &Problem, lambda: f64, rho_bar: &Kernel, u: &WaveFunction) -> Result<WaveFunction> {
    let op = problem.assemble_operator(rho_bar)?;
    problem.check_len(u.len())?;
    problem.pde_residual_vector(&op, lambda, u)
}

/// `E(u + d) - E(u)` evaluated without cancellation between the two energies.
fn energy_change(
    problem: &Problem,
    op: &OperatorMatrix,
    lambda: f64,
    u: &DVector<f64>,
    wh: &DVector<f64>,
    d: &DVector<f64>,
) -> f64 {
    let w = problem.weight();
    let ld = op.matrix() * d - d * lambda;
    let quad = 2.0 * d.dot(&(op.matrix() * u - u * lambda)) + d.dot(&ld);
    // (u+d)² - u² = d (2u + d)
    let a = d.zip_map(u, |di, ui| di * (2.0 * ui + di));
    let ra = problem.riesz().weights() * &a;
    let quartic = 2.0 * wh.dot(&a) + w * a.dot(&ra);
    0.5 * w * quad + 0.25 * problem.gamma() * w * quartic
}

/// `E(|u|) - E(u)`; only the off-diagonal quadratic terms change, and each
/// pair with `u_i u_j < 0` contributes `L_ij |u_i u_j|` exactly.
fn abs_change(problem: &Problem, op: &OperatorMatrix, u: &DVector<f64>) -> f64 {
    let m = op.matrix();
    let n = u.len();
    let mut s = 0.0;
    for j in 0..n {
        if u[j] == 0.0 {
            continue;
        }
        for i in 0..n {
            if u[i] * u[j] < 0.0 {
                s += m[(i, j)] * (u[i] * u[j]).abs();
            }
        }
    }
    problem.weight() * s
}

fn is_z_matrix(m: &DMatrix<f64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| i == j || m[(i, j)] <= 0.0))
}

#[derive(Debug, Clone, Copy)]
pub struct GroundStateOptions {
    /// Stop when `‖grad‖ ≤ tol · max(1, ‖u‖)`.
    pub tol: f64,
    pub max_iters: usize,
    /// Refuse to solve when `λ ≤ λ₁(ρ̄) + margin`.
    pub margin: f64,
    pub armijo_c: f64,
    pub shrink: f64,
    pub max_backtracks: usize,
    pub eig_tol: f64,
    /// Compute the Hessian certificate after convergence.
    pub certify: bool,
    /// Replace iterates by `|u|` when `L[ρ̄]` has no positive off-diagonal
    /// entry, which cannot raise the energy.
    pub project_nonnegative: bool,
}

impl Default for GroundStateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iters: 50_000,
            margin: 1e-10,
            armijo_c: 1e-4,
            shrink: 0.5,
            max_backtracks: 60,
            eig_tol: DEFAULT_EIG_TOL,
            certify: true,
            project_nonnegative: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct GroundState {
    pub u: WaveFunction,
    pub energy: f64,
    pub grad_norm: f64,
    pub hessian_min_eig: Option<f64>,
    pub lambda: f64,
    pub lambda1_rho_bar: f64,
    pub sign_definite: bool,
    pub iterations: usize,
    /// Energy after every accepted step, starting with the initializer.
    pub energy_trace: Vec<f64>,
    /// Cancellation-free `E(u_{k+1}) - E(u_k)` of every accepted step.
    pub decrements: Vec<f64>,
}

pub fn is_sign_definite(u: &WaveFunction) -> bool {
    let max = u.values().amax();
    max > 0.0 && u.values().min() >= -1e-10 * max
}

pub fn ground_state(
    problem: &Problem,
    lambda: f64,
    rho_bar: &Kernel,
    opts: &GroundStateOptions,
) -> Result<GroundState> {
    let op = problem.assemble_operator(rho_bar)?;
    let pair = principal_eigenpair(&op, opts.eig_tol)?;
    if !(lambda > pair.lambda1 + opts.margin) {
        return Err(Error::LambdaBelowThreshold {
            lambda,
            threshold: pair.lambda1,
        });
    }
    let w = problem.weight();
    let amplitude = 0.1 * (lambda - pair.lambda1).sqrt();
    let mut u = pair.phi1.values() * amplitude;
    let project = opts.project_nonnegative && is_z_matrix(op.matrix());
    let mut e = energy_with(problem, &op, lambda, &WaveFunction::new(u.clone()))?;
    let mut trace = vec![e];
    let mut decrements = Vec::new();

    let mut grad = problem
        .pde_residual_vector(&op, lambda, &WaveFunction::new(u.clone()))?
        .into_values();
    let mut prev: Option<(DVector<f64>, DVector<f64>)> = None;
    let mut alpha = 1.0;
    let mut iterations = 0;
    loop {
        let gnorm2 = w * grad.norm_squared();
        let unorm = (w * u.norm_squared()).sqrt();
        if gnorm2.sqrt() <= opts.tol * unorm.max(1.0) {
            break;
        }
        if iterations >= opts.max_iters {
            return Err(Error::MaxIters {
                iterations,
                grad_norm: gnorm2.sqrt(),
            });
        }
        if let Some((pu, pg)) = &prev {
            let s = &u - pu;
            let y = &grad - pg;
            let sy = s.dot(&y);
            alpha = if sy > 0.0 { s.norm_squared() / sy } else { 2.0 * alpha };
        }
        let wh = problem.hartree_potential(&WaveFunction::new(u.clone()))?;
        let mut accepted = None;
        for _ in 0..opts.max_backtracks {
            let d = &grad * -alpha;
            let de = energy_change(problem, &op, lambda, &u, &wh, &d);
            if de <= -opts.armijo_c * alpha * gnorm2 {
                accepted = Some((d, de));
                break;
            }
            alpha *= opts.shrink;
        }
        let Some((d, mut de)) = accepted else {
            return Err(Error::LineSearchFailed { iteration: iterations });
        };
        let mut new_u = &u + d;
        if project {
            de += abs_change(problem, &op, &new_u);
            new_u.apply(|v| *v = v.abs());
        }
        let new_grad = problem
            .pde_residual_vector(&op, lambda, &WaveFunction::new(new_u.clone()))?
            .into_values();
        prev = Some((std::mem::replace(&mut u, new_u), std::mem::replace(&mut grad, new_grad)));
        e = energy_with(problem, &op, lambda, &WaveFunction::new(u.clone()))?;
        trace.push(e);
        decrements.push(de);
        iterations += 1;
    }

    let u = WaveFunction::new(u).sign_fixed();
    let grad_norm = (w * grad.norm_squared()).sqrt();
    let hessian_min_eig = if opts.certify {
        Some(hessian_min_eig_with(problem, &op, lambda, &u)?)
    } else {
        None
    };
    Ok(GroundState {
        sign_definite: is_sign_definite(&u),
        energy: e,
        u,
        grad_norm,
        hessian_min_eig,
        lambda,
        lambda1_rho_bar: pair.lambda1,
        iterations,
        energy_trace: trace,
        decrements,
    })
}

/// Second variation `L[ρ̄] - λI + γ diag(w_H(u)) + 2γ Q(u)` with
/// `Q(u)[i][j] = w R[i][j] u_i u_j`.
pub fn hessian_matrix(problem: &Problem, lambda: f64, rho_bar: &Kernel, u: &WaveFunction) -> Result<DMatrix<f64>> {
    let op = problem.assemble_operator(rho_bar)?;
    hessian_with(problem, &op, lambda, u)
}

fn hessian_with(problem: &Problem, op: &OperatorMatrix, lambda: f64, u: &WaveFunction) -> Result<DMatrix<f64>> {
    problem.check_len(u.len())?;
    let gamma = problem.gamma();
    let w = problem.weight();
    let wh = problem.hartree_potential(u)?;
    let v = u.values();
    let mut h = op.matrix().clone();
    let r = problem.riesz().weights();
    let n = problem.dim();
    for j in 0..n {
        for i in 0..n {
            h[(i, j)] += 2.0 * gamma * w * r[(i, j)] * v[i] * v[j];
        }
        h[(j, j)] += gamma * wh[j] - lambda;
    }
    Ok(h)
}

pub fn hessian_min_eig(problem: &Problem, lambda: f64, rho_bar: &Kernel, u: &WaveFunction) -> Result<f64> {
    let op = problem.assemble_operator(rho_bar)?;
    hessian_min_eig_with(problem, &op, lambda, u)
}

fn hessian_min_eig_with(problem: &Problem, op: &OperatorMatrix, lambda: f64, u: &WaveFunction) -> Result<f64> {
    let h = hessian_with(problem, op, lambda, u)?;
    let eig = SymmetricEigen::try_new(h, f64::EPSILON, 0)
        .ok_or_else(|| Error::EigensolveFailed("Hessian decomposition did not converge".into()))?;
    Ok(eig.eigenvalues.min())
}
