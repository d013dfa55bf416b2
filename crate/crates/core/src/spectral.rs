//! Principal eigenpair of `L[rho]` and diagnostics of the map `rho -> λ₁(rho)`.
//!
//! The eigensolver runs inverse iteration from a Gershgorin shift, polishes
//! with Rayleigh-quotient iteration, and certifies the result is the bottom
//! of the spectrum with a Cholesky factorization of `A - (λ - δ)I`. If any
//! stage fails it falls back to a dense symmetric eigendecomposition.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{Kernel, OperatorMatrix, Problem, WaveFunction};

pub const DEFAULT_EIG_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct EigenOptions {
    /// Bound on the L² residual `‖Lφ - λφ‖`.
    pub tol: f64,
    pub max_iters: usize,
    /// Use the dense decomposition when the iteration fails.
    pub dense_fallback: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_EIG_TOL,
            max_iters: 500,
            dense_fallback: true,
        }
    }
}

impl EigenOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone)]
pub struct EigenPair {
    pub lambda1: f64,
    /// L²-normalized, `w Σ φ ≥ 0`.
    pub phi1: WaveFunction,
    pub residual: f64,
}

/// Lower bound on the spectrum from Gershgorin discs.
pub fn gershgorin_lower(a: &DMatrix<f64>) -> f64 {
    (0..a.nrows())
        .map(|i| {
            let off: f64 = a
                .row(i)
                .iter()
                .enumerate()
                .filter(|(j, _)| *j != i)
                .map(|(_, v)| v.abs())
                .sum();
            a[(i, i)] - off
        })
        .fold(f64::INFINITY, f64::min)
}

fn inf_norm(a: &DMatrix<f64>) -> f64 {
    (0..a.nrows())
        .map(|i| a.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

fn shifted(a: &DMatrix<f64>, shift: f64) -> DMatrix<f64> {
    let mut m = a.clone();
    for i in 0..m.nrows() {
        m[(i, i)] -= shift;
    }
    m
}

fn rayleigh_unit(a: &DMatrix<f64>, x: &DVector<f64>) -> (f64, f64) {
    let ax = a * x;
    let rq = x.dot(&ax);
    let res = (ax - x * rq).norm();
    (rq, res)
}

/// Smallest eigenpair with a Euclidean unit vector. Returns
/// `(lambda, x, euclidean residual)`; the residual is invariant under the
/// L² rescaling since the weight is uniform.
pub(crate) fn smallest_eigenpair(
    a: &DMatrix<f64>,
    guess: Option<&DVector<f64>>,
    opts: &EigenOptions,
) -> Result<(f64, DVector<f64>, f64)> {
    match iterate_smallest(a, guess, opts) {
        Ok(found) => return Ok(found),
        Err(e) if guess.is_some() => {
            log::debug!("warm start failed ({e}); retrying cold");
            if let Ok(found) = iterate_smallest(a, None, opts) {
                return Ok(found);
            }
        }
        Err(e) => log::debug!("inverse iteration failed: {e}"),
    }
    if !opts.dense_fallback {
        return Err(Error::NoConvergence {
            max_iters: opts.max_iters,
        });
    }
    dense_smallest(a, opts)
}

fn dense_smallest(a: &DMatrix<f64>, opts: &EigenOptions) -> Result<(f64, DVector<f64>, f64)> {
    let eig = SymmetricEigen::new(a.clone());
    let (k, _) = eig
        .eigenvalues
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.total_cmp(y.1))
        .ok_or_else(|| Error::EigensolveFailed("empty matrix".into()))?;
    let mut x = eig.eigenvectors.column(k).into_owned();
    x /= x.norm();
    let (rq, res) = rayleigh_unit(a, &x);
    if !(res <= opts.tol) {
        return Err(Error::EigensolveFailed(format!(
            "dense residual {res:e} above {:e}",
            opts.tol
        )));
    }
    Ok((rq, x, res))
}

fn iterate_smallest(
    a: &DMatrix<f64>,
    guess: Option<&DVector<f64>>,
    opts: &EigenOptions,
) -> Result<(f64, DVector<f64>, f64)> {
    let n = a.nrows();
    if n == 0 {
        return Err(Error::EigensolveFailed("empty matrix".into()));
    }
    let scale = inf_norm(a).max(1.0);
    let mut x = match guess {
        Some(g) if g.len() == n && g.norm() > 0.0 => g / g.norm(),
        _ => DVector::from_element(n, 1.0 / (n as f64).sqrt()),
    };

    if guess.is_none() {
        let sigma = gershgorin_lower(a) - 1e-6 * scale;
        let chol = shifted(a, sigma)
            .cholesky()
            .ok_or_else(|| Error::EigensolveFailed("shifted matrix not positive definite".into()))?;
        let mut prev = f64::INFINITY;
        let mut converged = false;
        for it in 0..opts.max_iters {
            let y = chol.solve(&x);
            let norm = y.norm();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::EigensolveFailed("inverse iteration broke down".into()));
            }
            x = y / norm;
            let (rq, res) = rayleigh_unit(a, &x);
            if res <= 1e-3 * opts.tol || (it >= 2 && (rq - prev).abs() <= 1e-10 * rq.abs().max(1.0)) {
                converged = true;
                break;
            }
            prev = rq;
        }
        if !converged {
            return Err(Error::NoConvergence {
                max_iters: opts.max_iters,
            });
        }
    }

    // Rayleigh-quotient polish, keeping the best iterate
    let (mut rq, mut res) = rayleigh_unit(a, &x);
    let floor = 64.0 * f64::EPSILON * scale;
    for _ in 0..30 {
        if res <= floor {
            break;
        }
        let Some(y) = shifted(a, rq).lu().solve(&x) else { break };
        let norm = y.norm();
        if !(norm.is_finite() && norm > 0.0) {
            break;
        }
        let cand = y / norm;
        let (crq, cres) = rayleigh_unit(a, &cand);
        if cres >= res {
            break;
        }
        x = cand;
        rq = crq;
        res = cres;
    }
    if !(res <= opts.tol) {
        return Err(Error::NoConvergence {
            max_iters: opts.max_iters,
        });
    }
    // A - (λ - δ)I is positive definite only if nothing lies below λ
    let delta = 1e-9 * scale + 2.0 * res;
    if shifted(a, rq - delta).cholesky().is_none() {
        return Err(Error::EigensolveFailed(format!(
            "converged to an interior eigenvalue {rq}"
        )));
    }
    Ok((rq, x, res))
}

fn make_pair(lambda1: f64, x: DVector<f64>, residual: f64, weight: f64) -> EigenPair {
    let phi1 = WaveFunction::new(x / weight.sqrt()).sign_fixed();
    EigenPair {
        lambda1,
        phi1,
        residual,
    }
}

pub fn principal_eigenpair(op: &OperatorMatrix, tol: f64) -> Result<EigenPair> {
    principal_eigenpair_with(op, &EigenOptions::with_tol(tol), None)
}

/// Same as [`principal_eigenpair`] with explicit options and an optional warm
/// start vector (any scaling).
pub fn principal_eigenpair_with(
    op: &OperatorMatrix,
    opts: &EigenOptions,
    guess: Option<&WaveFunction>,
) -> Result<EigenPair> {
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!(
            "eigen tolerance must be positive, got {}",
            opts.tol
        )));
    }
    let (lambda, x, res) = smallest_eigenpair(op.matrix(), guess.map(|g| g.values()), opts)?;
    Ok(make_pair(lambda, x, res, op.weight()))
}

/// `λ₁(rho)` and `φ₁[rho]` for the problem's operator.
pub fn eigenpair_of(problem: &Problem, rho: &Kernel, opts: &EigenOptions) -> Result<EigenPair> {
    let op = problem.assemble_operator(rho)?;
    principal_eigenpair_with(&op, opts, None)
}

pub fn lambda1(problem: &Problem, rho: &Kernel) -> Result<f64> {
    Ok(eigenpair_of(problem, rho, &EigenOptions::default())?.lambda1)
}

/// `⟨Lu, u⟩ / ⟨u, u⟩`.
pub fn rayleigh(op: &OperatorMatrix, u: &WaveFunction) -> Result<f64> {
    let v = u.values();
    let den = v.norm_squared();
    if den == 0.0 {
        return Err(Error::ZeroVector);
    }
    Ok(v.dot(&(op.matrix() * v)) / den)
}

/// Lowest two eigenvalues by dense decomposition.
pub fn lowest_two(op: &OperatorMatrix) -> (f64, f64) {
    let mut ev: Vec<f64> = SymmetricEigen::new(op.matrix().clone())
        .eigenvalues
        .iter()
        .cloned()
        .collect();
    ev.sort_by(f64::total_cmp);
    (ev[0], ev.get(1).copied().unwrap_or(f64::INFINITY))
}

/// Directional derivative of `λ₁` at `rho` along `h` given the normalized
/// principal eigenfunction: `-(w² / ‖φ‖²) Σ_ij φ_i φ_j R_ij h_ij`.
pub fn dlambda1_at(problem: &Problem, phi: &WaveFunction, h: &Kernel) -> Result<f64> {
    problem.check_len(h.len())?;
    problem.check_len(phi.len())?;
    let p = phi.values();
    let r = problem.riesz().weights();
    let hv = h.values();
    let n = problem.dim();
    let mut s = 0.0;
    for j in 0..n {
        let mut col = 0.0;
        for i in 0..n {
            col += p[i] * r[(i, j)] * hv[(i, j)];
        }
        s += col * p[j];
    }
    let w = problem.weight();
    let norm2 = problem.inner(phi, phi);
    Ok(-w * w * s / norm2)
}

pub fn dlambda1(problem: &Problem, rho: &Kernel, h: &Kernel) -> Result<f64> {
    let pair =
        eigenpair_of(problem, rho, &EigenOptions::default()).map_err(|e| Error::EigensolveFailed(e.to_string()))?;
    dlambda1_at(problem, &pair.phi1, h)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConcavityReport {
    pub lambda_rho1: f64,
    pub lambda_rho2: f64,
    /// `(t, λ₁(tρ₁ + (1-t)ρ₂) - tλ₁(ρ₁) - (1-t)λ₁(ρ₂))`.
    pub defects: Vec<(f64, f64)>,
    pub min_defect: f64,
}

pub fn concavity_probe(problem: &Problem, rho1: &Kernel, rho2: &Kernel, t_samples: &[f64]) -> Result<ConcavityReport> {
    problem.check_len(rho1.len())?;
    problem.check_len(rho2.len())?;
    let opts = EigenOptions::default();
    let solve = |rho: &Kernel| eigenpair_of(problem, rho, &opts).map_err(|e| Error::EigensolveFailed(e.to_string()));
    let l1 = solve(rho1)?.lambda1;
    let l2 = solve(rho2)?.lambda1;
    let mut defects = Vec::with_capacity(t_samples.len());
    for &t in t_samples {
        let mixed = if t == 1.0 {
            l1
        } else if t == 0.0 {
            l2
        } else {
            solve(&Kernel::linear_combination(t, rho1, 1.0 - t, rho2))?.lambda1
        };
        defects.push((t, mixed - (t * l1 + (1.0 - t) * l2)));
    }
    let min_defect = defects.iter().map(|d| d.1).fold(f64::INFINITY, f64::min);
    Ok(ConcavityReport {
        lambda_rho1: l1,
        lambda_rho2: l2,
        defects,
        min_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, build_potential, GridSpec, PotentialPreset};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(l: f64, n: usize) -> Problem {
        let grid = build_grid(GridSpec::one_dimensional(l, n, 0.5)).unwrap();
        let v = build_potential(&grid, &PotentialPreset::HarmonicPlus(1.0), true).unwrap();
        Problem::new(grid, v, 1.0).unwrap()
    }

    #[test]
    fn diagonal_matrix_spectrum() {
        let d = DVector::from_vec(vec![5.0, 3.0, -1.5, 7.0, 2.0]);
        let op = OperatorMatrix::from_matrix(DMatrix::from_diagonal(&d), 1.0);
        let pair = principal_eigenpair(&op, 1e-12).unwrap();
        assert_eq!(pair.lambda1, -1.5);
        assert!((pair.phi1.values()[2] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn harmonic_oscillator_ground_energy() {
        let p = problem(12.0, 201);
        let op = p.assemble_operator(&p.zero_kernel()).unwrap();
        let pair = principal_eigenpair(&op, 1e-9).unwrap();
        assert!((pair.lambda1 - 2.0).abs() < 5e-3);
        assert!((p.l2_norm(&pair.phi1) - 1.0).abs() < 1e-12);
        assert!(pair.phi1.values().sum() > 0.0);
        assert!(pair.residual <= 1e-9);
        // dense route agrees
        let (l1, l2) = lowest_two(&op);
        assert!((l1 - pair.lambda1).abs() < 1e-10);
        assert!((l2 - 4.0).abs() < 2e-2);
    }

    #[test]
    fn warm_start_matches_cold() {
        let p = problem(8.0, 101);
        let rho = Kernel::gaussian_product(p.grid(), 0.5, 1.0);
        let op = p.assemble_operator(&rho).unwrap();
        let cold = principal_eigenpair(&op, 1e-10).unwrap();
        // a deliberately bad guess: the second eigenfunction shape
        let bad = WaveFunction::new(DVector::from_fn(101, |i, _| {
            p.grid().axis()[i] * (-p.grid().axis()[i].powi(2)).exp()
        }));
        for guess in [&cold.phi1, &bad] {
            let warm = principal_eigenpair_with(&op, &EigenOptions::with_tol(1e-10), Some(guess)).unwrap();
            assert!((warm.lambda1 - cold.lambda1).abs() < 1e-12);
        }
    }

    #[test]
    fn rayleigh_quotient_properties() {
        let p = problem(8.0, 81);
        let op = p
            .assemble_operator(&Kernel::gaussian_product(p.grid(), 0.3, 1.5))
            .unwrap();
        let pair = principal_eigenpair(&op, 1e-10).unwrap();
        assert!((rayleigh(&op, &pair.phi1).unwrap() - pair.lambda1).abs() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let u = WaveFunction::new(DVector::from_fn(81, |_, _| rng.gen_range(-1.0..1.0)));
            let r = rayleigh(&op, &u).unwrap();
            assert!(r >= pair.lambda1 - 1e-10);
            assert_eq!(r, rayleigh(&op, &u.scaled(2.0)).unwrap());
        }
        assert!(matches!(
            rayleigh(&op, &WaveFunction::zeros(81)),
            Err(Error::ZeroVector)
        ));
    }

    #[test]
    fn derivative_zero_and_negative_directions() {
        let p = problem(8.0, 81);
        let rho = p.zero_kernel();
        assert_eq!(dlambda1(&p, &rho, &p.zero_kernel()).unwrap(), 0.0);
        let f = DVector::from_fn(81, |i, _| (-(p.grid().axis()[i] - 1.0).powi(2)).exp());
        assert!(dlambda1(&p, &rho, &Kernel::rank_one(&f, 1.0)).unwrap() < 0.0);
    }

    #[test]
    fn derivative_matches_central_difference() {
        let p = problem(8.0, 81);
        let rho = Kernel::gaussian_product(p.grid(), 0.5, 1.0);
        let h = Kernel::gaussian_product(p.grid(), 1.0, 0.7);
        let eps = 1e-5;
        let plus = lambda1(&p, &(&rho + &(&h * eps))).unwrap();
        let minus = lambda1(&p, &(&rho - &(&h * eps))).unwrap();
        let fd = (plus - minus) / (2.0 * eps);
        let d = dlambda1(&p, &rho, &h).unwrap();
        assert!((fd - d).abs() <= 1e-5 * d.abs(), "fd {fd} analytic {d}");
    }

    #[test]
    fn concavity_endpoints_and_equal_kernels() {
        let p = problem(8.0, 61);
        let r1 = Kernel::gaussian_product(p.grid(), 0.5, 1.0);
        let r2 = Kernel::gaussian_product(p.grid(), -0.4, 2.0);
        let rep = concavity_probe(&p, &r1, &r2, &[0.0, 0.5, 1.0]).unwrap();
        assert_eq!(rep.defects[0].1, 0.0);
        assert_eq!(rep.defects[2].1, 0.0);
        assert!(rep.defects[1].1 >= -1e-9);
        let same = concavity_probe(&p, &r1, &r1, &[0.25, 0.5, 0.75]).unwrap();
        assert!(same.defects.iter().all(|d| d.1.abs() < 1e-9));
    }

    #[test]
    fn nonnegative_kernel_gives_simple_positive_ground_state() {
        let p = problem(8.0, 81);
        let op = p
            .assemble_operator(&Kernel::gaussian_product(p.grid(), 0.8, 1.0))
            .unwrap();
        let pair = principal_eigenpair(&op, 1e-10).unwrap();
        let (l1, l2) = lowest_two(&op);
        assert!(l2 - l1 > 0.1);
        let max = pair.phi1.values().amax();
        assert!(pair.phi1.values().iter().all(|&v| v >= -1e-10 * max));
    }
}
