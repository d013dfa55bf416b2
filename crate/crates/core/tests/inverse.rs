use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hartree_iop::iop::{amplitude_curve, kernel_perturbation_probe, principal_solve_from};
use hartree_iop::spectral::{eigenpair_of, lambda1};
use hartree_iop::{
    branch_sweep, build_grid, build_potential, dual_solve, ground_state, iop_solve, principal_solve, DualOptions,
    EigenOptions, Error, GridSpec, GroundStateOptions, Kernel, PotentialPreset, Problem, ScfOptions, WaveFunction,
};

fn problem(l: f64, n: usize) -> Problem {
    let grid = build_grid(GridSpec::one_dimensional(l, n, 0.5)).unwrap();
    let v = build_potential(&grid, &PotentialPreset::HarmonicPlus(1.0), true).unwrap();
    Problem::new(grid, v, 1.0).unwrap()
}

#[test]
fn zero_kernel_at_lambda_three() {
    let p = problem(10.0, 161);
    let rho = p.zero_kernel();
    let opts = ScfOptions::default();
    let sol = iop_solve(&p, 3.0, &rho, &opts).unwrap();
    assert!(sol.pde_residual <= 1e-6);
    let rebuilt = Kernel::from_matrix(-(sol.u_hat.values() * sol.u_hat.values().transpose())).unwrap();
    assert!((lambda1(&p, &rebuilt).unwrap() - 3.0).abs() <= 1e-6);
    assert!(sol.principal_defect <= 1e-6);

    // the descent solver reaches the same state independently
    let gs = ground_state(&p, 3.0, &rho, &GroundStateOptions::default()).unwrap();
    assert!(gs.energy < 0.0);
    assert!(gs.grad_norm <= 1e-6);
    let (a, b) = (p.l2_norm(&gs.u), p.l2_norm(&sol.u_hat));
    assert!((a - b).abs() <= 1e-4 * b);
}

#[test]
fn threshold_is_strict_for_principal_solve() {
    let p = problem(8.0, 81);
    let rho = Kernel::gaussian_product(p.grid(), 0.5, 1.0);
    let l1 = lambda1(&p, &rho).unwrap();
    assert!(matches!(
        principal_solve(&p, l1, &rho, &ScfOptions::default()),
        Err(Error::LambdaBelowThreshold { .. })
    ));
    let pts = branch_sweep(&p, &rho, &[l1], &ScfOptions::default()).unwrap();
    assert_eq!(pts.len(), 1);
    assert_eq!(pts[0].u_norm_l2, 0.0);
}

#[test]
fn amplitude_map_increases_on_bracket() {
    let p = problem(10.0, 121);
    let rho = Kernel::gaussian_product(p.grid(), 0.5, 1.0);
    let phi = eigenpair_of(&p, &rho, &EigenOptions::default()).unwrap().phi1;
    let ts: Vec<f64> = (0..=40).map(|k| 0.05 * k as f64).collect();
    let curve = amplitude_curve(&p, &rho, &phi, &ts).unwrap();
    assert!(curve.windows(2).all(|w| w[1] > w[0]));
    assert!((curve[0] - lambda1(&p, &rho).unwrap()).abs() < 1e-12);
}

#[test]
fn minimizer_beats_random_feasible_kernels() {
    let p = problem(8.0, 61);
    let rho = Kernel::gaussian_product(p.grid(), 0.5, 1.0);
    let lambda = lambda1(&p, &rho).unwrap() + 1.0;
    let sol = iop_solve(&p, lambda, &rho, &ScfOptions::default()).unwrap();
    let x = p.grid().axis().to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut accepted = 0;
    let mut tried = 0;
    while accepted < 20 {
        tried += 1;
        assert!(tried < 5000, "too few feasible probes");
        let c: f64 = rng.gen_range(-2.0..2.0);
        let s: f64 = rng.gen_range(0.3..1.5);
        let a: f64 = rng.gen_range(-0.2..0.2);
        let g = DVector::from_fn(x.len(), |i, _| (-(x[i] - c).powi(2) / (2.0 * s * s)).exp());
        let sigma = Kernel::rank_one(&g, a);
        let candidate = &sol.rho_hat + &sigma;
        if lambda1(&p, &candidate).unwrap() < lambda {
            continue;
        }
        accepted += 1;
        let d = p.lmu_dist2(&rho, &candidate).unwrap();
        assert!(d >= sol.phat - 1e-9, "feasible kernel at {d} beats {}", sol.phat);
    }
}

#[test]
fn sign_definite_solution_rebuilds_lambda() {
    let p = problem(8.0, 81);
    let rho = Kernel::gaussian_product(p.grid(), 0.5, 1.0);
    let lambda = lambda1(&p, &rho).unwrap() + 0.8;
    let sol = principal_solve(&p, lambda, &rho, &ScfOptions::default()).unwrap();
    assert!(sol.u.values().iter().all(|&v| v >= 0.0));
    let hat = rho.minus_rank_one(&sol.u, 1.0);
    assert!((lambda1(&p, &hat).unwrap() - lambda).abs() <= 1e-6);
}

#[test]
fn small_kappa_stays_near_threshold() {
    let p = problem(8.0, 81);
    let rho = Kernel::gaussian_product(p.grid(), 0.5, 1.0);
    let l1 = lambda1(&p, &rho).unwrap();
    let dual = dual_solve(&p, 1e-8, &rho, &DualOptions::default()).unwrap();
    assert!(dual.lambda_star > l1);
    assert!(dual.lambda_star - l1 <= 1e-3);
    assert!(matches!(
        dual_solve(&p, -1.0, &rho, &DualOptions::default()),
        Err(Error::KappaNonpositive(_))
    ));
}

#[test]
fn sweep_is_continuous() {
    let p = problem(10.0, 121);
    let rho = Kernel::gaussian_product(p.grid(), 0.5, 1.0);
    let l1 = lambda1(&p, &rho).unwrap();
    let grid: Vec<f64> = (0..20).map(|k| l1 + 0.05 + (2.0 - 0.05) * k as f64 / 19.0).collect();
    let pts = branch_sweep(&p, &rho, &grid, &ScfOptions::default()).unwrap();
    assert!(pts.windows(2).all(|w| w[1].u_norm_l2 > w[0].u_norm_l2));
    let jumps: Vec<f64> = pts
        .windows(2)
        .map(|w| p.aligned_distance(w[0].u.as_ref().unwrap(), w[1].u.as_ref().unwrap()))
        .collect();
    let mut sorted = jumps.clone();
    sorted.sort_by(f64::total_cmp);
    let median = sorted[sorted.len() / 2];
    assert!(jumps.iter().all(|&j| j <= 10.0 * median));
    // energy is negative along the branch
    assert!(pts.iter().all(|q| q.energy < 0.0));
}

#[test]
fn perturbation_distances_are_lipschitz() {
    let p = problem(10.0, 121);
    let rho = Kernel::gaussian_product(p.grid(), 0.5, 1.0);
    let lambda = lambda1(&p, &rho).unwrap() + 1.0;
    let sigma0 = Kernel::gaussian_product(p.grid(), 1e-3, 1.0);
    let mut sigmas: Vec<Kernel> = (0..=10).map(|k| &sigma0 * 0.5f64.powi(k)).collect();
    sigmas.push(p.zero_kernel());
    let rep = kernel_perturbation_probe(&p, &rho, lambda, &sigmas, &ScfOptions::default()).unwrap();
    let e = &rep.entries;
    assert_eq!(e.last().unwrap().distance_l2, 0.0);
    let d: Vec<f64> = e[..11].iter().map(|x| x.distance_l2).collect();
    assert!(d.windows(2).all(|w| w[1] < w[0]));
    let ratios: Vec<f64> = e[7..11].iter().map(|x| x.ratio).collect();
    let (lo, hi) = ratios
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    assert!(hi / lo < 1.05, "ratios {ratios:?}");
}

#[test]
fn sign_changing_kernel_multistart() {
    // only |u| is determined; report agreement across initializers
    let p = problem(8.0, 81);
    let rho = Kernel::gaussian_product(p.grid(), -0.4, 1.0);
    let lambda = lambda1(&p, &rho).unwrap() + 1.0;
    let opts = ScfOptions::default();
    let base = principal_solve(&p, lambda, &rho, &opts).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..3 {
        let init = WaveFunction::new(DVector::from_fn(81, |i, _| {
            (-(p.grid().axis()[i]).powi(2) / 4.0).exp() * rng.gen_range(0.5..1.5)
        }));
        let other = principal_solve_from(&p, lambda, &rho, &opts, Some(&init)).unwrap();
        let diff = (other.u.values().abs() - base.u.values().abs()).amax();
        println!("multistart |u| difference {diff:.2e}");
        assert!(other.pde_residual <= 1e-6);
    }
}
