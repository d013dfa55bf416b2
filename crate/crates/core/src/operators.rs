//! Discrete nonlocal Schrödinger operator `L[rho] = -Δ + V - S[rho]`, the
//! exchange and Hartree maps, and the weighted `L²_mu` geometry on kernels.

use std::ops::{Add, Mul, Sub};

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{build_riesz, Grid, Potential, RieszTable};

/// Symmetric two-point kernel `rho(x_i, x_j)` on the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    values: DMatrix<f64>,
}

impl Kernel {
    pub fn zero(n: usize) -> Self {
        Self {
            values: DMatrix::zeros(n, n),
        }
    }

    /// Accepts a matrix that is symmetric up to `1e-12` relative and stores
    /// its exact symmetric part.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::GridMismatch {
                expected: m.nrows(),
                found: m.ncols(),
            });
        }
        let scale = m.amax().max(1.0);
        let defect = (&m - m.transpose()).amax();
        if defect > 1e-12 * scale {
            return Err(Error::NotSymmetric(defect));
        }
        Ok(Self::symmetrized(m))
    }

    fn symmetrized(m: DMatrix<f64>) -> Self {
        let n = m.nrows();
        let mut values = m;
        for j in 0..n {
            for i in (j + 1)..n {
                let v = 0.5 * (values[(i, j)] + values[(j, i)]);
                values[(i, j)] = v;
                values[(j, i)] = v;
            }
        }
        Self { values }
    }

    /// `c * f ⊗ f`.
    pub fn rank_one(f: &DVector<f64>, c: f64) -> Self {
        Self {
            values: c * f * f.transpose(),
        }
    }

    /// `sum_k f_k ⊗ f_k` over the given factors.
    pub fn from_factors(factors: &[DVector<f64>]) -> Result<Self> {
        let n = factors.first().map_or(0, |f| f.len());
        let mut values = DMatrix::zeros(n, n);
        for f in factors {
            if f.len() != n {
                return Err(Error::GridMismatch {
                    expected: n,
                    found: f.len(),
                });
            }
            values.ger(1.0, f, f, 1.0);
        }
        Ok(Self::symmetrized(values))
    }

    /// `c * exp(-(|x|² + |y|²) / (2 s²))`.
    pub fn gaussian_product(grid: &Grid, c: f64, s: f64) -> Self {
        let g = DVector::from_iterator(
            grid.len(),
            (0..grid.len()).map(|k| (-grid.norm2_at(k) / (2.0 * s * s)).exp()),
        );
        Self::rank_one(&g, c)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn diagonal(&self) -> DVector<f64> {
        self.values.diagonal()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.values.iter().all(|&v| v >= 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// `self - c * u ⊗ u`.
    pub fn minus_rank_one(&self, u: &WaveFunction, c: f64) -> Self {
        let mut values = self.values.clone();
        let u = u.values();
        values.ger(-c, u, u, 1.0);
        Self::symmetrized(values)
    }

    pub fn max_abs_diff(&self, other: &Kernel) -> f64 {
        (&self.values - &other.values).amax()
    }

    pub fn linear_combination(a: f64, first: &Kernel, b: f64, second: &Kernel) -> Self {
        Self {
            values: a * &first.values + b * &second.values,
        }
    }
}

impl Add for &Kernel {
    type Output = Kernel;
    fn add(self, rhs: &Kernel) -> Kernel {
        Kernel {
            values: &self.values + &rhs.values,
        }
    }
}

impl Sub for &Kernel {
    type Output = Kernel;
    fn sub(self, rhs: &Kernel) -> Kernel {
        Kernel {
            values: &self.values - &rhs.values,
        }
    }
}

impl Mul<f64> for &Kernel {
    type Output = Kernel;
    fn mul(self, rhs: f64) -> Kernel {
        Kernel {
            values: &self.values * rhs,
        }
    }
}

/// Real grid function `u(x_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunction {
    values: DVector<f64>,
}

impl WaveFunction {
    pub fn new(values: DVector<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self::new(DVector::zeros(n))
    }

    pub fn from_vec(v: Vec<f64>) -> Self {
        Self::new(DVector::from_vec(v))
    }

    pub fn values(&self) -> &DVector<f64> {
        &self.values
    }

    pub fn into_values(self) -> DVector<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self::new(&self.values * c)
    }

    /// Flips the sign so that `sum u >= 0`; on an exact tie the first
    /// nonzero entry is made positive.
    pub fn sign_fixed(mut self) -> Self {
        let sum: f64 = self.values.sum();
        let flip = if sum != 0.0 {
            sum < 0.0
        } else {
            self.values.iter().find(|v| **v != 0.0).is_some_and(|v| *v < 0.0)
        };
        if flip {
            self.values.neg_mut();
        }
        self
    }
}

/// Dense matrix of `L[rho]` in the nodal basis together with its parts.
#[derive(Debug, Clone)]
pub struct OperatorMatrix {
    total: DMatrix<f64>,
    kinetic: DMatrix<f64>,
    potential: DVector<f64>,
    exchange: DMatrix<f64>,
    weight: f64,
}

impl OperatorMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.total
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.total
    }

    /// Discrete `-Δ` with Dirichlet boundary.
    pub fn kinetic(&self) -> &DMatrix<f64> {
        &self.kinetic
    }

    pub fn potential(&self) -> &DVector<f64> {
        &self.potential
    }

    /// `M[i][j] = w rho[i][j] R[i][j]`, entering with a minus sign.
    pub fn exchange(&self) -> &DMatrix<f64> {
        &self.exchange
    }

    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn dim(&self) -> usize {
        self.total.nrows()
    }

    /// Wraps an arbitrary symmetric matrix (used by tests and the Hessian).
    pub fn from_matrix(total: DMatrix<f64>, weight: f64) -> Self {
        let n = total.nrows();
        Self {
            kinetic: DMatrix::zeros(n, n),
            potential: total.diagonal(),
            exchange: DMatrix::zeros(n, n),
            total,
            weight,
        }
    }
}

/// Discrete negative Laplacian: three-point (N = 1) or five-point (N = 2)
/// stencil with zero Dirichlet data outside the box.
pub fn laplacian(grid: &Grid) -> DMatrix<f64> {
    let n_axis = grid.spec().points_per_axis;
    let n = grid.len();
    let inv_h2 = 1.0 / grid.spacing().powi(2);
    let mut a = DMatrix::zeros(n, n);
    match grid.dimension() {
        1 => {
            for i in 0..n {
                a[(i, i)] = 2.0 * inv_h2;
                if i + 1 < n {
                    a[(i, i + 1)] = -inv_h2;
                    a[(i + 1, i)] = -inv_h2;
                }
            }
        }
        _ => {
            for i in 0..n_axis {
                for j in 0..n_axis {
                    let k = i * n_axis + j;
                    a[(k, k)] = 4.0 * inv_h2;
                    if i + 1 < n_axis {
                        a[(k, k + n_axis)] = -inv_h2;
                        a[(k + n_axis, k)] = -inv_h2;
                    }
                    if j + 1 < n_axis {
                        a[(k, k + 1)] = -inv_h2;
                        a[(k + 1, k)] = -inv_h2;
                    }
                }
            }
        }
    }
    a
}

/// Discretized model: grid, confining potential, Riesz table, Laplacian and
/// the Hartree coupling `gamma`. All nonlocal operations go through here.
#[derive(Debug, Clone)]
pub struct Problem {
    grid: Grid,
    potential: Potential,
    riesz: RieszTable,
    laplacian: DMatrix<f64>,
    gamma: f64,
}

impl Problem {
    pub fn new(grid: Grid, potential: Potential, gamma: f64) -> Result<Self> {
        if potential.values().len() != grid.len() {
            return Err(Error::GridMismatch {
                expected: grid.len(),
                found: potential.values().len(),
            });
        }
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::Config(format!(
                "gamma must be finite and nonnegative, got {gamma}"
            )));
        }
        let riesz = build_riesz(&grid);
        let laplacian = laplacian(&grid);
        Ok(Self {
            grid,
            potential,
            riesz,
            laplacian,
            gamma,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn riesz(&self) -> &RieszTable {
        &self.riesz
    }

    pub fn laplacian(&self) -> &DMatrix<f64> {
        &self.laplacian
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        let mut p = self.clone();
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::Config(format!(
                "gamma must be finite and nonnegative, got {gamma}"
            )));
        }
        p.gamma = gamma;
        Ok(p)
    }

    pub fn weight(&self) -> f64 {
        self.grid.weight()
    }

    pub fn dim(&self) -> usize {
        self.grid.len()
    }

    pub(crate) fn check_len(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::GridMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }

    pub fn zero_kernel(&self) -> Kernel {
        Kernel::zero(self.dim())
    }

    /// `w * Σ u_i v_i`.
    pub fn inner(&self, u: &WaveFunction, v: &WaveFunction) -> f64 {
        self.weight() * u.values().dot(v.values())
    }

    pub fn l2_norm(&self, u: &WaveFunction) -> f64 {
        self.inner(u, u).sqrt()
    }

    /// Sign-aligned L² distance `min(‖a - b‖, ‖a + b‖)`.
    pub fn aligned_distance(&self, a: &WaveFunction, b: &WaveFunction) -> f64 {
        let minus = self.weight() * (a.values() - b.values()).norm_squared();
        let plus = self.weight() * (a.values() + b.values()).norm_squared();
        minus.min(plus).sqrt()
    }

    /// `‖u‖²_W = w uᵀ(-Δ_h + diag V)u`.
    pub fn w_norm2(&self, u: &WaveFunction) -> f64 {
        let u = u.values();
        let lap = u.dot(&(&self.laplacian * u));
        let pot: f64 = u.iter().zip(self.potential.values()).map(|(a, v)| v * a * a).sum();
        self.weight() * (lap + pot)
    }

    /// `M[i][j] = w rho[i][j] R[i][j]`.
    pub fn exchange_matrix(&self, rho: &Kernel) -> Result<DMatrix<f64>> {
        self.check_len(rho.len())?;
        Ok(rho.values().component_mul(self.riesz.weights()) * self.weight())
    }

    /// `(S[rho] u)_i = w Σ_j rho[i][j] R[i][j] u_j`.
    pub fn exchange_apply(&self, rho: &Kernel, u: &WaveFunction) -> Result<WaveFunction> {
        self.check_len(u.len())?;
        let m = self.exchange_matrix(rho)?;
        Ok(WaveFunction::new(m * u.values()))
    }

    /// `(w_H)_i = w Σ_j R[i][j] u_j²`; the PDE term is `gamma w_H u`.
    pub fn hartree_potential(&self, u: &WaveFunction) -> Result<DVector<f64>> {
        self.check_len(u.len())?;
        let sq = u.values().map(|v| v * v);
        Ok(self.riesz.weights() * sq * self.weight())
    }

    /// Dense `L[rho] = A_lap + diag(V) - M`.
    pub fn assemble_operator(&self, rho: &Kernel) -> Result<OperatorMatrix> {
        let exchange = self.exchange_matrix(rho)?;
        let potential = DVector::from_column_slice(self.potential.values());
        let mut total = &self.laplacian - &exchange;
        for (i, v) in potential.iter().enumerate() {
            total[(i, i)] += v;
        }
        Ok(OperatorMatrix {
            total,
            kinetic: self.laplacian.clone(),
            potential,
            exchange,
            weight: self.weight(),
        })
    }

    /// `‖rho‖²_{L²_mu} = w² Σ_ij rho_ij² R_ij`.
    pub fn lmu_norm2(&self, rho: &Kernel) -> f64 {
        let w = self.weight();
        let s: f64 = rho
            .values()
            .iter()
            .zip(self.riesz.weights().iter())
            .map(|(r, k)| r * r * k)
            .sum();
        w * w * s
    }

    pub fn lmu_dist2(&self, a: &Kernel, b: &Kernel) -> Result<f64> {
        self.check_len(a.len())?;
        self.check_len(b.len())?;
        Ok(self.lmu_norm2(&(a - b)))
    }

    /// `w² Σ_ij a_ij b_ij R_ij`, the inner product inducing `lmu_norm2`.
    pub fn lmu_inner(&self, a: &Kernel, b: &Kernel) -> f64 {
        let w = self.weight();
        let s: f64 = a
            .values()
            .iter()
            .zip(b.values().iter())
            .zip(self.riesz.weights().iter())
            .map(|((x, y), k)| x * y * k)
            .sum();
        w * w * s
    }

    /// `‖L[rho] u + gamma w_H(u) u - lambda u‖_{L²}`.
    pub fn pde_residual(&self, op: &OperatorMatrix, lambda: f64, u: &WaveFunction) -> Result<f64> {
        let r = self.pde_residual_vector(op, lambda, u)?;
        Ok(self.l2_norm(&r))
    }

    pub(crate) fn pde_residual_vector(
        &self,
        op: &OperatorMatrix,
        lambda: f64,
        u: &WaveFunction,
    ) -> Result<WaveFunction> {
        let wh = self.hartree_potential(u)?;
        let uv = u.values();
        let mut r = op.matrix() * uv - uv * lambda;
        for i in 0..r.len() {
            r[i] += self.gamma * wh[i] * uv[i];
        }
        Ok(WaveFunction::new(r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_grid, build_potential, GridSpec, PotentialPreset};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn problem(n: usize) -> Problem {
        let grid = build_grid(GridSpec::one_dimensional(6.0, n, 0.5)).unwrap();
        let v = build_potential(&grid, &PotentialPreset::HarmonicPlus(1.0), true).unwrap();
        Problem::new(grid, v, 1.0).unwrap()
    }

    fn random_kernel(rng: &mut ChaCha8Rng, n: usize) -> Kernel {
        let m = DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
        Kernel::from_matrix(&m + m.transpose()).unwrap()
    }

    fn random_wave(rng: &mut ChaCha8Rng, n: usize) -> WaveFunction {
        WaveFunction::new(DVector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)))
    }

    #[test]
    fn kernel_symmetry_enforced() {
        let mut m = DMatrix::from_element(3, 3, 1.0);
        m[(0, 2)] = 2.0;
        assert!(matches!(Kernel::from_matrix(m.clone()), Err(Error::NotSymmetric(_))));
        m[(0, 2)] = 1.0 + 1e-14;
        let k = Kernel::from_matrix(m).unwrap();
        assert_eq!(k.get(0, 2), k.get(2, 0));
    }

    #[test]
    fn exchange_zero_cases() {
        let p = problem(32);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = random_wave(&mut rng, 32);
        assert!(p.exchange_apply(&p.zero_kernel(), &u).unwrap().is_zero());
        let rho = random_kernel(&mut rng, 32);
        assert!(p.exchange_apply(&rho, &WaveFunction::zeros(32)).unwrap().is_zero());
        assert!(matches!(
            p.exchange_apply(&rho, &WaveFunction::zeros(31)),
            Err(Error::GridMismatch { .. })
        ));
    }

    #[test]
    fn exchange_symmetric_against_double_sum() {
        let p = problem(40);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_kernel(&mut rng, 40);
        let (u, v) = (random_wave(&mut rng, 40), random_wave(&mut rng, 40));
        let w = p.weight();
        // direct quadrature of ∫∫ rho(x,y) u(y) v(x) / |x-y|^mu
        let mut direct = 0.0;
        for i in 0..40 {
            for j in 0..40 {
                direct += w * w * rho.get(i, j) * p.riesz().get(i, j) * u.values()[j] * v.values()[i];
            }
        }
        let suv = p.inner(&p.exchange_apply(&rho, &u).unwrap(), &v);
        let usv = p.inner(&u, &p.exchange_apply(&rho, &v).unwrap());
        assert!((suv - usv).abs() <= 1e-12 * suv.abs().max(1.0));
        assert!((suv - direct).abs() <= 1e-12 * direct.abs().max(1.0));
    }

    #[test]
    fn hartree_spike_and_positivity() {
        let p = problem(32);
        let k = 11;
        let mut e = DVector::zeros(32);
        e[k] = 1.0 / p.weight().sqrt();
        let wh = p.hartree_potential(&WaveFunction::new(e)).unwrap();
        for i in 0..32 {
            assert!((wh[i] - p.riesz().get(i, k)).abs() < 1e-12 * wh[i]);
        }
        assert!(wh.min() > 0.0);
        assert!(p
            .hartree_potential(&WaveFunction::zeros(32))
            .unwrap()
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn operator_with_zero_kernel_is_stencil() {
        let p = problem(20);
        let op = p.assemble_operator(&p.zero_kernel()).unwrap();
        let h2 = p.grid().spacing().powi(2);
        let m = op.matrix();
        for i in 0..20 {
            assert_eq!(m[(i, i)], 2.0 / h2 + p.potential().values()[i]);
            if i + 1 < 20 {
                assert_eq!(m[(i, i + 1)], -1.0 / h2);
            }
            if i + 2 < 20 {
                assert_eq!(m[(i, i + 2)], 0.0);
            }
        }
    }

    #[test]
    fn operator_symmetric_and_linear_in_kernel() {
        let p = problem(24);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (r1, r2) = (random_kernel(&mut rng, 24), random_kernel(&mut rng, 24));
        let m1 = p.assemble_operator(&r1).unwrap();
        let m2 = p.assemble_operator(&r2).unwrap();
        let m12 = p.assemble_operator(&(&r1 + &r2)).unwrap();
        assert_eq!((m12.matrix() - m12.matrix().transpose()).amax(), 0.0);
        let base = p.assemble_operator(&p.zero_kernel()).unwrap();
        let combined = m1.matrix() + m2.matrix() - base.matrix();
        assert!((m12.matrix() - combined).amax() < 1e-12 * m12.matrix().amax());
        // components add back up
        let rebuilt = m1.kinetic() + DMatrix::from_diagonal(m1.potential()) - m1.exchange();
        assert!((&rebuilt - m1.matrix()).amax() < 1e-12 * m1.matrix().amax());
    }

    #[test]
    fn exchange_linear_in_kernel() {
        let p = problem(24);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (r1, r2) = (random_kernel(&mut rng, 24), random_kernel(&mut rng, 24));
        let u = random_wave(&mut rng, 24);
        let (a, b) = (0.7, -1.3);
        let lhs = p
            .exchange_apply(&Kernel::linear_combination(a, &r1, b, &r2), &u)
            .unwrap();
        let rhs = p.exchange_apply(&r1, &u).unwrap().values() * a + p.exchange_apply(&r2, &u).unwrap().values() * b;
        assert!((lhs.values() - rhs).amax() < 1e-13);
    }

    #[test]
    fn lmu_norm_rank_one_double_loop() {
        let p = problem(30);
        let f = DVector::from_fn(30, |i, _| ((i as f64) * 0.3).sin());
        let rho = Kernel::rank_one(&f, 1.0);
        let w = p.weight();
        let mut brute = 0.0;
        for i in 0..30 {
            for j in 0..30 {
                let r = f[i] * f[j];
                brute += r * r * p.riesz().get(i, j);
            }
        }
        brute *= w * w;
        assert!((p.lmu_norm2(&rho) - brute).abs() < 1e-12 * brute);
        assert_eq!(p.lmu_norm2(&p.zero_kernel()), 0.0);
        let scaled = p.lmu_norm2(&(&rho * 3.0));
        assert!((scaled - 9.0 * brute).abs() < 1e-13 * scaled);
    }

    #[test]
    fn lmu_dist_basics() {
        let p = problem(20);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_kernel(&mut rng, 20);
        assert_eq!(p.lmu_dist2(&a, &a).unwrap(), 0.0);
        let z = p.zero_kernel();
        assert!((p.lmu_dist2(&z, &a).unwrap() - p.lmu_norm2(&a)).abs() < 1e-14 * p.lmu_norm2(&a));
        assert!(p.lmu_dist2(&a, &Kernel::zero(3)).is_err());
    }

    #[test]
    fn gaussian_product_values() {
        let p = problem(21);
        let k = Kernel::gaussian_product(p.grid(), 0.5, 1.0);
        let x = p.grid().axis();
        let expect = 0.5 * (-(x[3] * x[3] + x[8] * x[8]) / 2.0).exp();
        assert!((k.get(3, 8) - expect).abs() < 1e-15);
        assert!(k.is_nonnegative());
    }

    #[test]
    fn sign_fix_convention() {
        let u = WaveFunction::from_vec(vec![-1.0, -2.0, 1.0]).sign_fixed();
        assert_eq!(u.values()[1], 2.0);
        let t = WaveFunction::from_vec(vec![0.0, -1.0, 1.0]).sign_fixed();
        assert_eq!(t.values()[1], 1.0);
    }

    #[test]
    fn two_dimensional_laplacian_rows() {
        let grid = build_grid(GridSpec {
            dimension: 2,
            half_width: 1.0,
            points_per_axis: 16,
            mu: 1.0,
        })
        .unwrap();
        let a = laplacian(&grid);
        let inv_h2 = 1.0 / grid.spacing().powi(2);
        // interior node: four neighbours
        let k = 5 * 16 + 5;
        assert_eq!(a[(k, k)], 4.0 * inv_h2);
        let neighbours: f64 = a.row(k).iter().filter(|v| **v < 0.0).count() as f64;
        assert_eq!(neighbours, 4.0);
        assert_eq!((&a - a.transpose()).amax(), 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(32))]

            #[test]
            fn lmu_triangle_inequality(seed in any::<u64>()) {
                let p = problem(16);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let a = random_kernel(&mut rng, 16);
                let b = random_kernel(&mut rng, 16);
                let d = p.lmu_dist2(&a, &(&b * -1.0)).unwrap().sqrt();
                let bound = p.lmu_norm2(&a).sqrt() + p.lmu_norm2(&b).sqrt();
                prop_assert!(d <= bound + 1e-12 * bound.max(1.0));
            }

            #[test]
            fn operator_self_adjoint(seed in any::<u64>()) {
                let p = problem(16);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let rho = random_kernel(&mut rng, 16);
                let op = p.assemble_operator(&rho).unwrap();
                let u = random_wave(&mut rng, 16);
                let v = random_wave(&mut rng, 16);
                let lu = WaveFunction::new(op.matrix() * u.values());
                let lv = WaveFunction::new(op.matrix() * v.values());
                let (a, b) = (p.inner(&lu, &v), p.inner(&u, &lv));
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1.0));
            }
        }
    }
}
