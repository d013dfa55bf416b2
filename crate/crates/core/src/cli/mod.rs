//! Command layer behind the `hartree` binary: builds the problem from a
//! [`RunConfig`], runs one subcommand, and collects the JSON summary and data
//! files it produces.

mod check;
pub mod config;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::grid::{build_grid, build_potential, diagonal_weight, Grid};
use crate::iop::{branch_sweep, dual_solve, iop_solve, DualOptions, ScfOptions};
use crate::operators::{Kernel, Problem, WaveFunction};
use crate::spectral::{eigenpair_of, EigenOptions};
use crate::variational::{ground_state, GroundStateOptions};

pub use check::{run_checks, CheckItem};
pub use config::{LambdaGrid, LambdaSpec, RunConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Eig,
    Ground,
    Iop,
    Dual,
    Branch,
    Check,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Eig => "eig",
            Command::Ground => "ground",
            Command::Iop => "iop",
            Command::Dual => "dual",
            Command::Branch => "branch",
            Command::Check => "check",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub config_hash: String,
    pub seed: u64,
    pub tolerances: BTreeMap<&'static str, f64>,
    pub version: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct Verification {
    pub reported: f64,
    pub recomputed: f64,
    pub tolerance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub command: &'static str,
    /// `ok`, or `fail` when a check suite has failures.
    pub status: &'static str,
    pub config: BTreeMap<String, String>,
    pub lambda1_rho_bar: f64,
    pub results: BTreeMap<&'static str, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verification: Option<Verification>,
    pub provenance: Provenance,
}

impl Summary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub summary: Summary,
    /// Data files keyed by file name.
    pub files: Vec<(String, String)>,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.summary.status == "ok"
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            5
        }
    }

    /// Writes `summary.json` (or `check_report.json`) and the data files.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let name = if self.summary.command == "check" {
            "check_report.json"
        } else {
            "summary.json"
        };
        std::fs::write(dir.join(name), self.summary.to_json() + "\n")?;
        for (file, contents) in &self.files {
            std::fs::write(dir.join(file), contents)?;
        }
        Ok(())
    }
}

/// Grid, potential and `ρ̄` built from a config.
pub fn build_problem(cfg: &RunConfig) -> Result<(Problem, Kernel)> {
    let grid = build_grid(cfg.grid)?;
    let potential = build_potential(&grid, &cfg.potential_preset(grid.len())?, cfg.strict)?;
    let rho_bar = cfg.build_rho_bar(&grid)?;
    let problem = Problem::new(grid, potential, cfg.gamma)?;
    Ok((problem, rho_bar))
}

pub fn scf_options(cfg: &RunConfig) -> ScfOptions {
    ScfOptions {
        residual_tol: cfg.tol.scf,
        change_tol: cfg.tol.scf_change,
        eig_tol: cfg.tol.eig,
        ..ScfOptions::default()
    }
}

pub fn run(command: Command, cfg: &RunConfig) -> Result<Outcome> {
    cfg.require_target(command.name())?;
    let (problem, rho_bar) = build_problem(cfg)?;
    let eig_opts = EigenOptions::with_tol(cfg.tol.eig);
    let base = eigenpair_of(&problem, &rho_bar, &eig_opts)?;
    let lambda1 = base.lambda1;
    let mut results = BTreeMap::new();
    let mut files = Vec::new();
    let mut verification = None;
    let mut status = "ok";
    let scf = scf_options(cfg);

    match command {
        Command::Eig => {
            results.insert("lambda1", json!(lambda1));
            results.insert("eig_residual", json!(base.residual));
            let v = verify(&problem, &rho_bar, lambda1, &base.phi1, false, base.residual)?;
            verification = Some(v);
            if cfg.write_fields {
                files.push(("field.csv".into(), field_csv(&problem, &base.phi1)?));
            }
        }
        Command::Ground => {
            let lambda = cfg.lambda.expect("checked").resolve(lambda1);
            let opts = GroundStateOptions {
                tol: cfg.tol.ground,
                eig_tol: cfg.tol.eig,
                ..GroundStateOptions::default()
            };
            let gs = ground_state(&problem, lambda, &rho_bar, &opts)?;
            results.insert("lambda", json!(lambda));
            results.insert("energy", json!(gs.energy));
            results.insert("pde_residual", json!(gs.grad_norm));
            results.insert("hessian_min_eig", json!(gs.hessian_min_eig));
            results.insert("sign_definite", json!(gs.sign_definite));
            results.insert("u_norm_l2", json!(problem.l2_norm(&gs.u)));
            results.insert("iterations", json!(gs.iterations));
            verification = Some(verify(&problem, &rho_bar, lambda, &gs.u, true, gs.grad_norm)?);
            if cfg.write_fields {
                files.push(("field.csv".into(), field_csv(&problem, &gs.u)?));
            }
        }
        Command::Iop => {
            let lambda = cfg.lambda.expect("checked").resolve(lambda1);
            let sol = iop_solve(&problem, lambda, &rho_bar, &scf)?;
            results.insert("lambda", json!(lambda));
            results.insert("phat", json!(sol.phat));
            results.insert("varpi", json!(sol.varpi));
            results.insert("lambda_check", json!(sol.lambda_check));
            results.insert("pde_residual", json!(sol.pde_residual));
            results.insert("reconstruction_defect", json!(sol.reconstruction_defect));
            results.insert("principal_defect", json!(sol.principal_defect));
            results.insert("u_norm_l2", json!(problem.l2_norm(&sol.u_hat)));
            results.insert(
                "energy",
                json!(crate::variational::energy(&problem, lambda, &rho_bar, &sol.u_hat)?),
            );
            results.insert("iterations", json!(sol.iterations));
            verification = Some(verify(&problem, &rho_bar, lambda, &sol.u_hat, true, sol.pde_residual)?);
            if cfg.write_fields {
                files.push(("field.csv".into(), field_csv(&problem, &sol.u_hat)?));
            }
            if cfg.write_kernel {
                files.push(("rho_hat.txt".into(), kernel_dump(problem.grid(), &sol.rho_hat)));
            }
        }
        Command::Dual => {
            let kappa = cfg.kappa.expect("checked");
            let opts = DualOptions {
                scf,
                tol: cfg.tol.dual,
                ..DualOptions::default()
            };
            let sol = dual_solve(&problem, kappa, &rho_bar, &opts)?;
            let residual = problem.pde_residual(&problem.assemble_operator(&rho_bar)?, sol.lambda_star, &sol.u_hat)?;
            results.insert("kappa", json!(kappa));
            results.insert("lambda_star", json!(sol.lambda_star));
            results.insert("lambda_check", json!(sol.lambda_check));
            results.insert("constraint_defect", json!(sol.constraint_defect));
            results.insert("pde_residual", json!(residual));
            results.insert("evaluations", json!(sol.evaluations));
            verification = Some(verify(&problem, &rho_bar, sol.lambda_star, &sol.u_hat, true, residual)?);
            if cfg.write_fields {
                files.push(("field.csv".into(), field_csv(&problem, &sol.u_hat)?));
            }
            if cfg.write_kernel {
                files.push(("rho_check.txt".into(), kernel_dump(problem.grid(), &sol.rho_check)));
            }
        }
        Command::Branch => {
            let grid = cfg.lambda_grid.as_ref().expect("checked").resolve(lambda1);
            let points = branch_sweep(&problem, &rho_bar, &grid, &scf)?;
            let mut worst: Option<Verification> = None;
            for p in &points {
                if let Some(u) = &p.u {
                    let v = verify(&problem, &rho_bar, p.lambda, u, true, p.pde_residual)?;
                    if worst.as_ref().is_none_or(|w| v.recomputed > w.recomputed) {
                        worst = Some(v);
                    }
                }
            }
            verification = worst;
            results.insert("points", json!(points.len()));
            results.insert("failures", json!(points.iter().filter(|p| p.error.is_some()).count()));
            results.insert("branch", serde_json::to_value(&points).expect("points serialize"));
            files.push(("branch.csv".into(), branch_csv(&points)));
        }
        Command::Check => {
            let items = run_checks(cfg, &problem, &rho_bar, lambda1)?;
            let failed = items.iter().filter(|c| !c.passed).count();
            if failed > 0 {
                status = "fail";
            }
            results.insert("passed", json!(items.len() - failed));
            results.insert("failed", json!(failed));
            results.insert("checks", serde_json::to_value(&items).expect("checks serialize"));
        }
    }

    let summary = Summary {
        command: command.name(),
        status,
        config: cfg.entries().clone(),
        lambda1_rho_bar: lambda1,
        results,
        verification,
        provenance: Provenance {
            config_hash: cfg.hash(),
            seed: cfg.seed,
            tolerances: BTreeMap::from([
                ("eig", cfg.tol.eig),
                ("scf", cfg.tol.scf),
                ("scf_change", cfg.tol.scf_change),
                ("ground", cfg.tol.ground),
                ("dual", cfg.tol.dual),
            ]),
            version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
        },
    };
    Ok(Outcome { summary, files })
}

/// Machine-readable error report for stderr.
pub fn error_json(err: &Error) -> String {
    json!({
        "status": "error",
        "category": err.category(),
        "message": err.to_string(),
    })
    .to_string()
}

/// Residual of `-Δu + Vu - S[ρ]u + γ w_H(u) u - λu` (the Hartree term only
/// with `nonlinear`), recomputed node by node from grid coordinates without
/// the assembled matrices. Returns `(residual, scale)` where `scale` is the
/// L² norm of the summed term magnitudes.
pub fn recompute_residual(
    problem: &Problem,
    rho: &Kernel,
    lambda: f64,
    u: &WaveFunction,
    nonlinear: bool,
) -> (f64, f64) {
    let grid = problem.grid();
    let n = grid.len();
    let m = grid.spec().points_per_axis;
    let h = grid.spacing();
    let w = grid.weight();
    let mu = grid.mu();
    let rule = problem.riesz().diagonal_rule();
    let diag = diagonal_weight(rule, h, mu);
    let v = problem.potential().values();
    let u = u.values();
    let at = |k: Option<usize>| k.map_or(0.0, |k| u[k]);
    let (mut res2, mut scale2) = (0.0, 0.0);
    for i in 0..n {
        let lap = if grid.dimension() == 1 {
            (2.0 * u[i] - at(i.checked_sub(1)) - at((i + 1 < n).then_some(i + 1))) / (h * h)
        } else {
            let (r, c) = (i / m, i % m);
            let nb = [
                (r > 0).then(|| i - m),
                (r + 1 < m).then(|| i + m),
                (c > 0).then(|| i - 1),
                (c + 1 < m).then(|| i + 1),
            ];
            (4.0 * u[i] - nb.iter().map(|k| at(*k)).sum::<f64>()) / (h * h)
        };
        let (mut exch, mut hart) = (0.0, 0.0);
        for j in 0..n {
            let k = if i == j { diag } else { grid.distance(i, j).powf(-mu) };
            exch += rho.get(i, j) * k * u[j];
            hart += k * u[j] * u[j];
        }
        let (exch, hart) = (w * exch, w * hart);
        let nl = if nonlinear { problem.gamma() * hart * u[i] } else { 0.0 };
        let r = lap + v[i] * u[i] - exch + nl - lambda * u[i];
        let s = lap.abs() + (v[i] * u[i]).abs() + exch.abs() + nl.abs() + (lambda * u[i]).abs();
        res2 += r * r;
        scale2 += s * s;
    }
    ((w * res2).sqrt(), (w * scale2).sqrt())
}

fn verify(
    problem: &Problem,
    rho: &Kernel,
    lambda: f64,
    u: &WaveFunction,
    nonlinear: bool,
    reported: f64,
) -> Result<Verification> {
    let (recomputed, scale) = recompute_residual(problem, rho, lambda, u, nonlinear);
    let tolerance = 1e-12 * scale.max(1.0);
    if !((recomputed - reported).abs() <= tolerance) {
        return Err(Error::VerificationMismatch { reported, recomputed });
    }
    Ok(Verification {
        reported,
        recomputed,
        tolerance,
    })
}

/// Columns `x, V, u, w_H` (`x, y, V, u, w_H` in two dimensions).
pub fn field_csv(problem: &Problem, u: &WaveFunction) -> Result<String> {
    let grid = problem.grid();
    let wh = problem.hartree_potential(u)?;
    let v = problem.potential().values();
    let two_d = grid.dimension() == 2;
    let mut out = String::from(if two_d { "x,y,V,u,w_H\n" } else { "x,V,u,w_H\n" });
    for (k, [x, y]) in grid.coords().iter().enumerate() {
        if two_d {
            let _ = write!(out, "{x:e},{y:e},");
        } else {
            let _ = write!(out, "{x:e},");
        }
        let _ = writeln!(out, "{:e},{:e},{:e}", v[k], u.values()[k], wh[k]);
    }
    Ok(out)
}

pub fn branch_csv(points: &[crate::iop::BranchPoint]) -> String {
    let mut out = String::from("lambda,u_norm_l2,energy,pde_residual\n");
    for p in points {
        let _ = writeln!(
            out,
            "{:e},{:e},{:e},{:e}",
            p.lambda, p.u_norm_l2, p.energy, p.pde_residual
        );
    }
    out
}

/// Dense matrix text with a `# n=.. mu=.. L=..` header line.
pub fn kernel_dump(grid: &Grid, kernel: &Kernel) -> String {
    let spec = grid.spec();
    let mut out = format!("# n={} mu={} L={}\n", kernel.len(), spec.mu, spec.half_width);
    for i in 0..kernel.len() {
        let row: Vec<String> = (0..kernel.len()).map(|j| format!("{:e}", kernel.get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}
