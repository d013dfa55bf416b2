use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn hartree(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hartree"))
        .args(args)
        .arg("--out")
        .arg(dir)
        .output()
        .unwrap()
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn eig_harmonic_baseline() {
    let dir = tempfile::tempdir().unwrap();
    let out = hartree(dir.path(), &["eig", "--set", "grid.n=801"]);
    assert_eq!(out.status.code(), Some(0));
    let s = summary(dir.path());
    assert!((s["lambda1_rho_bar"].as_f64().unwrap() - 2.0).abs() < 1e-3);
    assert_eq!(s["status"], "ok");
    assert_eq!(s["provenance"]["seed"], 0);
    let v = &s["verification"];
    assert!(
        (v["reported"].as_f64().unwrap() - v["recomputed"].as_f64().unwrap()).abs() <= v["tolerance"].as_f64().unwrap()
    );
    let field = std::fs::read_to_string(dir.path().join("field.csv")).unwrap();
    assert_eq!(field.lines().next(), Some("x,V,u,w_H"));
    assert_eq!(field.lines().count(), 802);
}

#[test]
fn exit_codes_by_category() {
    let dir = tempfile::tempdir().unwrap();
    let below = hartree(
        dir.path(),
        &["iop", "--set", "grid.n=41", "--set", "solve.lambda=lambda1-0.5"],
    );
    assert_eq!(below.status.code(), Some(3));
    let err: Value = serde_json::from_slice(&below.stderr).unwrap();
    assert_eq!(err["category"], "infeasible");
    assert!(err["message"].as_str().unwrap().contains("principal eigenvalue"));

    let missing = hartree(dir.path(), &["dual", "--set", "grid.n=41"]);
    assert_eq!(missing.status.code(), Some(2));
    let unknown = hartree(dir.path(), &["eig", "--set", "grid.size=41"]);
    assert_eq!(unknown.status.code(), Some(2));
    let bad_kappa = hartree(dir.path(), &["dual", "--set", "grid.n=41", "--set", "solve.kappa=-1"]);
    assert_eq!(bad_kappa.status.code(), Some(3));
}

#[test]
fn strict_flag_escalates_confinement_warning() {
    let dir = tempfile::tempdir().unwrap();
    let n = 41;
    let table: String = (0..n)
        .map(|i| {
            let x = -6.0 + 12.0 * i as f64 / (n - 1) as f64;
            format!("{i} {}\n", 3.0 - x * x / 24.0)
        })
        .collect();
    let path = dir.path().join("v.txt");
    std::fs::write(&path, table).unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(
        &cfg,
        format!(
            "grid.n = {n}\ngrid.half_width = 6\npotential.preset = table\npotential.file = {}\n",
            path.display()
        ),
    )
    .unwrap();
    let cfg = cfg.to_str().unwrap();
    assert_eq!(hartree(dir.path(), &["eig", "--config", cfg]).status.code(), Some(0));
    assert_eq!(
        hartree(dir.path(), &["eig", "--config", cfg, "--strict"]).status.code(),
        Some(2)
    );
}

#[test]
fn dual_round_trip_through_cli() {
    let dir = tempfile::tempdir().unwrap();
    let base = ["--set", "grid.n=101", "--set", "rho_bar.preset=gaussian_product"];
    let mut iop_args = vec!["iop", "--set", "solve.lambda=lambda1+0.8"];
    iop_args.extend(base);
    assert_eq!(hartree(dir.path(), &iop_args).status.code(), Some(0));
    let s = summary(dir.path());
    let lambda = s["results"]["lambda"].as_f64().unwrap();
    let phat = s["results"]["phat"].as_f64().unwrap();
    assert!(dir.path().join("rho_hat.txt").exists());

    let kappa = format!("solve.kappa={phat:e}");
    let mut dual_args = vec!["dual", "--set", &kappa];
    dual_args.extend(base);
    assert_eq!(hartree(dir.path(), &dual_args).status.code(), Some(0));
    let d = summary(dir.path());
    assert!((d["results"]["lambda_star"].as_f64().unwrap() - lambda).abs() <= 1e-6);
    assert!(dir.path().join("rho_check.txt").exists());
}

#[test]
fn branch_outputs_are_deterministic() {
    let run = || {
        let dir = tempfile::tempdir().unwrap();
        let out = hartree(
            dir.path(),
            &[
                "branch",
                "--set",
                "grid.n=81",
                "--set",
                "solve.lambda_grid=lambda1:lambda1+1:6",
                "--seed",
                "4",
            ],
        );
        assert_eq!(out.status.code(), Some(0));
        (
            std::fs::read(dir.path().join("branch.csv")).unwrap(),
            std::fs::read(dir.path().join("summary.json")).unwrap(),
        )
    };
    let (a, b) = (run(), run());
    assert_eq!(a, b);
    let csv = String::from_utf8(a.0).unwrap();
    assert_eq!(csv.lines().next(), Some("lambda,u_norm_l2,energy,pde_residual"));
    assert_eq!(csv.lines().count(), 7);
}

#[test]
fn ground_state_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = hartree(
        dir.path(),
        &[
            "ground",
            "--set",
            "grid.n=101",
            "--set",
            "rho_bar.preset=gaussian_product",
            "--set",
            "solve.lambda=lambda1+1",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let s = summary(dir.path());
    assert!(s["results"]["energy"].as_f64().unwrap() < 0.0);
    assert_eq!(s["results"]["sign_definite"], true);
    assert!(s["results"]["hessian_min_eig"].as_f64().unwrap() > 0.0);
}
