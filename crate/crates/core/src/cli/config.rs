//! Flat `section.key = value` run configuration.
//!
//! ```text
//! # comments start with '#'
//! grid.dimension   = 1
//! grid.half_width  = 12
//! grid.n           = 201
//! grid.mu          = 0.5
//! potential.preset = harmonic_plus      # harmonic_plus | quartic | table
//! potential.c      = 1
//! potential.file   = v.txt              # table only: "index value" rows
//! rho_bar.preset   = gaussian_product   # zero | gaussian_product | rank_k | matrix
//! rho_bar.c        = 0.5
//! rho_bar.s        = 1
//! rho_bar.file     = rho.txt            # rank_k: one factor per row; matrix: n rows
//! model.gamma      = 1
//! solve.lambda     = lambda1+1          # or an absolute value
//! solve.kappa      = 0.5
//! solve.lambda_grid = lambda1:lambda1+2:21   # start:stop:count, or a comma list
//! tol.eig = 1e-9     tol.scf = 1e-8     tol.scf_change = 1e-10
//! tol.ground = 1e-8  tol.dual = 1e-8
//! run.seed = 0       run.strict = false
//! output.fields = true   output.kernel = true
//! check.directions = 10  check.chords = 10  check.lambda_points = 5
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::grid::{parse_potential_table, Grid, GridSpec, PotentialPreset};
use crate::operators::Kernel;

const DEFAULTS: &[(&str, &str)] = &[
    ("grid.dimension", "1"),
    ("grid.half_width", "12"),
    ("grid.n", "201"),
    ("grid.mu", "0.5"),
    ("potential.preset", "harmonic_plus"),
    ("potential.c", "1"),
    ("rho_bar.preset", "zero"),
    ("rho_bar.c", "0.5"),
    ("rho_bar.s", "1"),
    ("model.gamma", "1"),
    ("tol.eig", "1e-9"),
    ("tol.scf", "1e-8"),
    ("tol.scf_change", "1e-10"),
    ("tol.ground", "1e-8"),
    ("tol.dual", "1e-8"),
    ("run.seed", "0"),
    ("run.strict", "false"),
    ("output.fields", "true"),
    ("output.kernel", "true"),
    ("check.directions", "10"),
    ("check.chords", "10"),
    ("check.lambda_points", "5"),
];

/// Keys without a default.
const OPTIONAL: &[&str] = &[
    "potential.file",
    "rho_bar.file",
    "solve.lambda",
    "solve.kappa",
    "solve.lambda_grid",
];

/// A spectral parameter, either absolute or relative to `λ₁(ρ̄)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSpec {
    Absolute(f64),
    AboveThreshold(f64),
}

impl LambdaSpec {
    pub fn resolve(self, lambda1: f64) -> f64 {
        match self {
            LambdaSpec::Absolute(v) => v,
            LambdaSpec::AboveThreshold(d) => lambda1 + d,
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        let Some(rest) = t.strip_prefix("lambda1") else {
            return parse_f64("lambda", &t).map(LambdaSpec::Absolute);
        };
        if rest.is_empty() {
            return Ok(LambdaSpec::AboveThreshold(0.0));
        }
        let offset = match rest.as_bytes()[0] {
            b'+' => parse_f64("lambda offset", &rest[1..])?,
            b'-' => -parse_f64("lambda offset", &rest[1..])?,
            _ => return Err(parse_error("lambda", &t, "expected lambda1+<offset>")),
        };
        Ok(LambdaSpec::AboveThreshold(offset))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LambdaGrid {
    Range {
        start: LambdaSpec,
        stop: LambdaSpec,
        count: usize,
    },
    List(Vec<LambdaSpec>),
}

impl LambdaGrid {
    pub fn parse(text: &str) -> Result<Self> {
        let parts: Vec<&str> = text.split(':').collect();
        match parts.as_slice() {
            [start, stop, count] => {
                let count: usize = count
                    .trim()
                    .parse()
                    .map_err(|e| parse_error("lambda_grid", count, &format!("{e}")))?;
                if count < 2 {
                    return Err(Error::Config("lambda_grid range needs at least 2 points".into()));
                }
                Ok(LambdaGrid::Range {
                    start: LambdaSpec::parse(start)?,
                    stop: LambdaSpec::parse(stop)?,
                    count,
                })
            }
            [list] => Ok(LambdaGrid::List(
                list.split(',').map(LambdaSpec::parse).collect::<Result<_>>()?,
            )),
            _ => Err(parse_error(
                "lambda_grid",
                text,
                "expected start:stop:count or a comma list",
            )),
        }
    }

    pub fn resolve(&self, lambda1: f64) -> Vec<f64> {
        match self {
            LambdaGrid::Range { start, stop, count } => {
                let (a, b) = (start.resolve(lambda1), stop.resolve(lambda1));
                (0..*count)
                    .map(|k| a + (b - a) * k as f64 / (*count - 1) as f64)
                    .collect()
            }
            LambdaGrid::List(v) => v.iter().map(|s| s.resolve(lambda1)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RhoBarSpec {
    Zero,
    GaussianProduct { c: f64, s: f64 },
    RankK(String),
    Matrix(String),
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    HarmonicPlus(f64),
    Quartic(f64),
    Table(String),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub eig: f64,
    pub scf: f64,
    pub scf_change: f64,
    pub ground: f64,
    pub dual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSizes {
    pub directions: usize,
    pub chords: usize,
    pub lambda_points: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridSpec,
    pub potential: PotentialSpec,
    pub rho_bar: RhoBarSpec,
    pub gamma: f64,
    pub lambda: Option<LambdaSpec>,
    pub kappa: Option<f64>,
    pub lambda_grid: Option<LambdaGrid>,
    pub tol: Tolerances,
    pub seed: u64,
    pub strict: bool,
    pub write_fields: bool,
    pub write_kernel: bool,
    pub check: CheckSizes,
    entries: BTreeMap<String, String>,
}

fn parse_error(context: &str, text: &str, message: &str) -> Error {
    Error::Parse {
        context: format!("{context} `{text}`"),
        message: message.into(),
    }
}

fn parse_f64(context: &str, text: &str) -> Result<f64> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|e| parse_error(context, text, &format!("{e}")))?;
    if !v.is_finite() {
        return Err(parse_error(context, text, "not finite"));
    }
    Ok(v)
}

fn is_known(key: &str) -> bool {
    DEFAULTS.iter().any(|(k, _)| *k == key) || OPTIONAL.contains(&key)
}

/// Parses `key = value` lines into a map; later lines win.
pub fn parse_entries(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = split_assignment(line).map_err(|_| Error::Parse {
            context: format!("config line {}", lineno + 1),
            message: format!("expected `section.key = value`, got `{line}`"),
        })?;
        map.insert(k, v);
    }
    Ok(map)
}

fn split_assignment(text: &str) -> Result<(String, String)> {
    let (k, v) = text
        .split_once('=')
        .ok_or_else(|| parse_error("assignment", text, "missing '='"))?;
    let (k, v) = (k.trim(), v.trim());
    if k.is_empty() || !k.contains('.') {
        return Err(parse_error("assignment", text, "key must look like section.key"));
    }
    Ok((k.to_string(), v.to_string()))
}

impl RunConfig {
    /// Config text plus `key=value` overrides applied in order.
    pub fn from_text(text: &str, overrides: &[String]) -> Result<Self> {
        let mut entries = parse_entries(text)?;
        for o in overrides {
            let (k, v) = split_assignment(o)?;
            entries.insert(k, v);
        }
        Self::from_entries(entries)
    }

    pub fn from_file(path: Option<&Path>, overrides: &[String]) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p).map_err(|e| Error::Parse {
                context: p.display().to_string(),
                message: e.to_string(),
            })?,
            None => String::new(),
        };
        Self::from_text(&text, overrides)
    }

    pub fn from_entries(mut entries: BTreeMap<String, String>) -> Result<Self> {
        if let Some(k) = entries.keys().find(|k| !is_known(k)) {
            return Err(Error::Config(format!("unknown key `{k}`")));
        }
        for (k, v) in DEFAULTS {
            entries.entry(k.to_string()).or_insert_with(|| v.to_string());
        }
        let get = |k: &str| entries.get(k).map(String::as_str);
        let num = |k: &str| parse_f64(k, get(k).unwrap_or_default());
        let count = |k: &str| -> Result<usize> {
            let t = get(k).unwrap_or_default();
            t.parse().map_err(|e| parse_error(k, t, &format!("{e}")))
        };
        let flag = |k: &str| -> Result<bool> {
            match get(k).unwrap_or_default() {
                "true" | "1" | "yes" => Ok(true),
                "false" | "0" | "no" => Ok(false),
                t => Err(parse_error(k, t, "expected true or false")),
            }
        };
        let file = |k: &str, what: &str| -> Result<String> {
            get(k)
                .map(str::to_string)
                .ok_or_else(|| Error::Config(format!("{what} needs `{k}`")))
        };

        let grid = GridSpec {
            dimension: count("grid.dimension")?,
            half_width: num("grid.half_width")?,
            points_per_axis: count("grid.n")?,
            mu: num("grid.mu")?,
        };
        let potential = match get("potential.preset").unwrap_or_default() {
            "harmonic_plus" => PotentialSpec::HarmonicPlus(num("potential.c")?),
            "quartic" => PotentialSpec::Quartic(num("potential.c")?),
            "table" => PotentialSpec::Table(file("potential.file", "a potential table")?),
            other => return Err(Error::Config(format!("unknown potential preset `{other}`"))),
        };
        let rho_bar = match get("rho_bar.preset").unwrap_or_default() {
            "zero" => RhoBarSpec::Zero,
            "gaussian_product" => RhoBarSpec::GaussianProduct {
                c: num("rho_bar.c")?,
                s: num("rho_bar.s")?,
            },
            "rank_k" => RhoBarSpec::RankK(file("rho_bar.file", "a rank_k kernel")?),
            "matrix" => RhoBarSpec::Matrix(file("rho_bar.file", "a matrix kernel")?),
            other => return Err(Error::Config(format!("unknown rho_bar preset `{other}`"))),
        };
        if let RhoBarSpec::GaussianProduct { s, .. } = rho_bar {
            if !(s > 0.0) {
                return Err(Error::Config(format!("rho_bar.s must be positive, got {s}")));
            }
        }
        let gamma = num("model.gamma")?;
        if !(gamma >= 0.0) {
            return Err(Error::Config(format!("model.gamma must be nonnegative, got {gamma}")));
        }
        let tol = Tolerances {
            eig: num("tol.eig")?,
            scf: num("tol.scf")?,
            scf_change: num("tol.scf_change")?,
            ground: num("tol.ground")?,
            dual: num("tol.dual")?,
        };
        for (k, v) in [
            ("tol.eig", tol.eig),
            ("tol.scf", tol.scf),
            ("tol.scf_change", tol.scf_change),
            ("tol.ground", tol.ground),
            ("tol.dual", tol.dual),
        ] {
            if !(v > 0.0) {
                return Err(Error::Config(format!("{k} must be positive, got {v}")));
            }
        }
        let seed_text = get("run.seed").unwrap_or_default();
        let seed = seed_text
            .parse()
            .map_err(|e| parse_error("run.seed", seed_text, &format!("{e}")))?;
        Ok(RunConfig {
            grid,
            potential,
            rho_bar,
            gamma,
            lambda: get("solve.lambda").map(LambdaSpec::parse).transpose()?,
            kappa: get("solve.kappa").map(|t| parse_f64("solve.kappa", t)).transpose()?,
            lambda_grid: get("solve.lambda_grid").map(LambdaGrid::parse).transpose()?,
            tol,
            seed,
            strict: flag("run.strict")?,
            write_fields: flag("output.fields")?,
            write_kernel: flag("output.kernel")?,
            check: CheckSizes {
                directions: count("check.directions")?,
                chords: count("check.chords")?,
                lambda_points: count("check.lambda_points")?,
            },
            entries,
        })
    }

    /// Effective configuration, defaults included, in key order.
    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.entries
    }

    /// SHA-256 of the canonical `key = value` listing.
    pub fn hash(&self) -> String {
        let mut h = Sha256::new();
        for (k, v) in &self.entries {
            h.update(format!("{k} = {v}\n").as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn potential_preset(&self, nodes: usize) -> Result<PotentialPreset> {
        Ok(match &self.potential {
            PotentialSpec::HarmonicPlus(c) => PotentialPreset::HarmonicPlus(*c),
            PotentialSpec::Quartic(c) => PotentialPreset::Quartic(*c),
            PotentialSpec::Table(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| Error::Parse {
                    context: path.clone(),
                    message: e.to_string(),
                })?;
                PotentialPreset::Table(parse_potential_table(&text, nodes)?)
            }
        })
    }

    pub fn build_rho_bar(&self, grid: &Grid) -> Result<Kernel> {
        let read = |path: &str| {
            std::fs::read_to_string(path).map_err(|e| Error::Parse {
                context: path.to_string(),
                message: e.to_string(),
            })
        };
        match &self.rho_bar {
            RhoBarSpec::Zero => Ok(Kernel::zero(grid.len())),
            RhoBarSpec::GaussianProduct { c, s } => Ok(Kernel::gaussian_product(grid, *c, *s)),
            RhoBarSpec::RankK(path) => parse_rank_k(&read(path)?, grid.len()),
            RhoBarSpec::Matrix(path) => parse_matrix(&read(path)?, grid.len()),
        }
    }

    /// Rejects solve keys that do not belong to `command`, and requires the
    /// one that does.
    pub fn require_target(&self, command: &str) -> Result<()> {
        let present = [
            ("solve.lambda", self.lambda.is_some()),
            ("solve.kappa", self.kappa.is_some()),
            ("solve.lambda_grid", self.lambda_grid.is_some()),
        ];
        let wanted = match command {
            "ground" | "iop" => "solve.lambda",
            "dual" => "solve.kappa",
            "branch" => "solve.lambda_grid",
            _ => return Ok(()),
        };
        for (key, set) in present {
            if key == wanted && !set {
                return Err(Error::Config(format!("`{command}` needs `{key}`")));
            }
            if key != wanted && set {
                return Err(Error::Config(format!(
                    "`{command}` takes only `{wanted}`, found `{key}` too"
                )));
            }
        }
        Ok(())
    }
}

fn numeric_rows(text: &str, context: &str) -> Result<Vec<Vec<f64>>> {
    let mut rows = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let row = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| parse_f64(&format!("{context} line {}", lineno + 1), s))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// One factor `f_k` per row; the kernel is `Σ_k f_k ⊗ f_k`.
pub fn parse_rank_k(text: &str, nodes: usize) -> Result<Kernel> {
    let rows = numeric_rows(text, "rank_k file")?;
    if rows.is_empty() {
        return Err(Error::Config("rank_k file has no factors".into()));
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != nodes) {
        return Err(Error::GridMismatch {
            expected: nodes,
            found: bad.len(),
        });
    }
    let factors: Vec<DVector<f64>> = rows.into_iter().map(DVector::from_vec).collect();
    Kernel::from_factors(&factors)
}

/// Dense `n × n` matrix, one row per line; `#` lines (such as a dump header)
/// are skipped.
pub fn parse_matrix(text: &str, nodes: usize) -> Result<Kernel> {
    let rows = numeric_rows(text, "matrix file")?;
    if rows.len() != nodes {
        return Err(Error::GridMismatch {
            expected: nodes,
            found: rows.len(),
        });
    }
    if let Some(bad) = rows.iter().find(|r| r.len() != nodes) {
        return Err(Error::GridMismatch {
            expected: nodes,
            found: bad.len(),
        });
    }
    Kernel::from_matrix(DMatrix::from_fn(nodes, nodes, |i, j| rows[i][j]))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_and_overrides() {
        let cfg = RunConfig::from_text(
            "grid.n = 101\n# comment\nrho_bar.preset = gaussian_product",
            &["grid.n=81".into()],
        )
        .unwrap();
        assert_eq!(cfg.grid.points_per_axis, 81);
        assert_eq!(cfg.rho_bar, RhoBarSpec::GaussianProduct { c: 0.5, s: 1.0 });
        assert_eq!(cfg.entries()["grid.n"], "81");
        assert_eq!(cfg.entries()["grid.mu"], "0.5");
        assert_eq!(cfg.seed, 0);
    }

    #[test]
    fn hash_depends_on_effective_values() {
        let a = RunConfig::from_text("", &[]).unwrap();
        let b = RunConfig::from_text("grid.n = 201", &[]).unwrap();
        let c = RunConfig::from_text("grid.n = 203", &[]).unwrap();
        assert_eq!(a.hash(), b.hash());
        assert_ne!(a.hash(), c.hash());
        assert_eq!(a.hash().len(), 64);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            RunConfig::from_text("grid.size = 3", &[]),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            RunConfig::from_text("grid.n 3", &[]),
            Err(Error::Parse { .. })
        ));
        assert!(RunConfig::from_text("tol.eig = 0", &[]).is_err());
        assert!(RunConfig::from_text("grid.mu = abc", &[]).is_err());
        assert!(RunConfig::from_text("potential.preset = table", &[]).is_err());
        assert!(RunConfig::from_text("run.strict = maybe", &[]).is_err());
    }

    #[test]
    fn lambda_specs() {
        assert_eq!(LambdaSpec::parse("2.5").unwrap(), LambdaSpec::Absolute(2.5));
        assert_eq!(
            LambdaSpec::parse("lambda1 + 0.5").unwrap(),
            LambdaSpec::AboveThreshold(0.5)
        );
        assert_eq!(LambdaSpec::parse("lambda1").unwrap().resolve(1.5), 1.5);
        assert_eq!(LambdaSpec::parse("lambda1-1").unwrap().resolve(1.5), 0.5);
        assert!(LambdaSpec::parse("lambda1*2").is_err());
        let g = LambdaGrid::parse("lambda1:lambda1+2:5").unwrap();
        assert_eq!(g.resolve(1.0), vec![1.0, 1.5, 2.0, 2.5, 3.0]);
        let l = LambdaGrid::parse("1, lambda1+1").unwrap();
        assert_eq!(l.resolve(0.5), vec![1.0, 1.5]);
        assert!(LambdaGrid::parse("1:2:1").is_err());
    }

    #[test]
    fn exactly_one_target() {
        let cfg = RunConfig::from_text("solve.lambda = lambda1+1", &[]).unwrap();
        assert!(cfg.require_target("iop").is_ok());
        assert!(cfg.require_target("dual").is_err());
        assert!(cfg.require_target("eig").is_ok());
        let both = RunConfig::from_text("solve.lambda = 1\nsolve.kappa = 2", &[]).unwrap();
        assert!(both.require_target("iop").is_err());
        assert!(both.require_target("dual").is_err());
    }

    #[test]
    fn kernel_files() {
        let k = parse_rank_k("1 2 3\n0 1 0\n", 3).unwrap();
        assert_eq!(k.get(0, 1), 2.0);
        assert_eq!(k.get(1, 1), 5.0);
        assert!(parse_rank_k("1 2\n", 3).is_err());
        let m = parse_matrix("# n=2 mu=0.5 L=1\n1 2\n2 1\n", 2).unwrap();
        assert_eq!(m.get(1, 0), 2.0);
        assert!(matches!(parse_matrix("1 2\n3 1\n", 2), Err(Error::NotSymmetric(_))));
    }
}
