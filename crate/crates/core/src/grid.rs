//! Truncated computational domain, confining potential and the regularized
//! Riesz weight table `|x - y|^{-mu}`.
//!
//! The domain is the box `[-L, L]^N` (N = 1 or 2) sampled on a uniform grid
//! with Dirichlet zero boundary. Integrals use the rectangle rule with the
//! uniform weight `h^N`.

use std::f64::consts::PI;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const MIN_POINTS: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub dimension: usize,
    pub half_width: f64,
    pub points_per_axis: usize,
    pub mu: f64,
}

impl GridSpec {
    pub fn one_dimensional(half_width: f64, points_per_axis: usize, mu: f64) -> Self {
        Self {
            dimension: 1,
            half_width,
            points_per_axis,
            mu,
        }
    }

    /// Upper end of the admissible interval for `mu`, `min(N, 4)`.
    pub fn mu_upper(&self) -> f64 {
        (self.dimension as f64).min(4.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=2).contains(&self.dimension) {
            return Err(Error::InvalidDimension(self.dimension));
        }
        if !(self.half_width > 0.0) || !self.half_width.is_finite() {
            return Err(Error::InvalidHalfWidth(self.half_width));
        }
        if self.points_per_axis < MIN_POINTS {
            return Err(Error::TooFewPoints(self.points_per_axis));
        }
        let upper = self.mu_upper();
        if !(self.mu > 0.0 && self.mu < upper) {
            return Err(Error::InvalidMu {
                mu: self.mu,
                upper,
                dimension: self.dimension,
            });
        }
        Ok(())
    }
}

/// Uniform nodes `-L + i h` with `h = 2L / (n - 1)`.
pub fn uniform_axis(half_width: f64, points: usize) -> (Vec<f64>, f64) {
    let h = 2.0 * half_width / (points as f64 - 1.0);
    let axis = (0..points).map(|i| -half_width + i as f64 * h).collect();
    (axis, h)
}

#[derive(Debug, Clone)]
pub struct Grid {
    spec: GridSpec,
    axis: Vec<f64>,
    spacing: f64,
    weight: f64,
    /// Node coordinates; the second component is zero when N = 1.
    coords: Vec<[f64; 2]>,
}

impl Grid {
    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn dimension(&self) -> usize {
        self.spec.dimension
    }

    pub fn mu(&self) -> f64 {
        self.spec.mu
    }

    pub fn axis(&self) -> &[f64] {
        &self.axis
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Quadrature weight `h^N` attached to every node.
    pub fn weight(&self) -> f64 {
        self.weight
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }

    pub fn norm2_at(&self, k: usize) -> f64 {
        let [x, y] = self.coords[k];
        x * x + y * y
    }

    pub fn distance(&self, a: usize, b: usize) -> f64 {
        let [xa, ya] = self.coords[a];
        let [xb, yb] = self.coords[b];
        ((xa - xb).powi(2) + (ya - yb).powi(2)).sqrt()
    }

    /// True when the node touches the edge of the box.
    pub fn is_boundary(&self, k: usize) -> bool {
        let n = self.spec.points_per_axis;
        let edge = |i: usize| i == 0 || i == n - 1;
        match self.spec.dimension {
            1 => edge(k),
            _ => edge(k / n) || edge(k % n),
        }
    }

    /// Index of the node closest to the origin (first one on ties).
    pub fn center_index(&self) -> usize {
        (0..self.len())
            .min_by(|&a, &b| self.norm2_at(a).total_cmp(&self.norm2_at(b)))
            .unwrap_or(0)
    }
}

pub fn build_grid(spec: GridSpec) -> Result<Grid> {
    spec.validate()?;
    let (axis, spacing) = uniform_axis(spec.half_width, spec.points_per_axis);
    let coords: Vec<[f64; 2]> = match spec.dimension {
        1 => axis.iter().map(|&x| [x, 0.0]).collect(),
        _ => axis.iter().flat_map(|&x| axis.iter().map(move |&y| [x, y])).collect(),
    };
    Ok(Grid {
        spec,
        weight: spacing.powi(spec.dimension as i32),
        axis,
        spacing,
        coords,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialPreset {
    /// `V(x) = |x|^2 + c`.
    HarmonicPlus(f64),
    /// `V(x) = |x|^4 + c`.
    Quartic(f64),
    /// Explicit node values.
    Table(Vec<f64>),
}

#[derive(Debug, Clone)]
pub struct Potential {
    values: Vec<f64>,
    floor: f64,
}

impl Potential {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `a_V`, the minimum over the grid nodes.
    pub fn floor(&self) -> f64 {
        self.floor
    }

    pub fn max(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Builds the confining potential. With `strict` a boundary value below the
/// central value is an error; otherwise it is only logged.
pub fn build_potential(grid: &Grid, preset: &PotentialPreset, strict: bool) -> Result<Potential> {
    let values: Vec<f64> = match preset {
        PotentialPreset::HarmonicPlus(c) => (0..grid.len()).map(|k| grid.norm2_at(k) + c).collect(),
        PotentialPreset::Quartic(c) => (0..grid.len()).map(|k| grid.norm2_at(k).powi(2) + c).collect(),
        PotentialPreset::Table(v) => {
            if v.len() != grid.len() {
                return Err(Error::TableLength {
                    expected: grid.len(),
                    found: v.len(),
                });
            }
            v.clone()
        }
    };
    if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(**v > 0.0) || !v.is_finite()) {
        return Err(Error::FloorViolated { index, value });
    }
    let center = values[grid.center_index()];
    let boundary = (0..grid.len())
        .filter(|&k| grid.is_boundary(k))
        .map(|k| values[k])
        .fold(f64::INFINITY, f64::min);
    if boundary < center {
        if strict {
            return Err(Error::ConfinementSuspect { boundary, center });
        }
        log::warn!("potential is not confining: boundary {boundary} < center {center}");
    }
    let floor = values.iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(Potential { values, floor })
}

/// Reads a two-column `index value` table. Blank lines and `#` comments are
/// skipped; rows may come in any order but every node must appear once.
pub fn read_potential_table(path: &Path, nodes: usize) -> Result<Vec<f64>> {
    let text = std::fs::read_to_string(path)?;
    parse_potential_table(&text, nodes)
}

pub fn parse_potential_table(text: &str, nodes: usize) -> Result<Vec<f64>> {
    let parse_err = |line: usize, message: String| Error::Parse {
        context: format!("potential table line {}", line + 1),
        message,
    };
    let mut values = vec![f64::NAN; nodes];
    let mut rows = 0;
    for (lineno, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut cols = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty());
        let (Some(idx), Some(val), None) = (cols.next(), cols.next(), cols.next()) else {
            return Err(parse_err(lineno, "expected two columns".into()));
        };
        let idx: usize = idx.parse().map_err(|e| parse_err(lineno, format!("{e}")))?;
        let val: f64 = val.parse().map_err(|e| parse_err(lineno, format!("{e}")))?;
        rows += 1;
        if idx >= nodes {
            return Err(Error::TableLength {
                expected: nodes,
                found: idx + 1,
            });
        }
        values[idx] = val;
    }
    if rows != nodes || values.iter().any(|v| v.is_nan()) {
        return Err(Error::TableLength {
            expected: nodes,
            found: rows,
        });
    }
    Ok(values)
}

/// How the singular diagonal `i = j` of the Riesz kernel is regularized.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DiagonalRule {
    /// `(1/h) * int_{-h/2}^{h/2} |s|^{-mu} ds = (h/2)^{-mu} / (1 - mu)`.
    CellAverage1d,
    /// Average of `|s|^{-mu}` over a disc of area `h^2`:
    /// `2 a^{-mu} / (2 - mu)` with `a = h / sqrt(pi)`.
    DiscAverage2d,
}

#[derive(Debug, Clone)]
pub struct RieszTable {
    weights: DMatrix<f64>,
    diagonal_rule: DiagonalRule,
}

impl RieszTable {
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.weights[(i, j)]
    }

    pub fn diagonal_rule(&self) -> DiagonalRule {
        self.diagonal_rule
    }
}

pub fn diagonal_weight(rule: DiagonalRule, spacing: f64, mu: f64) -> f64 {
    match rule {
        DiagonalRule::CellAverage1d => (0.5 * spacing).powf(-mu) / (1.0 - mu),
        DiagonalRule::DiscAverage2d => {
            let radius = spacing / PI.sqrt();
            2.0 * radius.powf(-mu) / (2.0 - mu)
        }
    }
}

pub fn build_riesz(grid: &Grid) -> RieszTable {
    let mu = grid.mu();
    let rule = match grid.dimension() {
        1 => DiagonalRule::CellAverage1d,
        _ => DiagonalRule::DiscAverage2d,
    };
    let diag = diagonal_weight(rule, grid.spacing(), mu);
    let n = grid.len();
    let mut weights = DMatrix::zeros(n, n);
    for j in 0..n {
        weights[(j, j)] = diag;
        for i in (j + 1)..n {
            let r = grid.distance(i, j).powf(-mu);
            weights[(i, j)] = r;
            weights[(j, i)] = r;
        }
    }
    RieszTable {
        weights,
        diagonal_rule: rule,
    }
}
