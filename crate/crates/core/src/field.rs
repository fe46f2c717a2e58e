//! Pulse-stream field synthesis, measurement noise and the reconstruction
//! error metric.
//!
//! A field is an `n1 x n2` grid of real readings, one per sensor, built from a
//! handful of scaled copies of a small elementary pattern. Grids are stored
//! row-major, which is also the lexicographic vectorization used by every
//! measurement operator in the crate: cell `(r, c)` lives at `r * n2 + c`.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report;
use crate::rng;

/// Rejection-sampling budget for pulse placement.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

/// Default pulse scale range.
pub const DEFAULT_SCALE_RANGE: (f64, f64) = (0.5, 0.85);

/// Elementary square pattern replicated to build a pulse stream.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulsePattern {
    side: usize,
    values: Vec<f64>,
}

impl PulsePattern {
    pub fn new(side: usize, values: Vec<f64>) -> Result<Self> {
        if side == 0 {
            return Err(Error::InvalidArgument("pattern side must be >= 1".into()));
        }
        if values.len() != side * side {
            return Err(Error::DimensionMismatch {
                expected: side * side,
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("pattern values must be finite".into()));
        }
        Ok(Self { side, values })
    }

    /// Constant-one block of the given side.
    pub fn block(side: usize) -> Result<Self> {
        Self::new(side, vec![1.0; side * side])
    }

    pub fn side(&self) -> usize {
        self.side
    }

    /// Row-major pattern values.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, dr: usize, dc: usize) -> f64 {
        self.values[dr * self.side + dc]
    }

    pub fn energy(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

impl Default for PulsePattern {
    fn default() -> Self {
        Self {
            side: 5,
            values: vec![1.0; 25],
        }
    }
}

/// Placement of one scaled pattern copy; `(row, col)` is the top-left cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseSpec {
    pub row: usize,
    pub col: usize,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseField {
    n1: usize,
    n2: usize,
    cells: Vec<f64>,
    pulses: Vec<PulseSpec>,
    pattern: PulsePattern,
}

impl PulseField {
    /// Superimposes scaled copies of `pattern` at the given placements.
    pub fn from_pulses(
        n1: usize,
        n2: usize,
        pattern: PulsePattern,
        pulses: Vec<PulseSpec>,
    ) -> Result<Self> {
        let side = pattern.side();
        let mut cells = vec![0.0; n1 * n2];
        for p in &pulses {
            if p.row + side > n1 || p.col + side > n2 {
                return Err(Error::InvalidArgument(format!(
                    "pulse at ({}, {}) does not fit in a {n1}x{n2} grid",
                    p.row, p.col
                )));
            }
            for dr in 0..side {
                for dc in 0..side {
                    cells[(p.row + dr) * n2 + p.col + dc] += p.scale * pattern.get(dr, dc);
                }
            }
        }
        Ok(Self {
            n1,
            n2,
            cells,
            pulses,
            pattern,
        })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    /// Lexicographically ordered field vector.
    pub fn vector(&self) -> &[f64] {
        &self.cells
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.cells[r * self.n2 + c]
    }

    pub fn pulses(&self) -> &[PulseSpec] {
        &self.pulses
    }

    pub fn pattern(&self) -> &PulsePattern {
        &self.pattern
    }

    pub fn energy(&self) -> f64 {
        self.cells.iter().map(|v| v * v).sum()
    }

    pub fn nonzero_count(&self) -> usize {
        self.cells.iter().filter(|v| **v != 0.0).count()
    }

    /// Rows of the grid, for display or CSV output.
    pub fn to_grid(&self) -> Vec<Vec<f64>> {
        devectorize(&self.cells, self.n1, self.n2).expect("cells match dimensions")
    }

    /// Writes the grid as CSV (`n1` lines of `n2` comma-separated values).
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_grid_csv(path, &self.cells, self.n1, self.n2)
    }

    /// Writes the JSON sidecar describing the pulse placements.
    pub fn write_sidecar(&self, path: &Path) -> Result<()> {
        report::write_json(path, &self.sidecar())
    }

    pub fn sidecar(&self) -> FieldSidecar {
        FieldSidecar {
            n1: self.n1,
            n2: self.n2,
            pattern: self.pattern.clone(),
            pulses: self.pulses.clone(),
        }
    }
}

/// JSON description of a synthesized field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSidecar {
    pub n1: usize,
    pub n2: usize,
    pub pattern: PulsePattern,
    pub pulses: Vec<PulseSpec>,
}

impl FieldSidecar {
    pub fn into_field(self) -> Result<PulseField> {
        PulseField::from_pulses(self.n1, self.n2, self.pattern, self.pulses)
    }
}

/// Measurement-domain white Gaussian noise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub variance: f64,
}

/// Draws `count` disjoint pulses at uniformly random positions with scales
/// uniform in `scale_range`.
pub fn synth_pulse_field(
    n1: usize,
    n2: usize,
    count: usize,
    scale_range: (f64, f64),
    pattern: &PulsePattern,
    seed: u64,
) -> Result<PulseField> {
    let side = pattern.side();
    if n1 < side || n2 < side {
        return Err(Error::InvalidArgument(format!(
            "grid {n1}x{n2} is smaller than the pattern side {side}"
        )));
    }
    let (lo, hi) = scale_range;
    if !(lo.is_finite() && hi.is_finite()) || lo > hi {
        return Err(Error::InvalidArgument(format!(
            "bad scale range [{lo}, {hi}]"
        )));
    }
    let infeasible = || Error::PlacementInfeasible {
        count,
        side,
        n1,
        n2,
        attempts: MAX_PLACEMENT_ATTEMPTS,
    };
    if count * side * side > n1 * n2 {
        return Err(infeasible());
    }

    let mut rng = rng::seeded(seed);
    let mut pulses: Vec<PulseSpec> = Vec::with_capacity(count);
    let mut attempts = 0;
    while pulses.len() < count {
        if attempts == MAX_PLACEMENT_ATTEMPTS {
            return Err(infeasible());
        }
        attempts += 1;
        let row = rng.random_range(0..=n1 - side);
        let col = rng.random_range(0..=n2 - side);
        let overlaps = pulses
            .iter()
            .any(|p| p.row.abs_diff(row) < side && p.col.abs_diff(col) < side);
        if overlaps {
            continue;
        }
        let scale = if lo == hi { lo } else { rng.random_range(lo..=hi) };
        pulses.push(PulseSpec { row, col, scale });
    }
    PulseField::from_pulses(n1, n2, pattern.clone(), pulses)
}

/// Returns `y + n` with `n` i.i.d. zero-mean Gaussian of the given variance.
pub fn add_noise(y: &[f64], noise: &NoiseSpec, seed: u64) -> Result<Vec<f64>> {
    if !(noise.variance >= 0.0) || !noise.variance.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "noise variance must be finite and >= 0, got {}",
            noise.variance
        )));
    }
    if noise.variance == 0.0 {
        return Ok(y.to_vec());
    }
    let normal = Normal::new(0.0, noise.variance.sqrt())
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = rng::seeded(seed);
    Ok(y.iter().map(|v| v + normal.sample(&mut rng)).collect())
}

/// Un-normalized squared error `(z - z_hat)^T (z - z_hat)`.
pub fn sse(z: &[f64], z_hat: &[f64]) -> Result<f64> {
    if z.len() != z_hat.len() {
        return Err(Error::DimensionMismatch {
            expected: z.len(),
            actual: z_hat.len(),
        });
    }
    Ok(z.iter().zip(z_hat).map(|(a, b)| (a - b) * (a - b)).sum())
}

/// Squared error divided by the field energy. Reporting only.
pub fn relative_sse(z: &[f64], z_hat: &[f64]) -> Result<f64> {
    let e: f64 = z.iter().map(|v| v * v).sum();
    Ok(sse(z, z_hat)? / e)
}

pub fn vectorize(grid: &[Vec<f64>]) -> Vec<f64> {
    grid.iter().flatten().copied().collect()
}

pub fn devectorize(v: &[f64], n1: usize, n2: usize) -> Result<Vec<Vec<f64>>> {
    if v.len() != n1 * n2 {
        return Err(Error::DimensionMismatch {
            expected: n1 * n2,
            actual: v.len(),
        });
    }
    if n2 == 0 {
        return Ok(vec![Vec::new(); n1]);
    }
    Ok(v.chunks(n2).map(<[f64]>::to_vec).collect())
}

/// Writes a row-major vector as an `n1`-line CSV grid.
pub fn write_grid_csv(path: &Path, v: &[f64], n1: usize, n2: usize) -> Result<()> {
    let grid = devectorize(v, n1, n2)?;
    let mut s = String::new();
    for row in grid {
        let line: Vec<String> = row.iter().map(|x| format!("{x}")).collect();
        let _ = writeln!(s, "{}", line.join(","));
    }
    report::write_atomic(path, s.as_bytes())
}

/// Reads a CSV grid back into `(n1, n2, row-major values)`.
pub fn read_grid_csv(path: &Path) -> Result<(usize, usize, Vec<f64>)> {
    let text = report::read_to_string(path)?;
    let mut values = Vec::new();
    let mut n1 = 0;
    let mut n2 = None;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Vec<f64> = line
            .split(',')
            .map(|t| t.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Config(format!("{}:{}: {e}", path.display(), lineno + 1)))?;
        match n2 {
            None => n2 = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Config(format!(
                    "{}:{}: expected {w} columns, got {}",
                    path.display(),
                    lineno + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        values.extend(row);
        n1 += 1;
    }
    Ok((n1, n2.unwrap_or(0), values))
}
