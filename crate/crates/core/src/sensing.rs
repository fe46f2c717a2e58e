//! Radon-like sparse measurement matrices and the baseline operators.
//!
//! A Radon-like projection accumulates randomly weighted readings along one
//! straight path of the grid. Four directions are supported, each realized as
//! an exact re-indexing of the grid:
//!
//! | angle   | paths                    | count `K`      |
//! |---------|--------------------------|----------------|
//! | `0`     | grid columns             | `n2`           |
//! | `pi/2`  | grid rows                | `n1`           |
//! | `pi/4`  | lines with `r - c` fixed | `n1 + n2 - 1`  |
//! | `-pi/4` | lines with `r + c` fixed | `n1 + n2 - 1`  |
//!
//! Stacking the per-angle projections gives an `M x N` matrix with exactly
//! one nonzero per column and angle.

use std::fmt;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::index;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Angle {
    /// Column-wise accumulation.
    Zero,
    /// Row-wise accumulation.
    HalfPi,
    /// Diagonals with constant `r - c`.
    QuarterPi,
    /// Anti-diagonals with constant `r + c`.
    MinusQuarterPi,
}

impl Angle {
    pub const ALL: [Angle; 4] = [
        Angle::Zero,
        Angle::HalfPi,
        Angle::QuarterPi,
        Angle::MinusQuarterPi,
    ];

    /// Number of paths `K` on an `n1 x n2` grid.
    pub fn path_count(self, n1: usize, n2: usize) -> usize {
        match self {
            Angle::Zero => n2,
            Angle::HalfPi => n1,
            Angle::QuarterPi | Angle::MinusQuarterPi => n1 + n2 - 1,
        }
    }

    /// Path index containing cell `(r, c)`.
    pub fn path_of(self, r: usize, c: usize, n1: usize, n2: usize) -> usize {
        let _ = n1;
        match self {
            Angle::Zero => c,
            Angle::HalfPi => r,
            Angle::QuarterPi => r + n2 - 1 - c,
            Angle::MinusQuarterPi => r + c,
        }
    }

    pub fn is_diagonal(self) -> bool {
        matches!(self, Angle::QuarterPi | Angle::MinusQuarterPi)
    }

    pub fn radians(self) -> f64 {
        use std::f64::consts::FRAC_PI_2;
        use std::f64::consts::FRAC_PI_4;
        match self {
            Angle::Zero => 0.0,
            Angle::HalfPi => FRAC_PI_2,
            Angle::QuarterPi => FRAC_PI_4,
            Angle::MinusQuarterPi => -FRAC_PI_4,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Angle::Zero => "0",
            Angle::HalfPi => "pi/2",
            Angle::QuarterPi => "pi/4",
            Angle::MinusQuarterPi => "-pi/4",
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Angle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "0" | "zero" => Ok(Angle::Zero),
            "pi/2" | "90" => Ok(Angle::HalfPi),
            "pi/4" | "+pi/4" | "45" => Ok(Angle::QuarterPi),
            "-pi/4" | "-45" => Ok(Angle::MinusQuarterPi),
            other => Err(Error::UnsupportedAngle(other.to_string())),
        }
    }
}

impl TryFrom<String> for Angle {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Angle> for String {
    fn from(a: Angle) -> String {
        a.as_str().to_string()
    }
}

/// Ordered, duplicate-free set of projection directions.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Angle>", into = "Vec<Angle>")]
pub struct AngleSet {
    angles: Vec<Angle>,
}

impl AngleSet {
    pub fn new(angles: Vec<Angle>) -> Result<Self> {
        if angles.is_empty() {
            return Err(Error::InvalidArgument("angle set is empty".into()));
        }
        for (i, a) in angles.iter().enumerate() {
            if angles[..i].contains(a) {
                return Err(Error::InvalidArgument(format!("duplicate angle {a}")));
            }
        }
        Ok(Self { angles })
    }

    /// The standard nested sets: `P = 2` rows and columns, `P = 3` adds
    /// `pi/4`, `P = 4` adds `-pi/4`.
    pub fn standard(p: usize) -> Result<Self> {
        match p {
            1..=4 => Self::new(vec![Angle::Zero, Angle::HalfPi, Angle::QuarterPi, Angle::MinusQuarterPi][..p].to_vec()),
            _ => Err(Error::InvalidArgument(format!(
                "only 1 to 4 exact angles exist, got P = {p}"
            ))),
        }
    }

    pub fn angles(&self) -> &[Angle] {
        &self.angles
    }

    pub fn len(&self) -> usize {
        self.angles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.angles.is_empty()
    }

    pub fn contains(&self, a: Angle) -> bool {
        self.angles.contains(&a)
    }

    /// Total measurement count `M` on an `n1 x n2` grid.
    pub fn measurement_count(&self, n1: usize, n2: usize) -> usize {
        self.angles.iter().map(|a| a.path_count(n1, n2)).sum()
    }
}

impl TryFrom<Vec<Angle>> for AngleSet {
    type Error = Error;

    fn try_from(v: Vec<Angle>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<AngleSet> for Vec<Angle> {
    fn from(s: AngleSet) -> Vec<Angle> {
        s.angles
    }
}

impl fmt::Display for AngleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = self.angles.iter().map(|a| a.as_str()).collect();
        write!(f, "{}", names.join(";"))
    }
}

/// A family of partitions of the grid cells into accumulation groups, one
/// partition per projection.
pub trait ProjectionPartition {
    fn n_cells(&self) -> usize;
    /// `projections()[p][m]` lists the cells summed into measurement `m` of
    /// projection `p`.
    fn projections(&self) -> &[Vec<Vec<usize>>];
}

/// Per-angle partition of the grid into straight paths.
#[derive(Debug, Clone, PartialEq)]
pub struct PathIndexMap {
    n1: usize,
    n2: usize,
    angles: AngleSet,
    paths: Vec<Vec<Vec<usize>>>,
}

impl PathIndexMap {
    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn angles(&self) -> &AngleSet {
        &self.angles
    }

    /// Path count `K(p)` of the `p`-th angle.
    pub fn k(&self, p: usize) -> usize {
        self.paths[p].len()
    }

    /// Cells of path `m` for the `p`-th angle, ordered by increasing row.
    pub fn path(&self, p: usize, m: usize) -> &[usize] {
        &self.paths[p][m]
    }

    pub fn measurement_count(&self) -> usize {
        self.paths.iter().map(Vec::len).sum()
    }
}

impl ProjectionPartition for PathIndexMap {
    fn n_cells(&self) -> usize {
        self.n1 * self.n2
    }

    fn projections(&self) -> &[Vec<Vec<usize>>] {
        &self.paths
    }
}

pub fn build_path_map(n1: usize, n2: usize, angles: &AngleSet) -> Result<PathIndexMap> {
    if n1 == 0 || n2 == 0 {
        return Err(Error::InvalidArgument(format!("empty grid {n1}x{n2}")));
    }
    let paths = angles
        .angles()
        .iter()
        .map(|&a| {
            let mut p = vec![Vec::new(); a.path_count(n1, n2)];
            // Row-major traversal keeps every path ordered by increasing row
            // and increasing cell index.
            for r in 0..n1 {
                for c in 0..n2 {
                    p[a.path_of(r, c, n1, n2)].push(r * n2 + c);
                }
            }
            p
        })
        .collect();
    Ok(PathIndexMap {
        n1,
        n2,
        angles: angles.clone(),
        paths,
    })
}

/// Linear operator from field vectors (length `cols`) to measurements
/// (length `rows`).
pub trait MeasurementOperator: Sync {
    fn rows(&self) -> usize;
    fn cols(&self) -> usize;
    /// `y = A x`; slices must have matching lengths.
    fn apply_into(&self, x: &[f64], y: &mut [f64]);
    /// `x = A^T y`; slices must have matching lengths.
    fn adjoint_into(&self, y: &[f64], x: &mut [f64]);
    /// Nonzero entries `(row, value)` of column `j`.
    fn column_entries(&self, j: usize) -> Vec<(usize, f64)>;
}

/// Checked `y = A z`.
pub fn apply<O: MeasurementOperator + ?Sized>(op: &O, z: &[f64]) -> Result<Vec<f64>> {
    if z.len() != op.cols() {
        return Err(Error::DimensionMismatch {
            expected: op.cols(),
            actual: z.len(),
        });
    }
    let mut y = vec![0.0; op.rows()];
    op.apply_into(z, &mut y);
    Ok(y)
}

/// Checked `x = A^T y`.
pub fn apply_adjoint<O: MeasurementOperator + ?Sized>(op: &O, y: &[f64]) -> Result<Vec<f64>> {
    if y.len() != op.rows() {
        return Err(Error::DimensionMismatch {
            expected: op.rows(),
            actual: y.len(),
        });
    }
    let mut x = vec![0.0; op.cols()];
    op.adjoint_into(y, &mut x);
    Ok(x)
}

/// Sparse `M x N` Radon-like matrix in CSR form, plus a per-column index.
#[derive(Debug, Clone, PartialEq)]
pub struct RadonMatrix {
    n1: usize,
    n2: usize,
    angles: AngleSet,
    seed: u64,
    variance: f64,
    segments: Vec<usize>,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    // column j occupies col_entries[j * P..(j + 1) * P], one per angle
    col_entries: Vec<(usize, f64)>,
}

/// Builds `Phi_R` with i.i.d. `N(0, 1/P)` coefficients.
pub fn build_radon_matrix(map: &PathIndexMap, seed: u64) -> RadonMatrix {
    let variance = 1.0 / map.angles().len() as f64;
    build_radon_matrix_with_variance(map, seed, variance).expect("1/P is a valid variance")
}

/// As [`build_radon_matrix`] with an explicit coefficient variance.
/// Diagnostics only; `1/P` keeps the measurement energy unbiased.
pub fn build_radon_matrix_with_variance(
    map: &PathIndexMap,
    seed: u64,
    variance: f64,
) -> Result<RadonMatrix> {
    if !(variance > 0.0 && variance.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "coefficient variance must be positive, got {variance}"
        )));
    }
    let normal =
        Normal::new(0.0, variance.sqrt()).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = rng::seeded(seed);
    let n = map.n_cells();
    let p_count = map.angles().len();
    let m_total = map.measurement_count();

    let mut segments = Vec::with_capacity(p_count + 1);
    let mut row_ptr = Vec::with_capacity(m_total + 1);
    let mut col_idx = Vec::with_capacity(n * p_count);
    let mut values = Vec::with_capacity(n * p_count);
    let mut col_entries = vec![(0usize, 0.0f64); n * p_count];
    row_ptr.push(0);
    let mut row = 0;
    for (p, paths) in map.projections().iter().enumerate() {
        segments.push(row);
        for path in paths {
            for &cell in path {
                let v = normal.sample(&mut rng);
                col_idx.push(cell);
                values.push(v);
                col_entries[cell * p_count + p] = (row, v);
            }
            row += 1;
            row_ptr.push(col_idx.len());
        }
    }
    segments.push(row);
    Ok(RadonMatrix {
        n1: map.n1(),
        n2: map.n2(),
        angles: map.angles().clone(),
        seed,
        variance,
        segments,
        row_ptr,
        col_idx,
        values,
        col_entries,
    })
}

impl RadonMatrix {
    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn angles(&self) -> &AngleSet {
        &self.angles
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn variance(&self) -> f64 {
        self.variance
    }

    pub fn m_rows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn n_cols(&self) -> usize {
        self.n1 * self.n2
    }

    /// Row range of the `p`-th angle's segment.
    pub fn segment(&self, p: usize) -> std::ops::Range<usize> {
        self.segments[p]..self.segments[p + 1]
    }

    /// `(column, coefficient)` pairs of a row, in path order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    /// Row and coefficient of `cell` in the `p`-th angle's segment.
    pub fn entry(&self, cell: usize, p: usize) -> (usize, f64) {
        self.col_entries[cell * self.angles.len() + p]
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// All nonzero coefficients in storage order.
    pub fn coefficients(&self) -> &[f64] {
        &self.values
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DMatrix::zeros(self.m_rows(), self.n_cols());
        for i in 0..self.m_rows() {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        DenseMatrix { data: d }
    }

    /// Writes `(row, col, value)` triplets as CSV and a JSON header.
    pub fn write_triplets(&self, csv: &Path, header: &Path) -> Result<()> {
        let mut s = String::from("row,col,value\n");
        for i in 0..self.m_rows() {
            for (j, v) in self.row(i) {
                let _ = writeln!(s, "{i},{j},{v}");
            }
        }
        report::write_atomic(csv, s.as_bytes())?;
        report::write_json(header, &self.header())
    }

    pub fn header(&self) -> MatrixHeader {
        MatrixHeader {
            n1: self.n1,
            n2: self.n2,
            angles: self.angles.clone(),
            seed: self.seed,
            m: self.m_rows(),
            n: self.n_cols(),
        }
    }
}

impl MeasurementOperator for RadonMatrix {
    fn rows(&self) -> usize {
        self.m_rows()
    }

    fn cols(&self) -> usize {
        self.n_cols()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    fn adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        let p = self.angles.len();
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = self.col_entries[j * p..(j + 1) * p]
                .iter()
                .map(|&(i, v)| v * y[i])
                .sum();
        }
    }

    fn column_entries(&self, j: usize) -> Vec<(usize, f64)> {
        let p = self.angles.len();
        self.col_entries[j * p..(j + 1) * p].to_vec()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixHeader {
    pub n1: usize,
    pub n2: usize,
    pub angles: AngleSet,
    pub seed: u64,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
}

/// Row-subsampling operator: observes `z[indices[i]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RsMatrix {
    n: usize,
    indices: Vec<usize>,
}

pub fn build_rs_matrix(n: usize, m: usize, seed: u64) -> Result<RsMatrix> {
    if m == 0 || m > n {
        return Err(Error::InvalidArgument(format!(
            "need 0 < m <= n, got m = {m}, n = {n}"
        )));
    }
    let mut rng = rng::seeded(seed);
    let mut indices = index::sample(&mut rng, n, m).into_vec();
    indices.sort_unstable();
    Ok(RsMatrix { n, indices })
}

impl RsMatrix {
    pub fn from_indices(n: usize, mut indices: Vec<usize>) -> Result<Self> {
        indices.sort_unstable();
        indices.dedup();
        if indices.last().is_some_and(|&i| i >= n) {
            return Err(Error::InvalidArgument("sample index out of range".into()));
        }
        Ok(Self { n, indices })
    }

    /// Sorted, distinct observed cells.
    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

impl MeasurementOperator for RsMatrix {
    fn rows(&self) -> usize {
        self.indices.len()
    }

    fn cols(&self) -> usize {
        self.n
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (yi, &j) in y.iter_mut().zip(&self.indices) {
            *yi = x[j];
        }
    }

    fn adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        x.fill(0.0);
        for (&yi, &j) in y.iter().zip(&self.indices) {
            x[j] = yi;
        }
    }

    fn column_entries(&self, j: usize) -> Vec<(usize, f64)> {
        match self.indices.binary_search(&j) {
            Ok(i) => vec![(i, 1.0)],
            Err(_) => Vec::new(),
        }
    }
}

/// Dense measurement operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    data: DMatrix<f64>,
}

/// Dense `m x n` matrix with i.i.d. `N(0, 1/m)` entries.
pub fn build_dense_gaussian(m: usize, n: usize, seed: u64) -> Result<DenseMatrix> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("empty shape {m}x{n}")));
    }
    let normal = Normal::new(0.0, (1.0 / m as f64).sqrt())
        .map_err(|e| Error::InvalidArgument(e.to_string()))?;
    let mut rng = rng::seeded(seed);
    // Filled column by column (nalgebra storage order).
    let data = DMatrix::from_fn(m, n, |_, _| normal.sample(&mut rng));
    Ok(DenseMatrix { data })
}

impl DenseMatrix {
    pub fn from_matrix(data: DMatrix<f64>) -> Self {
        Self { data }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.data
    }
}

impl MeasurementOperator for DenseMatrix {
    fn rows(&self) -> usize {
        self.data.nrows()
    }

    fn cols(&self) -> usize {
        self.data.ncols()
    }

    fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (j, xj) in x.iter().enumerate() {
                acc += self.data[(i, j)] * xj;
            }
            *yi = acc;
        }
    }

    fn adjoint_into(&self, y: &[f64], x: &mut [f64]) {
        for (j, xj) in x.iter_mut().enumerate() {
            *xj = self.data.column(j).iter().zip(y).map(|(a, b)| a * b).sum();
        }
    }

    fn column_entries(&self, j: usize) -> Vec<(usize, f64)> {
        self.data
            .column(j)
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| (i, *v))
            .collect()
    }
}
