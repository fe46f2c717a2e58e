//! Greedy sparse recovery: CoSaMP over individual cells and a pulse-stream
//! model-based CoSaMP over pattern placements.
//!
//! The model-based solver works on the composite operator `A = Phi H`, where
//! column `j` of `H` places the known pulse pattern with its top-left corner at
//! anchor `j`. Candidate and pruning steps pick anchors greedily under the
//! constraint that their footprints are disjoint, so the recovered field is
//! always a union of at most `pulse_count` disjoint blocks.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{self, PulsePattern};
use crate::linalg;
use crate::report;
use crate::sensing::{self, MeasurementOperator, RsMatrix};

pub const DEFAULT_ITERATIONS: usize = 20;
pub const DEFAULT_RESIDUAL_TOL: f64 = 1e-9;

/// Upper bound on how far candidate anchors are widened in each direction.
const MAX_NEIGHBOR_RADIUS: usize = 2;
/// Shift radius and pass budget of the post-pruning refinement.
const REFINE_RADIUS: usize = 2;
const MAX_REFINE_PASSES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SignalModel {
    Generic,
    PulseStream {
        pulse_side: usize,
        pulse_count: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub iterations: usize,
    /// Nonzero-cell budget.
    pub sparsity_k: usize,
    pub model: SignalModel,
    pub residual_tol: f64,
}

impl SolverConfig {
    pub fn generic(sparsity_k: usize) -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            sparsity_k,
            model: SignalModel::Generic,
            residual_tol: DEFAULT_RESIDUAL_TOL,
        }
    }

    pub fn pulse_stream(pulse_side: usize, pulse_count: usize) -> Self {
        Self {
            iterations: DEFAULT_ITERATIONS,
            sparsity_k: pulse_side * pulse_side * pulse_count,
            model: SignalModel::PulseStream {
                pulse_side,
                pulse_count,
            },
            residual_tol: DEFAULT_RESIDUAL_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 {
            return Err(Error::InvalidArgument("iterations must be >= 1".into()));
        }
        if self.sparsity_k == 0 {
            return Err(Error::InvalidArgument("sparsity_k must be >= 1".into()));
        }
        if !(self.residual_tol >= 0.0) {
            return Err(Error::InvalidArgument("residual_tol must be >= 0".into()));
        }
        if let SignalModel::PulseStream {
            pulse_side,
            pulse_count,
        } = self.model
        {
            if pulse_side == 0 || pulse_count == 0 {
                return Err(Error::InvalidArgument(
                    "pulse_side and pulse_count must be >= 1".into(),
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconResult {
    pub z_hat: Vec<f64>,
    pub residual_norm: f64,
    pub iterations_run: usize,
    /// Sorted cell indices that may be nonzero in `z_hat`.
    pub support: Vec<usize>,
    /// Residual norm after each accepted iteration, starting with `||y||`.
    pub residual_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReconSummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sse: Option<f64>,
    pub residual_norm: f64,
    pub iterations_run: usize,
}

impl ReconResult {
    fn zero(n: usize, y_norm: f64) -> Self {
        Self {
            z_hat: vec![0.0; n],
            residual_norm: y_norm,
            iterations_run: 0,
            support: Vec::new(),
            residual_history: vec![y_norm],
        }
    }

    /// JSON summary; `sse` is filled when the true field is known.
    pub fn summary(&self, truth: Option<&[f64]>) -> Result<ReconSummary> {
        let sse = truth.map(|z| field::sse(z, &self.z_hat)).transpose()?;
        Ok(ReconSummary {
            sse,
            residual_norm: self.residual_norm,
            iterations_run: self.iterations_run,
        })
    }

    pub fn write_json(&self, path: &Path, truth: Option<&[f64]>) -> Result<()> {
        report::write_json(path, &self.summary(truth)?)
    }

    pub fn write_field_csv(&self, path: &Path, n1: usize, n2: usize) -> Result<()> {
        field::write_grid_csv(path, &self.z_hat, n1, n2)
    }
}

fn check_dims<O: MeasurementOperator + ?Sized>(y: &[f64], op: &O) -> Result<()> {
    if y.len() != op.rows() {
        return Err(Error::DimensionMismatch {
            expected: op.rows(),
            actual: y.len(),
        });
    }
    Ok(())
}

fn dense_column<O: MeasurementOperator + ?Sized>(op: &O, j: usize) -> Vec<f64> {
    let mut col = vec![0.0; op.rows()];
    for (i, v) in op.column_entries(j) {
        col[i] += v;
    }
    col
}

fn residual(y: &[f64], columns: &[&[f64]], coef: &[f64]) -> Vec<f64> {
    let mut r = y.to_vec();
    for (col, &b) in columns.iter().zip(coef) {
        for (ri, ci) in r.iter_mut().zip(col.iter()) {
            *ri -= b * ci;
        }
    }
    r
}

/// Standard CoSaMP with the cell basis.
pub fn cosamp<O: MeasurementOperator + ?Sized>(
    y: &[f64],
    op: &O,
    cfg: &SolverConfig,
) -> Result<ReconResult> {
    cfg.validate()?;
    check_dims(y, op)?;
    let n = op.cols();
    let k = cfg.sparsity_k;
    if k > n {
        return Err(Error::InvalidArgument(format!(
            "sparsity_k {k} exceeds field length {n}"
        )));
    }
    let y_norm = linalg::norm(y);
    let mut best = ReconResult::zero(n, y_norm);
    if y_norm <= cfg.residual_tol {
        return Ok(best);
    }
    let mut r = y.to_vec();
    let mut current: Vec<usize> = Vec::new();
    let mut proxy = vec![0.0; n];
    let mut column_cache: std::collections::HashMap<usize, Vec<f64>> = Default::default();

    for it in 1..=cfg.iterations {
        op.adjoint_into(&r, &mut proxy);
        let scores: Vec<f64> = proxy.iter().map(|v| v * v).collect();
        let omega = linalg::top_k(&scores, (2 * k).min(n));

        let fit = |cands: &[usize], cache: &mut std::collections::HashMap<usize, Vec<f64>>| {
            let mut t: Vec<usize> = current.iter().chain(cands).copied().collect();
            t.sort_unstable();
            t.dedup();
            for &j in &t {
                cache.entry(j).or_insert_with(|| dense_column(op, j));
            }
            let cols: Vec<Vec<f64>> = t.iter().map(|j| cache[j].clone()).collect();
            linalg::least_squares(&cols, y).map(|b| (t, b))
        };
        let (t, b) = match fit(&omega, &mut column_cache) {
            Some(v) => v,
            None => fit(&omega[..omega.len().div_ceil(2)], &mut column_cache).ok_or(
                Error::IllPosedSupport {
                    support: current.len() + omega.len().div_ceil(2),
                },
            )?,
        };

        let mags: Vec<f64> = b.iter().map(|v| v * v).collect();
        let mut keep: Vec<usize> = linalg::top_k(&mags, k.min(t.len()))
            .into_iter()
            .map(|i| t[i])
            .collect();
        keep.sort_unstable();
        let cols: Vec<Vec<f64>> = keep.iter().map(|j| column_cache[j].clone()).collect();
        let coef = linalg::least_squares(&cols, y).ok_or(Error::IllPosedSupport {
            support: keep.len(),
        })?;
        let col_refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        let new_r = residual(y, &col_refs, &coef);
        let new_norm = linalg::norm(&new_r);
        best.iterations_run = it;
        if new_norm < best.residual_norm {
            let mut z_hat = vec![0.0; n];
            for (&j, &c) in keep.iter().zip(&coef) {
                z_hat[j] = c;
            }
            best.z_hat = z_hat;
            best.support = keep.clone();
            best.residual_norm = new_norm;
            best.residual_history.push(new_norm);
        }
        if new_norm <= cfg.residual_tol || keep == current {
            break;
        }
        current = keep;
        r = new_r;
    }
    Ok(best)
}

/// Model-based CoSaMP with the constant-one block of `pulse_side`.
pub fn pulse_stream_recover<O: MeasurementOperator + ?Sized>(
    y: &[f64],
    op: &O,
    n1: usize,
    n2: usize,
    cfg: &SolverConfig,
) -> Result<ReconResult> {
    let SignalModel::PulseStream { pulse_side, .. } = cfg.model else {
        return Err(Error::InvalidArgument(
            "pulse_stream_recover needs a pulse_stream model".into(),
        ));
    };
    let pattern = PulsePattern::block(pulse_side)?;
    pulse_stream_recover_with_pattern(y, op, n1, n2, cfg, &pattern)
}

/// Model-based CoSaMP with an explicit pulse pattern.
pub fn pulse_stream_recover_with_pattern<O: MeasurementOperator + ?Sized>(
    y: &[f64],
    op: &O,
    n1: usize,
    n2: usize,
    cfg: &SolverConfig,
    pattern: &PulsePattern,
) -> Result<ReconResult> {
    cfg.validate()?;
    check_dims(y, op)?;
    let SignalModel::PulseStream {
        pulse_side,
        pulse_count,
    } = cfg.model
    else {
        return Err(Error::InvalidArgument(
            "pulse_stream_recover needs a pulse_stream model".into(),
        ));
    };
    if pattern.side() != pulse_side {
        return Err(Error::InvalidArgument(format!(
            "pattern side {} differs from pulse_side {pulse_side}",
            pattern.side()
        )));
    }
    let n = op.cols();
    if n != n1 * n2 {
        return Err(Error::DimensionMismatch {
            expected: n1 * n2,
            actual: n,
        });
    }
    let s = pulse_side;
    if n1 < s || n2 < s || pulse_count * s * s > n {
        return Err(Error::InvalidArgument(format!(
            "{pulse_count} pulses of side {s} do not fit a {n1}x{n2} field"
        )));
    }
    let k = pulse_count.min(cfg.sparsity_k / (s * s)).max(1);
    let y_norm = linalg::norm(y);
    let mut best = ReconResult::zero(n, y_norm);
    if y_norm <= cfg.residual_tol {
        return Ok(best);
    }

    let anchors = AnchorSpace::new(op, n1, n2, pattern);
    // Widen candidates only while the merged set stays well inside the row
    // count.
    let radius = (0..=MAX_NEIGHBOR_RADIUS)
        .rev()
        .find(|r| (2 * r + 1).pow(2) * 2 * k + k <= op.rows() / 2)
        .unwrap_or(0);
    let mut chosen: Vec<usize> = Vec::new();
    let mut r = y.to_vec();

    for it in 1..=cfg.iterations {
        let scores = anchors.captured_energy(&r);
        let peaks = anchors.greedy_disjoint(&scores, 2 * k);
        let omega = anchors.with_neighbors(&peaks, radius);

        let fit = |cands: &[usize]| {
            let mut t: Vec<usize> = chosen.iter().chain(cands).copied().collect();
            t.sort_unstable();
            t.dedup();
            let cols: Vec<Vec<f64>> = t.iter().map(|&j| anchors.columns[j].clone()).collect();
            linalg::least_squares(&cols, y).map(|b| (t, b))
        };
        let (t, b) = match fit(&omega) {
            Some(v) => v,
            None => fit(&omega[..omega.len().div_ceil(2)]).ok_or(Error::IllPosedSupport {
                support: (chosen.len() + omega.len().div_ceil(2)) * s * s,
            })?,
        };

        // Prune to k disjoint anchors by captured energy b^2 ||a||^2.
        let mut prune_scores = vec![f64::NEG_INFINITY; anchors.len()];
        for (&j, &bj) in t.iter().zip(&b) {
            prune_scores[j] = bj * bj * anchors.norms2[j];
        }
        let keep = anchors.greedy_disjoint_from(&t, &prune_scores, k);
        let (keep, coef, new_r) = anchors.refine(keep, y).ok_or(Error::IllPosedSupport {
            support: k * s * s,
        })?;
        let new_norm = linalg::norm(&new_r);
        best.iterations_run = it;
        if new_norm < best.residual_norm {
            best.z_hat = anchors.synthesize(&keep, &coef);
            best.support = anchors.footprint(&keep);
            best.residual_norm = new_norm;
            best.residual_history.push(new_norm);
        }
        if new_norm <= cfg.residual_tol || keep == chosen {
            break;
        }
        chosen = keep;
        r = new_r;
    }
    Ok(best)
}

/// Pattern placements and their measurement-domain columns.
struct AnchorSpace<'a> {
    n: usize,
    n2: usize,
    side: usize,
    a2: usize,
    pattern: &'a PulsePattern,
    columns: Vec<Vec<f64>>,
    norms2: Vec<f64>,
}

impl<'a> AnchorSpace<'a> {
    fn new<O: MeasurementOperator + ?Sized>(
        op: &O,
        n1: usize,
        n2: usize,
        pattern: &'a PulsePattern,
    ) -> Self {
        let side = pattern.side();
        let (a1, a2) = (n1 - side + 1, n2 - side + 1);
        let cell_cols: Vec<Vec<(usize, f64)>> = (0..n1 * n2).map(|j| op.column_entries(j)).collect();
        let mut columns = Vec::with_capacity(a1 * a2);
        for ar in 0..a1 {
            for ac in 0..a2 {
                let mut col = vec![0.0; op.rows()];
                for dr in 0..side {
                    for dc in 0..side {
                        let w = pattern.get(dr, dc);
                        if w == 0.0 {
                            continue;
                        }
                        for &(i, v) in &cell_cols[(ar + dr) * n2 + ac + dc] {
                            col[i] += w * v;
                        }
                    }
                }
                columns.push(col);
            }
        }
        let norms2 = columns.iter().map(|c| linalg::dot(c, c)).collect();
        Self {
            n: n1 * n2,
            n2,
            side,
            a2,
            pattern,
            columns,
            norms2,
        }
    }

    fn len(&self) -> usize {
        self.columns.len()
    }

    fn pos(&self, j: usize) -> (usize, usize) {
        (j / self.a2, j % self.a2)
    }

    fn overlaps(&self, a: usize, b: usize) -> bool {
        let (ra, ca) = self.pos(a);
        let (rb, cb) = self.pos(b);
        ra.abs_diff(rb) < self.side && ca.abs_diff(cb) < self.side
    }

    /// `(a_j^T r)^2 / ||a_j||^2` for every anchor.
    fn captured_energy(&self, r: &[f64]) -> Vec<f64> {
        self.columns
            .iter()
            .zip(&self.norms2)
            .map(|(c, &n2)| {
                if n2 > 0.0 {
                    let d = linalg::dot(c, r);
                    d * d / n2
                } else {
                    0.0
                }
            })
            .collect()
    }

    fn fit(&self, set: &[usize], y: &[f64]) -> Option<(Vec<f64>, Vec<f64>)> {
        let cols: Vec<Vec<f64>> = set.iter().map(|&j| self.columns[j].clone()).collect();
        let coef = linalg::least_squares(&cols, y)?;
        let refs: Vec<&[f64]> = cols.iter().map(Vec::as_slice).collect();
        let r = residual(y, &refs, &coef);
        Some((coef, r))
    }

    /// Least-squares fit on `keep`, then coordinate-wise shifts of single
    /// anchors while any shift lowers the residual and keeps the footprints
    /// disjoint. Returns the sorted anchors, their amplitudes and the residual.
    fn refine(&self, mut keep: Vec<usize>, y: &[f64]) -> Option<(Vec<usize>, Vec<f64>, Vec<f64>)> {
        keep.sort_unstable();
        let (mut coef, mut r) = self.fit(&keep, y)?;
        let mut norm = linalg::norm(&r);
        for _ in 0..MAX_REFINE_PASSES {
            let mut improved = false;
            for slot in 0..keep.len() {
                let mut best: Option<(f64, Vec<usize>, Vec<f64>, Vec<f64>)> = None;
                for cand in self.with_neighbors(&[keep[slot]], REFINE_RADIUS) {
                    if keep.contains(&cand)
                        || keep
                            .iter()
                            .enumerate()
                            .any(|(i, &o)| i != slot && self.overlaps(o, cand))
                    {
                        continue;
                    }
                    let mut trial = keep.clone();
                    trial[slot] = cand;
                    trial.sort_unstable();
                    let Some((c, tr)) = self.fit(&trial, y) else {
                        continue;
                    };
                    let tn = linalg::norm(&tr);
                    let bar = best.as_ref().map_or(norm, |b| b.0);
                    if tn < bar * (1.0 - 1e-12) {
                        best = Some((tn, trial, c, tr));
                    }
                }
                if let Some((tn, trial, c, tr)) = best {
                    norm = tn;
                    keep = trial;
                    coef = c;
                    r = tr;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
        Some((keep, coef, r))
    }

    /// `anchors` plus every anchor within `radius` steps of one of them.
    fn with_neighbors(&self, anchors: &[usize], radius: usize) -> Vec<usize> {
        let a1 = self.len() / self.a2;
        let mut out = Vec::new();
        for &j in anchors {
            let (r, c) = self.pos(j);
            for rr in r.saturating_sub(radius)..=(r + radius).min(a1 - 1) {
                for cc in c.saturating_sub(radius)..=(c + radius).min(self.a2 - 1) {
                    out.push(rr * self.a2 + cc);
                }
            }
        }
        out.sort_unstable();
        out.dedup();
        out
    }

    fn greedy_disjoint(&self, scores: &[f64], count: usize) -> Vec<usize> {
        let all: Vec<usize> = (0..scores.len()).collect();
        self.greedy_disjoint_from(&all, scores, count)
    }

    /// Highest-scoring pairwise-disjoint anchors among `cands`, ties toward
    /// the lowest index.
    fn greedy_disjoint_from(&self, cands: &[usize], scores: &[f64], count: usize) -> Vec<usize> {
        let mut order = cands.to_vec();
        order.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
        let mut picked: Vec<usize> = Vec::with_capacity(count);
        for j in order {
            if picked.len() == count {
                break;
            }
            if picked.iter().all(|&p| !self.overlaps(p, j)) {
                picked.push(j);
            }
        }
        picked
    }

    fn synthesize(&self, anchors: &[usize], coef: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.n];
        for (&j, &b) in anchors.iter().zip(coef) {
            let (r, c) = self.pos(j);
            for dr in 0..self.side {
                for dc in 0..self.side {
                    z[(r + dr) * self.n2 + c + dc] += b * self.pattern.get(dr, dc);
                }
            }
        }
        z
    }

    fn footprint(&self, anchors: &[usize]) -> Vec<usize> {
        let mut cells = Vec::with_capacity(anchors.len() * self.side * self.side);
        for &j in anchors {
            let (r, c) = self.pos(j);
            for dr in 0..self.side {
                for dc in 0..self.side {
                    cells.push((r + dr) * self.n2 + c + dc);
                }
            }
        }
        cells.sort_unstable();
        cells.dedup();
        cells
    }
}

/// Random-sampling reconstruction under the cell basis: observed cells are
/// copied, all others stay zero.
pub fn rs_recover(y: &[f64], rs: &RsMatrix) -> Result<ReconResult> {
    check_dims(y, rs)?;
    let z_hat = sensing::apply_adjoint(rs, y)?;
    Ok(ReconResult {
        z_hat,
        residual_norm: 0.0,
        iterations_run: 0,
        support: rs.indices().to_vec(),
        residual_history: vec![0.0],
    })
}
