//! Configuration-driven experiment runner: reconstruction batches over seeds
//! (the accuracy tables) and closed-form scheme sweeps over network size (the
//! bandwidth and energy comparisons).
//!
//! Configs are TOML. Named presets fill every field with defaults; a config
//! may override any of them. The `custom` preset has no grid, pulse count or
//! angle sets of its own and rejects a config that leaves them out.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analytics::{self, Scheme, SchemeParams};
use crate::error::{Error, Result};
use crate::field::{self, NoiseSpec, PulsePattern, DEFAULT_SCALE_RANGE};
use crate::netsim;
use crate::reconstruction::{self, SignalModel, SolverConfig};
use crate::report;
use crate::sensing::{self, AngleSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Preset {
    #[serde(rename = "table1")]
    Table1,
    #[serde(rename = "table2")]
    Table2,
    #[serde(rename = "table3")]
    Table3,
    #[serde(rename = "fig6_bandwidth")]
    Fig6Bandwidth,
    #[serde(rename = "fig7_bandwidth_10pct")]
    Fig7Bandwidth10pct,
    #[serde(rename = "fig8_energy")]
    Fig8Energy,
    #[serde(rename = "fig9_scatter")]
    Fig9Scatter,
    #[serde(rename = "custom")]
    Custom,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::Table1,
        Preset::Table2,
        Preset::Table3,
        Preset::Fig6Bandwidth,
        Preset::Fig7Bandwidth10pct,
        Preset::Fig8Energy,
        Preset::Fig9Scatter,
        Preset::Custom,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Preset::Table1 => "table1",
            Preset::Table2 => "table2",
            Preset::Table3 => "table3",
            Preset::Fig6Bandwidth => "fig6_bandwidth",
            Preset::Fig7Bandwidth10pct => "fig7_bandwidth_10pct",
            Preset::Fig8Energy => "fig8_energy",
            Preset::Fig9Scatter => "fig9_scatter",
            Preset::Custom => "custom",
        }
    }

    /// Scheme sweeps rather than reconstruction batches.
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            Preset::Fig6Bandwidth | Preset::Fig7Bandwidth10pct | Preset::Fig8Energy | Preset::Fig9Scatter
        )
    }
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Preset::ALL
            .into_iter()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Preset::ALL.iter().map(|p| p.as_str()).collect();
                Error::Config(format!("unknown preset `{s}`; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    PulseStream,
    Generic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSettings {
    pub n1: usize,
    pub n2: usize,
    pub pulse_count: usize,
    pub pulse_side: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SensingSettings {
    pub angle_sets: Vec<AngleSet>,
    pub noise_variances: Vec<f64>,
    /// Also score random sensing at each angle set's measurement count.
    pub rs: bool,
    /// Acquire through the slot-level gather instead of the matrix product.
    pub gather: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverSettings {
    pub model: ModelKind,
    pub iterations: usize,
    pub residual_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeSettings {
    pub l_bits: f64,
    pub t_c: f64,
    pub gain_g: f64,
    pub spacing_d: f64,
    pub nu0: usize,
    /// Reading fractions for RD (`M / N`) and RR (`q_s`).
    pub fractions: Vec<f64>,
    /// Odd grid sides of the network-size sweep.
    pub sweep_sides: Vec<usize>,
    /// Shared packet time; unset means each scheme fills one coherence time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_t_p: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub runs: usize,
    pub seeds: Vec<u64>,
    pub field: FieldSettings,
    pub sensing: SensingSettings,
    pub solver: SolverSettings,
    pub schemes: SchemeSettings,
}

// Partially specified config as read from disk.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    preset: Option<Preset>,
    runs: Option<usize>,
    seeds: Option<Vec<u64>>,
    #[serde(default)]
    field: RawField,
    #[serde(default)]
    sensing: RawSensing,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    schemes: RawSchemes,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawField {
    n1: Option<usize>,
    n2: Option<usize>,
    pulse_count: Option<usize>,
    pulse_side: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensing {
    angle_sets: Option<Vec<AngleSet>>,
    noise_variances: Option<Vec<f64>>,
    rs: Option<bool>,
    gather: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    model: Option<ModelKind>,
    iterations: Option<usize>,
    residual_tol: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSchemes {
    l_bits: Option<f64>,
    t_c: Option<f64>,
    gain_g: Option<f64>,
    spacing_d: Option<f64>,
    nu0: Option<usize>,
    fractions: Option<Vec<f64>>,
    sweep_sides: Option<Vec<usize>>,
    fixed_t_p: Option<f64>,
}

pub const DEFAULT_RUNS: usize = 10;
pub const DEFAULT_SWEEP_SIDES: [usize; 7] = [33, 49, 65, 81, 97, 113, 129];

fn standard_sets() -> Vec<AngleSet> {
    (2..=4).map(|p| AngleSet::standard(p).expect("standard angle set")).collect()
}

impl ExperimentConfig {
    /// Fully populated config of a named preset; `custom` gets a small
    /// 16x16 single-pulse setting.
    pub fn preset(preset: Preset) -> Self {
        let (n1, n2, pulses) = match preset {
            Preset::Table2 => (80, 80, 8),
            Preset::Custom => (16, 16, 1),
            _ => (64, 64, 7),
        };
        let fractions = match preset {
            Preset::Fig7Bandwidth10pct => vec![0.1],
            Preset::Fig9Scatter => vec![0.5, 0.3],
            _ => vec![0.5],
        };
        Self {
            preset,
            runs: DEFAULT_RUNS,
            seeds: (1..=DEFAULT_RUNS as u64).collect(),
            field: FieldSettings {
                n1,
                n2,
                pulse_count: pulses,
                pulse_side: 5,
            },
            sensing: SensingSettings {
                angle_sets: if preset.is_comparison() {
                    vec![AngleSet::standard(3).expect("standard angle set")]
                } else {
                    standard_sets()
                },
                noise_variances: if preset == Preset::Table3 {
                    vec![0.5, 0.7]
                } else {
                    vec![0.0]
                },
                rs: matches!(preset, Preset::Table1 | Preset::Table2),
                gather: false,
            },
            solver: SolverSettings {
                model: ModelKind::PulseStream,
                iterations: reconstruction::DEFAULT_ITERATIONS,
                residual_tol: reconstruction::DEFAULT_RESIDUAL_TOL,
            },
            schemes: SchemeSettings {
                l_bits: analytics::DEFAULT_L_BITS,
                t_c: analytics::DEFAULT_T_C,
                gain_g: 1.0,
                spacing_d: 1.0,
                nu0: netsim::DEFAULT_NU0,
                fractions,
                sweep_sides: DEFAULT_SWEEP_SIDES.to_vec(),
                fixed_t_p: (preset == Preset::Fig8Energy).then_some(analytics::FIXED_T_P),
            },
        }
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Hex SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> Result<String> {
        let digest = Sha256::digest(self.to_toml()?.as_bytes());
        Ok(digest.iter().fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        }))
    }

    pub fn solver_config(&self) -> SolverConfig {
        let f = &self.field;
        let mut cfg = match self.solver.model {
            ModelKind::PulseStream => SolverConfig::pulse_stream(f.pulse_side, f.pulse_count),
            ModelKind::Generic => {
                SolverConfig::generic(f.pulse_side * f.pulse_side * f.pulse_count)
            }
        };
        cfg.iterations = self.solver.iterations;
        cfg.residual_tol = self.solver.residual_tol;
        cfg
    }

    pub fn scheme_params(&self, side: usize, fraction: f64, angles: &AngleSet) -> SchemeParams {
        let s = &self.schemes;
        SchemeParams {
            l_bits: s.l_bits,
            t_c: s.t_c,
            gain_g: s.gain_g,
            spacing_d: s.spacing_d,
            nu0: s.nu0,
            angles: angles.clone(),
            ..SchemeParams::new(side, side)
        }
        .with_fraction(fraction)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.runs == 0 {
            return bad("runs must be >= 1".into());
        }
        if self.seeds.len() != self.runs {
            return bad(format!(
                "seeds lists {} values but runs = {}",
                self.seeds.len(),
                self.runs
            ));
        }
        let f = &self.field;
        if f.pulse_side == 0 || f.pulse_count == 0 {
            return bad("field.pulse_side and field.pulse_count must be >= 1".into());
        }
        if f.n1 < f.pulse_side || f.n2 < f.pulse_side {
            return bad(format!(
                "field grid {}x{} is smaller than pulse_side {}",
                f.n1, f.n2, f.pulse_side
            ));
        }
        if self.sensing.angle_sets.is_empty() {
            return bad("sensing.angle_sets must not be empty".into());
        }
        if self.sensing.noise_variances.is_empty()
            || self.sensing.noise_variances.iter().any(|v| !(*v >= 0.0 && v.is_finite()))
        {
            return bad("sensing.noise_variances must be a non-empty list of finite values >= 0".into());
        }
        if self.sensing.gather && (f.n1 % 2 == 0 || f.n2 % 2 == 0) {
            return Err(Error::EvenGrid { n1: f.n1, n2: f.n2 });
        }
        self.solver_config().validate()?;
        let s = &self.schemes;
        if !(s.l_bits > 0.0 && s.t_c > 0.0 && s.gain_g > 0.0 && s.spacing_d > 0.0) {
            return bad("schemes.l_bits, t_c, gain_g and spacing_d must be positive".into());
        }
        if s.nu0 == 0 {
            return bad("schemes.nu0 must be >= 1".into());
        }
        if s.fractions.is_empty() || s.fractions.iter().any(|q| !(*q > 0.0 && *q < 1.0)) {
            return bad("schemes.fractions must be a non-empty list in (0, 1)".into());
        }
        if s.sweep_sides.is_empty() || s.sweep_sides.iter().any(|n| n % 2 == 0) {
            return bad("schemes.sweep_sides must be a non-empty list of odd sides".into());
        }
        if let Some(t) = s.fixed_t_p {
            if !(t > 0.0) {
                return bad("schemes.fixed_t_p must be positive".into());
            }
        }
        Ok(())
    }
}

fn resolve(raw: RawConfig) -> Result<ExperimentConfig> {
    let preset = raw.preset.unwrap_or(Preset::Custom);
    let mut cfg = ExperimentConfig::preset(preset);
    if preset == Preset::Custom {
        let mut missing = Vec::new();
        for (name, present) in [
            ("field.n1", raw.field.n1.is_some()),
            ("field.n2", raw.field.n2.is_some()),
            ("field.pulse_count", raw.field.pulse_count.is_some()),
            ("sensing.angle_sets", raw.sensing.angle_sets.is_some()),
        ] {
            if !present {
                missing.push(name.to_string());
            }
        }
        if !missing.is_empty() {
            return Err(Error::MissingFields(missing));
        }
    }
    macro_rules! take {
        ($dst:expr, $src:expr) => {
            if let Some(v) = $src {
                $dst = v;
            }
        };
    }
    take!(cfg.field.n1, raw.field.n1);
    take!(cfg.field.n2, raw.field.n2);
    take!(cfg.field.pulse_count, raw.field.pulse_count);
    take!(cfg.field.pulse_side, raw.field.pulse_side);
    take!(cfg.sensing.angle_sets, raw.sensing.angle_sets);
    take!(cfg.sensing.noise_variances, raw.sensing.noise_variances);
    take!(cfg.sensing.rs, raw.sensing.rs);
    take!(cfg.sensing.gather, raw.sensing.gather);
    take!(cfg.solver.model, raw.solver.model);
    take!(cfg.solver.iterations, raw.solver.iterations);
    take!(cfg.solver.residual_tol, raw.solver.residual_tol);
    take!(cfg.schemes.l_bits, raw.schemes.l_bits);
    take!(cfg.schemes.t_c, raw.schemes.t_c);
    take!(cfg.schemes.gain_g, raw.schemes.gain_g);
    take!(cfg.schemes.spacing_d, raw.schemes.spacing_d);
    take!(cfg.schemes.nu0, raw.schemes.nu0);
    take!(cfg.schemes.fractions, raw.schemes.fractions);
    take!(cfg.schemes.sweep_sides, raw.schemes.sweep_sides);
    if raw.schemes.fixed_t_p.is_some() {
        cfg.schemes.fixed_t_p = raw.schemes.fixed_t_p;
    }
    match (raw.runs, raw.seeds) {
        (_, Some(seeds)) => {
            cfg.runs = raw.runs.unwrap_or(seeds.len());
            cfg.seeds = seeds;
        }
        (Some(runs), None) => {
            cfg.runs = runs;
            cfg.seeds = (1..=runs as u64).collect();
        }
        (None, None) => {}
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Parses and validates a TOML config. Parse errors carry line and column.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    resolve(raw)
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = report::read_to_string(path)?;
    parse_config(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub preset: Preset,
    /// Field seed for reconstruction runs; 0 for closed-form sweeps.
    pub seed: u64,
    pub config_hash: String,
    /// Keyed by `sse/radon/P{p}/var{v}`, `sse/rs/M{m}`, `{series}/bandwidth`,
    /// `{series}/energy`, `n_tx/P{p}`, ...
    pub metrics: BTreeMap<String, f64>,
    /// Per-run failures that did not stop the batch.
    pub errors: Vec<String>,
    pub wall_time_s: f64,
}

impl RunRecord {
    /// The record with timing zeroed, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        Self {
            wall_time_s: 0.0,
            ..self.clone()
        }
    }
}

/// Plot- and table-ready CSV content.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl SummaryTable {
    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for r in &self.rows {
            s.push_str(&r.join(","));
            s.push('\n');
        }
        s
    }
}

#[derive(Debug, Clone)]
pub struct PresetOutput {
    pub records: Vec<RunRecord>,
    pub summary: SummaryTable,
    /// Long-form scheme reports of comparison sweeps.
    pub resources: Vec<analytics::ResourceReport>,
}

fn derive_seed(seed: u64, tag: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(tag)
}

fn var_key(v: f64) -> String {
    format!("{v}")
}

pub fn radon_key(p: usize, variance: f64) -> String {
    format!("sse/radon/P{p}/var{}", var_key(variance))
}

pub fn rs_key(m: usize) -> String {
    format!("sse/rs/M{m}")
}

/// Synthesis, acquisition and reconstruction for one seed.
pub fn run_once(cfg: &ExperimentConfig, seed: u64, hash: &str) -> RunRecord {
    let start = Instant::now();
    let mut metrics = BTreeMap::new();
    let mut errors = Vec::new();
    if let Err(e) = run_once_inner(cfg, seed, &mut metrics, &mut errors) {
        errors.push(e.to_string());
    }
    RunRecord {
        preset: cfg.preset,
        seed,
        config_hash: hash.to_string(),
        metrics,
        errors,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

fn run_once_inner(
    cfg: &ExperimentConfig,
    seed: u64,
    metrics: &mut BTreeMap<String, f64>,
    errors: &mut Vec<String>,
) -> Result<()> {
    let f = &cfg.field;
    let pattern = PulsePattern::block(f.pulse_side)?;
    let z = field::synth_pulse_field(f.n1, f.n2, f.pulse_count, DEFAULT_SCALE_RANGE, &pattern, seed)?;
    metrics.insert("field_energy".into(), z.energy());
    let solver = cfg.solver_config();
    for (si, angles) in cfg.sensing.angle_sets.iter().enumerate() {
        let p = angles.len();
        let map = sensing::build_path_map(f.n1, f.n2, angles)?;
        let phi = sensing::build_radon_matrix(&map, derive_seed(seed, 1 + si as u64));
        let y = if cfg.sensing.gather {
            let net = netsim::GridNetwork::new(f.n1, f.n2)?;
            let sched = netsim::build_schedules(&net, angles, cfg.schemes.nu0)?;
            let g = netsim::simulate_gather(&net, &sched, &phi, z.vector(), 1.0)?;
            metrics.insert(format!("n_tx/P{p}"), g.n_tx as f64);
            metrics.insert(format!("n_ts/P{p}"), g.n_ts as f64);
            g.projections
        } else {
            sensing::apply(&phi, z.vector())?
        };
        for (vi, &variance) in cfg.sensing.noise_variances.iter().enumerate() {
            let y_n = field::add_noise(&y, &NoiseSpec { variance }, derive_seed(seed, 100 + (si * 16 + vi) as u64))?;
            let rec = match solver.model {
                SignalModel::Generic => reconstruction::cosamp(&y_n, &phi, &solver),
                SignalModel::PulseStream { .. } => {
                    reconstruction::pulse_stream_recover(&y_n, &phi, f.n1, f.n2, &solver)
                }
            };
            match rec.and_then(|r| field::sse(z.vector(), &r.z_hat)) {
                Ok(sse) => {
                    metrics.insert(radon_key(p, variance), sse);
                }
                Err(e) => errors.push(format!("P={p} var={variance}: {e}")),
            }
        }
        if cfg.sensing.rs {
            let m = phi.m_rows();
            let rs = sensing::build_rs_matrix(f.n1 * f.n2, m, derive_seed(seed, 50 + si as u64))?;
            let y_rs = sensing::apply(&rs, z.vector())?;
            let r = reconstruction::rs_recover(&y_rs, &rs)?;
            metrics.insert(rs_key(m), field::sse(z.vector(), &r.z_hat)?);
        }
    }
    Ok(())
}

fn mean_of(records: &[RunRecord], key: &str) -> Option<f64> {
    let v: Vec<f64> = records.iter().filter_map(|r| r.metrics.get(key).copied()).collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6e}")).unwrap_or_default()
}

/// Mean SSE per table cell: one column per angle set, one row per noise level
/// plus an RS row when enabled.
pub fn summarize_reconstruction(cfg: &ExperimentConfig, records: &[RunRecord]) -> SummaryTable {
    let f = &cfg.field;
    let cols: Vec<(usize, usize)> = cfg
        .sensing
        .angle_sets
        .iter()
        .map(|a| (a.len(), a.measurement_count(f.n1, f.n2)))
        .collect();
    let mut header = vec!["series".to_string()];
    header.extend(cols.iter().map(|(p, m)| format!("M={m} P={p}")));
    let mut rows = Vec::new();
    for &v in &cfg.sensing.noise_variances {
        let label = if v == 0.0 {
            "radon_like".to_string()
        } else {
            format!("radon_like sigma2={v}")
        };
        let mut row = vec![label];
        row.extend(cols.iter().map(|&(p, _)| cell(mean_of(records, &radon_key(p, v)))));
        rows.push(row);
    }
    if cfg.sensing.rs {
        let mut row = vec!["rs".to_string()];
        row.extend(cols.iter().map(|&(_, m)| cell(mean_of(records, &rs_key(m)))));
        rows.push(row);
    }
    SummaryTable { header, rows }
}

fn series_names(cfg: &ExperimentConfig) -> Vec<(String, Scheme, f64)> {
    let mut out = vec![("DD".to_string(), Scheme::DD, cfg.schemes.fractions[0])];
    for &q in &cfg.schemes.fractions {
        let pct = (q * 100.0).round();
        out.push((format!("RD{pct}"), Scheme::RD, q));
        out.push((format!("RR{pct}"), Scheme::RR, q));
    }
    out.push(("RL".to_string(), Scheme::RL, cfg.schemes.fractions[0]));
    out
}

/// Closed-form sweep over `schemes.sweep_sides` with the first angle set.
/// One record per network size; RR points that are infeasible at a fixed
/// `t_p` are logged in the record's errors.
pub fn run_comparison(cfg: &ExperimentConfig) -> Result<PresetOutput> {
    cfg.validate()?;
    let hash = cfg.hash()?;
    let angles = &cfg.sensing.angle_sets[0];
    let series = series_names(cfg);
    let mut records = Vec::new();
    let mut resources = Vec::new();
    for &side in &cfg.schemes.sweep_sides {
        let start = Instant::now();
        let mut metrics = BTreeMap::new();
        let mut errors = Vec::new();
        metrics.insert("n".to_string(), (side * side) as f64);
        for (name, scheme, q) in &series {
            let p = cfg.scheme_params(side, *q, angles);
            let r = match cfg.schemes.fixed_t_p {
                Some(t_p) => analytics::fixed_tp(*scheme, &p, t_p),
                None => analytics::native(*scheme, &p),
            };
            match r {
                Ok(r) => {
                    metrics.insert(format!("{name}/bandwidth"), r.bandwidth);
                    metrics.insert(format!("{name}/energy"), r.energy);
                    for (k, v) in &r.aux {
                        metrics.insert(format!("{name}/{k}"), *v);
                    }
                    resources.push(r);
                }
                Err(e) => errors.push(format!("{name} at N={}: {e}", side * side)),
            }
        }
        records.push(RunRecord {
            preset: cfg.preset,
            seed: 0,
            config_hash: hash.clone(),
            metrics,
            errors,
            wall_time_s: start.elapsed().as_secs_f64(),
        });
    }
    let mut header = vec!["n".to_string()];
    for (name, _, _) in &series {
        header.push(format!("{name}_bandwidth_bps"));
        header.push(format!("{name}_energy_units"));
    }
    let rows = records
        .iter()
        .map(|r| {
            let mut row = vec![format!("{}", r.metrics["n"])];
            for (name, _, _) in &series {
                row.push(cell(r.metrics.get(&format!("{name}/bandwidth")).copied()));
                row.push(cell(r.metrics.get(&format!("{name}/energy")).copied()));
            }
            row
        })
        .collect();
    Ok(PresetOutput {
        records,
        summary: SummaryTable { header, rows },
        resources,
    })
}

/// Runs a preset: a reconstruction batch over the seeds (in parallel, ordered
/// by seed) or a closed-form sweep.
pub fn run_preset(cfg: &ExperimentConfig) -> Result<PresetOutput> {
    cfg.validate()?;
    if cfg.preset.is_comparison() {
        return run_comparison(cfg);
    }
    let hash = cfg.hash()?;
    let records: Vec<RunRecord> = cfg
        .seeds
        .par_iter()
        .map(|&seed| run_once(cfg, seed, &hash))
        .collect();
    let summary = summarize_reconstruction(cfg, &records);
    Ok(PresetOutput {
        records,
        summary,
        resources: Vec::new(),
    })
}

const RUNS_CSV_FIXED: [&str; 5] = ["preset", "seed", "config_hash", "wall_time_s", "errors"];

/// One row per record; metric columns are the union of all metric keys.
pub fn runs_csv(records: &[RunRecord]) -> String {
    let mut keys: Vec<&String> = records.iter().flat_map(|r| r.metrics.keys()).collect();
    keys.sort();
    keys.dedup();
    let mut s = RUNS_CSV_FIXED.join(",");
    for k in &keys {
        s.push(',');
        s.push_str(k);
    }
    s.push('\n');
    for r in records {
        let errs = r.errors.join(" | ").replace([',', '\n'], ";");
        let _ = write!(s, "{},{},{},{},{}", r.preset, r.seed, r.config_hash, r.wall_time_s, errs);
        for k in &keys {
            s.push(',');
            if let Some(v) = r.metrics.get(*k) {
                s.push_str(&v.to_string());
            }
        }
        s.push('\n');
    }
    s
}

/// Writes `summary.csv`, `runs.csv` and `runs.jsonl` (plus `resources.csv`
/// for sweeps) into `dir`.
pub fn emit_report(output: &PresetOutput, angles: &AngleSet, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    report::write_atomic(&dir.join("summary.csv"), output.summary.to_csv().as_bytes())?;
    report::write_atomic(&dir.join("runs.csv"), runs_csv(&output.records).as_bytes())?;
    report::write_jsonl(&dir.join("runs.jsonl"), &output.records)?;
    if !output.resources.is_empty() {
        analytics::write_reports_csv(&dir.join("resources.csv"), &output.resources, angles)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_custom() -> ExperimentConfig {
        parse_config(
            r#"
preset = "custom"
runs = 2

[field]
n1 = 16
n2 = 16
pulse_count = 1

[sensing]
angle_sets = [["0", "pi/2", "pi/4"]]
rs = true
"#,
        )
        .unwrap()
    }

    #[test]
    fn empty_custom_lists_missing_fields() {
        match parse_config("") {
            Err(Error::MissingFields(f)) => {
                assert_eq!(f, vec!["field.n1", "field.n2", "field.pulse_count", "sensing.angle_sets"]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn presets_round_trip() {
        for p in Preset::ALL {
            let cfg = ExperimentConfig::preset(p);
            cfg.validate().unwrap();
            let text = cfg.to_toml().unwrap();
            assert_eq!(parse_config(&text).unwrap(), cfg, "{p}\n{text}");
        }
    }

    #[test]
    fn parse_errors_carry_location() {
        let e = parse_config("preset = \"table1\"\nruns = \"ten\"\n").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
        let e = parse_config("preset = \"table9\"").unwrap_err();
        assert!(e.to_string().contains("table9"), "{e}");
        assert!(parse_config("preset = \"table1\"\nruns = 0").is_err());
        assert!(parse_config("preset = \"table1\"\nbogus = 1").is_err());
        assert!(matches!(
            parse_config("preset = \"table1\"\n[sensing]\ngather = true"),
            Err(Error::EvenGrid { .. })
        ));
    }

    #[test]
    fn overrides_apply() {
        let cfg = parse_config("preset = \"table1\"\nseeds = [5, 9]\n[field]\npulse_count = 3").unwrap();
        assert_eq!(cfg.runs, 2);
        assert_eq!(cfg.seeds, vec![5, 9]);
        assert_eq!(cfg.field.pulse_count, 3);
        assert_eq!(cfg.field.n1, 64);
    }

    #[test]
    fn custom_run_is_deterministic() {
        let cfg = small_custom();
        let a = run_preset(&cfg).unwrap();
        let b = run_preset(&cfg).unwrap();
        let strip = |o: &PresetOutput| o.records.iter().map(RunRecord::without_timing).collect::<Vec<_>>();
        assert_eq!(strip(&a), strip(&b));
        assert_eq!(a.records.len(), 2);
        assert_eq!(a.records[0].seed, 1);
        assert!(a.records[0].errors.is_empty(), "{:?}", a.records[0].errors);
        assert!(a.records[0].metrics[&radon_key(3, 0.0)] < 1e-12);
        assert_eq!(a.summary.rows.len(), 2);
    }

    #[test]
    fn gather_path_matches_matrix_path() {
        let mut cfg = small_custom();
        cfg.field.n1 = 17;
        cfg.field.n2 = 17;
        cfg.sensing.noise_variances = vec![0.0, 0.3];
        let direct = run_preset(&cfg).unwrap();
        cfg.sensing.gather = true;
        let gathered = run_preset(&cfg).unwrap();
        for (a, b) in direct.records.iter().zip(&gathered.records) {
            for v in [0.0, 0.3] {
                let (x, y) = (a.metrics[&radon_key(3, v)], b.metrics[&radon_key(3, v)]);
                assert!((x - y).abs() <= 1e-9 * (1.0 + x), "{x} vs {y}");
            }
            assert!(b.metrics.contains_key("n_tx/P3"));
        }
    }

    #[test]
    fn report_files() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = small_custom();
        let out = run_preset(&cfg).unwrap();
        emit_report(&out, &cfg.sensing.angle_sets[0], dir.path()).unwrap();
        let runs = std::fs::read_to_string(dir.path().join("runs.csv")).unwrap();
        assert_eq!(runs.lines().count(), 1 + cfg.runs);
        let jsonl = std::fs::read_to_string(dir.path().join("runs.jsonl")).unwrap();
        let first: RunRecord = serde_json::from_str(jsonl.lines().next().unwrap()).unwrap();
        assert_eq!(first.seed, 1);
        let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert!(summary.starts_with("series,M=63 P=3\n"), "{summary}");
    }

    #[test]
    fn summary_cells_trace_to_records() {
        let cfg = small_custom();
        let out = run_preset(&cfg).unwrap();
        let mean: f64 = out.records.iter().map(|r| r.metrics[&rs_key(63)]).sum::<f64>() / 2.0;
        assert_eq!(out.summary.rows[1][1], format!("{mean:.6e}"));
    }

    #[test]
    fn comparison_sweeps() {
        let mut cfg = ExperimentConfig::preset(Preset::Fig6Bandwidth);
        cfg.schemes.sweep_sides = vec![33, 65];
        let out = run_preset(&cfg).unwrap();
        assert_eq!(out.records.len(), 2);
        assert_eq!(out.summary.header[0], "n");
        let r = &out.records[1];
        assert!(r.metrics["RL/bandwidth"] < r.metrics["DD/bandwidth"]);
        assert!((r.metrics["RL/bandwidth"] - 668.8).abs() < 1e-9);
        assert_eq!(out.resources.len(), 8);

        let mut fixed = ExperimentConfig::preset(Preset::Fig8Energy);
        fixed.schemes.sweep_sides = vec![65];
        let out = run_comparison(&fixed).unwrap();
        let m = &out.records[0].metrics;
        assert!(m["RL/energy"] < m["RD50/energy"] && m["RD50/energy"] < m["DD/energy"]);
        assert!((m["RL/bandwidth"] - 1000.0 / 0.61).abs() < 1e-9);
    }
}
