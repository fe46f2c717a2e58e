//! Command-line front end. The `radoncs` binary only parses arguments and
//! calls [`run`].

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analytics;
use crate::error::{Error, Result};
use crate::experiment::{self, ExperimentConfig, Preset};
use crate::field::{self, FieldSidecar, NoiseSpec, PulseField, PulsePattern, DEFAULT_SCALE_RANGE};
use crate::netsim;
use crate::reconstruction::{self, SignalModel};
use crate::report;
use crate::rip;
use crate::sensing::{self, AngleSet};

#[derive(Debug, Parser)]
#[command(name = "radoncs", version, about = "Radon-like compressive sampling and WSN gathering experiments")]
pub struct Cli {
    /// TOML experiment config; its values replace the defaults.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Base seed for field, matrix and noise draws.
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    /// Print progress and extra diagnostics to stderr.
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Synthesize a pulse-stream field (field.csv, field.json).
    Synth(GridArgs),
    /// Measure a field with a Radon-like matrix (measurements.json, phi.csv).
    Sense(SenseArgs),
    /// Synthesize, measure and reconstruct (recon.json, field_hat.csv).
    Reconstruct(SenseArgs),
    /// Monte-Carlo energy concentration of the projections (rip.json).
    Rip(RipArgs),
    /// Build TDMA schedules and gather the projections in-network.
    Gather(GatherArgs),
    /// Closed-form bandwidth/energy sweep of the four schemes.
    Compare {
        /// Comparison preset supplying the defaults.
        #[arg(long, default_value = "fig6_bandwidth")]
        preset: String,
    },
    /// Run a named preset batch (summary.csv, runs.csv, runs.jsonl).
    Preset {
        /// table1, table2, table3, fig6_bandwidth, fig7_bandwidth_10pct,
        /// fig8_energy, fig9_scatter or custom.
        name: String,
    },
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
    /// Number of pulses.
    #[arg(long)]
    pub pulses: Option<usize>,
    /// Side of the square pulse pattern.
    #[arg(long)]
    pub side: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SenseArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Field sidecar (field.json) to measure instead of a fresh synthesis.
    #[arg(long)]
    pub field: Option<PathBuf>,
    /// Number of standard angles (1 to 4).
    #[arg(long)]
    pub angles: Option<usize>,
    /// Measurement noise variance.
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RipArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    /// Number of standard angles; ignored with --pseudo.
    #[arg(long)]
    pub angles: Option<usize>,
    /// Use this many random pseudo-angle partitions instead of real angles.
    #[arg(long)]
    pub pseudo: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
}

#[derive(Debug, Args)]
pub struct GatherArgs {
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub angles: Option<usize>,
    #[arg(long)]
    pub nu0: Option<usize>,
    /// Charge diagonal hops for their sqrt(2) length.
    #[arg(long)]
    pub diagonal_distance: bool,
}

struct Ctx {
    cfg: ExperimentConfig,
    seed: u64,
    out: PathBuf,
    verbose: bool,
}

impl Ctx {
    fn log(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("{}", msg.as_ref());
        }
    }

    fn out_dir(&self) -> Result<&Path> {
        std::fs::create_dir_all(&self.out).map_err(|e| Error::io(&self.out, e))?;
        Ok(&self.out)
    }

    fn grid(&self, g: &GridArgs) -> (usize, usize, usize, usize) {
        let f = &self.cfg.field;
        (
            g.n1.unwrap_or(f.n1),
            g.n2.unwrap_or(f.n2),
            g.pulses.unwrap_or(f.pulse_count),
            g.side.unwrap_or(f.pulse_side),
        )
    }

    fn angles(&self, p: Option<usize>) -> Result<AngleSet> {
        match p {
            Some(p) => AngleSet::standard(p),
            None => Ok(self
                .cfg
                .sensing
                .angle_sets
                .iter()
                .find(|a| a.len() == 3)
                .unwrap_or(&self.cfg.sensing.angle_sets[0])
                .clone()),
        }
    }
}

/// Loads `path` over the defaults of `preset`. A file naming a different
/// preset is rejected.
fn config_for(preset: Preset, path: Option<&Path>) -> Result<ExperimentConfig> {
    let Some(path) = path else {
        return Ok(ExperimentConfig::preset(preset));
    };
    let text = report::read_to_string(path)?;
    let mut table: toml::Table = toml::from_str(&text)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    match table.get("preset").and_then(|v| v.as_str()) {
        Some(name) if name != preset.as_str() => {
            return Err(Error::Config(format!(
                "{} sets preset `{name}` but `{preset}` was requested",
                path.display()
            )));
        }
        Some(_) => {}
        None => {
            table.insert("preset".into(), toml::Value::String(preset.as_str().into()));
        }
    }
    experiment::parse_config(&table.to_string())
        .map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
}

pub fn run(cli: Cli) -> Result<()> {
    let base = match &cli.command {
        Command::Preset { name } => name.parse()?,
        Command::Compare { preset } => {
            let p: Preset = preset.parse()?;
            if !p.is_comparison() {
                return Err(Error::Config(format!("`{p}` is not a comparison preset")));
            }
            p
        }
        _ => Preset::Table1,
    };
    let cfg = match (&cli.command, &cli.config) {
        (Command::Preset { .. } | Command::Compare { .. }, path) => config_for(base, path.as_deref())?,
        (_, Some(path)) => experiment::load_config(path)?,
        (_, None) => ExperimentConfig::preset(base),
    };
    let ctx = Ctx {
        cfg,
        seed: cli.seed,
        out: cli.out,
        verbose: cli.verbose,
    };
    match cli.command {
        Command::Synth(g) => synth(&ctx, &g),
        Command::Sense(a) => sense(&ctx, &a, false),
        Command::Reconstruct(a) => sense(&ctx, &a, true),
        Command::Rip(a) => rip_cmd(&ctx, &a),
        Command::Gather(a) => gather(&ctx, &a),
        Command::Compare { .. } | Command::Preset { .. } => preset(&ctx),
    }
}

fn make_field(ctx: &Ctx, g: &GridArgs) -> Result<PulseField> {
    let (n1, n2, pulses, side) = ctx.grid(g);
    let pattern = PulsePattern::block(side)?;
    field::synth_pulse_field(n1, n2, pulses, DEFAULT_SCALE_RANGE, &pattern, ctx.seed)
}

fn write_field(ctx: &Ctx, z: &PulseField) -> Result<()> {
    let dir = ctx.out_dir()?;
    z.write_csv(&dir.join("field.csv"))?;
    z.write_sidecar(&dir.join("field.json"))
}

fn synth(ctx: &Ctx, g: &GridArgs) -> Result<()> {
    let z = make_field(ctx, g)?;
    write_field(ctx, &z)?;
    println!(
        "field {}x{} with {} pulses, energy {:.6}, written to {}",
        z.n1(),
        z.n2(),
        z.pulses().len(),
        z.energy(),
        ctx.out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct Measurements<'a> {
    angles: &'a AngleSet,
    seed: u64,
    noise_variance: f64,
    y: &'a [f64],
}

fn sense(ctx: &Ctx, a: &SenseArgs, recover: bool) -> Result<()> {
    let z = match &a.field {
        Some(path) => {
            let text = report::read_to_string(path)?;
            let side: FieldSidecar = serde_json::from_str(&text)?;
            side.into_field()?
        }
        None => make_field(ctx, &a.grid)?,
    };
    let angles = ctx.angles(a.angles)?;
    let variance = a.noise.unwrap_or(ctx.cfg.sensing.noise_variances[0]);
    let map = sensing::build_path_map(z.n1(), z.n2(), &angles)?;
    let phi = sensing::build_radon_matrix(&map, ctx.seed);
    let y = field::add_noise(&sensing::apply(&phi, z.vector())?, &NoiseSpec { variance }, ctx.seed)?;
    ctx.log(format!("M = {} measurements over angles {angles}", phi.m_rows()));
    let dir = ctx.out_dir()?;
    write_field(ctx, &z)?;
    report::write_json(
        &dir.join("measurements.json"),
        &Measurements {
            angles: &angles,
            seed: ctx.seed,
            noise_variance: variance,
            y: &y,
        },
    )?;
    if !recover {
        phi.write_triplets(&dir.join("phi.csv"), &dir.join("phi.json"))?;
        println!("{} measurements written to {}", y.len(), dir.display());
        return Ok(());
    }
    let mut solver = ctx.cfg.solver_config();
    if let SignalModel::PulseStream { .. } = solver.model {
        let count = z.pulses().len();
        let side = z.pattern().side();
        solver = reconstruction::SolverConfig {
            model: SignalModel::PulseStream {
                pulse_side: side,
                pulse_count: count,
            },
            sparsity_k: side * side * count,
            ..solver
        };
    }
    let r = match solver.model {
        SignalModel::Generic => reconstruction::cosamp(&y, &phi, &solver)?,
        SignalModel::PulseStream { .. } => reconstruction::pulse_stream_recover_with_pattern(
            &y,
            &phi,
            z.n1(),
            z.n2(),
            &solver,
            z.pattern(),
        )?,
    };
    r.write_json(&dir.join("recon.json"), Some(z.vector()))?;
    r.write_field_csv(&dir.join("field_hat.csv"), z.n1(), z.n2())?;
    let s = r.summary(Some(z.vector()))?;
    println!(
        "SSE {:.6e}, residual {:.3e} after {} iterations",
        s.sse.unwrap_or(f64::NAN),
        s.residual_norm,
        s.iterations_run
    );
    Ok(())
}

fn rip_cmd(ctx: &Ctx, a: &RipArgs) -> Result<()> {
    let z = make_field(ctx, &a.grid)?;
    let deltas = [0.05, 0.1, 0.2, 0.5];
    let report = match a.pseudo {
        Some(p) => {
            let map = rip::PseudoAngleMap::new(z.n1() * z.n2(), p, ctx.seed)?;
            rip::energy_stats(z.vector(), &map, a.trials, &deltas, ctx.seed)?
        }
        None => {
            let map = sensing::build_path_map(z.n1(), z.n2(), &ctx.angles(a.angles)?)?;
            rip::energy_stats(z.vector(), &map, a.trials, &deltas, ctx.seed)?
        }
    };
    report.write_json(&ctx.out_dir()?.join("rip.json"))?;
    println!(
        "P = {}: mean E_y {:.6} vs E_z {:.6} (bias {:.3}%), Var E_y {:.6e} <= {:.6e}",
        report.projections,
        report.mean_energy,
        report.field_energy,
        100.0 * report.relative_bias(),
        report.var_energy,
        report.var_bound_stated
    );
    for d in &report.deviation_prob {
        println!("  Pr(|E_y - E_z| >= {} E_z) = {:.4}", d.delta, d.prob);
    }
    Ok(())
}

#[derive(Serialize)]
struct GatherSummary {
    n1: usize,
    n2: usize,
    angles: AngleSet,
    nu0: usize,
    n_tx: usize,
    n_ts: usize,
    n_tx_formula: u64,
    n_ts_formula: u64,
    total_energy: f64,
    max_relative_error: f64,
}

fn gather(ctx: &Ctx, a: &GatherArgs) -> Result<()> {
    let (mut n1, mut n2, _, _) = ctx.grid(&a.grid);
    if a.grid.n1.is_none() && a.grid.n2.is_none() && n1 % 2 == 0 && n2 % 2 == 0 {
        // The table grids are even; step to the next odd network.
        n1 += 1;
        n2 += 1;
    }
    let angles = ctx.angles(a.angles)?;
    let nu0 = a.nu0.unwrap_or(ctx.cfg.schemes.nu0);
    let mut net = netsim::GridNetwork::new(n1, n2)?;
    net.charge_diagonal_distance = a.diagonal_distance;
    let pattern = PulsePattern::block(a.grid.side.unwrap_or(ctx.cfg.field.pulse_side).min(n1).min(n2))?;
    let pulses = a.grid.pulses.unwrap_or(ctx.cfg.field.pulse_count);
    let z = field::synth_pulse_field(n1, n2, pulses, DEFAULT_SCALE_RANGE, &pattern, ctx.seed)?;
    let phi = sensing::build_radon_matrix(&sensing::build_path_map(n1, n2, &angles)?, ctx.seed);
    let schedules = netsim::build_schedules(&net, &angles, nu0)?;
    let t_p = ctx.cfg.schemes.t_c / schedules.iter().map(|s| s.n_ts()).sum::<usize>().max(1) as f64;
    let g = netsim::simulate_gather(&net, &schedules, &phi, z.vector(), t_p)?;
    let y = sensing::apply(&phi, z.vector())?;
    let max_relative_error = g
        .projections
        .iter()
        .zip(&y)
        .map(|(a, b)| (a - b).abs() / b.abs().max(1e-300))
        .filter(|e| e.is_finite())
        .fold(0.0, f64::max);
    let dir = ctx.out_dir()?;
    netsim::write_schedule_jsonl(&dir.join("schedule.jsonl"), &schedules)?;
    let summary = GatherSummary {
        n1,
        n2,
        n_tx: g.n_tx,
        n_ts: g.n_ts,
        n_tx_formula: netsim::n_tx_formula(n1, n2, &angles)?,
        n_ts_formula: netsim::n_ts_formula(n1, n2, &angles, nu0)?,
        angles,
        nu0,
        total_energy: g.total_energy,
        max_relative_error,
    };
    report::write_json(&dir.join("gather.json"), &summary)?;
    if ctx.verbose && n1 <= netsim::TRACE_MAX_SIDE && n2 <= netsim::TRACE_MAX_SIDE {
        for s in &schedules {
            eprint!("{}", s.trace()?);
        }
    }
    println!(
        "{}x{} gather: {} transmissions ({} by formula), {} slots ({} by formula), max rel. error {:.2e}",
        n1, n2, summary.n_tx, summary.n_tx_formula, summary.n_ts, summary.n_ts_formula, max_relative_error
    );
    Ok(())
}

fn preset(ctx: &Ctx) -> Result<()> {
    let cfg = &ctx.cfg;
    ctx.log(format!("running {} with config hash {}", cfg.preset, cfg.hash()?));
    let out = experiment::run_preset(cfg)?;
    for r in &out.records {
        for e in &r.errors {
            eprintln!("warning: {} seed {}: {e}", r.preset, r.seed);
        }
    }
    experiment::emit_report(&out, &cfg.sensing.angle_sets[0], ctx.out_dir()?)?;
    print!("{}", out.summary.to_csv());
    if ctx.verbose && cfg.preset.is_comparison() {
        let side = cfg.schemes.sweep_sides[0];
        let exact = analytics::sum_sq_dist_oracle(side, side, cfg.schemes.spacing_d)?;
        let closed = analytics::closed_form_grid_sum(side, side, cfg.schemes.spacing_d);
        eprintln!(
            "grid sum of squared distances at {side}x{side}: exact {exact}, closed form {closed:.1}, ratio {:.4}",
            exact / closed
        );
    }
    Ok(())
}
