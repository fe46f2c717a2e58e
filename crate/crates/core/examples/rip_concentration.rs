//! Monte Carlo estimate of how measurement energy concentrates around field energy.

use radoncs::field::{self, PulsePattern, DEFAULT_SCALE_RANGE};
use radoncs::rip::{self, PseudoAngleMap};
use radoncs::sensing::{self, AngleSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let z = field::synth_pulse_field(64, 64, 7, DEFAULT_SCALE_RANGE, &PulsePattern::default(), 3)?;
    let map = sensing::build_path_map(64, 64, &AngleSet::standard(3)?)?;
    let report = rip::energy_stats(z.vector(), &map, 5_000, &[0.05, 0.1, 0.2], 1)?;
    println!(
        "P=3: E_z {:.3}, mean E_y {:.3} (bias {:.2}%), Var {:.4}, bound {:.4}",
        report.field_energy,
        report.mean_energy,
        100.0 * report.relative_bias(),
        report.var_energy,
        report.var_bound_stated
    );
    for d in &report.deviation_prob {
        println!("  Pr(|E_y - E_z| >= {} E_z) = {:.4}", d.delta, d.prob);
    }

    let ps = [2usize, 4, 8, 16, 32];
    let mut vars = Vec::new();
    for p in ps {
        let m = PseudoAngleMap::new(4096, p, 17)?;
        let r = rip::energy_stats(z.vector(), &m, 5_000, &[], 2)?;
        println!("pseudo P={p:>2}: Var {:.5}", r.var_energy);
        vars.push(r.var_energy);
    }
    let x: Vec<f64> = ps.iter().map(|&p| p as f64).collect();
    println!("log-log slope {:.3}", rip::log_log_slope(&x, &vars));

    let k = z.nonzero_count();
    let need = rip::min_projections(k, rip::c2_of(z.vector()), 0.2, 0.1)?;
    println!("projections needed for eps=0.2, delta=0.1 with K={k}: {need}");
    Ok(())
}
