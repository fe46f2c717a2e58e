//! Builds the randomized Radon matrix for a few angle sets and takes measurements.

use radoncs::field::{self, PulsePattern, DEFAULT_SCALE_RANGE};
use radoncs::sensing::{self, AngleSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let z = field::synth_pulse_field(64, 64, 7, DEFAULT_SCALE_RANGE, &PulsePattern::default(), 1)?;
    for p in 2..=4 {
        let angles = AngleSet::standard(p)?;
        let map = sensing::build_path_map(64, 64, &angles)?;
        let phi = sensing::build_radon_matrix(&map, 11);
        let y = sensing::apply(&phi, z.vector())?;
        let energy: f64 = y.iter().map(|v| v * v).sum();
        println!(
            "P={p} angles {:?}: M={} nnz={} ||y||^2={energy:.3} ||z||^2={:.3}",
            angles.angles().iter().map(|a| a.as_str()).collect::<Vec<_>>(),
            phi.m_rows(),
            phi.nnz(),
            z.energy()
        );
    }
    Ok(())
}
