//! Recovers a pulse field from Radon measurements, with and without noise.

use radoncs::field::{self, NoiseSpec, PulsePattern, DEFAULT_SCALE_RANGE};
use radoncs::reconstruction::{self, SolverConfig};
use radoncs::sensing::{self, AngleSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let z = field::synth_pulse_field(64, 64, 7, DEFAULT_SCALE_RANGE, &PulsePattern::default(), 2)?;
    let map = sensing::build_path_map(64, 64, &AngleSet::standard(3)?)?;
    let phi = sensing::build_radon_matrix(&map, 5);
    let y = sensing::apply(&phi, z.vector())?;
    let cfg = SolverConfig::pulse_stream(z.pattern().side(), 7);

    let clean = reconstruction::pulse_stream_recover(&y, &phi, 64, 64, &cfg)?;
    println!(
        "noiseless: SSE {:.3e} after {} iterations",
        field::sse(z.vector(), &clean.z_hat)?,
        clean.iterations_run
    );

    for variance in [1e-4, 1e-2] {
        let noisy = field::add_noise(&y, &NoiseSpec { variance }, 9)?;
        let r = reconstruction::pulse_stream_recover(&noisy, &phi, 64, 64, &cfg)?;
        println!("noise variance {variance}: SSE {:.3e}", field::sse(z.vector(), &r.z_hat)?);
    }

    let rs = sensing::build_rs_matrix(4096, 255, 5)?;
    let ys = sensing::apply(&rs, z.vector())?;
    let r = reconstruction::rs_recover(&ys, &rs)?;
    println!("random sampling M=255: SSE {:.3}", field::sse(z.vector(), &r.z_hat)?);
    Ok(())
}
