//! Schedules in-network Radon gathering on a small grid and prints the slot trace.

use radoncs::field::{self, PulsePattern, DEFAULT_SCALE_RANGE};
use radoncs::netsim::{self, GridNetwork};
use radoncs::sensing::{self, AngleSet};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let net = GridNetwork::new(7, 7)?;
    let angles = AngleSet::standard(4)?;
    let schedules = netsim::build_schedules(&net, &angles, netsim::DEFAULT_NU0)?;
    for s in &schedules {
        println!("angle {}: {} transmissions in {} slots", s.angle, s.n_tx(), s.n_ts());
    }
    println!("{}", schedules[0].trace()?);

    let z = field::synth_pulse_field(7, 7, 1, DEFAULT_SCALE_RANGE, &PulsePattern::default(), 4)?;
    let phi = sensing::build_radon_matrix(&sensing::build_path_map(7, 7, &angles)?, 4);
    let g = netsim::simulate_gather(&net, &schedules, &phi, z.vector(), 1.0)?;
    let y = sensing::apply(&phi, z.vector())?;
    let err = g
        .projections
        .iter()
        .zip(&y)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    println!(
        "gathered {} projections, max deviation from Phi z {err:.2e}, total energy {:.1}",
        g.projections.len(),
        g.total_energy
    );
    Ok(())
}
