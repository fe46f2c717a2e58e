//! Draws a random pulse-stream field and prints it as a coarse character map.

use radoncs::field::{self, PulsePattern, DEFAULT_SCALE_RANGE};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let z = field::synth_pulse_field(24, 24, 4, DEFAULT_SCALE_RANGE, &PulsePattern::default(), 7)?;
    println!(
        "{}x{} field, {} pulses, {} nonzero cells, energy {:.3}",
        z.n1(),
        z.n2(),
        z.pulses().len(),
        z.nonzero_count(),
        z.energy()
    );
    for r in 0..z.n1() {
        let line: String = (0..z.n2())
            .map(|c| match z.get(r, c) {
                v if v == 0.0 => '.',
                v if v < 0.3 => '+',
                _ => '#',
            })
            .collect();
        println!("{line}");
    }
    Ok(())
}
