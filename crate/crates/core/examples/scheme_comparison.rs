//! Bandwidth and energy of the four gathering schemes over growing grids.

use radoncs::analytics::{self, Scheme, SchemeParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "N", "DD", "RD", "RR", "RL");
    for side in [33usize, 49, 65, 81, 97, 113, 129] {
        let p = SchemeParams::new(side, side);
        let mut row = format!("{:>6}", side * side);
        for s in Scheme::ALL {
            row.push_str(&format!(" {:>10.1}", analytics::native(s, &p)?.bandwidth));
        }
        println!("{row}");
    }
    println!();
    println!("energy at t_p = {} s, N = 4225:", analytics::FIXED_T_P);
    let p = SchemeParams::new(65, 65);
    for s in Scheme::ALL {
        match analytics::fixed_tp(s, &p, analytics::FIXED_T_P) {
            Ok(r) => println!("  {s:?}: {:.1}", r.energy),
            Err(e) => println!("  {s:?}: {e}"),
        }
    }
    Ok(())
}
