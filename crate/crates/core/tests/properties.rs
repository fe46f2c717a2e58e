//! Cross-module properties on random grids.

use proptest::prelude::*;
use radoncs::field::{self, PulsePattern, DEFAULT_SCALE_RANGE};
use radoncs::netsim::{self, GridNetwork};
use radoncs::sensing::{self, AngleSet};

fn odd() -> impl Strategy<Value = usize> {
    (1usize..=12).prop_map(|h| 2 * h + 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn gather_equals_matrix_product(n1 in odd(), n2 in odd(), p in 1usize..=4, nu0 in 1usize..=3, seed in 0u64..1000) {
        let angles = AngleSet::standard(p).unwrap();
        let net = GridNetwork::new(n1, n2).unwrap();
        let schedules = netsim::build_schedules(&net, &angles, nu0).unwrap();
        let phi = sensing::build_radon_matrix(&sensing::build_path_map(n1, n2, &angles).unwrap(), seed);
        let z: Vec<f64> = (0..n1 * n2).map(|i| ((i as f64 + seed as f64) * 0.37).sin()).collect();
        let g = netsim::simulate_gather(&net, &schedules, &phi, &z, 1.0).unwrap();
        let y = sensing::apply(&phi, &z).unwrap();
        for (a, b) in g.projections.iter().zip(&y) {
            prop_assert!((a - b).abs() <= 1e-9 * (1.0 + b.abs()));
        }
    }

    #[test]
    fn schedules_are_interference_free(n1 in odd(), n2 in odd(), nu0 in 1usize..=3) {
        let net = GridNetwork::new(n1, n2).unwrap();
        for s in netsim::build_schedules(&net, &AngleSet::standard(4).unwrap(), nu0).unwrap() {
            prop_assert!(s.violations().is_empty(), "{:?}", s.violations());
        }
    }

    #[test]
    fn measurements_are_linear(seed in 0u64..500, a in -3.0f64..3.0) {
        let pattern = PulsePattern::default();
        let z1 = field::synth_pulse_field(20, 20, 2, DEFAULT_SCALE_RANGE, &pattern, seed).unwrap();
        let z2 = field::synth_pulse_field(20, 20, 2, DEFAULT_SCALE_RANGE, &pattern, seed + 1).unwrap();
        let phi = sensing::build_radon_matrix(&sensing::build_path_map(20, 20, &AngleSet::standard(4).unwrap()).unwrap(), seed);
        let mix: Vec<f64> = z1.vector().iter().zip(z2.vector()).map(|(x, y)| a * x + y).collect();
        let lhs = sensing::apply(&phi, &mix).unwrap();
        let y1 = sensing::apply(&phi, z1.vector()).unwrap();
        let y2 = sensing::apply(&phi, z2.vector()).unwrap();
        for i in 0..lhs.len() {
            prop_assert!((lhs[i] - (a * y1[i] + y2[i])).abs() < 1e-9);
        }
    }
}
