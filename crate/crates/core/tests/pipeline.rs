//! End-to-end runs through several modules at once.

use radoncs::experiment::{self, ExperimentConfig, Preset};
use radoncs::field::{self, PulsePattern, DEFAULT_SCALE_RANGE};
use radoncs::netsim::{self, GridNetwork};
use radoncs::reconstruction::{self, SolverConfig};
use radoncs::sensing::{self, AngleSet};

#[test]
fn gathered_measurements_reconstruct_the_field() {
    let (n1, n2) = (33, 33);
    let angles = AngleSet::standard(3).unwrap();
    let z = field::synth_pulse_field(n1, n2, 3, DEFAULT_SCALE_RANGE, &PulsePattern::default(), 8).unwrap();
    let phi = sensing::build_radon_matrix(&sensing::build_path_map(n1, n2, &angles).unwrap(), 8);
    let net = GridNetwork::new(n1, n2).unwrap();
    let schedules = netsim::build_schedules(&net, &angles, 2).unwrap();
    let g = netsim::simulate_gather(&net, &schedules, &phi, z.vector(), 0.5).unwrap();
    let cfg = SolverConfig::pulse_stream(z.pattern().side(), 3);
    let r = reconstruction::pulse_stream_recover(&g.projections, &phi, n1, n2, &cfg).unwrap();
    assert!(field::sse(z.vector(), &r.z_hat).unwrap() < 1e-9);
    let total: f64 = g.per_node_energy.iter().sum();
    assert!((total - g.total_energy).abs() <= 1e-9 * g.total_energy);
}

#[test]
fn field_csv_round_trip_feeds_sensing() {
    let dir = tempfile::tempdir().unwrap();
    let z = field::synth_pulse_field(16, 20, 2, DEFAULT_SCALE_RANGE, &PulsePattern::default(), 4).unwrap();
    let path = dir.path().join("z.csv");
    z.write_csv(&path).unwrap();
    let (n1, n2, v) = field::read_grid_csv(&path).unwrap();
    assert_eq!((n1, n2), (16, 20));
    let phi = sensing::build_radon_matrix(
        &sensing::build_path_map(n1, n2, &AngleSet::standard(4).unwrap()).unwrap(),
        2,
    );
    let a = sensing::apply(&phi, &v).unwrap();
    let b = sensing::apply(&phi, z.vector()).unwrap();
    for (x, y) in a.iter().zip(&b) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn config_text_drives_a_reproducible_run() {
    let text = r#"
preset = "custom"
seeds = [3, 4]

[field]
n1 = 21
n2 = 21
pulse_count = 2

[sensing]
angle_sets = [["0", "pi/2", "pi/4"]]
gather = true
"#;
    let cfg = experiment::parse_config(text).unwrap();
    let a = experiment::run_preset(&cfg).unwrap();
    let b = experiment::run_preset(&cfg).unwrap();
    let strip = |o: &experiment::PresetOutput| {
        o.records.iter().map(|r| r.without_timing()).collect::<Vec<_>>()
    };
    assert_eq!(strip(&a), strip(&b));
    assert_eq!(a.records.len(), 2);
    assert_eq!(a.records[0].seed, 3);
    assert!(a.records.iter().all(|r| r.errors.is_empty()));
    assert!(a.records[0].metrics.keys().any(|k| k.starts_with("n_tx/")));

    let dir = tempfile::tempdir().unwrap();
    experiment::emit_report(&a, &AngleSet::standard(3).unwrap(), dir.path()).unwrap();
    for f in ["summary.csv", "runs.csv", "runs.jsonl"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    let jsonl = std::fs::read_to_string(dir.path().join("runs.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 2);
}

#[test]
fn comparison_preset_reports_every_scheme() {
    let mut cfg = ExperimentConfig::preset(Preset::Fig6Bandwidth);
    cfg.schemes.sweep_sides = vec![33, 65];
    let out = experiment::run_preset(&cfg).unwrap();
    assert_eq!(out.summary.rows.len(), 2);
    for key in ["DD/bandwidth", "RL/energy"] {
        assert!(out.records[0].metrics.contains_key(key), "{key}");
    }
    assert!(!out.resources.is_empty());
}
