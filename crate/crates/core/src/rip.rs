//! Monte-Carlo concentration diagnostics for the measurement energy
//! `E_y = ||Phi z||^2` of Radon-like matrices, and the analytic bound on the
//! number of projections.
//!
//! Only cells where `z` is nonzero contribute to `E_y`, so each trial draws
//! coefficients for those cells alone. Trial `t` uses RNG stream `t` of the
//! configured seed, which keeps results independent of thread scheduling.

use std::path::Path;

use rand::seq::SliceRandom;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report;
use crate::rng;
use crate::sensing::ProjectionPartition;

pub const MIN_TRIALS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationPoint {
    pub delta: f64,
    /// Empirical `Pr{|E_y - E_z| >= delta * E_z}`.
    pub prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub trials: usize,
    pub projections: usize,
    pub mean_energy: f64,
    pub var_energy: f64,
    pub field_energy: f64,
    /// Standard error of `mean_energy`.
    pub std_error: f64,
    pub deviation_prob: Vec<DeviationPoint>,
    /// Nonzero cell count `K`.
    pub nonzero_cells: usize,
    pub c2: f64,
    /// `K^2 C2^2 / P`.
    pub var_bound_stated: f64,
    /// `2 K^2 C2^2 / P`, the end of the inequality chain.
    pub var_bound_chain: f64,
}

impl ConcentrationReport {
    pub fn relative_bias(&self) -> f64 {
        (self.mean_energy - self.field_energy).abs() / self.field_energy
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        report::write_json(path, self)
    }
}

/// Random partitions standing in for projection angles: each pseudo-projection
/// shuffles the cells and cuts them into groups of about `sqrt(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoAngleMap {
    n: usize,
    groups: Vec<Vec<Vec<usize>>>,
}

impl PseudoAngleMap {
    pub fn new(n: usize, p: usize, seed: u64) -> Result<Self> {
        if n == 0 || p == 0 {
            return Err(Error::InvalidArgument(format!(
                "need n >= 1 and p >= 1, got n = {n}, p = {p}"
            )));
        }
        let size = ((n as f64).sqrt().round() as usize).max(1);
        let mut rng = rng::seeded(seed);
        let groups = (0..p)
            .map(|_| {
                let mut cells: Vec<usize> = (0..n).collect();
                cells.shuffle(&mut rng);
                cells.chunks(size).map(<[usize]>::to_vec).collect()
            })
            .collect();
        Ok(Self { n, groups })
    }

    pub fn p(&self) -> usize {
        self.groups.len()
    }
}

impl ProjectionPartition for PseudoAngleMap {
    fn n_cells(&self) -> usize {
        self.n
    }

    fn projections(&self) -> &[Vec<Vec<usize>>] {
        &self.groups
    }
}

/// Sample mean, variance and relative deviation probabilities of `E_y` over
/// `trials` independent draws of `N(0, 1/P)` coefficients.
pub fn energy_stats<M: ProjectionPartition + Sync + ?Sized>(
    z: &[f64],
    map: &M,
    trials: usize,
    deltas: &[f64],
    seed: u64,
) -> Result<ConcentrationReport> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!(
            "need at least {MIN_TRIALS} trials, got {trials}"
        )));
    }
    if z.len() != map.n_cells() {
        return Err(Error::DimensionMismatch {
            expected: map.n_cells(),
            actual: z.len(),
        });
    }
    let e_z: f64 = z.iter().map(|v| v * v).sum();
    if e_z == 0.0 {
        return Err(Error::InvalidArgument(
            "zero field: relative deviation is undefined".into(),
        ));
    }
    let p = map.projections().len();
    // Each group reduced to the field values it actually accumulates.
    let groups: Vec<Vec<f64>> = map
        .projections()
        .iter()
        .flatten()
        .map(|g| g.iter().map(|&c| z[c]).filter(|v| *v != 0.0).collect::<Vec<f64>>())
        .filter(|g| !g.is_empty())
        .collect();
    let normal = Normal::new(0.0, (1.0 / p as f64).sqrt()).expect("positive variance");

    let energies: Vec<f64> = (0..trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng::stream(seed, t);
            groups
                .iter()
                .map(|g| {
                    let s: f64 = g.iter().map(|v| normal.sample(&mut rng) * v).sum();
                    s * s
                })
                .sum()
        })
        .collect();

    let n = trials as f64;
    let mean = energies.iter().sum::<f64>() / n;
    let var = energies.iter().map(|e| (e - mean) * (e - mean)).sum::<f64>() / (n - 1.0);
    let deviation_prob = deltas
        .iter()
        .map(|&delta| DeviationPoint {
            delta,
            prob: energies
                .iter()
                .filter(|&&e| (e - e_z).abs() >= delta * e_z)
                .count() as f64
                / n,
        })
        .collect();
    let k = z.iter().filter(|v| **v != 0.0).count() as f64;
    let c2 = c2_of(z);
    let stated = k * k * c2 * c2 / p as f64;
    Ok(ConcentrationReport {
        trials,
        projections: p,
        mean_energy: mean,
        var_energy: var,
        field_energy: e_z,
        std_error: (var / n).sqrt(),
        deviation_prob,
        nonzero_cells: k as usize,
        c2,
        var_bound_stated: stated,
        var_bound_chain: 2.0 * stated,
    })
}

/// `ceil(2 k^2 c2^2 ln(2/epsilon) / delta^2)`.
pub fn min_projections(k: usize, c2: f64, epsilon: f64, delta: f64) -> Result<u64> {
    if k == 0 || !(c2 > 0.0) || !(epsilon > 0.0 && epsilon < 2.0) || !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "need k >= 1, c2 > 0, 0 < epsilon < 2, delta > 0; got k = {k}, c2 = {c2}, epsilon = {epsilon}, delta = {delta}"
        )));
    }
    let raw = min_projections_raw(k, c2, epsilon, delta);
    // Absorb round-off so exact integers do not tip over the ceiling.
    Ok((raw * (1.0 - 1e-12)).ceil() as u64)
}

/// The projection bound before rounding up.
pub fn min_projections_raw(k: usize, c2: f64, epsilon: f64, delta: f64) -> f64 {
    let k = k as f64;
    2.0 * k * k * c2 * c2 * (2.0 / epsilon).ln() / (delta * delta)
}

/// Largest squared cell value.
pub fn c2_of(z: &[f64]) -> f64 {
    z.iter().map(|v| v * v).fold(0.0, f64::max)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{synth_pulse_field, PulsePattern, DEFAULT_SCALE_RANGE};
    use crate::sensing::{build_path_map, AngleSet};

    fn field(seed: u64) -> Vec<f64> {
        synth_pulse_field(64, 64, 7, DEFAULT_SCALE_RANGE, &PulsePattern::default(), seed)
            .unwrap()
            .vector()
            .to_vec()
    }

    #[test]
    fn min_projections_examples() {
        assert_eq!(min_projections(1, 1.0, 2.0 / std::f64::consts::E, 1.0).unwrap(), 2);
        assert_eq!(min_projections(7, 1.0, 0.05, 0.5).unwrap(), 1447);
        let a = min_projections_raw(7, 1.0, 0.05, 0.5);
        let b = min_projections_raw(7, 1.0, 0.05, 1.0);
        assert!((a / b - 4.0).abs() < 1e-12);
        assert!(min_projections(0, 1.0, 0.1, 1.0).is_err());
        assert!(min_projections(1, 1.0, 2.0, 1.0).is_err());
    }

    #[test]
    fn c2_examples() {
        assert_eq!(c2_of(&[0.0; 9]), 0.0);
        assert!((c2_of(&[0.1, -0.85, 0.3]) - 0.7225).abs() < 1e-15);
        let f = synth_pulse_field(64, 64, 7, DEFAULT_SCALE_RANGE, &PulsePattern::default(), 2)
            .unwrap();
        let max_scale = f.pulses().iter().map(|p| p.scale).fold(0.0, f64::max);
        assert_eq!(c2_of(f.vector()), max_scale * max_scale);
    }

    #[test]
    fn rejects_zero_field_and_few_trials() {
        let map = build_path_map(8, 8, &AngleSet::standard(2).unwrap()).unwrap();
        assert!(energy_stats(&[0.0; 64], &map, 200, &[0.1], 1).is_err());
        let mut z = vec![0.0; 64];
        z[3] = 1.0;
        assert!(energy_stats(&z, &map, 10, &[0.1], 1).is_err());
    }

    #[test]
    fn deterministic_and_scale_homogeneous() {
        let f = synth_pulse_field(16, 16, 1, (1.0, 1.0), &PulsePattern::default(), 3).unwrap();
        let map = build_path_map(16, 16, &AngleSet::standard(3).unwrap()).unwrap();
        let a = energy_stats(f.vector(), &map, 500, &[0.1, 0.5], 9).unwrap();
        let b = energy_stats(f.vector(), &map, 500, &[0.1, 0.5], 9).unwrap();
        assert_eq!(a, b);
        let z2: Vec<f64> = f.vector().iter().map(|v| 2.0 * v).collect();
        let c = energy_stats(&z2, &map, 500, &[0.1, 0.5], 9).unwrap();
        assert!((c.mean_energy / a.mean_energy - 4.0).abs() < 1e-12);
        assert_eq!(a.deviation_prob, c.deviation_prob);
    }

    #[test]
    fn unbiased_within_three_standard_errors() {
        for p in 2..=4 {
            let map = build_path_map(64, 64, &AngleSet::standard(p).unwrap()).unwrap();
            let r = energy_stats(&field(1), &map, 4000, &[0.1], 17).unwrap();
            assert!(
                (r.mean_energy - r.field_energy).abs() <= 3.0 * r.std_error,
                "P={p}: {r:?}"
            );
            assert!(r.var_energy <= r.var_bound_chain);
        }
    }

    #[test]
    fn pseudo_maps_partition_cells() {
        let m = PseudoAngleMap::new(100, 5, 3).unwrap();
        assert_eq!(m.p(), 5);
        for proj in m.projections() {
            let mut seen = [0u8; 100];
            for g in proj {
                assert!(g.len() <= 10);
                for &c in g {
                    seen[c] += 1;
                }
            }
            assert!(seen.iter().all(|&s| s == 1));
        }
    }

    #[test]
    fn deviation_probability_falls_with_p() {
        let delta = 0.2;
        let mut probs = [0.0; 3];
        for seed in 0..10u64 {
            let z = field(100 + seed);
            for (slot, p) in (2..=4).enumerate() {
                let map = build_path_map(64, 64, &AngleSet::standard(p).unwrap()).unwrap();
                probs[slot] += energy_stats(&z, &map, 1000, &[delta], seed).unwrap().deviation_prob[0].prob;
            }
        }
        assert!(probs[0] >= probs[1] && probs[1] >= probs[2], "{probs:?}");
    }

    #[test]
    fn slope_helper() {
        let x = [1.0, 2.0, 4.0];
        let y = [8.0, 4.0, 2.0];
        assert!((log_log_slope(&x, &y) + 1.0).abs() < 1e-12);
    }

    mod props {
        use super::super::*;
        use crate::sensing::{build_path_map, AngleSet};
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(16))]
            #[test]
            fn report_invariants(seed in any::<u64>(), p in 1usize..5, cell in 0usize..81) {
                let mut z = vec![0.0; 81];
                z[cell] = 0.7;
                z[(cell + 40) % 81] = -0.5;
                let map = build_path_map(9, 9, &AngleSet::standard(p).unwrap()).unwrap();
                let r = energy_stats(&z, &map, 300, &[0.05, 0.2, 0.5, 1.0], seed).unwrap();
                for w in r.deviation_prob.windows(2) {
                    prop_assert!(w[0].prob >= w[1].prob);
                }
                for d in &r.deviation_prob {
                    prop_assert!((0.0..=1.0).contains(&d.prob));
                }
                prop_assert!(r.var_energy <= r.var_bound_chain * 1.5);
            }
        }
    }
}
