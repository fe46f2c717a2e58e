//! Closed-form bandwidth and energy models for four gathering schemes:
//! conventional direct delivery (DD), random sensing with deterministic TDMA
//! access (RD), random sensing with random access (RR) and the Radon-like
//! in-network gather (RL).
//!
//! Energies are in units of `gain_g * spacing_d^2 * seconds` and bandwidths in
//! bits per second; every report satisfies `bandwidth * t_p = l_bits`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim;
use crate::report;
use crate::rng;
use crate::sensing::AngleSet;

pub const DEFAULT_L_BITS: f64 = 1000.0;
pub const DEFAULT_T_C: f64 = 2500.0;
/// Shared packet time of the equal-`t_p` energy comparison.
pub const FIXED_T_P: f64 = 0.61;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Scheme {
    DD,
    RD,
    RR,
    RL,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::DD, Scheme::RD, Scheme::RR, Scheme::RL];

    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::DD => "DD",
            Scheme::RD => "RD",
            Scheme::RR => "RR",
            Scheme::RL => "RL",
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    pub n1: usize,
    pub n2: usize,
    pub l_bits: f64,
    pub t_c: f64,
    pub gain_g: f64,
    pub spacing_d: f64,
    /// Measurements collected by RD.
    pub m: usize,
    /// Required reception fraction for RR.
    pub q_s: f64,
    pub nu0: usize,
    pub angles: AngleSet,
}

impl SchemeParams {
    /// Default parameters on an `n1 x n2` grid: L = 1 kb, T_c = 2500 s, half of
    /// the readings for RD and RR, three angles and `nu0 = 2` for RL.
    pub fn new(n1: usize, n2: usize) -> Self {
        Self {
            n1,
            n2,
            l_bits: DEFAULT_L_BITS,
            t_c: DEFAULT_T_C,
            gain_g: 1.0,
            spacing_d: 1.0,
            m: (n1 * n2).div_ceil(2),
            q_s: 0.5,
            nu0: netsim::DEFAULT_NU0,
            angles: AngleSet::standard(3).expect("three standard angles"),
        }
    }

    /// Sets RD's `m = ceil(fraction N)` and RR's `q_s = fraction`.
    pub fn with_fraction(mut self, fraction: f64) -> Self {
        self.m = ((fraction * self.n() as f64).ceil() as usize).max(1);
        self.q_s = fraction;
        self
    }

    pub fn n(&self) -> usize {
        self.n1 * self.n2
    }

    pub fn alpha1(&self) -> f64 {
        self.n1 as f64 / (self.n() as f64).sqrt()
    }

    pub fn alpha2(&self) -> f64 {
        self.n2 as f64 / (self.n() as f64).sqrt()
    }

    /// `alpha1 alpha2 (alpha1^2 + alpha2^2) / 48`.
    pub fn grid_constant(&self) -> f64 {
        let (a1, a2) = (self.alpha1(), self.alpha2());
        a1 * a2 * (a1 * a1 + a2 * a2) / 48.0
    }

    fn unit(&self) -> f64 {
        self.gain_g * self.spacing_d * self.spacing_d
    }

    pub fn validate(&self) -> Result<()> {
        if self.n() == 0 {
            return Err(Error::InvalidArgument("grid must be non-empty".into()));
        }
        if !(self.t_c > 0.0) || !(self.l_bits > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "t_c and l_bits must be positive, got {} and {}",
                self.t_c, self.l_bits
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub scheme: Scheme,
    pub n1: usize,
    pub n2: usize,
    pub bandwidth: f64,
    pub energy: f64,
    pub t_p: f64,
    /// `m`, `q_s`, `p_s`, `n_tx`, `n_ts`, `gamma`, `delta`,
    /// `energy_approx` as applicable.
    pub aux: BTreeMap<String, f64>,
}

impl ResourceReport {
    fn new(scheme: Scheme, p: &SchemeParams, t_p: f64, energy: f64) -> Self {
        Self {
            scheme,
            n1: p.n1,
            n2: p.n2,
            bandwidth: p.l_bits / t_p,
            energy,
            t_p,
            aux: BTreeMap::new(),
        }
    }

    fn with(mut self, key: &str, value: f64) -> Self {
        self.aux.insert(key.to_string(), value);
        self
    }

    pub fn n(&self) -> usize {
        self.n1 * self.n2
    }
}

/// Every sensor delivers its reading straight to the FC in its own slot.
pub fn conventional(p: &SchemeParams) -> Result<ResourceReport> {
    p.validate()?;
    let n = p.n() as f64;
    let t_p = p.t_c / n;
    let energy = p.grid_constant() * p.unit() * n * p.t_c;
    Ok(ResourceReport::new(Scheme::DD, p, t_p, energy))
}

/// `m` randomly chosen sensors deliver directly under TDMA.
pub fn rd(p: &SchemeParams) -> Result<ResourceReport> {
    p.validate()?;
    if p.m == 0 || p.m > p.n() {
        return Err(Error::InvalidArgument(format!(
            "m must lie in 1..={}, got {}",
            p.n(),
            p.m
        )));
    }
    let t_p = p.t_c / p.m as f64;
    let n = p.n() as f64;
    // (M/N) c N^2 t_p with t_p = T_c/M, which no longer depends on M.
    let energy = p.m as f64 / n * p.grid_constant() * n * n * t_p * p.unit();
    Ok(ResourceReport::new(Scheme::RD, p, t_p, energy).with("m", p.m as f64))
}

fn check_q(q_s: f64) -> Result<()> {
    if !(q_s > 0.0 && q_s < 1.0) {
        return Err(Error::InvalidArgument(format!("q_s must lie in (0, 1), got {q_s}")));
    }
    Ok(())
}

/// Smallest bandwidth for which a sensing probability reaching `q_s` exists.
pub fn rr_min_bandwidth(p: &SchemeParams) -> Result<f64> {
    p.validate()?;
    check_q(p.q_s)?;
    let n = p.n() as f64;
    let base = p.l_bits / p.t_c;
    let e = std::f64::consts::E;
    Ok(if p.q_s <= 1.0 / e {
        base * (2.0 * n * e * p.q_s + 1.0)
    } else {
        base * (2.0 * n / -p.q_s.ln() + 1.0)
    })
}

/// Reception fraction `p_s exp(-p_s 2 L N / (T_c B - L))` of slotted random
/// access.
pub fn rr_reception(p_s: f64, bandwidth: f64, p: &SchemeParams) -> f64 {
    let c = 2.0 * p.l_bits * p.n() as f64 / (p.t_c * bandwidth - p.l_bits);
    p_s * (-p_s * c).exp()
}

/// Smallest `p_s` in `(0, 1]` whose reception fraction equals `q_s`, by
/// bisection to 1e-10.
pub fn rr_solve_ps(q_s: f64, bandwidth: f64, p: &SchemeParams) -> Result<f64> {
    p.validate()?;
    check_q(q_s)?;
    let infeasible = || Error::InfeasibleBandwidth {
        q_s,
        bandwidth,
        minimum: rr_min_bandwidth(&SchemeParams { q_s, ..p.clone() }).unwrap_or(f64::NAN),
    };
    if !(bandwidth * p.t_c > p.l_bits) {
        return Err(infeasible());
    }
    let c = 2.0 * p.l_bits * p.n() as f64 / (p.t_c * bandwidth - p.l_bits);
    // The reception fraction rises up to p = 1/c and falls after it.
    let hi = (1.0 / c).min(1.0);
    let f_hi = rr_reception(hi, bandwidth, p);
    if f_hi < q_s * (1.0 - 1e-9) {
        return Err(infeasible());
    }
    if f_hi <= q_s {
        return Ok(hi);
    }
    let (mut lo, mut up) = (0.0, hi);
    while up - lo > 1e-10 {
        let mid = 0.5 * (lo + up);
        if rr_reception(mid, bandwidth, p) < q_s {
            lo = mid;
        } else {
            up = mid;
        }
    }
    Ok(0.5 * (lo + up))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RrEnergy {
    /// `p_s N^2 t_p / 24`.
    pub exact: f64,
    /// Large-N form `p_s N T_c / 48`.
    pub approx: f64,
    pub t_p: f64,
}

pub fn rr_energy(p_s: f64, bandwidth: f64, p: &SchemeParams) -> Result<RrEnergy> {
    p.validate()?;
    if !(p_s > 0.0 && p_s <= 1.0) {
        return Err(Error::InvalidArgument(format!("p_s must lie in (0, 1], got {p_s}")));
    }
    if !(bandwidth > 0.0) {
        return Err(Error::InvalidArgument("bandwidth must be positive".into()));
    }
    let n = p.n() as f64;
    let t_p = p.l_bits / bandwidth;
    Ok(RrEnergy {
        exact: p_s / 24.0 * n * n * t_p * p.unit(),
        approx: p_s / 48.0 * n * p.t_c * p.unit(),
        t_p,
    })
}

/// RR dimensioned at its minimum bandwidth for `q_s`.
pub fn rr(p: &SchemeParams) -> Result<ResourceReport> {
    let b = rr_min_bandwidth(p)?;
    let p_s = rr_solve_ps(p.q_s, b, p)?;
    let e = rr_energy(p_s, b, p)?;
    Ok(ResourceReport::new(Scheme::RR, p, e.t_p, e.exact)
        .with("q_s", p.q_s)
        .with("p_s", p_s)
        .with("energy_approx", e.approx))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GatherCounts {
    pub n_tx: u64,
    pub n_ts: u64,
}

/// Closed-form counts for the params' grid, angles and `nu0`.
pub fn rl_formula_counts(p: &SchemeParams) -> Result<GatherCounts> {
    Ok(GatherCounts {
        n_tx: netsim::n_tx_formula(p.n1, p.n2, &p.angles)?,
        n_ts: netsim::n_ts_formula(p.n1, p.n2, &p.angles, p.nu0)?,
    })
}

/// Radon-like gather finishing within one coherence time: `t_p = T_c / n_ts`
/// and one hop's energy per transmission.
pub fn rl_resources(p: &SchemeParams, counts: GatherCounts) -> Result<ResourceReport> {
    p.validate()?;
    if counts.n_ts == 0 {
        return Err(Error::InvalidArgument("n_ts must be positive".into()));
    }
    let t_p = p.t_c / counts.n_ts as f64;
    rl_at(p, counts, t_p)
}

fn rl_at(p: &SchemeParams, counts: GatherCounts, t_p: f64) -> Result<ResourceReport> {
    let energy = counts.n_tx as f64 * p.unit() * t_p;
    let mut r = ResourceReport::new(Scheme::RL, p, t_p, energy)
        .with("n_tx", counts.n_tx as f64)
        .with("n_ts", counts.n_ts as f64)
        .with("nu0", p.nu0 as f64);
    if let Ok((g, d)) = netsim::gamma_delta(&p.angles, p.alpha1(), p.alpha2(), p.nu0) {
        r = r.with("gamma", g).with("delta", d);
    }
    Ok(r)
}

/// Native dimensioning of `scheme`; RL uses the closed-form counts.
pub fn native(scheme: Scheme, p: &SchemeParams) -> Result<ResourceReport> {
    match scheme {
        Scheme::DD => conventional(p),
        Scheme::RD => rd(p),
        Scheme::RR => rr(p),
        Scheme::RL => rl_resources(p, rl_formula_counts(p)?),
    }
}

/// All schemes sharing one packet time `t_p`, so energies compare at equal
/// bandwidth. RR fails with `InfeasibleBandwidth` once `L / t_p` drops below
/// its minimum.
pub fn fixed_tp(scheme: Scheme, p: &SchemeParams, t_p: f64) -> Result<ResourceReport> {
    p.validate()?;
    if !(t_p > 0.0) {
        return Err(Error::InvalidArgument(format!("t_p must be positive, got {t_p}")));
    }
    let n = p.n() as f64;
    let c = p.grid_constant();
    match scheme {
        Scheme::DD => Ok(ResourceReport::new(scheme, p, t_p, c * n * n * t_p * p.unit())),
        Scheme::RD => {
            let m = p.m as f64;
            Ok(ResourceReport::new(scheme, p, t_p, m / n * c * n * n * t_p * p.unit())
                .with("m", m))
        }
        Scheme::RR => {
            let b = p.l_bits / t_p;
            let p_s = rr_solve_ps(p.q_s, b, p)?;
            let e = rr_energy(p_s, b, p)?;
            Ok(ResourceReport::new(scheme, p, t_p, e.exact)
                .with("q_s", p.q_s)
                .with("p_s", p_s))
        }
        Scheme::RL => rl_at(p, rl_formula_counts(p)?, t_p),
    }
}

/// Exact `sum_k d_k^2` over the grid with the FC at the center.
pub fn sum_sq_dist_oracle(n1: usize, n2: usize, spacing_d: f64) -> Result<f64> {
    if n1 % 2 == 0 || n2 % 2 == 0 {
        return Err(Error::EvenGrid { n1, n2 });
    }
    let (h1, h2) = ((n1 / 2) as i64, (n2 / 2) as i64);
    let mut total: i64 = 0;
    for i in -h1..=h1 {
        for j in -h2..=h2 {
            total += i * i + j * j;
        }
    }
    Ok(total as f64 * spacing_d * spacing_d)
}

/// The closed-form grid sum `alpha1 alpha2 (alpha1^2 + alpha2^2) N^2 d^2 / 48`
/// used by the scheme energies.
pub fn closed_form_grid_sum(n1: usize, n2: usize, spacing_d: f64) -> f64 {
    let p = SchemeParams {
        spacing_d,
        ..SchemeParams::new(n1, n2)
    };
    let n = p.n() as f64;
    p.grid_constant() * n * n * spacing_d * spacing_d
}

/// Measured reception fraction of slotted random access over `windows`
/// coherence windows. Each sensor transmits with probability `p_s` a packet of
/// duration `L / B` starting uniformly in `[0, T_c - L/B]`; a packet is
/// received when no other packet overlaps it.
pub fn rr_monte_carlo(
    p: &SchemeParams,
    p_s: f64,
    bandwidth: f64,
    windows: usize,
    seed: u64,
) -> Result<f64> {
    p.validate()?;
    let tau = p.l_bits / bandwidth;
    if !(tau > 0.0 && tau < p.t_c) || !(0.0..=1.0).contains(&p_s) || windows == 0 {
        return Err(Error::InvalidArgument(format!(
            "need 0 < L/B < T_c, p_s in [0, 1] and windows >= 1 (L/B = {tau}, p_s = {p_s})"
        )));
    }
    let n = p.n();
    let span = p.t_c - tau;
    let received: usize = (0..windows)
        .into_par_iter()
        .map(|w| {
            let mut rng = rng::stream(seed, w as u64);
            let mut starts: Vec<f64> = (0..n)
                .filter_map(|_| {
                    let sends = rng.random::<f64>() < p_s;
                    let t = rng.random::<f64>() * span;
                    sends.then_some(t)
                })
                .collect();
            starts.sort_by(f64::total_cmp);
            (0..starts.len())
                .filter(|&i| {
                    let clear_before = i == 0 || starts[i] - starts[i - 1] >= tau;
                    let clear_after = i + 1 == starts.len() || starts[i + 1] - starts[i] >= tau;
                    clear_before && clear_after
                })
                .count()
        })
        .sum();
    Ok(received as f64 / (windows * n) as f64)
}

pub const CSV_HEADER: &str =
    "scheme,n,n1,n2,angles,nu0,m,q_s,p_s,t_p_s,bandwidth_bps,energy_units,n_tx,n_ts";

fn aux_cell(r: &ResourceReport, key: &str) -> String {
    r.aux.get(key).map(|v| v.to_string()).unwrap_or_default()
}

/// One CSV row per report; scheme-specific columns stay empty where they do
/// not apply.
pub fn reports_csv(reports: &[ResourceReport], angles: &AngleSet) -> String {
    let mut s = String::from(CSV_HEADER);
    s.push('\n');
    for r in reports {
        let rl = r.scheme == Scheme::RL;
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scheme,
            r.n(),
            r.n1,
            r.n2,
            if rl { angles.to_string() } else { String::new() },
            aux_cell(r, "nu0"),
            aux_cell(r, "m"),
            aux_cell(r, "q_s"),
            aux_cell(r, "p_s"),
            r.t_p,
            r.bandwidth,
            r.energy,
            aux_cell(r, "n_tx"),
            aux_cell(r, "n_ts"),
        );
    }
    s
}

pub fn write_reports_csv(path: &Path, reports: &[ResourceReport], angles: &AngleSet) -> Result<()> {
    report::write_atomic(path, reports_csv(reports, angles).as_bytes())
}
