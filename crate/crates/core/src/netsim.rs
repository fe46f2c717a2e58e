//! Slot-level TDMA gathering of Radon-like projections on an odd grid with
//! the fusion center (FC) in the middle.
//!
//! Every schedule is built quadrant by quadrant. Inside a quadrant each path
//! becomes a chain of single-hop links that occupies consecutive slots; a
//! packer places chains as early as the release time, the inter-path delay
//! `nu0` and the interference rules allow:
//!
//! - a node takes part in at most one link per slot (it never transmits and
//!   receives at once);
//! - concurrent transmitters keep a minimum Euclidean separation.
//!
//! Axis projections (`0`, `pi/2`) send each half-line to the central column
//! (or row) and relay it along that column to the FC. Diagonal projections
//! split into per-quadrant segments. In the two quadrants crossed by the
//! lines' own direction the segment runs into a central arm and then along it.
//! In the other two each segment is gathered from both ends into its cell
//! nearest the FC, which forwards the sum diagonally and then along an arm.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::report;
use crate::sensing::{Angle, AngleSet, RadonMatrix};

pub const DEFAULT_NU0: usize = 2;

/// Largest grid side for which per-slot traces are printed.
pub const TRACE_MAX_SIDE: usize = 9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridNetwork {
    n1: usize,
    n2: usize,
    pub spacing_d: f64,
    pub gain_g: f64,
    /// Charge diagonal hops for their `sqrt(2) d` length instead of `d`.
    pub charge_diagonal_distance: bool,
}

impl GridNetwork {
    pub fn new(n1: usize, n2: usize) -> Result<Self> {
        if n1 % 2 == 0 || n2 % 2 == 0 {
            return Err(Error::EvenGrid { n1, n2 });
        }
        Ok(Self {
            n1,
            n2,
            spacing_d: 1.0,
            gain_g: 1.0,
            charge_diagonal_distance: false,
        })
    }

    pub fn n1(&self) -> usize {
        self.n1
    }

    pub fn n2(&self) -> usize {
        self.n2
    }

    pub fn n(&self) -> usize {
        self.n1 * self.n2
    }

    /// FC position `(N1~, N2~)`.
    pub fn fc(&self) -> (usize, usize) {
        (self.n1 / 2, self.n2 / 2)
    }

    pub fn fc_index(&self) -> usize {
        let (r, c) = self.fc();
        r * self.n2 + c
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkKind {
    /// The transmitter adds its own weighted reading to the packet.
    Accumulate,
    /// The transmitter forwards the packet unchanged.
    Relay,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Link {
    pub tx: (usize, usize),
    pub rx: (usize, usize),
    /// Path index within the schedule's angle.
    pub proj: usize,
    pub kind: LinkKind,
}

impl Link {
    fn is_diagonal(&self) -> bool {
        self.tx.0 != self.rx.0 && self.tx.1 != self.rx.1
    }
}

/// Slot-indexed link activations gathering one angle's projections.
#[derive(Debug, Clone, PartialEq)]
pub struct GatherSchedule {
    pub angle: Angle,
    pub nu0: usize,
    pub n1: usize,
    pub n2: usize,
    /// Minimum distance (in grid spacings) between concurrent transmitters.
    pub min_separation: f64,
    pub slots: Vec<Vec<Link>>,
    /// First slot of each quadrant, in processing order.
    pub quadrant_starts: Vec<usize>,
}

impl GatherSchedule {
    pub fn n_tx(&self) -> usize {
        self.slots.iter().map(Vec::len).sum()
    }

    pub fn n_ts(&self) -> usize {
        self.slots.len()
    }

    pub fn links(&self) -> impl Iterator<Item = (usize, &Link)> {
        self.slots
            .iter()
            .enumerate()
            .flat_map(|(t, s)| s.iter().map(move |l| (t, l)))
    }

    /// Transmissions per node, split into accumulate and relay counts.
    pub fn tx_counts(&self) -> (Vec<usize>, Vec<usize>) {
        let mut acc = vec![0; self.n1 * self.n2];
        let mut rel = vec![0; self.n1 * self.n2];
        for (_, l) in self.links() {
            let i = l.tx.0 * self.n2 + l.tx.1;
            match l.kind {
                LinkKind::Accumulate => acc[i] += 1,
                LinkKind::Relay => rel[i] += 1,
            }
        }
        (acc, rel)
    }

    /// Every rule violation found; empty when the schedule is valid.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let min2 = self.min_separation * self.min_separation - 1e-9;
        for (t, slot) in self.slots.iter().enumerate() {
            let mut nodes: HashMap<(usize, usize), usize> = HashMap::new();
            for l in slot {
                if l.tx.0.abs_diff(l.rx.0) > 1 || l.tx.1.abs_diff(l.rx.1) > 1 || l.tx == l.rx {
                    out.push(format!("slot {t}: {l:?} is not a single hop"));
                }
                *nodes.entry(l.tx).or_default() += 1;
                *nodes.entry(l.rx).or_default() += 1;
            }
            for (node, n) in nodes {
                if n > 1 {
                    out.push(format!("slot {t}: node {node:?} used by {n} links"));
                }
            }
            for (i, a) in slot.iter().enumerate() {
                for b in &slot[i + 1..] {
                    if dist2(a.tx, b.tx) < min2 {
                        out.push(format!(
                            "slot {t}: transmitters {:?} and {:?} closer than {}",
                            a.tx, b.tx, self.min_separation
                        ));
                    }
                }
            }
        }
        out
    }

    /// Per-slot activity listing, available for grids up to 9x9.
    pub fn trace(&self) -> Result<String> {
        if self.n1 > TRACE_MAX_SIDE || self.n2 > TRACE_MAX_SIDE {
            return Err(Error::InvalidArgument(format!(
                "trace is limited to {TRACE_MAX_SIDE}x{TRACE_MAX_SIDE} grids"
            )));
        }
        let mut s = String::new();
        let _ = writeln!(s, "angle {} on {}x{}, nu0 = {}", self.angle, self.n1, self.n2, self.nu0);
        for (t, slot) in self.slots.iter().enumerate() {
            if let Some(q) = self.quadrant_starts.iter().position(|&q| q == t) {
                let _ = writeln!(s, "-- quadrant {}", q + 1);
            }
            let items: Vec<String> = slot
                .iter()
                .map(|l| {
                    let k = match l.kind {
                        LinkKind::Accumulate => "+",
                        LinkKind::Relay => "=",
                    };
                    format!("({},{})->({},{}) p{}{k}", l.tx.0, l.tx.1, l.rx.0, l.rx.1, l.proj)
                })
                .collect();
            let _ = writeln!(s, "t={t:>3}: {}", items.join("  "));
        }
        Ok(s)
    }
}

fn dist2(a: (usize, usize), b: (usize, usize)) -> f64 {
    let dr = a.0 as f64 - b.0 as f64;
    let dc = a.1 as f64 - b.1 as f64;
    dr * dr + dc * dc
}

/// Places hop chains into slots.
struct Packer {
    nu0: usize,
    min2: f64,
    slots: Vec<Vec<Link>>,
    lane_last: HashMap<usize, usize>,
}

impl Packer {
    fn new(nu0: usize, min_separation: f64) -> Self {
        Self {
            nu0,
            min2: min_separation * min_separation - 1e-9,
            slots: Vec::new(),
            lane_last: HashMap::new(),
        }
    }

    fn fits(&self, link: &Link, t: usize) -> bool {
        let Some(slot) = self.slots.get(t) else {
            return true;
        };
        slot.iter().all(|o| {
            o.tx != link.tx
                && o.tx != link.rx
                && o.rx != link.tx
                && o.rx != link.rx
                && dist2(o.tx, link.tx) >= self.min2
        })
    }

    /// Places `hops` in consecutive slots starting no earlier than `release`
    /// and `nu0` after the previous chain of the same lane. Returns the slot
    /// after the last hop.
    fn place(&mut self, hops: &[Link], release: usize, lane: usize) -> usize {
        if hops.is_empty() {
            return release;
        }
        let mut start = release;
        if let Some(&last) = self.lane_last.get(&lane) {
            start = start.max(last + self.nu0);
        }
        while !hops.iter().enumerate().all(|(k, l)| self.fits(l, start + k)) {
            start += 1;
        }
        let end = start + hops.len();
        if self.slots.len() < end {
            self.slots.resize_with(end, Vec::new);
        }
        for (k, l) in hops.iter().enumerate() {
            self.slots[start + k].push(*l);
        }
        self.lane_last.insert(lane, start);
        end
    }
}

/// Relative offsets from the FC, `(a, b) = (r - N1~, c - N2~)`.
#[derive(Clone, Copy)]
struct Frame {
    c1: i64,
    c2: i64,
}

impl Frame {
    fn cell(&self, a: i64, b: i64) -> (usize, usize) {
        ((a + self.c1) as usize, (b + self.c2) as usize)
    }
}

fn chain(frame: Frame, cells: &[(i64, i64)], proj: usize, own_hops: usize) -> Vec<Link> {
    // The first `own_hops` transmitters accumulate, the rest relay.
    cells
        .windows(2)
        .enumerate()
        .map(|(k, w)| Link {
            tx: frame.cell(w[0].0, w[0].1),
            rx: frame.cell(w[1].0, w[1].1),
            proj,
            kind: if k < own_hops {
                LinkKind::Accumulate
            } else {
                LinkKind::Relay
            },
        })
        .collect()
}

fn min_separation(angle: Angle, nu0: usize) -> f64 {
    let nu = nu0 as f64;
    if angle.is_diagonal() {
        nu
    } else {
        (nu * nu + 1.0).sqrt()
    }
}

/// Row (`pi/2`) or column (`0`) projections.
pub fn schedule_axis(net: &GridNetwork, angle: Angle, nu0: usize) -> Result<GatherSchedule> {
    check_nu0(nu0)?;
    match angle {
        Angle::HalfPi => Ok(rows_schedule(net.n1, net.n2, nu0)),
        Angle::Zero => {
            let t = rows_schedule(net.n2, net.n1, nu0);
            Ok(transpose(t, Angle::Zero))
        }
        other => Err(Error::UnsupportedAngle(format!(
            "{other} is not an axis angle"
        ))),
    }
}

fn check_nu0(nu0: usize) -> Result<()> {
    if nu0 == 0 {
        return Err(Error::InvalidArgument("nu0 must be >= 1".into()));
    }
    Ok(())
}

fn rows_schedule(n1: usize, n2: usize, nu0: usize) -> GatherSchedule {
    let frame = Frame {
        c1: (n1 / 2) as i64,
        c2: (n2 / 2) as i64,
    };
    let (h1, h2) = (frame.c1, frame.c2);
    let sep = min_separation(Angle::HalfPi, nu0);
    let mut slots = Vec::new();
    let mut quadrant_starts = Vec::new();
    // (vertical side, horizontal side): upper-left, lower-left, upper-right,
    // lower-right. Upper quadrants own the FC row.
    for (vs, hs) in [(-1i64, -1i64), (1, -1), (-1, 1), (1, 1)] {
        let mut packer = Packer::new(nu0, sep);
        let first = if vs < 0 { 0 } else { 1 };
        for h in first..=h1 {
            let a = vs * h;
            let mut cells: Vec<(i64, i64)> = (1..=h2).rev().map(|j| (a, hs * j)).collect();
            cells.push((a, 0));
            for step in 1..=h {
                cells.push((a - vs * step, 0));
            }
            // Left halves carry the central-column node's own reading.
            let own = if hs < 0 && h > 0 { h2 + 1 } else { h2 };
            let hops = chain(frame, &cells, (a + h1) as usize, own as usize);
            packer.place(&hops, 0, 0);
        }
        quadrant_starts.push(slots.len());
        slots.extend(packer.slots);
    }
    GatherSchedule {
        angle: Angle::HalfPi,
        nu0,
        n1,
        n2,
        min_separation: sep,
        slots,
        quadrant_starts,
    }
}

fn transpose(mut s: GatherSchedule, angle: Angle) -> GatherSchedule {
    for slot in &mut s.slots {
        for l in slot {
            l.tx = (l.tx.1, l.tx.0);
            l.rx = (l.rx.1, l.rx.0);
        }
    }
    std::mem::swap(&mut s.n1, &mut s.n2);
    s.angle = angle;
    s
}

/// Diagonal (`pi/4` or `-pi/4`) projections.
pub fn schedule_diagonal(net: &GridNetwork, angle: Angle, nu0: usize) -> Result<GatherSchedule> {
    check_nu0(nu0)?;
    match angle {
        Angle::QuarterPi => Ok(diagonal_schedule(net.n1, net.n2, nu0)),
        Angle::MinusQuarterPi => {
            let mut s = diagonal_schedule(net.n1, net.n2, nu0);
            // Mirroring columns maps r - c lines onto r + c lines and keeps
            // the path indices.
            let n2 = net.n2;
            for slot in &mut s.slots {
                for l in slot {
                    l.tx.1 = n2 - 1 - l.tx.1;
                    l.rx.1 = n2 - 1 - l.rx.1;
                }
            }
            s.angle = Angle::MinusQuarterPi;
            Ok(s)
        }
        other => Err(Error::UnsupportedAngle(format!(
            "{other} is not a diagonal angle"
        ))),
    }
}

fn diagonal_schedule(n1: usize, n2: usize, nu0: usize) -> GatherSchedule {
    let frame = Frame {
        c1: (n1 / 2) as i64,
        c2: (n2 / 2) as i64,
    };
    let sep = min_separation(Angle::QuarterPi, nu0);
    let proj = |a: i64, b: i64| Angle::QuarterPi.path_of(
        (a + frame.c1) as usize,
        (b + frame.c2) as usize,
        n1,
        n2,
    );
    let mut slots = Vec::new();
    let mut quadrant_starts = Vec::new();

    // Quadrants whose lines run toward the FC: upper-left, then lower-right.
    for s in [1i64, -1] {
        let mut packer = Packer::new(nu0, sep);
        let (e1, e2) = (frame.c1, frame.c2);
        // Lines a - b = d in the mirrored frame (a, b) -> (s a, s b) <= 0.
        let mut p1 = Vec::new();
        let mut p2 = Vec::new();
        for d in -e1..=e2 {
            // Inner end on an arm.
            let end = if d >= 0 { (0, -d) } else { (d, 0) };
            let back = (end.0 + e1).min(end.1 + e2);
            let start = (end.0 - back, end.1 - back);
            let mut cells: Vec<(i64, i64)> = (0..=back).map(|k| (start.0 + k, start.1 + k)).collect();
            // Along the arm toward the FC.
            let (ea, eb) = end;
            for k in 1..=(-ea - eb) {
                cells.push((if ea < 0 { ea + k } else { 0 }, if eb < 0 { eb + k } else { 0 }));
            }
            let cells: Vec<(i64, i64)> = cells.into_iter().map(|(a, b)| (s * a, s * b)).collect();
            let own = if end == (0, 0) { back } else { back + 1 };
            let p = proj(cells[0].0, cells[0].1);
            let hops = chain(frame, &cells, p, own as usize);
            if start.0 == -e1 {
                p1.push((d.abs(), hops));
            } else {
                p2.push((d.abs(), hops));
            }
        }
        p1.sort_by_key(|x| x.0);
        p2.sort_by_key(|x| x.0);
        for (_, hops) in p1.into_iter().chain(p2) {
            packer.place(&hops, 0, 0);
        }
        quadrant_starts.push(slots.len());
        slots.extend(packer.slots);
    }

    // Quadrants crossed transversally: upper-right, then lower-left. Only
    // interior cells belong to them.
    for s in [1i64, -1] {
        let mut packer = Packer::new(nu0, sep);
        let (e1, e2) = (frame.c1, frame.c2);
        // In the frame (u, v) = (-s a, s b) the cells satisfy u, v >= 1 and a
        // pi/4 line has u + v fixed.
        let to_ab = |u: i64, v: i64| (-s * u, s * v);
        for sum in 2..=(e1 + e2) {
            let cells: Vec<(i64, i64)> = ((sum - e2).max(1)..=(sum - 1).min(e1))
                .rev()
                .map(|u| (u, sum - u))
                .collect();
            if cells.is_empty() {
                continue;
            }
            // Exit cell: fewest hops to the FC, ties to the first listed.
            let (mid, _) = cells
                .iter()
                .enumerate()
                .min_by_key(|(i, c)| (c.0.max(c.1), *i))
                .expect("non-empty");
            let p = {
                let (a, b) = to_ab(cells[0].0, cells[0].1);
                proj(a, b)
            };
            let conv = |v: &[(i64, i64)]| -> Vec<(i64, i64)> { v.iter().map(|&(u, w)| to_ab(u, w)).collect() };
            let first_half: Vec<(i64, i64)> = cells[..=mid].to_vec();
            let mut second_half: Vec<(i64, i64)> = cells[mid..].to_vec();
            second_half.reverse();
            let ha = chain(frame, &conv(&first_half), p, first_half.len() - 1);
            let hb = chain(frame, &conv(&second_half), p, second_half.len() - 1);
            let (mu, mv) = cells[mid];
            let mut route = vec![(mu, mv)];
            let (mut u, mut v) = (mu, mv);
            while u > 0 || v > 0 {
                if u > 0 && v > 0 {
                    u -= 1;
                    v -= 1;
                } else if u > 0 {
                    u -= 1;
                } else {
                    v -= 1;
                }
                route.push((u, v));
            }
            let hr = chain(frame, &conv(&route), p, 1);
            let end_a = packer.place(&ha, 0, 0);
            let end_b = packer.place(&hb, 0, 1);
            packer.place(&hr, end_a.max(end_b), 2);
        }
        quadrant_starts.push(slots.len());
        slots.extend(packer.slots);
    }

    GatherSchedule {
        angle: Angle::QuarterPi,
        nu0,
        n1,
        n2,
        min_separation: sep,
        slots,
        quadrant_starts,
    }
}

/// Schedules for every angle of the set, in set order.
pub fn build_schedules(net: &GridNetwork, angles: &AngleSet, nu0: usize) -> Result<Vec<GatherSchedule>> {
    angles
        .angles()
        .iter()
        .map(|&a| {
            if a.is_diagonal() {
                schedule_diagonal(net, a, nu0)
            } else {
                schedule_axis(net, a, nu0)
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct GatherResult {
    pub n_tx: usize,
    pub n_ts: usize,
    /// Projections as accumulated at the FC, in matrix row order.
    pub projections: Vec<f64>,
    /// Energy spent by each node, indexed by cell.
    pub per_node_energy: Vec<f64>,
    /// In units of `gain_g * spacing_d^2 * t_p` per hop.
    pub total_energy: f64,
}

/// Runs the schedules slot by slot: each node adds its weighted reading to the
/// partial sum it holds for a projection and forwards it; the FC adds its own
/// reading to its line at the end.
pub fn simulate_gather(
    net: &GridNetwork,
    schedules: &[GatherSchedule],
    matrix: &RadonMatrix,
    z: &[f64],
    t_p: f64,
) -> Result<GatherResult> {
    if !(t_p > 0.0) {
        return Err(Error::InvalidArgument(format!("t_p must be positive, got {t_p}")));
    }
    if matrix.n1() != net.n1() || matrix.n2() != net.n2() {
        return Err(Error::ScheduleMismatch(format!(
            "matrix grid {}x{} differs from network {}x{}",
            matrix.n1(),
            matrix.n2(),
            net.n1(),
            net.n2()
        )));
    }
    let angles: Vec<Angle> = schedules.iter().map(|s| s.angle).collect();
    if angles != matrix.angles().angles() {
        return Err(Error::ScheduleMismatch(format!(
            "schedule angles {angles:?} differ from matrix angles {}",
            matrix.angles()
        )));
    }
    if z.len() != net.n() {
        return Err(Error::DimensionMismatch {
            expected: net.n(),
            actual: z.len(),
        });
    }
    let n2 = net.n2();
    let fc = net.fc();
    let fc_i = net.fc_index();
    let hop_energy = net.gain_g * net.spacing_d * net.spacing_d * t_p;
    let mut projections = vec![0.0; matrix.m_rows()];
    let mut per_node_energy = vec![0.0; net.n()];
    let mut n_tx = 0;
    let mut n_ts = 0;

    for (p, sched) in schedules.iter().enumerate() {
        let offset = matrix.segment(p).start;
        let mut buffers: HashMap<(usize, usize), f64> = HashMap::new();
        let mut own_sent = vec![0usize; net.n()];
        for slot in &sched.slots {
            let mut outgoing = Vec::with_capacity(slot.len());
            for l in slot {
                let tx = l.tx.0 * n2 + l.tx.1;
                let held = buffers.remove(&(tx, l.proj));
                let value = match l.kind {
                    LinkKind::Accumulate => {
                        let (row, coef) = matrix.entry(tx, p);
                        if row != offset + l.proj {
                            return Err(Error::ScheduleMismatch(format!(
                                "node {:?} accumulates into path {} but lies on path {}",
                                l.tx,
                                l.proj,
                                row - offset
                            )));
                        }
                        own_sent[tx] += 1;
                        held.unwrap_or(0.0) + coef * z[tx]
                    }
                    LinkKind::Relay => held.ok_or_else(|| {
                        Error::ScheduleMismatch(format!(
                            "node {:?} relays path {} without holding it",
                            l.tx, l.proj
                        ))
                    })?,
                };
                let factor = if net.charge_diagonal_distance && l.is_diagonal() {
                    2.0
                } else {
                    1.0
                };
                per_node_energy[tx] += factor * hop_energy;
                outgoing.push((l.rx, l.proj, value));
            }
            for (rx, proj, value) in outgoing {
                if rx == fc {
                    projections[offset + proj] += value;
                } else {
                    *buffers.entry((rx.0 * n2 + rx.1, proj)).or_default() += value;
                }
            }
        }
        if let Some(((cell, proj), _)) = buffers.iter().next() {
            return Err(Error::ScheduleMismatch(format!(
                "partial sum for path {proj} stranded at cell {cell}"
            )));
        }
        for (cell, &sent) in own_sent.iter().enumerate() {
            if cell != fc_i && sent != 1 {
                return Err(Error::ScheduleMismatch(format!(
                    "cell {cell} contributed {sent} times to angle {}",
                    sched.angle
                )));
            }
        }
        let (row, coef) = matrix.entry(fc_i, p);
        projections[row] += coef * z[fc_i];
        n_tx += sched.n_tx();
        n_ts += sched.n_ts();
    }
    let total_energy = per_node_energy.iter().sum();
    Ok(GatherResult {
        n_tx,
        n_ts,
        projections,
        per_node_energy,
        total_energy,
    })
}

#[derive(Serialize)]
struct SlotRecord {
    slot: usize,
    links: Vec<LinkRecord>,
}

#[derive(Serialize)]
struct LinkRecord {
    tx: [usize; 2],
    rx: [usize; 2],
    proj_id: usize,
}

/// One JSON line per slot. Angles run back to back and `proj_id` is the
/// measurement row.
pub fn write_schedule_jsonl(path: &Path, schedules: &[GatherSchedule]) -> Result<()> {
    let mut records = Vec::new();
    let mut slot0 = 0;
    let mut row0 = 0;
    for s in schedules {
        for (t, slot) in s.slots.iter().enumerate() {
            records.push(SlotRecord {
                slot: slot0 + t,
                links: slot
                    .iter()
                    .map(|l| LinkRecord {
                        tx: [l.tx.0, l.tx.1],
                        rx: [l.rx.0, l.rx.1],
                        proj_id: row0 + l.proj,
                    })
                    .collect(),
            });
        }
        slot0 += s.n_ts();
        row0 += s.angle.path_count(s.n1, s.n2);
    }
    report::write_jsonl(path, &records)
}

fn check_odd(n1: usize, n2: usize) -> Result<()> {
    if n1 % 2 == 0 || n2 % 2 == 0 {
        return Err(Error::EvenGrid { n1, n2 });
    }
    Ok(())
}

/// Closed-form transmission count summed over the angle set.
pub fn n_tx_formula(n1: usize, n2: usize, angles: &AngleSet) -> Result<u64> {
    check_odd(n1, n2)?;
    let (n1, n2) = (n1 as u64, n2 as u64);
    Ok(angles
        .angles()
        .iter()
        .map(|a| match a {
            Angle::HalfPi => (n1 - 1) / 2 * (2 * n2 + n1 + 3),
            Angle::Zero => (n2 - 1) / 2 * (2 * n1 + n2 + 3),
            Angle::QuarterPi | Angle::MinusQuarterPi => (n1 + n2) * (n1.max(n2) - 1),
        })
        .sum())
}

/// Closed-form slot count summed over the angle set.
pub fn n_ts_formula(n1: usize, n2: usize, angles: &AngleSet, nu0: usize) -> Result<u64> {
    check_odd(n1, n2)?;
    let (h1, h2) = ((n1 / 2) as u64, (n2 / 2) as u64);
    let (n1, n2, nu) = (n1 as u64, n2 as u64, nu0 as u64);
    Ok(angles
        .angles()
        .iter()
        .map(|a| match a {
            Angle::HalfPi => 4 * (h2 * nu + h1 + h2),
            Angle::Zero => 4 * (h1 * nu + h2 + h1),
            Angle::QuarterPi | Angle::MinusQuarterPi => 2 * ((n1 + n2) * nu + n1.max(n2) - 1),
        })
        .sum())
}

/// Asymptotic constants with `n_tx ~ gamma N` and `n_ts ~ delta sqrt(N)` for
/// the sets `{0, pi/2}` and `{0, pi/2, +-pi/4}`.
pub fn gamma_delta(angles: &AngleSet, alpha1: f64, alpha2: f64, nu0: usize) -> Result<(f64, f64)> {
    let has_axes = angles.contains(Angle::Zero) && angles.contains(Angle::HalfPi);
    let diagonals = angles.angles().iter().filter(|a| a.is_diagonal()).count();
    let nu = nu0 as f64;
    let g2 = 2.0 * alpha1 * alpha2 + (alpha1 * alpha1 + alpha2 * alpha2) / 2.0;
    let d2 = (alpha1 + alpha2) * (4.0 + 2.0 * nu);
    let amax = alpha1.max(alpha2);
    match (has_axes, angles.len(), diagonals) {
        (true, 2, 0) => Ok((g2, d2)),
        (true, 3, 1) => Ok((
            g2 + (alpha1 + alpha2) * amax,
            (alpha1 + alpha2) * (4.0 + 4.0 * nu) + amax,
        )),
        _ => Err(Error::UnsupportedAngle(format!(
            "no closed-form constants for angle set {angles}"
        ))),
    }
}
