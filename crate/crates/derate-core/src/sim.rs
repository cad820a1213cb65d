//! Cycle-accurate two-valued simulation with optional single-bit upsets.
//!
//! Each cycle runs the same fixed sequence: record activity statistics,
//! apply stimulus assignments (inputs hold their value until reassigned),
//! evaluate the combinational cells in topological order, sample the primary
//! outputs, then clock every flip-flop. A [`Fault`] inverts the stored value
//! of one flip-flop right after the clock edge of its injection cycle, which
//! models a single-event upset flipping the hardened state.
//!
//! There is no event queue: the netlists in scope are small enough that a
//! full re-evaluation per cycle is both faster and easier to trust.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{CellKind, Driver, FfId, Netlist};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("stimulus line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("stimulus drives unknown net `{net}`")]
    UnknownStimulusNet { net: String },
    #[error("stimulus drives `{net}`, which is not a primary input")]
    NotAPrimaryInput { net: String },
    #[error("fault cycle {cycle} is outside the run of {total_cycles} cycles")]
    FaultCycleOutOfRange { cycle: u32, total_cycles: u32 },
    #[error("fault targets flip-flop index {index}, netlist has {count}")]
    UnknownFlipFlop { index: usize, count: usize },
    #[error("activity fractions need at least one simulated cycle")]
    ZeroCycles,
}

/// Input waveform plus run length.
///
/// ```text
/// cycles 16
/// active 2 13
/// @0 din=0 en=1
/// @5 din=1
/// ```
///
/// Primary inputs start at 0 and hold their last assigned value. The active
/// window marks the cycles in which injected faults are considered
/// meaningful for the workload; it defaults to the whole run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Stimulus {
    total_cycles: u32,
    active_start: u32,
    active_end: u32,
    assignments: Vec<(u32, String, bool)>,
}

impl Stimulus {
    pub fn new(
        total_cycles: u32,
        active: Option<(u32, u32)>,
        assignments: Vec<(u32, String, bool)>,
    ) -> Result<Stimulus, SimError> {
        let (active_start, active_end) = active.unwrap_or((0, total_cycles.saturating_sub(1)));
        let s = Stimulus {
            total_cycles,
            active_start,
            active_end,
            assignments,
        };
        s.validate().map(|()| s)
    }

    fn validate(&self) -> Result<(), SimError> {
        if self.total_cycles == 0 {
            return Err(SimError::Syntax {
                line: 0,
                reason: "cycle count must be at least 1".into(),
            });
        }
        if self.active_start > self.active_end || self.active_end >= self.total_cycles {
            return Err(SimError::Syntax {
                line: 0,
                reason: format!(
                    "active window {}..{} does not fit in {} cycles",
                    self.active_start, self.active_end, self.total_cycles
                ),
            });
        }
        for (cycle, _, _) in &self.assignments {
            if *cycle >= self.total_cycles {
                return Err(SimError::Syntax {
                    line: 0,
                    reason: format!("assignment at cycle {cycle} is out of range"),
                });
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Stimulus, SimError> {
        let mut total: Option<u32> = None;
        let mut active: Option<(u32, u32)> = None;
        let mut assignments = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            let syntax = |reason: String| SimError::Syntax { line, reason };
            match tokens[0] {
                "cycles" => {
                    if total.is_some() {
                        return Err(syntax("duplicate cycles line".into()));
                    }
                    if tokens.len() != 2 {
                        return Err(syntax("expected `cycles <count>`".into()));
                    }
                    let n: u32 = tokens[1]
                        .parse()
                        .map_err(|_| syntax(format!("bad cycle count `{}`", tokens[1])))?;
                    if n == 0 {
                        return Err(syntax("cycle count must be at least 1".into()));
                    }
                    total = Some(n);
                }
                "active" => {
                    if active.is_some() {
                        return Err(syntax("duplicate active line".into()));
                    }
                    if tokens.len() != 3 {
                        return Err(syntax("expected `active <first> <last>`".into()));
                    }
                    let a: u32 = tokens[1]
                        .parse()
                        .map_err(|_| syntax(format!("bad cycle `{}`", tokens[1])))?;
                    let b: u32 = tokens[2]
                        .parse()
                        .map_err(|_| syntax(format!("bad cycle `{}`", tokens[2])))?;
                    active = Some((a, b));
                }
                t if t.starts_with('@') => {
                    let cycle: u32 = t[1..]
                        .parse()
                        .map_err(|_| syntax(format!("bad cycle reference `{t}`")))?;
                    if tokens.len() < 2 {
                        return Err(syntax("expected at least one `net=value`".into()));
                    }
                    for &pair in &tokens[1..] {
                        let (net, value) = pair
                            .split_once('=')
                            .ok_or_else(|| syntax(format!("expected `net=value`, got `{pair}`")))?;
                        let bit = match value {
                            "0" => false,
                            "1" => true,
                            other => {
                                return Err(syntax(format!("value must be 0 or 1, got `{other}`")))
                            }
                        };
                        assignments.push((cycle, net.to_string(), bit));
                    }
                }
                other => return Err(syntax(format!("unknown directive `{other}`"))),
            }
        }
        let total = total.ok_or(SimError::Syntax {
            line: text.lines().count().max(1),
            reason: "missing cycles line".into(),
        })?;
        let stim = Stimulus::new(total, active.or(Some((0, total - 1))), assignments)?;
        if let Some((a, b)) = active {
            debug_assert_eq!((stim.active_start, stim.active_end), (a, b));
        }
        Ok(stim)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "cycles {}", self.total_cycles);
        let _ = writeln!(out, "active {} {}", self.active_start, self.active_end);
        let mut i = 0;
        while i < self.assignments.len() {
            let cycle = self.assignments[i].0;
            let mut j = i;
            while j < self.assignments.len() && self.assignments[j].0 == cycle {
                j += 1;
            }
            let pairs: Vec<String> = self.assignments[i..j]
                .iter()
                .map(|(_, net, v)| format!("{net}={}", u8::from(*v)))
                .collect();
            let _ = writeln!(out, "@{cycle} {}", pairs.join(" "));
            i = j;
        }
        out
    }

    pub fn total_cycles(&self) -> u32 {
        self.total_cycles
    }

    /// First and last cycle (inclusive) of the fault-injection window.
    pub fn active_window(&self) -> (u32, u32) {
        (self.active_start, self.active_end)
    }

    pub fn assignments(&self) -> &[(u32, String, bool)] {
        &self.assignments
    }
}

/// Invert the value stored in `ff` right after the clock edge of `cycle`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Fault {
    pub ff: FfId,
    pub cycle: u32,
}

/// Bit-packed primary-output samples, one row per cycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    cycles: u32,
    width: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl Trace {
    pub fn new(cycles: u32, width: usize) -> Trace {
        let words_per_row = width.div_ceil(64).max(1);
        Trace {
            cycles,
            width,
            words_per_row,
            bits: vec![0; words_per_row * cycles as usize],
        }
    }

    pub fn cycles(&self) -> u32 {
        self.cycles
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, cycle: u32, bit: usize) -> bool {
        debug_assert!(bit < self.width);
        let row = cycle as usize * self.words_per_row;
        self.bits[row + bit / 64] >> (bit % 64) & 1 == 1
    }

    pub(crate) fn set(&mut self, cycle: u32, bit: usize, value: bool) {
        let idx = cycle as usize * self.words_per_row + bit / 64;
        let mask = 1u64 << (bit % 64);
        if value {
            self.bits[idx] |= mask;
        } else {
            self.bits[idx] &= !mask;
        }
    }

    pub fn row(&self, cycle: u32) -> &[u64] {
        let start = cycle as usize * self.words_per_row;
        &self.bits[start..start + self.words_per_row]
    }

    /// Cycles at which the two traces disagree on any output bit.
    pub fn diff_cycles(&self, other: &Trace) -> Vec<u32> {
        assert_eq!(self.width, other.width);
        assert_eq!(self.cycles, other.cycles);
        (0..self.cycles)
            .filter(|&t| self.row(t) != other.row(t))
            .collect()
    }

    pub fn to_csv(&self, names: &[&str]) -> String {
        assert_eq!(names.len(), self.width);
        let mut out = String::with_capacity((self.width * 2 + 12) * self.cycles as usize);
        out.push_str("cycle");
        for name in names {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for t in 0..self.cycles {
            let _ = write!(out, "{t}");
            for bit in 0..self.width {
                out.push(',');
                out.push(if self.get(t, bit) { '1' } else { '0' });
            }
            out.push('\n');
        }
        out
    }
}

/// Per-flip-flop counters accumulated over one run.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActivityStats {
    total_cycles: u32,
    toggles: Vec<u32>,
    ones: Vec<u32>,
}

impl ActivityStats {
    pub fn total_cycles(&self) -> u32 {
        self.total_cycles
    }

    /// Number of clock edges at which the stored value changed.
    pub fn toggle_count(&self, ff: FfId) -> u32 {
        self.toggles[ff.index()]
    }

    /// Number of cycles the flip-flop spent at logic 1.
    pub fn ones(&self, ff: FfId) -> u32 {
        self.ones[ff.index()]
    }

    pub fn ff_count(&self) -> usize {
        self.toggles.len()
    }
}

/// Normalised activity of one flip-flop.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FfActivity {
    pub toggle_count: u32,
    pub time_at_0: f64,
    pub time_at_1: f64,
}

/// Turns raw counters into dwell-time fractions. `time_at_0 + time_at_1`
/// sums to exactly 1.0 because the zero side is defined as the complement.
pub fn activity_fractions(
    stats: &ActivityStats,
    total_cycles: u32,
) -> Result<Vec<FfActivity>, SimError> {
    if total_cycles == 0 {
        return Err(SimError::ZeroCycles);
    }
    Ok((0..stats.ff_count())
        .map(|i| {
            let time_at_1 = stats.ones[i] as f64 / total_cycles as f64;
            FfActivity {
                toggle_count: stats.toggles[i],
                time_at_0: 1.0 - time_at_1,
                time_at_1,
            }
        })
        .collect())
}

pub fn activity_csv(names: &[&str], rows: &[FfActivity]) -> String {
    assert_eq!(names.len(), rows.len());
    let mut out = String::from("ff,toggle_count,time_at_0,time_at_1\n");
    for (name, row) in names.iter().zip(rows) {
        let _ = writeln!(
            out,
            "{name},{},{},{}",
            row.toggle_count, row.time_at_0, row.time_at_1
        );
    }
    out
}

/// Result of one simulation run.
#[derive(Clone, Debug, PartialEq)]
pub struct SimRun {
    pub trace: Trace,
    pub stats: ActivityStats,
}

pub fn simulate(net: &Netlist, stim: &Stimulus, fault: Option<Fault>) -> Result<SimRun, SimError> {
    let total = stim.total_cycles();
    if let Some(f) = fault {
        if f.ff.index() >= net.ff_count() {
            return Err(SimError::UnknownFlipFlop {
                index: f.ff.index(),
                count: net.ff_count(),
            });
        }
        if f.cycle >= total {
            return Err(SimError::FaultCycleOutOfRange {
                cycle: f.cycle,
                total_cycles: total,
            });
        }
    }

    let mut per_cycle: Vec<Vec<(usize, bool)>> = vec![Vec::new(); total as usize];
    for (cycle, name, value) in stim.assignments() {
        let id = net
            .find_net(name)
            .ok_or_else(|| SimError::UnknownStimulusNet { net: name.clone() })?;
        if net.driver(id) != Driver::PrimaryInput {
            return Err(SimError::NotAPrimaryInput { net: name.clone() });
        }
        per_cycle[*cycle as usize].push((id.index(), *value));
    }

    let ff_count = net.ff_count();
    let d_nets: Vec<usize> = net.ff_ids().map(|f| net.ff_d(f).index()).collect();
    let q_nets: Vec<usize> = net.ff_ids().map(|f| net.ff_q(f).index()).collect();
    let po_nets: Vec<usize> = net.outputs().iter().map(|n| n.index()).collect();

    let mut vals = vec![false; net.net_count()];
    let mut states = vec![false; ff_count];
    let mut trace = Trace::new(total, po_nets.len());
    let mut toggles = vec![0u32; ff_count];
    let mut ones = vec![0u32; ff_count];

    for t in 0..total {
        for (i, &s) in states.iter().enumerate() {
            ones[i] += u32::from(s);
        }
        for &(idx, value) in &per_cycle[t as usize] {
            vals[idx] = value;
        }
        for (i, &q) in q_nets.iter().enumerate() {
            vals[q] = states[i];
        }
        for &cid in net.topo_order() {
            let cell = net.cell(cid);
            vals[cell.output().index()] = eval_cell(cell.kind(), cell.inputs(), &vals);
        }
        for (bit, &po) in po_nets.iter().enumerate() {
            trace.set(t, bit, vals[po]);
        }
        let flip = match fault {
            Some(f) if f.cycle == t => Some(f.ff.index()),
            _ => None,
        };
        for i in 0..ff_count {
            let mut next = vals[d_nets[i]];
            if flip == Some(i) {
                next = !next;
            }
            if t + 1 < total && next != states[i] {
                toggles[i] += 1;
            }
            states[i] = next;
        }
    }

    Ok(SimRun {
        trace,
        stats: ActivityStats {
            total_cycles: total,
            toggles,
            ones,
        },
    })
}

fn eval_cell(kind: CellKind, inputs: &[crate::netlist::NetId], vals: &[bool]) -> bool {
    let v = |i: usize| vals[inputs[i].index()];
    match kind {
        CellKind::Buf => v(0),
        CellKind::Not => !v(0),
        CellKind::And2 => v(0) && v(1),
        CellKind::And3 => v(0) && v(1) && v(2),
        CellKind::Or2 => v(0) || v(1),
        CellKind::Or3 => v(0) || v(1) || v(2),
        CellKind::Nand2 => !(v(0) && v(1)),
        CellKind::Nor2 => !(v(0) || v(1)),
        CellKind::Xor2 => v(0) ^ v(1),
        CellKind::Xnor2 => !(v(0) ^ v(1)),
        // inputs are `sel a b`: a when sel=0, b when sel=1
        CellKind::Mux2 => {
            if v(0) {
                v(2)
            } else {
                v(1)
            }
        }
        CellKind::Dff => unreachable!("flip-flops are not in the combinational order"),
    }
}
