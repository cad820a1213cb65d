//! Per-flip-flop features for de-rating prediction.
//!
//! Structural features come from the flip-flop's combinational neighbourhood
//! (fan-in and fan-out cones, bus membership by name, sequential feedback
//! and distances to the primary inputs and outputs). Dynamic features come
//! from the golden run's activity counters. Everything is cheap relative to
//! a fault campaign: one cone traversal per flip-flop and a handful of
//! breadth-first searches over the flip-flop graph.
//!
//! A [`FeatureVector`] keeps the descriptive boolean fields, but the numeric
//! encoding used for training has exactly [`FEATURE_NAMES`] columns: the
//! `from_pi`, `to_po` and `has_feedback` flags are implied by their
//! companion values (`pi_proximity` and `po_proximity` are
//! [`PROXIMITY_UNREACHABLE`] exactly when the flag is false, and
//! `feedback_depth` is 0 exactly when there is no feedback loop), so they
//! are not repeated as columns.

use std::fmt::Write as _;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::netlist::{FfId, Netlist};
use crate::sim::FfActivity;

/// Distance reported when no primary input (or output) can reach the
/// flip-flop through any sequential path.
pub const PROXIMITY_UNREACHABLE: u32 = u32::MAX;

/// Column names of the numeric feature matrix, in order.
pub const FEATURE_NAMES: [&str; 17] = [
    "ff_fanin",
    "ff_fanout",
    "conn_from_ffs",
    "conn_to_ffs",
    "pi_proximity",
    "po_proximity",
    "in_bus",
    "bus_position",
    "bus_length",
    "feedback_depth",
    "drive_strength",
    "comb_fanin",
    "comb_fanout",
    "comb_depth",
    "toggle_count",
    "time_at_0",
    "time_at_1",
];

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("activity has {got} entries, netlist has {expected} flip-flops")]
    ActivityMismatch { expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    /// Distinct sources (flip-flops and primary inputs) feeding the D cone.
    pub ff_fanin: u32,
    /// Distinct sinks (flip-flops and primary outputs) reached from Q.
    pub ff_fanout: u32,
    pub conn_from_ffs: u32,
    pub conn_to_ffs: u32,
    pub from_pi: bool,
    /// Sequential hops to the nearest flip-flop whose cone sees a primary
    /// input; 0 when this flip-flop's own cone does.
    pub pi_proximity: u32,
    pub to_po: bool,
    pub po_proximity: u32,
    /// True when at least one other flip-flop shares the `name[index]` base.
    pub in_bus: bool,
    pub bus_position: u32,
    pub bus_length: u32,
    pub has_feedback: bool,
    /// Length of the shortest sequential cycle through this flip-flop,
    /// 1 for a self-loop, 0 when none exists.
    pub feedback_depth: u32,
    pub drive_strength: u32,
    /// Combinational cells in the fan-in cone.
    pub comb_fanin: u32,
    /// Combinational cells in the fan-out cone.
    pub comb_fanout: u32,
    /// Logic levels between the D pin and the nearest sequential or input
    /// boundary, along the deepest path.
    pub comb_depth: u32,
    pub toggle_count: u32,
    pub time_at_0: f64,
    pub time_at_1: f64,
}

impl FeatureVector {
    pub fn to_row(&self) -> [f64; 17] {
        [
            f64::from(self.ff_fanin),
            f64::from(self.ff_fanout),
            f64::from(self.conn_from_ffs),
            f64::from(self.conn_to_ffs),
            f64::from(self.pi_proximity),
            f64::from(self.po_proximity),
            f64::from(u8::from(self.in_bus)),
            f64::from(self.bus_position),
            f64::from(self.bus_length),
            f64::from(self.feedback_depth),
            f64::from(self.drive_strength),
            f64::from(self.comb_fanin),
            f64::from(self.comb_fanout),
            f64::from(self.comb_depth),
            f64::from(self.toggle_count),
            self.time_at_0,
            self.time_at_1,
        ]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    pub ff_names: Vec<String>,
    pub vectors: Vec<FeatureVector>,
    /// Extraction wall time; informational only, never serialized into the
    /// feature table.
    pub elapsed_s: f64,
}

impl FeatureSet {
    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.vectors.iter().map(|v| v.to_row().to_vec()).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("ff");
        for name in FEATURE_NAMES {
            out.push(',');
            out.push_str(name);
        }
        out.push('\n');
        for (name, vec) in self.ff_names.iter().zip(&self.vectors) {
            out.push_str(name);
            for value in vec.to_row() {
                let _ = write!(out, ",{value}");
            }
            out.push('\n');
        }
        out
    }
}

/// Splits `base[index]` names; anything else is not a bus member.
pub fn parse_bus_name(name: &str) -> Option<(&str, u32)> {
    let open = name.find('[')?;
    let rest = &name[open + 1..];
    let close = rest.find(']')?;
    if close + 1 != rest.len() || open == 0 {
        return None;
    }
    let index: u32 = rest[..close].parse().ok()?;
    Some((&name[..open], index))
}

pub fn extract_features(
    net: &Netlist,
    activity: &[FfActivity],
) -> Result<FeatureSet, FeatureError> {
    let started = Instant::now();
    let n = net.ff_count();
    if activity.len() != n {
        return Err(FeatureError::ActivityMismatch {
            expected: n,
            got: activity.len(),
        });
    }

    let fanins: Vec<_> = net.ff_ids().map(|f| net.fanin_cone(f)).collect();
    let fanouts: Vec<_> = net.ff_ids().map(|f| net.fanout_cone(f)).collect();

    let succ: Vec<&[FfId]> = fanouts.iter().map(|c| c.sink_ffs.as_slice()).collect();
    let pred: Vec<&[FfId]> = fanins.iter().map(|c| c.source_ffs.as_slice()).collect();

    let pi_sources: Vec<usize> = (0..n)
        .filter(|&i| !fanins[i].source_inputs.is_empty())
        .collect();
    let po_sources: Vec<usize> = (0..n)
        .filter(|&i| !fanouts[i].sink_outputs.is_empty())
        .collect();
    let pi_proximity = multi_source_bfs(n, &pi_sources, &succ);
    let po_proximity = multi_source_bfs(n, &po_sources, &pred);

    let bus = bus_membership(net);
    let depth = net_depths(net);

    let vectors = net
        .ff_ids()
        .map(|ff| {
            let i = ff.index();
            let fi = &fanins[i];
            let fo = &fanouts[i];
            let feedback_depth = cycle_length(i, &succ);
            let (in_bus, bus_position, bus_length) = bus[i];
            FeatureVector {
                ff_fanin: (fi.source_ffs.len() + fi.source_inputs.len()) as u32,
                ff_fanout: (fo.sink_ffs.len() + fo.sink_outputs.len()) as u32,
                conn_from_ffs: fi.source_ffs.len() as u32,
                conn_to_ffs: fo.sink_ffs.len() as u32,
                from_pi: pi_proximity[i] == 0,
                pi_proximity: pi_proximity[i],
                to_po: po_proximity[i] == 0,
                po_proximity: po_proximity[i],
                in_bus,
                bus_position,
                bus_length,
                has_feedback: feedback_depth > 0,
                feedback_depth,
                drive_strength: net.ff_cell(ff).drive_strength(),
                comb_fanin: fi.cells.len() as u32,
                comb_fanout: fo.cells.len() as u32,
                comb_depth: depth[net.ff_d(ff).index()],
                toggle_count: activity[i].toggle_count,
                time_at_0: activity[i].time_at_0,
                time_at_1: activity[i].time_at_1,
            }
        })
        .collect();

    Ok(FeatureSet {
        ff_names: net.ff_ids().map(|f| net.ff_name(f).to_string()).collect(),
        vectors,
        elapsed_s: started.elapsed().as_secs_f64(),
    })
}

fn multi_source_bfs(n: usize, sources: &[usize], edges: &[&[FfId]]) -> Vec<u32> {
    let mut dist = vec![PROXIMITY_UNREACHABLE; n];
    let mut queue = std::collections::VecDeque::new();
    for &s in sources {
        dist[s] = 0;
        queue.push_back(s);
    }
    while let Some(u) = queue.pop_front() {
        for &v in edges[u] {
            if dist[v.index()] == PROXIMITY_UNREACHABLE {
                dist[v.index()] = dist[u] + 1;
                queue.push_back(v.index());
            }
        }
    }
    dist
}

/// Shortest cycle through flip-flop `start`, 0 when it is not on any cycle.
fn cycle_length(start: usize, succ: &[&[FfId]]) -> u32 {
    let mut dist = vec![u32::MAX; succ.len()];
    dist[start] = 0;
    let mut queue = std::collections::VecDeque::from([start]);
    while let Some(u) = queue.pop_front() {
        for &v in succ[u] {
            if v.index() == start {
                return dist[u] + 1;
            }
            if dist[v.index()] == u32::MAX {
                dist[v.index()] = dist[u] + 1;
                queue.push_back(v.index());
            }
        }
    }
    0
}

/// `(in_bus, position, length)` per flip-flop. A bus needs at least two
/// members sharing the same base name; the position is the declared index,
/// so sparse buses keep their gaps.
fn bus_membership(net: &Netlist) -> Vec<(bool, u32, u32)> {
    let parsed: Vec<Option<(&str, u32)>> = net
        .ff_ids()
        .map(|ff| parse_bus_name(net.ff_name(ff)))
        .collect();
    let mut counts: std::collections::HashMap<&str, u32> = std::collections::HashMap::new();
    for (base, _) in parsed.iter().flatten() {
        *counts.entry(base).or_insert(0) += 1;
    }
    parsed
        .iter()
        .map(|p| match p {
            Some((base, index)) if counts[base] >= 2 => (true, *index, counts[base]),
            _ => (false, 0, 0),
        })
        .collect()
}

/// Logic level of every net: 0 at sequential and primary-input boundaries,
/// `1 + max(inputs)` at combinational cell outputs.
fn net_depths(net: &Netlist) -> Vec<u32> {
    let mut depth = vec![0u32; net.net_count()];
    for &cid in net.topo_order() {
        let cell = net.cell(cid);
        let d = cell
            .inputs()
            .iter()
            .map(|&n| depth[n.index()])
            .max()
            .unwrap_or(0);
        depth[cell.output().index()] = d + 1;
    }
    depth
}
