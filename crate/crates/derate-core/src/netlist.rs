//! Structural netlist format: parsing, validation and connectivity queries.
//!
//! A netlist is a single module built from a small cell library of
//! combinational gates plus a D flip-flop. The text format is line based:
//!
//! ```text
//! module sreg
//! # three stage shift register
//! input din
//! output dout
//! wire q0 q1
//! dff ff0 1 q0 din
//! dff ff1 1 q1 q0
//! dff ff2 1 dout q1
//! endmodule
//! ```
//!
//! Validation enforces that every net has exactly one driver, that every
//! declared net is driven, that cell arities match their kind and that every
//! cyclic path passes through at least one flip-flop. Net and cell ids are
//! assigned in declaration order (inputs, then outputs, then wires), so
//! parsing the output of [`Netlist::unparse`] reproduces the original
//! structure exactly.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Index of a net (a named wire, input or output).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NetId(u32);

impl NetId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a cell instance (gates and flip-flops share one space).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellId(u32);

impl CellId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of a flip-flop, dense over the netlist's `dff` instances in
/// declaration order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FfId(u32);

impl FfId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }

}

/// Cell library. `Mux2` reads `sel a b` and outputs `a` when `sel` is 0.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CellKind {
    Buf,
    Not,
    And2,
    And3,
    Or2,
    Or3,
    Nand2,
    Nor2,
    Xor2,
    Xnor2,
    Mux2,
    Dff,
}

impl CellKind {
    pub fn name(self) -> &'static str {
        match self {
            CellKind::Buf => "BUF",
            CellKind::Not => "NOT",
            CellKind::And2 => "AND2",
            CellKind::And3 => "AND3",
            CellKind::Or2 => "OR2",
            CellKind::Or3 => "OR3",
            CellKind::Nand2 => "NAND2",
            CellKind::Nor2 => "NOR2",
            CellKind::Xor2 => "XOR2",
            CellKind::Xnor2 => "XNOR2",
            CellKind::Mux2 => "MUX2",
            CellKind::Dff => "DFF",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "BUF" => CellKind::Buf,
            "NOT" => CellKind::Not,
            "AND2" => CellKind::And2,
            "AND3" => CellKind::And3,
            "OR2" => CellKind::Or2,
            "OR3" => CellKind::Or3,
            "NAND2" => CellKind::Nand2,
            "NOR2" => CellKind::Nor2,
            "XOR2" => CellKind::Xor2,
            "XNOR2" => CellKind::Xnor2,
            "MUX2" => CellKind::Mux2,
            "DFF" => CellKind::Dff,
            _ => return None,
        })
    }

    pub fn input_count(self) -> usize {
        match self {
            CellKind::Buf | CellKind::Not | CellKind::Dff => 1,
            CellKind::And2
            | CellKind::Or2
            | CellKind::Nand2
            | CellKind::Nor2
            | CellKind::Xor2
            | CellKind::Xnor2 => 2,
            CellKind::And3 | CellKind::Or3 | CellKind::Mux2 => 3,
        }
    }

    pub fn is_dff(self) -> bool {
        self == CellKind::Dff
    }
}

/// One cell instance. For a flip-flop `output` is the Q net and `inputs[0]`
/// the D net.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    name: String,
    kind: CellKind,
    drive_strength: u32,
    output: NetId,
    inputs: Vec<NetId>,
}

impl Cell {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> CellKind {
        self.kind
    }

    pub fn drive_strength(&self) -> u32 {
        self.drive_strength
    }

    pub fn output(&self) -> NetId {
        self.output
    }

    pub fn inputs(&self) -> &[NetId] {
        &self.inputs
    }
}

/// What drives a net.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Driver {
    PrimaryInput,
    Cell(CellId),
}

#[derive(Debug, Error)]
pub enum NetlistError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("net `{net}` has more than one driver")]
    MultipleDrivers { net: String },
    #[error("net `{net}` is never driven")]
    UndrivenNet { net: String },
    #[error("combinational loop through {}", cycle.join(" -> "))]
    CombinationalLoop { cycle: Vec<String> },
    #[error("cell `{cell}` ({kind}) expects {expected} inputs, got {got}")]
    ArityMismatch {
        cell: String,
        kind: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Transitive fan-in of a flip-flop's D pin up to the nearest sequential or
/// primary-input boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FaninCone {
    /// Combinational cells in the cone, ascending by id.
    pub cells: Vec<CellId>,
    /// Flip-flops whose Q nets feed the cone, ascending.
    pub source_ffs: Vec<FfId>,
    /// Primary inputs feeding the cone, ascending.
    pub source_inputs: Vec<NetId>,
}

/// Transitive fan-out of a flip-flop's Q pin up to the nearest sequential or
/// primary-output boundary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FanoutCone {
    /// Combinational cells reached, ascending by id.
    pub cells: Vec<CellId>,
    /// Flip-flops whose D pins the cone reaches, ascending.
    pub sink_ffs: Vec<FfId>,
    /// Primary outputs reached, ascending.
    pub sink_outputs: Vec<NetId>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Netlist {
    name: String,
    net_names: Vec<String>,
    net_index: HashMap<String, NetId>,
    inputs: Vec<NetId>,
    outputs: Vec<NetId>,
    cells: Vec<Cell>,
    drivers: Vec<Driver>,
    readers: Vec<Vec<CellId>>,
    flip_flops: Vec<CellId>,
    ff_of_cell: Vec<Option<FfId>>,
    topo: Vec<CellId>,
    is_output: Vec<bool>,
}

impl Netlist {
    pub fn parse(text: &str) -> Result<Netlist, NetlistError> {
        Parser::new(text).run()
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn net_count(&self) -> usize {
        self.net_names.len()
    }

    pub fn net_name(&self, net: NetId) -> &str {
        &self.net_names[net.index()]
    }

    pub fn find_net(&self, name: &str) -> Option<NetId> {
        self.net_index.get(name).copied()
    }

    pub fn inputs(&self) -> &[NetId] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[NetId] {
        &self.outputs
    }

    pub fn is_output(&self, net: NetId) -> bool {
        self.is_output[net.index()]
    }

    pub fn cell_count(&self) -> usize {
        self.cells.len()
    }

    pub fn cell(&self, id: CellId) -> &Cell {
        &self.cells[id.index()]
    }

    pub fn cells(&self) -> impl Iterator<Item = (CellId, &Cell)> {
        self.cells
            .iter()
            .enumerate()
            .map(|(i, c)| (CellId(i as u32), c))
    }

    pub fn driver(&self, net: NetId) -> Driver {
        self.drivers[net.index()]
    }

    /// Cells that read `net` through any input pin.
    pub fn readers(&self, net: NetId) -> &[CellId] {
        &self.readers[net.index()]
    }

    pub fn ff_count(&self) -> usize {
        self.flip_flops.len()
    }

    pub fn ff_ids(&self) -> impl Iterator<Item = FfId> {
        (0..self.flip_flops.len()).map(|i| FfId(i as u32))
    }

    pub fn ff_cell_id(&self, ff: FfId) -> CellId {
        self.flip_flops[ff.index()]
    }

    pub fn ff_cell(&self, ff: FfId) -> &Cell {
        self.cell(self.flip_flops[ff.index()])
    }

    pub fn ff_name(&self, ff: FfId) -> &str {
        self.ff_cell(ff).name()
    }

    pub fn ff_q(&self, ff: FfId) -> NetId {
        self.ff_cell(ff).output
    }

    pub fn ff_d(&self, ff: FfId) -> NetId {
        self.ff_cell(ff).inputs[0]
    }

    pub fn ff_by_name(&self, name: &str) -> Option<FfId> {
        self.flip_flops
            .iter()
            .position(|&c| self.cells[c.index()].name == name)
            .map(|i| FfId(i as u32))
    }

    /// The flip-flop index of a cell, if the cell is a `dff`.
    pub fn ff_of_cell(&self, cell: CellId) -> Option<FfId> {
        self.ff_of_cell[cell.index()]
    }

    /// Combinational cells in evaluation order: every cell appears after the
    /// drivers of all of its inputs. Flip-flops are excluded.
    pub fn topo_order(&self) -> &[CellId] {
        &self.topo
    }

    pub fn fanin_cone(&self, ff: FfId) -> FaninCone {
        let mut cells = Vec::new();
        let mut seen_cells = vec![false; self.cells.len()];
        let mut source_ffs = Vec::new();
        let mut seen_ffs = vec![false; self.flip_flops.len()];
        let mut source_inputs = Vec::new();
        let mut seen_inputs = vec![false; self.net_names.len()];
        let mut stack = vec![self.ff_d(ff)];
        while let Some(net) = stack.pop() {
            match self.driver(net) {
                Driver::PrimaryInput => {
                    if !seen_inputs[net.index()] {
                        seen_inputs[net.index()] = true;
                        source_inputs.push(net);
                    }
                }
                Driver::Cell(cid) => {
                    if let Some(src) = self.ff_of_cell[cid.index()] {
                        if !seen_ffs[src.index()] {
                            seen_ffs[src.index()] = true;
                            source_ffs.push(src);
                        }
                    } else if !seen_cells[cid.index()] {
                        seen_cells[cid.index()] = true;
                        cells.push(cid);
                        stack.extend_from_slice(&self.cells[cid.index()].inputs);
                    }
                }
            }
        }
        cells.sort_unstable();
        source_ffs.sort_unstable();
        source_inputs.sort_unstable();
        FaninCone {
            cells,
            source_ffs,
            source_inputs,
        }
    }

    pub fn fanout_cone(&self, ff: FfId) -> FanoutCone {
        let mut cells = Vec::new();
        let mut seen_cells = vec![false; self.cells.len()];
        let mut sink_ffs = Vec::new();
        let mut seen_ffs = vec![false; self.flip_flops.len()];
        let mut sink_outputs = Vec::new();
        let mut seen_nets = vec![false; self.net_names.len()];
        let mut stack = vec![self.ff_q(ff)];
        seen_nets[self.ff_q(ff).index()] = true;
        while let Some(net) = stack.pop() {
            if self.is_output[net.index()] {
                sink_outputs.push(net);
            }
            for &cid in &self.readers[net.index()] {
                if let Some(dst) = self.ff_of_cell[cid.index()] {
                    if !seen_ffs[dst.index()] {
                        seen_ffs[dst.index()] = true;
                        sink_ffs.push(dst);
                    }
                } else if !seen_cells[cid.index()] {
                    seen_cells[cid.index()] = true;
                    cells.push(cid);
                    let out = self.cells[cid.index()].output;
                    if !seen_nets[out.index()] {
                        seen_nets[out.index()] = true;
                        stack.push(out);
                    }
                }
            }
        }
        cells.sort_unstable();
        sink_ffs.sort_unstable();
        sink_outputs.sort_unstable();
        FanoutCone {
            cells,
            sink_ffs,
            sink_outputs,
        }
    }

    /// Renders the netlist back into its text form. The output parses back
    /// to an identical `Netlist`.
    pub fn unparse(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "module {}", self.name);
        if !self.inputs.is_empty() {
            let names: Vec<&str> = self.inputs.iter().map(|&n| self.net_name(n)).collect();
            let _ = writeln!(out, "input {}", names.join(" "));
        }
        if !self.outputs.is_empty() {
            let names: Vec<&str> = self.outputs.iter().map(|&n| self.net_name(n)).collect();
            let _ = writeln!(out, "output {}", names.join(" "));
        }
        let first_wire = self.inputs.len() + self.outputs.len();
        if first_wire < self.net_names.len() {
            let names: Vec<&str> = self.net_names[first_wire..]
                .iter()
                .map(|s| s.as_str())
                .collect();
            let _ = writeln!(out, "wire {}", names.join(" "));
        }
        for cell in &self.cells {
            if cell.kind.is_dff() {
                let _ = writeln!(
                    out,
                    "dff {} {} {} {}",
                    cell.name,
                    cell.drive_strength,
                    self.net_name(cell.output),
                    self.net_name(cell.inputs[0]),
                );
            } else {
                let ins: Vec<&str> = cell.inputs.iter().map(|&n| self.net_name(n)).collect();
                let _ = writeln!(
                    out,
                    "cell {} {} {} {} {}",
                    cell.name,
                    cell.kind.name(),
                    cell.drive_strength,
                    self.net_name(cell.output),
                    ins.join(" "),
                );
            }
        }
        out.push_str("endmodule\n");
        out
    }
}

struct Parser<'a> {
    text: &'a str,
    module_name: Option<String>,
    net_names: Vec<String>,
    net_index: HashMap<String, NetId>,
    input_names: Vec<(String, usize)>,
    output_names: Vec<(String, usize)>,
    wire_names: Vec<(String, usize)>,
    // (line, instance, kind, drive, output name, input names)
    cell_lines: Vec<(usize, String, CellKind, u32, String, Vec<String>)>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            text,
            module_name: None,
            net_names: Vec::new(),
            net_index: HashMap::new(),
            input_names: Vec::new(),
            output_names: Vec::new(),
            wire_names: Vec::new(),
            cell_lines: Vec::new(),
        }
    }

    fn run(mut self) -> Result<Netlist, NetlistError> {
        self.scan_lines()?;
        self.build()
    }

    fn scan_lines(&mut self) -> Result<(), NetlistError> {
        let mut ended = false;
        for (idx, raw) in self.text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            };
            let tokens: Vec<&str> = content.split_whitespace().collect();
            if tokens.is_empty() {
                continue;
            }
            if ended {
                return Err(syntax(line, "content after endmodule"));
            }
            if self.module_name.is_none() {
                if tokens[0] != "module" || tokens.len() != 2 {
                    return Err(syntax(line, "expected `module <name>`"));
                }
                check_ident(line, tokens[1])?;
                self.module_name = Some(tokens[1].to_string());
                continue;
            }
            match tokens[0] {
                "endmodule" => {
                    if tokens.len() != 1 {
                        return Err(syntax(line, "endmodule takes no arguments"));
                    }
                    ended = true;
                }
                "input" | "output" | "wire" => {
                    if tokens.len() < 2 {
                        return Err(syntax(line, "declaration needs at least one net name"));
                    }
                    for &name in &tokens[1..] {
                        check_ident(line, name)?;
                        match tokens[0] {
                            "input" => self.input_names.push((name.to_string(), line)),
                            "output" => self.output_names.push((name.to_string(), line)),
                            _ => self.wire_names.push((name.to_string(), line)),
                        }
                    }
                }
                "cell" => {
                    if tokens.len() < 5 {
                        return Err(syntax(
                            line,
                            "expected `cell <name> <kind> <drive> <out> <in...>`",
                        ));
                    }
                    check_ident(line, tokens[1])?;
                    let kind = CellKind::from_name(tokens[2])
                        .ok_or_else(|| syntax(line, &format!("unknown cell kind `{}`", tokens[2])))?;
                    if kind.is_dff() {
                        return Err(syntax(line, "flip-flops are declared with `dff`"));
                    }
                    let drive = parse_drive(line, tokens[3])?;
                    check_ident(line, tokens[4])?;
                    let inputs: Vec<String> = tokens[5..].iter().map(|s| s.to_string()).collect();
                    for name in &inputs {
                        check_ident(line, name)?;
                    }
                    self.cell_lines.push((
                        line,
                        tokens[1].to_string(),
                        kind,
                        drive,
                        tokens[4].to_string(),
                        inputs,
                    ));
                }
                "dff" => {
                    if tokens.len() < 4 {
                        return Err(syntax(line, "expected `dff <name> <drive> <q> <d>`"));
                    }
                    check_ident(line, tokens[1])?;
                    let drive = parse_drive(line, tokens[2])?;
                    check_ident(line, tokens[3])?;
                    let inputs: Vec<String> = tokens[4..].iter().map(|s| s.to_string()).collect();
                    for name in &inputs {
                        check_ident(line, name)?;
                    }
                    self.cell_lines.push((
                        line,
                        tokens[1].to_string(),
                        CellKind::Dff,
                        drive,
                        tokens[3].to_string(),
                        inputs,
                    ));
                }
                other => {
                    return Err(syntax(line, &format!("unknown directive `{other}`")));
                }
            }
        }
        if self.module_name.is_none() {
            return Err(syntax(self.text.lines().count().max(1), "missing module header"));
        }
        if !ended {
            return Err(syntax(self.text.lines().count(), "missing endmodule"));
        }
        Ok(())
    }

    fn build(mut self) -> Result<Netlist, NetlistError> {
        let add_net = |names: Vec<(String, usize)>,
                           net_names: &mut Vec<String>,
                           net_index: &mut HashMap<String, NetId>|
         -> Result<Vec<NetId>, NetlistError> {
            let mut ids = Vec::with_capacity(names.len());
            for (name, line) in names {
                if net_index.contains_key(&name) {
                    return Err(syntax(line, &format!("net `{name}` declared twice")));
                }
                let id = NetId(net_names.len() as u32);
                net_index.insert(name.clone(), id);
                net_names.push(name);
                ids.push(id);
            }
            Ok(ids)
        };
        let inputs = add_net(
            std::mem::take(&mut self.input_names),
            &mut self.net_names,
            &mut self.net_index,
        )?;
        let outputs = add_net(
            std::mem::take(&mut self.output_names),
            &mut self.net_names,
            &mut self.net_index,
        )?;
        add_net(
            std::mem::take(&mut self.wire_names),
            &mut self.net_names,
            &mut self.net_index,
        )?;

        let net_count = self.net_names.len();
        let mut drivers: Vec<Option<Driver>> = vec![None; net_count];
        for &net in &inputs {
            drivers[net.index()] = Some(Driver::PrimaryInput);
        }

        let mut cells: Vec<Cell> = Vec::with_capacity(self.cell_lines.len());
        let mut cell_index: HashMap<String, CellId> = HashMap::new();
        let mut readers: Vec<Vec<CellId>> = vec![Vec::new(); net_count];
        let mut flip_flops = Vec::new();
        let mut ff_of_cell = Vec::new();

        for (line, name, kind, drive, out_name, in_names) in std::mem::take(&mut self.cell_lines) {
            if cell_index.contains_key(&name) {
                return Err(syntax(line, &format!("cell `{name}` declared twice")));
            }
            if in_names.len() != kind.input_count() {
                return Err(NetlistError::ArityMismatch {
                    cell: name,
                    kind: kind.name(),
                    expected: kind.input_count(),
                    got: in_names.len(),
                });
            }
            let resolve = |n: &str| -> Result<NetId, NetlistError> {
                self.net_index
                    .get(n)
                    .copied()
                    .ok_or_else(|| syntax(line, &format!("undeclared net `{n}`")))
            };
            let output = resolve(&out_name)?;
            let mut input_ids = Vec::with_capacity(in_names.len());
            for n in &in_names {
                input_ids.push(resolve(n)?);
            }
            let cid = CellId(cells.len() as u32);
            if drivers[output.index()].is_some() {
                return Err(NetlistError::MultipleDrivers {
                    net: out_name.clone(),
                });
            }
            drivers[output.index()] = Some(Driver::Cell(cid));
            for &n in &input_ids {
                readers[n.index()].push(cid);
            }
            if kind.is_dff() {
                ff_of_cell.push(Some(FfId(flip_flops.len() as u32)));
                flip_flops.push(cid);
            } else {
                ff_of_cell.push(None);
            }
            cell_index.insert(name.clone(), cid);
            cells.push(Cell {
                name,
                kind,
                drive_strength: drive,
                output,
                inputs: input_ids,
            });
        }

        let mut final_drivers = Vec::with_capacity(net_count);
        for (i, d) in drivers.into_iter().enumerate() {
            match d {
                Some(d) => final_drivers.push(d),
                None => {
                    return Err(NetlistError::UndrivenNet {
                        net: self.net_names[i].clone(),
                    })
                }
            }
        }

        let topo = topo_sort(&cells, &final_drivers, &ff_of_cell)?;

        let mut is_output = vec![false; net_count];
        for &net in &outputs {
            is_output[net.index()] = true;
        }

        Ok(Netlist {
            name: self.module_name.take().unwrap(),
            net_names: self.net_names,
            net_index: self.net_index,
            inputs,
            outputs,
            cells,
            drivers: final_drivers,
            readers,
            flip_flops,
            ff_of_cell,
            topo,
            is_output,
        })
    }
}

/// Kahn's algorithm over combinational cells only; flip-flop outputs act as
/// sources, so any cycle left over is purely combinational.
fn topo_sort(
    cells: &[Cell],
    drivers: &[Driver],
    ff_of_cell: &[Option<FfId>],
) -> Result<Vec<CellId>, NetlistError> {
    let comb_driver = |net: NetId| -> Option<CellId> {
        match drivers[net.index()] {
            Driver::Cell(cid) if ff_of_cell[cid.index()].is_none() => Some(cid),
            _ => None,
        }
    };
    let mut indegree = vec![0usize; cells.len()];
    let mut successors: Vec<Vec<CellId>> = vec![Vec::new(); cells.len()];
    for (i, cell) in cells.iter().enumerate() {
        if ff_of_cell[i].is_some() {
            continue;
        }
        for &input in &cell.inputs {
            if let Some(src) = comb_driver(input) {
                indegree[i] += 1;
                successors[src.index()].push(CellId(i as u32));
            }
        }
    }
    let mut ready: std::collections::VecDeque<CellId> = (0..cells.len())
        .filter(|&i| ff_of_cell[i].is_none() && indegree[i] == 0)
        .map(|i| CellId(i as u32))
        .collect();
    let mut order = Vec::new();
    while let Some(cid) = ready.pop_front() {
        order.push(cid);
        for &next in &successors[cid.index()] {
            indegree[next.index()] -= 1;
            if indegree[next.index()] == 0 {
                ready.push_back(next);
            }
        }
    }
    let comb_total = ff_of_cell.iter().filter(|f| f.is_none()).count();
    if order.len() == comb_total {
        return Ok(order);
    }

    // A cycle remains. Walk predecessors from the lowest stuck cell until a
    // repeat shows up, then report that loop in forward order.
    let stuck: Vec<usize> = (0..cells.len())
        .filter(|&i| ff_of_cell[i].is_none() && indegree[i] > 0)
        .collect();
    let start = stuck[0];
    let mut pos: HashMap<usize, usize> = HashMap::new();
    let mut path = Vec::new();
    let mut cur = start;
    let cycle = loop {
        if let Some(&at) = pos.get(&cur) {
            break &path[at..];
        }
        pos.insert(cur, path.len());
        path.push(cur);
        cur = cells[cur]
            .inputs
            .iter()
            .find_map(|&n| comb_driver(n).map(CellId::index))
            .filter(|i| indegree[*i] > 0)
            .expect("stuck cell must have a stuck predecessor");
    };
    let mut names: Vec<String> = cycle.iter().rev().map(|&i| cells[i].name.clone()).collect();
    let min = names
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    names.rotate_left(min);
    Err(NetlistError::CombinationalLoop { cycle: names })
}

fn syntax(line: usize, reason: &str) -> NetlistError {
    NetlistError::Syntax {
        line,
        reason: reason.to_string(),
    }
}

fn parse_drive(line: usize, token: &str) -> Result<u32, NetlistError> {
    match token.parse::<u32>() {
        Ok(v) if v >= 1 => Ok(v),
        _ => Err(syntax(line, "drive strength must be a positive integer")),
    }
}

fn check_ident(line: usize, name: &str) -> Result<(), NetlistError> {
    if name.contains(',') || name.contains('"') {
        return Err(syntax(line, &format!("invalid identifier `{name}`")));
    }
    Ok(())
}
