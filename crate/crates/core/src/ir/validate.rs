// SPDX-License-Identifier: Apache-2.0

//! Structural and typing checks for both graph kinds, plus the cycle-arrival
//! check for pipelines.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use super::{
    alu_slot, NodeId, PipeKind, PipelineArch, ProtoKind, ProtocolProgram, Width,
    CMD_WIDTH, LENGTH_WIDTH, MAX_WIDTH,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub node: Option<NodeId>,
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        match self.node {
            Some(n) => write!(f, "{sev}[{}] node {n}: {}", self.code, self.message),
            None => write!(f, "{sev}[{}]: {}", self.code, self.message),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl ValidationReport {
    fn from_diags(diagnostics: Vec<Diagnostic>) -> Self {
        let ok = diagnostics.iter().all(|d| d.severity != Severity::Error);
        ValidationReport { ok, diagnostics }
    }

    pub fn errors(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics.iter().filter(|d| d.severity == Severity::Error)
    }

    pub fn has_code(&self, code: &str) -> bool {
        self.diagnostics.iter().any(|d| d.code == code)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in &self.diagnostics {
            writeln!(f, "{d}")?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Diags(Vec<Diagnostic>);

impl Diags {
    fn error(&mut self, node: impl Into<Option<NodeId>>, code: &'static str, message: impl Into<String>) {
        self.0.push(Diagnostic { node: node.into(), severity: Severity::Error, code, message: message.into() });
    }

    fn warn(&mut self, node: impl Into<Option<NodeId>>, code: &'static str, message: impl Into<String>) {
        self.0.push(Diagnostic { node: node.into(), severity: Severity::Warning, code, message: message.into() });
    }

    fn width_eq(&mut self, node: NodeId, what: &str, got: Width, want: Width) {
        if got != want {
            self.error(node, "width-mismatch", format!("width mismatch: {what} is {got} bits, expected {want}"));
        }
    }
}

fn check_width(d: &mut Diags, node: impl Into<Option<NodeId>> + Copy, what: &str, w: Width) -> bool {
    if w == 0 || w > MAX_WIDTH {
        d.error(node, "width-range", format!("{what} width {w} outside 1..={MAX_WIDTH}"));
        false
    } else {
        true
    }
}

pub fn validate_protocol(program: &ProtocolProgram) -> ValidationReport {
    let mut d = Diags::default();

    let mut seen = HashSet::new();
    for a in &program.arrays {
        if !seen.insert(a.id) {
            d.error(None, "duplicate-decl", format!("array {} declared twice", a.id));
        }
        check_width(&mut d, None, &format!("array {} element", a.id), a.elem_width);
        if a.num_elems == 0 {
            d.error(None, "decl", format!("array {} has no elements", a.id));
        }
    }
    seen.clear();
    for t in &program.tables {
        if !seen.insert(t.id) {
            d.error(None, "duplicate-decl", format!("table {} declared twice", t.id));
        }
        check_width(&mut d, None, &format!("table {} key", t.id), t.key_width);
        if t.num_entries == 0 {
            d.error(None, "decl", format!("table {} has no entries", t.id));
        }
    }

    let mut structural_ok = true;
    for n in program.nodes.values() {
        let (lo, hi) = n.kind.arity();
        if n.inputs.len() < lo || n.inputs.len() > hi {
            d.error(n.id, "arity", format!("{} takes {lo}..={hi} inputs, got {}", n.kind.name(), n.inputs.len()));
            structural_ok = false;
        }
        for p in &n.inputs {
            match program.node(p.node) {
                None => {
                    d.error(n.id, "dangling-input", format!("input {p} names a missing node"));
                    structural_ok = false;
                }
                Some(src) if p.port as usize >= src.kind.num_outputs() => {
                    d.error(n.id, "bad-port", format!("input {p}: {} has {} outputs", src.kind.name(), src.kind.num_outputs()));
                    structural_ok = false;
                }
                _ => {}
            }
        }
        match &n.kind {
            ProtoKind::ArrayRead { array } | ProtoKind::ArrayWrite { array } => {
                if program.array(*array).is_none() {
                    d.error(n.id, "undeclared-array", format!("undeclared array {array}"));
                    structural_ok = false;
                }
            }
            ProtoKind::TableLookup { table } | ProtoKind::TableWrite { table } => {
                if program.table(*table).is_none() {
                    d.error(n.id, "undeclared-table", format!("undeclared table {table}"));
                    structural_ok = false;
                }
            }
            ProtoKind::Constant { value } => {
                check_width(&mut d, n.id, "constant", value.width());
            }
            ProtoKind::Slice { width, .. } | ProtoKind::Extend { width, .. } => {
                if !check_width(&mut d, n.id, "result", *width) {
                    structural_ok = false;
                }
            }
            ProtoKind::PacketIn { prefix_len } | ProtoKind::PacketOut { prefix_len } => {
                if *prefix_len == 0 || prefix_len * 8 > MAX_WIDTH {
                    d.error(n.id, "width-range", format!("prefix length {prefix_len} bytes out of range"));
                    structural_ok = false;
                }
            }
            ProtoKind::Unary { op } if !op.is_unary() => {
                d.error(n.id, "opcode", format!("{op} is not a unary operation"));
            }
            ProtoKind::Binary { op } if !op.is_binary() => {
                d.error(n.id, "opcode", format!("{op} is not a binary operation"));
            }
            _ => {}
        }
    }

    let ins = program.find(|k| matches!(k, ProtoKind::PacketIn { .. })).count();
    let outs = program.find(|k| matches!(k, ProtoKind::PacketOut { .. })).count();
    if ins != 1 || outs != 1 {
        d.error(None, "packet-io", format!("need exactly one PacketIn and one PacketOut, found {ins} and {outs}"));
    }
    if let (Some(pi), Some(po)) = (program.packet_in(), program.packet_out()) {
        if let (ProtoKind::PacketIn { prefix_len: a }, ProtoKind::PacketOut { prefix_len: b }) = (&pi.kind, &po.kind) {
            if a != b {
                d.error(po.id, "packet-io", format!("PacketOut prefix {b} differs from PacketIn prefix {a}"));
            }
        }
    }

    if structural_ok {
        if let Err(e) = super::topo_order(program.nodes.values().map(|n| (n.id, n.inputs.as_slice()))) {
            d.error(None, "cycle", e.to_string());
            structural_ok = false;
        }
    }

    if structural_ok {
        type_program(program, &mut d);
    }
    ValidationReport::from_diags(d.0)
}

fn type_program(program: &ProtocolProgram, d: &mut Diags) {
    let widths = program.value_widths();
    for n in program.nodes.values() {
        let ins: Option<Vec<Width>> = n.inputs.iter().map(|p| widths.get(p).copied()).collect();
        let Some(ins) = ins else { continue };
        let id = n.id;
        match &n.kind {
            ProtoKind::Slice { offset, width } => {
                if offset + width > ins[0] {
                    d.error(id, "slice-range", format!("slice {offset}+{width} exceeds input width {}", ins[0]));
                }
            }
            ProtoKind::Merge => {
                let total: Width = ins.iter().sum();
                check_width(d, id, "merge result", total);
            }
            ProtoKind::Extend { width, .. } => {
                if *width <= ins[0] {
                    d.error(id, "extend-narrow", format!("extend to {width} bits from {} bits", ins[0]));
                }
            }
            ProtoKind::Binary { .. } => d.width_eq(id, "right operand", ins[1], ins[0]),
            ProtoKind::Conditional => {
                if ins[0] != 1 {
                    d.warn(id, "cond-width", format!("condition is {} bits wide; normalize before compiling", ins[0]));
                }
                d.width_eq(id, "f-value", ins[2], ins[1]);
            }
            ProtoKind::ArrayRead { array } => {
                let a = program.array(*array).unwrap();
                d.width_eq(id, "index", ins[0], a.index_width());
            }
            ProtoKind::ArrayWrite { array } => {
                let a = program.array(*array).unwrap();
                d.width_eq(id, "index", ins[0], a.index_width());
                d.width_eq(id, "value", ins[1], a.elem_width);
                if let Some(&en) = ins.get(2) {
                    d.width_eq(id, "enable", en, 1);
                }
            }
            ProtoKind::TableLookup { table } => {
                let t = program.table(*table).unwrap();
                d.width_eq(id, "key", ins[0], t.key_width);
            }
            ProtoKind::TableWrite { table } => {
                let t = program.table(*table).unwrap();
                d.width_eq(id, "key", ins[0], t.key_width);
                d.width_eq(id, "index hint", ins[1], t.index_width());
                if let Some(&en) = ins.get(2) {
                    d.width_eq(id, "enable", en, 1);
                }
            }
            ProtoKind::PacketOut { prefix_len } => {
                d.width_eq(id, "cmd", ins[0], CMD_WIDTH);
                d.width_eq(id, "prefix", ins[1], prefix_len * 8);
                d.width_eq(id, "length", ins[2], LENGTH_WIDTH);
            }
            _ => {}
        }
    }
}

/// Cycle in which a value becomes available. Constants (and anything computed
/// only from constants) fit any cycle.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arrival {
    Any,
    At(u32),
}

impl Arrival {
    pub fn cycle(self) -> Option<u32> {
        match self {
            Arrival::Any => None,
            Arrival::At(c) => Some(c),
        }
    }
}

/// Output arrival of every node. Fails with diagnostics when some node's
/// inputs arrive in different cycles.
pub fn arrivals(arch: &PipelineArch) -> Result<BTreeMap<NodeId, Arrival>, Vec<Diagnostic>> {
    let mut d = Diags::default();
    let Some(order) = arch.topo() else {
        d.error(None, "cycle", "pipeline graph is not acyclic");
        return Err(d.0);
    };
    let mut out: BTreeMap<NodeId, Arrival> = BTreeMap::new();
    for id in order {
        let n = &arch.nodes[&id];
        let mut common: Option<u32> = None;
        let mut bad = false;
        for p in &n.inputs {
            if let Arrival::At(c) = out[&p.node] {
                match common {
                    None => common = Some(c),
                    Some(prev) if prev != c => {
                        d.error(id, "arrival", format!("arrival mismatch {prev} vs {c} (input {p})"));
                        bad = true;
                        break;
                    }
                    _ => {}
                }
            }
        }
        let a = if matches!(n.kind, PipeKind::PacketIn { .. }) {
            Arrival::At(0)
        } else {
            match common {
                Some(c) if !bad => Arrival::At(c + arch.latency(n)),
                Some(c) => Arrival::At(c),
                None => Arrival::Any,
            }
        };
        out.insert(id, a);
    }
    if d.0.is_empty() {
        Ok(out)
    } else {
        Err(d.0)
    }
}

pub fn validate_pipeline(arch: &PipelineArch) -> ValidationReport {
    let mut d = Diags::default();

    let mut seen = HashSet::new();
    for r in &arch.rams {
        if !seen.insert(r.id) {
            d.error(None, "duplicate-decl", format!("RAM {} declared twice", r.id));
        }
        check_width(&mut d, None, &format!("RAM {} element", r.id), r.elem_width);
        if r.num_elems == 0 || r.latency == 0 {
            d.error(None, "decl", format!("RAM {} needs elements and latency >= 1", r.id));
        }
    }
    seen.clear();
    for c in &arch.cams {
        if !seen.insert(c.id) {
            d.error(None, "duplicate-decl", format!("CAM {} declared twice", c.id));
        }
        check_width(&mut d, None, &format!("CAM {} key", c.id), c.key_width);
        if c.num_entries == 0 || c.latency == 0 {
            d.error(None, "decl", format!("CAM {} needs entries and latency >= 1", c.id));
        }
    }

    let mut structural_ok = true;
    let mut ram_writers: HashMap<u32, Vec<NodeId>> = HashMap::new();
    let mut cam_writers: HashMap<u32, Vec<NodeId>> = HashMap::new();
    for n in arch.nodes.values() {
        if let Some(k) = arch.expected_arity(n) {
            if n.inputs.len() != k {
                d.error(n.id, "arity", format!("{} takes {k} inputs, got {}", n.kind.name(), n.inputs.len()));
                structural_ok = false;
            }
        }
        for p in &n.inputs {
            match arch.node(p.node) {
                None => {
                    d.error(n.id, "dangling-input", format!("input {p} names a missing node"));
                    structural_ok = false;
                }
                Some(src) if p.port as usize >= src.kind.num_outputs() => {
                    d.error(n.id, "bad-port", format!("input {p}: {} has {} outputs", src.kind.name(), src.kind.num_outputs()));
                    structural_ok = false;
                }
                _ => {}
            }
        }
        match &n.kind {
            PipeKind::Router if n.inputs.is_empty() => {
                d.error(n.id, "arity", "router needs at least one input");
                structural_ok = false;
            }
            PipeKind::Merge if n.inputs.len() < 2 => {
                d.error(n.id, "arity", "merge needs at least two inputs");
                structural_ok = false;
            }
            PipeKind::Alu { width, ops, latency } => {
                check_width(&mut d, n.id, "ALU", *width);
                if ops.is_empty() {
                    d.error(n.id, "alu-ops", "ALU supports no operations");
                    structural_ok = false;
                }
                if *latency == 0 {
                    d.error(n.id, "latency", "ALU latency must be at least 1");
                }
                let mut uniq = ops.clone();
                uniq.sort();
                uniq.dedup();
                if uniq.len() != ops.len() {
                    d.error(n.id, "alu-ops", "ALU lists an operation twice");
                }
            }
            PipeKind::Register { width } | PipeKind::Slice { width, .. } | PipeKind::Extend { width, .. } => {
                if !check_width(&mut d, n.id, "result", *width) {
                    structural_ok = false;
                }
            }
            PipeKind::Constant { width, value } => {
                if check_width(&mut d, n.id, "constant", *width) {
                    if let Some(v) = value {
                        d.width_eq(n.id, "constant value", v.width(), *width);
                    }
                }
            }
            PipeKind::PacketIn { prefix_len, .. } | PipeKind::PacketOut { prefix_len, .. } => {
                if *prefix_len == 0 || prefix_len * 8 > MAX_WIDTH {
                    d.error(n.id, "width-range", format!("prefix length {prefix_len} bytes out of range"));
                    structural_ok = false;
                }
            }
            PipeKind::RamAccess { ram, write } => {
                if arch.ram(*ram).is_none() {
                    d.error(n.id, "undeclared-ram", format!("undeclared RAM {ram}"));
                    structural_ok = false;
                } else if *write {
                    ram_writers.entry(*ram).or_default().push(n.id);
                }
            }
            PipeKind::CamAccess { cam, write } => {
                if arch.cam(*cam).is_none() {
                    d.error(n.id, "undeclared-cam", format!("undeclared CAM {cam}"));
                    structural_ok = false;
                } else if *write {
                    cam_writers.entry(*cam).or_default().push(n.id);
                }
            }
            _ => {}
        }
    }
    for (ram, ws) in &ram_writers {
        if ws.len() > 1 {
            d.error(ws[1], "write-port", format!("RAM {ram} has {} write accesses; one write port allowed", ws.len()));
        }
    }
    for (cam, ws) in &cam_writers {
        if ws.len() > 1 {
            d.error(ws[1], "write-port", format!("CAM {cam} has {} write accesses; one write port allowed", ws.len()));
        }
    }

    let ins = arch.find(|k| matches!(k, PipeKind::PacketIn { .. })).count();
    let outs = arch.find(|k| matches!(k, PipeKind::PacketOut { .. })).count();
    if ins != 1 || outs != 1 {
        d.error(None, "packet-io", format!("need exactly one PacketIn and one PacketOut, found {ins} and {outs}"));
    }
    if let (Some(pi), Some(po)) = (arch.packet_in(), arch.packet_out()) {
        if let (PipeKind::PacketIn { prefix_len: a, .. }, PipeKind::PacketOut { prefix_len: b, .. }) = (&pi.kind, &po.kind) {
            if a != b {
                d.error(po.id, "packet-io", format!("PacketOut prefix {b} differs from PacketIn prefix {a}"));
            }
        }
    }

    if structural_ok && arch.topo().is_none() {
        d.error(None, "cycle", "pipeline graph is not acyclic");
        structural_ok = false;
    }
    if structural_ok {
        type_pipeline(arch, &mut d);
        if let Err(diags) = arrivals(arch) {
            d.0.extend(diags);
        }
    }
    ValidationReport::from_diags(d.0)
}

fn type_pipeline(arch: &PipelineArch, d: &mut Diags) {
    let widths = arch.value_widths();
    for n in arch.nodes.values() {
        let ins: Option<Vec<Width>> = n.inputs.iter().map(|p| widths.get(p).copied()).collect();
        let Some(ins) = ins else { continue };
        let id = n.id;
        match &n.kind {
            PipeKind::Register { width } => d.width_eq(id, "register input", ins[0], *width),
            PipeKind::Router => {
                for (i, w) in ins.iter().enumerate().skip(1) {
                    d.width_eq(id, &format!("router input {i}"), *w, ins[0]);
                }
            }
            PipeKind::Slice { offset, width } => {
                if offset + width > ins[0] {
                    d.error(id, "slice-range", format!("slice {offset}+{width} exceeds input width {}", ins[0]));
                }
            }
            PipeKind::Merge => {
                check_width(d, id, "merge result", ins.iter().sum());
            }
            PipeKind::Extend { width, .. } => {
                if *width <= ins[0] {
                    d.error(id, "extend-narrow", format!("extend to {width} bits from {} bits", ins[0]));
                }
            }
            PipeKind::Alu { width, .. } => {
                for (slot, w) in ins.iter().enumerate() {
                    let want = if slot == alu_slot(super::Opcode::Mux, 0) { 1 } else { *width };
                    d.width_eq(id, &format!("ALU input {slot}"), *w, want);
                }
            }
            PipeKind::PacketOut { prefix_len, .. } => {
                d.width_eq(id, "cmd", ins[0], CMD_WIDTH);
                d.width_eq(id, "prefix", ins[1], prefix_len * 8);
                d.width_eq(id, "length", ins[2], LENGTH_WIDTH);
            }
            PipeKind::RamAccess { ram, write } => {
                let r = arch.ram(*ram).unwrap();
                d.width_eq(id, "index", ins[0], r.index_width());
                if *write {
                    d.width_eq(id, "value", ins[1], r.elem_width);
                    d.width_eq(id, "enable", ins[2], 1);
                }
            }
            PipeKind::CamAccess { cam, write } => {
                let c = arch.cam(*cam).unwrap();
                d.width_eq(id, "key", ins[0], c.key_width);
                if *write {
                    d.width_eq(id, "index hint", ins[1], c.index_width());
                    d.width_eq(id, "enable", ins[2], 1);
                }
            }
            _ => {}
        }
    }
}

/// Cycle at which the packet output consumes its inputs.
pub fn pipeline_depth(arch: &PipelineArch) -> Option<u32> {
    let arr = arrivals(arch).ok()?;
    let po = arch.packet_out()?;
    po.inputs.iter().find_map(|p| arr[&p.node].cycle()).or(Some(0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::program::ProgramBuilder;
    use crate::ir::pipeline::ArchBuilder;
    use crate::ir::{Opcode, PortRef, RamDecl};

    fn passthrough() -> ProtocolProgram {
        let mut b = ProgramBuilder::new();
        let (p, l) = b.packet_in(16);
        let cmd = b.constant(2, 0);
        b.packet_out(16, cmd, p, l);
        b.build()
    }

    #[test]
    fn minimal_program_is_valid() {
        let r = validate_protocol(&passthrough());
        assert!(r.ok, "{r}");
    }

    #[test]
    fn binary_width_mismatch() {
        let mut b = ProgramBuilder::new();
        let (p, l) = b.packet_in(16);
        let a = b.slice(p, 0, 8);
        let c = b.slice(p, 8, 16);
        b.binary(Opcode::Add, a, c);
        let cmd = b.constant(2, 0);
        b.packet_out(16, cmd, p, l);
        let r = validate_protocol(&b.build());
        assert!(!r.ok);
        assert!(r.errors().any(|d| d.message.contains("width mismatch")));
    }

    #[test]
    fn undeclared_array() {
        let mut b = ProgramBuilder::new();
        let (p, l) = b.packet_in(16);
        let idx = b.slice(p, 0, 1);
        b.array_read(7, idx);
        let cmd = b.constant(2, 0);
        b.packet_out(16, cmd, p, l);
        let r = validate_protocol(&b.build());
        assert!(!r.ok);
        assert!(r.errors().any(|d| d.message.contains("undeclared array")));
    }

    #[test]
    fn cycles_and_packet_io() {
        let mut prog = passthrough();
        prog.nodes.get_mut(&1).unwrap().inputs = vec![];
        prog.nodes.insert(9, crate::ir::ProtoNode {
            id: 9,
            kind: ProtoKind::Binary { op: Opcode::Add },
            inputs: vec![PortRef::out(10), PortRef::out(10)],
        });
        prog.nodes.insert(10, crate::ir::ProtoNode {
            id: 10,
            kind: ProtoKind::Unary { op: Opcode::Not },
            inputs: vec![PortRef::out(9)],
        });
        let r = validate_protocol(&prog);
        assert!(r.has_code("cycle"));

        let mut twice = passthrough();
        twice.nodes.insert(20, crate::ir::ProtoNode { id: 20, kind: ProtoKind::PacketIn { prefix_len: 16 }, inputs: vec![] });
        assert!(validate_protocol(&twice).has_code("packet-io"));
    }

    #[test]
    fn wide_condition_is_a_warning() {
        let mut b = ProgramBuilder::new();
        let (p, l) = b.packet_in(4);
        let c = b.slice(p, 0, 8);
        let t = b.slice(p, 8, 8);
        let f = b.slice(p, 16, 8);
        b.cond(c, t, f);
        let cmd = b.constant(2, 0);
        b.packet_out(4, cmd, p, l);
        let r = validate_protocol(&b.build());
        assert!(r.ok);
        assert!(r.has_code("cond-width"));
    }

    fn alu_arch(register_on_direct_edge: bool) -> PipelineArch {
        let mut b = ArchBuilder::new();
        let pin = b.add(PipeKind::PacketIn { prefix_len: 1, mtu: 1500 }, vec![]);
        let len = PortRef::new(pin.node, 1);
        let reg = b.register(pin, 8);
        let direct = if register_on_direct_edge { b.register(pin, 8) } else { pin };
        let alu = b.alu(8, vec![Opcode::Add], 1, vec![direct, reg]);
        let len1 = b.register(len, 16);
        let len2 = b.register(len1, 16);
        let cmd = b.add(PipeKind::Constant { width: 2, value: Some(crate::bits::Bits::zero(2)) }, vec![]);
        b.add(PipeKind::PacketOut { prefix_len: 1, mtu: 1500 }, vec![cmd, alu, len2]);
        b.build()
    }

    #[test]
    fn arrival_mismatch_detected() {
        let r = validate_pipeline(&alu_arch(false));
        assert!(!r.ok);
        assert!(r.errors().any(|d| d.message.contains("arrival mismatch 0 vs 1")), "{r}");
    }

    #[test]
    fn balanced_arrivals_pass() {
        let arch = alu_arch(true);
        let r = validate_pipeline(&arch);
        assert!(r.ok, "{r}");
        assert_eq!(pipeline_depth(&arch), Some(2));
    }

    #[test]
    fn single_write_port() {
        let mut b = ArchBuilder::new();
        b.ram(RamDecl { id: 0, elem_width: 8, num_elems: 2, latency: 1 });
        let pin = b.add(PipeKind::PacketIn { prefix_len: 1, mtu: 1500 }, vec![]);
        let idx = b.add(PipeKind::Slice { offset: 0, width: 1 }, vec![pin]);
        for _ in 0..2 {
            b.add(PipeKind::RamAccess { ram: 0, write: true }, vec![idx, pin, idx]);
        }
        let cmd = b.add(PipeKind::Constant { width: 2, value: None }, vec![]);
        b.add(PipeKind::PacketOut { prefix_len: 1, mtu: 1500 }, vec![cmd, pin, PortRef::new(pin.node, 1)]);
        let r = validate_pipeline(&b.build());
        assert!(r.has_code("write-port"), "{r}");
    }
}
