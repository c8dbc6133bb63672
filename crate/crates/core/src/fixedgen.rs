// SPDX-License-Identifier: Apache-2.0

//! One-to-one translation of a protocol program into a pipeline without
//! runtime flexibility.

use std::collections::{BTreeMap, HashMap};

use thiserror::Error;

use crate::frontend::{normalize_program, NormalizeError};
use crate::ir::{
    alu_slot, pipeline_census, ArchBuilder, CamDecl, CamImpl, NodeId, PipeKind, PipelineArch,
    PortRef, ProtoKind, ProtocolProgram, RamDecl, RuntimeConfig, Width, DEFAULT_MTU,
};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedGenOptions {
    pub alu_latency: u32,
    pub ram_latency: u32,
    pub cam_latency: u32,
    /// Per-table CAM implementation overrides.
    pub cam_impl: BTreeMap<u32, CamImpl>,
    pub mtu: u32,
}

impl Default for FixedGenOptions {
    fn default() -> Self {
        FixedGenOptions { alu_latency: 1, ram_latency: 1, cam_latency: 1, cam_impl: BTreeMap::new(), mtu: DEFAULT_MTU }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FixedGenResult {
    pub arch: PipelineArch,
    /// Identity memory bindings only: nothing else is configurable.
    pub config: RuntimeConfig,
    /// Cycle in which each program node's inputs are consumed.
    pub stage_of: BTreeMap<NodeId, u32>,
}

impl FixedGenResult {
    /// Node census table of the generated pipeline.
    pub fn report(&self) -> String {
        pipeline_census(&self.arch).to_string()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum FixedGenError {
    #[error(transparent)]
    Normalize(#[from] NormalizeError),
    #[error("program graph has a cycle or dangling input")]
    Graph,
    #[error("writes to {0} would commit out of program order")]
    WriteOrder(String),
}

/// Values with a known availability cycle; `None` for constant-only values.
struct Timed {
    port: PortRef,
    width: Width,
    cycle: Option<u32>,
}

/// Translates `program` node by node, schedules it ASAP under node
/// latencies and balances every edge with register chains. Each node input
/// passes through its own single-input router.
pub fn generate_fixed(program: &ProtocolProgram, options: &FixedGenOptions) -> Result<FixedGenResult, FixedGenError> {
    let prefix = program.prefix_len().ok_or(NormalizeError::NoPacketPorts)?;
    let program = normalize_program(program, prefix)?;
    let order = program.topo().ok_or(FixedGenError::Graph)?;
    let widths = program.value_widths();

    let mut b = ArchBuilder::new();
    for a in &program.arrays {
        b.ram(RamDecl { id: a.id, elem_width: a.elem_width, num_elems: a.num_elems, latency: options.ram_latency });
    }
    for t in &program.tables {
        b.cam(CamDecl {
            id: t.id,
            key_width: t.key_width,
            num_entries: t.num_entries,
            latency: options.cam_latency,
            cam_impl: options.cam_impl.get(&t.id).copied().unwrap_or(t.cam_impl),
        });
    }

    let mut value: HashMap<PortRef, Timed> = HashMap::new();
    // delayed copies of a hardware port: chains[p][k] is p after k cycles
    let mut chains: HashMap<PortRef, Vec<PortRef>> = HashMap::new();
    let mut stage_of = BTreeMap::new();
    let mut writes: Vec<(NodeId, NodeId, String)> = Vec::new();

    for id in order {
        let node = &program.nodes[&id];
        let start = node.inputs.iter().filter_map(|p| value[p].cycle).max();
        stage_of.insert(id, start.unwrap_or(0));
        let mut ins = Vec::with_capacity(node.inputs.len());
        for p in &node.inputs {
            let t = &value[p];
            let mut src = t.port;
            if let (Some(c), Some(s)) = (t.cycle, start) {
                let chain = chains.entry(t.port).or_insert_with(|| vec![t.port]);
                while chain.len() <= (s - c) as usize {
                    let last = *chain.last().unwrap();
                    chain.push(b.register(last, t.width));
                }
                src = chain[(s - c) as usize];
            }
            ins.push(b.router(vec![src]));
        }
        let w = |p: PortRef| widths[&p];
        let (kind, inputs, latency) = match &node.kind {
            ProtoKind::Constant { value } => {
                (PipeKind::Constant { width: value.width(), value: Some(value.clone()) }, ins, 0)
            }
            ProtoKind::Slice { offset, width } => (PipeKind::Slice { offset: *offset, width: *width }, ins, 0),
            ProtoKind::Merge => (PipeKind::Merge, ins, 0),
            ProtoKind::Extend { width, signed } => (PipeKind::Extend { width: *width, signed: *signed }, ins, 0),
            ProtoKind::Unary { .. } | ProtoKind::Binary { .. } | ProtoKind::Conditional => {
                let op = node.kind.op().unwrap();
                let width = if op.is_comparison() {
                    w(node.inputs[0])
                } else {
                    w(PortRef::out(id))
                };
                let mut slots = vec![PortRef::out(0); ins.len()];
                for (k, p) in ins.into_iter().enumerate() {
                    slots[alu_slot(op, k)] = p;
                }
                (PipeKind::Alu { width, ops: vec![op], latency: options.alu_latency }, slots, options.alu_latency)
            }
            ProtoKind::PacketIn { prefix_len } => {
                (PipeKind::PacketIn { prefix_len: *prefix_len, mtu: options.mtu }, ins, 0)
            }
            ProtoKind::PacketOut { prefix_len } => {
                (PipeKind::PacketOut { prefix_len: *prefix_len, mtu: options.mtu }, ins, 0)
            }
            ProtoKind::ArrayRead { array } => (PipeKind::RamAccess { ram: *array, write: false }, ins, options.ram_latency),
            ProtoKind::ArrayWrite { array } => (PipeKind::RamAccess { ram: *array, write: true }, ins, options.ram_latency),
            ProtoKind::TableLookup { table } => (PipeKind::CamAccess { cam: *table, write: false }, ins, options.cam_latency),
            ProtoKind::TableWrite { table } => (PipeKind::CamAccess { cam: *table, write: true }, ins, options.cam_latency),
        };
        let is_cmp = node.kind.op().is_some_and(|op| op.is_comparison());
        let hw = b.add(kind, inputs);
        if node.kind.is_state_write() {
            let state = match node.kind.array_id() {
                Some(a) => format!("array {a}"),
                None => format!("table {}", node.kind.table_id().unwrap()),
            };
            writes.push((id, hw.node, state));
        }
        let cycle = match node.kind {
            ProtoKind::PacketIn { .. } => Some(0),
            _ => start.map(|s| s + latency),
        };
        for q in 0..node.kind.num_outputs() as u8 {
            let port = if is_cmp { PortRef::new(hw.node, 1) } else { PortRef::new(hw.node, q) };
            let width = widths[&PortRef::new(id, q)];
            value.insert(PortRef::new(id, q), Timed { port, width, cycle });
        }
    }

    // hardware commits writes by node id, the program by its own ids
    for (i, (p1, h1, s1)) in writes.iter().enumerate() {
        for (p2, h2, s2) in &writes[i + 1..] {
            if s1 == s2 && (p1 < p2) != (h1 < h2) {
                return Err(FixedGenError::WriteOrder(s1.clone()));
            }
        }
    }

    let mut config = RuntimeConfig::default();
    config.array_bind = program.arrays.iter().map(|a| (a.id, a.id)).collect();
    config.table_bind = program.tables.iter().map(|t| (t.id, t.id)).collect();
    Ok(FixedGenResult { arch: b.build(), config, stage_of })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::{builtin_program, BUILTIN_NAMES};
    use crate::ir::{validate_pipeline, Opcode, ProgramBuilder};

    #[test]
    fn passthrough_has_no_alus() {
        let mut b = ProgramBuilder::new();
        let (p, l) = b.packet_in(8);
        let cmd = b.constant(2, 0);
        b.packet_out(8, cmd, p, l);
        let r = generate_fixed(&b.build(), &FixedGenOptions::default()).unwrap();
        assert!(validate_pipeline(&r.arch).ok);
        assert_eq!(pipeline_census(&r.arch).alus, 0);
        assert!(r.config.router_select.is_empty() && r.config.alu_op.is_empty() && r.config.const_value.is_empty());
    }

    #[test]
    fn equal_arrivals_need_no_registers() {
        let mut b = ProgramBuilder::new();
        let (p, l) = b.packet_in(4);
        let x = b.slice(p, 0, 16);
        let y = b.slice(p, 16, 16);
        let s = b.binary(Opcode::Add, x, y);
        let out = b.merge(&[s, y]);
        let cmd = b.constant(2, 0);
        b.packet_out(4, cmd, out, l);
        let r = generate_fixed(&b.build(), &FixedGenOptions::default()).unwrap();
        assert!(validate_pipeline(&r.arch).ok);
        let alu = r.arch.find(|k| matches!(k, PipeKind::Alu { .. })).next().unwrap();
        for p in &alu.inputs {
            let src = &r.arch.nodes[&p.node];
            assert_eq!(src.kind, PipeKind::Router);
            assert!(!matches!(r.arch.nodes[&src.inputs[0].node].kind, PipeKind::Register { .. }));
        }
    }

    #[test]
    fn builtins_have_no_flexibility() {
        for name in BUILTIN_NAMES {
            let r = generate_fixed(&builtin_program(name).unwrap(), &FixedGenOptions::default()).unwrap();
            let v = validate_pipeline(&r.arch);
            assert!(v.ok, "{name}: {v}");
            for n in r.arch.nodes.values() {
                match &n.kind {
                    PipeKind::Router => assert_eq!(n.inputs.len(), 1),
                    PipeKind::Alu { ops, .. } => assert_eq!(ops.len(), 1),
                    PipeKind::Constant { value, .. } => assert!(value.is_some()),
                    _ => {}
                }
            }
        }
    }
}
