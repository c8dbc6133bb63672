// SPDX-License-Identifier: Apache-2.0

//! Packet-at-a-time executors for programs and configured pipelines.
//!
//! Both graphs are lowered to the same step list and run by one engine.
//! Reads observe the state as it was before the packet; writes are buffered
//! and committed after the packet in ascending node id order.

use std::collections::HashMap;

use super::eval::{eval_op, EvalError};
use super::state::StateStore;
use crate::bits::Bits;
use crate::ir::{
    alu_slot, NodeId, Opcode, PipeKind, PipelineArch, PortRef, ProtoKind, ProtocolProgram,
    RuntimeConfig, Width, CMD_FORWARD, CMD_TRUNCATE, DEFAULT_MTU, LENGTH_WIDTH,
};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PacketResult {
    Forward(Vec<u8>),
    Drop,
}

impl PacketResult {
    pub fn bytes(&self) -> Option<&[u8]> {
        match self {
            PacketResult::Forward(b) => Some(b),
            PacketResult::Drop => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("graph cannot be executed: {0}")]
    Graph(String),
    #[error("invalid runtime config: {0}")]
    Config(String),
    #[error("packet of {len} bytes exceeds MTU {mtu}")]
    Mtu { len: usize, mtu: u32 },
    #[error("memory {0} has no state")]
    UnboundMemory(u32),
    #[error("node {node}: {source}")]
    Eval { node: NodeId, source: EvalError },
}

#[derive(Clone, Debug)]
enum Op {
    Const(Bits),
    Pass,
    Slice { offset: u32, width: Width },
    Merge,
    Extend { width: Width, signed: bool },
    /// Program compute node: operands in input order.
    Compute(Opcode),
    /// Pipeline ALU: operands gathered by slot, result and flag outputs.
    Alu { op: Opcode, width: Width },
    PacketIn(u32),
    PacketOut(u32),
    ArrayRead(u32),
    ArrayWrite(u32),
    TableLookup(u32),
    TableWrite(u32),
}

#[derive(Clone, Debug)]
struct Step {
    id: NodeId,
    op: Op,
    inputs: Vec<usize>,
    out: usize,
}

enum Write {
    Array { mem: u32, index: Bits, value: Bits },
    Table { mem: u32, slot: usize, key: Bits },
}

/// A graph lowered for repeated execution.
#[derive(Clone, Debug)]
pub struct Executor {
    steps: Vec<Step>,
    slot_of: HashMap<NodeId, usize>,
    values: Vec<Bits>,
    mtu: u32,
}

fn lower(
    order: Vec<NodeId>,
    outputs: impl Fn(NodeId) -> usize,
    mut build: impl FnMut(NodeId, &dyn Fn(PortRef) -> usize) -> Result<(Op, Vec<usize>), SimError>,
) -> Result<(Vec<Step>, HashMap<NodeId, usize>, usize), SimError> {
    let mut slot_of = HashMap::new();
    let mut next = 0;
    for &id in &order {
        slot_of.insert(id, next);
        next += outputs(id).max(1);
    }
    let resolve = |p: PortRef| slot_of[&p.node] + p.port as usize;
    let mut steps = Vec::with_capacity(order.len());
    for id in order {
        let (op, inputs) = build(id, &resolve)?;
        steps.push(Step { id, op, inputs, out: slot_of[&id] });
    }
    Ok((steps, slot_of, next))
}

impl Executor {
    pub fn for_program(program: &ProtocolProgram) -> Result<Self, SimError> {
        let order = program.topo().ok_or_else(|| SimError::Graph("cycle or dangling input".into()))?;
        let (steps, slot_of, n) = lower(
            order,
            |id| program.nodes[&id].kind.num_outputs(),
            |id, resolve| {
                let node = &program.nodes[&id];
                let ins: Vec<usize> = node.inputs.iter().map(|p| resolve(*p)).collect();
                let op = match &node.kind {
                    ProtoKind::Constant { value } => Op::Const(value.clone()),
                    ProtoKind::Slice { offset, width } => Op::Slice { offset: *offset, width: *width },
                    ProtoKind::Merge => Op::Merge,
                    ProtoKind::Extend { width, signed } => Op::Extend { width: *width, signed: *signed },
                    ProtoKind::Unary { op } | ProtoKind::Binary { op } => Op::Compute(*op),
                    ProtoKind::Conditional => Op::Compute(Opcode::Mux),
                    ProtoKind::PacketIn { prefix_len } => Op::PacketIn(*prefix_len),
                    ProtoKind::PacketOut { prefix_len } => Op::PacketOut(*prefix_len),
                    ProtoKind::ArrayRead { array } => Op::ArrayRead(*array),
                    ProtoKind::ArrayWrite { array } => Op::ArrayWrite(*array),
                    ProtoKind::TableLookup { table } => Op::TableLookup(*table),
                    ProtoKind::TableWrite { table } => Op::TableWrite(*table),
                };
                Ok((op, ins))
            },
        )?;
        Ok(Executor { steps, slot_of, values: vec![Bits::zero(1); n], mtu: DEFAULT_MTU })
    }

    /// Lowers `arch` under `config`; unset selections take their defaults.
    pub fn for_pipeline(arch: &PipelineArch, config: &RuntimeConfig) -> Result<Self, SimError> {
        config.check(arch).map_err(SimError::Config)?;
        let config = config.materialized(arch);
        let order = arch.topo().ok_or_else(|| SimError::Graph("cycle or dangling input".into()))?;
        let (steps, slot_of, n) = lower(
            order,
            |id| arch.nodes[&id].kind.num_outputs(),
            |id, resolve| {
                let node = &arch.nodes[&id];
                let ins: Vec<usize> = node.inputs.iter().map(|p| resolve(*p)).collect();
                let op = match &node.kind {
                    PipeKind::Register { .. } => Op::Pass,
                    PipeKind::Router => {
                        let sel = config.router_select.get(&id).copied().unwrap_or(0) as usize;
                        let pick = *ins.get(sel).ok_or_else(|| SimError::Graph(format!("router {id} has no inputs")))?;
                        return Ok((Op::Pass, vec![pick]));
                    }
                    PipeKind::Constant { value: Some(v), .. } => Op::Const(v.clone()),
                    PipeKind::Constant { width, value: None } => {
                        Op::Const(config.const_value.get(&id).cloned().unwrap_or_else(|| Bits::zero(*width)))
                    }
                    PipeKind::Slice { offset, width } => Op::Slice { offset: *offset, width: *width },
                    PipeKind::Merge => Op::Merge,
                    PipeKind::Extend { width, signed } => Op::Extend { width: *width, signed: *signed },
                    PipeKind::Alu { width, ops, .. } => {
                        let op = config.alu_op.get(&id).copied().unwrap_or(ops[0]);
                        let operands = (0..op.arity())
                            .map(|k| ins.get(alu_slot(op, k)).copied())
                            .collect::<Option<Vec<_>>>()
                            .ok_or_else(|| SimError::Graph(format!("alu {id} lacks inputs for {op}")))?;
                        return Ok((Op::Alu { op, width: *width }, operands));
                    }
                    PipeKind::PacketIn { prefix_len, .. } => Op::PacketIn(*prefix_len),
                    PipeKind::PacketOut { prefix_len, .. } => Op::PacketOut(*prefix_len),
                    PipeKind::RamAccess { ram, write: false } => Op::ArrayRead(*ram),
                    PipeKind::RamAccess { ram, write: true } => Op::ArrayWrite(*ram),
                    PipeKind::CamAccess { cam, write: false } => Op::TableLookup(*cam),
                    PipeKind::CamAccess { cam, write: true } => Op::TableWrite(*cam),
                };
                Ok((op, ins))
            },
        )?;
        let mtu = match arch.packet_in().map(|n| &n.kind) {
            Some(PipeKind::PacketIn { mtu, .. }) => *mtu,
            _ => DEFAULT_MTU,
        };
        Ok(Executor { steps, slot_of, values: vec![Bits::zero(1); n], mtu })
    }

    /// Value of `port` during the most recent packet.
    pub fn value(&self, port: PortRef) -> Option<&Bits> {
        self.slot_of.get(&port.node).map(|s| &self.values[s + port.port as usize])
    }

    /// Processes one packet, committing its writes into `state`.
    pub fn run(&mut self, state: &mut StateStore, packet: &[u8]) -> Result<PacketResult, SimError> {
        if packet.len() > self.mtu as usize {
            return Err(SimError::Mtu { len: packet.len(), mtu: self.mtu });
        }
        let mut writes: Vec<(NodeId, Write)> = Vec::new();
        let mut result = PacketResult::Drop;
        for step in &self.steps {
            let v = &self.values;
            let arg = |k: usize| &v[step.inputs[k]];
            let eval = |op: Opcode, operands: &[Bits], width: Width| {
                eval_op(op, operands, width).map_err(|source| SimError::Eval { node: step.id, source })
            };
            let out: Bits = match &step.op {
                Op::Const(b) => b.clone(),
                Op::Pass => arg(0).clone(),
                Op::Slice { offset, width } => arg(0).slice(*offset, *width),
                Op::Merge => Bits::concat(step.inputs.iter().map(|&s| &v[s])),
                Op::Extend { width, signed } => {
                    if *signed {
                        arg(0).sext(*width)
                    } else {
                        arg(0).zext(*width)
                    }
                }
                Op::Compute(op) => {
                    let operands: Vec<Bits> = step.inputs.iter().map(|&s| v[s].clone()).collect();
                    let width = operands[if *op == Opcode::Mux { 1 } else { 0 }].width();
                    eval(*op, &operands, width)?
                }
                Op::Alu { op, width } => {
                    let operands: Vec<Bits> = step.inputs.iter().map(|&s| v[s].clone()).collect();
                    let r = eval(*op, &operands, *width)?;
                    let (result, flag) = if op.is_comparison() {
                        (r.zext(*width), r)
                    } else {
                        (r, Bits::zero(1))
                    };
                    self.values[step.out + 1] = flag;
                    self.values[step.out] = result;
                    continue;
                }
                Op::PacketIn(n) => {
                    let n = *n as usize;
                    let prefix = Bits::from_bytes_le(8 * n as u32, &packet[..packet.len().min(n)]);
                    let len = packet.len().min(u16::MAX as usize) as u64;
                    self.values[step.out + 1] = Bits::from_u64(LENGTH_WIDTH, len);
                    self.values[step.out] = prefix;
                    continue;
                }
                Op::PacketOut(n) => {
                    let n = *n as usize;
                    let cmd = arg(0).low_u64();
                    let keep = (arg(2).low_u64() as usize).min(n);
                    result = if cmd == CMD_FORWARD || cmd == CMD_TRUNCATE {
                        let mut bytes = arg(1).to_bytes_le(n);
                        bytes.truncate(keep);
                        if cmd == CMD_FORWARD && packet.len() > n {
                            bytes.extend_from_slice(&packet[n..]);
                        }
                        PacketResult::Forward(bytes)
                    } else {
                        PacketResult::Drop
                    };
                    continue;
                }
                Op::ArrayRead(mem) => state.arrays.get(mem).ok_or(SimError::UnboundMemory(*mem))?.read(arg(0)),
                Op::ArrayWrite(mem) => {
                    state.arrays.get(mem).ok_or(SimError::UnboundMemory(*mem))?;
                    if step.inputs.len() < 3 || !arg(2).is_zero() {
                        writes.push((step.id, Write::Array { mem: *mem, index: arg(0).clone(), value: arg(1).clone() }));
                    }
                    continue;
                }
                Op::TableLookup(mem) => {
                    let cam = state.tables.get(mem).ok_or(SimError::UnboundMemory(*mem))?;
                    cam.encode_result(cam.lookup(arg(0), state.hash_seed))
                }
                Op::TableWrite(mem) => {
                    let cam = state.tables.get(mem).ok_or(SimError::UnboundMemory(*mem))?;
                    let enabled = step.inputs.len() < 3 || !arg(2).is_zero();
                    let slot = if enabled { cam.write_slot(arg(0), state.hash_seed) } else { None };
                    if let Some(slot) = slot {
                        writes.push((step.id, Write::Table { mem: *mem, slot, key: arg(0).clone() }));
                    }
                    cam.encode_result(slot)
                }
            };
            self.values[step.out] = out;
        }
        writes.sort_by_key(|(id, _)| *id);
        for (_, w) in writes {
            match w {
                Write::Array { mem, index, value } => {
                    let arr = state.arrays.get_mut(&mem).expect("checked above");
                    if let Some(slot) = index.to_u64().and_then(|i| arr.values.get_mut(i as usize)) {
                        *slot = value;
                    }
                }
                Write::Table { mem, slot, key } => {
                    state.tables.get_mut(&mem).expect("checked above").entries[slot] = Some(key);
                }
            }
        }
        Ok(result)
    }
}

/// Runs one packet through `program`.
pub fn run_protocol(
    program: &ProtocolProgram,
    state: &StateStore,
    packet: &[u8],
) -> Result<(PacketResult, StateStore), SimError> {
    let mut s = state.clone();
    let r = Executor::for_program(program)?.run(&mut s, packet)?;
    Ok((r, s))
}

/// Runs one packet through `arch` configured by `config`.
pub fn run_pipeline(
    arch: &PipelineArch,
    config: &RuntimeConfig,
    state: &StateStore,
    packet: &[u8],
) -> Result<(PacketResult, StateStore), SimError> {
    let mut s = state.clone();
    let r = Executor::for_pipeline(arch, config)?.run(&mut s, packet)?;
    Ok((r, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{ArchBuilder, CamImpl, ProgramBuilder};

    fn passthrough(n: u32) -> ProtocolProgram {
        let mut b = ProgramBuilder::new();
        let (p, l) = b.packet_in(n);
        let cmd = b.constant(2, 0);
        b.packet_out(n, cmd, p, l);
        b.build()
    }

    #[test]
    fn passthrough_is_identity() {
        let prog = passthrough(4);
        let st = StateStore::for_program(&prog);
        for pkt in [vec![], vec![1, 2], vec![1, 2, 3, 4, 5, 6, 7]] {
            let (r, _) = run_protocol(&prog, &st, &pkt).unwrap();
            assert_eq!(r, PacketResult::Forward(pkt));
        }
    }

    #[test]
    fn commands() {
        let mut b = ProgramBuilder::new();
        let (p, l) = b.packet_in(2);
        let c = b.slice(p, 0, 2);
        b.packet_out(2, c, p, l);
        let prog = b.build();
        let st = StateStore::default();
        assert_eq!(run_protocol(&prog, &st, &[0, 9, 8]).unwrap().0, PacketResult::Forward(vec![0, 9, 8]));
        assert_eq!(run_protocol(&prog, &st, &[1, 9, 8]).unwrap().0, PacketResult::Forward(vec![1, 9]));
        assert_eq!(run_protocol(&prog, &st, &[2, 9, 8]).unwrap().0, PacketResult::Drop);
    }

    #[test]
    fn reads_see_pre_packet_state() {
        // counter[0] += 1, output the old value in byte 0
        let mut b = ProgramBuilder::new();
        b.declare_array(0, 8, 1);
        let (p, l) = b.packet_in(1);
        let idx = b.constant(1, 0);
        let old = b.array_read(0, idx);
        let one = b.constant(8, 1);
        let inc = b.binary(Opcode::Add, old, one);
        b.array_write(0, idx, inc, None);
        let cmd = b.constant(2, 0);
        b.packet_out(1, cmd, old, l);
        let _ = p;
        let prog = b.build();
        let mut ex = Executor::for_program(&prog).unwrap();
        let mut st = StateStore::for_program(&prog);
        for k in 0..3u8 {
            assert_eq!(ex.run(&mut st, &[0xAA]).unwrap(), PacketResult::Forward(vec![k]));
        }
        assert_eq!(st.arrays[&0].values[0], Bits::from_u64(8, 3));
    }

    #[test]
    fn table_write_then_lookup_next_packet() {
        let mut b = ProgramBuilder::new();
        b.declare_table(0, 8, 4, CamImpl::RegisterCam);
        let (p, l) = b.packet_in(2);
        let key = b.slice(p, 0, 8);
        let hit = b.table_lookup(0, key);
        let hint = b.constant(2, 0);
        let w = b.table_write(0, key, hint, None);
        let m = b.merge(&[hit, w]);
        let pad = b.constant(10, 0);
        let out = b.merge(&[m, pad]);
        let cmd = b.constant(2, 1);
        b.packet_out(2, cmd, out, l);
        let prog = b.build();
        let mut ex = Executor::for_program(&prog).unwrap();
        let mut st = StateStore::for_program(&prog);
        // first packet: miss, write to entry 0 (valid bit 2)
        assert_eq!(ex.run(&mut st, &[7, 0]).unwrap(), PacketResult::Forward(vec![0b100_000, 0]));
        assert_eq!(ex.run(&mut st, &[7, 0]).unwrap(), PacketResult::Forward(vec![0b100_100, 0]));
        assert_eq!(ex.run(&mut st, &[8, 0]).unwrap(), PacketResult::Forward(vec![0b101_000, 0]));
    }

    #[test]
    fn alu_flag_and_router() {
        let mut b = ArchBuilder::new();
        let pin = b.add(PipeKind::PacketIn { prefix_len: 1, mtu: 1500 }, vec![]);
        let len = PortRef::new(pin.node, 1);
        let k = b.add(PipeKind::Constant { width: 8, value: None }, vec![]);
        let r0 = b.router(vec![pin, k]);
        let r1 = b.router(vec![k, pin]);
        let alu = b.alu(8, vec![Opcode::Add, Opcode::Eq], 1, vec![r0, r1]);
        let flag = PortRef::new(alu.node, 1);
        let fx = b.add(PipeKind::Extend { width: 8, signed: false }, vec![flag]);
        let out = b.router(vec![alu, fx]);
        let lr = b.register(len, 16);
        let cmd = b.add(PipeKind::Constant { width: 2, value: Some(Bits::zero(2)) }, vec![]);
        let cr = b.register(cmd, 2);
        b.add(PipeKind::PacketOut { prefix_len: 1, mtu: 1500 }, vec![cr, out, lr]);
        let arch = b.build();
        let mut cfg = RuntimeConfig::default();
        cfg.const_value.insert(k.node, Bits::from_u64(8, 5));
        cfg.alu_op.insert(alu.node, Opcode::Add);
        let st = StateStore::default();
        assert_eq!(run_pipeline(&arch, &cfg, &st, &[10]).unwrap().0, PacketResult::Forward(vec![15]));
        cfg.alu_op.insert(alu.node, Opcode::Eq);
        cfg.router_select.insert(out.node, 1);
        assert_eq!(run_pipeline(&arch, &cfg, &st, &[5]).unwrap().0, PacketResult::Forward(vec![1]));
        cfg.router_select.insert(out.node, 2);
        assert!(matches!(run_pipeline(&arch, &cfg, &st, &[5]), Err(SimError::Config(_))));
    }
}
