// SPDX-License-Identifier: Apache-2.0

//! Tiny random (program, architecture) pairs and an exhaustive
//! configuration oracle that shares no code with the SAT encoder.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap};

use rand::seq::SliceRandom;
use rand::Rng;
use rppp::bits::Bits;
use rppp::ir::{
    alu_slot, ArchBuilder, NodeId, Opcode, PipeKind, PipelineArch, PortRef, ProgramBuilder, ProtoKind,
    ProtocolProgram, RuntimeConfig, DEFAULT_MTU, LENGTH_WIDTH,
};

pub const TINY_OPS: [Opcode; 6] = [Opcode::Add, Opcode::Sub, Opcode::Xor, Opcode::And, Opcode::Eq, Opcode::Ltu];

fn subset<T: Copy>(rng: &mut impl Rng, pool: &[T], max: usize) -> Vec<T> {
    let n = rng.gen_range(2..=max.min(pool.len()));
    pool.choose_multiple(rng, n).copied().collect()
}

/// One stage of 8-bit ALUs over two header bytes and two constants, with
/// flag extenders and bypass registers feeding two output routers. At most
/// eight configurable nodes, each with at most four choices.
pub fn tiny_arch(rng: &mut impl Rng) -> PipelineArch {
    tiny_arch_with(rng, false)
}

/// As [`tiny_arch`]; `redundant` makes the second ALU a copy of the first,
/// so most feasible programs have several mappings.
pub fn tiny_arch_with(rng: &mut impl Rng, redundant: bool) -> PipelineArch {
    let mut b = ArchBuilder::new();
    let pin = b.add(PipeKind::PacketIn { prefix_len: 2, mtu: DEFAULT_MTU }, vec![]);
    let len = PortRef::new(pin.node, 1);
    let s0 = b.add(PipeKind::Slice { offset: 0, width: 8 }, vec![pin]);
    let s1 = b.add(PipeKind::Slice { offset: 8, width: 8 }, vec![pin]);
    let k = b.constant(8, None);
    let d = b.constant(8, Some(rng.gen_range(0..4)));
    let sources = [s0, s1, k, d];
    let mut outs = Vec::new();
    let count = if redundant { 2 } else { rng.gen_range(1..=2) };
    let mut shape = None;
    for _ in 0..count {
        let (ops, r0, r1) = match (&shape, redundant) {
            (Some(s), true) => Clone::clone(s),
            _ => (subset(rng, &TINY_OPS, 4), subset(rng, &sources, 4), subset(rng, &sources, 4)),
        };
        shape = Some((ops.clone(), r0.clone(), r1.clone()));
        let (r0, r1) = (b.router(r0), b.router(r1));
        let alu = b.alu(8, ops, 1, vec![r0, r1]);
        outs.push(alu);
        outs.push(b.add(PipeKind::Extend { width: 8, signed: false }, vec![PortRef::new(alu.node, 1)]));
    }
    outs.push(b.register(s0, 8));
    outs.push(b.register(s1, 8));
    let (o0, o1) = if redundant {
        // both ALU results and flags stay reachable
        let pick = |rng: &mut dyn rand::RngCore, i: usize| vec![outs[i], outs[i + 2], outs[4 + rng.gen_range(0..2)]];
        (pick(rng, 0), pick(rng, 1))
    } else {
        (subset(rng, &outs, 4), subset(rng, &outs, 4))
    };
    let (o0, o1) = (b.router(o0), b.router(o1));
    let prefix = b.add(PipeKind::Merge, vec![o0, o1]);
    let cmd = b.constant(2, Some(0));
    let cmd = b.register(cmd, 2);
    let len = b.register(len, LENGTH_WIDTH);
    b.add(PipeKind::PacketOut { prefix_len: 2, mtu: DEFAULT_MTU }, vec![cmd, prefix, len]);
    b.build()
}

/// Up to two operations over the header bytes and small constants; output
/// bytes drawn from everything computed. MUL never appears in
/// [`tiny_arch`], so it forces some instances infeasible.
pub fn tiny_program(rng: &mut impl Rng) -> ProtocolProgram {
    let mut b = ProgramBuilder::new();
    let (p, l) = b.packet_in(2);
    let a = b.slice(p, 0, 8);
    let c = b.slice(p, 8, 8);
    let mut pool = vec![a, c];
    if rng.gen_bool(0.4) {
        pool.push(b.constant(8, rng.gen_range(0..4)));
    }
    let mut results = Vec::new();
    for _ in 0..rng.gen_range(0..=2) {
        let op = if rng.gen_bool(0.05) { Opcode::Mul } else { *TINY_OPS.choose(rng).unwrap() };
        let x = *pool.choose(rng).unwrap();
        let y = *pool.choose(rng).unwrap();
        let r = b.binary(op, x, y);
        let r = if op.is_comparison() { b.zext(r, 8) } else { r };
        results.push(r);
    }
    if rng.gen_bool(0.15) && !results.is_empty() {
        // chained operation: needs two stages
        let r = b.binary(Opcode::Add, results[0], a);
        results.push(r);
    }
    pool.extend(&results);
    let pick = |rng: &mut dyn rand::RngCore, pool: &[PortRef], results: &[PortRef]| {
        if !results.is_empty() && rng.gen_bool(0.7) {
            *results.choose(rng).unwrap()
        } else {
            *pool.choose(rng).unwrap()
        }
    };
    let o0 = pick(rng, &pool, &results);
    let o1 = pick(rng, &pool, &results);
    let prefix = b.merge(&[o0, o1]);
    let cmd = b.constant(2, 0);
    b.packet_out(2, cmd, prefix, l);
    b.build()
}

/// Configurable nodes of `arch` with their choice counts.
pub fn choice_points(arch: &PipelineArch) -> Vec<(NodeId, usize)> {
    arch.nodes
        .values()
        .filter_map(|n| match &n.kind {
            PipeKind::Router if n.inputs.len() > 1 => Some((n.id, n.inputs.len())),
            PipeKind::Alu { ops, .. } if ops.len() > 1 => Some((n.id, ops.len())),
            _ => None,
        })
        .collect()
}

struct Matcher<'a> {
    arch: &'a PipelineArch,
    program: &'a ProtocolProgram,
    select: &'a HashMap<NodeId, usize>,
    memo: HashMap<(PortRef, PortRef), Option<Vec<(NodeId, Bits)>>>,
}

impl Matcher<'_> {
    fn width_hw(&self, h: PortRef) -> Option<u32> {
        let n = &self.arch.nodes[&h.node];
        match &n.kind {
            PipeKind::Register { width } | PipeKind::Constant { width, .. } | PipeKind::Slice { width, .. } => {
                Some(*width)
            }
            PipeKind::Extend { width, .. } => Some(*width),
            PipeKind::Router => self.width_hw(n.inputs[0]),
            PipeKind::Merge => n.inputs.iter().map(|p| self.width_hw(*p)).sum(),
            PipeKind::Alu { width, .. } => Some(if h.port == 0 { *width } else { 1 }),
            PipeKind::PacketIn { prefix_len, .. } => Some(if h.port == 0 { prefix_len * 8 } else { LENGTH_WIDTH }),
            _ => None,
        }
    }

    fn width_pr(&self, l: PortRef) -> Option<u32> {
        let n = &self.program.nodes[&l.node];
        match &n.kind {
            ProtoKind::Constant { value } => Some(value.width()),
            ProtoKind::Slice { width, .. } | ProtoKind::Extend { width, .. } => Some(*width),
            ProtoKind::Merge => n.inputs.iter().map(|p| self.width_pr(*p)).sum(),
            ProtoKind::Binary { op } if op.is_comparison() => Some(1),
            ProtoKind::Binary { .. } => self.width_pr(n.inputs[0]),
            ProtoKind::PacketIn { prefix_len } => Some(if l.port == 0 { prefix_len * 8 } else { LENGTH_WIDTH }),
            _ => None,
        }
    }

    /// Runtime-constant values required for `h` to carry `l`, or None.
    fn go(&mut self, h: PortRef, l: PortRef) -> Option<Vec<(NodeId, Bits)>> {
        if let Some(r) = self.memo.get(&(h, l)) {
            return r.clone();
        }
        let r = self.compute(h, l);
        self.memo.insert((h, l), r.clone());
        r
    }

    fn all(&mut self, pairs: Vec<(PortRef, PortRef)>) -> Option<Vec<(NodeId, Bits)>> {
        let mut out = Vec::new();
        for (a, b) in pairs {
            out.extend(self.go(a, b)?);
        }
        Some(out)
    }

    fn compute(&mut self, h: PortRef, l: PortRef) -> Option<Vec<(NodeId, Bits)>> {
        if self.width_hw(h) != self.width_pr(l) {
            return None;
        }
        let hn = &self.arch.nodes[&h.node];
        let ln = &self.program.nodes[&l.node];
        let zip = |hn: &rppp::ir::PipeNode, ln: &rppp::ir::ProtoNode| {
            (hn.inputs.len() == ln.inputs.len())
                .then(|| hn.inputs.iter().copied().zip(ln.inputs.iter().copied()).collect::<Vec<_>>())
        };
        match (&hn.kind, &ln.kind) {
            (PipeKind::Router, _) => {
                let s = self.select.get(&hn.id).copied().unwrap_or(0);
                self.go(hn.inputs[s], l)
            }
            (PipeKind::Register { .. }, _) => self.go(hn.inputs[0], l),
            (PipeKind::Constant { value: Some(v), .. }, ProtoKind::Constant { value }) => (v == value).then(Vec::new),
            (PipeKind::Constant { value: None, .. }, ProtoKind::Constant { value }) => Some(vec![(hn.id, value.clone())]),
            (PipeKind::PacketIn { prefix_len, .. }, ProtoKind::PacketIn { prefix_len: q }) => {
                (prefix_len == q && h.port == l.port).then(Vec::new)
            }
            (PipeKind::Slice { offset, width }, ProtoKind::Slice { offset: o, width: w }) if offset == o && width == w => {
                self.all(zip(hn, ln)?)
            }
            (PipeKind::Extend { width, signed }, ProtoKind::Extend { width: w, signed: s }) if width == w && signed == s => {
                self.all(zip(hn, ln)?)
            }
            (PipeKind::Merge, ProtoKind::Merge) => self.all(zip(hn, ln)?),
            (PipeKind::PacketOut { prefix_len, .. }, ProtoKind::PacketOut { prefix_len: q }) if prefix_len == q => {
                self.all(zip(hn, ln)?)
            }
            (PipeKind::Alu { ops, .. }, ProtoKind::Binary { op }) => {
                let chosen = ops[self.select.get(&hn.id).copied().unwrap_or(0)];
                if chosen != *op || (h.port == 1) != op.is_comparison() {
                    return None;
                }
                let pairs = (0..2).map(|k| (hn.inputs[alu_slot(*op, k)], ln.inputs[k])).collect();
                self.all(pairs)
            }
            _ => None,
        }
    }
}

/// Constant values implied if `arch` under `select` computes the program's
/// packet output, or None when it does not.
pub fn structural_match(
    arch: &PipelineArch,
    program: &ProtocolProgram,
    select: &HashMap<NodeId, usize>,
) -> Option<BTreeMap<NodeId, Bits>> {
    let mut m = Matcher { arch, program, select, memo: HashMap::new() };
    let h = PortRef::out(arch.packet_out()?.id);
    let l = PortRef::out(program.packet_out()?.id);
    let mut consts = BTreeMap::new();
    for (id, v) in m.go(h, l)? {
        if consts.insert(id, v.clone()).is_some_and(|old| old != v) {
            return None;
        }
    }
    Some(consts)
}

/// Whether any configuration of `arch` computes `program`, by enumerating
/// every router selection and ALU opcode.
pub fn brute_force_feasible(arch: &PipelineArch, program: &ProtocolProgram) -> bool {
    let points = choice_points(arch);
    let mut digits = vec![0usize; points.len()];
    loop {
        let select: HashMap<NodeId, usize> = points.iter().zip(&digits).map(|(p, &d)| (p.0, d)).collect();
        if structural_match(arch, program, &select).is_some() {
            return true;
        }
        let mut i = 0;
        loop {
            if i == digits.len() {
                return false;
            }
            digits[i] += 1;
            if digits[i] < points[i].1 {
                break;
            }
            digits[i] = 0;
            i += 1;
        }
    }
}

/// Selection map of a compiled config in the matcher's terms.
pub fn selection_of(arch: &PipelineArch, cfg: &RuntimeConfig) -> HashMap<NodeId, usize> {
    let mut s = HashMap::new();
    for (&r, &i) in &cfg.router_select {
        s.insert(r, i as usize);
    }
    for (&a, op) in &cfg.alu_op {
        if let PipeKind::Alu { ops, .. } = &arch.nodes[&a].kind {
            s.insert(a, ops.iter().position(|o| o == op).unwrap());
        }
    }
    s
}
