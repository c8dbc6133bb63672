// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashMap};

use super::{index_width, topo_order, CamImpl, NodeId, Opcode, PortRef, Width, LENGTH_WIDTH};
use crate::bits::Bits;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ProtoKind {
    Constant { value: Bits },
    Slice { offset: u32, width: Width },
    Merge,
    Extend { width: Width, signed: bool },
    Unary { op: Opcode },
    Binary { op: Opcode },
    Conditional,
    PacketIn { prefix_len: u32 },
    PacketOut { prefix_len: u32 },
    ArrayRead { array: u32 },
    ArrayWrite { array: u32 },
    TableLookup { table: u32 },
    TableWrite { table: u32 },
}

impl ProtoKind {
    pub fn name(&self) -> &'static str {
        match self {
            ProtoKind::Constant { .. } => "Constant",
            ProtoKind::Slice { .. } => "Slice",
            ProtoKind::Merge => "Merge",
            ProtoKind::Extend { .. } => "Extend",
            ProtoKind::Unary { .. } => "Unary",
            ProtoKind::Binary { .. } => "Binary",
            ProtoKind::Conditional => "Conditional",
            ProtoKind::PacketIn { .. } => "PacketIn",
            ProtoKind::PacketOut { .. } => "PacketOut",
            ProtoKind::ArrayRead { .. } => "ArrayRead",
            ProtoKind::ArrayWrite { .. } => "ArrayWrite",
            ProtoKind::TableLookup { .. } => "TableLookup",
            ProtoKind::TableWrite { .. } => "TableWrite",
        }
    }

    /// Opcode for compute nodes; conditionals are MUX.
    pub fn op(&self) -> Option<Opcode> {
        match self {
            ProtoKind::Unary { op } | ProtoKind::Binary { op } => Some(*op),
            ProtoKind::Conditional => Some(Opcode::Mux),
            _ => None,
        }
    }

    pub fn num_outputs(&self) -> usize {
        match self {
            ProtoKind::PacketIn { .. } => 2,
            ProtoKind::PacketOut { .. } | ProtoKind::ArrayWrite { .. } => 0,
            _ => 1,
        }
    }

    /// Accepted input counts (inclusive range).
    pub fn arity(&self) -> (usize, usize) {
        match self {
            ProtoKind::Constant { .. } | ProtoKind::PacketIn { .. } => (0, 0),
            ProtoKind::Slice { .. }
            | ProtoKind::Extend { .. }
            | ProtoKind::Unary { .. }
            | ProtoKind::ArrayRead { .. }
            | ProtoKind::TableLookup { .. } => (1, 1),
            ProtoKind::Binary { .. } => (2, 2),
            ProtoKind::Conditional | ProtoKind::PacketOut { .. } => (3, 3),
            // the enable input is optional and defaults to constant 1
            ProtoKind::ArrayWrite { .. } | ProtoKind::TableWrite { .. } => (2, 3),
            ProtoKind::Merge => (2, usize::MAX),
        }
    }

    pub fn is_state_write(&self) -> bool {
        matches!(self, ProtoKind::ArrayWrite { .. } | ProtoKind::TableWrite { .. })
    }

    pub fn array_id(&self) -> Option<u32> {
        match self {
            ProtoKind::ArrayRead { array } | ProtoKind::ArrayWrite { array } => Some(*array),
            _ => None,
        }
    }

    pub fn table_id(&self) -> Option<u32> {
        match self {
            ProtoKind::TableLookup { table } | ProtoKind::TableWrite { table } => Some(*table),
            _ => None,
        }
    }

    pub fn is_state(&self) -> bool {
        matches!(
            self,
            ProtoKind::ArrayRead { .. }
                | ProtoKind::ArrayWrite { .. }
                | ProtoKind::TableLookup { .. }
                | ProtoKind::TableWrite { .. }
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProtoNode {
    pub id: NodeId,
    pub kind: ProtoKind,
    pub inputs: Vec<PortRef>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ArrayDecl {
    pub id: u32,
    pub elem_width: Width,
    pub num_elems: u32,
}

impl ArrayDecl {
    pub fn index_width(&self) -> Width {
        index_width(self.num_elems)
    }
}

/// Lookup table declaration. Tables hold keys only.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TableDecl {
    pub id: u32,
    pub key_width: Width,
    pub num_entries: u32,
    /// Lookup semantics the program is written against.
    pub cam_impl: CamImpl,
}

impl TableDecl {
    pub fn index_width(&self) -> Width {
        index_width(self.num_entries)
    }

    /// Width of lookup/write results: valid bit above the index.
    pub fn result_width(&self) -> Width {
        self.index_width() + 1
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProtocolProgram {
    pub nodes: BTreeMap<NodeId, ProtoNode>,
    pub arrays: Vec<ArrayDecl>,
    pub tables: Vec<TableDecl>,
}

impl ProtocolProgram {
    pub fn node(&self, id: NodeId) -> Option<&ProtoNode> {
        self.nodes.get(&id)
    }

    pub fn array(&self, id: u32) -> Option<&ArrayDecl> {
        self.arrays.iter().find(|a| a.id == id)
    }

    pub fn table(&self, id: u32) -> Option<&TableDecl> {
        self.tables.iter().find(|t| t.id == id)
    }

    pub fn next_id(&self) -> NodeId {
        self.nodes.keys().next_back().map_or(0, |k| k + 1)
    }

    pub fn find(&self, pred: impl Fn(&ProtoKind) -> bool) -> impl Iterator<Item = &ProtoNode> {
        self.nodes.values().filter(move |n| pred(&n.kind))
    }

    pub fn packet_in(&self) -> Option<&ProtoNode> {
        self.find(|k| matches!(k, ProtoKind::PacketIn { .. })).next()
    }

    pub fn packet_out(&self) -> Option<&ProtoNode> {
        self.find(|k| matches!(k, ProtoKind::PacketOut { .. })).next()
    }

    pub fn prefix_len(&self) -> Option<u32> {
        match self.packet_in()?.kind {
            ProtoKind::PacketIn { prefix_len } => Some(prefix_len),
            _ => None,
        }
    }

    /// Nodes in a dependency-respecting order, or `None` on a cycle or
    /// dangling input.
    pub fn topo(&self) -> Option<Vec<NodeId>> {
        topo_order(self.nodes.values().map(|n| (n.id, n.inputs.as_slice()))).ok()
    }

    /// Width of every output port whose width follows from the typing rules.
    /// Ill-typed nodes are skipped along with everything downstream.
    pub fn value_widths(&self) -> HashMap<PortRef, Width> {
        let mut widths = HashMap::new();
        let Some(order) = self.topo() else {
            return widths;
        };
        for id in order {
            let n = &self.nodes[&id];
            let ins: Option<Vec<Width>> = n.inputs.iter().map(|p| widths.get(p).copied()).collect();
            let Some(ins) = ins else { continue };
            let w = match &n.kind {
                ProtoKind::Constant { value } => Some(value.width()),
                ProtoKind::Slice { width, .. } => Some(*width),
                ProtoKind::Merge => Some(ins.iter().sum()),
                ProtoKind::Extend { width, .. } => Some(*width),
                ProtoKind::Unary { .. } => ins.first().copied(),
                ProtoKind::Binary { op } => {
                    if op.is_comparison() {
                        Some(1)
                    } else {
                        ins.first().copied()
                    }
                }
                ProtoKind::Conditional => ins.get(1).copied(),
                ProtoKind::PacketIn { prefix_len } => {
                    widths.insert(PortRef::new(id, 1), LENGTH_WIDTH);
                    Some(prefix_len * 8)
                }
                ProtoKind::ArrayRead { array } => self.array(*array).map(|a| a.elem_width),
                ProtoKind::TableLookup { table } | ProtoKind::TableWrite { table } => {
                    self.table(*table).map(|t| t.result_width())
                }
                ProtoKind::PacketOut { .. } | ProtoKind::ArrayWrite { .. } => None,
            };
            if let Some(w) = w {
                widths.insert(PortRef::out(id), w);
            }
        }
        widths
    }
}

/// Incremental construction of programs with sequential node ids.
#[derive(Debug, Default)]
pub struct ProgramBuilder {
    program: ProtocolProgram,
    next: NodeId,
}

impl ProgramBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, kind: ProtoKind, inputs: Vec<PortRef>) -> PortRef {
        let id = self.next;
        self.next += 1;
        self.program.nodes.insert(id, ProtoNode { id, kind, inputs });
        PortRef::out(id)
    }

    pub fn declare_array(&mut self, id: u32, elem_width: Width, num_elems: u32) {
        self.program.arrays.push(ArrayDecl { id, elem_width, num_elems });
    }

    pub fn declare_table(&mut self, id: u32, key_width: Width, num_entries: u32, cam_impl: CamImpl) {
        self.program.tables.push(TableDecl { id, key_width, num_entries, cam_impl });
    }

    /// Returns `(prefix, length)`.
    pub fn packet_in(&mut self, prefix_len: u32) -> (PortRef, PortRef) {
        let p = self.add(ProtoKind::PacketIn { prefix_len }, vec![]);
        (p, PortRef::new(p.node, 1))
    }

    pub fn packet_out(&mut self, prefix_len: u32, cmd: PortRef, prefix: PortRef, length: PortRef) {
        self.add(ProtoKind::PacketOut { prefix_len }, vec![cmd, prefix, length]);
    }

    pub fn constant(&mut self, width: Width, value: u64) -> PortRef {
        self.add(ProtoKind::Constant { value: Bits::from_u64(width, value) }, vec![])
    }

    pub fn constant_bits(&mut self, value: Bits) -> PortRef {
        self.add(ProtoKind::Constant { value }, vec![])
    }

    pub fn slice(&mut self, src: PortRef, offset: u32, width: Width) -> PortRef {
        self.add(ProtoKind::Slice { offset, width }, vec![src])
    }

    pub fn merge(&mut self, parts: &[PortRef]) -> PortRef {
        self.add(ProtoKind::Merge, parts.to_vec())
    }

    pub fn zext(&mut self, src: PortRef, width: Width) -> PortRef {
        self.add(ProtoKind::Extend { width, signed: false }, vec![src])
    }

    pub fn sext(&mut self, src: PortRef, width: Width) -> PortRef {
        self.add(ProtoKind::Extend { width, signed: true }, vec![src])
    }

    pub fn unary(&mut self, op: Opcode, a: PortRef) -> PortRef {
        self.add(ProtoKind::Unary { op }, vec![a])
    }

    pub fn binary(&mut self, op: Opcode, a: PortRef, b: PortRef) -> PortRef {
        self.add(ProtoKind::Binary { op }, vec![a, b])
    }

    pub fn cond(&mut self, c: PortRef, t: PortRef, f: PortRef) -> PortRef {
        self.add(ProtoKind::Conditional, vec![c, t, f])
    }

    pub fn array_read(&mut self, array: u32, index: PortRef) -> PortRef {
        self.add(ProtoKind::ArrayRead { array }, vec![index])
    }

    pub fn array_write(&mut self, array: u32, index: PortRef, value: PortRef, enable: Option<PortRef>) {
        let mut inputs = vec![index, value];
        inputs.extend(enable);
        self.add(ProtoKind::ArrayWrite { array }, inputs);
    }

    pub fn table_lookup(&mut self, table: u32, key: PortRef) -> PortRef {
        self.add(ProtoKind::TableLookup { table }, vec![key])
    }

    pub fn table_write(&mut self, table: u32, key: PortRef, hint: PortRef, enable: Option<PortRef>) -> PortRef {
        let mut inputs = vec![key, hint];
        inputs.extend(enable);
        self.add(ProtoKind::TableWrite { table }, inputs)
    }

    pub fn program(&self) -> &ProtocolProgram {
        &self.program
    }

    pub fn build(self) -> ProtocolProgram {
        self.program
    }
}
