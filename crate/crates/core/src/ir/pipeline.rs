// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashMap};

use super::{
    alu_arity, index_width, topo_order, CamImpl, NodeId, Opcode, PortRef, Width, LENGTH_WIDTH,
};
use crate::bits::Bits;

/// Pipeline building blocks with their design-time attributes.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PipeKind {
    Register { width: Width },
    /// Runtime selection among its inputs.
    Router,
    /// `value: None` marks a runtime-configurable constant.
    Constant { width: Width, value: Option<Bits> },
    Slice { offset: u32, width: Width },
    Merge,
    Extend { width: Width, signed: bool },
    /// Two outputs: port 0 is the `width`-bit result, port 1 the 1-bit
    /// comparison flag.
    Alu { width: Width, ops: Vec<Opcode>, latency: u32 },
    PacketIn { prefix_len: u32, mtu: u32 },
    PacketOut { prefix_len: u32, mtu: u32 },
    RamAccess { ram: u32, write: bool },
    CamAccess { cam: u32, write: bool },
}

impl PipeKind {
    pub fn name(&self) -> &'static str {
        match self {
            PipeKind::Register { .. } => "Register",
            PipeKind::Router => "Router",
            PipeKind::Constant { .. } => "Constant",
            PipeKind::Slice { .. } => "Slice",
            PipeKind::Merge => "Merge",
            PipeKind::Extend { .. } => "Extend",
            PipeKind::Alu { .. } => "Alu",
            PipeKind::PacketIn { .. } => "PacketIn",
            PipeKind::PacketOut { .. } => "PacketOut",
            PipeKind::RamAccess { .. } => "RamAccess",
            PipeKind::CamAccess { .. } => "CamAccess",
        }
    }

    pub fn num_outputs(&self) -> usize {
        match self {
            PipeKind::PacketIn { .. } | PipeKind::Alu { .. } => 2,
            PipeKind::PacketOut { .. } => 0,
            PipeKind::RamAccess { write, .. } => usize::from(!write),
            _ => 1,
        }
    }

    pub fn is_runtime_constant(&self) -> bool {
        matches!(self, PipeKind::Constant { value: None, .. })
    }

    pub fn is_write(&self) -> bool {
        matches!(self, PipeKind::RamAccess { write: true, .. } | PipeKind::CamAccess { write: true, .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipeNode {
    pub id: NodeId,
    pub kind: PipeKind,
    pub inputs: Vec<PortRef>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RamDecl {
    pub id: u32,
    pub elem_width: Width,
    pub num_elems: u32,
    pub latency: u32,
}

impl RamDecl {
    pub fn index_width(&self) -> Width {
        index_width(self.num_elems)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CamDecl {
    pub id: u32,
    pub key_width: Width,
    pub num_entries: u32,
    pub latency: u32,
    pub cam_impl: CamImpl,
}

impl CamDecl {
    pub fn index_width(&self) -> Width {
        index_width(self.num_entries)
    }

    pub fn result_width(&self) -> Width {
        self.index_width() + 1
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PipelineArch {
    pub nodes: BTreeMap<NodeId, PipeNode>,
    pub rams: Vec<RamDecl>,
    pub cams: Vec<CamDecl>,
}

impl PipelineArch {
    pub fn node(&self, id: NodeId) -> Option<&PipeNode> {
        self.nodes.get(&id)
    }

    pub fn ram(&self, id: u32) -> Option<&RamDecl> {
        self.rams.iter().find(|r| r.id == id)
    }

    pub fn cam(&self, id: u32) -> Option<&CamDecl> {
        self.cams.iter().find(|c| c.id == id)
    }

    pub fn find(&self, pred: impl Fn(&PipeKind) -> bool) -> impl Iterator<Item = &PipeNode> {
        self.nodes.values().filter(move |n| pred(&n.kind))
    }

    pub fn packet_in(&self) -> Option<&PipeNode> {
        self.find(|k| matches!(k, PipeKind::PacketIn { .. })).next()
    }

    pub fn packet_out(&self) -> Option<&PipeNode> {
        self.find(|k| matches!(k, PipeKind::PacketOut { .. })).next()
    }

    pub fn prefix_len(&self) -> Option<u32> {
        match self.packet_in()?.kind {
            PipeKind::PacketIn { prefix_len, .. } => Some(prefix_len),
            _ => None,
        }
    }

    pub fn topo(&self) -> Option<Vec<NodeId>> {
        topo_order(self.nodes.values().map(|n| (n.id, n.inputs.as_slice()))).ok()
    }

    pub fn edge_count(&self) -> usize {
        self.nodes.values().map(|n| n.inputs.len()).sum()
    }

    /// Latency in cycles from a node's inputs to its outputs.
    pub fn latency(&self, node: &PipeNode) -> u32 {
        match &node.kind {
            PipeKind::Register { .. } => 1,
            PipeKind::Alu { latency, .. } => *latency,
            PipeKind::RamAccess { ram, .. } => self.ram(*ram).map_or(1, |r| r.latency),
            PipeKind::CamAccess { cam, .. } => self.cam(*cam).map_or(1, |c| c.latency),
            _ => 0,
        }
    }

    /// Output widths derived from attributes and input widths; ill-typed
    /// nodes and their dependents are skipped.
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
                PipeKind::Register { width } => Some(*width),
                PipeKind::Router => ins.first().copied(),
                PipeKind::Constant { width, .. } => Some(*width),
                PipeKind::Slice { width, .. } => Some(*width),
                PipeKind::Merge => Some(ins.iter().sum()),
                PipeKind::Extend { width, .. } => Some(*width),
                PipeKind::Alu { width, .. } => {
                    widths.insert(PortRef::new(id, 1), 1);
                    Some(*width)
                }
                PipeKind::PacketIn { prefix_len, .. } => {
                    widths.insert(PortRef::new(id, 1), LENGTH_WIDTH);
                    Some(prefix_len * 8)
                }
                PipeKind::PacketOut { .. } => None,
                PipeKind::RamAccess { ram, write } => {
                    if *write {
                        None
                    } else {
                        self.ram(*ram).map(|r| r.elem_width)
                    }
                }
                PipeKind::CamAccess { cam, .. } => self.cam(*cam).map(|c| c.result_width()),
            };
            if let Some(w) = w {
                widths.insert(PortRef::out(id), w);
            }
        }
        widths
    }

    /// Expected input count for node kinds with a fixed arity.
    pub fn expected_arity(&self, node: &PipeNode) -> Option<usize> {
        Some(match &node.kind {
            PipeKind::Register { .. } | PipeKind::Slice { .. } | PipeKind::Extend { .. } => 1,
            PipeKind::Constant { .. } | PipeKind::PacketIn { .. } => 0,
            PipeKind::PacketOut { .. } => 3,
            PipeKind::Alu { ops, .. } => alu_arity(ops),
            PipeKind::RamAccess { write, .. } | PipeKind::CamAccess { write, .. } => {
                if *write {
                    3
                } else {
                    1
                }
            }
            PipeKind::Router | PipeKind::Merge => return None,
        })
    }
}

/// Incremental construction of architectures with sequential node ids.
#[derive(Debug, Default)]
pub struct ArchBuilder {
    arch: PipelineArch,
    next: NodeId,
}

impl ArchBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, kind: PipeKind, inputs: Vec<PortRef>) -> PortRef {
        let id = self.next;
        self.next += 1;
        self.arch.nodes.insert(id, PipeNode { id, kind, inputs });
        PortRef::out(id)
    }

    pub fn ram(&mut self, decl: RamDecl) {
        self.arch.rams.push(decl);
    }

    pub fn cam(&mut self, decl: CamDecl) {
        self.arch.cams.push(decl);
    }

    pub fn register(&mut self, src: PortRef, width: Width) -> PortRef {
        self.add(PipeKind::Register { width }, vec![src])
    }

    /// Design-time constant for `Some`, runtime-configurable for `None`.
    pub fn constant(&mut self, width: Width, value: Option<u64>) -> PortRef {
        let value = value.map(|v| Bits::from_u64(width, v));
        self.add(PipeKind::Constant { width, value }, vec![])
    }

    pub fn router(&mut self, inputs: Vec<PortRef>) -> PortRef {
        self.add(PipeKind::Router, inputs)
    }

    pub fn alu(&mut self, width: Width, ops: Vec<Opcode>, latency: u32, inputs: Vec<PortRef>) -> PortRef {
        self.add(PipeKind::Alu { width, ops, latency }, inputs)
    }

    pub fn arch(&self) -> &PipelineArch {
        &self.arch
    }

    pub fn build(self) -> PipelineArch {
        self.arch
    }
}
