// SPDX-License-Identifier: Apache-2.0

use std::collections::HashMap;

use crate::ir::{alu_slot, PipeKind, PipelineArch, PortRef, ProtoKind, ProtocolProgram, Width};

/// Width tables of both graphs, computed once per encoding.
pub(crate) struct Checker<'a> {
    pub arch: &'a PipelineArch,
    pub program: &'a ProtocolProgram,
    pub hw_widths: HashMap<PortRef, Width>,
    pub pr_widths: HashMap<PortRef, Width>,
}

impl<'a> Checker<'a> {
    pub fn new(arch: &'a PipelineArch, program: &'a ProtocolProgram) -> Self {
        Checker { arch, program, hw_widths: arch.value_widths(), pr_widths: program.value_widths() }
    }

    fn same_array(&self, ram: u32, array: u32) -> bool {
        match (self.arch.ram(ram), self.program.array(array)) {
            (Some(r), Some(a)) => r.elem_width == a.elem_width && r.num_elems == a.num_elems,
            _ => false,
        }
    }

    fn same_table(&self, cam: u32, table: u32) -> bool {
        match (self.arch.cam(cam), self.program.table(table)) {
            (Some(c), Some(t)) => {
                c.key_width == t.key_width && c.num_entries == t.num_entries && c.cam_impl == t.cam_impl
            }
            _ => false,
        }
    }

    /// See [`static_check`]. Sinks (packet output, array writes) are
    /// addressed through port 0.
    pub fn check(&self, h: PortRef, l: PortRef) -> bool {
        let (Some(hn), Some(ln)) = (self.arch.node(h.node), self.program.node(l.node)) else {
            return false;
        };
        let hw = self.hw_widths.get(&h);
        if hw != self.pr_widths.get(&l) {
            return false;
        }
        let same_arity = hn.inputs.len() == ln.inputs.len();
        match (&hn.kind, &ln.kind) {
            (PipeKind::Register { .. } | PipeKind::Router, _) => hw.is_some(),
            (PipeKind::Constant { value: Some(v), .. }, ProtoKind::Constant { value }) => v == value,
            (PipeKind::Constant { value: None, .. }, ProtoKind::Constant { .. }) => true,
            (PipeKind::Slice { offset, width }, ProtoKind::Slice { offset: o, width: w }) => {
                offset == o && width == w && same_arity
            }
            (PipeKind::Merge, ProtoKind::Merge) => same_arity,
            (PipeKind::Extend { width, signed }, ProtoKind::Extend { width: w, signed: s }) => {
                width == w && signed == s && same_arity
            }
            (PipeKind::Alu { width, ops, .. }, ProtoKind::Unary { .. } | ProtoKind::Binary { .. } | ProtoKind::Conditional) => {
                let op = ln.kind.op().expect("compute node");
                if !ops.contains(&op) || (0..op.arity()).any(|k| alu_slot(op, k) >= hn.inputs.len()) {
                    return false;
                }
                if op.is_comparison() {
                    ln.inputs.first().and_then(|p| self.pr_widths.get(p)) == Some(width)
                } else {
                    h.port == 0
                }
            }
            (PipeKind::PacketIn { prefix_len, .. }, ProtoKind::PacketIn { prefix_len: p }) => {
                prefix_len == p && h.port == l.port
            }
            (PipeKind::PacketOut { prefix_len, .. }, ProtoKind::PacketOut { prefix_len: p }) => {
                prefix_len == p && same_arity
            }
            (PipeKind::RamAccess { ram, write: false }, ProtoKind::ArrayRead { array })
            | (PipeKind::RamAccess { ram, write: true }, ProtoKind::ArrayWrite { array }) => {
                self.same_array(*ram, *array) && same_arity
            }
            (PipeKind::CamAccess { cam, write: false }, ProtoKind::TableLookup { table })
            | (PipeKind::CamAccess { cam, write: true }, ProtoKind::TableWrite { table }) => {
                self.same_table(*cam, *table) && same_arity
            }
            _ => false,
        }
    }
}

/// Whether hardware port `h` can possibly carry the value of program port
/// `l`.
///
/// Widths must agree. Registers and routers accept any value of their
/// width; design-time constants need an equal value and runtime constants
/// any constant. ALUs need the opcode in their list (comparisons surface on
/// the flag port, or on the result port of a 1-bit ALU). Conversions and
/// packet ports need equal attributes, and memory accesses a memory with
/// the exact dimensions of the program array or table.
pub fn static_check(arch: &PipelineArch, h: PortRef, program: &ProtocolProgram, l: PortRef) -> bool {
    Checker::new(arch, program).check(h, l)
}
