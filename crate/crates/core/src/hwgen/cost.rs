// SPDX-License-Identifier: Apache-2.0

//! Area estimate in arbitrary units. The constants are invented and have no
//! physical meaning; they only order designs consistently.

use std::collections::BTreeMap;

use crate::ir::{pipeline_depth, CamImpl, Opcode, PipeKind, PipelineArch};

pub const REGISTER_PER_BIT: f64 = 1.0;
pub const ROUTER_PER_BIT_INPUT: f64 = 0.5;
pub const RUNTIME_CONSTANT_PER_BIT: f64 = 1.0;
pub const ALU_SELECT_PER_OP: f64 = 2.0;
pub const PACKET_PORT_PER_BIT: f64 = 1.0;
pub const MEMORY_PORT: f64 = 20.0;
pub const RAM_PER_BIT: f64 = 0.1;
pub const REGISTER_CAM_PER_KEY_BIT: f64 = 1.5;
pub const HASH_CAM_PER_KEY_BIT: f64 = 0.2;
pub const HASH_CAM_FIXED: f64 = 50.0;

/// Area of one operator at `width` bits.
pub fn op_area(op: Opcode, width: u32) -> f64 {
    let w = width as f64;
    match op {
        Opcode::And | Opcode::Or | Opcode::Xor | Opcode::Not => 0.5 * w,
        Opcode::Neg | Opcode::Eq | Opcode::Neq | Opcode::Mux => w,
        Opcode::Add | Opcode::Sub | Opcode::Ltu | Opcode::Leu | Opcode::Lts | Opcode::Les => 2.0 * w,
        Opcode::Shl | Opcode::Shr => w * (w.log2().ceil() + 1.0),
        Opcode::Mul => 0.5 * w * w,
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct CostReport {
    pub counts: BTreeMap<&'static str, usize>,
    /// Area per node kind, memories under `Ram` and `Cam`.
    pub area_by_kind: BTreeMap<&'static str, f64>,
    pub area: f64,
    /// Cycles from packet input to packet output.
    pub depth: u32,
}

impl std::fmt::Display for CostReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "kind\tcount\tarea")?;
        for (k, n) in &self.counts {
            writeln!(f, "{k}\t{n}\t{:.1}", self.area_by_kind.get(k).copied().unwrap_or(0.0))?;
        }
        for k in ["Ram", "Cam"] {
            if let Some(a) = self.area_by_kind.get(k) {
                writeln!(f, "{k}\t-\t{a:.1}")?;
            }
        }
        writeln!(f, "total area\t{:.1}", self.area)?;
        writeln!(f, "depth\t{} cycles", self.depth)
    }
}

pub fn estimate_cost(arch: &PipelineArch) -> CostReport {
    let widths = arch.value_widths();
    let mut r = CostReport { depth: pipeline_depth(arch).unwrap_or(0), ..Default::default() };
    for n in arch.nodes.values() {
        let a = match &n.kind {
            PipeKind::Register { width } => REGISTER_PER_BIT * *width as f64,
            PipeKind::Router if n.inputs.len() > 1 => {
                let w = n.inputs.first().and_then(|p| widths.get(p)).copied().unwrap_or(0);
                ROUTER_PER_BIT_INPUT * w as f64 * n.inputs.len() as f64
            }
            PipeKind::Constant { width, value: None } => RUNTIME_CONSTANT_PER_BIT * *width as f64,
            PipeKind::Alu { width, ops, latency } => {
                let logic: f64 = ops.iter().map(|&op| op_area(op, *width)).sum();
                let select = if ops.len() > 1 { ALU_SELECT_PER_OP * ops.len() as f64 } else { 0.0 };
                let stages = REGISTER_PER_BIT * (*width as f64 + 1.0) * latency.saturating_sub(1) as f64;
                logic + select + stages
            }
            PipeKind::PacketIn { prefix_len, .. } | PipeKind::PacketOut { prefix_len, .. } => {
                PACKET_PORT_PER_BIT * 8.0 * *prefix_len as f64
            }
            PipeKind::RamAccess { .. } | PipeKind::CamAccess { .. } => MEMORY_PORT,
            _ => 0.0,
        };
        *r.counts.entry(n.kind.name()).or_default() += 1;
        *r.area_by_kind.entry(n.kind.name()).or_default() += a;
    }
    let ram: f64 = arch.rams.iter().map(|m| RAM_PER_BIT * m.elem_width as f64 * m.num_elems as f64).sum();
    let cam: f64 = arch
        .cams
        .iter()
        .map(|c| {
            let bits = c.key_width as f64 * c.num_entries as f64;
            match c.cam_impl {
                CamImpl::RegisterCam => REGISTER_CAM_PER_KEY_BIT * bits,
                CamImpl::HashCam => HASH_CAM_FIXED + HASH_CAM_PER_KEY_BIT * bits,
            }
        })
        .sum();
    if !arch.rams.is_empty() {
        r.area_by_kind.insert("Ram", ram);
    }
    if !arch.cams.is_empty() {
        r.area_by_kind.insert("Cam", cam);
    }
    r.area = r.area_by_kind.values().sum();
    r
}
