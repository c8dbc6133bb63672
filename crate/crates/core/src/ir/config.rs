// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use super::{NodeId, Opcode, PipeKind, PipelineArch};
use crate::bits::Bits;

/// Runtime settings that program a pipeline architecture.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RuntimeConfig {
    /// Router id to selected input ordinal.
    pub router_select: BTreeMap<NodeId, u32>,
    /// ALU id to selected opcode.
    pub alu_op: BTreeMap<NodeId, Opcode>,
    /// Runtime constant id to value.
    pub const_value: BTreeMap<NodeId, Bits>,
    /// Program array id to RAM id.
    pub array_bind: BTreeMap<u32, u32>,
    /// Program table id to CAM id.
    pub table_bind: BTreeMap<u32, u32>,
}

impl RuntimeConfig {
    /// Checks the config against `arch`: selections in range, opcodes
    /// supported, constant widths exact, bound memories declared.
    pub fn check(&self, arch: &PipelineArch) -> Result<(), String> {
        for (&id, &sel) in &self.router_select {
            match arch.node(id) {
                Some(n) if n.kind == PipeKind::Router => {
                    if sel as usize >= n.inputs.len() {
                        return Err(format!(
                            "router {id}: selected input {sel} but only {} inputs",
                            n.inputs.len()
                        ));
                    }
                }
                _ => return Err(format!("router_select names {id}, which is not a router")),
            }
        }
        for (&id, &op) in &self.alu_op {
            match arch.node(id).map(|n| &n.kind) {
                Some(PipeKind::Alu { ops, .. }) => {
                    if !ops.contains(&op) {
                        return Err(format!("alu {id}: opcode {op} not supported"));
                    }
                }
                _ => return Err(format!("alu_op names {id}, which is not an ALU")),
            }
        }
        for (&id, v) in &self.const_value {
            match arch.node(id).map(|n| &n.kind) {
                Some(PipeKind::Constant { width, value: None }) => {
                    if v.width() != *width {
                        return Err(format!("constant {id}: value width {} != {width}", v.width()));
                    }
                }
                _ => return Err(format!("const_value names {id}, which is not a runtime constant")),
            }
        }
        for ram in self.array_bind.values() {
            if arch.ram(*ram).is_none() {
                return Err(format!("array bound to undeclared RAM {ram}"));
            }
        }
        for cam in self.table_bind.values() {
            if arch.cam(*cam).is_none() {
                return Err(format!("table bound to undeclared CAM {cam}"));
            }
        }
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.router_select.is_empty()
            && self.alu_op.is_empty()
            && self.const_value.is_empty()
            && self.array_bind.is_empty()
            && self.table_bind.is_empty()
    }

    /// Same config with every configurable node of `arch` present, using the
    /// defaults (first input, first opcode, zero) where unset.
    pub fn materialized(&self, arch: &PipelineArch) -> RuntimeConfig {
        let mut out = self.clone();
        for n in arch.nodes.values() {
            match &n.kind {
                PipeKind::Router if n.inputs.len() > 1 => {
                    out.router_select.entry(n.id).or_insert(0);
                }
                PipeKind::Alu { ops, .. } if ops.len() > 1 => {
                    out.alu_op.entry(n.id).or_insert(ops[0]);
                }
                PipeKind::Constant { width, value: None } => {
                    out.const_value.entry(n.id).or_insert_with(|| Bits::zero(*width));
                }
                _ => {}
            }
        }
        out
    }
}
