// SPDX-License-Identifier: Apache-2.0

use serde_json::json;

use super::netlist::{ConfigField, ConfigReg, Netlist};
use super::HwError;
use crate::bits::Bits;
use crate::ir::{NodeId, RuntimeConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigEntry {
    /// Word address.
    pub address: u32,
    pub owner: NodeId,
    pub field: String,
    pub width: u32,
}

/// Dense word map of the configuration registers: one 32-bit word per
/// field, in node id order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigMap {
    pub entries: Vec<ConfigEntry>,
    pub total_bits: u32,
}

impl ConfigMap {
    pub fn of(netlist: &Netlist) -> Self {
        let entries: Vec<ConfigEntry> = netlist
            .config_regs
            .iter()
            .enumerate()
            .map(|(i, r)| ConfigEntry { address: i as u32, owner: r.owner, field: r.field.name(), width: r.width })
            .collect();
        let total_bits = entries.iter().map(|e| e.width).sum();
        ConfigMap { entries, total_bits }
    }

    pub fn to_json(&self) -> String {
        let entries: Vec<_> = self
            .entries
            .iter()
            .map(|e| json!({"address": e.address, "owner": e.owner, "field": e.field, "width": e.width}))
            .collect();
        serde_json::to_string_pretty(&json!({"kind": "config_map", "total_bits": self.total_bits, "entries": entries}))
            .expect("json")
    }
}

fn word(reg: &ConfigReg, config: &RuntimeConfig) -> Result<u32, HwError> {
    Ok(match &reg.field {
        ConfigField::RouterSelect { .. } => config.router_select.get(&reg.owner).copied().unwrap_or(0),
        ConfigField::AluOp { ops } => match config.alu_op.get(&reg.owner) {
            None => 0,
            Some(op) => ops.iter().position(|o| o == op).ok_or(HwError::BadValue(reg.owner))? as u32,
        },
        ConfigField::ConstValue { chunk } => match config.const_value.get(&reg.owner) {
            None => 0,
            Some(v) => v.slice(32 * chunk, reg.width).low_u64() as u32,
        },
    })
}

/// One word per map entry, in address order; narrow fields are
/// zero-extended. Memory bindings are not part of the bitstream.
pub fn config_bitstream(netlist: &Netlist, config: &RuntimeConfig) -> Result<Vec<u32>, HwError> {
    let has = |owner: NodeId, f: fn(&ConfigField) -> bool| {
        netlist.config_regs.iter().any(|r| r.owner == owner && f(&r.field))
    };
    for &id in config.router_select.keys() {
        if !has(id, |f| matches!(f, ConfigField::RouterSelect { .. })) {
            return Err(HwError::NoField(id));
        }
    }
    for &id in config.alu_op.keys() {
        if !has(id, |f| matches!(f, ConfigField::AluOp { .. })) {
            return Err(HwError::NoField(id));
        }
    }
    for &id in config.const_value.keys() {
        if !has(id, |f| matches!(f, ConfigField::ConstValue { .. })) {
            return Err(HwError::NoField(id));
        }
    }
    netlist.config_regs.iter().map(|r| word(r, config)).collect()
}

/// Inverse of [`config_bitstream`]: every configurable field present.
pub fn decode_bitstream(netlist: &Netlist, words: &[u32]) -> Result<RuntimeConfig, HwError> {
    if words.len() != netlist.config_regs.len() {
        return Err(HwError::Length { got: words.len(), want: netlist.config_regs.len() });
    }
    let mut cfg = RuntimeConfig::default();
    let mut consts: std::collections::BTreeMap<NodeId, Vec<Bits>> = Default::default();
    for (r, &w) in netlist.config_regs.iter().zip(words) {
        if r.width < 32 && w >> r.width != 0 {
            return Err(HwError::BadValue(r.owner));
        }
        match &r.field {
            ConfigField::RouterSelect { inputs } => {
                if w >= *inputs {
                    return Err(HwError::BadValue(r.owner));
                }
                cfg.router_select.insert(r.owner, w);
            }
            ConfigField::AluOp { ops } => {
                let op = *ops.get(w as usize).ok_or(HwError::BadValue(r.owner))?;
                cfg.alu_op.insert(r.owner, op);
            }
            ConfigField::ConstValue { .. } => {
                consts.entry(r.owner).or_default().push(Bits::from_u64(r.width, w as u64));
            }
        }
    }
    for (id, parts) in consts {
        cfg.const_value.insert(id, Bits::concat(parts.iter()));
    }
    Ok(cfg)
}

/// Bitstream as lowercase hex words, one per line.
pub fn format_bitstream(words: &[u32]) -> String {
    words.iter().map(|w| format!("{w:08x}\n")).collect()
}

pub fn parse_bitstream(text: &str) -> Result<Vec<u32>, HwError> {
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| u32::from_str_radix(l, 16).map_err(|_| HwError::Syntax(l.to_string())))
        .collect()
}
