// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde_json::{json, Value};

use super::HwError;
use crate::ir::{NodeId, Opcode, PipeKind, PipelineArch, PortRef, Width};

/// Bits of a select field over `n` choices.
pub fn select_bits(n: usize) -> Width {
    let mut w = 0;
    while (1usize << w) < n {
        w += 1;
    }
    w
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    pub id: NodeId,
    pub module: &'static str,
    pub params: BTreeMap<&'static str, Value>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Wire {
    pub src: PortRef,
    /// Destination instance and input ordinal.
    pub dst: PortRef,
    pub width: Width,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigField {
    RouterSelect { inputs: u32 },
    /// Index into the ALU's op list.
    AluOp { ops: Vec<Opcode> },
    /// 32-bit chunk `chunk` of a runtime constant, least significant first.
    ConstValue { chunk: u32 },
}

impl ConfigField {
    pub fn name(&self) -> String {
        match self {
            ConfigField::RouterSelect { .. } => "select".into(),
            ConfigField::AluOp { .. } => "op".into(),
            ConfigField::ConstValue { chunk } => format!("value[{chunk}]"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConfigReg {
    pub owner: NodeId,
    pub field: ConfigField,
    pub width: Width,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Netlist {
    pub instances: Vec<Instance>,
    pub wires: Vec<Wire>,
    /// Runtime-configurable fields in node id order.
    pub config_regs: Vec<ConfigReg>,
}

fn params(arch: &PipelineArch, kind: &PipeKind) -> BTreeMap<&'static str, Value> {
    let mut p = BTreeMap::new();
    match kind {
        PipeKind::Register { width } => {
            p.insert("width", json!(width));
        }
        PipeKind::Router => {}
        PipeKind::Constant { width, value } => {
            p.insert("width", json!(width));
            p.insert("value", value.as_ref().map_or(Value::Null, |v| json!(v.to_hex())));
        }
        PipeKind::Slice { offset, width } => {
            p.insert("offset", json!(offset));
            p.insert("width", json!(width));
        }
        PipeKind::Merge => {}
        PipeKind::Extend { width, signed } => {
            p.insert("width", json!(width));
            p.insert("signed", json!(signed));
        }
        PipeKind::Alu { width, ops, latency } => {
            p.insert("width", json!(width));
            p.insert("ops", json!(ops.iter().map(|o| o.name()).collect::<Vec<_>>()));
            p.insert("latency", json!(latency));
        }
        PipeKind::PacketIn { prefix_len, mtu } | PipeKind::PacketOut { prefix_len, mtu } => {
            p.insert("prefix_len", json!(prefix_len));
            p.insert("mtu", json!(mtu));
        }
        PipeKind::RamAccess { ram, write } => {
            if let Some(r) = arch.ram(*ram) {
                p.insert("elem_width", json!(r.elem_width));
                p.insert("num_elems", json!(r.num_elems));
                p.insert("latency", json!(r.latency));
            }
            p.insert("ram", json!(ram));
            p.insert("write", json!(write));
        }
        PipeKind::CamAccess { cam, write } => {
            if let Some(c) = arch.cam(*cam) {
                p.insert("key_width", json!(c.key_width));
                p.insert("num_entries", json!(c.num_entries));
                p.insert("latency", json!(c.latency));
                p.insert("impl", json!(format!("{:?}", c.cam_impl)));
            }
            p.insert("cam", json!(cam));
            p.insert("write", json!(write));
        }
    }
    p
}

/// Structural translation: one instance per node, one wire per edge, plus a
/// configuration bus instance when any field is runtime-configurable.
pub fn elaborate(arch: &PipelineArch) -> Result<Netlist, HwError> {
    let widths = arch.value_widths();
    let mut nl = Netlist::default();
    for n in arch.nodes.values() {
        nl.instances.push(Instance { id: n.id, module: n.kind.name(), params: params(arch, &n.kind) });
        for (i, src) in n.inputs.iter().enumerate() {
            let width = *widths.get(src).ok_or(HwError::Untyped(n.id))?;
            nl.wires.push(Wire { src: *src, dst: PortRef::new(n.id, i as u8), width });
        }
        match &n.kind {
            PipeKind::Router if n.inputs.len() > 1 => nl.config_regs.push(ConfigReg {
                owner: n.id,
                field: ConfigField::RouterSelect { inputs: n.inputs.len() as u32 },
                width: select_bits(n.inputs.len()),
            }),
            PipeKind::Alu { ops, .. } if ops.len() > 1 => nl.config_regs.push(ConfigReg {
                owner: n.id,
                field: ConfigField::AluOp { ops: ops.clone() },
                width: select_bits(ops.len()),
            }),
            PipeKind::Constant { width, value: None } => {
                for chunk in 0..width.div_ceil(32) {
                    nl.config_regs.push(ConfigReg {
                        owner: n.id,
                        field: ConfigField::ConstValue { chunk },
                        width: (width - 32 * chunk).min(32),
                    });
                }
            }
            _ => {}
        }
    }
    if !nl.config_regs.is_empty() {
        let id = arch.nodes.keys().next_back().map_or(0, |k| k + 1);
        let mut p = BTreeMap::new();
        p.insert("words", json!(nl.config_regs.len()));
        nl.instances.push(Instance { id, module: "ConfigBus", params: p });
    }
    Ok(nl)
}

impl Netlist {
    pub fn instance_census(&self) -> BTreeMap<&'static str, usize> {
        let mut c = BTreeMap::new();
        for i in &self.instances {
            *c.entry(i.module).or_default() += 1;
        }
        c
    }

    /// Canonical JSON text, one instance or wire per line.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\n\"kind\": \"netlist\",\n\"instances\": [\n");
        let lines: Vec<String> = self
            .instances
            .iter()
            .map(|i| json!({"id": i.id, "module": i.module, "params": i.params}).to_string())
            .collect();
        out.push_str(&lines.join(",\n"));
        out.push_str("\n],\n\"wires\": [\n");
        let lines: Vec<String> = self
            .wires
            .iter()
            .map(|w| json!([[w.src.node, w.src.port], [w.dst.node, w.dst.port], w.width]).to_string())
            .collect();
        out.push_str(&lines.join(",\n"));
        out.push_str("\n],\n\"config_regs\": [\n");
        let lines: Vec<String> = self
            .config_regs
            .iter()
            .map(|r| json!({"owner": r.owner, "field": r.field.name(), "width": r.width}).to_string())
            .collect();
        out.push_str(&lines.join(",\n"));
        out.push_str("\n]\n}\n");
        out
    }
}
