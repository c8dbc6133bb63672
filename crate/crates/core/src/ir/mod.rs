// SPDX-License-Identifier: Apache-2.0

//! Typed dataflow graphs for protocol programs and pipeline architectures.
//!
//! Both graphs are sets of nodes keyed by [`NodeId`]. A node's inputs are an
//! ordered list of [`PortRef`]s naming a producer node and one of its output
//! ports. Every edge carries the width of the producer's output port.

mod config;
mod format;
mod graph;
mod pipeline;
mod program;
mod stats;
mod validate;

pub use config::RuntimeConfig;
pub use format::{
    load_artifact, store_artifact, store_config, store_pipeline, store_program, Artifact,
    ArtifactKind, LoadError,
};
pub(crate) use format::{parse_json, Obj};
pub use graph::{topo_order, CycleError};
pub use pipeline::{ArchBuilder, CamDecl, PipeKind, PipeNode, PipelineArch, RamDecl};
pub use program::{ArrayDecl, ProgramBuilder, ProtoKind, ProtoNode, ProtocolProgram, TableDecl};
pub use stats::{census, pipeline_census, program_census, Census};
pub use validate::{
    arrivals, pipeline_depth, validate_pipeline, validate_protocol, Arrival, Diagnostic, Severity,
    ValidationReport,
};

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

pub use crate::bits::MAX_WIDTH;

pub type NodeId = u32;

/// Bit width of an edge, `1..=MAX_WIDTH`.
pub type Width = u32;

/// One output port of a node.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortRef {
    pub node: NodeId,
    pub port: u8,
}

impl PortRef {
    pub const fn new(node: NodeId, port: u8) -> Self {
        PortRef { node, port }
    }

    pub const fn out(node: NodeId) -> Self {
        PortRef { node, port: 0 }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.node, self.port)
    }
}

/// Bits needed to address `n` entries, at least 1.
pub fn index_width(n: u32) -> Width {
    let mut w = 0;
    while (1u64 << w) < n as u64 {
        w += 1;
    }
    w.max(1)
}

/// Port numbers of the packet input node.
pub const PKT_PREFIX: u8 = 0;
pub const PKT_LENGTH: u8 = 1;

/// Width of the packet length edge.
pub const LENGTH_WIDTH: Width = 16;
/// Width of the packet output command edge.
pub const CMD_WIDTH: Width = 2;

/// Packet output commands.
pub const CMD_FORWARD: u64 = 0;
pub const CMD_TRUNCATE: u64 = 1;
pub const CMD_DROP: u64 = 2;

pub const DEFAULT_MTU: u32 = 1500;

/// Operations shared by program compute nodes and pipeline ALUs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Opcode {
    Add,
    Sub,
    Mul,
    And,
    Or,
    Xor,
    Not,
    Neg,
    Shl,
    Shr,
    Eq,
    Neq,
    Ltu,
    Leu,
    Lts,
    Les,
    Mux,
}

impl Opcode {
    pub const ALL: [Opcode; 17] = [
        Opcode::Add,
        Opcode::Sub,
        Opcode::Mul,
        Opcode::And,
        Opcode::Or,
        Opcode::Xor,
        Opcode::Not,
        Opcode::Neg,
        Opcode::Shl,
        Opcode::Shr,
        Opcode::Eq,
        Opcode::Neq,
        Opcode::Ltu,
        Opcode::Leu,
        Opcode::Lts,
        Opcode::Les,
        Opcode::Mux,
    ];

    pub fn is_unary(self) -> bool {
        matches!(self, Opcode::Not | Opcode::Neg)
    }

    pub fn is_binary(self) -> bool {
        !self.is_unary() && self != Opcode::Mux
    }

    /// Comparisons produce a single bit regardless of operand width.
    pub fn is_comparison(self) -> bool {
        matches!(
            self,
            Opcode::Eq | Opcode::Neq | Opcode::Ltu | Opcode::Leu | Opcode::Lts | Opcode::Les
        )
    }

    pub fn arity(self) -> usize {
        if self.is_unary() {
            1
        } else if self == Opcode::Mux {
            3
        } else {
            2
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Opcode::Add => "ADD",
            Opcode::Sub => "SUB",
            Opcode::Mul => "MUL",
            Opcode::And => "AND",
            Opcode::Or => "OR",
            Opcode::Xor => "XOR",
            Opcode::Not => "NOT",
            Opcode::Neg => "NEG",
            Opcode::Shl => "SHL",
            Opcode::Shr => "SHR",
            Opcode::Eq => "EQ",
            Opcode::Neq => "NEQ",
            Opcode::Ltu => "LTU",
            Opcode::Leu => "LEU",
            Opcode::Lts => "LTS",
            Opcode::Les => "LES",
            Opcode::Mux => "MUX",
        }
    }
}

impl fmt::Display for Opcode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Opcode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Opcode::ALL
            .iter()
            .copied()
            .find(|op| op.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown opcode {s:?}"))
    }
}

/// CAM implementation flavours.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CamImpl {
    /// Fully associative, lowest matching entry wins.
    #[default]
    RegisterCam,
    /// Direct-mapped by key hash; writes evict.
    HashCam,
}

impl FromStr for CamImpl {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "RegisterCam" | "register" => Ok(CamImpl::RegisterCam),
            "HashCam" | "hash" => Ok(CamImpl::HashCam),
            _ => Err(format!("unknown CAM implementation {s:?}")),
        }
    }
}

/// ALU input slot used by operand `k` of a node computing `op`.
///
/// Slots 0 and 1 carry data operands; slot 2 is the 1-bit select of MUX. A
/// conditional lists its operands as (cond, t, f), so they land in slots
/// (2, 0, 1).
pub fn alu_slot(op: Opcode, k: usize) -> usize {
    if op == Opcode::Mux {
        [2, 0, 1][k]
    } else {
        k
    }
}

/// Number of inputs of an ALU supporting `ops`.
pub fn alu_arity(ops: &[Opcode]) -> usize {
    if ops.contains(&Opcode::Mux) {
        3
    } else if ops.iter().any(|o| o.is_binary()) {
        2
    } else {
        1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_widths() {
        assert_eq!(index_width(1), 1);
        assert_eq!(index_width(2), 1);
        assert_eq!(index_width(3), 2);
        assert_eq!(index_width(256), 8);
        assert_eq!(index_width(257), 9);
    }

    #[test]
    fn opcode_names_round_trip() {
        for op in Opcode::ALL {
            assert_eq!(op.name().parse::<Opcode>().unwrap(), op);
        }
        assert!("FOO".parse::<Opcode>().is_err());
    }

    #[test]
    fn arity_rule() {
        assert_eq!(alu_arity(&[Opcode::Not]), 1);
        assert_eq!(alu_arity(&[Opcode::Not, Opcode::Add]), 2);
        assert_eq!(alu_arity(&[Opcode::Add, Opcode::Mux]), 3);
    }
}
