// SPDX-License-Identifier: Apache-2.0

//! Structural elaboration of pipelines: netlist, configuration address map
//! and bitstream, and an area estimate.

mod bitstream;
mod cost;
mod netlist;

pub use bitstream::{
    config_bitstream, decode_bitstream, format_bitstream, parse_bitstream, ConfigEntry, ConfigMap,
};
pub use cost::{estimate_cost, op_area, CostReport};
pub use netlist::{elaborate, select_bits, ConfigField, ConfigReg, Instance, Netlist, Wire};

use crate::ir::NodeId;

#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub enum HwError {
    #[error("node {0} has an untyped input")]
    Untyped(NodeId),
    #[error("config sets node {0}, which has no configuration field")]
    NoField(NodeId),
    #[error("value for node {0} does not fit its field")]
    BadValue(NodeId),
    #[error("bitstream has {got} words, map has {want}")]
    Length { got: usize, want: usize },
    #[error("bad bitstream word {0:?}")]
    Syntax(String),
}
