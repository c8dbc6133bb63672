// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

use super::encode::{CnfInstance, Literal, StateRef};
use crate::ir::{PipeKind, PipelineArch, ProtoKind, ProtocolProgram, RuntimeConfig};

/// A model that violates the encoding's own exclusivity constraints.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("inconsistent assignment: {0}")]
pub struct ExtractError(pub String);

/// Reads a runtime configuration off a satisfying assignment.
///
/// Routers and ALUs without a true literal are unused and take their
/// defaults (first input, first opcode); unused runtime constants are zero.
pub fn extract_config(
    model: &[bool],
    cnf: &CnfInstance,
    arch: &PipelineArch,
    program: &ProtocolProgram,
) -> Result<RuntimeConfig, ExtractError> {
    let mut cfg = RuntimeConfig::default();
    for (var, lit) in cnf.litmap.iter() {
        if !model.get(var as usize - 1).copied().unwrap_or(false) {
            continue;
        }
        match *lit {
            Literal::Pick { router, input } => {
                if let Some(prev) = cfg.router_select.insert(router, input) {
                    return Err(ExtractError(format!("router {router} picks {prev} and {input}")));
                }
            }
            Literal::AluOp { alu, op } => {
                if let Some(prev) = cfg.alu_op.insert(alu, op) {
                    return Err(ExtractError(format!("alu {alu} performs {prev} and {op}")));
                }
            }
            Literal::Bind { state, mem } => {
                let (map, id) = match state {
                    StateRef::Array(a) => (&mut cfg.array_bind, a),
                    StateRef::Table(t) => (&mut cfg.table_bind, t),
                };
                if let Some(prev) = map.insert(id, mem) {
                    return Err(ExtractError(format!("{state:?} bound to {prev} and {mem}")));
                }
            }
            Literal::Out { hw, proto } => {
                if !arch.node(hw.node).is_some_and(|n| n.kind.is_runtime_constant()) {
                    continue;
                }
                let value = match program.node(proto.node).map(|n| &n.kind) {
                    Some(ProtoKind::Constant { value }) => value.clone(),
                    _ => match cnf.virtual_consts.get(&proto.node) {
                        Some(v) => v.clone(),
                        None => return Err(ExtractError(format!("constant {} matched to {proto}", hw.node))),
                    },
                };
                if let Some(prev) = cfg.const_value.insert(hw.node, value.clone()) {
                    if prev != value {
                        return Err(ExtractError(format!("constant {} holds {prev} and {value}", hw.node)));
                    }
                }
            }
            Literal::Aux(_) => {}
        }
    }
    // single-input routers and single-op ALUs need no entry
    cfg.router_select.retain(|id, _| arch.node(*id).is_some_and(|n| n.inputs.len() > 1));
    cfg.alu_op.retain(|id, _| matches!(arch.node(*id).map(|n| &n.kind), Some(PipeKind::Alu { ops, .. }) if ops.len() > 1));
    let cfg = cfg.materialized(arch);
    cfg.check(arch).map_err(ExtractError)?;
    Ok(cfg)
}
