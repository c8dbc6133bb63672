// SPDX-License-Identifier: Apache-2.0

use crate::bits::Bits;
use crate::ir::{
    NodeId, Opcode, PortRef, ProtoKind, ProtoNode, ProtocolProgram, CMD_DROP, CMD_FORWARD,
    CMD_TRUNCATE, LENGTH_WIDTH, PKT_PREFIX,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum NormalizeError {
    #[error("program needs a {have}-byte prefix but the target is {target} bytes")]
    PrefixOverflow { have: u32, target: u32 },
    #[error("program has no packet input or output")]
    NoPacketPorts,
}

struct Appender {
    program: ProtocolProgram,
    next: NodeId,
}

impl Appender {
    fn add(&mut self, kind: ProtoKind, inputs: Vec<PortRef>) -> PortRef {
        let id = self.next;
        self.next += 1;
        self.program.nodes.insert(id, ProtoNode { id, kind, inputs });
        PortRef::out(id)
    }

    fn constant(&mut self, width: u32, v: u64) -> PortRef {
        self.add(ProtoKind::Constant { value: Bits::from_u64(width, v) }, vec![])
    }
}

/// Rewrites `program` into the shape the compiler expects: packet ports of
/// `target_prefix_len` bytes, explicit write enables and 1-bit conditions.
///
/// Widening keeps the old prefix as a slice of the new one and rebuilds the
/// output prefix as the old output followed by the untouched input bytes.
/// When the program may truncate, its length output is clamped to the old
/// prefix length so the extra bytes stay invisible.
pub fn normalize_program(program: &ProtocolProgram, target_prefix_len: u32) -> Result<ProtocolProgram, NormalizeError> {
    let pin = program.packet_in().ok_or(NormalizeError::NoPacketPorts)?.id;
    let pout = program.packet_out().ok_or(NormalizeError::NoPacketPorts)?.id;
    let old = program.prefix_len().ok_or(NormalizeError::NoPacketPorts)?;
    if old > target_prefix_len {
        return Err(NormalizeError::PrefixOverflow { have: old, target: target_prefix_len });
    }
    let mut ap = Appender { program: program.clone(), next: program.next_id() };

    let writes: Vec<NodeId> = program.find(|k| k.is_state_write()).filter(|n| n.inputs.len() == 2).map(|n| n.id).collect();
    for id in writes {
        let one = ap.constant(1, 1);
        ap.program.nodes.get_mut(&id).unwrap().inputs.push(one);
    }

    let widths = program.value_widths();
    let conds: Vec<(NodeId, PortRef, u32)> = program
        .find(|k| *k == ProtoKind::Conditional)
        .filter_map(|n| {
            let c = n.inputs[0];
            widths.get(&c).filter(|w| **w > 1).map(|w| (n.id, c, *w))
        })
        .collect();
    for (id, c, w) in conds {
        let zero = ap.constant(w, 0);
        let nz = ap.add(ProtoKind::Binary { op: Opcode::Neq }, vec![c, zero]);
        ap.program.nodes.get_mut(&id).unwrap().inputs[0] = nz;
    }

    if old == target_prefix_len {
        return Ok(ap.program);
    }

    let new_prefix = PortRef::new(pin, PKT_PREFIX);
    let old_view = ap.add(ProtoKind::Slice { offset: 0, width: 8 * old }, vec![new_prefix]);
    for n in ap.program.nodes.values_mut() {
        if n.id == old_view.node {
            continue;
        }
        for i in n.inputs.iter_mut() {
            if *i == new_prefix {
                *i = old_view;
            }
        }
    }
    ap.program.nodes.get_mut(&pin).unwrap().kind = ProtoKind::PacketIn { prefix_len: target_prefix_len };

    let out_inputs = ap.program.nodes[&pout].inputs.clone();
    let (cmd, prefix, length) = (out_inputs[0], out_inputs[1], out_inputs[2]);
    let rest = ap.add(ProtoKind::Slice { offset: 8 * old, width: 8 * (target_prefix_len - old) }, vec![new_prefix]);
    let widened = ap.add(ProtoKind::Merge, vec![prefix, rest]);

    let cmd_const = match &ap.program.nodes[&cmd.node].kind {
        ProtoKind::Constant { value } => value.to_u64(),
        _ => None,
    };
    let length = match cmd_const {
        Some(c) if c == CMD_FORWARD || c == CMD_DROP => length,
        _ => {
            let trunc = ap.constant(2, CMD_TRUNCATE);
            let is_trunc = ap.add(ProtoKind::Binary { op: Opcode::Eq }, vec![cmd, trunc]);
            let limit = ap.constant(LENGTH_WIDTH, old as u64);
            let long = ap.add(ProtoKind::Binary { op: Opcode::Ltu }, vec![limit, length]);
            let clamp = ap.add(ProtoKind::Binary { op: Opcode::And }, vec![is_trunc, long]);
            ap.add(ProtoKind::Conditional, vec![clamp, limit, length])
        }
    };
    let out = ap.program.nodes.get_mut(&pout).unwrap();
    out.kind = ProtoKind::PacketOut { prefix_len: target_prefix_len };
    out.inputs = vec![cmd, widened, length];
    Ok(ap.program)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{validate_protocol, CamImpl, ProgramBuilder};
    use crate::sim::{run_protocol, StateStore};

    fn xor_first_byte(cmd: u64) -> ProtocolProgram {
        let mut b = ProgramBuilder::new();
        let (p, l) = b.packet_in(2);
        let lo = b.slice(p, 0, 8);
        let hi = b.slice(p, 8, 8);
        let x = b.binary(Opcode::Xor, lo, hi);
        let out = b.merge(&[x, hi]);
        let c = b.constant(2, cmd);
        b.packet_out(2, c, out, l);
        b.build()
    }

    #[test]
    fn widening_shapes() {
        let p = xor_first_byte(0);
        let n = normalize_program(&p, 4).unwrap();
        assert!(validate_protocol(&n).ok);
        assert_eq!(n.prefix_len(), Some(4));
        assert!(n.find(|k| *k == ProtoKind::Slice { offset: 0, width: 16 }).next().is_some());
        assert_eq!(normalize_program(&p, 1), Err(NormalizeError::PrefixOverflow { have: 2, target: 1 }));
        assert_eq!(normalize_program(&p, 2).unwrap(), p);
    }

    #[test]
    fn widening_preserves_behavior() {
        for cmd in [0, 1, 2] {
            let p = xor_first_byte(cmd);
            let n = normalize_program(&p, 5).unwrap();
            let st = StateStore::default();
            for len in 0..9u8 {
                let pkt: Vec<u8> = (1..=len).collect();
                assert_eq!(run_protocol(&p, &st, &pkt).unwrap().0, run_protocol(&n, &st, &pkt).unwrap().0, "cmd {cmd} len {len}");
            }
        }
    }

    #[test]
    fn enables_and_conditions() {
        let mut b = ProgramBuilder::new();
        b.declare_table(0, 8, 4, CamImpl::RegisterCam);
        let (p, l) = b.packet_in(1);
        let k = b.slice(p, 0, 8);
        let h = b.constant(2, 0);
        b.table_write(0, k, h, None);
        let c = b.cond(k, k, k);
        let cmd = b.constant(2, 0);
        b.packet_out(1, cmd, c, l);
        let n = normalize_program(&b.build(), 1).unwrap();
        let r = validate_protocol(&n);
        assert!(r.ok && r.diagnostics.is_empty(), "{r}");
        assert!(n.find(|k| k.is_state_write()).all(|w| w.inputs.len() == 3));
    }
}
