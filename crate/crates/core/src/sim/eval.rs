// SPDX-License-Identifier: Apache-2.0

use std::cmp::Ordering;

use crate::bits::Bits;
use crate::ir::{Opcode, Width};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{op}: {message}")]
pub struct EvalError {
    pub op: Opcode,
    pub message: String,
}

/// Applies `op` to `operands` of width `width`.
///
/// MUX takes `(cond, t, f)` with a 1-bit condition. Comparisons yield one
/// bit; everything else yields `width` bits.
pub fn eval_op(op: Opcode, operands: &[Bits], width: Width) -> Result<Bits, EvalError> {
    let err = |message: String| EvalError { op, message };
    if operands.len() != op.arity() {
        return Err(err(format!("expected {} operands, got {}", op.arity(), operands.len())));
    }
    let data = if op == Opcode::Mux {
        if operands[0].width() != 1 {
            return Err(err(format!("condition width {} != 1", operands[0].width())));
        }
        &operands[1..]
    } else {
        operands
    };
    if let Some(bad) = data.iter().find(|o| o.width() != width) {
        return Err(err(format!("operand width {} != {width}", bad.width())));
    }
    let a = &data[0];
    let b = data.get(1);
    let cmp = |f: fn(Ordering) -> bool, signed: bool| {
        let b = b.expect("binary");
        Bits::from_bool(f(if signed { a.cmp_signed(b) } else { a.cmp_unsigned(b) }))
    };
    Ok(match op {
        Opcode::Add => a.add(b.unwrap()),
        Opcode::Sub => a.sub(b.unwrap()),
        Opcode::Mul => a.mul(b.unwrap()),
        Opcode::And => a.and(b.unwrap()),
        Opcode::Or => a.or(b.unwrap()),
        Opcode::Xor => a.xor(b.unwrap()),
        Opcode::Not => a.not(),
        Opcode::Neg => a.neg(),
        Opcode::Shl => a.shl(b.unwrap()),
        Opcode::Shr => a.shr(b.unwrap()),
        Opcode::Eq => cmp(|o| o == Ordering::Equal, false),
        Opcode::Neq => cmp(|o| o != Ordering::Equal, false),
        Opcode::Ltu => cmp(|o| o == Ordering::Less, false),
        Opcode::Leu => cmp(|o| o != Ordering::Greater, false),
        Opcode::Lts => cmp(|o| o == Ordering::Less, true),
        Opcode::Les => cmp(|o| o != Ordering::Greater, true),
        Opcode::Mux => {
            if operands[0].is_zero() {
                data[1].clone()
            } else {
                data[0].clone()
            }
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(w: u32, v: u64) -> Bits {
        Bits::from_u64(w, v)
    }

    #[test]
    fn documented_cases() {
        assert_eq!(eval_op(Opcode::Add, &[b(8, 200), b(8, 100)], 8).unwrap(), b(8, 44));
        assert_eq!(eval_op(Opcode::Shr, &[b(4, 0b1000), b(4, 5)], 4).unwrap(), b(4, 0));
        assert_eq!(eval_op(Opcode::Lts, &[b(4, 0xF), b(4, 1)], 4).unwrap(), b(1, 1));
        assert_eq!(eval_op(Opcode::Ltu, &[b(4, 0xF), b(4, 1)], 4).unwrap(), b(1, 0));
        assert_eq!(eval_op(Opcode::Neg, &[b(8, 1)], 8).unwrap(), b(8, 0xFF));
        assert_eq!(eval_op(Opcode::Mux, &[b(1, 1), b(8, 3), b(8, 4)], 8).unwrap(), b(8, 3));
        assert_eq!(eval_op(Opcode::Mux, &[b(1, 0), b(8, 3), b(8, 4)], 8).unwrap(), b(8, 4));
    }

    #[test]
    fn width_violations() {
        assert!(eval_op(Opcode::Add, &[b(8, 1), b(16, 1)], 8).is_err());
        assert!(eval_op(Opcode::Mux, &[b(2, 1), b(8, 3), b(8, 4)], 8).is_err());
        assert!(eval_op(Opcode::Not, &[b(8, 1), b(8, 1)], 8).is_err());
    }
}
