// SPDX-License-Identifier: Apache-2.0

//! Bit-exact functional simulation of programs and configured pipelines.

mod equiv;
mod eval;
mod exec;
mod state;
mod trace;

pub use equiv::{check_equivalence, EquivalenceReport, Mismatch};
pub use eval::{eval_op, EvalError};
pub use exec::{run_pipeline, run_protocol, Executor, PacketResult, SimError};
pub use state::{ArrayState, CamState, StateStore, HASH_MULTIPLIER};
pub use trace::{format_trace, parse_trace, TraceError};
