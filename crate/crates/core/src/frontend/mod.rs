// SPDX-License-Identifier: Apache-2.0

//! Architecture generation, program normalization and bundled workloads.

pub mod builtins;
mod flex;
mod normalize;
pub mod traffic;

pub use builtins::{builtin_program, BUILTIN_NAMES};
pub use flex::{gen_flex_arch, FlexError, FlexParams, MemBlock, MemKind};
pub use normalize::{normalize_program, NormalizeError};
