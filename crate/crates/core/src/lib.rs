// SPDX-License-Identifier: Apache-2.0

pub mod bits;
pub mod ir;
pub mod frontend;
pub mod sim;
pub mod compiler;
pub mod fixedgen;
pub mod hwgen;
pub mod cli;
