// SPDX-License-Identifier: Apache-2.0

use super::exec::{Executor, PacketResult, SimError};
use super::state::StateStore;
use crate::ir::{PipelineArch, ProtocolProgram, RuntimeConfig};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub index: usize,
    pub packet: Vec<u8>,
    pub oracle: PacketResult,
    pub pipeline: PacketResult,
    /// First output component that differs, e.g. `byte 12`.
    pub divergence: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EquivalenceReport {
    pub packets_run: usize,
    pub mismatches: Vec<Mismatch>,
    /// First state difference after the trace, if any.
    pub state_mismatch: Option<String>,
}

impl EquivalenceReport {
    pub fn equivalent(&self) -> bool {
        self.mismatches.is_empty() && self.state_mismatch.is_none()
    }
}

impl std::fmt::Display for EquivalenceReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "packets: {}, mismatches: {}", self.packets_run, self.mismatches.len())?;
        for m in self.mismatches.iter().take(5) {
            writeln!(f, "  packet {}: {} ({})", m.index, m.divergence, hex::encode(&m.packet))?;
        }
        if let Some(s) = &self.state_mismatch {
            writeln!(f, "  state: {s}")?;
        }
        Ok(())
    }
}

fn divergence(a: &PacketResult, b: &PacketResult) -> Option<String> {
    match (a.bytes(), b.bytes()) {
        (None, None) => None,
        (Some(_), None) | (None, Some(_)) => Some("verdict".into()),
        (Some(x), Some(y)) => match x.iter().zip(y).position(|(p, q)| p != q) {
            Some(i) => Some(format!("byte {i}")),
            None if x.len() != y.len() => Some(format!("length {} vs {}", x.len(), y.len())),
            None => None,
        },
    }
}

/// Runs `packets` through the program and the configured pipeline from the
/// same initial state (`initial` is keyed by program array/table ids) and
/// compares every verdict and the final state.
pub fn check_equivalence(
    program: &ProtocolProgram,
    arch: &PipelineArch,
    config: &RuntimeConfig,
    packets: &[Vec<u8>],
    initial: &StateStore,
) -> Result<EquivalenceReport, SimError> {
    let mut oracle = Executor::for_program(program)?;
    let mut pipe = Executor::for_pipeline(arch, config)?;
    let mut ps = initial.clone();
    let mut hs = StateStore::for_arch(arch);
    initial.transfer_into(&mut hs, &config.array_bind, &config.table_bind);
    let mut report = EquivalenceReport::default();
    for (index, pkt) in packets.iter().enumerate() {
        let a = oracle.run(&mut ps, pkt)?;
        let b = pipe.run(&mut hs, pkt)?;
        report.packets_run += 1;
        if let Some(d) = divergence(&a, &b) {
            report.mismatches.push(Mismatch { index, packet: pkt.clone(), oracle: a, pipeline: b, divergence: d });
        }
    }
    report.state_mismatch = compare_state(program, config, &ps, &hs);
    Ok(report)
}

fn compare_state(program: &ProtocolProgram, config: &RuntimeConfig, ps: &StateStore, hs: &StateStore) -> Option<String> {
    for a in &program.arrays {
        let Some(mem) = config.array_bind.get(&a.id) else {
            if program.find(|k| k.array_id() == Some(a.id)).next().is_some() {
                return Some(format!("array {} unbound", a.id));
            }
            continue;
        };
        let (x, y) = (&ps.arrays[&a.id], hs.arrays.get(mem)?);
        if let Some(i) = x.values.iter().zip(&y.values).position(|(p, q)| p != q) {
            return Some(format!("array {}[{i}]", a.id));
        }
    }
    for t in &program.tables {
        let Some(mem) = config.table_bind.get(&t.id) else {
            if program.find(|k| k.table_id() == Some(t.id)).next().is_some() {
                return Some(format!("table {} unbound", t.id));
            }
            continue;
        };
        let (x, y) = (&ps.tables[&t.id], hs.tables.get(mem)?);
        if let Some(i) = x.entries.iter().zip(&y.entries).position(|(p, q)| p != q) {
            return Some(format!("table {} entry {i}", t.id));
        }
    }
    None
}
