// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;
use std::fmt;

use super::{Artifact, PipeKind, PipelineArch, ProtoKind, ProtocolProgram};

/// Node census of a graph artifact.
///
/// For programs, `alus` counts Unary, Binary and Conditional nodes and
/// `routers`/`regs` are zero. `slices` counts all bit conversions (Slice,
/// Merge, Extend).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Census {
    pub by_kind: BTreeMap<&'static str, usize>,
    pub alus: usize,
    pub consts: usize,
    pub regs: usize,
    pub slices: usize,
    pub routers: usize,
    pub edges: usize,
}

impl Census {
    pub fn count(&self, kind: &str) -> usize {
        self.by_kind.get(kind).copied().unwrap_or(0)
    }

    pub fn header() -> &'static str {
        "ALUs\tConsts\tRegs\tSlice\tRouters\tEdges"
    }

    pub fn row(&self) -> String {
        format!(
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.alus, self.consts, self.regs, self.slices, self.routers, self.edges
        )
    }
}

impl fmt::Display for Census {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", Census::header())?;
        writeln!(f, "{}", self.row())?;
        for (k, n) in &self.by_kind {
            writeln!(f, "{k}\t{n}")?;
        }
        Ok(())
    }
}

pub fn program_census(p: &ProtocolProgram) -> Census {
    let mut c = Census { edges: p.nodes.values().map(|n| n.inputs.len()).sum(), ..Default::default() };
    for n in p.nodes.values() {
        *c.by_kind.entry(n.kind.name()).or_default() += 1;
        match n.kind {
            ProtoKind::Unary { .. } | ProtoKind::Binary { .. } | ProtoKind::Conditional => c.alus += 1,
            ProtoKind::Constant { .. } => c.consts += 1,
            ProtoKind::Slice { .. } | ProtoKind::Merge | ProtoKind::Extend { .. } => c.slices += 1,
            _ => {}
        }
    }
    c
}

pub fn pipeline_census(a: &PipelineArch) -> Census {
    let mut c = Census { edges: a.edge_count(), ..Default::default() };
    for n in a.nodes.values() {
        *c.by_kind.entry(n.kind.name()).or_default() += 1;
        match n.kind {
            PipeKind::Alu { .. } => c.alus += 1,
            PipeKind::Constant { .. } => c.consts += 1,
            PipeKind::Register { .. } => c.regs += 1,
            PipeKind::Router => c.routers += 1,
            PipeKind::Slice { .. } | PipeKind::Merge | PipeKind::Extend { .. } => c.slices += 1,
            _ => {}
        }
    }
    c
}

/// Census of a graph artifact; configs have none.
pub fn census(a: &Artifact) -> Option<Census> {
    match a {
        Artifact::Protocol(p) => Some(program_census(p)),
        Artifact::Pipeline(a) => Some(pipeline_census(a)),
        Artifact::Config(_) => None,
    }
}
