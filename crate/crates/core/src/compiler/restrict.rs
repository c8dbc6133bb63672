// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ir::{NodeId, PipeKind, PipeNode, PipelineArch};

/// The router inputs the encoder may use. Routers absent from the map keep
/// every input.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EdgeView {
    pub degree_limit: u32,
    kept: BTreeMap<NodeId, Vec<u32>>,
}

impl EdgeView {
    pub fn unrestricted() -> Self {
        EdgeView::default()
    }

    /// Surviving input ordinals of `node`, ascending.
    pub fn inputs(&self, node: &PipeNode) -> Vec<u32> {
        match self.kept.get(&node.id) {
            Some(k) => k.clone(),
            None => (0..node.inputs.len() as u32).collect(),
        }
    }

    pub fn is_restricted(&self) -> bool {
        !self.kept.is_empty()
    }

    pub fn edge_count(&self, arch: &PipelineArch) -> usize {
        arch.nodes.values().map(|n| self.kept.get(&n.id).map_or(n.inputs.len(), Vec::len)).sum()
    }
}

/// Keeps a uniformly random `degree_limit`-subset of the inputs of every
/// router with more inputs than that. A limit of 0 keeps everything.
pub fn restrict(arch: &PipelineArch, degree_limit: u32, seed: u64) -> EdgeView {
    let mut view = EdgeView { degree_limit, kept: BTreeMap::new() };
    if degree_limit == 0 {
        return view;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in arch.nodes.values() {
        if n.kind == PipeKind::Router && n.inputs.len() > degree_limit as usize {
            let mut pick: Vec<u32> =
                sample(&mut rng, n.inputs.len(), degree_limit as usize).into_iter().map(|i| i as u32).collect();
            pick.sort_unstable();
            view.kept.insert(n.id, pick);
        }
    }
    view
}
