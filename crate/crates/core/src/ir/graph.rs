// SPDX-License-Identifier: Apache-2.0

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap};

use super::{NodeId, PortRef};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CycleError {
    #[error("node {node} references missing node {missing}")]
    Dangling { node: NodeId, missing: NodeId },
    #[error("cycle through nodes {0:?}")]
    Cycle(Vec<NodeId>),
}

/// Kahn's algorithm; among ready nodes the smallest id goes first, so the
/// order is a pure function of the graph.
pub fn topo_order<'a>(
    nodes: impl IntoIterator<Item = (NodeId, &'a [PortRef])>,
) -> Result<Vec<NodeId>, CycleError> {
    let nodes: Vec<(NodeId, &[PortRef])> = nodes.into_iter().collect();
    let mut indeg: HashMap<NodeId, usize> = nodes.iter().map(|(id, _)| (*id, 0)).collect();
    let mut users: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
    for (id, inputs) in &nodes {
        for p in inputs.iter() {
            if !indeg.contains_key(&p.node) {
                return Err(CycleError::Dangling { node: *id, missing: p.node });
            }
            users.entry(p.node).or_default().push(*id);
        }
        *indeg.get_mut(id).unwrap() = inputs.len();
    }
    let mut ready: BinaryHeap<Reverse<NodeId>> =
        indeg.iter().filter(|(_, d)| **d == 0).map(|(id, _)| Reverse(*id)).collect();
    let mut order = Vec::with_capacity(nodes.len());
    while let Some(Reverse(id)) = ready.pop() {
        order.push(id);
        if let Some(us) = users.get(&id) {
            for u in us {
                let d = indeg.get_mut(u).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(Reverse(*u));
                }
            }
        }
    }
    if order.len() != nodes.len() {
        let mut stuck: Vec<NodeId> =
            indeg.into_iter().filter(|(_, d)| *d > 0).map(|(id, _)| id).collect();
        stuck.sort_unstable();
        return Err(CycleError::Cycle(stuck));
    }
    Ok(order)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orders_and_detects_cycles() {
        let a = [PortRef::out(2)];
        let b: [PortRef; 0] = [];
        let order = topo_order([(1, &a[..]), (2, &b[..])]).unwrap();
        assert_eq!(order, vec![2, 1]);

        let x = [PortRef::out(2)];
        let y = [PortRef::out(1)];
        assert!(matches!(topo_order([(1, &x[..]), (2, &y[..])]), Err(CycleError::Cycle(_))));
        assert!(matches!(
            topo_order([(1, &x[..])]),
            Err(CycleError::Dangling { node: 1, missing: 2 })
        ));
    }
}
