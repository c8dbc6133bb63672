// SPDX-License-Identifier: Apache-2.0

mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rppp::compiler::{compile, Outcome, SearchParams};
use rppp::fixedgen::{generate_fixed, FixedGenOptions};
use rppp::frontend::traffic::random_packets;
use rppp::frontend::{builtin_program, gen_flex_arch, FlexParams};
use rppp::hwgen::{config_bitstream, decode_bitstream, elaborate, estimate_cost, ConfigMap};
use rppp::ir::{
    load_artifact, store_pipeline, validate_pipeline, ArtifactKind, Opcode, PipeKind, PipelineArch, PortRef,
    RuntimeConfig,
};
use rppp::sim::{check_equivalence, StateStore};

fn flex(stages: u32, alus: u32, lat: u32, op_mask: u32) -> PipelineArch {
    let mut p = FlexParams::new(stages, alus);
    p.alu_latency = lat;
    let ops: Vec<Opcode> = Opcode::ALL.iter().copied().enumerate().filter(|(i, _)| op_mask >> i & 1 == 1).map(|x| x.1).collect();
    p.ops = if ops.is_empty() { vec![Opcode::Add] } else { ops };
    gen_flex_arch(&p).unwrap()
}

fn random_config(seed: u64, arch: &PipelineArch) -> RuntimeConfig {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut c = RuntimeConfig::default();
    for n in arch.nodes.values() {
        match &n.kind {
            PipeKind::Router if n.inputs.len() > 1 && rng.gen_bool(0.5) => {
                c.router_select.insert(n.id, rng.gen_range(0..n.inputs.len() as u32));
            }
            PipeKind::Alu { ops, .. } if ops.len() > 1 && rng.gen_bool(0.5) => {
                c.alu_op.insert(n.id, *ops.choose(&mut rng).unwrap());
            }
            PipeKind::Constant { width, value: None } if rng.gen_bool(0.5) => {
                c.const_value.insert(n.id, rppp::bits::Bits::from_u64(*width, rng.gen()));
            }
            _ => {}
        }
    }
    c
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn netlist_is_structural(stages in 1u32..4, alus in 1u32..4, lat in 1u32..4, mask in any::<u32>()) {
        let arch = flex(stages, alus, lat, mask);
        let nl = elaborate(&arch).unwrap();
        let bus = usize::from(!nl.config_regs.is_empty());
        prop_assert_eq!(nl.instances.len(), arch.nodes.len() + bus);
        prop_assert_eq!(nl.wires.len(), arch.edge_count());
        prop_assert_eq!(nl.to_json(), elaborate(&arch).unwrap().to_json());
        prop_assert_eq!(nl.instance_census().get("Alu").copied().unwrap_or(0), (stages * alus) as usize);
    }

    #[test]
    fn bitstream_round_trip(stages in 1u32..3, alus in 1u32..4, mask in any::<u32>(), seed in any::<u64>()) {
        let arch = flex(stages, alus, 1, mask);
        let nl = elaborate(&arch).unwrap();
        let cfg = random_config(seed, &arch);
        let words = config_bitstream(&nl, &cfg).unwrap();
        prop_assert_eq!(words.len(), ConfigMap::of(&nl).entries.len());
        prop_assert_eq!(decode_bitstream(&nl, &words).unwrap(), cfg.materialized(&arch));
    }

    #[test]
    fn config_map_ignores_document_order(stages in 1u32..3, alus in 1u32..3, seed in any::<u64>()) {
        let arch = flex(stages, alus, 1, u32::MAX);
        let mut doc: serde_json::Value = serde_json::from_str(&store_pipeline(&arch)).unwrap();
        doc["nodes"].as_array_mut().unwrap().shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let shuffled = load_artifact(doc.to_string().as_bytes(), Some(ArtifactKind::Pipeline)).unwrap().into_pipeline().unwrap();
        prop_assert_eq!(ConfigMap::of(&elaborate(&shuffled).unwrap()), ConfigMap::of(&elaborate(&arch).unwrap()));
    }

    #[test]
    fn cost_is_monotone(stages in 1u32..3, alus in 1u32..3, mask in any::<u32>(), extra in 0usize..4, op in 0usize..17) {
        let arch = flex(stages, alus, 1, mask);
        let before = estimate_cost(&arch).area;
        // adding any node never lowers the area
        let mut grown = arch.clone();
        let id = grown.nodes.keys().next_back().unwrap() + 1;
        let src = PortRef::out(grown.packet_in().unwrap().id);
        let kind = match extra {
            0 => PipeKind::Register { width: 8 },
            1 => PipeKind::Constant { width: 16, value: None },
            2 => PipeKind::Alu { width: 32, ops: vec![Opcode::ALL[op]], latency: 1 },
            _ => PipeKind::Router,
        };
        let inputs = match extra { 0 | 3 => vec![src, src], 2 => vec![src, src], _ => vec![] };
        grown.nodes.insert(id, rppp::ir::PipeNode { id, kind, inputs });
        prop_assert!(estimate_cost(&grown).area >= before);
        // extending every ALU's op set strictly raises it
        let mut wider = arch.clone();
        let new_op = Opcode::ALL[op];
        let mut changed = false;
        for n in wider.nodes.values_mut() {
            if let PipeKind::Alu { ops, .. } = &mut n.kind {
                if !ops.contains(&new_op) {
                    ops.push(new_op);
                    changed = true;
                }
            }
        }
        if changed {
            prop_assert!(estimate_cost(&wider).area > before);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    /// Fixed pipelines of random programs are valid, rigid, and equivalent
    /// to their program.
    #[test]
    fn fixedgen_is_sound(seed in any::<u64>(), lat in 1u32..4) {
        let program = common::tiny_program(&mut ChaCha8Rng::seed_from_u64(seed));
        let opts = FixedGenOptions { alu_latency: lat, ..FixedGenOptions::default() };
        let fixed = generate_fixed(&program, &opts).unwrap();
        prop_assert!(validate_pipeline(&fixed.arch).ok);
        prop_assert!(elaborate(&fixed.arch).unwrap().config_regs.is_empty());
        let r = compile(&program, &fixed.arch, &SearchParams::default()).unwrap();
        let Outcome::Feasible(cfg) = r.outcome else { return Err(TestCaseError::fail("fixed pipeline must compile")) };
        let rep = check_equivalence(&program, &fixed.arch, &cfg, &random_packets(seed, 60), &StateStore::for_program(&program)).unwrap();
        prop_assert!(rep.equivalent(), "{}", rep);
    }

    #[test]
    fn compile_is_deterministic(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let arch = common::tiny_arch(&mut rng);
        let program = common::tiny_program(&mut rng);
        let p = SearchParams { seed, ..SearchParams::default() };
        prop_assert_eq!(compile(&program, &arch, &p).unwrap().outcome, compile(&program, &arch, &p).unwrap().outcome);
    }
}

#[test]
fn parallel_workers_find_nat_mapping() {
    let program = builtin_program("nat").unwrap();
    let arch = gen_flex_arch(&FlexParams::new(5, 8)).unwrap();
    let r = compile(&program, &arch, &SearchParams { workers: 4, ..SearchParams::default() }).unwrap();
    assert!(matches!(r.outcome, Outcome::Feasible(_)));
    assert!(!r.stats.tries.is_empty());
}
