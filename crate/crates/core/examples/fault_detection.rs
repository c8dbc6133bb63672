// SPDX-License-Identifier: Apache-2.0

//! Compiles NAT onto Flex, then corrupts one ALU opcode in the configuration
//! and shows how the equivalence checker reports the first divergence.

use rppp::compiler::{compile, SearchParams};
use rppp::frontend::traffic::{builtin_state, directed_packets, random_packets};
use rppp::frontend::{builtin_program, gen_flex_arch, FlexParams};
use rppp::ir::{Opcode, PipeKind};
use rppp::sim::{check_equivalence, StateStore};

fn main() {
    let program = builtin_program("nat").expect("builtin");
    let arch = gen_flex_arch(&FlexParams::new(5, 8)).expect("flex parameters");
    let mut config = compile(&program, &arch, &SearchParams::default()).expect("compile").config().expect("feasible").clone();

    let mut state = StateStore::for_program(&program);
    builtin_state("nat", &mut state);
    let mut packets = directed_packets("nat");
    packets.extend(random_packets(3, 200));
    println!("intact: {}", check_equivalence(&program, &arch, &config, &packets, &state).expect("sim").equivalent());

    // flip the first ADD the mapping uses to SUB
    let victim = config
        .alu_op
        .iter()
        .find(|(id, op)| **op == Opcode::Add && matches!(&arch.nodes[*id].kind, PipeKind::Alu { ops, .. } if ops.contains(&Opcode::Sub)))
        .map(|(id, _)| *id)
        .expect("mapping uses an ADD");
    config.alu_op.insert(victim, Opcode::Sub);
    let report = check_equivalence(&program, &arch, &config, &packets, &state).expect("sim");
    println!("corrupted ALU {victim}:");
    print!("{report}");
}
