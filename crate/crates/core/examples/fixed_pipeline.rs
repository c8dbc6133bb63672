// SPDX-License-Identifier: Apache-2.0

//! Generates fixed pipelines for the bundled programs, compiles each program
//! back onto its own pipeline and checks equivalence on directed and random
//! traffic.

use rppp::compiler::{compile, Outcome, SearchParams};
use rppp::fixedgen::{generate_fixed, FixedGenOptions};
use rppp::frontend::traffic::{builtin_state, directed_packets, random_packets};
use rppp::frontend::{builtin_program, BUILTIN_NAMES};
use rppp::ir::pipeline_census;
use rppp::sim::{check_equivalence, StateStore};

fn main() {
    for name in BUILTIN_NAMES {
        let program = builtin_program(name).expect("builtin");
        let fixed = generate_fixed(&program, &FixedGenOptions::default()).expect("fixed pipeline");
        let census = pipeline_census(&fixed.arch);
        let result = compile(&program, &fixed.arch, &SearchParams::default()).expect("compile");
        let Outcome::Feasible(config) = &result.outcome else {
            println!("{name}: {:?}", result.outcome);
            continue;
        };
        let mut state = StateStore::for_program(&program);
        builtin_state(name, &mut state);
        let mut packets = directed_packets(name);
        packets.extend(random_packets(7, 1000));
        let report = check_equivalence(&program, &fixed.arch, config, &packets, &state).expect("simulation");
        println!("{name}: {} | compiled in {:.2?} | {}", census.row(), result.stats.elapsed, report.to_string().trim());
    }
}
