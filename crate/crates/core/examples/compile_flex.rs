// SPDX-License-Identifier: Apache-2.0

//! Compiles the bundled NAT program onto a generated Flex pipeline and
//! checks the result against the program on random traffic.
//!
//! `cargo run --release --example compile_flex -- [stages] [alus]`

use rppp::compiler::{compile, Outcome, SearchParams};
use rppp::frontend::traffic::{builtin_state, random_packets};
use rppp::frontend::{builtin_program, gen_flex_arch, FlexParams};
use rppp::sim::{check_equivalence, StateStore};

fn main() {
    let args: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let (m, n) = (args.first().copied().unwrap_or(5), args.get(1).copied().unwrap_or(8));
    let program = builtin_program("nat").expect("builtin");
    let arch = gen_flex_arch(&FlexParams::new(m, n)).expect("flex parameters");
    println!("flex {m}x{n}: {} nodes, {} edges", arch.nodes.len(), arch.edge_count());

    let result = compile(&program, &arch, &SearchParams::default()).expect("compile");
    for t in &result.stats.tries {
        println!(
            "try {} limit {} vars {} clauses {} conflicts {} -> {:?} in {:.2?}",
            t.index, t.degree_limit, t.vars, t.clauses, t.conflicts, t.outcome, t.elapsed
        );
    }
    let Outcome::Feasible(config) = &result.outcome else {
        println!("outcome: {:?}", result.outcome);
        return;
    };
    let mut state = StateStore::for_program(&program);
    builtin_state("nat", &mut state);
    let report = check_equivalence(&program, &arch, config, &random_packets(1, 1000), &state).expect("simulation");
    print!("{report}");
}
