// SPDX-License-Identifier: Apache-2.0

//! Elaborates a Flex pipeline into a netlist, prints its cost table and
//! configuration address map, then compiles the NAT program onto it and
//! serializes the resulting configuration as a bitstream.

use rppp::compiler::{compile, SearchParams};
use rppp::frontend::{builtin_program, gen_flex_arch, FlexParams};
use rppp::hwgen::{config_bitstream, decode_bitstream, elaborate, estimate_cost, format_bitstream, ConfigMap};

fn main() {
    let arch = gen_flex_arch(&FlexParams::new(5, 8)).expect("flex parameters");
    let netlist = elaborate(&arch).expect("elaborate");
    println!("{:?}", netlist.instance_census());
    println!("{} wires, {} config registers", netlist.wires.len(), netlist.config_regs.len());
    print!("{}", estimate_cost(&arch));

    let map = ConfigMap::of(&netlist);
    println!("config map: {} words, {} bits", map.entries.len(), map.total_bits);
    for e in map.entries.iter().take(5) {
        println!("  {:4} node {:3} {:8} {} bits", e.address, e.owner, e.field, e.width);
    }

    let program = builtin_program("nat").expect("builtin");
    let result = compile(&program, &arch, &SearchParams::default()).expect("compile");
    let Some(config) = result.config() else {
        println!("nat does not fit: {:?}", result.outcome);
        return;
    };
    let words = config_bitstream(&netlist, config).expect("bitstream");
    // memory bindings travel outside the bitstream
    let mut expected = config.materialized(&arch);
    expected.array_bind.clear();
    expected.table_bind.clear();
    assert_eq!(decode_bitstream(&netlist, &words).expect("decode"), expected);
    let text = format_bitstream(&words);
    println!("bitstream head:");
    for line in text.lines().take(4) {
        println!("  {line}");
    }
}
