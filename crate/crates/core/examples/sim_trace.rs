// SPDX-License-Identifier: Apache-2.0

//! Runs the bundled key-value cache program over its directed packets and
//! through the text trace format, showing forwarded bytes and drops.

use rppp::frontend::builtin_program;
use rppp::frontend::traffic::{builtin_state, directed_packets};
use rppp::sim::{format_trace, parse_trace, Executor, PacketResult, StateStore};

fn main() {
    let program = builtin_program("memcached_rx").expect("builtin");
    let packets = parse_trace(&format_trace(&directed_packets("memcached_rx"))).expect("trace round trip");

    let mut state = StateStore::for_program(&program);
    builtin_state("memcached_rx", &mut state);
    let mut exec = Executor::for_program(&program).expect("executor");
    for (i, p) in packets.iter().enumerate() {
        match exec.run(&mut state, p).expect("simulation") {
            PacketResult::Forward(bytes) => println!("{i} forward {}", hex::encode(bytes)),
            PacketResult::Drop => println!("{i} drop"),
        }
    }
}
