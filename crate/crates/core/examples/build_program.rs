// SPDX-License-Identifier: Apache-2.0

//! Builds a small stateful program by hand: a per-flow packet counter whose
//! running count is written back into the packet. The program is validated,
//! serialized and run on a few packets.

use rppp::ir::{program_census, store_program, validate_protocol, Opcode, ProgramBuilder};
use rppp::sim::{run_protocol, StateStore};

fn main() {
    let mut b = ProgramBuilder::new();
    b.declare_array(0, 16, 4);
    let (prefix, len) = b.packet_in(4);
    let flow = b.slice(prefix, 0, 2);
    let old = b.array_read(0, flow);
    let one = b.constant(16, 1);
    let new = b.binary(Opcode::Add, old, one);
    b.array_write(0, flow, new, None);
    let head = b.slice(prefix, 0, 16);
    let out = b.merge(&[head, new]);
    let cmd = b.constant(2, 0);
    b.packet_out(4, cmd, out, len);
    let program = b.build();

    let report = validate_protocol(&program);
    assert!(report.ok, "{report}");
    println!("{}", program_census(&program));
    println!("{} bytes of JSON", store_program(&program).len());

    let mut state = StateStore::for_program(&program);
    for pkt in [[1u8, 0, 0, 0], [1, 0, 0, 0], [2, 0, 0, 0], [1, 0, 0, 0]] {
        let (result, next) = run_protocol(&program, &state, &pkt).expect("simulation");
        println!("{} -> {:?}", hex::encode(pkt), result.bytes().map(hex::encode));
        state = next;
    }
}
