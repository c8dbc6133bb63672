// SPDX-License-Identifier: Apache-2.0

//! Behavioural checks of the bundled programs against hand-computed packets.

use rppp::frontend::builtin_program;
use rppp::frontend::traffic::*;
use rppp::ir::ProtocolProgram;
use rppp::sim::{run_protocol, PacketResult, StateStore};

fn setup(name: &str) -> (ProtocolProgram, StateStore) {
    let p = builtin_program(name).unwrap();
    let mut s = StateStore::for_program(&p);
    builtin_state(name, &mut s);
    (p, s)
}

fn tcp_checksum_ok(p: &[u8]) -> bool {
    let tcp_len = p.len() - 34;
    let mut pseudo = p[26..34].to_vec();
    pseudo.extend_from_slice(&[0, 6]);
    pseudo.extend_from_slice(&(tcp_len as u16).to_be_bytes());
    pseudo.extend_from_slice(&p[34..]);
    ones_sum(&pseudo) == 0xffff
}

fn forwarded(r: PacketResult) -> Vec<u8> {
    r.bytes().expect("forwarded").to_vec()
}

#[test]
fn nat_rewrites_ports_and_keeps_checksum_valid() {
    let (p, s) = setup("nat");
    for (old, new) in NAT_RULES {
        let pkt = tcp_packet(old.0, old.1, 99, 1, 0x10, b"payload");
        let (r, _) = run_protocol(&p, &s, &pkt).unwrap();
        let out = forwarded(r);
        let mut want = pkt.clone();
        want[34..36].copy_from_slice(&new.0.to_be_bytes());
        want[36..38].copy_from_slice(&new.1.to_be_bytes());
        assert_eq!(out[..50], want[..50]);
        assert_eq!(out[52..], want[52..]);
        assert!(tcp_checksum_ok(&out), "checksum after {old:?} -> {new:?}");
    }
}

#[test]
fn nat_passes_misses_and_non_tcp() {
    let (p, s) = setup("nat");
    for pkt in [tcp_packet(1, 2, 3, 4, 0x10, b""), udp_packet(1234, 7777, b"x"), vec![1, 2, 3]] {
        let (r, _) = run_protocol(&p, &s, &pkt).unwrap();
        assert_eq!(forwarded(r), pkt);
    }
}

#[test]
fn firewall_answers_blocked_flows_with_rst() {
    let (p, s) = setup("firewall");
    let (sport, dport) = FIREWALL_RULES[0];
    let pkt = tcp_packet(sport, dport, 0x01020304, 0xa0b0c0d0, 0x18, b"hello");
    let (r, _) = run_protocol(&p, &s, &pkt).unwrap();
    let out = forwarded(r);
    assert_eq!(out.len(), 54);
    assert_eq!(out[0..6], pkt[6..12]);
    assert_eq!(out[6..12], pkt[0..6]);
    assert_eq!(out[26..30], pkt[30..34]);
    assert_eq!(out[30..34], pkt[26..30]);
    assert_eq!(out[34..36], dport.to_be_bytes());
    assert_eq!(out[36..38], sport.to_be_bytes());
    assert_eq!(out[38..42], 0xa0b0c0d0u32.to_be_bytes());
    assert_eq!(out[42..46], 0x01020305u32.to_be_bytes());
    assert_eq!(out[46], 0x50);
    assert_eq!(out[47], 0x14);
    assert_eq!(out[16..18], 40u16.to_be_bytes());
    assert_eq!(ones_sum(&out[14..34]), 0xffff);
    assert!(tcp_checksum_ok(&out));

    let ok = tcp_packet(sport, dport + 1, 1, 2, 0x18, b"hello");
    let (r, _) = run_protocol(&p, &s, &ok).unwrap();
    assert_eq!(forwarded(r), ok);
}

#[test]
fn memcached_rx_answers_cached_keys() {
    let (p, s) = setup("memcached_rx");
    let (key, val) = MC_ITEMS[1];
    let (r, _) = run_protocol(&p, &s, &memcached_get(&key)).unwrap();
    let out = forwarded(r);
    let mut body = b"VALUE ".to_vec();
    body.extend_from_slice(&key);
    body.extend_from_slice(b" 0 4\r\n");
    body.extend_from_slice(&val);
    body.extend_from_slice(b"\r\nEND\r\n");
    assert_eq!(out.len(), 50 + body.len());
    assert_eq!(out[50..], body[..]);
    assert_eq!(out[34..36], 11211u16.to_be_bytes());
    assert_eq!(out[38..40], ((out.len() - 34) as u16).to_be_bytes());
    assert_eq!(out[16..18], ((out.len() - 14) as u16).to_be_bytes());
    assert_eq!(ones_sum(&out[14..34]), 0xffff);

    let miss = memcached_get(&MC_MISS_KEYS[0]);
    let (r, _) = run_protocol(&p, &s, &miss).unwrap();
    assert_eq!(forwarded(r), miss);
}

#[test]
fn memcached_tx_fills_the_cache_seen_by_rx() {
    let (tx, s0) = setup("memcached_tx");
    let (rx, _) = setup("memcached_rx");
    let key = MC_MISS_KEYS[1];
    let resp = memcached_value(&key, b"QRST");
    let (r, s1) = run_protocol(&tx, &s0, &resp).unwrap();
    assert_eq!(forwarded(r), resp);
    let (r, _) = run_protocol(&rx, &s1, &memcached_get(&key)).unwrap();
    let out = forwarded(r);
    assert_eq!(out[70..74], *b"QRST");

    // updating an existing key overwrites its value in place
    let (_, s2) = run_protocol(&tx, &s1, &memcached_value(&key, b"zzzz")).unwrap();
    assert_eq!(s2.tables[&0].entries.iter().filter(|e| e.is_some()).count(), 3);
    let (r, _) = run_protocol(&rx, &s2, &memcached_get(&key)).unwrap();
    assert_eq!(forwarded(r)[70..74], *b"zzzz");
}

#[test]
fn directed_workloads_never_error() {
    for name in rppp::frontend::BUILTIN_NAMES {
        let (p, mut s) = setup(name);
        for pkt in directed_packets(name).iter().chain(random_packets(3, 200).iter()) {
            let (_, next) = run_protocol(&p, &s, pkt).unwrap();
            s = next;
        }
    }
}
