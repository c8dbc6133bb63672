// SPDX-License-Identifier: Apache-2.0

//! Packet crafting, seeded random traffic and directed workloads for the
//! builtin programs.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::builtins::layout::{MEMCACHED_PORT, TCP_END};
use crate::bits::Bits;
use crate::sim::StateStore;

pub const MAC_A: [u8; 6] = [0x02, 0, 0, 0, 0, 0x0a];
pub const MAC_B: [u8; 6] = [0x02, 0, 0, 0, 0, 0x0b];
pub const IP_A: [u8; 4] = [10, 0, 0, 1];
pub const IP_B: [u8; 4] = [10, 0, 0, 2];

/// Ones-complement sum of big-endian 16-bit words, folded to 16 bits.
pub fn ones_sum(data: &[u8]) -> u16 {
    let mut acc: u32 = 0;
    for chunk in data.chunks(2) {
        let w = u16::from_be_bytes([chunk[0], *chunk.get(1).unwrap_or(&0)]);
        acc += w as u32;
    }
    while acc > 0xffff {
        acc = (acc & 0xffff) + (acc >> 16);
    }
    acc as u16
}

/// Ethernet + 20-byte IPv4 header around `l4`, with a valid header checksum.
pub fn ipv4_frame(proto: u8, src: [u8; 4], dst: [u8; 4], l4: &[u8]) -> Vec<u8> {
    let mut p = Vec::with_capacity(34 + l4.len());
    p.extend_from_slice(&MAC_B);
    p.extend_from_slice(&MAC_A);
    p.extend_from_slice(&[0x08, 0x00]);
    let total = (20 + l4.len()) as u16;
    let mut ip = vec![0x45, 0];
    ip.extend_from_slice(&total.to_be_bytes());
    ip.extend_from_slice(&[0x12, 0x34, 0x40, 0x00, 64, proto, 0, 0]);
    ip.extend_from_slice(&src);
    ip.extend_from_slice(&dst);
    let cs = !ones_sum(&ip);
    ip[10..12].copy_from_slice(&cs.to_be_bytes());
    p.extend_from_slice(&ip);
    p.extend_from_slice(l4);
    p
}

/// TCP/IPv4 segment between `IP_A` and `IP_B` with a valid checksum.
pub fn tcp_packet(sport: u16, dport: u16, seq: u32, ack: u32, flags: u8, payload: &[u8]) -> Vec<u8> {
    let mut t = Vec::with_capacity(20 + payload.len());
    t.extend_from_slice(&sport.to_be_bytes());
    t.extend_from_slice(&dport.to_be_bytes());
    t.extend_from_slice(&seq.to_be_bytes());
    t.extend_from_slice(&ack.to_be_bytes());
    t.extend_from_slice(&[0x50, flags, 0x20, 0x00, 0, 0, 0, 0]);
    t.extend_from_slice(payload);
    let mut pseudo = Vec::new();
    pseudo.extend_from_slice(&IP_A);
    pseudo.extend_from_slice(&IP_B);
    pseudo.extend_from_slice(&[0, 6]);
    pseudo.extend_from_slice(&(t.len() as u16).to_be_bytes());
    pseudo.extend_from_slice(&t);
    let cs = !ones_sum(&pseudo);
    t[16..18].copy_from_slice(&cs.to_be_bytes());
    ipv4_frame(6, IP_A, IP_B, &t)
}

/// UDP/IPv4 datagram with a zero (absent) checksum.
pub fn udp_packet(sport: u16, dport: u16, payload: &[u8]) -> Vec<u8> {
    let mut u = Vec::with_capacity(8 + payload.len());
    u.extend_from_slice(&sport.to_be_bytes());
    u.extend_from_slice(&dport.to_be_bytes());
    u.extend_from_slice(&((8 + payload.len()) as u16).to_be_bytes());
    u.extend_from_slice(&[0, 0]);
    u.extend_from_slice(payload);
    ipv4_frame(17, IP_A, IP_B, &u)
}

const MC_FRAME_HEADER: [u8; 8] = [0, 1, 0, 0, 0, 1, 0, 0];

pub fn memcached_get(key: &[u8; 8]) -> Vec<u8> {
    let mut pl = MC_FRAME_HEADER.to_vec();
    pl.extend_from_slice(b"get ");
    pl.extend_from_slice(key);
    pl.extend_from_slice(b"\r\n");
    udp_packet(40000, MEMCACHED_PORT, &pl)
}

pub fn memcached_value(key: &[u8; 8], value: &[u8; 4]) -> Vec<u8> {
    let mut pl = MC_FRAME_HEADER.to_vec();
    pl.extend_from_slice(b"VALUE ");
    pl.extend_from_slice(key);
    pl.extend_from_slice(b" 0 4\r\n");
    pl.extend_from_slice(value);
    pl.extend_from_slice(b"\r\nEND\r\n");
    udp_packet(MEMCACHED_PORT, 40000, &pl)
}

pub const NAT_RULES: [((u16, u16), (u16, u16)); 3] =
    [((1234, 7777), (1234, 80)), ((5555, 8080), (6000, 80)), ((40000, 443), (40001, 8443))];
pub const FIREWALL_RULES: [(u16, u16); 2] = [(1234, 23), (6666, 7777)];
pub const MC_ITEMS: [([u8; 8], [u8; 4]); 2] = [(*b"user:042", *b"\x01\x02\x03\x04"), (*b"cart:777", *b"WXYZ")];
pub const MC_MISS_KEYS: [[u8; 8]; 2] = [*b"user:999", *b"nokey123"];

fn port_key(sport: u16, dport: u16) -> Bits {
    let mut b = sport.to_be_bytes().to_vec();
    b.extend_from_slice(&dport.to_be_bytes());
    Bits::from_bytes_le(32, &b)
}

/// Checksum correction for rewriting the port pair `old` to `new`, in the
/// byte-swapped domain the NAT program computes in.
pub fn nat_correction(old: (u16, u16), new: (u16, u16)) -> u16 {
    let le = |p: u16| p.swap_bytes() as u32;
    let mut acc = le(old.0) + le(old.1) + (!le(new.0) & 0xffff) + (!le(new.1) & 0xffff);
    while acc > 0xffff {
        acc = (acc & 0xffff) + (acc >> 16);
    }
    acc as u16
}

/// State for the NAT program with `rules` at entries `0..`.
pub fn nat_state(store: &mut StateStore, rules: &[((u16, u16), (u16, u16))]) {
    for (i, (old, new)) in rules.iter().enumerate() {
        store.tables.get_mut(&0).expect("nat table").entries[i] = Some(port_key(old.0, old.1));
        store.arrays.get_mut(&0).expect("nat ports").values[i] = port_key(new.0, new.1);
        store.arrays.get_mut(&1).expect("nat corrections").values[i] =
            Bits::from_u64(32, nat_correction(*old, *new) as u64);
    }
}

pub fn firewall_state(store: &mut StateStore, rules: &[(u16, u16)]) {
    for (i, (s, d)) in rules.iter().enumerate() {
        store.tables.get_mut(&0).expect("firewall table").entries[i] = Some(port_key(*s, *d));
    }
}

pub fn memcached_state(store: &mut StateStore, items: &[([u8; 8], [u8; 4])]) {
    for (i, (k, v)) in items.iter().enumerate() {
        store.tables.get_mut(&0).expect("memcached table").entries[i] = Some(Bits::from_bytes_le(64, k));
        store.arrays.get_mut(&0).expect("memcached values").values[i] = Bits::from_bytes_le(32, v);
    }
}

/// Seeds `store` (built for the named builtin) with its sample entries.
pub fn builtin_state(name: &str, store: &mut StateStore) {
    match name {
        "nat" => nat_state(store, &NAT_RULES),
        "firewall" => firewall_state(store, &FIREWALL_RULES),
        "memcached_rx" | "memcached_tx" => memcached_state(store, &MC_ITEMS),
        _ => {}
    }
}

fn random_tcp(rng: &mut ChaCha8Rng) -> Vec<u8> {
    let sports = [1234, 5555, 40000, 6666, 80];
    let dports = [7777, 8080, 443, 23, 80];
    let sport = if rng.gen_bool(0.8) { *sports.choose(rng).unwrap() } else { rng.gen() };
    let dport = if rng.gen_bool(0.8) { *dports.choose(rng).unwrap() } else { rng.gen() };
    let payload: Vec<u8> = (0..rng.gen_range(0..48)).map(|_| rng.gen()).collect();
    tcp_packet(sport, dport, rng.gen(), rng.gen(), 0x18, &payload)
}

fn random_key(rng: &mut ChaCha8Rng) -> [u8; 8] {
    let pool = [MC_ITEMS[0].0, MC_ITEMS[1].0, MC_MISS_KEYS[0], MC_MISS_KEYS[1]];
    if rng.gen_bool(0.85) {
        *pool.choose(rng).unwrap()
    } else {
        rng.gen()
    }
}

/// Seeded mix of raw bytes, TCP segments, memcached requests and
/// responses, and truncated frames.
pub fn random_packets(seed: u64, count: usize) -> Vec<Vec<u8>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let roll: f64 = rng.gen();
            let mut p = if roll < 0.15 {
                (0..rng.gen_range(0..=120)).map(|_| rng.gen()).collect()
            } else if roll < 0.5 {
                random_tcp(&mut rng)
            } else if roll < 0.7 {
                let k = random_key(&mut rng);
                memcached_get(&k)
            } else {
                let k = random_key(&mut rng);
                memcached_value(&k, &rng.gen())
            };
            if rng.gen_bool(0.1) && !p.is_empty() {
                let cut = rng.gen_range(0..p.len());
                p.truncate(cut);
            } else if rng.gen_bool(0.05) && p.len() > 23 {
                p[23] ^= 0xff;
            }
            p
        })
        .collect()
}

/// Fifty directed packets for the named builtin: table hits, misses and
/// malformed frames. Run them against [`builtin_state`].
pub fn directed_packets(name: &str) -> Vec<Vec<u8>> {
    let mut out: Vec<Vec<u8>> = Vec::new();
    match name {
        "nat" | "firewall" => {
            let hits: Vec<(u16, u16)> = if name == "nat" {
                NAT_RULES.iter().map(|r| r.0).collect()
            } else {
                FIREWALL_RULES.to_vec()
            };
            for (k, (s, d)) in hits.iter().enumerate() {
                for j in 0..6u32 {
                    out.push(tcp_packet(*s, *d, 1000 + j * 77 + k as u32, 0xfffffff0 + j, 0x10, &vec![j as u8; j as usize * 3]));
                }
            }
            for j in 0..8u16 {
                out.push(tcp_packet(2000 + j, 7000 + j, j as u32, 0, 0x02, &[]));
            }
            let (s, d) = hits[0];
            out.push(udp_packet(s, d, b"not tcp"));
            let mut arp = tcp_packet(s, d, 1, 2, 0x10, &[]);
            arp[12..14].copy_from_slice(&[0x08, 0x06]);
            out.push(arp);
        }
        _ => {
            for (k, v) in MC_ITEMS {
                for _ in 0..4 {
                    out.push(memcached_get(&k));
                    out.push(memcached_value(&k, &v));
                }
            }
            for k in MC_MISS_KEYS {
                for j in 0..3u8 {
                    out.push(memcached_get(&k));
                    out.push(memcached_value(&k, &[j; 4]));
                    out.push(memcached_get(&k));
                }
            }
            let mut wrong_port = memcached_get(&MC_ITEMS[0].0);
            wrong_port[36..38].copy_from_slice(&53u16.to_be_bytes());
            out.push(wrong_port);
            out.push(tcp_packet(40000, MEMCACHED_PORT, 0, 0, 0x10, b"get user:042\r\n"));
        }
    }
    // malformed: truncated headers, empty and garbage frames
    let seed_pkt = out[0].clone();
    let mut cut = 0;
    while out.len() < 50 {
        let len = [0, 1, 13, 14, 20, 33, 34, 40, TCP_END as usize - 1][cut % 9];
        let mut p = seed_pkt.clone();
        p.truncate(len.min(p.len()));
        if cut >= 9 {
            p = (0..cut as u8 * 5).collect();
        }
        out.push(p);
        cut += 1;
    }
    out.truncate(50);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checksums_verify() {
        let p = tcp_packet(1, 2, 3, 4, 0x10, b"abc");
        assert_eq!(ones_sum(&p[14..34]), 0xffff);
        let mut pseudo = p[26..34].to_vec();
        pseudo.extend_from_slice(&[0, 6, 0, (p.len() - 34) as u8]);
        pseudo.extend_from_slice(&p[34..]);
        assert_eq!(ones_sum(&pseudo), 0xffff);
    }

    #[test]
    fn deterministic_traffic() {
        assert_eq!(random_packets(7, 50), random_packets(7, 50));
        assert_ne!(random_packets(7, 50), random_packets(8, 50));
        for name in ["nat", "firewall", "memcached_rx", "memcached_tx"] {
            assert_eq!(directed_packets(name).len(), 50);
        }
    }
}
