// SPDX-License-Identifier: Apache-2.0

//! Reference protocol programs over standard Ethernet/IPv4/TCP/UDP layouts.
//!
//! Multi-byte fields are assembled little-endian from the wire bytes, so a
//! 16-bit network field `0x0800` reads as `0x0008`. Ones-complement sums are
//! byte-order agnostic, which lets checksums be computed in this domain and
//! written back byte by byte.

use crate::ir::{CamImpl, Opcode, PortRef, ProgramBuilder, ProtocolProgram, Width};

pub const BUILTIN_NAMES: [&str; 4] = ["nat", "firewall", "memcached_rx", "memcached_tx"];

/// Offsets of the header fields the builtins touch.
pub mod layout {
    pub const ETH_DST: u32 = 0;
    pub const ETH_SRC: u32 = 6;
    pub const ETH_TYPE: u32 = 12;
    pub const IP: u32 = 14;
    pub const IP_TOTAL_LEN: u32 = 16;
    pub const IP_PROTO: u32 = 23;
    pub const IP_CSUM: u32 = 24;
    pub const IP_SRC: u32 = 26;
    pub const IP_DST: u32 = 30;
    pub const L4: u32 = 34;
    pub const SPORT: u32 = 34;
    pub const DPORT: u32 = 36;
    pub const TCP_SEQ: u32 = 38;
    pub const TCP_ACK: u32 = 42;
    pub const TCP_OFF: u32 = 46;
    pub const TCP_FLAGS: u32 = 47;
    pub const TCP_WIN: u32 = 48;
    pub const TCP_CSUM: u32 = 50;
    pub const TCP_URG: u32 = 52;
    pub const TCP_END: u32 = 54;
    pub const UDP_LEN: u32 = 38;
    pub const UDP_CSUM: u32 = 40;
    pub const MC_FRAME: u32 = 42;
    pub const MC_PAYLOAD: u32 = 50;
    pub const MEMCACHED_PORT: u16 = 11211;
    pub const MC_KEY_LEN: u32 = 8;
    pub const MC_VALUE_LEN: u32 = 4;
}

use layout::*;

pub fn builtin_program(name: &str) -> Option<ProtocolProgram> {
    Some(match name {
        "nat" => nat(),
        "firewall" => firewall(),
        "memcached_rx" => memcached_rx(),
        "memcached_tx" => memcached_tx(),
        _ => return None,
    })
}

/// Builder with per-byte caches over one packet prefix.
struct Ctx {
    b: ProgramBuilder,
    prefix: PortRef,
    length: PortRef,
    n: u32,
    bytes: Vec<Option<PortRef>>,
    le16: Vec<Option<PortRef>>,
}

impl Ctx {
    fn new(prefix_len: u32) -> Self {
        let mut b = ProgramBuilder::new();
        let (prefix, length) = b.packet_in(prefix_len);
        let n = prefix_len as usize;
        Ctx { b, prefix, length, n: prefix_len, bytes: vec![None; n], le16: vec![None; n] }
    }

    fn byte(&mut self, i: u32) -> PortRef {
        if let Some(p) = self.bytes[i as usize] {
            return p;
        }
        let p = self.b.slice(self.prefix, 8 * i, 8);
        self.bytes[i as usize] = Some(p);
        p
    }

    /// Bytes `i, i+1` with `i` in the low half.
    fn le16(&mut self, i: u32) -> PortRef {
        if let Some(p) = self.le16[i as usize] {
            return p;
        }
        let (lo, hi) = (self.byte(i), self.byte(i + 1));
        let p = self.b.merge(&[lo, hi]);
        self.le16[i as usize] = Some(p);
        p
    }

    fn le_bytes(&mut self, at: u32, n: u32) -> PortRef {
        let parts: Vec<PortRef> = (at..at + n).map(|i| self.byte(i)).collect();
        self.b.merge(&parts)
    }

    /// Network-order (big-endian) value of bytes `at..at+n`.
    fn be_bytes(&mut self, at: u32, n: u32) -> PortRef {
        let parts: Vec<PortRef> = (at..at + n).rev().map(|i| self.byte(i)).collect();
        self.b.merge(&parts)
    }

    fn c(&mut self, w: Width, v: u64) -> PortRef {
        self.b.constant(w, v)
    }

    fn op(&mut self, op: Opcode, a: PortRef, b: PortRef) -> PortRef {
        self.b.binary(op, a, b)
    }

    fn eq_const(&mut self, a: PortRef, w: Width, v: u64) -> PortRef {
        let k = self.c(w, v);
        self.op(Opcode::Eq, a, k)
    }

    fn and_all(&mut self, flags: &[PortRef]) -> PortRef {
        let mut acc = flags[0];
        for &f in &flags[1..] {
            acc = self.op(Opcode::And, acc, f);
        }
        acc
    }

    /// Ones-complement checksum of 16-bit words, returned as a 16-bit value.
    fn checksum(&mut self, words: &[PortRef]) -> PortRef {
        let mut acc = self.b.zext(words[0], 32);
        for &w in &words[1..] {
            let x = self.b.zext(w, 32);
            acc = self.op(Opcode::Add, acc, x);
        }
        for _ in 0..2 {
            let lo = self.b.slice(acc, 0, 16);
            let hi = self.b.slice(acc, 16, 16);
            let lo = self.b.zext(lo, 32);
            let hi = self.b.zext(hi, 32);
            acc = self.op(Opcode::Add, lo, hi);
        }
        let inv = self.b.unary(Opcode::Not, acc);
        self.b.slice(inv, 0, 16)
    }

    /// IPv4 with a 20-byte header and the given protocol, at least `min_len`
    /// bytes long.
    fn ipv4_guard(&mut self, proto: u64, min_len: u64) -> PortRef {
        let et = self.le16(ETH_TYPE);
        let is_ip = self.eq_const(et, 16, 0x0008);
        let vihl = self.byte(IP);
        let is_v4 = self.eq_const(vihl, 8, 0x45);
        let pr = self.byte(IP_PROTO);
        let is_proto = self.eq_const(pr, 8, proto);
        let limit = self.c(16, min_len);
        let long = self.op(Opcode::Leu, limit, self.length);
        self.and_all(&[is_ip, is_v4, is_proto, long])
    }

    /// Output prefix: `replace[i]` where given, the input byte otherwise.
    fn rebuild(&mut self, replace: &[Option<PortRef>]) -> PortRef {
        let parts: Vec<PortRef> = (0..self.n)
            .map(|i| replace.get(i as usize).copied().flatten().unwrap_or_else(|| self.byte(i)))
            .collect();
        self.b.merge(&parts)
    }

    fn bytes_of(&mut self, v: PortRef, n: u32) -> Vec<PortRef> {
        (0..n).map(|j| self.b.slice(v, 8 * j, 8)).collect()
    }

    fn set_bytes(replace: &mut [Option<PortRef>], at: u32, bytes: &[PortRef]) {
        for (k, b) in bytes.iter().enumerate() {
            replace[at as usize + k] = Some(*b);
        }
    }
}

/// TCP port translation. Table 0 holds the original (source, destination)
/// port pair as its 32-bit key; array 0 holds the replacement pair and
/// array 1 the checksum correction `m + ~m'` (ones-complement, in the
/// byte-swapped domain) for that entry.
pub fn nat() -> ProtocolProgram {
    let mut x = Ctx::new(64);
    x.b.declare_table(0, 32, 256, CamImpl::RegisterCam);
    x.b.declare_array(0, 32, 256);
    x.b.declare_array(1, 32, 256);

    let et = x.le16(ETH_TYPE);
    let et = x.b.zext(et, 32);
    let is_ip = x.eq_const(et, 32, 0x0008);
    let pr = x.byte(IP_PROTO);
    let pr = x.b.zext(pr, 32);
    let is_tcp = x.eq_const(pr, 32, 6);
    let len = x.b.zext(x.length, 32);
    let limit = x.c(32, TCP_END as u64);
    let long = x.op(Opcode::Leu, limit, len);

    let (sp, dp) = (x.le16(SPORT), x.le16(DPORT));
    let key = x.b.merge(&[sp, dp]);
    let hit = x.b.table_lookup(0, key);
    let idx = x.b.slice(hit, 0, 8);
    let valid = x.b.slice(hit, 8, 1);
    let ports = x.b.array_read(0, idx);
    let corr = x.b.array_read(1, idx);

    let f: Vec<PortRef> = [is_ip, is_tcp, long, valid].iter().map(|p| x.b.zext(*p, 32)).collect();
    let t1 = x.op(Opcode::And, f[0], f[1]);
    let t2 = x.op(Opcode::And, f[2], f[3]);
    let go32 = x.op(Opcode::And, t1, t2);
    let zero = x.c(32, 0);
    let go = x.op(Opcode::Neq, go32, zero);

    let cs = x.le16(TCP_CSUM);
    let cs = x.b.zext(cs, 32);
    let sum = x.op(Opcode::Add, cs, corr);
    let lo = x.b.slice(sum, 0, 16);
    let hi = x.b.slice(sum, 16, 16);
    let lo = x.b.zext(lo, 32);
    let hi = x.b.zext(hi, 32);
    let fold = x.op(Opcode::Add, lo, hi);

    let out_ports = x.b.cond(go, ports, key);
    let out_cs = x.b.cond(go, fold, cs);
    let mut rep = vec![None; 64];
    let pb = x.bytes_of(out_ports, 4);
    Ctx::set_bytes(&mut rep, SPORT, &pb);
    let cb = x.bytes_of(out_cs, 2);
    Ctx::set_bytes(&mut rep, TCP_CSUM, &cb);
    let out = x.rebuild(&rep);
    let cmd = x.c(2, 0);
    x.b.packet_out(64, cmd, out, x.length);
    x.b.build()
}

/// Answers TCP segments whose port pair is in table 0 with a reset: the
/// reply swaps addresses and ports, acknowledges `seq + 1`, carries the
/// original acknowledgment as its sequence number and is cut to 54 bytes.
pub fn firewall() -> ProtocolProgram {
    let mut x = Ctx::new(64);
    x.b.declare_table(0, 32, 256, CamImpl::RegisterCam);
    let guard = x.ipv4_guard(6, TCP_END as u64);
    let key = x.le_bytes(SPORT, 4);
    let hit = x.b.table_lookup(0, key);
    let valid = x.b.slice(hit, 8, 1);
    let go = x.op(Opcode::And, guard, valid);

    let mut rep: Vec<Option<PortRef>> = vec![None; 64];
    for i in 0..6 {
        let (d, s) = (x.byte(ETH_DST + i), x.byte(ETH_SRC + i));
        rep[(ETH_DST + i) as usize] = Some(s);
        rep[(ETH_SRC + i) as usize] = Some(d);
    }
    for i in 0..4 {
        let (s, d) = (x.byte(IP_SRC + i), x.byte(IP_DST + i));
        rep[(IP_SRC + i) as usize] = Some(d);
        rep[(IP_DST + i) as usize] = Some(s);
    }
    for i in 0..2 {
        let (s, d) = (x.byte(SPORT + i), x.byte(DPORT + i));
        rep[(SPORT + i) as usize] = Some(d);
        rep[(DPORT + i) as usize] = Some(s);
    }
    // total length 40 in network order
    let tl = x.c(16, 0x2800);
    let tlb = x.bytes_of(tl, 2);
    Ctx::set_bytes(&mut rep, IP_TOTAL_LEN, &tlb);
    for i in 0..4 {
        let a = x.byte(TCP_ACK + i);
        rep[(TCP_SEQ + i) as usize] = Some(a);
    }
    let seq = x.be_bytes(TCP_SEQ, 4);
    let one = x.c(32, 1);
    let ack = x.op(Opcode::Add, seq, one);
    let ack_bytes: Vec<PortRef> = x.bytes_of(ack, 4).into_iter().rev().collect();
    Ctx::set_bytes(&mut rep, TCP_ACK, &ack_bytes);
    let off_flags = x.c(16, 0x1450);
    let ofb = x.bytes_of(off_flags, 2);
    Ctx::set_bytes(&mut rep, TCP_OFF, &ofb);
    let zero16 = x.c(16, 0);
    let zb = x.bytes_of(zero16, 2);
    Ctx::set_bytes(&mut rep, TCP_WIN, &zb);
    Ctx::set_bytes(&mut rep, TCP_URG, &zb);

    // IPv4 header checksum over the rewritten header
    let mut ip_words = vec![x.le16(IP), tl];
    for at in [18, 20, 22, 26, 28, 30, 32] {
        ip_words.push(x.le16(at));
    }
    let ipc = x.checksum(&ip_words);
    let ipcb = x.bytes_of(ipc, 2);
    Ctx::set_bytes(&mut rep, IP_CSUM, &ipcb);

    // TCP checksum: pseudo header plus the 20-byte reply header
    let ack_lo = x.b.merge(&ack_bytes[0..2]);
    let ack_hi = x.b.merge(&ack_bytes[2..4]);
    let proto = x.c(16, 0x0600);
    let tcp_len = x.c(16, 0x1400);
    let mut tcp_words = vec![proto, tcp_len, off_flags, ack_lo, ack_hi];
    for at in [26, 28, 30, 32, 34, 36, 42, 44] {
        tcp_words.push(x.le16(at));
    }
    let tcpc = x.checksum(&tcp_words);
    let tcpcb = x.bytes_of(tcpc, 2);
    Ctx::set_bytes(&mut rep, TCP_CSUM, &tcpcb);

    let reply = x.rebuild(&rep);
    let out = x.b.cond(go, reply, x.prefix);
    let (trunc, fwd) = (x.c(2, 1), x.c(2, 0));
    let cmd = x.b.cond(go, trunc, fwd);
    let rst_len = x.c(16, TCP_END as u64);
    let len = x.b.cond(go, rst_len, x.length);
    x.b.packet_out(64, cmd, out, len);
    x.b.build()
}

/// UDP memcached header plus the fixed prefix of a request or response.
fn memcached_guard(x: &mut Ctx, port_at: u32, min_len: u64) -> PortRef {
    let guard = x.ipv4_guard(17, min_len);
    let port = x.le16(port_at);
    let is_mc = x.eq_const(port, 16, MEMCACHED_PORT.swap_bytes() as u64);
    x.op(Opcode::And, guard, is_mc)
}

fn text_match(x: &mut Ctx, at: u32, text: &[u8]) -> PortRef {
    let field = x.le_bytes(at, text.len() as u32);
    let v = text.iter().rev().fold(0u64, |acc, b| acc << 8 | *b as u64);
    x.eq_const(field, 8 * text.len() as u32, v)
}

const RX_KEY: u32 = MC_PAYLOAD + 4;
const TX_KEY: u32 = MC_PAYLOAD + 6;
const TX_VALUE: u32 = TX_KEY + MC_KEY_LEN + 6;
/// Length of the crafted `VALUE` reply.
pub const MC_REPLY_LEN: u32 = MC_PAYLOAD + 6 + MC_KEY_LEN + 6 + MC_VALUE_LEN + 7;

/// Intercepts `get <8-byte key>` requests. On a table 0 hit the packet is
/// turned into the reply `VALUE <key> 0 4\r\n<value>\r\nEND\r\n` with the
/// 4-byte value from array 0; everything else is forwarded untouched.
pub fn memcached_rx() -> ProtocolProgram {
    let mut x = Ctx::new(96);
    x.b.declare_table(0, 64, 256, CamImpl::RegisterCam);
    x.b.declare_array(0, 32, 256);
    let guard = memcached_guard(&mut x, DPORT, (RX_KEY + MC_KEY_LEN) as u64);
    let is_get = text_match(&mut x, MC_PAYLOAD, b"get ");
    let key = x.le_bytes(RX_KEY, MC_KEY_LEN);
    let hit = x.b.table_lookup(0, key);
    let idx = x.b.slice(hit, 0, 8);
    let valid = x.b.slice(hit, 8, 1);
    let go = x.and_all(&[guard, is_get, valid]);
    let value = x.b.array_read(0, idx);

    let mut rep: Vec<Option<PortRef>> = vec![None; 96];
    for i in 0..6 {
        let (d, s) = (x.byte(ETH_DST + i), x.byte(ETH_SRC + i));
        rep[(ETH_DST + i) as usize] = Some(s);
        rep[(ETH_SRC + i) as usize] = Some(d);
    }
    for i in 0..4 {
        let (s, d) = (x.byte(IP_SRC + i), x.byte(IP_DST + i));
        rep[(IP_SRC + i) as usize] = Some(d);
        rep[(IP_DST + i) as usize] = Some(s);
    }
    for i in 0..2 {
        let (s, d) = (x.byte(SPORT + i), x.byte(DPORT + i));
        rep[(SPORT + i) as usize] = Some(d);
        rep[(DPORT + i) as usize] = Some(s);
    }
    let ip_len = ((MC_REPLY_LEN - IP) as u16).swap_bytes() as u64;
    let tl = x.c(16, ip_len);
    let tlb = x.bytes_of(tl, 2);
    Ctx::set_bytes(&mut rep, IP_TOTAL_LEN, &tlb);
    let udp_len = x.c(16, ((MC_REPLY_LEN - L4) as u16).swap_bytes() as u64);
    let ulb = x.bytes_of(udp_len, 2);
    Ctx::set_bytes(&mut rep, UDP_LEN, &ulb);
    let zero16 = x.c(16, 0);
    let zb = x.bytes_of(zero16, 2);
    Ctx::set_bytes(&mut rep, UDP_CSUM, &zb);

    let mut at = MC_PAYLOAD;
    let put_text = |x: &mut Ctx, rep: &mut Vec<Option<PortRef>>, text: &[u8], at: &mut u32| {
        for &ch in text {
            let c = x.c(8, ch as u64);
            rep[*at as usize] = Some(c);
            *at += 1;
        }
    };
    put_text(&mut x, &mut rep, b"VALUE ", &mut at);
    for i in 0..MC_KEY_LEN {
        let k = x.byte(RX_KEY + i);
        rep[at as usize] = Some(k);
        at += 1;
    }
    put_text(&mut x, &mut rep, b" 0 4\r\n", &mut at);
    let vb = x.bytes_of(value, MC_VALUE_LEN);
    Ctx::set_bytes(&mut rep, at, &vb);
    at += MC_VALUE_LEN;
    put_text(&mut x, &mut rep, b"\r\nEND\r\n", &mut at);
    debug_assert_eq!(at, MC_REPLY_LEN);

    let mut ip_words = vec![x.le16(IP), tl];
    for w in [18, 20, 22, 26, 28, 30, 32] {
        ip_words.push(x.le16(w));
    }
    let ipc = x.checksum(&ip_words);
    let ipcb = x.bytes_of(ipc, 2);
    Ctx::set_bytes(&mut rep, IP_CSUM, &ipcb);

    let reply = x.rebuild(&rep);
    let out = x.b.cond(go, reply, x.prefix);
    let (trunc, fwd) = (x.c(2, 1), x.c(2, 0));
    let cmd = x.b.cond(go, trunc, fwd);
    let rlen = x.c(16, MC_REPLY_LEN as u64);
    let len = x.b.cond(go, rlen, x.length);
    x.b.packet_out(96, cmd, out, len);
    x.b.build()
}

/// Snoops `VALUE <8-byte key> 0 4\r\n<value>` responses leaving the server:
/// a new key is inserted into table 0 and the value stored in array 0 at
/// the key's entry. Packets are always forwarded unmodified.
pub fn memcached_tx() -> ProtocolProgram {
    let mut x = Ctx::new(96);
    x.b.declare_table(0, 64, 256, CamImpl::RegisterCam);
    x.b.declare_array(0, 32, 256);
    let guard = memcached_guard(&mut x, SPORT, (TX_VALUE + MC_VALUE_LEN) as u64);
    let is_value = text_match(&mut x, MC_PAYLOAD, b"VALUE ");
    let go = x.op(Opcode::And, guard, is_value);
    let key = x.le_bytes(TX_KEY, MC_KEY_LEN);
    let value = x.le_bytes(TX_VALUE, MC_VALUE_LEN);

    let hit = x.b.table_lookup(0, key);
    let hit_valid = x.b.slice(hit, 8, 1);
    let miss = x.b.unary(Opcode::Not, hit_valid);
    let insert = x.op(Opcode::And, go, miss);
    let hint = x.c(8, 0);
    let ins = x.b.table_write(0, key, hint, Some(insert));
    let ins_valid = x.b.slice(ins, 8, 1);
    let idx = x.b.cond(hit_valid, hit, ins);
    let idx = x.b.slice(idx, 0, 8);
    let stored = x.op(Opcode::Or, hit_valid, ins_valid);
    let en = x.op(Opcode::And, go, stored);
    x.b.array_write(0, idx, value, Some(en));

    let cmd = x.c(2, 0);
    x.b.packet_out(96, cmd, x.prefix, x.length);
    x.b.build()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{program_census, validate_protocol};

    #[test]
    fn all_validate() {
        for name in BUILTIN_NAMES {
            let p = builtin_program(name).unwrap();
            let r = validate_protocol(&p);
            assert!(r.ok && r.diagnostics.is_empty(), "{name}: {r}");
        }
        assert!(builtin_program("nope").is_none());
    }

    #[test]
    fn nat_state_census() {
        let c = program_census(&nat());
        assert_eq!(c.count("TableLookup"), 1);
        assert_eq!(c.count("ArrayRead"), 2);
    }

    #[test]
    fn reply_length() {
        assert_eq!(MC_REPLY_LEN, 81);
    }
}
