// SPDX-License-Identifier: Apache-2.0

//! Parametric "Flex m x n" pipeline generator.
//!
//! Every stage starts from a pool of values grouped by width: the packet
//! bytes and length, the previous stage's boundary registers and the stage's
//! runtime constants. Router-fed conversion banks widen the pool, then `n`
//! ALUs with routers on every input read from it. Each ALU output feeds a
//! dedicated boundary register; passthrough registers pick any pool value.
//! All paths through a stage take `S + 1` cycles where `S` is the largest
//! ALU or memory latency, so stage `s` starts at cycle `s * (S + 1)`.
//!
//! After the last stage a deparser rebuilds the prefix byte by byte, each
//! byte choosing between the original byte and any byte of a final word.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::ir::{
    alu_arity, index_width, ArchBuilder, CamDecl, CamImpl, Opcode, PipeKind, PipelineArch, PortRef,
    RamDecl, Width, DEFAULT_MTU, LENGTH_WIDTH, MAX_WIDTH,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("flex parameter error: {0}")]
pub struct FlexError(pub String);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum MemKind {
    Ram { elem_width: Width, num_elems: u32, reads: u32, writes: u32 },
    Cam { key_width: Width, num_entries: u32, cam_impl: CamImpl, lookups: u32, writes: u32 },
}

/// A memory block and the stage holding its access nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MemBlock {
    pub stage: u32,
    pub latency: u32,
    #[serde(flatten)]
    pub kind: MemKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlexParams {
    pub stages: u32,
    pub alus_per_stage: u32,
    pub alu_width: Width,
    pub ops: Vec<Opcode>,
    pub alu_latency: u32,
    /// Passthrough registers per stage of ALU width.
    pub pass_words: u32,
    /// Passthrough registers per stage of width 1.
    pub pass_flags: u32,
    /// Runtime constants per stage of ALU width.
    pub consts_per_stage: u32,
    pub prefix_len: u32,
    pub mtu: u32,
    pub merge16: u32,
    pub merge32: u32,
    pub ext8: u32,
    pub ext16: u32,
    pub ext1: u32,
    /// Routed 16-bit slices per half of a 32-bit word.
    pub split16: u32,
    pub memories: Vec<MemBlock>,
}

impl Default for FlexParams {
    fn default() -> Self {
        FlexParams::new(1, 1)
    }
}

impl FlexParams {
    /// `stages x alus` with every opcode except MUL and the memory blocks
    /// of the NAT workload, minus blocks whose stage does not exist.
    pub fn new(stages: u32, alus: u32) -> Self {
        let cam = MemKind::Cam { key_width: 32, num_entries: 256, cam_impl: CamImpl::RegisterCam, lookups: 1, writes: 0 };
        let ram = MemKind::Ram { elem_width: 32, num_elems: 256, reads: 1, writes: 0 };
        let memories = [(0, cam), (1, ram), (1, ram)]
            .into_iter()
            .filter(|(stage, _)| *stage < stages)
            .map(|(stage, kind)| MemBlock { stage, latency: 1, kind })
            .collect();
        FlexParams {
            stages,
            alus_per_stage: alus,
            alu_width: 32,
            ops: Opcode::ALL.iter().copied().filter(|o| *o != Opcode::Mul).collect(),
            alu_latency: 1,
            pass_words: 8,
            pass_flags: 2,
            consts_per_stage: 4,
            prefix_len: 64,
            mtu: DEFAULT_MTU,
            merge16: 4,
            merge32: 2,
            ext8: 2,
            ext16: 4,
            ext1: 4,
            split16: 2,
            memories,
        }
    }

    pub fn from_json(text: &str) -> Result<Self, FlexError> {
        serde_json::from_str(text).map_err(|e| FlexError(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("json encoding") + "\n"
    }

    /// Cycles spent in every stage before its boundary register.
    pub fn stage_latency(&self) -> u32 {
        self.memories.iter().map(|m| m.latency).fold(self.alu_latency, u32::max)
    }

    fn check(&self) -> Result<(), FlexError> {
        let fail = |m: String| Err(FlexError(m));
        if self.stages == 0 || self.alus_per_stage == 0 {
            return fail("stages and alus per stage must be at least 1".into());
        }
        if self.alu_width == 0 || self.alu_width > MAX_WIDTH {
            return fail(format!("alu width {} outside 1..={MAX_WIDTH}", self.alu_width));
        }
        if self.ops.is_empty() {
            return fail("empty op set".into());
        }
        let mut ops = self.ops.clone();
        ops.sort();
        ops.dedup();
        if ops.len() != self.ops.len() {
            return fail("duplicate opcode in op set".into());
        }
        if self.alu_latency == 0 {
            return fail("alu latency must be at least 1".into());
        }
        if self.prefix_len == 0 || self.prefix_len * 8 > MAX_WIDTH {
            return fail(format!(
                "a {}-byte prefix does not fit the {MAX_WIDTH}-bit prefix register chain",
                self.prefix_len
            ));
        }
        for m in &self.memories {
            if m.stage >= self.stages {
                return fail(format!("memory placed in stage {} of {}", m.stage, self.stages));
            }
            if m.latency == 0 {
                return fail("memory latency must be at least 1".into());
            }
        }
        Ok(())
    }
}

/// Values available to a stage, grouped by width.
#[derive(Default)]
struct Pool(BTreeMap<Width, Vec<PortRef>>);

impl Pool {
    fn add(&mut self, w: Width, p: PortRef) {
        self.0.entry(w).or_default().push(p);
    }

    fn get(&self, w: Width) -> Vec<PortRef> {
        self.0.get(&w).cloned().unwrap_or_default()
    }
}

enum Carried {
    Plain(PortRef, Width),
    /// CAM result register; the payload is the index width.
    CamResult(PortRef, Width),
}

fn delay(b: &mut ArchBuilder, mut p: PortRef, w: Width, cycles: u32) -> PortRef {
    for _ in 0..cycles {
        p = b.register(p, w);
    }
    p
}

fn routed(b: &mut ArchBuilder, pool: &Pool, w: Width, what: &str) -> Result<PortRef, FlexError> {
    let ins = pool.get(w);
    if ins.is_empty() {
        return Err(FlexError(format!("no {w}-bit values available for {what}")));
    }
    Ok(b.router(ins))
}

pub fn gen_flex_arch(params: &FlexParams) -> Result<PipelineArch, FlexError> {
    params.check()?;
    let w = params.alu_width;
    let s_lat = params.stage_latency();
    let n = params.prefix_len;
    let mut b = ArchBuilder::new();

    // per block: hardware memory id
    let mut mem_ids = Vec::new();
    let (mut rams, mut cams) = (0u32, 0u32);
    for m in &params.memories {
        match m.kind {
            MemKind::Ram { elem_width, num_elems, .. } => {
                b.ram(RamDecl { id: rams, elem_width, num_elems, latency: m.latency });
                mem_ids.push(rams);
                rams += 1;
            }
            MemKind::Cam { key_width, num_entries, cam_impl, .. } => {
                b.cam(CamDecl { id: cams, key_width, num_entries, latency: m.latency, cam_impl });
                mem_ids.push(cams);
                cams += 1;
            }
        }
    }

    let pin = b.add(PipeKind::PacketIn { prefix_len: n, mtu: params.mtu }, vec![]);
    let mut prefix = pin;
    let mut length = PortRef::new(pin.node, 1);
    let mut carried: Vec<Carried> = Vec::new();

    for s in 0..params.stages {
        let mut pool = Pool::default();
        for i in 0..n {
            let byte = b.add(PipeKind::Slice { offset: 8 * i, width: 8 }, vec![prefix]);
            pool.add(8, byte);
        }
        pool.add(LENGTH_WIDTH, length);
        for c in &carried {
            match *c {
                Carried::Plain(p, cw) => pool.add(cw, p),
                Carried::CamResult(p, iw) => {
                    let idx = b.add(PipeKind::Slice { offset: 0, width: iw }, vec![p]);
                    let valid = b.add(PipeKind::Slice { offset: iw, width: 1 }, vec![p]);
                    pool.add(iw, idx);
                    pool.add(1, valid);
                }
            }
        }
        for _ in 0..params.consts_per_stage {
            let k = b.add(PipeKind::Constant { width: w, value: None }, vec![]);
            pool.add(w, k);
        }
        let k1 = b.add(PipeKind::Constant { width: 1, value: None }, vec![]);
        pool.add(1, k1);

        // conversions reading only the stage inputs
        let mut new16 = Vec::new();
        let mut new_w = Vec::new();
        for _ in 0..params.merge16 {
            let lo = routed(&mut b, &pool, 8, "merge16")?;
            let hi = routed(&mut b, &pool, 8, "merge16")?;
            new16.push(b.add(PipeKind::Merge, vec![lo, hi]));
        }
        for (src, count) in [(8, params.ext8), (1, params.ext1)] {
            if w > src {
                for _ in 0..count {
                    let r = routed(&mut b, &pool, src, "extend")?;
                    new_w.push(b.add(PipeKind::Extend { width: w, signed: false }, vec![r]));
                }
            }
        }
        if w == 32 {
            for offset in [0, 16] {
                for _ in 0..params.split16 {
                    let r = routed(&mut b, &pool, w, "split")?;
                    new16.push(b.add(PipeKind::Slice { offset, width: 16 }, vec![r]));
                }
            }
        }
        for p in new16 {
            pool.add(16, p);
        }
        // conversions over 16-bit values
        if w == 32 {
            for _ in 0..params.merge32 {
                let lo = routed(&mut b, &pool, 16, "merge32")?;
                let hi = routed(&mut b, &pool, 16, "merge32")?;
                new_w.push(b.add(PipeKind::Merge, vec![lo, hi]));
            }
        }
        if w > 16 {
            for _ in 0..params.ext16 {
                let r = routed(&mut b, &pool, 16, "extend")?;
                new_w.push(b.add(PipeKind::Extend { width: w, signed: false }, vec![r]));
            }
        }
        for p in new_w {
            pool.add(w, p);
        }

        let mut next: Vec<Carried> = Vec::new();
        let arity = alu_arity(&params.ops);
        for _ in 0..params.alus_per_stage {
            let mut ins = Vec::new();
            for slot in 0..arity {
                let width = if slot == 2 { 1 } else { w };
                ins.push(routed(&mut b, &pool, width, "alu input")?);
            }
            let alu = b.alu(w, params.ops.clone(), params.alu_latency, ins);
            let pad = s_lat - params.alu_latency + 1;
            let r = delay(&mut b, alu, w, pad);
            let f = delay(&mut b, PortRef::new(alu.node, 1), 1, pad);
            next.push(Carried::Plain(r, w));
            next.push(Carried::Plain(f, 1));
        }

        for (k, m) in params.memories.iter().enumerate() {
            if m.stage != s {
                continue;
            }
            let pad = s_lat - m.latency + 1;
            let mem = mem_ids[k];
            match m.kind {
                MemKind::Ram { elem_width, num_elems, reads, writes } => {
                    let iw = index_width(num_elems);
                    for _ in 0..reads {
                        let idx = routed(&mut b, &pool, iw, "ram index")?;
                        let rd = b.add(PipeKind::RamAccess { ram: mem, write: false }, vec![idx]);
                        next.push(Carried::Plain(delay(&mut b, rd, elem_width, pad), elem_width));
                    }
                    for _ in 0..writes {
                        let idx = routed(&mut b, &pool, iw, "ram index")?;
                        let val = routed(&mut b, &pool, elem_width, "ram value")?;
                        let en = routed(&mut b, &pool, 1, "write enable")?;
                        b.add(PipeKind::RamAccess { ram: mem, write: true }, vec![idx, val, en]);
                    }
                }
                MemKind::Cam { key_width, num_entries, lookups, writes, .. } => {
                    let iw = index_width(num_entries);
                    for _ in 0..lookups {
                        let key = routed(&mut b, &pool, key_width, "cam key")?;
                        let rd = b.add(PipeKind::CamAccess { cam: mem, write: false }, vec![key]);
                        next.push(Carried::CamResult(delay(&mut b, rd, iw + 1, pad), iw));
                    }
                    for _ in 0..writes {
                        let key = routed(&mut b, &pool, key_width, "cam key")?;
                        let hint = routed(&mut b, &pool, iw, "cam hint")?;
                        let en = routed(&mut b, &pool, 1, "write enable")?;
                        let wr = b.add(PipeKind::CamAccess { cam: mem, write: true }, vec![key, hint, en]);
                        next.push(Carried::CamResult(delay(&mut b, wr, iw + 1, pad), iw));
                    }
                }
            }
        }

        for (width, count) in [(w, params.pass_words), (1, params.pass_flags)] {
            for _ in 0..count {
                let r = routed(&mut b, &pool, width, "passthrough")?;
                next.push(Carried::Plain(delay(&mut b, r, width, s_lat + 1), width));
            }
        }
        prefix = delay(&mut b, prefix, 8 * n, s_lat + 1);
        length = delay(&mut b, length, LENGTH_WIDTH, s_lat + 1);
        carried = next;
    }

    // deparser
    let words: Vec<PortRef> = carried
        .iter()
        .filter_map(|c| match *c {
            Carried::Plain(p, cw) if cw == w => Some(p),
            _ => None,
        })
        .collect();
    let mut word_bytes = Vec::new();
    for &word in &words {
        for j in 0..w / 8 {
            word_bytes.push(b.add(PipeKind::Slice { offset: 8 * j, width: 8 }, vec![word]));
        }
    }
    let mut out_bytes = Vec::new();
    for i in 0..n {
        let orig = b.add(PipeKind::Slice { offset: 8 * i, width: 8 }, vec![prefix]);
        let mut ins = vec![orig];
        ins.extend(&word_bytes);
        out_bytes.push(b.router(ins));
    }
    let out_prefix = if out_bytes.len() == 1 { out_bytes[0] } else { b.add(PipeKind::Merge, out_bytes) };
    let mut cmd_ins = Vec::new();
    let mut len_ins = vec![length];
    for &word in &words {
        if w >= 2 {
            cmd_ins.push(b.add(PipeKind::Slice { offset: 0, width: 2 }, vec![word]));
        }
        if w >= LENGTH_WIDTH {
            len_ins.push(b.add(PipeKind::Slice { offset: 0, width: LENGTH_WIDTH }, vec![word]));
        }
    }
    cmd_ins.push(b.add(PipeKind::Constant { width: 2, value: None }, vec![]));
    len_ins.push(b.add(PipeKind::Constant { width: LENGTH_WIDTH, value: None }, vec![]));
    let cmd = b.router(cmd_ins);
    let len = b.router(len_ins);
    b.add(PipeKind::PacketOut { prefix_len: n, mtu: params.mtu }, vec![cmd, out_prefix, len]);
    Ok(b.build())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::{pipeline_census, pipeline_depth, validate_pipeline};

    #[test]
    fn smallest() {
        let p = FlexParams { ops: vec![Opcode::Add], ..FlexParams::new(1, 1) };
        let a = gen_flex_arch(&p).unwrap();
        let r = validate_pipeline(&a);
        assert!(r.ok, "{r}");
        let alus: Vec<_> = a.find(|k| matches!(k, PipeKind::Alu { .. })).collect();
        assert_eq!(alus.len(), 1);
        assert_eq!(alus[0].inputs.len(), 2);
        assert!(alus[0].inputs.iter().all(|i| a.nodes[&i.node].kind == PipeKind::Router));
    }

    #[test]
    fn census_and_depth() {
        let a = gen_flex_arch(&FlexParams::new(3, 5)).unwrap();
        assert!(validate_pipeline(&a).ok);
        assert_eq!(pipeline_census(&a).alus, 15);
        assert_eq!(pipeline_depth(&a), Some(6));
        let slow = gen_flex_arch(&FlexParams { alu_latency: 3, ..FlexParams::new(3, 5) }).unwrap();
        assert!(validate_pipeline(&slow).ok);
        assert_eq!(pipeline_depth(&slow), Some(12));
    }

    #[test]
    fn bad_params() {
        assert!(gen_flex_arch(&FlexParams::new(0, 1)).is_err());
        assert!(gen_flex_arch(&FlexParams { prefix_len: 200, ..FlexParams::new(1, 1) }).is_err());
        let p = FlexParams::new(2, 2);
        assert_eq!(FlexParams::from_json(&p.to_json()).unwrap(), p);
    }
}
