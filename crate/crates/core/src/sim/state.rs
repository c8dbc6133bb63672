// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};

use crate::bits::Bits;
use crate::ir::{index_width, parse_json, CamImpl, LoadError, Obj, PipelineArch, ProtocolProgram, Width};

/// Multiplier of the HashCam bucket hash.
pub const HASH_MULTIPLIER: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrayState {
    pub elem_width: Width,
    pub values: Vec<Bits>,
}

impl ArrayState {
    pub fn new(elem_width: Width, num_elems: u32) -> Self {
        ArrayState { elem_width, values: vec![Bits::zero(elem_width); num_elems as usize] }
    }

    /// Out-of-range reads return zero.
    pub fn read(&self, index: &Bits) -> Bits {
        index
            .to_u64()
            .and_then(|i| self.values.get(i as usize))
            .cloned()
            .unwrap_or_else(|| Bits::zero(self.elem_width))
    }
}

/// CAM contents: one optional key per entry.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CamState {
    pub key_width: Width,
    pub cam_impl: CamImpl,
    pub entries: Vec<Option<Bits>>,
}

impl CamState {
    pub fn new(key_width: Width, num_entries: u32, cam_impl: CamImpl) -> Self {
        CamState { key_width, cam_impl, entries: vec![None; num_entries as usize] }
    }

    pub fn index_width(&self) -> Width {
        index_width(self.entries.len() as u32)
    }

    pub fn bucket(&self, key: &Bits, seed: u64) -> usize {
        let mut acc = seed;
        for &limb in key.limbs() {
            acc = (acc ^ limb).wrapping_mul(HASH_MULTIPLIER);
        }
        ((acc >> 32) % self.entries.len() as u64) as usize
    }

    /// Index holding `key`; the lowest one on duplicates.
    pub fn lookup(&self, key: &Bits, seed: u64) -> Option<usize> {
        match self.cam_impl {
            CamImpl::RegisterCam => self.entries.iter().position(|e| e.as_ref() == Some(key)),
            CamImpl::HashCam => {
                let b = self.bucket(key, seed);
                (self.entries[b].as_ref() == Some(key)).then_some(b)
            }
        }
    }

    /// Entry a write of `key` lands in, or `None` when a RegisterCam is full.
    /// A RegisterCam already holding `key` reuses its entry.
    pub fn write_slot(&self, key: &Bits, seed: u64) -> Option<usize> {
        match self.cam_impl {
            CamImpl::RegisterCam => {
                self.lookup(key, seed).or_else(|| self.entries.iter().position(Option::is_none))
            }
            CamImpl::HashCam => Some(self.bucket(key, seed)),
        }
    }

    /// `valid ‖ index` with valid as the most significant bit.
    pub fn encode_result(&self, slot: Option<usize>) -> Bits {
        let iw = self.index_width();
        match slot {
            Some(i) => Bits::from_u64(iw + 1, i as u64 | (1u64 << iw)),
            None => Bits::zero(iw + 1),
        }
    }
}

/// Persistent memory contents keyed by array/table id (program side) or
/// RAM/CAM id (pipeline side).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StateStore {
    pub arrays: BTreeMap<u32, ArrayState>,
    pub tables: BTreeMap<u32, CamState>,
    pub hash_seed: u64,
}

impl StateStore {
    pub fn for_program(p: &ProtocolProgram) -> Self {
        StateStore {
            arrays: p.arrays.iter().map(|a| (a.id, ArrayState::new(a.elem_width, a.num_elems))).collect(),
            tables: p
                .tables
                .iter()
                .map(|t| (t.id, CamState::new(t.key_width, t.num_entries, t.cam_impl)))
                .collect(),
            hash_seed: 0,
        }
    }

    pub fn for_arch(a: &PipelineArch) -> Self {
        StateStore {
            arrays: a.rams.iter().map(|r| (r.id, ArrayState::new(r.elem_width, r.num_elems))).collect(),
            tables: a
                .cams
                .iter()
                .map(|c| (c.id, CamState::new(c.key_width, c.num_entries, c.cam_impl)))
                .collect(),
            hash_seed: 0,
        }
    }

    /// Copies memories named in the bindings (`from id -> to id`) into
    /// `target`, keeping target memories without a binding untouched.
    pub fn transfer_into(
        &self,
        target: &mut StateStore,
        array_bind: &BTreeMap<u32, u32>,
        table_bind: &BTreeMap<u32, u32>,
    ) {
        for (from, to) in array_bind {
            if let (Some(src), Some(dst)) = (self.arrays.get(from), target.arrays.get_mut(to)) {
                *dst = src.clone();
            }
        }
        for (from, to) in table_bind {
            if let (Some(src), Some(dst)) = (self.tables.get(from), target.tables.get_mut(to)) {
                *dst = src.clone();
            }
        }
        target.hash_seed = self.hash_seed;
    }

    /// Sets entries from a state document, on top of the current contents.
    ///
    /// Format: `{"kind": "state", "hash_seed": n, "arrays": [{"id", "values":
    /// [[index, value], ...]}], "tables": [{"id", "entries": [[index, key],
    /// ...]}]}`, values as hex or decimal strings.
    pub fn preload(&mut self, document: &[u8]) -> Result<(), LoadError> {
        let schema = |field: String, message: &str| LoadError::Schema { field, message: message.into() };
        let v = parse_json(document)?;
        let doc = Obj::new("$", &v)?;
        if doc.str("kind")? != "state" {
            return Err(schema("kind".into(), "expected a state document"));
        }
        if doc.map.contains_key("hash_seed") {
            self.hash_seed = doc
                .get("hash_seed")?
                .as_u64()
                .ok_or_else(|| schema("$.hash_seed".into(), "expected an unsigned integer"))?;
        }
        for (i, a) in doc.opt_array("arrays")?.iter().enumerate() {
            let o = Obj::new(format!("arrays[{i}]"), a)?;
            let id = o.u32("id")?;
            let arr = self.arrays.get_mut(&id).ok_or_else(|| schema(format!("arrays[{i}].id"), "no such array"))?;
            for (j, e) in o.array("values")?.iter().enumerate() {
                let field = format!("arrays[{i}].values[{j}]");
                let (idx, text) = pair(e).ok_or_else(|| schema(field.clone(), "expected [index, value]"))?;
                let slot = arr.values.get_mut(idx).ok_or_else(|| schema(field.clone(), "index out of range"))?;
                *slot = Bits::parse(arr.elem_width, text).map_err(|m| schema(field, &m))?;
            }
        }
        for (i, t) in doc.opt_array("tables")?.iter().enumerate() {
            let o = Obj::new(format!("tables[{i}]"), t)?;
            let id = o.u32("id")?;
            let cam = self.tables.get_mut(&id).ok_or_else(|| schema(format!("tables[{i}].id"), "no such table"))?;
            for (j, e) in o.array("entries")?.iter().enumerate() {
                let field = format!("tables[{i}].entries[{j}]");
                let (idx, text) = pair(e).ok_or_else(|| schema(field.clone(), "expected [index, key]"))?;
                let key = Bits::parse(cam.key_width, text).map_err(|m| schema(field.clone(), &m))?;
                let slot = cam.entries.get_mut(idx).ok_or_else(|| schema(field, "index out of range"))?;
                *slot = Some(key);
            }
        }
        Ok(())
    }

    /// Sparse state document: non-zero array elements and valid CAM entries.
    pub fn to_document(&self) -> String {
        let arrays: Vec<Value> = self
            .arrays
            .iter()
            .map(|(id, a)| {
                let values: Vec<Value> = a
                    .values
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| !v.is_zero())
                    .map(|(i, v)| json!([i, v.to_hex()]))
                    .collect();
                json!({"id": id, "values": values})
            })
            .collect();
        let tables: Vec<Value> = self
            .tables
            .iter()
            .map(|(id, t)| {
                let entries: Vec<Value> = t
                    .entries
                    .iter()
                    .enumerate()
                    .filter_map(|(i, k)| k.as_ref().map(|k| json!([i, k.to_hex()])))
                    .collect();
                json!({"id": id, "entries": entries})
            })
            .collect();
        let mut m = Map::new();
        m.insert("kind".into(), json!("state"));
        m.insert("hash_seed".into(), json!(self.hash_seed));
        m.insert("arrays".into(), Value::Array(arrays));
        m.insert("tables".into(), Value::Array(tables));
        let mut s = serde_json::to_string_pretty(&Value::Object(m)).expect("json encoding");
        s.push('\n');
        s
    }
}

fn pair(v: &Value) -> Option<(usize, &str)> {
    let a = v.as_array().filter(|a| a.len() == 2)?;
    Some((a[0].as_u64()? as usize, a[1].as_str()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key(v: u64) -> Bits {
        Bits::from_u64(16, v)
    }

    #[test]
    fn register_cam_allocates_lowest_free() {
        let mut c = CamState::new(16, 2, CamImpl::RegisterCam);
        assert_eq!(c.write_slot(&key(5), 0), Some(0));
        c.entries[0] = Some(key(5));
        assert_eq!(c.write_slot(&key(6), 0), Some(1));
        assert_eq!(c.write_slot(&key(5), 0), Some(0));
        c.entries[1] = Some(key(6));
        assert_eq!(c.write_slot(&key(7), 0), None);
        assert_eq!(c.lookup(&key(6), 0), Some(1));
        assert_eq!(c.encode_result(Some(1)), Bits::from_u64(2, 0b11));
        assert_eq!(c.encode_result(None), Bits::zero(2));
    }

    #[test]
    fn hash_cam_overwrites_bucket() {
        let mut c = CamState::new(16, 4, CamImpl::HashCam);
        let b = c.write_slot(&key(9), 7).unwrap();
        c.entries[b] = Some(key(9));
        assert_eq!(c.lookup(&key(9), 7), Some(b));
        let other = (0..1000).map(key).find(|k| *k != key(9) && c.bucket(k, 7) == b).unwrap();
        c.entries[b] = Some(other.clone());
        assert_eq!(c.lookup(&key(9), 7), None);
        assert_eq!(c.lookup(&other, 7), Some(b));
    }

    #[test]
    fn preload_round_trip() {
        let mut s = StateStore::default();
        s.arrays.insert(0, ArrayState::new(32, 4));
        s.tables.insert(1, CamState::new(16, 4, CamImpl::RegisterCam));
        let doc = br#"{"kind":"state","hash_seed":3,"arrays":[{"id":0,"values":[[2,"0x50"]]}],
            "tables":[{"id":1,"entries":[[0,"7777"]]}]}"#;
        s.preload(doc).unwrap();
        assert_eq!(s.arrays[&0].values[2], Bits::from_u64(32, 0x50));
        assert_eq!(s.tables[&1].entries[0], Some(key(7777)));
        let mut t = StateStore { arrays: s.arrays.clone(), tables: s.tables.clone(), hash_seed: 0 };
        for a in t.arrays.values_mut() {
            a.values.iter_mut().for_each(|v| *v = Bits::zero(32));
        }
        t.tables.values_mut().for_each(|c| c.entries.iter_mut().for_each(|e| *e = None));
        t.preload(s.to_document().as_bytes()).unwrap();
        assert_eq!(s, t);
    }

    #[test]
    fn out_of_range_read_is_zero() {
        let a = ArrayState::new(8, 3);
        assert_eq!(a.read(&Bits::from_u64(2, 3)), Bits::zero(8));
    }
}
