// SPDX-License-Identifier: Apache-2.0

//! Canonical JSON text format for programs, architectures and runtime configs.
//!
//! Every document is an object with a top-level `kind` of `protocol`,
//! `pipeline` or `config`. Graph documents carry `nodes`, each
//! `{id, kind, attrs, inputs: [[node, port], ...]}`, followed by `arrays` and
//! `tables` (programs) or `rams` and `cams` (pipelines). Output lists nodes
//! in ascending id order with one node per line, so equal artifacts always
//! serialize to identical bytes.

use std::collections::{BTreeMap, HashSet};

use serde_json::{json, Map, Value};

use super::{
    ArrayDecl, CamDecl, CamImpl, NodeId, Opcode, PipeKind, PipeNode, PipelineArch, PortRef,
    ProtoKind, ProtoNode, ProtocolProgram, RamDecl, RuntimeConfig, TableDecl, Width, DEFAULT_MTU,
};
use crate::bits::Bits;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum LoadError {
    #[error("document is not UTF-8 text")]
    Utf8,
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("schema error at {field}: {message}")]
    Schema { field: String, message: String },
}

fn schema(field: impl Into<String>, message: impl Into<String>) -> LoadError {
    LoadError::Schema { field: field.into(), message: message.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArtifactKind {
    Protocol,
    Pipeline,
    Config,
}

impl ArtifactKind {
    pub fn tag(self) -> &'static str {
        match self {
            ArtifactKind::Protocol => "protocol",
            ArtifactKind::Pipeline => "pipeline",
            ArtifactKind::Config => "config",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Artifact {
    Protocol(ProtocolProgram),
    Pipeline(PipelineArch),
    Config(RuntimeConfig),
}

impl Artifact {
    pub fn kind(&self) -> ArtifactKind {
        match self {
            Artifact::Protocol(_) => ArtifactKind::Protocol,
            Artifact::Pipeline(_) => ArtifactKind::Pipeline,
            Artifact::Config(_) => ArtifactKind::Config,
        }
    }

    pub fn into_protocol(self) -> Option<ProtocolProgram> {
        match self {
            Artifact::Protocol(p) => Some(p),
            _ => None,
        }
    }

    pub fn into_pipeline(self) -> Option<PipelineArch> {
        match self {
            Artifact::Pipeline(a) => Some(a),
            _ => None,
        }
    }

    pub fn into_config(self) -> Option<RuntimeConfig> {
        match self {
            Artifact::Config(c) => Some(c),
            _ => None,
        }
    }
}

/// Parses JSON text, reporting syntax errors with their position.
pub(crate) fn parse_json(document: &[u8]) -> Result<Value, LoadError> {
    let text = std::str::from_utf8(document).map_err(|_| LoadError::Utf8)?;
    serde_json::from_str(text).map_err(|e| LoadError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

/// Decodes a document. `kind: None` accepts whichever kind the document
/// declares.
pub fn load_artifact(document: &[u8], kind: Option<ArtifactKind>) -> Result<Artifact, LoadError> {
    let v = parse_json(document)?;
    let obj = v.as_object().ok_or_else(|| schema("$", "expected an object"))?;
    let tag = obj
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| schema("kind", "missing document kind"))?;
    let found = match tag {
        "protocol" => ArtifactKind::Protocol,
        "pipeline" => ArtifactKind::Pipeline,
        "config" => ArtifactKind::Config,
        other => return Err(schema("kind", format!("unknown document kind {other:?}"))),
    };
    if let Some(want) = kind {
        if want != found {
            return Err(schema("kind", format!("expected a {} document, found {tag}", want.tag())));
        }
    }
    Ok(match found {
        ArtifactKind::Protocol => Artifact::Protocol(decode_program(obj)?),
        ArtifactKind::Pipeline => Artifact::Pipeline(decode_pipeline(obj)?),
        ArtifactKind::Config => Artifact::Config(decode_config(obj)?),
    })
}

pub fn store_artifact(artifact: &Artifact) -> Vec<u8> {
    match artifact {
        Artifact::Protocol(p) => store_program(p),
        Artifact::Pipeline(a) => store_pipeline(a),
        Artifact::Config(c) => store_config(c),
    }
    .into_bytes()
}

// ---- field accessors -------------------------------------------------------

pub(crate) struct Obj<'a> {
    pub path: String,
    pub map: &'a Map<String, Value>,
}

impl<'a> Obj<'a> {
    pub fn new(path: impl Into<String>, v: &'a Value) -> Result<Self, LoadError> {
        let path = path.into();
        let map = v.as_object().ok_or_else(|| schema(&path, "expected an object"))?;
        Ok(Obj { path, map })
    }

    fn field(&self, name: &str) -> String {
        format!("{}.{name}", self.path)
    }

    pub fn get(&self, name: &str) -> Result<&'a Value, LoadError> {
        self.map.get(name).ok_or_else(|| schema(self.field(name), "missing field"))
    }

    pub fn u32(&self, name: &str) -> Result<u32, LoadError> {
        self.get(name)?
            .as_u64()
            .and_then(|v| u32::try_from(v).ok())
            .ok_or_else(|| schema(self.field(name), "expected an unsigned integer"))
    }

    pub fn u32_or(&self, name: &str, default: u32) -> Result<u32, LoadError> {
        if self.map.contains_key(name) {
            self.u32(name)
        } else {
            Ok(default)
        }
    }

    pub fn bool(&self, name: &str) -> Result<bool, LoadError> {
        self.get(name)?.as_bool().ok_or_else(|| schema(self.field(name), "expected a boolean"))
    }

    pub fn str(&self, name: &str) -> Result<&'a str, LoadError> {
        self.get(name)?.as_str().ok_or_else(|| schema(self.field(name), "expected a string"))
    }

    pub fn array(&self, name: &str) -> Result<&'a Vec<Value>, LoadError> {
        self.get(name)?.as_array().ok_or_else(|| schema(self.field(name), "expected an array"))
    }

    pub fn opt_array(&self, name: &str) -> Result<&'a [Value], LoadError> {
        match self.map.get(name) {
            None => Ok(&[]),
            Some(v) => v.as_array().map(Vec::as_slice).ok_or_else(|| schema(self.field(name), "expected an array")),
        }
    }

    pub fn width(&self, name: &str) -> Result<Width, LoadError> {
        let w = self.u32(name)?;
        if w == 0 || w > crate::bits::MAX_WIDTH {
            return Err(schema(self.field(name), format!("width {w} outside 1..={}", crate::bits::MAX_WIDTH)));
        }
        Ok(w)
    }

    pub fn bits(&self, name: &str, width: Width) -> Result<Bits, LoadError> {
        let text = self.str(name)?;
        Bits::parse(width, text).map_err(|m| schema(self.field(name), m))
    }

    pub fn opcode(&self, name: &str) -> Result<Opcode, LoadError> {
        self.str(name)?.parse().map_err(|m: String| schema(self.field(name), m))
    }

    pub fn cam_impl(&self, name: &str) -> Result<CamImpl, LoadError> {
        match self.map.get(name) {
            None => Ok(CamImpl::default()),
            Some(v) => v
                .as_str()
                .ok_or_else(|| schema(self.field(name), "expected a string"))?
                .parse()
                .map_err(|m: String| schema(self.field(name), m)),
        }
    }
}

fn cam_impl_name(i: CamImpl) -> &'static str {
    match i {
        CamImpl::RegisterCam => "RegisterCam",
        CamImpl::HashCam => "HashCam",
    }
}

struct RawNode<'a> {
    id: NodeId,
    kind: &'a str,
    attrs: Obj<'a>,
    inputs: Vec<PortRef>,
    path: String,
}

fn decode_nodes<'a>(doc: &Obj<'a>) -> Result<Vec<RawNode<'a>>, LoadError> {
    let mut out = Vec::new();
    let mut ids = HashSet::new();
    for (i, v) in doc.array("nodes")?.iter().enumerate() {
        let path = format!("nodes[{i}]");
        let o = Obj::new(&path, v)?;
        let id = o.u32("id")?;
        if !ids.insert(id) {
            return Err(schema(format!("{path}.id"), format!("duplicate node id {id}")));
        }
        let kind = o.str("kind")?;
        let attrs = match o.map.get("attrs") {
            Some(a) => Obj::new(format!("{path}.attrs"), a)?,
            None => Obj { path: format!("{path}.attrs"), map: EMPTY.get_or_init(Map::new) },
        };
        let mut inputs = Vec::new();
        for (j, p) in o.array("inputs")?.iter().enumerate() {
            let pair = p.as_array().filter(|a| a.len() == 2);
            let parsed = pair.and_then(|a| {
                let n = a[0].as_u64().and_then(|n| u32::try_from(n).ok())?;
                let port = a[1].as_u64().and_then(|n| u8::try_from(n).ok())?;
                Some(PortRef::new(n, port))
            });
            inputs.push(parsed.ok_or_else(|| schema(format!("{path}.inputs[{j}]"), "expected [node, port]"))?);
        }
        out.push(RawNode { id, kind, attrs, inputs, path });
    }
    Ok(out)
}

static EMPTY: std::sync::OnceLock<Map<String, Value>> = std::sync::OnceLock::new();

fn decode_program(doc: &Map<String, Value>) -> Result<ProtocolProgram, LoadError> {
    let doc = Obj { path: "$".into(), map: doc };
    let mut program = ProtocolProgram::default();
    for raw in decode_nodes(&doc)? {
        let a = &raw.attrs;
        let kind = match raw.kind {
            "Constant" => {
                let w = a.width("width")?;
                ProtoKind::Constant { value: a.bits("value", w)? }
            }
            "Slice" => ProtoKind::Slice { offset: a.u32("offset")?, width: a.width("width")? },
            "Merge" => ProtoKind::Merge,
            "Extend" => ProtoKind::Extend { width: a.width("width")?, signed: a.bool("signed")? },
            "Unary" => ProtoKind::Unary { op: a.opcode("op")? },
            "Binary" => ProtoKind::Binary { op: a.opcode("op")? },
            "Conditional" => ProtoKind::Conditional,
            "PacketIn" => ProtoKind::PacketIn { prefix_len: a.u32("prefix_len")? },
            "PacketOut" => ProtoKind::PacketOut { prefix_len: a.u32("prefix_len")? },
            "ArrayRead" => ProtoKind::ArrayRead { array: a.u32("array")? },
            "ArrayWrite" => ProtoKind::ArrayWrite { array: a.u32("array")? },
            "TableLookup" => ProtoKind::TableLookup { table: a.u32("table")? },
            "TableWrite" => ProtoKind::TableWrite { table: a.u32("table")? },
            other => return Err(schema(format!("{}.kind", raw.path), format!("unknown node kind {other:?}"))),
        };
        program.nodes.insert(raw.id, ProtoNode { id: raw.id, kind, inputs: raw.inputs });
    }
    for (i, v) in doc.opt_array("arrays")?.iter().enumerate() {
        let o = Obj::new(format!("arrays[{i}]"), v)?;
        program.arrays.push(ArrayDecl { id: o.u32("id")?, elem_width: o.width("elem_width")?, num_elems: o.u32("num_elems")? });
    }
    for (i, v) in doc.opt_array("tables")?.iter().enumerate() {
        let o = Obj::new(format!("tables[{i}]"), v)?;
        program.tables.push(TableDecl {
            id: o.u32("id")?,
            key_width: o.width("key_width")?,
            num_entries: o.u32("num_entries")?,
            cam_impl: o.cam_impl("impl")?,
        });
    }
    Ok(program)
}

fn decode_pipeline(doc: &Map<String, Value>) -> Result<PipelineArch, LoadError> {
    let doc = Obj { path: "$".into(), map: doc };
    let mut arch = PipelineArch::default();
    for raw in decode_nodes(&doc)? {
        let a = &raw.attrs;
        let kind = match raw.kind {
            "Register" => PipeKind::Register { width: a.width("width")? },
            "Router" => PipeKind::Router,
            "Constant" => {
                let width = a.width("width")?;
                let value = if a.map.contains_key("value") { Some(a.bits("value", width)?) } else { None };
                PipeKind::Constant { width, value }
            }
            "Slice" => PipeKind::Slice { offset: a.u32("offset")?, width: a.width("width")? },
            "Merge" => PipeKind::Merge,
            "Extend" => PipeKind::Extend { width: a.width("width")?, signed: a.bool("signed")? },
            "Alu" => {
                let ops = a
                    .array("ops")?
                    .iter()
                    .enumerate()
                    .map(|(j, o)| {
                        o.as_str()
                            .ok_or_else(|| "expected a string".to_string())
                            .and_then(str::parse)
                            .map_err(|m| schema(format!("{}.ops[{j}]", a.path), m))
                    })
                    .collect::<Result<Vec<Opcode>, _>>()?;
                PipeKind::Alu { width: a.width("width")?, ops, latency: a.u32_or("latency", 1)? }
            }
            "PacketIn" => PipeKind::PacketIn { prefix_len: a.u32("prefix_len")?, mtu: a.u32_or("mtu", DEFAULT_MTU)? },
            "PacketOut" => PipeKind::PacketOut { prefix_len: a.u32("prefix_len")?, mtu: a.u32_or("mtu", DEFAULT_MTU)? },
            "RamAccess" => PipeKind::RamAccess { ram: a.u32("ram")?, write: a.bool("write")? },
            "CamAccess" => PipeKind::CamAccess { cam: a.u32("cam")?, write: a.bool("write")? },
            other => return Err(schema(format!("{}.kind", raw.path), format!("unknown node kind {other:?}"))),
        };
        arch.nodes.insert(raw.id, PipeNode { id: raw.id, kind, inputs: raw.inputs });
    }
    for (i, v) in doc.opt_array("rams")?.iter().enumerate() {
        let o = Obj::new(format!("rams[{i}]"), v)?;
        arch.rams.push(RamDecl {
            id: o.u32("id")?,
            elem_width: o.width("elem_width")?,
            num_elems: o.u32("num_elems")?,
            latency: o.u32_or("latency", 1)?,
        });
    }
    for (i, v) in doc.opt_array("cams")?.iter().enumerate() {
        let o = Obj::new(format!("cams[{i}]"), v)?;
        arch.cams.push(CamDecl {
            id: o.u32("id")?,
            key_width: o.width("key_width")?,
            num_entries: o.u32("num_entries")?,
            latency: o.u32_or("latency", 1)?,
            cam_impl: o.cam_impl("impl")?,
        });
    }
    Ok(arch)
}

fn id_map<T>(
    doc: &Obj<'_>,
    name: &str,
    parse: impl Fn(&str, &Value) -> Result<T, LoadError>,
) -> Result<BTreeMap<u32, T>, LoadError> {
    let mut out = BTreeMap::new();
    let Some(v) = doc.map.get(name) else { return Ok(out) };
    let o = Obj::new(format!("{}.{name}", doc.path), v)?;
    for (k, v) in o.map {
        let field = format!("{}.{k}", o.path);
        let id: u32 = k.parse().map_err(|_| schema(&field, "keys must be node or state ids"))?;
        out.insert(id, parse(&field, v)?);
    }
    Ok(out)
}

fn decode_config(doc: &Map<String, Value>) -> Result<RuntimeConfig, LoadError> {
    let doc = Obj { path: "$".into(), map: doc };
    let as_u32 = |field: &str, v: &Value| {
        v.as_u64().and_then(|n| u32::try_from(n).ok()).ok_or_else(|| schema(field, "expected an unsigned integer"))
    };
    let router_select = id_map(&doc, "router_select", as_u32)?;
    let alu_op = id_map(&doc, "alu_op", |field, v| {
        v.as_str().ok_or_else(|| schema(field, "expected an opcode"))?.parse().map_err(|m: String| schema(field, m))
    })?;
    let const_value = id_map(&doc, "const_value", |field, v| {
        let o = Obj::new(field, v)?;
        let w = o.width("width")?;
        o.bits("value", w)
    })?;
    let (array_bind, table_bind) = match doc.map.get("mem_bind") {
        None => Default::default(),
        Some(v) => {
            let o = Obj::new("$.mem_bind", v)?;
            (id_map(&o, "arrays", as_u32)?, id_map(&o, "tables", as_u32)?)
        }
    };
    Ok(RuntimeConfig { router_select, alu_op, const_value, array_bind, table_bind })
}

// ---- encoding --------------------------------------------------------------

fn inputs_json(inputs: &[PortRef]) -> Value {
    Value::Array(inputs.iter().map(|p| json!([p.node, p.port])).collect())
}

fn node_line(id: NodeId, kind: &str, attrs: Value, inputs: &[PortRef]) -> String {
    let v = json!({ "id": id, "kind": kind, "attrs": attrs, "inputs": inputs_json(inputs) });
    serde_json::to_string(&v).expect("json encoding")
}

fn document(kind: &str, nodes: Vec<String>, sections: Vec<(&str, Vec<Value>)>) -> String {
    let mut s = format!("{{\n  \"kind\": \"{kind}\",\n  \"nodes\": [");
    push_lines(&mut s, &nodes);
    s.push(']');
    for (name, items) in sections {
        s.push_str(&format!(",\n  \"{name}\": ["));
        let lines: Vec<String> = items.iter().map(|v| serde_json::to_string(v).unwrap()).collect();
        push_lines(&mut s, &lines);
        s.push(']');
    }
    s.push_str("\n}\n");
    s
}

fn push_lines(s: &mut String, lines: &[String]) {
    if lines.is_empty() {
        return;
    }
    s.push('\n');
    s.push_str(
        &lines.iter().map(|l| format!("    {l}")).collect::<Vec<_>>().join(",\n"),
    );
    s.push_str("\n  ");
}

pub fn store_program(p: &ProtocolProgram) -> String {
    let nodes = p
        .nodes
        .values()
        .map(|n| {
            let attrs = match &n.kind {
                ProtoKind::Constant { value } => json!({"width": value.width(), "value": value.to_hex()}),
                ProtoKind::Slice { offset, width } => json!({"offset": offset, "width": width}),
                ProtoKind::Extend { width, signed } => json!({"width": width, "signed": signed}),
                ProtoKind::Unary { op } | ProtoKind::Binary { op } => json!({"op": op.name()}),
                ProtoKind::PacketIn { prefix_len } | ProtoKind::PacketOut { prefix_len } => {
                    json!({"prefix_len": prefix_len})
                }
                ProtoKind::ArrayRead { array } | ProtoKind::ArrayWrite { array } => json!({"array": array}),
                ProtoKind::TableLookup { table } | ProtoKind::TableWrite { table } => json!({"table": table}),
                ProtoKind::Merge | ProtoKind::Conditional => json!({}),
            };
            node_line(n.id, n.kind.name(), attrs, &n.inputs)
        })
        .collect();
    let mut arrays = p.arrays.clone();
    arrays.sort_by_key(|a| a.id);
    let mut tables = p.tables.clone();
    tables.sort_by_key(|t| t.id);
    document(
        "protocol",
        nodes,
        vec![
            ("arrays", arrays.iter().map(|a| json!({"id": a.id, "elem_width": a.elem_width, "num_elems": a.num_elems})).collect()),
            (
                "tables",
                tables
                    .iter()
                    .map(|t| json!({"id": t.id, "key_width": t.key_width, "num_entries": t.num_entries, "impl": cam_impl_name(t.cam_impl)}))
                    .collect(),
            ),
        ],
    )
}

pub fn store_pipeline(a: &PipelineArch) -> String {
    let nodes = a
        .nodes
        .values()
        .map(|n| {
            let attrs = match &n.kind {
                PipeKind::Register { width } => json!({"width": width}),
                PipeKind::Router | PipeKind::Merge => json!({}),
                PipeKind::Constant { width, value: Some(v) } => json!({"width": width, "value": v.to_hex()}),
                PipeKind::Constant { width, value: None } => json!({"width": width}),
                PipeKind::Slice { offset, width } => json!({"offset": offset, "width": width}),
                PipeKind::Extend { width, signed } => json!({"width": width, "signed": signed}),
                PipeKind::Alu { width, ops, latency } => json!({
                    "width": width,
                    "ops": ops.iter().map(|o| o.name()).collect::<Vec<_>>(),
                    "latency": latency,
                }),
                PipeKind::PacketIn { prefix_len, mtu } | PipeKind::PacketOut { prefix_len, mtu } => {
                    json!({"prefix_len": prefix_len, "mtu": mtu})
                }
                PipeKind::RamAccess { ram, write } => json!({"ram": ram, "write": write}),
                PipeKind::CamAccess { cam, write } => json!({"cam": cam, "write": write}),
            };
            node_line(n.id, n.kind.name(), attrs, &n.inputs)
        })
        .collect();
    let mut rams = a.rams.clone();
    rams.sort_by_key(|r| r.id);
    let mut cams = a.cams.clone();
    cams.sort_by_key(|c| c.id);
    document(
        "pipeline",
        nodes,
        vec![
            (
                "rams",
                rams.iter()
                    .map(|r| json!({"id": r.id, "elem_width": r.elem_width, "num_elems": r.num_elems, "latency": r.latency}))
                    .collect(),
            ),
            (
                "cams",
                cams.iter()
                    .map(|c| json!({"id": c.id, "key_width": c.key_width, "num_entries": c.num_entries, "latency": c.latency, "impl": cam_impl_name(c.cam_impl)}))
                    .collect(),
            ),
        ],
    )
}

pub fn store_config(c: &RuntimeConfig) -> String {
    let map = |m: Map<String, Value>| Value::Object(m);
    let v = json!({
        "kind": "config",
        "router_select": map(c.router_select.iter().map(|(k, v)| (k.to_string(), json!(v))).collect()),
        "alu_op": map(c.alu_op.iter().map(|(k, v)| (k.to_string(), json!(v.name()))).collect()),
        "const_value": map(c.const_value.iter().map(|(k, v)| (k.to_string(), json!({"width": v.width(), "value": v.to_hex()}))).collect()),
        "mem_bind": {
            "arrays": map(c.array_bind.iter().map(|(k, v)| (k.to_string(), json!(v))).collect()),
            "tables": map(c.table_bind.iter().map(|(k, v)| (k.to_string(), json!(v))).collect()),
        },
    });
    let mut s = serde_json::to_string_pretty(&v).expect("json encoding");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ir::program::ProgramBuilder;

    fn sample() -> ProtocolProgram {
        let mut b = ProgramBuilder::new();
        b.declare_array(0, 32, 4);
        b.declare_table(1, 16, 8, CamImpl::HashCam);
        let (p, l) = b.packet_in(16);
        let k = b.slice(p, 0, 16);
        let hit = b.table_lookup(1, k);
        let idx = b.slice(hit, 0, 2);
        let v = b.array_read(0, idx);
        let _ = b.unary(Opcode::Not, v);
        let cmd = b.constant(2, 1);
        b.packet_out(16, cmd, p, l);
        b.build()
    }

    #[test]
    fn program_round_trip() {
        let p = sample();
        let bytes = store_artifact(&Artifact::Protocol(p.clone()));
        let back = load_artifact(&bytes, Some(ArtifactKind::Protocol)).unwrap();
        assert_eq!(back, Artifact::Protocol(p));
        assert_eq!(store_artifact(&back), bytes);
    }

    #[test]
    fn insertion_order_irrelevant() {
        let p = sample();
        let mut q = ProtocolProgram { arrays: p.arrays.clone(), tables: p.tables.clone(), ..Default::default() };
        for (id, n) in p.nodes.iter().rev() {
            q.nodes.insert(*id, n.clone());
        }
        assert_eq!(store_program(&p), store_program(&q));
    }

    #[test]
    fn empty_documents() {
        let text = store_program(&ProtocolProgram::default());
        let back = load_artifact(text.as_bytes(), None).unwrap();
        assert_eq!(back, Artifact::Protocol(ProtocolProgram::default()));
        let text = store_pipeline(&PipelineArch::default());
        assert!(load_artifact(text.as_bytes(), Some(ArtifactKind::Pipeline)).is_ok());
    }

    #[test]
    fn unknown_kind_and_duplicates() {
        let doc = br#"{"kind":"protocol","nodes":[{"id":0,"kind":"foo","attrs":{},"inputs":[]}]}"#;
        match load_artifact(doc, None) {
            Err(LoadError::Schema { field, message }) => {
                assert_eq!(field, "nodes[0].kind");
                assert!(message.contains("foo"));
            }
            other => panic!("unexpected {other:?}"),
        }
        let doc = br#"{"kind":"protocol","nodes":[
            {"id":0,"kind":"Merge","attrs":{},"inputs":[]},
            {"id":0,"kind":"Merge","attrs":{},"inputs":[]}]}"#;
        assert!(matches!(load_artifact(doc, None), Err(LoadError::Schema { .. })));
    }

    #[test]
    fn syntax_error_has_position() {
        let doc = b"{\n  \"kind\": \"protocol\",\n  \"nodes\": [,]\n}";
        match load_artifact(doc, None) {
            Err(LoadError::Syntax { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn missing_field_named() {
        let doc = br#"{"kind":"protocol","nodes":[{"id":0,"kind":"Slice","attrs":{"width":3},"inputs":[]}]}"#;
        assert_eq!(
            load_artifact(doc, None),
            Err(schema("nodes[0].attrs.offset", "missing field"))
        );
    }

    #[test]
    fn config_round_trip() {
        let mut c = RuntimeConfig::default();
        c.router_select.insert(4, 2);
        c.alu_op.insert(7, Opcode::Xor);
        c.const_value.insert(9, Bits::from_u64(16, 0x11d9));
        c.array_bind.insert(0, 3);
        c.table_bind.insert(1, 0);
        let bytes = store_artifact(&Artifact::Config(c.clone()));
        assert_eq!(load_artifact(&bytes, Some(ArtifactKind::Config)).unwrap(), Artifact::Config(c));
    }
}
