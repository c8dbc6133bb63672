// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

use super::check::Checker;
use super::restrict::EdgeView;
use crate::bits::Bits;
use crate::ir::{
    alu_slot, NodeId, Opcode, PipeKind, PipeNode, PipelineArch, PortRef, ProtoKind, ProtoNode,
    ProtocolProgram, Width,
};

/// A program array or table.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateRef {
    Array(u32),
    Table(u32),
}

impl StateRef {
    fn of(kind: &ProtoKind) -> Option<StateRef> {
        kind.array_id().map(StateRef::Array).or_else(|| kind.table_id().map(StateRef::Table))
    }
}

/// The propositions a SAT variable can stand for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Literal {
    /// Hardware port `hw` carries the value of program port `proto` (for
    /// sinks: performs its effect).
    Out { hw: PortRef, proto: PortRef },
    Pick { router: NodeId, input: u32 },
    AluOp { alu: NodeId, op: Opcode },
    /// Program state lives in RAM or CAM `mem`.
    Bind { state: StateRef, mem: u32 },
    /// Helper variable with no configuration meaning.
    Aux(u32),
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Literal::Out { hw, proto } => write!(f, "OUT({hw},{proto})"),
            Literal::Pick { router, input } => write!(f, "PICK({router},{input})"),
            Literal::AluOp { alu, op } => write!(f, "ALUOP({alu},{op})"),
            Literal::Bind { state: StateRef::Array(a), mem } => write!(f, "BIND(array {a},ram {mem})"),
            Literal::Bind { state: StateRef::Table(t), mem } => write!(f, "BIND(table {t},cam {mem})"),
            Literal::Aux(n) => write!(f, "AUX({n})"),
        }
    }
}

/// Bijection between literals and variable ids `1..=len`.
#[derive(Clone, Debug, Default)]
pub struct LitMap {
    lits: Vec<Literal>,
    ids: HashMap<Literal, u32>,
}

impl LitMap {
    pub fn var(&mut self, lit: Literal) -> u32 {
        if let Some(&v) = self.ids.get(&lit) {
            return v;
        }
        self.lits.push(lit);
        let v = self.lits.len() as u32;
        self.ids.insert(lit, v);
        v
    }

    pub fn get(&self, lit: &Literal) -> Option<u32> {
        self.ids.get(lit).copied()
    }

    pub fn literal(&self, var: u32) -> Option<&Literal> {
        self.lits.get((var as usize).checked_sub(1)?)
    }

    pub fn len(&self) -> usize {
        self.lits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lits.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Literal)> {
        self.lits.iter().enumerate().map(|(i, l)| (i as u32 + 1, l))
    }
}

/// Clause families, for census and debugging.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    RuleOut,
    Register,
    AtLeastOne,
    AtMostOne,
    OutputEqualsInput,
    OperandsMatch,
    AluOp,
    Root,
    WriteCover,
    WriteExclusive,
    WriteOrder,
    WriteDisable,
    Bind,
    BindImplies,
    ConstConflict,
}

impl Family {
    pub fn name(self) -> &'static str {
        match self {
            Family::RuleOut => "rule_out",
            Family::Register => "register",
            Family::AtLeastOne => "at_least_one",
            Family::AtMostOne => "at_most_one",
            Family::OutputEqualsInput => "output_equals_input",
            Family::OperandsMatch => "operands_match",
            Family::AluOp => "alu_op",
            Family::Root => "root",
            Family::WriteCover => "write_cover",
            Family::WriteExclusive => "write_exclusive",
            Family::WriteOrder => "write_order",
            Family::WriteDisable => "write_disable",
            Family::Bind => "bind",
            Family::BindImplies => "bind_implies",
            Family::ConstConflict => "const_conflict",
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct CnfInstance {
    pub var_count: u32,
    pub clauses: Vec<Vec<i32>>,
    pub litmap: LitMap,
    pub census: BTreeMap<Family, usize>,
    /// Zero constants added to the program to express disabled writes.
    pub virtual_consts: BTreeMap<NodeId, Bits>,
}

impl CnfInstance {
    pub fn family(&self, f: Family) -> usize {
        self.census.get(&f).copied().unwrap_or(0)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum EncodeError {
    /// No assignment can exist, independent of any edge restriction.
    #[error("structurally infeasible: {0}")]
    Structural(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

/// Encoding switches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EncodeOptions {
    /// Drop literals that cannot be true (bottom-up reachability) or are
    /// never needed (top-down demand from the packet output and state
    /// writes). Satisfiability is unchanged. Without pruning, every
    /// (hardware port, program port) pair gets a variable and incompatible
    /// pairs get a unit rule-out clause.
    pub prune: bool,
}

impl Default for EncodeOptions {
    fn default() -> Self {
        EncodeOptions { prune: true }
    }
}

impl EncodeOptions {
    pub fn literal() -> Self {
        EncodeOptions { prune: false }
    }
}

fn ports_of(outputs: usize, id: NodeId) -> impl Iterator<Item = PortRef> {
    (0..outputs.max(1) as u8).map(move |p| PortRef::new(id, p))
}

struct Enc<'a> {
    chk: Checker<'a>,
    view: &'a EdgeView,
    prune: bool,
    pr_ports: Vec<PortRef>,
    pr_idx: HashMap<PortRef, u32>,
    hw_idx: HashMap<PortRef, u32>,
    /// Per hardware port: compatible program port indexes, ascending.
    compat: Vec<Vec<u32>>,
    possible: Vec<Vec<bool>>,
    demanded: Vec<Vec<bool>>,
    cnf: CnfInstance,
    routers_done: HashSet<NodeId>,
    alus_done: HashSet<NodeId>,
}

impl<'a> Enc<'a> {
    fn slot(&self, h: PortRef, l: PortRef) -> Option<(usize, usize)> {
        let hi = *self.hw_idx.get(&h)? as usize;
        let li = *self.pr_idx.get(&l)?;
        let k = self.compat[hi].binary_search(&li).ok()?;
        Some((hi, k))
    }

    fn is_possible(&self, h: PortRef, l: PortRef) -> bool {
        self.slot(h, l).is_some_and(|(i, k)| self.possible[i][k])
    }

    fn is_live(&self, h: PortRef, l: PortRef) -> bool {
        if self.prune {
            self.slot(h, l).is_some_and(|(i, k)| self.demanded[i][k])
        } else {
            self.slot(h, l).is_some()
        }
    }

    /// Literal for OUT(h, l), or None when it is known false.
    fn out(&mut self, h: PortRef, l: PortRef) -> Option<i32> {
        let present = if self.prune {
            self.is_live(h, l)
        } else {
            self.hw_idx.contains_key(&h) && self.pr_idx.contains_key(&l)
        };
        present.then(|| self.cnf.litmap.var(Literal::Out { hw: h, proto: l }) as i32)
    }

    fn lit(&mut self, l: Literal) -> i32 {
        self.cnf.litmap.var(l) as i32
    }

    fn emit(&mut self, family: Family, clause: Vec<i32>) {
        debug_assert!(!clause.is_empty());
        *self.cnf.census.entry(family).or_default() += 1;
        self.cnf.clauses.push(clause);
    }

    fn at_most_one(&mut self, family: Family, lits: &[i32]) {
        for i in 1..lits.len() {
            for j in 0..i {
                self.emit(family, vec![-lits[i], -lits[j]]);
            }
        }
    }

    /// A satisfiable-looking unit that is immediately contradicted.
    fn contradiction(&mut self, family: Family) {
        let n = self.cnf.litmap.len() as u32;
        let x = self.lit(Literal::Aux(n));
        self.emit(family, vec![x]);
        self.emit(family, vec![-x]);
    }

    fn hw(&self, id: NodeId) -> &'a PipeNode {
        &self.chk.arch.nodes[&id]
    }

    fn pr(&self, id: NodeId) -> &'a ProtoNode {
        &self.chk.program.nodes[&id]
    }

    /// Operand pairs OUT(h, l) depends on, excluding routers.
    fn operand_pairs(&self, h: PortRef, l: PortRef) -> Vec<(PortRef, PortRef)> {
        let (hn, ln) = (self.hw(h.node), self.pr(l.node));
        match &hn.kind {
            PipeKind::Register { .. } => vec![(hn.inputs[0], l)],
            PipeKind::Constant { .. } | PipeKind::PacketIn { .. } => vec![],
            PipeKind::Router => self.view.inputs(hn).into_iter().map(|i| (hn.inputs[i as usize], l)).collect(),
            PipeKind::Alu { .. } => {
                let op = ln.kind.op().expect("compatible compute node");
                (0..op.arity()).map(|k| (hn.inputs[alu_slot(op, k)], ln.inputs[k])).collect()
            }
            _ => hn.inputs.iter().copied().zip(ln.inputs.iter().copied()).collect(),
        }
    }

    fn compute_possible(&mut self, order: &[NodeId]) {
        for &id in order {
            let n = self.hw(id);
            for h in ports_of(n.kind.num_outputs(), id) {
                let Some(&hi) = self.hw_idx.get(&h) else { continue };
                let hi = hi as usize;
                for k in 0..self.compat[hi].len() {
                    let l = self.pr_ports[self.compat[hi][k] as usize];
                    let pairs = self.operand_pairs(h, l);
                    let ok = if n.kind == PipeKind::Router {
                        pairs.iter().any(|&(a, b)| self.is_possible(a, b))
                    } else {
                        pairs.iter().all(|&(a, b)| self.is_possible(a, b))
                    };
                    self.possible[hi][k] = ok;
                }
            }
        }
    }

    /// Breadth-first demand from `seeds`; returns live pairs in visit order.
    fn compute_demand(&mut self, seeds: &[(PortRef, PortRef)]) -> Vec<(PortRef, PortRef)> {
        let mut queue: VecDeque<(PortRef, PortRef)> = VecDeque::new();
        let mut order = Vec::new();
        let visit = |enc: &mut Self, queue: &mut VecDeque<_>, h: PortRef, l: PortRef| {
            if let Some((i, k)) = enc.slot(h, l) {
                if enc.possible[i][k] && !enc.demanded[i][k] {
                    enc.demanded[i][k] = true;
                    queue.push_back((h, l));
                }
            }
        };
        for &(h, l) in seeds {
            visit(self, &mut queue, h, l);
        }
        while let Some((h, l)) = queue.pop_front() {
            order.push((h, l));
            for (a, b) in self.operand_pairs(h, l) {
                visit(self, &mut queue, a, b);
            }
        }
        order
    }

    fn emit_pair(&mut self, h: PortRef, l: PortRef) {
        let x = self.out(h, l).expect("live pair");
        let (hn, ln) = (self.hw(h.node), self.pr(l.node));
        match &hn.kind {
            PipeKind::Register { .. } => {
                let mut c = vec![-x];
                c.extend(self.out(hn.inputs[0], l));
                self.emit(Family::Register, c);
            }
            PipeKind::Constant { .. } => {}
            PipeKind::Router => {
                let ins = self.view.inputs(hn);
                let picks: Vec<i32> =
                    ins.iter().map(|&i| self.lit(Literal::Pick { router: hn.id, input: i })).collect();
                if self.routers_done.insert(hn.id) {
                    self.emit(Family::AtLeastOne, picks.clone());
                    self.at_most_one(Family::AtMostOne, &picks);
                }
                for (&i, &p) in ins.iter().zip(&picks) {
                    let mut c = vec![-x, -p];
                    c.extend(self.out(hn.inputs[i as usize], l));
                    self.emit(Family::OutputEqualsInput, c);
                }
            }
            PipeKind::Alu { ops, .. } => {
                if self.alus_done.insert(hn.id) {
                    let all: Vec<i32> = ops.iter().map(|&op| self.lit(Literal::AluOp { alu: hn.id, op })).collect();
                    self.at_most_one(Family::AtMostOne, &all);
                }
                for (a, b) in self.operand_pairs(h, l) {
                    let mut c = vec![-x];
                    c.extend(self.out(a, b));
                    self.emit(Family::OperandsMatch, c);
                }
                let op = ln.kind.op().expect("compute node");
                let o = self.lit(Literal::AluOp { alu: hn.id, op });
                self.emit(Family::AluOp, vec![-x, o]);
            }
            _ => {
                for (a, b) in self.operand_pairs(h, l) {
                    let mut c = vec![-x];
                    c.extend(self.out(a, b));
                    self.emit(Family::OperandsMatch, c);
                }
                if let (Some(state), Some(mem)) = (StateRef::of(&ln.kind), mem_of(&hn.kind)) {
                    let b = self.lit(Literal::Bind { state, mem });
                    self.emit(Family::BindImplies, vec![-x, b]);
                }
            }
        }
    }
}

fn mem_of(kind: &PipeKind) -> Option<u32> {
    match kind {
        PipeKind::RamAccess { ram, .. } => Some(*ram),
        PipeKind::CamAccess { cam, .. } => Some(*cam),
        _ => None,
    }
}

fn mem_matches_state(kind: &PipeKind, s: StateRef) -> bool {
    matches!(
        (kind, s),
        (PipeKind::RamAccess { .. }, StateRef::Array(_)) | (PipeKind::CamAccess { .. }, StateRef::Table(_))
    )
}

/// Memories of `arch` with exactly the dimensions of state `s`.
fn compatible_mems(arch: &PipelineArch, program: &ProtocolProgram, s: StateRef) -> Vec<u32> {
    match s {
        StateRef::Array(a) => {
            let Some(d) = program.array(a) else { return vec![] };
            arch.rams.iter().filter(|r| r.elem_width == d.elem_width && r.num_elems == d.num_elems).map(|r| r.id).collect()
        }
        StateRef::Table(t) => {
            let Some(d) = program.table(t) else { return vec![] };
            arch.cams
                .iter()
                .filter(|c| c.key_width == d.key_width && c.num_entries == d.num_entries && c.cam_impl == d.cam_impl)
                .map(|c| c.id)
                .collect()
        }
    }
}

/// Encodes the compilation of `program` onto `arch`, considering only the
/// router inputs in `view`, as CNF.
///
/// Beyond the per-node clauses of the matching algorithm, the instance
/// anchors the packet output pair with a unit clause, requires every program
/// state write to be realized by a hardware write (at most one program write
/// per hardware write, in program order), binds each used array and table to
/// exactly one equally dimensioned memory, keeps every other hardware write
/// on a bound memory disabled (its enable matches a zero constant), and
/// forbids a runtime constant from matching two different values.
pub fn encode(
    program: &ProtocolProgram,
    arch: &PipelineArch,
    view: &EdgeView,
    options: &EncodeOptions,
) -> Result<CnfInstance, EncodeError> {
    let hw_order = arch.topo().ok_or_else(|| EncodeError::Invalid("architecture graph has a cycle".into()))?;
    program.topo().ok_or_else(|| EncodeError::Invalid("program graph has a cycle".into()))?;
    let (Some(pout), Some(hout)) = (program.packet_out(), arch.packet_out()) else {
        return Err(EncodeError::Structural("missing packet output".into()));
    };
    let hw_widths = arch.value_widths();

    // states referenced by the program and the memories they may live in
    let mut states: BTreeMap<StateRef, Vec<u32>> = BTreeMap::new();
    for n in program.nodes.values() {
        if let Some(s) = StateRef::of(&n.kind) {
            states.entry(s).or_insert_with(|| compatible_mems(arch, program, s));
        }
    }
    for (s, mems) in &states {
        if mems.is_empty() {
            return Err(EncodeError::Structural(format!("no memory with the dimensions of {s:?}")));
        }
    }

    // hardware writes that may need disabling, and zero constants for them
    let guarded: Vec<&PipeNode> = arch
        .nodes
        .values()
        .filter(|n| n.kind.is_write())
        .filter(|n| states.iter().any(|(s, ms)| mem_matches_state(&n.kind, *s) && ms.contains(&mem_of(&n.kind).unwrap())))
        .collect();
    let mut augmented = program.clone();
    let mut zeros: BTreeMap<Width, PortRef> = BTreeMap::new();
    let mut virtual_consts = BTreeMap::new();
    for n in &guarded {
        if let Some(w) = n.inputs.get(2).and_then(|p| hw_widths.get(p)) {
            zeros.entry(*w).or_insert_with(|| {
                let id = augmented.next_id();
                let value = Bits::zero(*w);
                virtual_consts.insert(id, value.clone());
                augmented.nodes.insert(id, ProtoNode { id, kind: ProtoKind::Constant { value }, inputs: vec![] });
                PortRef::out(id)
            });
        }
    }
    let program = &augmented;

    let chk = Checker { arch, program, hw_widths, pr_widths: program.value_widths() };
    let pr_ports: Vec<PortRef> =
        program.nodes.values().flat_map(|n| ports_of(n.kind.num_outputs(), n.id)).collect();
    let hw_ports: Vec<PortRef> = arch.nodes.values().flat_map(|n| ports_of(n.kind.num_outputs(), n.id)).collect();
    let mut buckets: HashMap<Option<Width>, Vec<u32>> = HashMap::new();
    for (i, p) in pr_ports.iter().enumerate() {
        buckets.entry(chk.pr_widths.get(p).copied()).or_default().push(i as u32);
    }
    let compat: Vec<Vec<u32>> = hw_ports
        .iter()
        .map(|&h| {
            buckets
                .get(&chk.hw_widths.get(&h).copied())
                .map(|b| b.iter().copied().filter(|&li| chk.check(h, pr_ports[li as usize])).collect())
                .unwrap_or_default()
        })
        .collect();
    let possible: Vec<Vec<bool>> = compat.iter().map(|c| vec![!options.prune; c.len()]).collect();
    let demanded = possible.clone();
    let mut enc = Enc {
        view,
        prune: options.prune,
        pr_idx: pr_ports.iter().enumerate().map(|(i, p)| (*p, i as u32)).collect(),
        hw_idx: hw_ports.iter().enumerate().map(|(i, p)| (*p, i as u32)).collect(),
        chk,
        pr_ports,
        compat,
        possible,
        demanded,
        cnf: CnfInstance { virtual_consts, ..CnfInstance::default() },
        routers_done: HashSet::new(),
        alus_done: HashSet::new(),
    };

    let root = (PortRef::out(hout.id), PortRef::out(pout.id));
    if enc.slot(root.0, root.1).is_none() {
        return Err(EncodeError::Structural("no compatible packet output".into()));
    }
    let pr_writes: Vec<&ProtoNode> = program.nodes.values().filter(|n| n.kind.is_state_write()).collect();
    let hw_writes: Vec<&PipeNode> = arch.nodes.values().filter(|n| n.kind.is_write()).collect();
    for l in &pr_writes {
        if !hw_writes.iter().any(|h| enc.slot(PortRef::out(h.id), PortRef::out(l.id)).is_some()) {
            return Err(EncodeError::Structural(format!("no hardware write can realize node {}", l.id)));
        }
    }

    let pairs: Vec<(PortRef, PortRef)> = if options.prune {
        enc.compute_possible(&hw_order);
        let mut seeds = vec![root];
        for l in &pr_writes {
            seeds.extend(hw_writes.iter().map(|h| (PortRef::out(h.id), PortRef::out(l.id))));
        }
        for h in &guarded {
            if let Some(&en) = h.inputs.get(2) {
                seeds.push((en, zeros[&enc.chk.hw_widths[&en]]));
            }
        }
        enc.compute_demand(&seeds)
    } else {
        let mut all = Vec::new();
        let pr_ports = enc.pr_ports.clone();
        for (hi, &h) in hw_ports.iter().enumerate() {
            let mut k = 0;
            for (li, &l) in pr_ports.iter().enumerate() {
                if enc.compat[hi].get(k) == Some(&(li as u32)) {
                    all.push((h, l));
                    k += 1;
                } else {
                    let x = enc.out(h, l).expect("literal mode");
                    enc.emit(Family::RuleOut, vec![-x]);
                }
            }
        }
        all
    };

    match enc.out(root.0, root.1) {
        Some(x) => enc.emit(Family::Root, vec![x]),
        None => enc.contradiction(Family::Root),
    }
    for &(h, l) in &pairs {
        enc.emit_pair(h, l);
    }

    // every program write realized; one program write per hardware write
    let mut per_hw: BTreeMap<NodeId, Vec<i32>> = BTreeMap::new();
    for l in &pr_writes {
        let mut cover = Vec::new();
        for h in &hw_writes {
            let (hp, lp) = (PortRef::out(h.id), PortRef::out(l.id));
            if enc.slot(hp, lp).is_some() {
                if let Some(x) = enc.out(hp, lp) {
                    cover.push(x);
                    per_hw.entry(h.id).or_default().push(x);
                }
            }
        }
        if cover.is_empty() {
            enc.contradiction(Family::WriteCover);
        } else {
            enc.emit(Family::WriteCover, cover);
        }
    }
    for lits in per_hw.values() {
        enc.at_most_one(Family::WriteExclusive, lits);
    }
    // hardware commit order must follow program order on the same state
    for (i, l1) in pr_writes.iter().enumerate() {
        for l2 in &pr_writes[i + 1..] {
            if StateRef::of(&l1.kind) != StateRef::of(&l2.kind) {
                continue;
            }
            for h1 in &hw_writes {
                for h2 in hw_writes.iter().filter(|h2| h2.id < h1.id) {
                    let a = PortRef::out(h1.id);
                    let b = PortRef::out(h2.id);
                    if enc.is_live(a, PortRef::out(l1.id)) && enc.is_live(b, PortRef::out(l2.id)) {
                        let x = enc.out(a, PortRef::out(l1.id)).unwrap();
                        let y = enc.out(b, PortRef::out(l2.id)).unwrap();
                        enc.emit(Family::WriteOrder, vec![-x, -y]);
                    }
                }
            }
        }
    }

    // memory binding: exactly one memory per state, one state per memory
    let mut per_mem: BTreeMap<(bool, u32), Vec<i32>> = BTreeMap::new();
    for (&state, mems) in &states {
        let lits: Vec<i32> = mems.iter().map(|&mem| enc.lit(Literal::Bind { state, mem })).collect();
        enc.emit(Family::Bind, lits.clone());
        enc.at_most_one(Family::Bind, &lits);
        for (&mem, &x) in mems.iter().zip(&lits) {
            per_mem.entry((matches!(state, StateRef::Table(_)), mem)).or_default().push(x);
        }
    }
    for lits in per_mem.values() {
        enc.at_most_one(Family::Bind, lits);
    }

    // a runtime constant holds one value
    for n in arch.nodes.values().filter(|n| n.kind.is_runtime_constant()) {
        let h = PortRef::out(n.id);
        let mut by_value: Vec<(Bits, i32)> = Vec::new();
        for l in program.find(|k| matches!(k, ProtoKind::Constant { .. })) {
            let lp = PortRef::out(l.id);
            if enc.slot(h, lp).is_some() && enc.is_live(h, lp) {
                let ProtoKind::Constant { value } = &l.kind else { unreachable!() };
                let x = enc.out(h, lp).unwrap();
                by_value.push((value.clone(), x));
            }
        }
        for i in 1..by_value.len() {
            for j in 0..i {
                if by_value[i].0 != by_value[j].0 {
                    enc.emit(Family::ConstConflict, vec![-by_value[i].1, -by_value[j].1]);
                }
            }
        }
    }

    // hardware writes on a bound memory either realize a program write of
    // that state or stay disabled
    for h in &guarded {
        let mem = mem_of(&h.kind).unwrap();
        for (&state, mems) in &states {
            if !mem_matches_state(&h.kind, state) || !mems.contains(&mem) {
                continue;
            }
            let mut c = vec![-enc.lit(Literal::Bind { state, mem })];
            for l in pr_writes.iter().filter(|l| StateRef::of(&l.kind) == Some(state)) {
                let (hp, lp) = (PortRef::out(h.id), PortRef::out(l.id));
                if enc.slot(hp, lp).is_some() {
                    c.extend(enc.out(hp, lp));
                }
            }
            if let Some(&en) = h.inputs.get(2) {
                let z = zeros[&enc.chk.hw_widths[&en]];
                if enc.slot(en, z).is_some() {
                    c.extend(enc.out(en, z));
                }
            }
            enc.emit(Family::WriteDisable, c);
        }
    }

    let mut cnf = enc.cnf;
    cnf.var_count = cnf.litmap.len() as u32;
    Ok(cnf)
}
