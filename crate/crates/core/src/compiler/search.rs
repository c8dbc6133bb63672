// SPDX-License-Identifier: Apache-2.0

use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use serde_json::json;

use super::encode::{encode, EncodeError, EncodeOptions};
use super::extract::extract_config;
use super::restrict::restrict;
use super::sat::{Budget, SolveResult};
use super::{solve, CompileError};
use crate::frontend::normalize_program;
use crate::ir::{PipelineArch, ProtocolProgram, RuntimeConfig};

/// Degree-limit search schedule and budgets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchParams {
    /// Tried round-robin; 0 means unrestricted.
    pub degree_limits: Vec<u32>,
    pub seed: u64,
    pub workers: usize,
    pub per_try_timeout: Option<Duration>,
    pub total_timeout: Option<Duration>,
    pub max_tries: Option<usize>,
    /// Re-solve unrestricted after every restricted success and fail loudly
    /// if that is UNSAT.
    pub verify_unrestricted: bool,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            degree_limits: vec![2, 4, 8, 0],
            seed: 0,
            workers: 1,
            per_try_timeout: Some(Duration::from_secs(60)),
            total_timeout: None,
            max_tries: None,
            verify_unrestricted: false,
        }
    }
}

impl SearchParams {
    /// Degree limit and seed of try `index`.
    pub fn try_plan(&self, index: usize) -> (u32, u64) {
        let d = self.degree_limits[index % self.degree_limits.len()];
        (d, splitmix(self.seed ^ splitmix(index as u64)))
    }
}

fn splitmix(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Feasible(RuntimeConfig),
    Infeasible,
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TryOutcome {
    Sat,
    Unsat,
    Timeout,
    Cancelled,
    Structural,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TryStats {
    pub index: usize,
    pub degree_limit: u32,
    pub seed: u64,
    /// Whether the view dropped any router input.
    pub restricted: bool,
    pub vars: u32,
    pub clauses: usize,
    pub conflicts: u64,
    pub outcome: TryOutcome,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CompileStats {
    pub tries: Vec<TryStats>,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompileResult {
    pub outcome: Outcome,
    pub stats: CompileStats,
}

impl CompileResult {
    pub fn config(&self) -> Option<&RuntimeConfig> {
        match &self.outcome {
            Outcome::Feasible(c) => Some(c),
            _ => None,
        }
    }

    /// Machine-readable summary of the search.
    pub fn report_json(&self) -> String {
        let outcome = match self.outcome {
            Outcome::Feasible(_) => "feasible",
            Outcome::Infeasible => "infeasible",
            Outcome::Unknown => "unknown",
        };
        let tries: Vec<_> = self
            .stats
            .tries
            .iter()
            .map(|t| {
                json!({
                    "index": t.index,
                    "degree_limit": t.degree_limit,
                    "seed": t.seed,
                    "restricted": t.restricted,
                    "vars": t.vars,
                    "clauses": t.clauses,
                    "conflicts": t.conflicts,
                    "outcome": format!("{:?}", t.outcome).to_lowercase(),
                    "ms": t.elapsed.as_millis() as u64,
                })
            })
            .collect();
        let v = json!({ "outcome": outcome, "ms": self.stats.elapsed.as_millis() as u64, "tries": tries });
        serde_json::to_string_pretty(&v).expect("json")
    }
}

enum TryResult {
    Feasible(RuntimeConfig),
    /// UNSAT on the full edge set: compilation is impossible.
    Refuted,
    Inconclusive,
}

struct Ctx<'a> {
    program: &'a ProtocolProgram,
    arch: &'a PipelineArch,
    params: &'a SearchParams,
    deadline: Option<Instant>,
    cancel: &'a AtomicBool,
}

fn run_try(ctx: &Ctx, index: usize) -> Result<(TryStats, TryResult), CompileError> {
    let t0 = Instant::now();
    let (d, seed) = ctx.params.try_plan(index);
    let view = restrict(ctx.arch, d, seed);
    let mut stats = TryStats {
        index,
        degree_limit: d,
        seed,
        restricted: view.is_restricted(),
        vars: 0,
        clauses: 0,
        conflicts: 0,
        outcome: TryOutcome::Structural,
        elapsed: Duration::ZERO,
    };
    let cnf = match encode(ctx.program, ctx.arch, &view, &EncodeOptions::default()) {
        Ok(c) => c,
        Err(EncodeError::Structural(_)) => {
            stats.elapsed = t0.elapsed();
            return Ok((stats, TryResult::Refuted));
        }
        Err(EncodeError::Invalid(m)) => return Err(CompileError::Invalid(m)),
    };
    stats.vars = cnf.var_count;
    stats.clauses = cnf.clauses.len();
    let try_deadline = ctx.params.per_try_timeout.map(|t| Instant::now() + t);
    let deadline = match (try_deadline, ctx.deadline) {
        (Some(a), Some(b)) => Some(a.min(b)),
        (a, b) => a.or(b),
    };
    let (result, solver_stats) = solve(&cnf, &Budget { deadline, cancel: Some(ctx.cancel) })?;
    stats.conflicts = solver_stats.conflicts;
    let out = match result {
        SolveResult::Sat(model) => {
            stats.outcome = TryOutcome::Sat;
            let cfg = extract_config(&model, &cnf, ctx.arch, ctx.program)?;
            if ctx.params.verify_unrestricted && view.is_restricted() {
                let full = encode(ctx.program, ctx.arch, &restrict(ctx.arch, 0, 0), &EncodeOptions::default())
                    .map_err(|e| CompileError::Internal(format!("restricted SAT but unrestricted encode failed: {e}")))?;
                if solve(&full, &Budget::default())?.0 == SolveResult::Unsat {
                    return Err(CompileError::Internal("restricted SAT but unrestricted UNSAT".into()));
                }
            }
            TryResult::Feasible(cfg)
        }
        SolveResult::Unsat => {
            stats.outcome = TryOutcome::Unsat;
            if view.is_restricted() {
                TryResult::Inconclusive
            } else {
                TryResult::Refuted
            }
        }
        SolveResult::Unknown => {
            stats.outcome = if ctx.cancel.load(Ordering::Relaxed) { TryOutcome::Cancelled } else { TryOutcome::Timeout };
            TryResult::Inconclusive
        }
    };
    stats.elapsed = t0.elapsed();
    Ok((stats, out))
}

/// Compiles `program` onto `arch` by repeated degree-limited tries.
///
/// The program is first normalized to the architecture's packet prefix.
/// Only an UNSAT verdict on the unrestricted edge set yields `Infeasible`;
/// restricted failures just move on to the next try. With one worker the
/// sequence of tries is deterministic.
pub fn compile(
    program: &ProtocolProgram,
    arch: &PipelineArch,
    params: &SearchParams,
) -> Result<CompileResult, CompileError> {
    let start = Instant::now();
    if params.degree_limits.is_empty() {
        return Err(CompileError::Invalid("empty degree-limit schedule".into()));
    }
    let target = arch.prefix_len().ok_or_else(|| CompileError::Invalid("architecture has no packet input".into()))?;
    let program = &normalize_program(program, target).map_err(|e| CompileError::Invalid(e.to_string()))?;
    let cancel = AtomicBool::new(false);
    let ctx = Ctx { program, arch, params, deadline: params.total_timeout.map(|t| start + t), cancel: &cancel };
    let expired = || ctx.deadline.is_some_and(|d| Instant::now() >= d);
    let exhausted = |i: usize| params.max_tries.is_some_and(|m| i >= m);

    let mut tries = Vec::new();
    let mut outcome = Outcome::Unknown;
    if params.workers <= 1 {
        let mut i = 0;
        while !exhausted(i) && !expired() {
            let (st, r) = run_try(&ctx, i)?;
            tries.push(st);
            i += 1;
            match r {
                TryResult::Feasible(cfg) => {
                    outcome = Outcome::Feasible(cfg);
                    break;
                }
                TryResult::Refuted => {
                    outcome = Outcome::Infeasible;
                    break;
                }
                TryResult::Inconclusive => {}
            }
        }
    } else {
        let next = AtomicUsize::new(0);
        let shared: Mutex<(Vec<TryStats>, Option<Outcome>, Option<CompileError>)> = Mutex::new((Vec::new(), None, None));
        std::thread::scope(|s| {
            for _ in 0..params.workers {
                s.spawn(|| loop {
                    if cancel.load(Ordering::Relaxed) || expired() {
                        break;
                    }
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if exhausted(i) {
                        break;
                    }
                    let r = run_try(&ctx, i);
                    let mut g = shared.lock().expect("search state");
                    match r {
                        Err(e) => {
                            g.2.get_or_insert(e);
                            cancel.store(true, Ordering::Relaxed);
                        }
                        Ok((st, r)) => {
                            g.0.push(st);
                            let decided = match r {
                                TryResult::Feasible(cfg) => Some(Outcome::Feasible(cfg)),
                                TryResult::Refuted => Some(Outcome::Infeasible),
                                TryResult::Inconclusive => None,
                            };
                            if let Some(o) = decided {
                                if g.1.is_none() {
                                    g.1 = Some(o);
                                }
                                cancel.store(true, Ordering::Relaxed);
                            }
                        }
                    }
                });
            }
        });
        let (mut t, o, e) = shared.into_inner().expect("search state");
        if let Some(e) = e {
            return Err(e);
        }
        t.sort_by_key(|s| s.index);
        tries = t;
        if let Some(o) = o {
            outcome = o;
        }
    }
    Ok(CompileResult { outcome, stats: CompileStats { tries, elapsed: start.elapsed() } })
}
