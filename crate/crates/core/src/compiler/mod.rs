// SPDX-License-Identifier: Apache-2.0

//! SAT-based compilation of protocol programs onto pipeline architectures.

mod check;
mod dimacs;
mod encode;
mod extract;
mod restrict;
pub mod sat;
mod search;

pub use check::static_check;
pub use dimacs::{export_dimacs, literal_names};
pub use encode::{encode, CnfInstance, EncodeError, EncodeOptions, Family, LitMap, Literal, StateRef};
pub use extract::{extract_config, ExtractError};
pub use restrict::{restrict, EdgeView};
pub use search::{compile, CompileResult, CompileStats, Outcome, SearchParams, TryOutcome, TryStats};

use sat::{satisfies, Budget, SolveResult, Solver, SolverStats};
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error(transparent)]
    Extract(#[from] ExtractError),
    #[error("internal error: {0}")]
    Internal(String),
}

/// Solves `cnf` within `budget`. A returned model has been checked against
/// every clause.
pub fn solve(cnf: &CnfInstance, budget: &Budget) -> Result<(SolveResult, SolverStats), CompileError> {
    let mut s = Solver::new(cnf.var_count as usize);
    for c in &cnf.clauses {
        if !s.add_clause(c) {
            break;
        }
    }
    let r = s.solve(budget);
    if let SolveResult::Sat(m) = &r {
        if !satisfies(&cnf.clauses, m) {
            return Err(CompileError::Internal("solver model violates a clause".into()));
        }
    }
    Ok((r, s.stats()))
}
