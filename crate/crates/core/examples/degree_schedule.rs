// SPDX-License-Identifier: Apache-2.0

//! Compares search schedules on the same problem. Tight degree limits give
//! small formulas that may be unsatisfiable only because of the restriction;
//! the unrestricted fallback is the only try that can prove infeasibility.

use rppp::compiler::{compile, Outcome, SearchParams};
use rppp::frontend::{builtin_program, gen_flex_arch, FlexParams};

fn main() {
    let program = builtin_program("nat").expect("builtin");
    let arch = gen_flex_arch(&FlexParams::new(5, 8)).expect("flex parameters");
    for limits in [vec![1, 0], vec![2, 4, 8, 0], vec![0], vec![1, 2]] {
        let params = SearchParams { degree_limits: limits.clone(), max_tries: Some(6), ..SearchParams::default() };
        let r = compile(&program, &arch, &params).expect("compile");
        let sizes: Vec<String> = r.stats.tries.iter().map(|t| format!("d{}:{}v/{:?}", t.degree_limit, t.vars, t.outcome)).collect();
        println!("{limits:?} -> {} in {:.2?} [{}]", verdict(&r.outcome), r.stats.elapsed, sizes.join(" "));
    }
}

fn verdict(o: &Outcome) -> &'static str {
    match o {
        Outcome::Feasible(_) => "feasible",
        Outcome::Infeasible => "infeasible",
        _ => "unknown",
    }
}
