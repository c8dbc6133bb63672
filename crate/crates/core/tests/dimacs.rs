// SPDX-License-Identifier: Apache-2.0

//! Exported CNF agrees with an independent SAT solver, and that solver's
//! models decode into working configurations.

mod common;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rppp::compiler::sat::Budget;
use rppp::compiler::{encode, export_dimacs, extract_config, literal_names, restrict, solve, EncodeOptions};
use rppp::compiler::sat::SolveResult;
use rppp::fixedgen::{generate_fixed, FixedGenOptions};
use rppp::frontend::traffic::random_packets;
use rppp::frontend::{builtin_program, normalize_program, BUILTIN_NAMES};
use rppp::ir::{PipelineArch, ProtocolProgram};
use rppp::sim::{check_equivalence, StateStore};

fn varisat_model(text: &str, vars: usize) -> Option<Vec<bool>> {
    let formula = varisat::dimacs::DimacsParser::parse(text.as_bytes()).expect("valid DIMACS");
    let mut s = varisat::Solver::new();
    s.add_formula(&formula);
    if !s.solve().unwrap() {
        return None;
    }
    let mut model = vec![false; vars];
    for l in s.model().unwrap() {
        if l.var().index() < vars {
            model[l.var().index()] = l.is_positive();
        }
    }
    Some(model)
}

fn cross_check(program: &ProtocolProgram, arch: &PipelineArch, options: &EncodeOptions) -> bool {
    let cnf = encode(program, arch, &restrict(arch, 0, 0), options).unwrap();
    let text = export_dimacs(&cnf);
    let header = text.lines().next().unwrap();
    assert_eq!(header, format!("p cnf {} {}", cnf.var_count, cnf.clauses.len()));
    assert_eq!(literal_names(&cnf).lines().count(), cnf.var_count as usize);
    let ours = solve(&cnf, &Budget::default()).unwrap().0;
    let theirs = varisat_model(&text, cnf.var_count as usize);
    assert_eq!(matches!(ours, SolveResult::Sat(_)), theirs.is_some());
    if let Some(model) = theirs {
        let cfg = extract_config(&model, &cnf, arch, program).expect("foreign model decodes");
        let pkts = random_packets(5, 100);
        let rep = check_equivalence(program, arch, &cfg, &pkts, &StateStore::for_program(program)).unwrap();
        assert!(rep.equivalent(), "{rep}");
    }
    matches!(ours, SolveResult::Sat(_))
}

#[test]
fn tiny_instances_agree_with_varisat() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut sat = 0;
    for i in 0..80 {
        let arch = common::tiny_arch(&mut rng);
        let program = common::tiny_program(&mut rng);
        let opts = if i % 2 == 0 { EncodeOptions::default() } else { EncodeOptions::literal() };
        sat += cross_check(&program, &arch, &opts) as usize;
    }
    assert!(sat > 5);
}

#[test]
fn fixed_builtins_agree_with_varisat() {
    for name in BUILTIN_NAMES {
        let program = builtin_program(name).unwrap();
        let fixed = generate_fixed(&program, &FixedGenOptions::default()).unwrap();
        let program = normalize_program(&program, fixed.arch.prefix_len().unwrap()).unwrap();
        // stateful programs are only compared on the verdict and decoding;
        // equivalence starts from empty tables
        assert!(cross_check(&program, &fixed.arch, &EncodeOptions::default()), "{name}");
    }
}
