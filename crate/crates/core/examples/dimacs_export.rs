// SPDX-License-Identifier: Apache-2.0

//! Encodes one mapping problem under a restricted edge view, prints the
//! clause census per constraint family and writes the CNF plus its variable
//! names to a directory for use with an external solver.
//!
//! `cargo run --example dimacs_export -- [out_dir]`

use std::path::PathBuf;

use rppp::compiler::{encode, export_dimacs, literal_names, restrict, EncodeOptions};
use rppp::frontend::{builtin_program, gen_flex_arch, normalize_program, FlexParams};

fn main() {
    let dir = std::env::args().nth(1).map(PathBuf::from).unwrap_or_else(std::env::temp_dir);
    let arch = gen_flex_arch(&FlexParams::new(5, 8)).expect("flex parameters");
    let program = builtin_program("nat").expect("builtin");
    let program = normalize_program(&program, arch.prefix_len().expect("packet input"))
        .expect("normalize");

    for limit in [2, 0] {
        let view = restrict(&arch, limit, 7);
        let cnf = encode(&program, &arch, &view, &EncodeOptions::default()).expect("encode");
        println!("degree limit {limit}: {} vars, {} clauses, {} edges", cnf.var_count, cnf.clauses.len(), view.edge_count(&arch));
        for (family, n) in &cnf.census {
            println!("  {:20} {n}", family.name());
        }
        let stem = dir.join(format!("nat_d{limit}"));
        std::fs::write(stem.with_extension("cnf"), export_dimacs(&cnf)).expect("write cnf");
        std::fs::write(stem.with_extension("vars"), literal_names(&cnf)).expect("write vars");
        println!("  wrote {}", stem.with_extension("cnf").display());
    }
}
