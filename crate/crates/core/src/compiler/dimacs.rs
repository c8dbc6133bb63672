// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write;

use super::encode::CnfInstance;

/// DIMACS CNF text of `cnf`.
pub fn export_dimacs(cnf: &CnfInstance) -> String {
    let mut out = String::with_capacity(cnf.clauses.len() * 12);
    writeln!(out, "p cnf {} {}", cnf.var_count, cnf.clauses.len()).unwrap();
    for c in &cnf.clauses {
        for x in c {
            write!(out, "{x} ").unwrap();
        }
        out.push_str("0\n");
    }
    out
}

/// Sidecar for [`export_dimacs`]: one `var literal` line per variable.
pub fn literal_names(cnf: &CnfInstance) -> String {
    let mut out = String::new();
    for (v, lit) in cnf.litmap.iter() {
        writeln!(out, "{v} {lit}").unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::encode::Literal;

    #[test]
    fn grammar() {
        let mut cnf = CnfInstance::default();
        cnf.litmap.var(Literal::Aux(0));
        cnf.litmap.var(Literal::Pick { router: 3, input: 1 });
        cnf.var_count = 2;
        cnf.clauses.push(vec![1, -2]);
        assert_eq!(export_dimacs(&cnf), "p cnf 2 1\n1 -2 0\n");
        assert_eq!(literal_names(&cnf), "1 AUX(0)\n2 PICK(3,1)\n");
        cnf.clauses.clear();
        assert_eq!(export_dimacs(&cnf), "p cnf 2 0\n");
    }
}
