// SPDX-License-Identifier: Apache-2.0

use std::path::Path;
use std::process::{Command, Output};

use rppp::ir::{store_program, Opcode, ProgramBuilder};

fn rppp(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rppp")).current_dir(dir).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn flex_compile_check_end_to_end() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(code(&rppp(p, &["gen-arch", "flex", "--stages", "5", "--alus", "8", "-o", "a.pl"])), 0);
    let c = rppp(p, &["compile", "-p", "builtin:nat", "-a", "a.pl", "-o", "cfg", "--report", "r.json"]);
    assert_eq!(code(&c), 0, "{}", String::from_utf8_lossy(&c.stderr));
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("r.json")).unwrap()).unwrap();
    assert_eq!(report["outcome"], "feasible");
    let chk = rppp(p, &["check", "-p", "builtin:nat", "-a", "a.pl", "-c", "cfg", "--random", "200"]);
    assert_eq!(code(&chk), 0);
    assert!(stdout(&chk).contains("mismatches: 0"));
}

#[test]
fn mul_program_is_infeasible_without_mul() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    // out[0..4] = le32(in[0..4]) * le32(in[4..8]); other bytes unchanged
    let mut b = ProgramBuilder::new();
    let (pre, len) = b.packet_in(64);
    let bytes: Vec<_> = (0..64).map(|i| b.slice(pre, 8 * i, 8)).collect();
    let halves: Vec<_> = (0..4).map(|i| b.merge(&bytes[2 * i..2 * i + 2])).collect();
    let x = b.merge(&halves[0..2]);
    let y = b.merge(&halves[2..4]);
    let m = b.binary(Opcode::Mul, x, y);
    let mut out: Vec<_> = (0..4).map(|i| b.slice(m, 8 * i, 8)).collect();
    out.extend_from_slice(&bytes[4..]);
    let out = b.merge(&out);
    let cmd = b.constant(2, 0);
    b.packet_out(64, cmd, out, len);
    std::fs::write(p.join("mul.pp"), store_program(&b.build())).unwrap();
    assert_eq!(code(&rppp(p, &["gen-arch", "flex", "--stages", "2", "--alus", "2", "-o", "a.pl"])), 0);
    let o = rppp(p, &["compile", "-p", "mul.pp", "-a", "a.pl", "-o", "cfg"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible (unrestricted UNSAT)"));
    assert!(!p.join("cfg").exists());

    // with MUL in the op set the same program maps
    let ops = "ADD,SUB,MUL,AND,OR,XOR,NOT,NEG,SHL,SHR,EQ,NEQ,LTU,LEU,LTS,LES,MUX";
    assert_eq!(code(&rppp(p, &["gen-arch", "flex", "--stages", "2", "--alus", "2", "--ops", ops, "-o", "m.pl"])), 0);
    assert_eq!(code(&rppp(p, &["compile", "-p", "mul.pp", "-a", "m.pl", "-o", "cfg"])), 0);
}

#[test]
fn stats_reports_alu_count() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(code(&rppp(p, &["gen-arch", "flex", "--stages", "3", "--alus", "100", "-o", "f.pl"])), 0);
    let o = rppp(p, &["stats", "f.pl"]);
    let row: Vec<String> = stdout(&o).lines().nth(1).unwrap().split('\t').map(String::from).collect();
    assert_eq!(row[0], "300");
}

#[test]
fn fixedgen_sim_elaborate() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let o = rppp(p, &["fixedgen", "-p", "builtin:memcached_rx", "-o", "f.pl", "-c", "f.cfg", "--report"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("ALUs\t"));
    let chk = rppp(p, &["check", "-p", "builtin:memcached_rx", "-a", "f.pl", "-c", "f.cfg", "--random", "100"]);
    assert_eq!(code(&chk), 0);

    let a = rppp(p, &["sim", "--proto", "builtin:memcached_rx", "--random", "20", "--pkt-seed", "4"]);
    let b = rppp(p, &["sim", "--proto", "builtin:memcached_rx", "--random", "20", "--pkt-seed", "4"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(stdout(&a).lines().count(), 20);

    let e = rppp(p, &["elaborate", "-a", "f.pl", "-o", "n.json", "--cost", "--map", "m.json"]);
    assert_eq!(code(&e), 0);
    assert!(stdout(&e).contains("total area"));
    let first = std::fs::read(p.join("n.json")).unwrap();
    rppp(p, &["elaborate", "-a", "f.pl", "-o", "n.json"]);
    assert_eq!(first, std::fs::read(p.join("n.json")).unwrap());
}

#[test]
fn trace_input_and_bitstream() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    rppp::cli::write_trace(&p.join("t.hex"), &rppp::frontend::traffic::random_packets(1, 5)).unwrap();
    assert_eq!(code(&rppp(p, &["gen-arch", "flex", "--stages", "5", "--alus", "8", "-o", "a.pl"])), 0);
    assert_eq!(code(&rppp(p, &["compile", "-p", "builtin:nat", "-a", "a.pl", "-o", "cfg", "--seed", "3"])), 0);
    let proto = rppp(p, &["sim", "--proto", "builtin:nat", "--trace", "t.hex"]);
    let hw = rppp(p, &["sim", "--arch", "a.pl", "-c", "cfg", "--trace", "t.hex"]);
    assert_eq!(stdout(&proto).lines().count(), 5);
    assert_eq!(code(&hw), 0);
    assert_eq!(stdout(&hw).lines().count(), 5);
    let e = rppp(p, &["elaborate", "-a", "a.pl", "-o", "n.json", "-c", "cfg", "--bitstream", "b.hex", "--map", "m.json"]);
    assert_eq!(code(&e), 0);
    let words = std::fs::read_to_string(p.join("b.hex")).unwrap();
    let map: serde_json::Value = serde_json::from_slice(&std::fs::read(p.join("m.json")).unwrap()).unwrap();
    assert_eq!(words.lines().count(), map["entries"].as_array().unwrap().len());
}

#[test]
fn exit_codes_for_bad_input_and_timeouts() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(code(&rppp(p, &["stats", "missing.pl"])), 3);
    assert_eq!(code(&rppp(p, &["compile", "-p", "builtin:bogus", "-a", "x", "-o", "y"])), 3);
    assert_eq!(code(&rppp(p, &["frobnicate"])), 3);
    std::fs::write(p.join("bad.pl"), "{\"kind\": \"pipeline\", \"nodes\": [").unwrap();
    let o = rppp(p, &["stats", "bad.pl"]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line"));
    assert_eq!(code(&rppp(p, &["gen-arch", "flex", "--stages", "5", "--alus", "8", "-o", "a.pl"])), 0);
    let o = rppp(p, &["compile", "-p", "builtin:nat", "-a", "a.pl", "-o", "c", "--degree-limits", "1", "--max-tries", "2"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn worker_count_from_environment() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    assert_eq!(code(&rppp(p, &["gen-arch", "flex", "--stages", "5", "--alus", "8", "-o", "a.pl"])), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_rppp"))
        .current_dir(p)
        .env(rppp::cli::WORKERS_ENV, "3")
        .args(["compile", "-p", "builtin:nat", "-a", "a.pl", "-o", "cfg"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    let o = Command::new(env!("CARGO_BIN_EXE_rppp"))
        .current_dir(p)
        .env(rppp::cli::WORKERS_ENV, "many")
        .args(["compile", "-p", "builtin:nat", "-a", "a.pl", "-o", "cfg"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 3);
}
