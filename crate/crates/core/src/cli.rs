// SPDX-License-Identifier: Apache-2.0

//! Command-line driver. Every subcommand is batch-only and deterministic
//! given its seeds.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::{Args, Parser, Subcommand};

use crate::compiler::{
    compile, encode, export_dimacs, literal_names, restrict, CompileError, EncodeOptions, Outcome, SearchParams,
};
use crate::fixedgen::{generate_fixed, FixedGenOptions};
use crate::frontend::traffic::{builtin_state, directed_packets, random_packets};
use crate::frontend::{builtin_program, gen_flex_arch, normalize_program, FlexParams, BUILTIN_NAMES};
use crate::hwgen::{config_bitstream, elaborate, estimate_cost, format_bitstream, ConfigMap};
use crate::ir::{
    census, load_artifact, store_config, store_pipeline, validate_pipeline, validate_protocol, Artifact,
    ArtifactKind, Opcode, PipelineArch, ProtocolProgram, RuntimeConfig,
};
use crate::sim::{check_equivalence, format_trace, parse_trace, Executor, PacketResult, StateStore};

/// Environment variable holding the default `compile --workers`.
pub const WORKERS_ENV: &str = "RPPP_WORKERS";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExitStatus {
    Success = 0,
    Infeasible = 1,
    Unknown = 2,
    InputError = 3,
    Internal = 4,
}

impl ExitStatus {
    pub fn code(self) -> i32 {
        self as i32
    }
}

#[derive(Parser, Debug)]
#[command(name = "rppp", version, about = "Compile packet-processing programs onto reconfigurable pipelines")]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Map a program onto an architecture and write the runtime config.
    Compile(CompileArgs),
    /// Generate a fixed-function pipeline from a program.
    Fixedgen(FixedgenArgs),
    /// Run packets through a program or a configured pipeline.
    Sim(SimArgs),
    /// Compare a configured pipeline against its program.
    Check(CheckArgs),
    /// Generate a parametric architecture.
    GenArch(GenArchArgs),
    /// Print the node census of an artifact.
    Stats { artifact: String },
    /// Elaborate an architecture into a structural netlist.
    Elaborate(ElaborateArgs),
}

#[derive(Args, Debug)]
struct CompileArgs {
    #[arg(short = 'p', long = "program")]
    program: String,
    #[arg(short = 'a', long = "arch")]
    arch: String,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
    /// Comma-separated schedule; 0 is unrestricted.
    #[arg(long, value_delimiter = ',')]
    degree_limits: Option<Vec<u32>>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    workers: Option<usize>,
    /// Total budget in seconds.
    #[arg(long)]
    timeout: Option<f64>,
    #[arg(long, default_value_t = 60.0)]
    per_try_timeout: f64,
    #[arg(long)]
    max_tries: Option<usize>,
    /// Write one DIMACS instance (plus literal names) per scheduled limit.
    #[arg(long)]
    dimacs: Option<PathBuf>,
    /// Write the per-try search report as JSON.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct FixedgenArgs {
    #[arg(short = 'p', long = "program")]
    program: String,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
    /// Also write the runtime config (memory bindings only).
    #[arg(short = 'c', long = "config")]
    config: Option<PathBuf>,
    /// Print the node census of the generated pipeline.
    #[arg(long)]
    report: bool,
    #[arg(long, default_value_t = 1)]
    alu_latency: u32,
    #[arg(long, default_value_t = 1)]
    ram_latency: u32,
    #[arg(long, default_value_t = 1)]
    cam_latency: u32,
}

#[derive(Args, Debug)]
struct Packets {
    /// Hex trace file, one packet per line.
    #[arg(long, conflicts_with = "random")]
    trace: Option<PathBuf>,
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pkt_seed: u64,
    /// Initial state document.
    #[arg(long)]
    state: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, conflicts_with_all = ["arch", "config"], required_unless_present = "arch")]
    proto: Option<String>,
    #[arg(long, requires = "config")]
    arch: Option<String>,
    #[arg(short = 'c', long = "config")]
    config: Option<PathBuf>,
    #[command(flatten)]
    packets: Packets,
    /// Write the final state document here.
    #[arg(long)]
    state_out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct CheckArgs {
    #[arg(short = 'p', long = "program")]
    program: String,
    #[arg(short = 'a', long = "arch")]
    arch: String,
    #[arg(short = 'c', long = "config")]
    config: PathBuf,
    #[command(flatten)]
    packets: Packets,
}

#[derive(Args, Debug)]
struct GenArchArgs {
    /// Architecture family; only `flex`.
    family: String,
    #[arg(long)]
    stages: Option<u32>,
    #[arg(long)]
    alus: Option<u32>,
    /// Comma-separated opcode list.
    #[arg(long, value_delimiter = ',')]
    ops: Option<Vec<String>>,
    #[arg(long)]
    alu_latency: Option<u32>,
    #[arg(long)]
    alu_width: Option<u32>,
    #[arg(long)]
    consts: Option<u32>,
    #[arg(long)]
    prefix_len: Option<u32>,
    /// Full generator parameters as JSON; flags override fields.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
}

#[derive(Args, Debug)]
struct ElaborateArgs {
    #[arg(short = 'a', long = "arch")]
    arch: String,
    #[arg(short = 'o', long = "output")]
    output: PathBuf,
    /// Print the area and depth estimate.
    #[arg(long)]
    cost: bool,
    /// Write the configuration address map.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Runtime config to encode with `--bitstream`.
    #[arg(short = 'c', long = "config", requires = "bitstream")]
    config: Option<PathBuf>,
    #[arg(long, requires = "config")]
    bitstream: Option<PathBuf>,
}

struct Fail(ExitStatus, String);

type Res = Result<ExitStatus, Fail>;

fn input(msg: impl std::fmt::Display) -> Fail {
    Fail(ExitStatus::InputError, msg.to_string())
}

fn internal(msg: impl std::fmt::Display) -> Fail {
    Fail(ExitStatus::Internal, msg.to_string())
}

fn read(path: &Path) -> Result<Vec<u8>, Fail> {
    fs::read(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, data: impl AsRef<[u8]>) -> Result<(), Fail> {
    fs::write(path, data).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn builtin_name(spec: &str) -> Option<&str> {
    spec.strip_prefix("builtin:")
}

fn load_program(spec: &str) -> Result<ProtocolProgram, Fail> {
    let p = match builtin_name(spec) {
        Some(name) => builtin_program(name)
            .ok_or_else(|| input(format!("unknown builtin {name:?}; known: {}", BUILTIN_NAMES.join(", "))))?,
        None => load_artifact(&read(Path::new(spec))?, Some(ArtifactKind::Protocol))
            .map_err(|e| input(format!("{spec}: {e}")))?
            .into_protocol()
            .expect("kind checked"),
    };
    let v = validate_protocol(&p);
    if !v.ok {
        return Err(input(format!("{spec}: invalid program\n{v}")));
    }
    Ok(p)
}

fn load_arch(spec: &str) -> Result<PipelineArch, Fail> {
    let a = load_artifact(&read(Path::new(spec))?, Some(ArtifactKind::Pipeline))
        .map_err(|e| input(format!("{spec}: {e}")))?
        .into_pipeline()
        .expect("kind checked");
    let v = validate_pipeline(&a);
    if !v.ok {
        return Err(input(format!("{spec}: invalid architecture\n{v}")));
    }
    Ok(a)
}

fn load_config(path: &Path) -> Result<RuntimeConfig, Fail> {
    Ok(load_artifact(&read(path)?, Some(ArtifactKind::Config))
        .map_err(|e| input(format!("{}: {e}", path.display())))?
        .into_config()
        .expect("kind checked"))
}

fn packets(p: &Packets) -> Result<Vec<Vec<u8>>, Fail> {
    match (&p.trace, p.random) {
        (Some(path), _) => {
            let text = String::from_utf8(read(path)?).map_err(|_| input("trace is not UTF-8"))?;
            parse_trace(&text).map_err(|e| input(format!("{}:{}: {}", path.display(), e.line, e.message)))
        }
        (None, Some(n)) => Ok(random_packets(p.pkt_seed, n)),
        (None, None) => Err(input("one of --trace or --random is required")),
    }
}

/// Initial program state: the state file if given, else the bundled table
/// contents of a builtin.
fn program_state(program: &ProtocolProgram, spec: &str, file: Option<&Path>) -> Result<StateStore, Fail> {
    let mut s = StateStore::for_program(program);
    match (file, builtin_name(spec)) {
        (Some(path), _) => s.preload(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?,
        (None, Some(name)) => builtin_state(name, &mut s),
        (None, None) => {}
    }
    Ok(s)
}

/// Prints to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    use std::io::Write;
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn seconds(s: f64) -> Result<Duration, Fail> {
    Duration::try_from_secs_f64(s).map_err(|_| input(format!("bad duration {s}")))
}

fn cmd_compile(a: &CompileArgs) -> Res {
    let program = load_program(&a.program)?;
    let arch = load_arch(&a.arch)?;
    let workers = match a.workers {
        Some(w) => w,
        None => match std::env::var(WORKERS_ENV) {
            Ok(v) => v.parse().map_err(|_| input(format!("{WORKERS_ENV}={v:?} is not a count")))?,
            Err(_) => 1,
        },
    };
    let mut params = SearchParams {
        seed: a.seed,
        workers: workers.max(1),
        per_try_timeout: Some(seconds(a.per_try_timeout)?),
        total_timeout: a.timeout.map(seconds).transpose()?,
        max_tries: a.max_tries,
        ..SearchParams::default()
    };
    if let Some(d) = &a.degree_limits {
        params.degree_limits = d.clone();
    }
    if let Some(dir) = &a.dimacs {
        dump_dimacs(dir, &program, &arch, &params)?;
    }
    let result = compile(&program, &arch, &params).map_err(|e| match e {
        CompileError::Invalid(_) => input(&e),
        _ => internal(&e),
    })?;
    if let Some(path) = &a.report {
        write(path, result.report_json() + "\n")?;
    }
    let tries = result.stats.tries.len();
    let ms = result.stats.elapsed.as_millis();
    match result.outcome {
        Outcome::Feasible(cfg) => {
            write(&a.output, store_config(&cfg))?;
            eprintln!("feasible after {tries} tries in {ms} ms");
            Ok(ExitStatus::Success)
        }
        Outcome::Infeasible => Err(Fail(ExitStatus::Infeasible, "infeasible (unrestricted UNSAT)".into())),
        Outcome::Unknown => Err(Fail(ExitStatus::Unknown, format!("unknown: no verdict after {tries} tries in {ms} ms"))),
    }
}

fn dump_dimacs(dir: &Path, program: &ProtocolProgram, arch: &PipelineArch, params: &SearchParams) -> Result<(), Fail> {
    fs::create_dir_all(dir).map_err(|e| input(format!("{}: {e}", dir.display())))?;
    let target = arch.prefix_len().ok_or_else(|| input("architecture has no packet input"))?;
    let program = normalize_program(program, target).map_err(input)?;
    for i in 0..params.degree_limits.len() {
        let (d, seed) = params.try_plan(i);
        let cnf = match encode(&program, arch, &restrict(arch, d, seed), &EncodeOptions::default()) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("try {i} (degree limit {d}): {e}");
                continue;
            }
        };
        write(&dir.join(format!("try{i}_d{d}.cnf")), export_dimacs(&cnf))?;
        write(&dir.join(format!("try{i}_d{d}.vars")), literal_names(&cnf))?;
    }
    Ok(())
}

fn cmd_fixedgen(a: &FixedgenArgs) -> Res {
    let program = load_program(&a.program)?;
    let opts = FixedGenOptions {
        alu_latency: a.alu_latency,
        ram_latency: a.ram_latency,
        cam_latency: a.cam_latency,
        ..FixedGenOptions::default()
    };
    let r = generate_fixed(&program, &opts).map_err(input)?;
    write(&a.output, store_pipeline(&r.arch))?;
    if let Some(c) = &a.config {
        write(c, store_config(&r.config))?;
    }
    if a.report {
        emit(&r.report());
    }
    Ok(ExitStatus::Success)
}

fn cmd_sim(a: &SimArgs) -> Res {
    let pkts = packets(&a.packets)?;
    let (mut exec, mut state) = match (&a.proto, &a.arch, &a.config) {
        (Some(spec), _, _) => {
            let p = load_program(spec)?;
            let s = program_state(&p, spec, a.packets.state.as_deref())?;
            (Executor::for_program(&p).map_err(input)?, s)
        }
        (None, Some(spec), Some(cfg)) => {
            let arch = load_arch(spec)?;
            let cfg = load_config(cfg)?;
            let mut s = StateStore::for_arch(&arch);
            if let Some(path) = &a.packets.state {
                s.preload(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
            }
            (Executor::for_pipeline(&arch, &cfg).map_err(input)?, s)
        }
        _ => return Err(input("give --proto, or --arch with -c")),
    };
    let mut out = String::new();
    for (i, p) in pkts.iter().enumerate() {
        match exec.run(&mut state, p).map_err(|e| input(format!("packet {i}: {e}")))? {
            PacketResult::Forward(b) => out.push_str(&format!("{i} forward {}\n", hex::encode(b))),
            PacketResult::Drop => out.push_str(&format!("{i} drop\n")),
        }
    }
    emit(&out);
    if let Some(path) = &a.state_out {
        write(path, state.to_document())?;
    }
    Ok(ExitStatus::Success)
}

fn cmd_check(a: &CheckArgs) -> Res {
    let program = load_program(&a.program)?;
    let arch = load_arch(&a.arch)?;
    let cfg = load_config(&a.config)?;
    let mut pkts = packets(&a.packets)?;
    if let (Some(name), None) = (builtin_name(&a.program), &a.packets.trace) {
        pkts.extend(directed_packets(name));
    }
    let state = program_state(&program, &a.program, a.packets.state.as_deref())?;
    let target = arch.prefix_len().ok_or_else(|| input("architecture has no packet input"))?;
    let program = normalize_program(&program, target).map_err(input)?;
    let report = check_equivalence(&program, &arch, &cfg, &pkts, &state).map_err(input)?;
    emit(&report.to_string());
    if report.equivalent() {
        Ok(ExitStatus::Success)
    } else {
        Err(Fail(ExitStatus::Internal, "pipeline and program disagree".into()))
    }
}

fn cmd_gen_arch(a: &GenArchArgs) -> Res {
    if a.family != "flex" {
        return Err(input(format!("unknown architecture family {:?}", a.family)));
    }
    let mut p = match &a.params {
        Some(path) => {
            let text = String::from_utf8(read(path)?).map_err(|_| input("params are not UTF-8"))?;
            FlexParams::from_json(&text).map_err(input)?
        }
        None => {
            let (Some(m), Some(n)) = (a.stages, a.alus) else {
                return Err(input("--stages and --alus are required without --params"));
            };
            FlexParams::new(m, n)
        }
    };
    if let Some(m) = a.stages {
        p.stages = m;
    }
    if let Some(n) = a.alus {
        p.alus_per_stage = n;
    }
    if let Some(ops) = &a.ops {
        p.ops = ops
            .iter()
            .map(|s| s.parse::<Opcode>().map_err(|_| input(format!("unknown opcode {s:?}"))))
            .collect::<Result<_, _>>()?;
    }
    if let Some(l) = a.alu_latency {
        p.alu_latency = l;
    }
    if let Some(w) = a.alu_width {
        p.alu_width = w;
    }
    if let Some(c) = a.consts {
        p.consts_per_stage = c;
    }
    if let Some(l) = a.prefix_len {
        p.prefix_len = l;
    }
    let arch = gen_flex_arch(&p).map_err(input)?;
    write(&a.output, store_pipeline(&arch))?;
    Ok(ExitStatus::Success)
}

fn cmd_stats(spec: &str) -> Res {
    let artifact = match builtin_name(spec) {
        Some(_) => Artifact::Protocol(load_program(spec)?),
        None => load_artifact(&read(Path::new(spec))?, None).map_err(|e| input(format!("{spec}: {e}")))?,
    };
    match (census(&artifact), &artifact) {
        (Some(c), _) => emit(&c.to_string()),
        (None, Artifact::Config(cfg)) => {
            emit(&format!(
                "router_select\t{}\nalu_op\t{}\nconst_value\t{}\narray_bind\t{}\ntable_bind\t{}\n",
                cfg.router_select.len(),
                cfg.alu_op.len(),
                cfg.const_value.len(),
                cfg.array_bind.len(),
                cfg.table_bind.len()
            ));
        }
        (None, _) => unreachable!("graph artifacts have a census"),
    }
    Ok(ExitStatus::Success)
}

fn cmd_elaborate(a: &ElaborateArgs) -> Res {
    let arch = load_arch(&a.arch)?;
    let nl = elaborate(&arch).map_err(internal)?;
    write(&a.output, nl.to_json())?;
    if let Some(path) = &a.map {
        write(path, ConfigMap::of(&nl).to_json() + "\n")?;
    }
    if let (Some(cfg), Some(out)) = (&a.config, &a.bitstream) {
        let words = config_bitstream(&nl, &load_config(cfg)?).map_err(input)?;
        write(out, format_bitstream(&words))?;
    }
    if a.cost {
        emit(&estimate_cost(&arch).to_string());
    }
    Ok(ExitStatus::Success)
}

/// Parses `argv` (program name first), runs the subcommand and reports
/// failures on standard error.
pub fn run_cli<I, T>(argv: I) -> ExitStatus
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::InputError } else { ExitStatus::Success };
        }
    };
    let r = match &cli.cmd {
        Command::Compile(a) => cmd_compile(a),
        Command::Fixedgen(a) => cmd_fixedgen(a),
        Command::Sim(a) => cmd_sim(a),
        Command::Check(a) => cmd_check(a),
        Command::GenArch(a) => cmd_gen_arch(a),
        Command::Stats { artifact } => cmd_stats(artifact),
        Command::Elaborate(a) => cmd_elaborate(a),
    };
    match r {
        Ok(s) => s,
        Err(Fail(s, msg)) => {
            eprintln!("rppp: {msg}");
            s
        }
    }
}

/// Writes packets as a trace file; the inverse of the `--trace` reader.
pub fn write_trace(path: &Path, packets: &[Vec<u8>]) -> std::io::Result<()> {
    fs::write(path, format_trace(packets))
}
