//! `dialplan` command line.
//!
//! Exit codes: 0 success, 1 failure, 2 usage error, 3 unsolvable,
//! 4 invalid input / invalid plan / divergent trace. On failure a single
//! JSON object `{"error": {"code", "message", "details"?}}` goes to stderr.

mod chat;
mod input;
pub mod scale;

use std::fs;
use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use dialplan_core::compiler::{compile, CompileError};
use dialplan_core::pddl::{print_domain, print_problem};
use dialplan_core::planner::{solve_with, validate_plan, Controller, PlanError, PlanOptions};
use dialplan_core::session::{build_engine, BuildError};
use dialplan_core::spec::has_errors;
use dialplan_core::trace::{read_trace, replay, ReplayMode};
use dialplan_sim::{bench, fixtures as trees, histogram, run_bench, StrategyKind};

pub use input::{builtin, BUILTINS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_UNSOLVABLE: i32 = 3;
pub const EXIT_INVALID: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "dialplan", version, about = "Compile, plan, run and inspect declarative dialogue agents")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check an agent spec and list diagnostics.
    Validate {
        /// Spec file, or `builtin:<name>`.
        spec: String,
        #[arg(long)]
        json: bool,
    },
    /// Write domain.pddl, problem.pddl and manifest.json for an agent spec.
    Compile {
        spec: String,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Synthesize a controller.
    Plan {
        #[command(flatten)]
        model: ModelArgs,
        /// Where to write the controller JSON.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = PlanOptions::default().state_cap)]
        state_cap: usize,
        #[arg(long)]
        json: bool,
    },
    /// Validate a controller against its model.
    CheckPlan {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(short, long)]
        controller: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Talk to an agent in the terminal.
    Chat {
        spec: String,
        /// Read user turns from this file, one per line, instead of stdin.
        #[arg(long)]
        script: Option<PathBuf>,
        /// Append each step to this JSONL trace log.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Print node transitions and outcomes.
        #[arg(short, long)]
        verbose: bool,
    },
    /// Re-execute a trace log and check it against the controller.
    Replay {
        spec: String,
        trace: PathBuf,
        /// Re-run determiners on the logged payloads instead of trusting logged outcomes.
        #[arg(long)]
        redetermine: bool,
        #[arg(long)]
        json: bool,
    },
    /// Simulate determination latency for the four strategies.
    Bench {
        /// Bundled tree: flat, deep-chain or general.
        #[arg(long, default_value = "general", conflicts_with = "tree_file")]
        tree: String,
        /// Effect tree JSON file.
        #[arg(long)]
        tree_file: Option<PathBuf>,
        #[arg(long, default_value_t = bench::DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = bench::BINS)]
        bins: usize,
        /// Directory for samples.csv, histogram.csv and summary.json.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Compile and solve the car inspection agent with 1 to 4 parts.
    ScaleUp {
        /// Directory for scale_up.csv and scale_up.json.
        #[arg(short, long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Run the HTTP/WebSocket gateway.
    Serve {
        /// `id=spec`; repeatable. Defaults to every bundled agent.
        #[arg(long = "agent")]
        agents: Vec<String>,
        #[arg(long, default_value = "127.0.0.1:8080")]
        bind: SocketAddr,
        /// Allowed CORS origin; any origin when omitted.
        #[arg(long)]
        cors_origin: Option<String>,
    },
}

/// A planning model given either as an agent spec or as PDDL files.
#[derive(Debug, Args)]
pub struct ModelArgs {
    #[arg(long, conflicts_with_all = ["domain", "problem"], required_unless_present = "domain")]
    pub spec: Option<String>,
    #[arg(long, requires = "problem")]
    pub domain: Option<PathBuf>,
    #[arg(long, requires = "domain")]
    pub problem: Option<PathBuf>,
}

/// A failed command: exit code plus the stderr diagnostic.
#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub exit: i32,
    pub code: &'static str,
    pub message: String,
    pub details: Option<Value>,
}

impl Failure {
    pub fn new(exit: i32, code: &'static str, message: impl Into<String>) -> Self {
        Failure { exit, code, message: message.into(), details: None }
    }

    pub fn error(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(EXIT_FAILURE, code, message)
    }

    pub fn invalid(code: &'static str, message: impl Into<String>) -> Self {
        Self::new(EXIT_INVALID, code, message)
    }

    pub fn with_details(mut self, v: Value) -> Self {
        self.details = Some(v);
        self
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self::error("io", format!("{}: {e}", path.display()))
    }

    pub fn to_json(&self) -> Value {
        let mut e = json!({ "code": self.code, "message": self.message });
        if let Some(d) = &self.details {
            e["details"] = d.clone();
        }
        json!({ "error": e })
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::Unsolvable => Failure::new(EXIT_UNSOLVABLE, "unsolvable", "unsolvable"),
            PlanError::StateLimit(_) => Failure::error("state-limit", e.to_string()),
            other => Failure::invalid("model", other.to_string()),
        }
    }
}

impl From<CompileError> for Failure {
    fn from(e: CompileError) -> Self {
        match &e {
            CompileError::Invalid(d) => Failure::invalid("invalid-spec", e.to_string()).with_details(json!(d)),
            CompileError::Collision(_) => Failure::invalid("invalid-spec", e.to_string()),
        }
    }
}

impl From<BuildError> for Failure {
    fn from(e: BuildError) -> Self {
        match e {
            BuildError::Compile(c) => c.into(),
            BuildError::Plan(p) => p.into(),
            other => Failure::invalid("build", other.to_string()),
        }
    }
}

/// Terminal streams for one invocation.
pub struct Io<'a> {
    pub input: &'a mut dyn BufRead,
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, io: Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let target: &mut dyn Write = if e.use_stderr() { io.err } else { io.out };
            let _ = write!(target, "{}", e.render());
            return code;
        }
    };
    let Io { input, out, err } = io;
    match execute(cli.command, input, out) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "{}", f.to_json());
            f.exit
        }
    }
}

fn execute(cmd: Command, input: &mut dyn BufRead, out: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Validate { spec, json } => validate(&spec, json, out),
        Command::Compile { spec, out: dir } => compile_to(&spec, &dir, out),
        Command::Plan { model, out: file, state_cap, json } => plan(&model, file.as_deref(), state_cap, json, out),
        Command::CheckPlan { model, controller, json } => check_plan(&model, &controller, json, out),
        Command::Chat { spec, script, trace, verbose } => {
            chat::chat(&spec, script.as_deref(), trace.as_deref(), verbose, input, out)
        }
        Command::Replay { spec, trace, redetermine, json } => replay_log(&spec, &trace, redetermine, json, out),
        Command::Bench { tree, tree_file, trials, seed, bins, out: dir, json } => {
            bench_cmd(&tree, tree_file.as_deref(), trials, seed, bins, dir.as_deref(), json, out)
        }
        Command::ScaleUp { out: dir, json } => scale_up(dir.as_deref(), json, out),
        Command::Serve { agents, bind, cors_origin } => serve(&agents, bind, cors_origin.as_deref(), out),
    }
}

fn emit(out: &mut dyn Write, text: impl std::fmt::Display) -> Result<(), Failure> {
    writeln!(out, "{text}").map_err(|e| Failure::error("io", e.to_string()))
}

fn emit_json(out: &mut dyn Write, v: &Value) -> Result<(), Failure> {
    emit(out, serde_json::to_string_pretty(v).expect("json values serialize"))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::io(path, e))
}

fn validate(spec: &str, as_json: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let s = input::load_spec_arg(spec)?;
    let diags = s.validate();
    if as_json {
        emit_json(out, &json!(diags))?;
    } else if diags.is_empty() {
        emit(out, format!("{}: ok", s.name))?;
    } else {
        for d in &diags {
            emit(out, d)?;
        }
    }
    if has_errors(&diags) {
        let n = diags.iter().filter(|d| d.severity == dialplan_core::spec::Severity::Error).count();
        return Err(Failure::invalid("invalid-spec", format!("{n} error(s)")).with_details(json!(diags)));
    }
    Ok(())
}

fn compile_to(spec: &str, dir: &Path, out: &mut dyn Write) -> Result<(), Failure> {
    let s = input::load_spec_arg(spec)?;
    let c = compile(&s)?;
    c.manifest.check(&c.domain).map_err(|e| Failure::invalid("manifest", e.to_string()))?;
    fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
    let manifest = serde_json::to_string_pretty(&c.manifest).expect("manifest serializes");
    for (name, body) in
        [("domain.pddl", print_domain(&c.domain)), ("problem.pddl", print_problem(&c.problem)), ("manifest.json", manifest)]
    {
        let path = dir.join(name);
        write_file(&path, body.as_bytes())?;
        emit(out, format!("wrote {}", path.display()))?;
    }
    Ok(())
}

fn plan(model: &ModelArgs, file: Option<&Path>, state_cap: usize, as_json: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let (d, p) = input::load_model(model)?;
    let t = Instant::now();
    let c = solve_with(&d, &p, PlanOptions { state_cap })?;
    let secs = t.elapsed().as_secs_f64();
    if let Some(path) = file {
        let text = serde_json::to_string_pretty(&c).expect("controller serializes");
        write_file(path, text.as_bytes())?;
    }
    let report = json!({
        "nodes": c.nodes.len(),
        "edges": c.edge_count(),
        "solve_secs_wallclock": secs,
        "controller": file.map(|p| p.display().to_string()),
    });
    if as_json {
        emit_json(out, &report)
    } else {
        emit(out, format!("nodes: {}\nedges: {}\nsolve time: {secs:.4} s (wall-clock)", c.nodes.len(), c.edge_count()))
    }
}

fn check_plan(model: &ModelArgs, controller: &Path, as_json: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let (d, p) = input::load_model(model)?;
    let text = fs::read_to_string(controller).map_err(|e| Failure::io(controller, e))?;
    let c: Controller =
        serde_json::from_str(&text).map_err(|e| Failure::invalid("controller", format!("{}: {e}", controller.display())))?;
    let v = validate_plan(&d, &p, &c);
    if as_json {
        emit_json(out, &json!(v))?;
    } else if v.valid {
        emit(out, format!("valid ({} node/state pairs visited)", v.visited))?;
    } else {
        for f in &v.failures {
            emit(out, f)?;
        }
    }
    if !v.valid {
        return Err(Failure::invalid("invalid-plan", format!("{} failure(s)", v.failures.len())).with_details(json!(v.failures)));
    }
    Ok(())
}

fn replay_log(spec: &str, trace: &Path, redetermine: bool, as_json: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let engine = build_engine(&input::load_spec_arg(spec)?)?;
    let f = fs::File::open(trace).map_err(|e| Failure::io(trace, e))?;
    let records = read_trace(std::io::BufReader::new(f)).map_err(|e| Failure::invalid("trace", e.to_string()))?;
    let mode = if redetermine { ReplayMode::Redetermine } else { ReplayMode::Recorded };
    let r = replay(&engine, &records, mode);
    let verdict = if r.consistent { "consistent" } else { "divergent" };
    if as_json {
        emit_json(
            out,
            &json!({ "verdict": verdict, "steps": r.steps, "records": records.len(), "divergences": r.divergences, "path": r.path }),
        )?;
    } else {
        emit(out, format!("verdict: {verdict}\nsteps: {} of {}\ndivergences: {}", r.steps, records.len(), r.divergences.len()))?;
        for d in &r.divergences {
            emit(out, format!("  step {}: {}", d.step, d.message))?;
        }
    }
    if !r.consistent {
        return Err(Failure::invalid("divergent-trace", format!("{} divergence(s)", r.divergences.len()))
            .with_details(json!(r.divergences)));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn bench_cmd(
    tree: &str,
    tree_file: Option<&Path>,
    trials: usize,
    seed: u64,
    bins: usize,
    dir: Option<&Path>,
    as_json: bool,
    out: &mut dyn Write,
) -> Result<(), Failure> {
    if trials == 0 || bins == 0 {
        return Err(Failure::new(EXIT_USAGE, "usage", "--trials and --bins must be positive"));
    }
    let (label, effect) = match tree_file {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::io(p, e))?;
            let e = trees::load(&text).map_err(|e| Failure::invalid("tree", format!("{}: {e}", p.display())))?;
            (p.display().to_string(), e)
        }
        None => {
            let e = trees::named(tree).ok_or_else(|| {
                Failure::new(EXIT_USAGE, "usage", format!("unknown tree {tree}; bundled: {}", trees::NAMES.join(", ")))
            })?;
            (tree.to_string(), e)
        }
    };
    let r = run_bench(&effect, trials, seed);
    let stats: Vec<Value> = StrategyKind::ALL
        .iter()
        .map(|&k| {
            let v = &r.samples[&k];
            let min = v.iter().copied().fold(f64::INFINITY, f64::min);
            let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            json!({ "strategy": k, "mean": r.mean(k), "min": min, "max": max })
        })
        .collect();
    let summary = json!({ "tree": label, "trials": trials, "seed": seed, "strategies": stats });
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        let mut buf = Vec::new();
        r.write_samples_csv(&mut buf).map_err(|e| Failure::error("io", e.to_string()))?;
        write_file(&dir.join("samples.csv"), &buf)?;
        let mut buf = Vec::new();
        histogram(&r, bins).write_csv(&mut buf).map_err(|e| Failure::error("io", e.to_string()))?;
        write_file(&dir.join("histogram.csv"), &buf)?;
        write_file(&dir.join("summary.json"), serde_json::to_string_pretty(&summary).expect("json").as_bytes())?;
    }
    if as_json {
        return emit_json(out, &summary);
    }
    emit(out, format!("tree {label}, {trials} trials, seed {seed}"))?;
    emit(out, format!("{:<18} {:>10} {:>10} {:>10}", "strategy", "mean", "min", "max"))?;
    for s in &stats {
        emit(
            out,
            format!(
                "{:<18} {:>10.4} {:>10.4} {:>10.4}",
                s["strategy"].as_str().unwrap_or_default(),
                s["mean"].as_f64().unwrap_or_default(),
                s["min"].as_f64().unwrap_or_default(),
                s["max"].as_f64().unwrap_or_default()
            ),
        )?;
    }
    Ok(())
}

fn scale_up(dir: Option<&Path>, as_json: bool, out: &mut dyn Write) -> Result<(), Failure> {
    let rows = scale::scale_up()?;
    if let Some(dir) = dir {
        fs::create_dir_all(dir).map_err(|e| Failure::io(dir, e))?;
        let mut buf = Vec::new();
        scale::write_csv(&rows, &mut buf).map_err(|e| Failure::error("io", e.to_string()))?;
        write_file(&dir.join("scale_up.csv"), &buf)?;
        write_file(&dir.join("scale_up.json"), serde_json::to_string_pretty(&rows).expect("json").as_bytes())?;
    }
    if as_json {
        emit_json(out, &json!(rows))?;
    } else {
        scale::write_table(&rows, out).map_err(|e| Failure::error("io", e.to_string()))?;
    }
    if let Some(r) = rows.iter().find(|r| !r.valid) {
        return Err(Failure::invalid("invalid-plan", format!("{} parts: controller fails validation", r.parts)));
    }
    Ok(())
}

fn serve(agents: &[String], bind: SocketAddr, origin: Option<&str>, out: &mut dyn Write) -> Result<(), Failure> {
    let named: Vec<(String, String)> = if agents.is_empty() {
        BUILTINS.iter().map(|n| (n.to_string(), format!("builtin:{n}"))).collect()
    } else {
        agents
            .iter()
            .map(|a| {
                a.split_once('=')
                    .map(|(id, s)| (id.to_string(), s.to_string()))
                    .ok_or_else(|| Failure::new(EXIT_USAGE, "usage", format!("--agent expects id=spec, got {a}")))
            })
            .collect::<Result<_, _>>()?
    };
    let mut engines = Vec::new();
    for (id, spec) in named {
        engines.push((id, build_engine(&input::load_spec_arg(&spec)?)?));
    }
    let origin = origin
        .map(|o| dialplan_gateway::HeaderValue::from_str(o).map_err(|e| Failure::new(EXIT_USAGE, "usage", e.to_string())))
        .transpose()?;
    emit(out, format!("listening on http://{bind}/api/v1 ({} agents)", engines.len()))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| Failure::error("runtime", e.to_string()))?;
    rt.block_on(dialplan_gateway::serve(dialplan_gateway::AppState::new(engines), bind, origin))
        .map_err(|e| Failure::error("serve", e.to_string()))
}
