//! The `tutharness` command line.
//!
//! Exit codes: 0 when every relevant check passes (or the command has no
//! verdict), 1 when a verdict is FAIL, 2 for usage, format and I/O errors.

use std::fmt;
use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analyzer::{analyze, annotate, Analysis};
use crate::ident::Ident;
use crate::model::{
    explore, flatten, generate_tests, model_coverage, parse_statechart, LtsBehavior, Lts,
    DEFAULT_TEST_TICK_PERIOD_MS,
};
use crate::report::{parse_results, render_html, render_junit, render_junit_suites, serialize_results, ReportBundle};
use crate::runtime::{
    behaviors::{EchoToCm, TimerHeartbeat},
    generate_environment, parse_interface, run_simulation, ChannelDecl, InterfaceSpec, RunConfig,
    TutBehavior, DEFAULT_LIVELOCK_CAP,
};
use crate::scenario::{parse_scenario, serialize_scenario, validate_scenario, Scenario};
use crate::trace::{parse_log, serialize_log, Direction, LogRecord, Stamp};
use crate::{ParseMode, TOOL_VERSION};

pub const EXIT_PASS: i32 = 0;
pub const EXIT_FAIL: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "tutharness", version, about = "Unit verification of message-passing tasks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario against a built-in behavior and write its .tutlog.
    Simulate(SimulateArgs),
    /// Check a .tutlog against a .tutsc and write results and reports.
    Analyze(AnalyzeArgs),
    /// Generate .tutsc files covering every transition of a .tutsm model.
    Testgen(TestgenArgs),
    /// Print the reachability report of a .tutsm model.
    Explore(ExploreArgs),
    /// Render reports from a .tutres results file.
    Report(ReportArgs),
    /// testgen, simulate against the model itself, and analyze, in one go.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BehaviorId {
    /// Copy every inbound message to the Common Memory slot of that name.
    EchoToCm,
    /// Emit a beat counter on each timer period.
    TimerHeartbeat,
    /// Execute the --model state chart.
    #[value(name = "model-as-implementation", alias = "model")]
    Model,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Html,
    Junit,
    Both,
}

impl Format {
    fn html(self) -> bool {
        matches!(self, Format::Html | Format::Both)
    }

    fn junit(self) -> bool {
        matches!(self, Format::Junit | Format::Both)
    }
}

#[derive(Debug, Args)]
pub struct RunOptions {
    /// Timer period in ms, overriding scenario and behavior.
    #[arg(long)]
    pub tick_period_ms: Option<u64>,
    /// Handler activations allowed within one tick.
    #[arg(long, default_value_t = DEFAULT_LIVELOCK_CAP)]
    pub livelock_cap: usize,
    /// TIME stamped on records, YYYY.MM.DD_HH:MM:SS; defaults to now.
    #[arg(long)]
    pub run_stamp: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub scenario: PathBuf,
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, value_enum)]
    pub behavior: BehaviorId,
    /// State chart for the model-as-implementation behavior.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[command(flatten)]
    pub run: RunOptions,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long)]
    pub log: PathBuf,
    #[arg(long)]
    pub scenario: PathBuf,
    /// Interface file; inferred from log and scenario when omitted.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Unexpected messages fail the verdict.
    #[arg(long)]
    pub strict: bool,
    /// Reject the whole log on the first malformed record.
    #[arg(long)]
    pub strict_log: bool,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct TestgenArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    /// Spacing between generated injections.
    #[arg(long, default_value_t = DEFAULT_TEST_TICK_PERIOD_MS)]
    pub tick_period_ms: u64,
}

#[derive(Debug, Args)]
pub struct ExploreArgs {
    #[arg(long)]
    pub model: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[arg(long)]
    pub results: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub model: PathBuf,
    #[arg(long)]
    pub spec: PathBuf,
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
    #[arg(long)]
    pub strict: bool,
    #[arg(long, value_enum, default_value_t = Format::Both)]
    pub format: Format,
    #[command(flatten)]
    pub run: RunOptions,
}

/// One-line diagnostic for exit code 2.
#[derive(Debug)]
pub struct CliError(String);

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for CliError {}

fn at(path: &Path, e: impl fmt::Display) -> CliError {
    CliError(format!("{}: {e}", path.display()))
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| at(path, e))
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> Result<(), CliError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir).map_err(|e| at(dir, e))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| at(dir, e))?;
    tmp.write_all(contents.as_bytes()).map_err(|e| at(path, e))?;
    tmp.persist(path).map_err(|e| at(path, e.error))?;
    Ok(())
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "out".into())
}

fn load_spec(path: &Path) -> Result<InterfaceSpec, CliError> {
    parse_interface(&read(path)?).map_err(|e| at(path, e))
}

fn load_scenario(path: &Path) -> Result<Scenario, CliError> {
    let parsed = parse_scenario(&read(path)?, ParseMode::Lenient).map_err(|e| at(path, e))?;
    for w in &parsed.warnings {
        eprintln!("warning: {}: {w} (sorted)", path.display());
    }
    Ok(parsed.scenario)
}

fn load_model(path: &Path) -> Result<Lts, CliError> {
    let chart = parse_statechart(&read(path)?).map_err(|e| at(path, e))?;
    flatten(&chart).map_err(|e| at(path, e))
}

fn run_stamp(opts: &RunOptions) -> Result<Stamp, CliError> {
    match &opts.run_stamp {
        None => Ok(Stamp::now()),
        Some(s) => s.parse().map_err(|e| CliError(format!("--run-stamp: {e}"))),
    }
}

fn run_config(opts: &RunOptions) -> Result<RunConfig, CliError> {
    Ok(RunConfig {
        run_stamp: run_stamp(opts)?,
        timer_period_ms: opts.tick_period_ms,
        livelock_cap: opts.livelock_cap,
    })
}

/// Instantiates a registered behavior.
pub fn build_behavior(
    id: BehaviorId,
    spec: &InterfaceSpec,
    model: Option<&Lts>,
) -> Result<Box<dyn TutBehavior>, CliError> {
    Ok(match id {
        BehaviorId::EchoToCm => Box::new(EchoToCm),
        BehaviorId::TimerHeartbeat => Box::new(
            TimerHeartbeat::for_spec(spec)
                .ok_or_else(|| CliError("timer-heartbeat needs an outbound channel".into()))?,
        ),
        BehaviorId::Model => Box::new(LtsBehavior::new(
            model
                .ok_or_else(|| CliError("model-as-implementation needs --model".into()))?
                .clone(),
        )),
    })
}

/// Maps a verdict to the process exit code.
pub fn exit_code(analysis: &Analysis) -> i32 {
    if analysis.verdict.passed() {
        EXIT_PASS
    } else {
        EXIT_FAIL
    }
}

/// An interface that declares exactly what the log and scenario mention.
pub fn infer_interface(records: &[LogRecord], scenario: &Scenario) -> InterfaceSpec {
    let mut spec = InterfaceSpec {
        tut_name: Ident::new("TUT").expect("valid"),
        inbound: vec![],
        outbound: vec![],
        cm_slots: vec![],
    };
    let channels = records
        .iter()
        .map(|r| (r.source.clone(), r.direction, r.name.clone(), r.type_tag.clone()))
        .chain(scenario.expectations.iter().map(|e| {
            (e.source.clone(), e.direction, e.name.clone(), e.type_tag.clone())
        }));
    for (endpoint, direction, name, type_tag) in channels {
        let list = match direction {
            Direction::In => &mut spec.inbound,
            Direction::Out => &mut spec.outbound,
        };
        if !list.iter().any(|d| d.endpoint == endpoint && d.name == name) {
            list.push(ChannelDecl::new(endpoint, name, type_tag));
        }
    }
    spec
}

fn write_reports(out_dir: &Path, base: &str, bundle: &ReportBundle, format: Format) -> Result<(), CliError> {
    if format.html() {
        write_atomic(&out_dir.join(format!("{base}.html")), &render_html(bundle))?;
    }
    if format.junit() {
        write_atomic(&out_dir.join(format!("{base}.xml")), &render_junit(bundle))?;
    }
    Ok(())
}

fn summary_line(name: &str, bundle: &ReportBundle) -> String {
    let v = &bundle.verdict;
    format!(
        "{name}: {} ({} checks, fail rate {:.3}, expectation coverage {:.3}, channel coverage {:.3}, {} unexpected)",
        v.overall,
        v.checks.len(),
        bundle.coverage.fail_rate,
        bundle.coverage.expectation_coverage,
        bundle.coverage.channel_coverage,
        v.unexpected.len()
    )
}

fn cmd_simulate(a: &SimulateArgs) -> Result<i32, CliError> {
    let spec = load_spec(&a.spec)?;
    let scenario = load_scenario(&a.scenario)?;
    if let Some(issue) = validate_scenario(&scenario, &spec).first() {
        return Err(at(&a.scenario, issue));
    }
    let model = a.model.as_deref().map(load_model).transpose()?;
    let env = generate_environment(&spec).map_err(|e| at(&a.spec, e))?;
    let mut behavior = build_behavior(a.behavior, &spec, model.as_ref())?;
    let trace = run_simulation(&scenario, behavior.as_mut(), &env, &run_config(&a.run)?)
        .map_err(|e| at(&a.scenario, e))?;
    let out = a.out_dir.join(format!("{}.tutlog", stem(&a.scenario)));
    write_atomic(&out, &trace.to_log_text())?;
    println!("{}: {} records over {} ms", out.display(), trace.records.len(), trace.duration_ms);
    Ok(EXIT_PASS)
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<i32, CliError> {
    let mode = if a.strict_log {
        ParseMode::Strict
    } else {
        ParseMode::Lenient
    };
    let parsed = parse_log(&read(&a.log)?, mode).map_err(|e| at(&a.log, e))?;
    for d in &parsed.diagnostics {
        eprintln!("warning: {}:{}: record {}: {}", a.log.display(), d.line, d.record, d.message);
    }
    let scenario = load_scenario(&a.scenario)?;
    let spec = match &a.spec {
        Some(p) => {
            let spec = load_spec(p)?;
            if let Some(issue) = validate_scenario(&scenario, &spec).first() {
                return Err(at(&a.scenario, issue));
            }
            spec
        }
        None => infer_interface(&parsed.records, &scenario),
    };
    let analysis = analyze(&parsed.records, &scenario, &spec, a.strict).map_err(|e| at(&a.log, e))?;
    let run_stamp = parsed.records.first().map(|r| r.time).unwrap_or_else(Stamp::now);
    let base = stem(&a.log);
    write_atomic(
        &a.out_dir.join(format!("{base}.annotated.tutlog")),
        &serialize_log(&annotate(&parsed.records, &analysis.verdict, run_stamp)),
    )?;
    let code = exit_code(&analysis);
    let bundle = ReportBundle {
        verdict: analysis.verdict,
        coverage: analysis.coverage,
        scenario_title: scenario.title.clone(),
        run_stamp,
        tool_version: TOOL_VERSION.to_string(),
    };
    write_atomic(&a.out_dir.join(format!("{base}.tutres")), &serialize_results(&bundle))?;
    write_reports(&a.out_dir, &base, &bundle, a.format)?;
    println!("{}", summary_line(&base, &bundle));
    Ok(code)
}

fn cmd_testgen(a: &TestgenArgs) -> Result<i32, CliError> {
    let lts = load_model(&a.model)?;
    let spec = load_spec(&a.spec)?;
    let suite = generate_tests(&lts, &spec, a.tick_period_ms).map_err(|e| at(&a.model, e))?;
    for &e in &suite.uncoverable {
        let edge = &lts.edges()[e];
        eprintln!(
            "warning: edge {} -{}-> {} is unreachable and cannot be covered",
            lts.node_name(edge.from),
            edge.trigger,
            lts.node_name(edge.to)
        );
    }
    for (i, s) in suite.scenarios.iter().enumerate() {
        write_atomic(&a.out_dir.join(format!("test_{:03}.tutsc", i + 1)), &serialize_scenario(s))?;
    }
    println!(
        "{} scenarios written to {}; model coverage {:.3}",
        suite.scenarios.len(),
        a.out_dir.display(),
        model_coverage(&suite.scenarios, &lts)
    );
    Ok(EXIT_PASS)
}

fn cmd_explore(a: &ExploreArgs) -> Result<i32, CliError> {
    let lts = load_model(&a.model)?;
    let r = explore(&lts);
    let names = |set: &std::collections::BTreeSet<usize>| {
        if set.is_empty() {
            "-".to_string()
        } else {
            set.iter().map(|&n| lts.node_name(n).as_str()).collect::<Vec<_>>().join(" ")
        }
    };
    println!("states: {}", lts.nodes().len());
    println!("initial: {}", lts.node_name(lts.initial()));
    println!("reachable: {}", names(&r.reachable));
    println!("unreachable: {}", names(&r.unreachable));
    println!("deadlocks: {}", names(&r.deadlocks));
    println!("edges explored: {} of {}", r.edge_count, lts.edges().len());
    Ok(EXIT_PASS)
}

fn cmd_report(a: &ReportArgs) -> Result<i32, CliError> {
    let bundle = parse_results(&read(&a.results)?).map_err(|e| at(&a.results, e))?;
    write_reports(&a.out_dir, &stem(&a.results), &bundle, a.format)?;
    Ok(if bundle.verdict.passed() { EXIT_PASS } else { EXIT_FAIL })
}

/// Generated scenario run end to end against the model.
pub struct ModelRun {
    pub scenario: Scenario,
    pub log: String,
    pub analysis: Analysis,
}

/// Generates tests for `lts` and runs each against the model itself,
/// fanning scenarios out over worker threads. Results keep scenario order.
pub fn run_model_suite(
    lts: &Lts,
    spec: &InterfaceSpec,
    config: &RunConfig,
    tick_period_ms: u64,
    strict: bool,
) -> Result<(Vec<ModelRun>, f64), CliError> {
    let suite = generate_tests(lts, spec, tick_period_ms).map_err(|e| CliError(e.to_string()))?;
    let coverage = model_coverage(&suite.scenarios, lts);
    let env = generate_environment(spec).map_err(|e| CliError(e.to_string()))?;
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(8);
    let chunk = suite.scenarios.len().div_ceil(workers).max(1);
    let runs = std::thread::scope(|scope| {
        let handles: Vec<_> = suite
            .scenarios
            .chunks(chunk)
            .map(|part| {
                let env = &env;
                scope.spawn(move || {
                    part.iter()
                        .map(|s| {
                            let mut behavior = LtsBehavior::new(lts.clone());
                            let trace = run_simulation(s, &mut behavior, env, config)
                                .map_err(|e| CliError(format!("{}: {e}", s.title)))?;
                            let analysis = analyze(&trace.records, s, env.spec(), strict)
                                .map_err(|e| CliError(format!("{}: {e}", s.title)))?;
                            Ok(ModelRun {
                                scenario: s.clone(),
                                log: trace.to_log_text(),
                                analysis,
                            })
                        })
                        .collect::<Result<Vec<_>, CliError>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("worker panicked"))
            .collect::<Result<Vec<_>, _>>()
    })?;
    Ok((runs.into_iter().flatten().collect(), coverage))
}

fn cmd_run(a: &RunArgs) -> Result<i32, CliError> {
    let lts = load_model(&a.model)?;
    let spec = load_spec(&a.spec)?;
    let config = run_config(&a.run)?;
    let period = a.run.tick_period_ms.unwrap_or(DEFAULT_TEST_TICK_PERIOD_MS);
    let (runs, coverage) = run_model_suite(&lts, &spec, &config, period, a.strict).map_err(|e| at(&a.model, e))?;
    let mut bundles = Vec::new();
    let mut code = EXIT_PASS;
    for (i, run) in runs.into_iter().enumerate() {
        let base = format!("test_{:03}", i + 1);
        write_atomic(&a.out_dir.join(format!("{base}.tutsc")), &serialize_scenario(&run.scenario))?;
        write_atomic(&a.out_dir.join(format!("{base}.tutlog")), &run.log)?;
        if exit_code(&run.analysis) != EXIT_PASS {
            code = EXIT_FAIL;
        }
        let bundle = ReportBundle {
            verdict: run.analysis.verdict,
            coverage: run.analysis.coverage,
            scenario_title: run.scenario.title,
            run_stamp: config.run_stamp,
            tool_version: TOOL_VERSION.to_string(),
        };
        write_atomic(&a.out_dir.join(format!("{base}.tutres")), &serialize_results(&bundle))?;
        if a.format.html() {
            write_atomic(&a.out_dir.join(format!("{base}.html")), &render_html(&bundle))?;
        }
        println!("{}", summary_line(&base, &bundle));
        bundles.push(bundle);
    }
    if a.format.junit() {
        write_atomic(&a.out_dir.join("junit.xml"), &render_junit_suites(&bundles))?;
    }
    let passed = bundles.iter().filter(|b| b.verdict.passed()).count();
    println!("{passed}/{} scenarios passed; model coverage {coverage:.3}", bundles.len());
    Ok(code)
}

pub fn execute(cli: &Cli) -> Result<i32, CliError> {
    match &cli.command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Testgen(a) => cmd_testgen(a),
        Command::Explore(a) => cmd_explore(a),
        Command::Report(a) => cmd_report(a),
        Command::Run(a) => cmd_run(a),
    }
}

/// Parses arguments, runs the command and returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_PASS };
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}
