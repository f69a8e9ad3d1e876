//! Command implementations, output files and the run manifest.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use serde::{Deserialize, Serialize};

use cbsopt::admission::{DecisionRecord, ReservationState};
use cbsopt::fitness::EvalContext;
use cbsopt::model::{
    load_events, load_flows, load_network, load_solution, save_solution, EvalConfig, FlowEventKind,
    Link, NetworkModel, OptimizerParams, SearchSpace, SolutionMode,
};
use cbsopt::optim::{
    run_exhaustive, run_intuitive, run_warm_started, Heuristic, Init, ProblemDims, RunResult,
    RunSpec, TracePoint,
};
use cbsopt::scenarios::{run_experiment, ExperimentConfig, Preset};
use cbsopt::{Error, Result};

use crate::{Algorithm, CommonArgs, Mode};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
pub struct RunManifest {
    pub format_version: u32,
    pub command: String,
    pub params: serde_json::Value,
    pub seed: u64,
    pub code_version: String,
    /// Informational only; not reproduced by reruns.
    pub wall_ms: u64,
    pub outputs: Vec<String>,
}

fn write_manifest(
    dir: &Path,
    command: &str,
    params: serde_json::Value,
    seed: u64,
    wall_ms: u64,
    outputs: &[&str],
) -> Result<()> {
    let manifest = RunManifest {
        format_version: MANIFEST_VERSION,
        command: command.to_string(),
        params,
        seed,
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        wall_ms,
        outputs: outputs.iter().map(|s| s.to_string()).collect(),
    };
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Parse(format!("manifest: {e}")))?;
    fs::write(dir.join("manifest.json"), text + "\n")?;
    Ok(())
}

fn configure_jobs(jobs: Option<usize>) {
    if let Some(n) = jobs {
        // ignore the error if a pool already exists (e.g. under rerun)
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn to_params<T: Serialize>(args: &T) -> Result<serde_json::Value> {
    serde_json::to_value(args).map_err(|e| Error::Parse(format!("manifest params: {e}")))
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct OptimizeArgs {
    /// Network document (TOML).
    #[arg(long)]
    pub network: PathBuf,
    /// Flows document; defaults to the flow sections of the network file.
    #[arg(long)]
    pub flows: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub algorithm: Algorithm,
    /// Solution mode; pso/ga default to uniform, ipso/iga to individual.
    #[arg(long, value_enum)]
    pub mode: Option<Mode>,
    /// Override the CBS queue count on every port.
    #[arg(long)]
    pub queues: Option<usize>,
    /// Search grid step in microseconds.
    #[arg(long, default_value_t = 10)]
    pub grid_step_us: u32,
    /// Candidate paths per flow.
    #[arg(long, default_value_t = 3)]
    pub k_paths: usize,
    #[arg(long, default_value_t = 500)]
    pub max_iterations: u32,
    /// Override the population size of both solution modes.
    #[arg(long)]
    pub population: Option<usize>,
    /// Override the convergence window of both solution modes.
    #[arg(long)]
    pub window: Option<usize>,
    /// Allow exhaustive search over more than 3 queues.
    #[arg(long, default_value_t = false)]
    pub allow_large_es: bool,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Serialize)]
struct TraceRow<'a> {
    phase: &'a str,
    iteration: u32,
    best_fitness: f64,
    mean_fitness: f64,
    wall_ms: u64,
}

fn write_trace(path: &Path, phases: &[(&str, &[TracePoint])]) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    for (phase, points) in phases {
        for p in *points {
            writer
                .serialize(TraceRow {
                    phase,
                    iteration: p.iteration,
                    best_fitness: p.best_fitness,
                    mean_fitness: p.mean_fitness,
                    wall_ms: p.wall_ms,
                })
                .map_err(|e| Error::Io(std::io::Error::other(e)))?;
        }
    }
    writer.flush()?;
    Ok(())
}

fn override_queues(net: &NetworkModel, queues: usize) -> Result<NetworkModel> {
    let links: Vec<Link> = net
        .links()
        .iter()
        .map(|l| Link {
            queues,
            ..l.clone()
        })
        .collect();
    NetworkModel::with_queue_cap(
        net.nodes().to_vec(),
        links,
        net.headroom.clone(),
        net.reservable_fraction,
        net.max_priority_queues,
    )
}

fn heuristic_mode(algorithm: Algorithm, mode: Option<Mode>) -> Result<SolutionMode> {
    match (algorithm, mode) {
        (Algorithm::Es | Algorithm::Intuitive, Some(Mode::Individual)) => Err(Error::Unsupported(
            "es and intuitive support the uniform mode only".into(),
        )),
        (Algorithm::Es | Algorithm::Intuitive, _) => Ok(SolutionMode::Uniform),
        (Algorithm::Ipso | Algorithm::Iga, Some(Mode::Uniform)) => Err(Error::Unsupported(
            "ipso and iga produce individual-mode solutions".into(),
        )),
        (Algorithm::Ipso | Algorithm::Iga, _) => Ok(SolutionMode::Individual),
        (_, Some(Mode::Individual)) => Ok(SolutionMode::Individual),
        (_, _) => Ok(SolutionMode::Uniform),
    }
}

pub fn run_optimize(args: &OptimizeArgs) -> Result<()> {
    configure_jobs(args.common.jobs);
    let started = Instant::now();
    fs::create_dir_all(&args.common.out)?;

    let network_text = fs::read_to_string(&args.network)?;
    let mut net = load_network(&network_text)?;
    if let Some(q) = args.queues {
        net = override_queues(&net, q)?;
    }
    let flows = match &args.flows {
        Some(path) => load_flows(&fs::read_to_string(path)?, &net)?,
        None => load_flows(&network_text, &net)?,
    };

    let mut params = OptimizerParams {
        max_iterations: args.max_iterations,
        ..OptimizerParams::default()
    };
    if let Some(p) = args.population {
        params.uniform.population = p;
        params.individual.population = p;
    }
    if let Some(w) = args.window {
        params.uniform.window = w;
        params.individual.window = w;
    }
    let cfg = EvalConfig {
        k_paths: args.k_paths,
        ..EvalConfig::default()
    };
    let ctx = EvalContext::new(&net, &flows, params.weights, cfg)?;
    let space = SearchSpace::with_step(args.grid_step_us)?;
    let mode = heuristic_mode(args.algorithm, args.mode)?;

    let spec_for = |mode: SolutionMode, seed: u64| -> Result<RunSpec> {
        Ok(RunSpec {
            space,
            dims: ProblemDims::for_mode(&net, mode)?,
            population: params.scale(mode).population,
            window: params.scale(mode).window,
            max_iterations: params.max_iterations,
            seed,
            init: Init::Random,
        })
    };

    enum Outcome {
        Single(RunResult),
        Warm {
            uniform: RunResult,
            individual: RunResult,
        },
    }

    let outcome = match args.algorithm {
        Algorithm::Pso | Algorithm::Ga => {
            let heuristic = if args.algorithm == Algorithm::Pso {
                Heuristic::Pso
            } else {
                Heuristic::Ga
            };
            let spec = spec_for(mode, args.common.seed)?;
            Outcome::Single(heuristic.run(&ctx, &spec, &params))
        }
        Algorithm::Es => Outcome::Single(run_exhaustive(
            &ctx,
            &space,
            net.max_queue_count(),
            args.allow_large_es,
        )?),
        Algorithm::Intuitive => {
            Outcome::Single(run_intuitive(&ctx, net.max_queue_count(), &space)?)
        }
        Algorithm::Ipso | Algorithm::Iga => {
            let heuristic = if args.algorithm == Algorithm::Ipso {
                Heuristic::Pso
            } else {
                Heuristic::Ga
            };
            let warm = run_warm_started(&ctx, heuristic, &params, space, args.common.seed, None)?;
            Outcome::Warm {
                uniform: warm.uniform,
                individual: warm.individual,
            }
        }
    };

    let (final_run, phases): (&RunResult, Vec<(&str, &[TracePoint])>) = match &outcome {
        Outcome::Single(run) => {
            let label = match mode {
                SolutionMode::Uniform => "uniform",
                SolutionMode::Individual => "individual",
            };
            (run, vec![(label, run.trace.as_slice())])
        }
        Outcome::Warm {
            uniform,
            individual,
        } => (
            individual,
            vec![
                ("uniform", uniform.trace.as_slice()),
                ("individual", individual.trace.as_slice()),
            ],
        ),
    };

    fs::write(
        args.common.out.join("solution.toml"),
        save_solution(&final_run.best, &net),
    )?;
    let mut report_value = serde_json::to_value(&final_run.report)
        .map_err(|e| Error::Parse(format!("report: {e}")))?;
    report_value
        .as_object_mut()
        .expect("report serializes to an object")
        .insert("format_version".into(), 1.into());
    let report = serde_json::to_string_pretty(&report_value)
        .map_err(|e| Error::Parse(format!("report: {e}")))?;
    fs::write(args.common.out.join("report.json"), report + "\n")?;
    write_trace(&args.common.out.join("trace.csv"), &phases)?;
    write_manifest(
        &args.common.out,
        "optimize",
        to_params(args)?,
        args.common.seed,
        started.elapsed().as_millis() as u64,
        &["solution.toml", "report.json", "trace.csv"],
    )?;

    println!(
        "optimize: f = {:.6} (f_R = {:.4}, f_A = {:.4}, f_D = {:.4}), {} evaluations",
        final_run.report.f,
        final_run.report.f_r,
        final_run.report.f_a,
        final_run.report.f_d,
        final_run.evaluations
    );
    Ok(())
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct AdmitArgs {
    #[arg(long)]
    pub network: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    /// Timestamped add/remove event list (TOML).
    #[arg(long)]
    pub events: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub k_paths: usize,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

#[derive(Serialize)]
struct AdmitSummary<'a> {
    format_version: u32,
    accepted: usize,
    rejected: usize,
    removed: usize,
    admitted_flows: Vec<&'a str>,
    reservations: &'a ReservationState,
}

pub fn run_admit(args: &AdmitArgs) -> Result<()> {
    configure_jobs(args.common.jobs);
    let started = Instant::now();
    fs::create_dir_all(&args.common.out)?;

    let net = load_network(&fs::read_to_string(&args.network)?)?;
    let solution = load_solution(&fs::read_to_string(&args.solution)?, &net)?;
    let events = load_events(&fs::read_to_string(&args.events)?, &net)?;

    let cfg = EvalConfig {
        k_paths: args.k_paths,
        ..EvalConfig::default()
    };
    let mut state = ReservationState::new(&net);
    let mut lines = String::new();
    let (mut accepted, mut rejected, mut removed) = (0usize, 0usize, 0usize);
    for (seq, event) in events.iter().enumerate() {
        let record = match &event.kind {
            FlowEventKind::Add(flow) => {
                let decision = state.admit(flow.clone(), &net, &solution, &cfg)?;
                if decision.accepted() {
                    accepted += 1;
                } else {
                    rejected += 1;
                }
                DecisionRecord::new(seq as u64, Some(event.at), &flow.id, &decision, &net)
            }
            FlowEventKind::Remove(id) => {
                state.release(id, &net, &solution)?;
                removed += 1;
                DecisionRecord {
                    format_version: 1,
                    seq: seq as u64,
                    at: Some(event.at),
                    flow: id.clone(),
                    verdict: "remove",
                    path: None,
                    queues: None,
                    d_p_us: None,
                    reason: None,
                }
            }
        };
        lines.push_str(
            &serde_json::to_string(&record).map_err(|e| Error::Parse(format!("trace: {e}")))?,
        );
        lines.push('\n');
    }
    fs::write(args.common.out.join("decisions.jsonl"), lines)?;

    let summary = AdmitSummary {
        format_version: 1,
        accepted,
        rejected,
        removed,
        admitted_flows: state.admitted().keys().map(String::as_str).collect(),
        reservations: &state,
    };
    let summary = serde_json::to_string_pretty(&summary)
        .map_err(|e| Error::Parse(format!("summary: {e}")))?;
    fs::write(args.common.out.join("state.json"), summary + "\n")?;

    write_manifest(
        &args.common.out,
        "admit",
        to_params(args)?,
        args.common.seed,
        started.elapsed().as_millis() as u64,
        &["decisions.jsonl", "state.json"],
    )?;
    println!("admit: {accepted} accepted, {rejected} rejected, {removed} removed");
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeuristicArg {
    Ga,
    Pso,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
pub struct BenchmarkArgs {
    /// heatmap | convergence | comparison | individual | runtime-flows
    #[arg(long)]
    pub preset: String,
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub flows: Option<usize>,
    /// Grid step for presets that run the exhaustive search.
    #[arg(long)]
    pub grid_step_us: Option<u32>,
    /// Scenario profiles for the runtime-flows preset.
    #[arg(long, value_delimiter = ',')]
    pub profiles: Option<Vec<u8>>,
    /// Optimizer used by the runtime-flows preset.
    #[arg(long, value_enum)]
    pub heuristic: Option<HeuristicArg>,
    #[arg(long)]
    pub max_iterations: Option<u32>,
    #[arg(long)]
    pub population: Option<usize>,
    #[arg(long)]
    pub window: Option<usize>,
    /// PROFINET shape override for the individual preset (TOML file
    /// with backbone, line_len, line_profiles).
    #[arg(long)]
    pub profinet_shape: Option<PathBuf>,
    #[command(flatten)]
    #[serde(flatten)]
    pub common: CommonArgs,
}

pub fn run_benchmark(args: &BenchmarkArgs) -> Result<()> {
    configure_jobs(args.common.jobs);
    let started = Instant::now();

    let preset: Preset = args.preset.parse()?;
    let mut config = ExperimentConfig::new(preset, args.common.seed);
    if let Some(reps) = args.reps {
        config.reps = reps;
    }
    if let Some(flows) = args.flows {
        config.flows = flows;
    }
    if let Some(step) = args.grid_step_us {
        config.grid_step_us = step;
    }
    if let Some(profiles) = &args.profiles {
        config.profiles = profiles.clone();
    }
    if let Some(h) = args.heuristic {
        config.heuristic = match h {
            HeuristicArg::Ga => Heuristic::Ga,
            HeuristicArg::Pso => Heuristic::Pso,
        };
    }
    if let Some(iters) = args.max_iterations {
        config.params.max_iterations = iters;
    }
    if let Some(p) = args.population {
        config.params.uniform.population = p;
        config.params.individual.population = p;
    }
    if let Some(w) = args.window {
        config.params.uniform.window = w;
        config.params.individual.window = w;
    }
    if let Some(path) = &args.profinet_shape {
        config.profinet = toml::from_str(&fs::read_to_string(path)?)
            .map_err(|e| Error::Parse(format!("profinet shape: {e}")))?;
    }

    let tables = run_experiment(&config)?;
    let written = tables.write_csv(&args.common.out)?;
    let names: Vec<String> = written
        .iter()
        .map(|p| {
            p.file_name()
                .unwrap_or_default()
                .to_string_lossy()
                .into_owned()
        })
        .collect();
    let name_refs: Vec<&str> = names.iter().map(String::as_str).collect();
    write_manifest(
        &args.common.out,
        "benchmark",
        to_params(args)?,
        args.common.seed,
        started.elapsed().as_millis() as u64,
        &name_refs,
    )?;
    for name in &names {
        println!("benchmark[{preset}]: wrote {name}");
    }
    Ok(())
}

#[derive(Args, Clone, Debug)]
pub struct RerunArgs {
    /// Manifest of a previous run.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory; defaults to the manifest's own directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the recorded worker-thread count; result tables do not
    /// depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
}

pub fn run_rerun(args: &RerunArgs) -> Result<()> {
    configure_jobs(args.jobs);
    let text = fs::read_to_string(&args.manifest)?;
    let manifest: RunManifest =
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("manifest: {e}")))?;
    if manifest.format_version != MANIFEST_VERSION {
        return Err(Error::Parse(format!(
            "manifest format_version {} unsupported",
            manifest.format_version
        )));
    }
    let out = match &args.out {
        Some(out) => out.clone(),
        None => args
            .manifest
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };

    fn parse_params<T: for<'de> Deserialize<'de>>(value: serde_json::Value) -> Result<T> {
        serde_json::from_value(value).map_err(|e| Error::Parse(format!("manifest params: {e}")))
    }

    match manifest.command.as_str() {
        "optimize" => {
            let mut p: OptimizeArgs = parse_params(manifest.params)?;
            p.common.out = out;
            run_optimize(&p)
        }
        "admit" => {
            let mut p: AdmitArgs = parse_params(manifest.params)?;
            p.common.out = out;
            run_admit(&p)
        }
        "benchmark" => {
            let mut p: BenchmarkArgs = parse_params(manifest.params)?;
            p.common.out = out;
            run_benchmark(&p)
        }
        other => Err(Error::Parse(format!("manifest command `{other}` unknown"))),
    }
}
