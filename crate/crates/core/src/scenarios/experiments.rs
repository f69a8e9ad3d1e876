//! The benchmark experiment presets: heatmap, convergence, comparison,
//! individual per-hop delays and runtime flows. Result tables are
//! deterministic given (preset, seed); wall-clock timings go to a
//! separate table.

use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fitness::{admit_static_set, EvalContext, StaticAdmission};
use crate::model::{
    profile_by_id, CandidateSolution, EvalConfig, Flow, FlowKind, HeadroomEntry, NetworkModel,
    OptimizerParams, SearchSpace, SolutionMode,
};
use crate::optim::{
    derive_seed, rng_for, run_exhaustive, run_intuitive, run_warm_started, Heuristic, Init,
    ProblemDims, RunResult, RunSpec,
};
use crate::scenarios::{
    generate_flows, generate_profinet_flows, generate_topology, plc_ingress_link, with_headroom,
    ProfinetShape, TopologyKind,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    Heatmap,
    Convergence,
    Comparison,
    Individual,
    RuntimeFlows,
}

impl std::fmt::Display for Preset {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Preset::Heatmap => "heatmap",
            Preset::Convergence => "convergence",
            Preset::Comparison => "comparison",
            Preset::Individual => "individual",
            Preset::RuntimeFlows => "runtime-flows",
        };
        write!(f, "{s}")
    }
}

impl std::str::FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "heatmap" => Ok(Preset::Heatmap),
            "convergence" => Ok(Preset::Convergence),
            "comparison" => Ok(Preset::Comparison),
            "individual" => Ok(Preset::Individual),
            "runtime-flows" => Ok(Preset::RuntimeFlows),
            other => Err(Error::Validation(format!("unknown preset `{other}`"))),
        }
    }
}

/// Tunable experiment parameters; [`ExperimentConfig::new`] fills the
/// preset defaults.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub preset: Preset,
    pub seed: u64,
    pub reps: usize,
    pub flows: usize,
    pub grid_step_us: u32,
    pub queue_settings: Vec<usize>,
    pub params: OptimizerParams,
    pub cfg: EvalConfig,
    /// Optimizer used by the runtime-flows preset.
    pub heuristic: Heuristic,
    /// Scenario profiles of the runtime-flows preset.
    pub profiles: Vec<u8>,
    pub headroom_fraction: f64,
    pub profinet: ProfinetShape,
    /// Run the exhaustive search inside the comparison preset. Skipping
    /// it frees that preset from grid coarsening.
    pub include_es: bool,
}

impl ExperimentConfig {
    pub fn new(preset: Preset, seed: u64) -> Self {
        let mut config = Self {
            preset,
            seed,
            reps: 30,
            flows: 200,
            grid_step_us: 100,
            queue_settings: vec![2, 4],
            params: OptimizerParams::default(),
            cfg: EvalConfig::default(),
            heuristic: Heuristic::Ga,
            profiles: vec![1, 2, 3, 4, 5],
            headroom_fraction: 0.5,
            profinet: ProfinetShape::default(),
            include_es: true,
        };
        match preset {
            Preset::Heatmap => {
                config.reps = 1;
                config.flows = 344;
                config.queue_settings = vec![2];
            }
            Preset::Convergence => {
                config.flows = 150;
                config.queue_settings = vec![2];
                // this preset reproduces the 10-iteration convergence rule
                config.params.uniform.window = 10;
            }
            Preset::Comparison => {}
            Preset::Individual => {
                config.reps = 10;
            }
            Preset::RuntimeFlows => {
                config.reps = 10;
            }
        }
        config
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct HeatmapRow {
    pub bound1_us: u32,
    pub bound2_us: u32,
    pub admitted: usize,
    pub fitness: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceTraceRow {
    pub replication: usize,
    pub algorithm: String,
    pub iteration: u32,
    pub best_fitness: f64,
    pub mean_fitness: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConvergenceSummaryRow {
    pub replication: usize,
    pub algorithm: String,
    pub final_fitness: f64,
    pub iterations: u32,
    pub converged: bool,
    pub es_optimum: f64,
    pub ratio_to_optimum: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonRow {
    pub replication: usize,
    pub topology: String,
    pub queues: usize,
    pub algorithm: String,
    pub fitness: f64,
    pub evaluations: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct IndividualRow {
    pub replication: usize,
    pub utilization: f64,
    pub algorithm: String,
    pub configuration: String,
    pub fitness: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct RuntimeFlowsRow {
    pub scenario_profile: u8,
    pub repetition: usize,
    pub configuration: String,
    pub static_total: usize,
    pub static_admitted: usize,
    pub dynamic_admitted: usize,
    pub fitness: f64,
}

/// Wall-clock entries; the only non-deterministic table.
#[derive(Clone, Debug, Serialize)]
pub struct TimingRow {
    pub label: String,
    pub replication: usize,
    pub runtime_ms: u64,
}

#[derive(Clone, Debug)]
pub enum ResultTable {
    Heatmap(Vec<HeatmapRow>),
    Convergence {
        summary: Vec<ConvergenceSummaryRow>,
        trace: Vec<ConvergenceTraceRow>,
    },
    Comparison(Vec<ComparisonRow>),
    Individual(Vec<IndividualRow>),
    RuntimeFlows(Vec<RuntimeFlowsRow>),
}

#[derive(Clone, Debug)]
pub struct ExperimentTables {
    pub preset: Preset,
    pub results: ResultTable,
    pub timings: Vec<TimingRow>,
}

fn write_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut writer =
        csv::Writer::from_path(path).map_err(|e| Error::Io(std::io::Error::other(e)))?;
    for row in rows {
        writer
            .serialize(row)
            .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    }
    writer.flush()?;
    Ok(())
}

impl ExperimentTables {
    /// Writes `results.csv` (plus `trace.csv` for the convergence
    /// preset) and `timings.csv` into `dir`; returns the written paths.
    pub fn write_csv(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let results = dir.join("results.csv");
        match &self.results {
            ResultTable::Heatmap(rows) => write_rows(&results, rows)?,
            ResultTable::Convergence { summary, trace } => {
                write_rows(&results, summary)?;
                let trace_path = dir.join("trace.csv");
                write_rows(&trace_path, trace)?;
                written.push(trace_path);
            }
            ResultTable::Comparison(rows) => write_rows(&results, rows)?,
            ResultTable::Individual(rows) => write_rows(&results, rows)?,
            ResultTable::RuntimeFlows(rows) => write_rows(&results, rows)?,
        }
        written.insert(0, results);
        let timings = dir.join("timings.csv");
        write_rows(&timings, &self.timings)?;
        written.push(timings);
        Ok(written)
    }
}

pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentTables> {
    match config.preset {
        Preset::Heatmap => heatmap(config),
        Preset::Convergence => convergence(config),
        Preset::Comparison => comparison(config),
        Preset::Individual => individual(config),
        Preset::RuntimeFlows => runtime_flows(config),
    }
}

fn uniform_spec(
    config: &ExperimentConfig,
    net: &NetworkModel,
    space: SearchSpace,
    seed: u64,
) -> Result<RunSpec> {
    Ok(RunSpec {
        space,
        dims: ProblemDims::for_mode(net, SolutionMode::Uniform)?,
        population: config.params.uniform.population,
        window: config.params.uniform.window,
        max_iterations: config.params.max_iterations,
        seed,
        init: Init::Random,
    })
}

/// Sweeps the 2-queue uniform bounds over the (coarsened) grid on the
/// single-hop scenario and records reservations per cell.
fn heatmap(config: &ExperimentConfig) -> Result<ExperimentTables> {
    let net = generate_topology(
        TopologyKind::SingleHop { talkers: 16 },
        2,
        derive_seed(config.seed, 1),
    )?;
    let flows = generate_flows(
        &net,
        config.flows,
        &[1, 2, 3, 4],
        derive_seed(config.seed, 2),
    )?;
    let ctx = EvalContext::new(&net, &flows, config.params.weights, config.cfg)?;
    let space = SearchSpace::with_step(config.grid_step_us)?;
    let values: Vec<u32> = space.values().collect();
    let cells: Vec<(u32, u32)> = values
        .iter()
        .flat_map(|&b1| values.iter().map(move |&b2| (b1, b2)))
        .collect();
    let rows: Vec<HeatmapRow> = cells
        .par_iter()
        .map(|&(b1, b2)| {
            let report = crate::fitness::evaluate(&ctx, &CandidateSolution::uniform(vec![b1, b2]));
            HeatmapRow {
                bound1_us: b1,
                bound2_us: b2,
                admitted: report.admitted,
                fitness: report.f,
            }
        })
        .collect();
    Ok(ExperimentTables {
        preset: Preset::Heatmap,
        results: ResultTable::Heatmap(rows),
        timings: Vec::new(),
    })
}

/// GA and PSO against the ES optimum on the star-of-stars scenario.
fn convergence(config: &ExperimentConfig) -> Result<ExperimentTables> {
    let net = generate_topology(TopologyKind::StarOfStars, 2, derive_seed(config.seed, 1))?;
    let flows = generate_flows(
        &net,
        config.flows,
        &[1, 2, 3, 4, 5],
        derive_seed(config.seed, 2),
    )?;
    let ctx = EvalContext::new(&net, &flows, config.params.weights, config.cfg)?;
    let space = SearchSpace::with_step(config.grid_step_us)?;

    let mut timings = Vec::new();
    let started = Instant::now();
    let es = run_exhaustive(&ctx, &space, 2, false)?;
    timings.push(TimingRow {
        label: "es".into(),
        replication: 0,
        runtime_ms: started.elapsed().as_millis() as u64,
    });

    let mut summary = Vec::new();
    let mut trace = Vec::new();
    for rep in 0..config.reps {
        for (label, heuristic) in [("ga", Heuristic::Ga), ("pso", Heuristic::Pso)] {
            let spec = uniform_spec(
                config,
                &net,
                space,
                derive_seed(
                    config.seed,
                    1000 + (rep as u64) * 2 + (label == "pso") as u64,
                ),
            )?;
            let started = Instant::now();
            let run = heuristic.run(&ctx, &spec, &config.params);
            timings.push(TimingRow {
                label: label.into(),
                replication: rep,
                runtime_ms: started.elapsed().as_millis() as u64,
            });
            for point in &run.trace {
                trace.push(ConvergenceTraceRow {
                    replication: rep,
                    algorithm: label.into(),
                    iteration: point.iteration,
                    best_fitness: point.best_fitness,
                    mean_fitness: point.mean_fitness,
                });
            }
            summary.push(ConvergenceSummaryRow {
                replication: rep,
                algorithm: label.into(),
                final_fitness: run.report.f,
                iterations: run.iterations,
                converged: run.converged,
                es_optimum: es.report.f,
                ratio_to_optimum: if es.report.f > 0.0 {
                    run.report.f / es.report.f
                } else {
                    1.0
                },
            });
        }
    }
    Ok(ExperimentTables {
        preset: Preset::Convergence,
        results: ResultTable::Convergence { summary, trace },
        timings,
    })
}

/// Heuristics vs ES vs the intuitive approach over randomly drawn
/// topologies, uniform configuration.
fn comparison(config: &ExperimentConfig) -> Result<ExperimentTables> {
    let mut rows = Vec::new();
    let mut timings = Vec::new();
    for rep in 0..config.reps {
        let scenario_seed = derive_seed(config.seed, 10 + rep as u64);
        let topology_idx = rng_for(scenario_seed).random_range(0..3usize);
        let (topology, label) = match topology_idx {
            0 => (TopologyKind::Line, "line"),
            1 => (TopologyKind::StarOfStars, "star-of-stars"),
            _ => (TopologyKind::Ring, "ring"),
        };
        for &queues in &config.queue_settings {
            let net = generate_topology(topology.clone(), queues, derive_seed(scenario_seed, 1))?;
            let flows = generate_flows(
                &net,
                config.flows,
                &[1, 2, 3, 4, 5],
                derive_seed(scenario_seed, 2),
            )?;
            let ctx = EvalContext::new(&net, &flows, config.params.weights, config.cfg)?;
            let space = SearchSpace::with_step(config.grid_step_us)?;

            let mut push = |algorithm: &str, run: &RunResult, ms: u64| {
                rows.push(ComparisonRow {
                    replication: rep,
                    topology: label.into(),
                    queues,
                    algorithm: algorithm.into(),
                    fitness: run.report.f,
                    evaluations: run.evaluations,
                });
                timings.push(TimingRow {
                    label: format!("{algorithm}-q{queues}"),
                    replication: rep,
                    runtime_ms: ms,
                });
            };

            for (algorithm, heuristic) in [("ga", Heuristic::Ga), ("pso", Heuristic::Pso)] {
                let spec = uniform_spec(
                    config,
                    &net,
                    space,
                    derive_seed(
                        scenario_seed,
                        100 + queues as u64 * 10 + (algorithm == "pso") as u64,
                    ),
                )?;
                let started = Instant::now();
                let run = heuristic.run(&ctx, &spec, &config.params);
                push(algorithm, &run, started.elapsed().as_millis() as u64);
            }

            let started = Instant::now();
            let ia = run_intuitive(&ctx, queues, &space)?;
            push("intuitive", &ia, started.elapsed().as_millis() as u64);

            // the exhaustive search only covers the two-queue setting
            if config.include_es && queues == 2 {
                let started = Instant::now();
                let es = run_exhaustive(&ctx, &space, queues, false)?;
                push("es", &es, started.elapsed().as_millis() as u64);
            }
        }
    }
    Ok(ExperimentTables {
        preset: Preset::Comparison,
        results: ResultTable::Comparison(rows),
        timings,
    })
}

/// Uniform vs plain individual vs warm-started individual configurations
/// on the PROFINET network.
fn individual(config: &ExperimentConfig) -> Result<ExperimentTables> {
    let shape = config.profinet.clone();
    let queues = shape.line_profiles.len();
    let net = generate_topology(
        TopologyKind::Profinet(shape.clone()),
        queues,
        derive_seed(config.seed, 1),
    )?;
    // no exhaustive search here, so the heuristics get the full grid
    let space = SearchSpace::default();

    let mut rows = Vec::new();
    let mut timings = Vec::new();
    for rep in 0..config.reps {
        let rep_seed = derive_seed(config.seed, 20 + rep as u64);
        let utilization = rng_for(rep_seed).random_range(0.05..=0.50);
        let flows = generate_profinet_flows(&net, &shape, utilization, derive_seed(rep_seed, 1))?;
        let ctx = EvalContext::new(&net, &flows, config.params.weights, config.cfg)?;

        for (label, heuristic) in [("ga", Heuristic::Ga), ("pso", Heuristic::Pso)] {
            let seed = derive_seed(rep_seed, 2 + (label == "pso") as u64);
            let started = Instant::now();
            let uniform = heuristic.run(
                &ctx,
                &uniform_spec(config, &net, space, seed)?,
                &config.params,
            );
            timings.push(TimingRow {
                label: format!("{label}-uniform"),
                replication: rep,
                runtime_ms: started.elapsed().as_millis() as u64,
            });

            let plain_spec = RunSpec {
                space,
                dims: ProblemDims::for_mode(&net, SolutionMode::Individual)?,
                population: config.params.individual.population,
                window: config.params.individual.window,
                max_iterations: config.params.max_iterations,
                seed: derive_seed(seed, 7),
                init: Init::Random,
            };
            let started = Instant::now();
            let plain = heuristic.run(&ctx, &plain_spec, &config.params);
            timings.push(TimingRow {
                label: format!("{label}-individual"),
                replication: rep,
                runtime_ms: started.elapsed().as_millis() as u64,
            });

            let started = Instant::now();
            let warm = run_warm_started(
                &ctx,
                heuristic,
                &config.params,
                space,
                seed,
                Some(uniform.clone()),
            )?;
            timings.push(TimingRow {
                label: format!("i{label}"),
                replication: rep,
                runtime_ms: started.elapsed().as_millis() as u64,
            });

            for (configuration, run) in [
                ("uniform", &uniform),
                ("individual", &plain),
                ("warm-started", &warm.individual),
            ] {
                rows.push(IndividualRow {
                    replication: rep,
                    utilization,
                    algorithm: label.into(),
                    configuration: configuration.into(),
                    fitness: run.report.f,
                });
            }
        }
    }
    Ok(ExperimentTables {
        preset: Preset::Individual,
        results: ResultTable::Individual(rows),
        timings,
    })
}

fn random_station_flows(
    net: &NetworkModel,
    profile: u8,
    count: usize,
    prefix: &str,
    kind: FlowKind,
    seed: u64,
) -> Result<Vec<Flow>> {
    use rand::seq::IndexedRandom;
    let plc = net
        .plc()
        .ok_or_else(|| Error::Validation("network has no PLC".into()))?;
    let sources: Vec<_> = net.end_stations().filter(|&es| es != plc).collect();
    let mut rng = rng_for(seed);
    (0..count)
        .map(|i| {
            Ok(Flow {
                id: format!("{prefix}{i:04}"),
                profile: profile_by_id(profile)?,
                source: *sources.choose(&mut rng).expect("stations exist"),
                destination: plc,
                kind,
            })
        })
        .collect()
}

/// Offline optimization with and without headroom, plus the intuitive
/// approach fed with synthetic future flows, each followed by online
/// admission of dynamic flows until the first rejection.
fn runtime_flows(config: &ExperimentConfig) -> Result<ExperimentTables> {
    let mut rows = Vec::new();
    let mut timings = Vec::new();
    // no exhaustive search here, so the heuristics get the full grid
    let space = SearchSpace::default();

    for &profile in &config.profiles {
        for rep in 0..config.reps {
            let base = derive_seed(config.seed, u64::from(profile) * 1_000 + rep as u64);
            let net = generate_topology(TopologyKind::StarOfStars, 2, derive_seed(base, 1))?;

            // 10 static flows for each of profiles 1, 3 and 5
            let mut static_flows = Vec::new();
            for (i, p) in [1u8, 3, 5].into_iter().enumerate() {
                static_flows.extend(random_station_flows(
                    &net,
                    p,
                    10,
                    &format!("s{p}-"),
                    FlowKind::Static,
                    derive_seed(base, 2 + i as u64),
                )?);
            }

            let link = plc_ingress_link(&net)?;
            let net_headroom = with_headroom(
                &net,
                vec![HeadroomEntry {
                    link,
                    profile,
                    fraction: config.headroom_fraction,
                }],
            )?;

            let ctx_headroom = EvalContext::new(
                &net_headroom,
                &static_flows,
                config.params.weights,
                config.cfg,
            )?;
            let ctx_plain =
                EvalContext::new(&net, &static_flows, config.params.weights, config.cfg)?;

            let optimizer_seed = derive_seed(base, 10);
            let started = Instant::now();
            let run_headroom = config.heuristic.run(
                &ctx_headroom,
                &uniform_spec(config, &net_headroom, space, optimizer_seed)?,
                &config.params,
            );
            timings.push(TimingRow {
                label: "headroom".into(),
                replication: rep,
                runtime_ms: started.elapsed().as_millis() as u64,
            });
            let started = Instant::now();
            let run_plain = config.heuristic.run(
                &ctx_plain,
                &uniform_spec(config, &net, space, optimizer_seed)?,
                &config.params,
            );
            timings.push(TimingRow {
                label: "no-headroom".into(),
                replication: rep,
                runtime_ms: started.elapsed().as_millis() as u64,
            });

            // the intuitive approach sees every possible future flow
            let link_rate = net.link(link).rate_bps;
            let future_count = (config.headroom_fraction * link_rate
                / profile_by_id(profile)?.rate_bps())
            .floor() as usize;
            let mut ia_flows = static_flows.clone();
            ia_flows.extend(random_station_flows(
                &net,
                profile,
                future_count,
                "x",
                FlowKind::Static,
                derive_seed(base, 11),
            )?);
            let ctx_ia = EvalContext::new(&net, &ia_flows, config.params.weights, config.cfg)?;
            let ia = run_intuitive(&ctx_ia, 2, &space)?;

            // one shared dynamic stream replayed against each setup
            let dynamics = random_station_flows(
                &net,
                profile,
                2_000,
                "d",
                FlowKind::Dynamic,
                derive_seed(base, 12),
            )?;

            for (configuration, solution, fitness) in [
                ("headroom", &run_headroom.best, run_headroom.report.f),
                ("no-headroom", &run_plain.best, run_plain.report.f),
                ("intuitive-futures", &ia.best, ia.report.f),
            ] {
                let StaticAdmission {
                    mut state,
                    admitted,
                    ..
                } = admit_static_set(&ctx_plain, solution);
                let mut dynamic_admitted = 0;
                for flow in &dynamics {
                    let decision = state.admit(flow.clone(), &net, solution, &config.cfg)?;
                    if decision.accepted() {
                        dynamic_admitted += 1;
                    } else {
                        break;
                    }
                }
                rows.push(RuntimeFlowsRow {
                    scenario_profile: profile,
                    repetition: rep,
                    configuration: configuration.into(),
                    static_total: static_flows.len(),
                    static_admitted: admitted,
                    dynamic_admitted,
                    fitness,
                });
            }
        }
    }
    Ok(ExperimentTables {
        preset: Preset::RuntimeFlows,
        results: ResultTable::RuntimeFlows(rows),
        timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_parsing_round_trips() {
        for preset in [
            Preset::Heatmap,
            Preset::Convergence,
            Preset::Comparison,
            Preset::Individual,
            Preset::RuntimeFlows,
        ] {
            assert_eq!(preset.to_string().parse::<Preset>().unwrap(), preset);
        }
        assert!("bogus".parse::<Preset>().is_err());
    }

    #[test]
    fn preset_defaults_match_the_protocol() {
        let convergence = ExperimentConfig::new(Preset::Convergence, 1);
        assert_eq!(convergence.reps, 30);
        assert_eq!(convergence.flows, 150);
        assert_eq!(convergence.params.uniform.window, 10);

        let comparison = ExperimentConfig::new(Preset::Comparison, 1);
        assert_eq!(comparison.flows, 200);
        assert_eq!(comparison.reps, 30);
        assert_eq!(comparison.queue_settings, vec![2, 4]);

        let runtime = ExperimentConfig::new(Preset::RuntimeFlows, 1);
        assert_eq!(runtime.reps, 10);
        assert_eq!(runtime.profiles, vec![1, 2, 3, 4, 5]);

        let heatmap = ExperimentConfig::new(Preset::Heatmap, 1);
        assert_eq!(heatmap.flows, 344);
        assert_eq!(heatmap.grid_step_us, 100);
    }

    #[test]
    fn tiny_heatmap_runs_and_counts_cells() {
        let mut config = ExperimentConfig::new(Preset::Heatmap, 3);
        config.flows = 24;
        config.grid_step_us = 1000;
        let tables = run_experiment(&config).unwrap();
        match tables.results {
            ResultTable::Heatmap(rows) => {
                assert_eq!(rows.len(), 16, "4x4 grid at 1000 us steps");
                assert!(rows.iter().any(|r| r.admitted > 0));
            }
            other => panic!("expected heatmap rows, got {other:?}"),
        }
    }

    #[test]
    fn runtime_flows_static_set_is_30_flows() {
        let mut config = ExperimentConfig::new(Preset::RuntimeFlows, 5);
        config.reps = 1;
        config.profiles = vec![5];
        config.params.uniform.population = 12;
        config.params.max_iterations = 3;
        let tables = run_experiment(&config).unwrap();
        match tables.results {
            ResultTable::RuntimeFlows(rows) => {
                assert_eq!(rows.len(), 3, "three configurations");
                for row in &rows {
                    assert_eq!(row.static_total, 30, "10 flows of profiles 1, 3, 5 each");
                    assert!(row.static_admitted <= 30);
                }
            }
            other => panic!("expected runtime-flows rows, got {other:?}"),
        }
    }
}
