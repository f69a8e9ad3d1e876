//! Meta-heuristic optimizers over the delay-bound search space: PSO and
//! GA (uniform and warm-started individual modes), exhaustive search and
//! the intuitive quantile-based baseline.
//!
//! Candidate positions are continuous in `[lower, upper]` microseconds
//! and snapped to the discrete grid for evaluation. Fitness evaluations
//! within a generation run in parallel; all random draws happen in the
//! sequential driver, so results are independent of the thread count.

mod exhaustive;
mod ga;
mod intuitive;
mod pso;

pub use exhaustive::run_exhaustive;
pub use ga::run_ga;
pub use intuitive::{intuitive_bounds, run_intuitive};
pub use pso::run_pso;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fitness::{evaluate, EvalContext, FitnessReport};
use crate::model::{
    CandidateSolution, NetworkModel, OptimizerParams, PortIdx, SearchSpace, SolutionMode,
};

/// Objective evaluated by the optimizers. Implemented by
/// [`EvalContext`]; tests substitute synthetic landscapes.
pub trait FitnessFn: Sync {
    fn evaluate(&self, solution: &CandidateSolution) -> FitnessReport;
}

impl FitnessFn for EvalContext<'_> {
    fn evaluate(&self, solution: &CandidateSolution) -> FitnessReport {
        evaluate(self, solution)
    }
}

/// Decision-vector layout: one gene per optimized delay bound.
#[derive(Clone, Debug, PartialEq)]
pub enum ProblemDims {
    Uniform { queues: usize },
    Individual { queues_per_port: Vec<usize> },
}

impl ProblemDims {
    pub fn for_mode(net: &NetworkModel, mode: SolutionMode) -> Result<Self> {
        let dims = match mode {
            SolutionMode::Uniform => ProblemDims::Uniform {
                queues: net.max_queue_count(),
            },
            SolutionMode::Individual => ProblemDims::Individual {
                queues_per_port: (0..net.ports().len())
                    .map(|p| net.port_queues(PortIdx(p)))
                    .collect(),
            },
        };
        if dims.is_empty() {
            return Err(Error::Validation(
                "network has no CBS ports to optimize".into(),
            ));
        }
        Ok(dims)
    }

    pub fn len(&self) -> usize {
        match self {
            ProblemDims::Uniform { queues } => *queues,
            ProblemDims::Individual { queues_per_port } => queues_per_port.iter().sum(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Snaps a continuous genome onto the grid as a candidate solution.
    pub fn to_solution(&self, genome: &[f64], space: &SearchSpace) -> CandidateSolution {
        debug_assert_eq!(genome.len(), self.len());
        match self {
            ProblemDims::Uniform { .. } => {
                CandidateSolution::uniform(genome.iter().map(|&x| space.snap_nearest(x)).collect())
            }
            ProblemDims::Individual { queues_per_port } => {
                let mut bounds = Vec::with_capacity(queues_per_port.len());
                let mut offset = 0;
                for &q in queues_per_port {
                    bounds.push(
                        genome[offset..offset + q]
                            .iter()
                            .map(|&x| space.snap_nearest(x))
                            .collect(),
                    );
                    offset += q;
                }
                CandidateSolution::individual(bounds)
            }
        }
    }

    /// Continuous genome matching an existing solution (warm starts).
    pub fn genome_of(&self, solution: &CandidateSolution) -> Vec<f64> {
        match self {
            ProblemDims::Uniform { queues } => (1..=*queues)
                .map(|q| f64::from(solution.bound_us(PortIdx(0), q)))
                .collect(),
            ProblemDims::Individual { queues_per_port } => {
                let mut genome = Vec::with_capacity(self.len());
                for (p, &q) in queues_per_port.iter().enumerate() {
                    for queue in 1..=q {
                        genome.push(f64::from(solution.bound_us(PortIdx(p), queue)));
                    }
                }
                genome
            }
        }
    }
}

/// Initial-population policy.
#[derive(Clone, Debug)]
pub enum Init {
    Random,
    /// Warm start: the genome itself plus mutated copies.
    Seeded {
        genome: Vec<f64>,
        eta: f64,
        gene_prob: f64,
    },
}

/// Everything one heuristic run needs besides its operator parameters.
#[derive(Clone, Debug)]
pub struct RunSpec {
    pub space: SearchSpace,
    pub dims: ProblemDims,
    pub population: usize,
    pub window: usize,
    pub max_iterations: u32,
    pub seed: u64,
    pub init: Init,
}

/// Per-iteration record for convergence plots. Wall time is
/// informational and not covered by determinism guarantees.
#[derive(Clone, Debug, Serialize)]
pub struct TracePoint {
    pub iteration: u32,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub wall_ms: u64,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub best: CandidateSolution,
    pub report: FitnessReport,
    pub trace: Vec<TracePoint>,
    pub evaluations: u64,
    pub iterations: u32,
    pub converged: bool,
}

/// Converged when the best fitness stayed exactly equal for `window`
/// consecutive iterations.
#[derive(Clone, Debug)]
pub struct ConvergenceTracker {
    window: usize,
    streak: usize,
    last: Option<f64>,
}

impl ConvergenceTracker {
    pub fn new(window: usize) -> Self {
        Self {
            window,
            streak: 0,
            last: None,
        }
    }

    pub fn update(&mut self, best: f64) {
        match self.last {
            Some(prev) if prev == best => self.streak += 1,
            _ => self.streak = 0,
        }
        self.last = Some(best);
    }

    pub fn converged(&self) -> bool {
        self.streak >= self.window
    }
}

/// Deterministic seed derivation (splitmix64 over base xor salt).
pub fn derive_seed(base: u64, salt: u64) -> u64 {
    let mut z = base ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub(crate) fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Evaluates a batch of genomes; parallel, order-preserving.
pub(crate) fn evaluate_genomes<F: FitnessFn>(
    objective: &F,
    spec: &RunSpec,
    genomes: &[Vec<f64>],
) -> Vec<(CandidateSolution, FitnessReport)> {
    genomes
        .par_iter()
        .map(|genome| {
            let solution = spec.dims.to_solution(genome, &spec.space);
            let report = objective.evaluate(&solution);
            (solution, report)
        })
        .collect()
}

pub(crate) fn mean_fitness(reports: &[(CandidateSolution, FitnessReport)]) -> f64 {
    if reports.is_empty() {
        return 0.0;
    }
    reports.iter().map(|(_, r)| r.f).sum::<f64>() / reports.len() as f64
}

/// Index of the best report; ties keep the earliest individual.
pub(crate) fn argmax(reports: &[(CandidateSolution, FitnessReport)]) -> usize {
    let mut best = 0;
    for i in 1..reports.len() {
        if reports[i].1.f > reports[best].1.f {
            best = i;
        }
    }
    best
}

pub(crate) fn init_population(rng: &mut ChaCha8Rng, spec: &RunSpec) -> Vec<Vec<f64>> {
    let lo = f64::from(spec.space.lower_us);
    let hi = f64::from(spec.space.upper_us);
    let dims = spec.dims.len();
    match &spec.init {
        Init::Random => (0..spec.population)
            .map(|_| (0..dims).map(|_| rng.random_range(lo..=hi)).collect())
            .collect(),
        Init::Seeded {
            genome,
            eta,
            gene_prob,
        } => {
            let mut population = Vec::with_capacity(spec.population);
            population.push(genome.clone());
            while population.len() < spec.population {
                let mut copy = genome.clone();
                polynomial_mutation(rng, &mut copy, lo, hi, *eta, *gene_prob);
                population.push(copy);
            }
            population
        }
    }
}

/// Polynomial bounded mutation with distribution index `eta`; each gene
/// mutates with probability `gene_prob`.
pub(crate) fn polynomial_mutation(
    rng: &mut ChaCha8Rng,
    genome: &mut [f64],
    lo: f64,
    hi: f64,
    eta: f64,
    gene_prob: f64,
) {
    let span = hi - lo;
    for gene in genome.iter_mut() {
        if rng.random::<f64>() >= gene_prob {
            continue;
        }
        let x = *gene;
        let delta_1 = (x - lo) / span;
        let delta_2 = (hi - x) / span;
        let r: f64 = rng.random();
        let mut_pow = 1.0 / (eta + 1.0);
        let delta_q = if r < 0.5 {
            let xy = 1.0 - delta_1;
            let val = 2.0 * r + (1.0 - 2.0 * r) * xy.powf(eta + 1.0);
            val.powf(mut_pow) - 1.0
        } else {
            let xy = 1.0 - delta_2;
            let val = 2.0 * (1.0 - r) + 2.0 * (r - 0.5) * xy.powf(eta + 1.0);
            1.0 - val.powf(mut_pow)
        };
        *gene = (x + delta_q * span).clamp(lo, hi);
    }
}

/// Blend crossover: per gene, children lie in
/// `[min - alpha * range, max + alpha * range]`, clamped to the bounds.
pub(crate) fn blend_crossover(
    rng: &mut ChaCha8Rng,
    a: &mut [f64],
    b: &mut [f64],
    alpha: f64,
    lo: f64,
    hi: f64,
) {
    for d in 0..a.len() {
        let u: f64 = rng.random();
        let gamma = (1.0 + 2.0 * alpha) * u - alpha;
        let (x1, x2) = (a[d], b[d]);
        a[d] = ((1.0 - gamma) * x1 + gamma * x2).clamp(lo, hi);
        b[d] = (gamma * x1 + (1.0 - gamma) * x2).clamp(lo, hi);
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Heuristic {
    Pso,
    Ga,
}

impl Heuristic {
    pub fn run<F: FitnessFn>(
        self,
        objective: &F,
        spec: &RunSpec,
        params: &OptimizerParams,
    ) -> RunResult {
        match self {
            Heuristic::Pso => run_pso(objective, spec, &params.pso),
            Heuristic::Ga => run_ga(objective, spec, &params.ga),
        }
    }
}

pub struct WarmStartResult {
    pub uniform: RunResult,
    pub individual: RunResult,
}

/// Runs (or reuses) a uniform-mode optimization, then an individual-mode
/// run whose population is seeded with the expanded uniform optimum. The
/// seed stays in the initial population under elitism, so the individual
/// result never scores below the uniform one.
pub fn run_warm_started<'a>(
    ctx: &EvalContext<'a>,
    heuristic: Heuristic,
    params: &OptimizerParams,
    space: SearchSpace,
    seed: u64,
    uniform_run: Option<RunResult>,
) -> Result<WarmStartResult> {
    let uniform = match uniform_run {
        Some(run) => run,
        None => {
            let spec = RunSpec {
                space,
                dims: ProblemDims::for_mode(ctx.net, SolutionMode::Uniform)?,
                population: params.uniform.population,
                window: params.uniform.window,
                max_iterations: params.max_iterations,
                seed,
                init: Init::Random,
            };
            heuristic.run(ctx, &spec, params)
        }
    };

    let dims = ProblemDims::for_mode(ctx.net, SolutionMode::Individual)?;
    let expanded = uniform.best.expand(ctx.net);
    let genome = dims.genome_of(&expanded);

    if params.max_iterations == 0 {
        // zero further iterations: the expanded uniform solution itself
        let report = crate::fitness::evaluate(ctx, &expanded);
        let individual = RunResult {
            trace: vec![TracePoint {
                iteration: 0,
                best_fitness: report.f,
                mean_fitness: report.f,
                wall_ms: 0,
            }],
            best: expanded,
            report,
            evaluations: 1,
            iterations: 0,
            converged: false,
        };
        return Ok(WarmStartResult {
            uniform,
            individual,
        });
    }

    let spec = RunSpec {
        space,
        dims,
        population: params.individual.population,
        window: params.individual.window,
        max_iterations: params.max_iterations,
        seed: derive_seed(seed, 0x1),
        init: Init::Seeded {
            genome,
            eta: params.ga.mutation_eta,
            gene_prob: params.ga.gene_prob,
        },
    };
    let individual = heuristic.run(ctx, &spec, params);
    debug_assert!(individual.report.f >= uniform.report.f);
    Ok(WarmStartResult {
        uniform,
        individual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Unimodal toy landscape over uniform bounds: peak at 500 us.
    pub(crate) struct Toy;

    impl FitnessFn for Toy {
        fn evaluate(&self, solution: &CandidateSolution) -> FitnessReport {
            let bounds = solution.uniform_bounds().expect("toy runs in uniform mode");
            let f = bounds
                .iter()
                .map(|&b| 1.0 - (f64::from(b) - 500.0).abs() / 4000.0)
                .sum::<f64>()
                / bounds.len() as f64;
            FitnessReport::scalar(f)
        }
    }

    pub(crate) fn toy_spec(dims: usize, population: usize, max_iterations: u32) -> RunSpec {
        RunSpec {
            space: SearchSpace::default(),
            dims: ProblemDims::Uniform { queues: dims },
            population,
            window: 15,
            max_iterations,
            seed: 42,
            init: Init::Random,
        }
    }

    #[test]
    fn convergence_tracker_counts_unchanged_iterations() {
        let mut tracker = ConvergenceTracker::new(3);
        for f in [0.1, 0.2, 0.2, 0.2] {
            tracker.update(f);
            assert!(!tracker.converged());
        }
        tracker.update(0.2);
        assert!(tracker.converged());
        tracker.update(0.3);
        assert!(!tracker.converged());
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(7, 3), derive_seed(7, 3));
    }

    #[test]
    fn genome_round_trips_through_solutions() {
        let dims = ProblemDims::Individual {
            queues_per_port: vec![2, 3],
        };
        let genome = vec![100.0, 200.0, 300.0, 400.0, 500.0];
        let solution = dims.to_solution(&genome, &SearchSpace::default());
        assert_eq!(dims.genome_of(&solution), genome);
    }

    #[test]
    fn mutation_respects_bounds() {
        let mut rng = rng_for(9);
        for _ in 0..100 {
            let mut genome = vec![10.0, 4000.0, 1700.0];
            polynomial_mutation(&mut rng, &mut genome, 10.0, 4000.0, 70.0, 1.0);
            for g in &genome {
                assert!((10.0..=4000.0).contains(g));
            }
        }
    }

    #[test]
    fn crossover_respects_bounds() {
        let mut rng = rng_for(9);
        for _ in 0..100 {
            let mut a = vec![10.0, 3000.0];
            let mut b = vec![4000.0, 20.0];
            blend_crossover(&mut rng, &mut a, &mut b, 0.15, 10.0, 4000.0);
            for g in a.iter().chain(b.iter()) {
                assert!((10.0..=4000.0).contains(g));
            }
        }
    }
}
