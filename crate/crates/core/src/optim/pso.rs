//! Global-best particle swarm optimization.

use std::time::Instant;

use rand::Rng;

use crate::model::PsoParams;

use super::{
    argmax, evaluate_genomes, init_population, mean_fitness, rng_for, ConvergenceTracker,
    FitnessFn, RunResult, RunSpec, TracePoint,
};

/// Velocity update per dimension:
/// `v <- w*v + c1*u1*(pbest - x) + c2*u2*(gbest - x)` with
/// `u1, u2 ~ U(0,1)`; positions are clamped to the search bounds and
/// snapped to the grid for evaluation. The global best is elitist: it
/// only ever improves.
pub fn run_pso<F: FitnessFn>(objective: &F, spec: &RunSpec, params: &PsoParams) -> RunResult {
    let start = Instant::now();
    let mut rng = rng_for(spec.seed);
    let dims = spec.dims.len();
    let lo = f64::from(spec.space.lower_us);
    let hi = f64::from(spec.space.upper_us);

    let mut positions = init_population(&mut rng, spec);
    let mut velocities = vec![vec![0.0; dims]; spec.population];

    let evals = evaluate_genomes(objective, spec, &positions);
    let mut evaluations = evals.len() as u64;

    let mut pbest_pos = positions.clone();
    let mut pbest_f: Vec<f64> = evals.iter().map(|(_, r)| r.f).collect();

    let g = argmax(&evals);
    let mut gbest_pos = positions[g].clone();
    let (mut gbest_sol, mut gbest_report) = evals[g].clone();

    let mut trace = vec![TracePoint {
        iteration: 0,
        best_fitness: gbest_report.f,
        mean_fitness: mean_fitness(&evals),
        wall_ms: start.elapsed().as_millis() as u64,
    }];
    let mut tracker = ConvergenceTracker::new(spec.window);
    let mut iterations = 0;

    for iteration in 1..=spec.max_iterations {
        for i in 0..spec.population {
            for d in 0..dims {
                let u1: f64 = rng.random();
                let u2: f64 = rng.random();
                let v = params.inertia * velocities[i][d]
                    + params.cognitive * u1 * (pbest_pos[i][d] - positions[i][d])
                    + params.social * u2 * (gbest_pos[d] - positions[i][d]);
                velocities[i][d] = v;
                positions[i][d] = (positions[i][d] + v).clamp(lo, hi);
            }
        }

        let evals = evaluate_genomes(objective, spec, &positions);
        evaluations += evals.len() as u64;
        for i in 0..spec.population {
            if evals[i].1.f > pbest_f[i] {
                pbest_f[i] = evals[i].1.f;
                pbest_pos[i] = positions[i].clone();
            }
        }
        let g = argmax(&evals);
        if evals[g].1.f > gbest_report.f {
            gbest_pos = positions[g].clone();
            gbest_sol = evals[g].0.clone();
            gbest_report = evals[g].1.clone();
        }

        iterations = iteration;
        trace.push(TracePoint {
            iteration,
            best_fitness: gbest_report.f,
            mean_fitness: mean_fitness(&evals),
            wall_ms: start.elapsed().as_millis() as u64,
        });
        tracker.update(gbest_report.f);
        if tracker.converged() {
            break;
        }
    }

    RunResult {
        best: gbest_sol,
        report: gbest_report,
        trace,
        evaluations,
        iterations,
        converged: tracker.converged(),
    }
}
