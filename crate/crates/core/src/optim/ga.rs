//! Generational genetic algorithm with fitness-rank selection, blend
//! crossover and polynomial bounded mutation.

use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::model::GaParams;

use super::{
    argmax, blend_crossover, evaluate_genomes, init_population, mean_fitness, polynomial_mutation,
    rng_for, ConvergenceTracker, FitnessFn, RunResult, RunSpec, TracePoint,
};

/// Each generation keeps the top `selection_fraction` of the population
/// unchanged (rank by fitness, crowding distance on the decision vector
/// as tie-break) and refills the rest with offspring: blend crossover on
/// mated pairs with probability `crossover_prob`, polynomial mutation on
/// offspring with probability `mutation_prob` (each gene with
/// `gene_prob`). Keeping the survivors intact makes the best-so-far
/// fitness monotone.
pub fn run_ga<F: FitnessFn>(objective: &F, spec: &RunSpec, params: &GaParams) -> RunResult {
    let start = Instant::now();
    let mut rng = rng_for(spec.seed);
    let lo = f64::from(spec.space.lower_us);
    let hi = f64::from(spec.space.upper_us);

    let mut genomes = init_population(&mut rng, spec);
    let mut evals = evaluate_genomes(objective, spec, &genomes);
    let mut evaluations = evals.len() as u64;

    let b = argmax(&evals);
    let (mut best_sol, mut best_report) = evals[b].clone();

    let mut trace = vec![TracePoint {
        iteration: 0,
        best_fitness: best_report.f,
        mean_fitness: mean_fitness(&evals),
        wall_ms: start.elapsed().as_millis() as u64,
    }];
    let mut tracker = ConvergenceTracker::new(spec.window);
    let mut iterations = 0;

    let n_parents = ((spec.population as f64 * params.selection_fraction).ceil() as usize)
        .clamp(1, spec.population);

    for iteration in 1..=spec.max_iterations {
        let order = rank_population(&genomes, &evals);
        let parents: Vec<Vec<f64>> = order[..n_parents]
            .iter()
            .map(|&i| genomes[i].clone())
            .collect();
        let parent_evals: Vec<_> = order[..n_parents]
            .iter()
            .map(|&i| evals[i].clone())
            .collect();

        // offspring by variation over a shuffled mating pool
        let mut offspring: Vec<Vec<f64>> = Vec::with_capacity(spec.population - n_parents);
        let mut pool: Vec<usize> = Vec::new();
        while offspring.len() < spec.population - n_parents {
            if pool.len() < 2 {
                let mut fresh: Vec<usize> = (0..parents.len()).collect();
                fresh.shuffle(&mut rng);
                pool.extend(fresh);
                if parents.len() == 1 {
                    pool.push(0);
                }
            }
            let a = pool.remove(0);
            let b = pool.remove(0);
            let mut child_a = parents[a].clone();
            let mut child_b = parents[b].clone();
            if rng.random::<f64>() < params.crossover_prob {
                blend_crossover(
                    &mut rng,
                    &mut child_a,
                    &mut child_b,
                    params.blend_alpha,
                    lo,
                    hi,
                );
            }
            for child in [&mut child_a, &mut child_b] {
                if rng.random::<f64>() < params.mutation_prob {
                    polynomial_mutation(
                        &mut rng,
                        child,
                        lo,
                        hi,
                        params.mutation_eta,
                        params.gene_prob,
                    );
                }
            }
            offspring.push(child_a);
            if offspring.len() < spec.population - n_parents {
                offspring.push(child_b);
            }
        }

        let offspring_evals = evaluate_genomes(objective, spec, &offspring);
        evaluations += offspring_evals.len() as u64;

        genomes = parents;
        genomes.extend(offspring);
        evals = parent_evals;
        evals.extend(offspring_evals);

        let b = argmax(&evals);
        if evals[b].1.f > best_report.f {
            best_sol = evals[b].0.clone();
            best_report = evals[b].1.clone();
        }

        iterations = iteration;
        trace.push(TracePoint {
            iteration,
            best_fitness: best_report.f,
            mean_fitness: mean_fitness(&evals),
            wall_ms: start.elapsed().as_millis() as u64,
        });
        tracker.update(best_report.f);
        if tracker.converged() {
            break;
        }
    }

    RunResult {
        best: best_sol,
        report: best_report,
        trace,
        evaluations,
        iterations,
        converged: tracker.converged(),
    }
}

/// Indices sorted best-first: fitness descending, crowding distance
/// descending within equal fitness, index as the final tie-break.
#[allow(clippy::needless_range_loop)]
fn rank_population(
    genomes: &[Vec<f64>],
    evals: &[(
        crate::model::CandidateSolution,
        crate::fitness::FitnessReport,
    )],
) -> Vec<usize> {
    let n = genomes.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| evals[b].1.f.total_cmp(&evals[a].1.f).then(a.cmp(&b)));

    // crowding distances within each equal-fitness group
    let mut crowding = vec![0.0f64; n];
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && evals[order[end]].1.f == evals[order[start]].1.f {
            end += 1;
        }
        let group = &order[start..end];
        if group.len() > 2 {
            let dims = genomes[group[0]].len();
            for d in 0..dims {
                let mut by_gene: Vec<usize> = group.to_vec();
                by_gene.sort_by(|&a, &b| genomes[a][d].total_cmp(&genomes[b][d]).then(a.cmp(&b)));
                let min = genomes[by_gene[0]][d];
                let max = genomes[*by_gene.last().unwrap()][d];
                crowding[by_gene[0]] = f64::INFINITY;
                crowding[*by_gene.last().unwrap()] = f64::INFINITY;
                if max > min {
                    for w in 1..by_gene.len() - 1 {
                        let gap = genomes[by_gene[w + 1]][d] - genomes[by_gene[w - 1]][d];
                        crowding[by_gene[w]] += gap / (max - min);
                    }
                }
            }
        } else {
            for &i in group {
                crowding[i] = f64::INFINITY;
            }
        }
        start = end;
    }

    order.sort_by(|&a, &b| {
        evals[b]
            .1
            .f
            .total_cmp(&evals[a].1.f)
            .then(crowding[b].total_cmp(&crowding[a]))
            .then(a.cmp(&b))
    });
    order
}
