//! Exhaustive enumeration of the uniform-mode bound grid.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{CandidateSolution, SearchSpace};

use super::{FitnessFn, RunResult, TracePoint};

const CHUNK: u64 = 2048;

/// Evaluates every uniform grid combination and returns the optimum,
/// breaking fitness ties towards the lexicographically smallest bound
/// vector. Refuses more than 3 queues unless `allow_large` is set; the
/// grid grows as |S|^n.
pub fn run_exhaustive<F: FitnessFn>(
    objective: &F,
    space: &SearchSpace,
    n_queues: usize,
    allow_large: bool,
) -> Result<RunResult> {
    if n_queues == 0 {
        return Err(Error::Validation(
            "exhaustive search needs at least one queue".into(),
        ));
    }
    if n_queues > 3 && !allow_large {
        return Err(Error::Intractable(format!(
            "exhaustive search over {n_queues} queues enumerates |S|^{n_queues} = {} candidates; \
             pass the large-search override to force it",
            (space.cardinality() as u128).pow(n_queues as u32)
        )));
    }
    let start = Instant::now();
    let card = space.cardinality() as u64;
    let total = card
        .checked_pow(n_queues as u32)
        .ok_or_else(|| Error::Intractable("search space size overflows".into()))?;
    let values: Vec<u32> = space.values().collect();

    // index decoding puts queue 1 in the most significant digit, so
    // ascending indices enumerate bound vectors in lexicographic order
    let decode = |index: u64| -> Vec<u32> {
        let mut bounds = vec![0u32; n_queues];
        let mut rest = index;
        for q in (0..n_queues).rev() {
            bounds[q] = values[(rest % card) as usize];
            rest /= card;
        }
        bounds
    };

    let chunk_starts: Vec<u64> = (0..total).step_by(CHUNK as usize).collect();
    let chunk_bests: Vec<(u64, CandidateSolution, crate::fitness::FitnessReport)> = chunk_starts
        .par_iter()
        .map(|&chunk_start| {
            let end = (chunk_start + CHUNK).min(total);
            let mut best: Option<(u64, CandidateSolution, crate::fitness::FitnessReport)> = None;
            for index in chunk_start..end {
                let solution = CandidateSolution::uniform(decode(index));
                let report = objective.evaluate(&solution);
                let better = match &best {
                    None => true,
                    Some((_, _, b)) => report.f > b.f,
                };
                if better {
                    best = Some((index, solution, report));
                }
            }
            best.expect("chunks are non-empty")
        })
        .collect();

    // sequential reduce in chunk order keeps the smallest index on ties
    let mut best = chunk_bests[0].clone();
    for candidate in chunk_bests.into_iter().skip(1) {
        if candidate.2.f > best.2.f {
            best = candidate;
        }
    }

    let (_, solution, report) = best;
    let trace = vec![TracePoint {
        iteration: 0,
        best_fitness: report.f,
        mean_fitness: report.f,
        wall_ms: start.elapsed().as_millis() as u64,
    }];
    Ok(RunResult {
        best: solution,
        report,
        trace,
        evaluations: total,
        iterations: 0,
        converged: true,
    })
}
