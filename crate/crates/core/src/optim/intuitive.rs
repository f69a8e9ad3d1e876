//! The intuitive baseline: spread each flow's deadline evenly over its
//! hops, then configure the queues from quantiles of the per-hop values.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::fitness::EvalContext;
use crate::model::{CandidateSolution, SearchSpace};
use crate::routing::{k_shortest_paths, utilization_weights};

use super::{FitnessFn, RunResult, TracePoint};

/// Queue bounds from a multiset of per-hop delay values: queue 1 gets the
/// minimum, queue j (j >= 2) the ((j-1)/q)-quantile (linear
/// interpolation), all snapped down to the grid.
pub fn intuitive_bounds(per_hop_us: &[f64], queues: usize, space: &SearchSpace) -> Vec<u32> {
    debug_assert!(!per_hop_us.is_empty());
    let mut sorted = per_hop_us.to_vec();
    sorted.sort_by(f64::total_cmp);
    (1..=queues)
        .map(|q| {
            let value = if q == 1 {
                sorted[0]
            } else {
                quantile_linear(&sorted, (q - 1) as f64 / queues as f64)
            };
            space.snap_down(value)
        })
        .collect()
}

fn quantile_linear(sorted: &[f64], p: f64) -> f64 {
    let position = (sorted.len() - 1) as f64 * p;
    let lo = position.floor() as usize;
    let frac = position - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    } else {
        sorted[lo]
    }
}

/// Uniform configuration from the static flows' per-hop deadline shares,
/// routed over the empty network.
pub fn run_intuitive(
    ctx: &EvalContext<'_>,
    n_queues: usize,
    space: &SearchSpace,
) -> Result<RunResult> {
    if ctx.static_flows().is_empty() {
        return Err(Error::Validation(
            "the intuitive approach needs a non-empty static flow set".into(),
        ));
    }
    let start = Instant::now();
    let empty_weights = utilization_weights(ctx.net, &vec![0.0; ctx.net.links().len()]);
    let mut per_hop = Vec::with_capacity(ctx.static_flows().len());
    for flow in ctx.static_flows() {
        let paths =
            match k_shortest_paths(ctx.net, &empty_weights, flow.source, flow.destination, 1) {
                Ok(paths) => paths,
                Err(Error::NoPath { .. }) => continue,
                Err(other) => return Err(other),
            };
        let hops = paths[0].hops.max(1);
        per_hop.push(f64::from(flow.deadline_us()) / hops as f64);
    }
    if per_hop.is_empty() {
        return Err(Error::Validation(
            "no static flow has a route to its destination".into(),
        ));
    }

    let solution = CandidateSolution::uniform(intuitive_bounds(&per_hop, n_queues, space));
    let report = FitnessFn::evaluate(ctx, &solution);
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
        evaluations: 1,
        iterations: 0,
        converged: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitness::FitnessWeights;
    use crate::model::{profile_by_id, EvalConfig, Flow, FlowKind, PortIdx};
    use crate::scenarios::{generate_topology, TopologyKind};

    #[test]
    fn quantiles_match_the_worked_example() {
        let values = [50.0, 100.0, 150.0, 200.0];
        let space = SearchSpace::default();
        // q = 2: {min, median}; the 125 us median snaps down to 120
        assert_eq!(intuitive_bounds(&values, 2, &space), vec![50, 120]);
        // q = 4: {min, 25%, 50%, 75%} quantiles
        assert_eq!(intuitive_bounds(&values, 4, &space), vec![50, 80, 120, 160]);
    }

    #[test]
    fn identical_flows_give_identical_bounds() {
        let values = [100.0; 6];
        let space = SearchSpace::default();
        assert_eq!(intuitive_bounds(&values, 3, &space), vec![100, 100, 100]);
    }

    #[test]
    fn line_topology_run_uses_deadline_shares() {
        let net = generate_topology(TopologyKind::Line, 2, 1).unwrap();
        // es4 sits one bridge before the PLC: profile 1 over 1 hop
        let flows = vec![
            Flow {
                id: "f0".into(),
                profile: profile_by_id(1).unwrap(),
                source: net.find_node("es4").unwrap(),
                destination: net.plc().unwrap(),
                kind: FlowKind::Static,
            },
            Flow {
                id: "f1".into(),
                profile: profile_by_id(5).unwrap(),
                source: net.find_node("es1").unwrap(),
                destination: net.plc().unwrap(),
                kind: FlowKind::Static,
            },
        ];
        let ctx = EvalContext::new(
            &net,
            &flows,
            FitnessWeights::default(),
            EvalConfig::default(),
        )
        .unwrap();
        let result = run_intuitive(&ctx, 2, &SearchSpace::default()).unwrap();
        // per-hop values: 250/1 = 250 and 4000/4 = 1000; min = 250,
        // median of {250, 1000} = 625 -> 620
        assert_eq!(result.best.bound_us(PortIdx(0), 1), 250);
        assert_eq!(result.best.bound_us(PortIdx(0), 2), 620);
    }

    #[test]
    fn empty_flow_set_is_an_error() {
        let net = generate_topology(TopologyKind::Line, 2, 1).unwrap();
        let ctx =
            EvalContext::new(&net, &[], FitnessWeights::default(), EvalConfig::default()).unwrap();
        assert!(run_intuitive(&ctx, 2, &SearchSpace::default()).is_err());
    }
}
