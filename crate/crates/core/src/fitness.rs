//! Multi-objective fitness of a candidate solution:
//! `f = w1 * f_R + w2 * f_A + w3 * f_D`, with an invalid-solution rule
//! that zeroes configurations whose high-priority queues cannot carry
//! any time-sensitive traffic while lower ones do.

use serde::{Deserialize, Serialize};

use crate::admission::ReservationState;
use crate::error::{Error, Result};
pub use crate::model::FitnessWeights;
use crate::model::{
    profile_catalog, CandidateSolution, EvalConfig, Flow, FlowKind, NetworkModel, PortIdx,
};
use crate::netcalc::{port_feasible, TokenBucketCurve};

/// Fitness value and diagnostic breakdown for one candidate solution.
///
/// All components lie in [0, 1]. When `invalid` is set, `f` is 0 and the
/// headroom objective is not evaluated.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessReport {
    pub f: f64,
    pub f_r: f64,
    pub f_a: f64,
    pub f_d: f64,
    pub invalid: bool,
    pub admitted: usize,
    pub total_flows: usize,
    /// Utility per static flow, 0 for unadmitted flows.
    pub flow_utilities: Vec<(String, f64)>,
    /// Achieved/requested ratio per headroom entry.
    pub headroom_ratios: Vec<f64>,
}

impl FitnessReport {
    /// Bare report carrying only a scalar value; used by synthetic
    /// objectives in optimizer tests.
    pub fn scalar(f: f64) -> Self {
        Self {
            f,
            f_r: f,
            f_a: 1.0,
            f_d: 1.0,
            invalid: false,
            admitted: 0,
            total_flows: 0,
            flow_utilities: Vec::new(),
            headroom_ratios: Vec::new(),
        }
    }
}

/// Immutable evaluation context shared by all candidate evaluations of
/// one optimization run.
#[derive(Clone, Debug)]
pub struct EvalContext<'a> {
    pub net: &'a NetworkModel,
    static_flows: Vec<Flow>,
    pub weights: FitnessWeights,
    pub cfg: EvalConfig,
}

impl<'a> EvalContext<'a> {
    /// Builds a context over the static subset of `flows`, admitted in
    /// the canonical order (deadline ascending, id ascending).
    pub fn new(
        net: &'a NetworkModel,
        flows: &[Flow],
        weights: FitnessWeights,
        cfg: EvalConfig,
    ) -> Result<Self> {
        weights.validate()?;
        if cfg.k_paths == 0 {
            return Err(Error::Validation("k_paths must be >= 1".into()));
        }
        let mut static_flows: Vec<Flow> = flows
            .iter()
            .filter(|f| f.kind == FlowKind::Static)
            .cloned()
            .collect();
        let mut ids = std::collections::HashSet::new();
        for flow in &static_flows {
            net.validate_flow(flow)?;
            if !ids.insert(flow.id.clone()) {
                return Err(Error::Validation(format!(
                    "duplicate flow id `{}`",
                    flow.id
                )));
            }
        }
        static_flows.sort_by(|a, b| {
            a.deadline_us()
                .cmp(&b.deadline_us())
                .then_with(|| a.id.cmp(&b.id))
        });
        Ok(Self {
            net,
            static_flows,
            weights,
            cfg,
        })
    }

    pub fn static_flows(&self) -> &[Flow] {
        &self.static_flows
    }
}

/// Utility of one flow given its achieved path delay: 1 on the plateau
/// `[0.7 * D_tau, D_tau]`, a linear ramp through the origin below it, 0
/// past the deadline.
pub fn utility(deadline_us: u32, d_p_us: f64) -> f64 {
    let deadline = f64::from(deadline_us);
    let knee = 0.7 * deadline;
    if d_p_us > deadline {
        0.0
    } else if d_p_us >= knee {
        1.0
    } else {
        d_p_us / knee
    }
}

/// Evaluates a candidate solution on a fresh reservation state.
pub fn evaluate(ctx: &EvalContext<'_>, solution: &CandidateSolution) -> FitnessReport {
    let StaticAdmission {
        state,
        admitted,
        utilities,
    } = admit_static_set(ctx, solution);
    let n = ctx.static_flows.len();
    let f_r = if n == 0 {
        1.0
    } else {
        admitted as f64 / n as f64
    };
    let f_d = if n == 0 {
        1.0
    } else {
        utilities.iter().map(|(_, u)| u).sum::<f64>() / n as f64
    };
    let invalid = invalid_check(ctx, solution, &state);

    let (f_a, ratios) = if invalid {
        (0.0, Vec::new())
    } else {
        headroom_score(ctx, solution, &state)
    };

    let f = if invalid {
        0.0
    } else {
        ctx.weights.reservation * f_r
            + ctx.weights.headroom * f_a
            + ctx.weights.deadline_match * f_d
    };

    FitnessReport {
        f,
        f_r,
        f_a,
        f_d,
        invalid,
        admitted,
        total_flows: ctx.static_flows.len(),
        flow_utilities: utilities,
        headroom_ratios: ratios,
    }
}

/// Result of admitting the static set in canonical order.
pub struct StaticAdmission {
    pub state: ReservationState,
    pub admitted: usize,
    /// Utility per static flow, 0 for unadmitted flows.
    pub utilities: Vec<(String, f64)>,
}

/// Admits the context's static flows against a fresh reservation state;
/// the building block of f_R/f_D and the runtime-flow experiments.
pub fn admit_static_set(ctx: &EvalContext<'_>, solution: &CandidateSolution) -> StaticAdmission {
    let mut state = ReservationState::new(ctx.net);
    let mut utilities = Vec::with_capacity(ctx.static_flows.len());
    let mut admitted = 0;
    for flow in &ctx.static_flows {
        let decision = state
            .admit(flow.clone(), ctx.net, solution, &ctx.cfg)
            .expect("static flows are validated at context construction");
        let u = match decision.d_p_us() {
            Some(d_p) => {
                admitted += 1;
                utility(flow.deadline_us(), f64::from(d_p))
            }
            None => 0.0,
        };
        utilities.push((flow.id.clone(), u));
    }
    StaticAdmission {
        state,
        admitted,
        utilities,
    }
}

/// Largest per-hop delay budget any catalog profile can spend on one hop.
fn max_per_hop_budget_us(net: &NetworkModel) -> f64 {
    let mpl = net.max_path_len().max(1) as f64;
    profile_catalog()
        .iter()
        .map(|p| f64::from(p.max_latency_us) / mpl)
        .fold(0.0, f64::max)
}

/// A solution is invalid when some port has a queue `i` that no traffic
/// profile could use (its bound exceeds every profile deadline divided by
/// the maximum path length) while a lower-priority queue `j > i` carries
/// admitted traffic.
pub fn invalid_check(
    ctx: &EvalContext<'_>,
    solution: &CandidateSolution,
    state: &ReservationState,
) -> bool {
    let max_budget = max_per_hop_budget_us(ctx.net);
    for p in 0..ctx.net.ports().len() {
        let port = PortIdx(p);
        let queues = ctx.net.port_queues(port);
        let mut blocked_above = false;
        for q in 1..=queues {
            let unusable = f64::from(solution.bound_us(port, q)) > max_budget;
            let used = !state.aggregate(port, q).is_zero();
            if blocked_above && used {
                return true;
            }
            if unusable {
                blocked_above = true;
            }
        }
    }
    false
}

/// Mean achieved/requested ratio over the headroom entries.
///
/// Per entry, the per-hop budget is the profile deadline divided by the
/// maximum path length; the matching queue is the one with the largest
/// configured bound within that budget. A synthetic aggregate of `n`
/// virtual profile flows (n real-valued, burst scaled proportionally) is
/// injected there on top of the static reservations, and `n` is pushed to
/// the feasibility limit by bisection.
fn headroom_score(
    ctx: &EvalContext<'_>,
    solution: &CandidateSolution,
    state: &ReservationState,
) -> (f64, Vec<f64>) {
    if ctx.net.headroom.is_empty() {
        return (1.0, Vec::new());
    }
    let mpl = ctx.net.max_path_len().max(1) as f64;
    let mut ratios = Vec::with_capacity(ctx.net.headroom.len());
    for entry in &ctx.net.headroom {
        let port = ctx
            .net
            .port_of_link(entry.link)
            .expect("headroom entries are validated to sit on ports");
        let link = ctx.net.link(entry.link);
        let profile = profile_catalog()
            .into_iter()
            .find(|p| p.id == entry.profile)
            .expect("headroom profiles are validated");
        let budget_us = f64::from(profile.max_latency_us) / mpl;
        let requested_bps = entry.fraction * link.rate_bps;

        let queues = ctx.net.port_queues(port);
        let matching = (1..=queues)
            .filter(|&q| f64::from(solution.bound_us(port, q)) <= budget_us)
            .max_by_key(|&q| (solution.bound_us(port, q), q));
        let Some(queue) = matching else {
            ratios.push(0.0);
            continue;
        };

        let unit = TokenBucketCurve {
            burst_bits: profile.burst_bits(),
            rate_bps: profile.rate_bps(),
        };
        let feasible = |n: f64| -> bool {
            let states = port_states_with_extra(ctx.net, solution, state, port, queue, unit, n);
            port_feasible(&states, link.rate_bps, ctx.net.reservable_fraction).is_ok()
        };

        let n_requested = requested_bps / unit.rate_bps;
        let ratio = if feasible(n_requested) {
            1.0
        } else {
            // bisect the feasible prefix [0, n*] to the configured
            // rate resolution
            let tol_n = (ctx.cfg.fa_rate_tolerance * link.rate_bps / unit.rate_bps).max(1e-9);
            let mut lo = 0.0;
            let mut hi = n_requested;
            while hi - lo > tol_n {
                let mid = 0.5 * (lo + hi);
                if feasible(mid) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            (lo * unit.rate_bps / requested_bps).min(1.0)
        };
        ratios.push(ratio);
    }
    let f_a = ratios.iter().sum::<f64>() / ratios.len() as f64;
    (f_a, ratios)
}

fn port_states_with_extra(
    net: &NetworkModel,
    solution: &CandidateSolution,
    state: &ReservationState,
    port: PortIdx,
    queue: usize,
    unit: TokenBucketCurve,
    n: f64,
) -> Vec<crate::netcalc::QueueState> {
    (1..=net.port_queues(port))
        .map(|q| {
            let mut aggregate = state.aggregate(port, q);
            if q == queue {
                aggregate += unit.scaled(n);
            }
            crate::netcalc::QueueState {
                bound_us: f64::from(solution.bound_us(port, q)),
                aggregate,
                l_low_bits: crate::netcalc::L_LOW_DEFAULT_BITS,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{load_network, profile_by_id, HeadroomEntry, SearchSpace};

    const TWO_HOP_DOC: &str = r#"
format_version = 1

[[node]]
id = "b1"
kind = "bridge"
[[node]]
id = "b2"
kind = "bridge"
[[node]]
id = "es1"
kind = "end-station"
[[node]]
id = "plc"
kind = "end-station"
plc = true

[[link]]
from = "es1"
to = "b1"
rate_bps = 1e9
queues = 2
[[link]]
from = "b1"
to = "b2"
rate_bps = 1e9
queues = 2
[[link]]
from = "b2"
to = "plc"
rate_bps = 1e9
queues = 2
"#;

    fn static_flow(net: &NetworkModel, id: &str, profile: u8) -> Flow {
        Flow {
            id: id.into(),
            profile: profile_by_id(profile).unwrap(),
            source: net.find_node("es1").unwrap(),
            destination: net.find_node("plc").unwrap(),
            kind: FlowKind::Static,
        }
    }

    #[test]
    fn utility_shape() {
        assert_eq!(utility(250, 250.0), 1.0);
        assert_eq!(utility(250, 0.7 * 250.0), 1.0);
        assert_eq!(utility(250, 0.0), 0.0);
        assert_eq!(utility(250, 250.0 + 1e-9), 0.0);
        // D_p = 0.5 * D_tau -> 0.5 / 0.7
        let u = utility(1000, 500.0);
        assert!((u - 0.5 / 0.7).abs() < 1e-12);
        assert!((u - 0.714_285_714).abs() < 1e-6);
    }

    #[test]
    fn weighted_sum_matches_hand_value() {
        // f_R = 1, f_A = 0.5, f_D = 1 -> 0.9 + 0.045 + 0.01 = 0.955
        let w = FitnessWeights::default();
        let f = w.reservation * 1.0 + w.headroom * 0.5 + w.deadline_match * 1.0;
        assert!((f - 0.955).abs() < 1e-12);
    }

    #[test]
    fn empty_static_set_scores_one() {
        let net = load_network(TWO_HOP_DOC).unwrap();
        let ctx =
            EvalContext::new(&net, &[], FitnessWeights::default(), EvalConfig::default()).unwrap();
        let report = evaluate(&ctx, &CandidateSolution::uniform(vec![100, 1000]));
        assert_eq!(report.f_r, 1.0);
        assert_eq!(report.f_d, 1.0);
        assert_eq!(report.f_a, 1.0);
        assert_eq!(report.f, 1.0);
        assert!(!report.invalid);
    }

    #[test]
    fn unreachable_deadlines_zero_f_r() {
        let net = load_network(TWO_HOP_DOC).unwrap();
        // profile-1 deadlines (250 us) cannot be met with 4000 us bounds
        let flows: Vec<Flow> = (0..4)
            .map(|i| static_flow(&net, &format!("f{i}"), 1))
            .collect();
        let ctx = EvalContext::new(
            &net,
            &flows,
            FitnessWeights::default(),
            EvalConfig::default(),
        )
        .unwrap();
        let report = evaluate(&ctx, &CandidateSolution::uniform(vec![4000, 4000]));
        assert_eq!(report.f_r, 0.0);
        assert_eq!(report.admitted, 0);
    }

    #[test]
    fn all_flows_at_deadline_give_full_fitness() {
        let net = load_network(TWO_HOP_DOC).unwrap();
        // 2 hops of 2000 us match profile 5's deadline exactly; utility
        // plateau gives f_D = 1, and there is no headroom spec.
        let flows = vec![static_flow(&net, "f0", 5)];
        let ctx = EvalContext::new(
            &net,
            &flows,
            FitnessWeights::default(),
            EvalConfig::default(),
        )
        .unwrap();
        let report = evaluate(&ctx, &CandidateSolution::uniform(vec![1000, 2000]));
        assert_eq!(report.f_r, 1.0);
        assert_eq!(report.f_d, 1.0);
        assert_eq!(report.f, 1.0);
    }

    #[test]
    fn invalid_configuration_scores_zero() {
        let net = load_network(TWO_HOP_DOC).unwrap();
        // max path length is 2, so budgets cap at 2000 us: a 4000 us
        // queue 1 cannot serve any profile while queue 2 carries traffic
        let flows = vec![static_flow(&net, "f0", 5)];
        let ctx = EvalContext::new(
            &net,
            &flows,
            FitnessWeights::default(),
            EvalConfig::default(),
        )
        .unwrap();
        assert_eq!(net.max_path_len(), 2);
        let report = evaluate(&ctx, &CandidateSolution::uniform(vec![4000, 100]));
        assert!(report.invalid);
        assert_eq!(report.f, 0.0);
        assert_eq!(report.f_r, 1.0, "the flow itself is admissible via queue 2");
    }

    #[test]
    fn all_queues_used_is_valid() {
        let net = load_network(TWO_HOP_DOC).unwrap();
        let flows = vec![static_flow(&net, "f0", 1), static_flow(&net, "f1", 5)];
        let ctx = EvalContext::new(
            &net,
            &flows,
            FitnessWeights::default(),
            EvalConfig::default(),
        )
        .unwrap();
        let report = evaluate(&ctx, &CandidateSolution::uniform(vec![100, 2000]));
        assert!(!report.invalid);
        assert!(report.f > 0.0);
    }

    #[test]
    fn vacuous_network_is_valid() {
        let net = load_network(TWO_HOP_DOC).unwrap();
        let ctx =
            EvalContext::new(&net, &[], FitnessWeights::default(), EvalConfig::default()).unwrap();
        let report = evaluate(&ctx, &CandidateSolution::uniform(vec![4000, 4000]));
        assert!(!report.invalid, "unused queues alone do not invalidate");
    }

    fn single_hop_net(headroom_fraction: Option<(u8, f64)>) -> NetworkModel {
        let doc = r#"
format_version = 1

[[node]]
id = "b1"
kind = "bridge"
[[node]]
id = "es1"
kind = "end-station"
[[node]]
id = "plc"
kind = "end-station"
plc = true

[[link]]
from = "es1"
to = "b1"
rate_bps = 1e9
queues = 2
[[link]]
from = "b1"
to = "plc"
rate_bps = 1e9
queues = 2
"#;
        let net = load_network(doc).unwrap();
        match headroom_fraction {
            None => net,
            Some((profile, fraction)) => {
                let link = net.find_link("b1->plc").unwrap();
                let (nodes, links) = (net.nodes().to_vec(), net.links().to_vec());
                NetworkModel::new(
                    nodes,
                    links,
                    vec![HeadroomEntry {
                        link,
                        profile,
                        fraction,
                    }],
                    1.0,
                )
                .unwrap()
            }
        }
    }

    #[test]
    fn headroom_half_gigabit_of_profile5_is_satisfiable() {
        let net = single_hop_net(Some((5, 0.5)));
        assert_eq!(net.max_path_len(), 1);
        let ctx =
            EvalContext::new(&net, &[], FitnessWeights::default(), EvalConfig::default()).unwrap();
        let solution = CandidateSolution::uniform(vec![2000, 4000]);
        let report = evaluate(&ctx, &solution);
        assert_eq!(report.headroom_ratios, vec![1.0]);
        assert_eq!(report.f_a, 1.0);

        // oracle: discrete profile-5 flows admit one by one until the
        // requested 500 Mbit/s aggregate is reached
        let mut state = ReservationState::new(&net);
        let mut total_rate = 0.0;
        let mut n = 0;
        while total_rate < 0.5e9 {
            let flow = Flow {
                id: format!("d{n:04}"),
                profile: profile_by_id(5).unwrap(),
                source: net.find_node("es1").unwrap(),
                destination: net.find_node("plc").unwrap(),
                kind: FlowKind::Dynamic,
            };
            let decision = state.admit(flow, &net, &solution, &ctx.cfg).unwrap();
            assert!(decision.accepted(), "flow {n} must fit below 500 Mbit/s");
            total_rate += profile_by_id(5).unwrap().rate_bps();
            n += 1;
        }
        assert_eq!(n, 245);
    }

    #[test]
    fn headroom_beyond_capacity_scores_below_one() {
        // full line rate of profile 1 cannot be guaranteed at a 250 us
        // bound: the burst term needs more than 1 Gbit/s
        let net = single_hop_net(Some((1, 1.0)));
        let ctx =
            EvalContext::new(&net, &[], FitnessWeights::default(), EvalConfig::default()).unwrap();
        let report = evaluate(&ctx, &CandidateSolution::uniform(vec![250, 250]));
        assert!(report.f_a < 1.0);
        assert!(report.headroom_ratios[0] < 1.0);
        assert!(report.headroom_ratios[0] > 0.0);
    }

    #[test]
    fn uniform_and_expanded_reports_are_identical() {
        let net = load_network(TWO_HOP_DOC).unwrap();
        let flows = vec![
            static_flow(&net, "f0", 1),
            static_flow(&net, "f1", 3),
            static_flow(&net, "f2", 5),
        ];
        let ctx = EvalContext::new(
            &net,
            &flows,
            FitnessWeights::default(),
            EvalConfig::default(),
        )
        .unwrap();
        let uniform = CandidateSolution::uniform(vec![100, 1000]);
        let expanded = uniform.expand(&net);
        assert_eq!(evaluate(&ctx, &uniform), evaluate(&ctx, &expanded));
    }

    #[test]
    fn evaluation_is_deterministic() {
        let net = load_network(TWO_HOP_DOC).unwrap();
        let flows: Vec<Flow> = (0..10)
            .map(|i| static_flow(&net, &format!("f{i:02}"), [1u8, 2, 3, 4, 5][i % 5]))
            .collect();
        let ctx = EvalContext::new(
            &net,
            &flows,
            FitnessWeights::default(),
            EvalConfig::default(),
        )
        .unwrap();
        let solution = CandidateSolution::uniform(vec![120, 1000]);
        assert_eq!(evaluate(&ctx, &solution), evaluate(&ctx, &solution));
    }

    #[test]
    fn full_reservation_dominates_partial_reservations() {
        // with default weights, f_R = 1 beats any f_R <= 0.88
        let w = FitnessWeights::default();
        let full = w.reservation * 1.0; // other components at their minimum
        let partial = w.reservation * 0.88 + w.headroom * 1.0 + w.deadline_match * 1.0;
        assert!(full > partial);
    }

    #[test]
    fn components_stay_in_unit_interval() {
        let net = load_network(TWO_HOP_DOC).unwrap();
        let flows: Vec<Flow> = (0..30)
            .map(|i| static_flow(&net, &format!("f{i:02}"), [1u8, 5][i % 2]))
            .collect();
        let ctx = EvalContext::new(
            &net,
            &flows,
            FitnessWeights::default(),
            EvalConfig::default(),
        )
        .unwrap();
        let space = SearchSpace::default();
        for (b1, b2) in [(10u32, 10u32), (250, 1000), (4000, 4000), (60, 3990)] {
            assert!(space.contains(b1) && space.contains(b2));
            let report = evaluate(&ctx, &CandidateSolution::uniform(vec![b1, b2]));
            for v in [report.f, report.f_r, report.f_a, report.f_d] {
                assert!((0.0..=1.0).contains(&v), "component {v} outside [0,1]");
            }
        }
    }
}
