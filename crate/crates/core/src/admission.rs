//! Online admission control against frozen per-queue delay bounds:
//! per-hop priority assignment, reservation and release. The same engine
//! runs inside fitness evaluation and at runtime.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{CandidateSolution, EvalConfig, Flow, LinkIdx, NetworkModel, PortIdx};
use crate::netcalc::{
    port_feasible, InfeasibleCause, QueueState, TokenBucketCurve, L_LOW_DEFAULT_BITS,
};
use crate::routing::{k_shortest_paths, utilization_weights, PathCandidate};

/// Delay-bound grid resolution used by the budget dynamic program.
const GRID_US: u32 = 10;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdmittedFlow {
    pub flow: Flow,
    pub links: Vec<LinkIdx>,
    /// 1-based queue index chosen at each bridge egress hop of the path.
    pub queues: Vec<usize>,
    /// Achieved end-to-end bound, the sum of per-hop bounds.
    pub d_p_us: u32,
}

/// Reject reasons, ordered so that `max` picks the dominating (most
/// actionable) one across candidate paths.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RejectReason {
    NoPath,
    DeadlineInfeasible,
    CapacityInfeasible,
}

impl std::fmt::Display for RejectReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RejectReason::NoPath => "no-path",
            RejectReason::DeadlineInfeasible => "deadline-infeasible",
            RejectReason::CapacityInfeasible => "capacity-infeasible",
        };
        write!(f, "{s}")
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum AdmissionDecision {
    Accepted {
        links: Vec<LinkIdx>,
        queues: Vec<usize>,
        d_p_us: u32,
    },
    Rejected {
        reason: RejectReason,
    },
}

impl AdmissionDecision {
    pub fn accepted(&self) -> bool {
        matches!(self, AdmissionDecision::Accepted { .. })
    }

    pub fn d_p_us(&self) -> Option<u32> {
        match self {
            AdmissionDecision::Accepted { d_p_us, .. } => Some(*d_p_us),
            AdmissionDecision::Rejected { .. } => None,
        }
    }
}

/// One line of the admission trace log.
#[derive(Clone, Debug, Serialize)]
pub struct DecisionRecord {
    pub format_version: u32,
    pub seq: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub at: Option<u64>,
    pub flow: String,
    pub verdict: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub path: Option<Vec<String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub queues: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_p_us: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl DecisionRecord {
    pub fn new(
        seq: u64,
        at: Option<u64>,
        flow_id: &str,
        decision: &AdmissionDecision,
        net: &NetworkModel,
    ) -> Self {
        match decision {
            AdmissionDecision::Accepted {
                links,
                queues,
                d_p_us,
            } => DecisionRecord {
                format_version: 1,
                seq,
                at,
                flow: flow_id.to_string(),
                verdict: "accept",
                path: Some(links.iter().map(|&l| net.link_id(l)).collect()),
                queues: Some(queues.clone()),
                d_p_us: Some(*d_p_us),
                reason: None,
            },
            AdmissionDecision::Rejected { reason } => DecisionRecord {
                format_version: 1,
                seq,
                at,
                flow: flow_id.to_string(),
                verdict: "reject",
                path: None,
                queues: None,
                d_p_us: None,
                reason: Some(reason.to_string()),
            },
        }
    }
}

/// Admitted flows plus per-(port, queue) aggregate arrival curves and the
/// currently reserved minimal idleSlopes.
///
/// Single-writer; concurrent fitness evaluations each own a private
/// instance. Cloning is O(flows + ports).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReservationState {
    admitted: BTreeMap<String, AdmittedFlow>,
    aggregates: Vec<Vec<TokenBucketCurve>>,
    idle_slopes: Vec<Vec<f64>>,
}

impl ReservationState {
    pub fn new(net: &NetworkModel) -> Self {
        let aggregates = net
            .ports()
            .iter()
            .map(|&l| vec![TokenBucketCurve::ZERO; net.link(l).queues])
            .collect();
        let idle_slopes = net
            .ports()
            .iter()
            .map(|&l| vec![0.0; net.link(l).queues])
            .collect();
        Self {
            admitted: BTreeMap::new(),
            aggregates,
            idle_slopes,
        }
    }

    pub fn admitted(&self) -> &BTreeMap<String, AdmittedFlow> {
        &self.admitted
    }

    pub fn aggregate(&self, port: PortIdx, queue: usize) -> TokenBucketCurve {
        self.aggregates[port.0][queue - 1]
    }

    pub fn idle_slope(&self, port: PortIdx, queue: usize) -> f64 {
        self.idle_slopes[port.0][queue - 1]
    }

    /// Total reserved idleSlope per link, the routing weight input.
    pub fn reserved_bps_per_link(&self, net: &NetworkModel) -> Vec<f64> {
        net.links()
            .iter()
            .enumerate()
            .map(|(i, _)| match net.port_of_link(LinkIdx(i)) {
                Some(port) => self.idle_slopes[port.0].iter().sum(),
                None => 0.0,
            })
            .collect()
    }

    /// Queue states of one port under the given solution, optionally with
    /// one extra arrival added to a queue.
    fn port_queue_states(
        &self,
        net: &NetworkModel,
        solution: &CandidateSolution,
        port: PortIdx,
        extra: Option<(usize, TokenBucketCurve)>,
    ) -> Vec<QueueState> {
        (1..=net.port_queues(port))
            .map(|q| {
                let mut aggregate = self.aggregates[port.0][q - 1];
                if let Some((eq, tb)) = extra {
                    if eq == q {
                        aggregate += tb;
                    }
                }
                QueueState {
                    bound_us: f64::from(solution.bound_us(port, q)),
                    aggregate,
                    l_low_bits: L_LOW_DEFAULT_BITS,
                }
            })
            .collect()
    }

    /// Checks whether `flow`'s arrival fits queue `q` of `port` without
    /// breaking any configured bound or the reservable-rate budget.
    fn queue_can_take(
        &self,
        net: &NetworkModel,
        solution: &CandidateSolution,
        port: PortIdx,
        queue: usize,
        tb: TokenBucketCurve,
    ) -> bool {
        let states = self.port_queue_states(net, solution, port, Some((queue, tb)));
        let link = net.port_link(port);
        port_feasible(&states, link.rate_bps, net.reservable_fraction).is_ok()
    }

    /// Admits a flow: candidate paths are tried in weight order and the
    /// first one with a feasible priority assignment wins. State is
    /// updated atomically (all hops or none).
    pub fn admit(
        &mut self,
        flow: Flow,
        net: &NetworkModel,
        solution: &CandidateSolution,
        cfg: &EvalConfig,
    ) -> Result<AdmissionDecision> {
        if self.admitted.contains_key(&flow.id) {
            return Err(Error::DuplicateFlow(flow.id));
        }
        let weights = utilization_weights(net, &self.reserved_bps_per_link(net));
        let paths =
            match k_shortest_paths(net, &weights, flow.source, flow.destination, cfg.k_paths) {
                Ok(paths) => paths,
                Err(Error::NoPath { .. }) => {
                    return Ok(AdmissionDecision::Rejected {
                        reason: RejectReason::NoPath,
                    })
                }
                Err(other) => return Err(other),
            };

        let mut dominating = RejectReason::NoPath;
        for path in &paths {
            match assign_priorities(path, &flow, solution, self, net) {
                Ok(selection) => {
                    let d_p_us = selection.d_p_us;
                    let queues = selection.queues;
                    self.apply(
                        flow,
                        path.links.clone(),
                        queues.clone(),
                        d_p_us,
                        net,
                        solution,
                    );
                    return Ok(AdmissionDecision::Accepted {
                        links: path.links.clone(),
                        queues,
                        d_p_us,
                    });
                }
                Err(reason) => dominating = dominating.max(reason),
            }
        }
        Ok(AdmissionDecision::Rejected { reason: dominating })
    }

    fn apply(
        &mut self,
        flow: Flow,
        links: Vec<LinkIdx>,
        queues: Vec<usize>,
        d_p_us: u32,
        net: &NetworkModel,
        solution: &CandidateSolution,
    ) {
        let tb = TokenBucketCurve {
            burst_bits: flow.profile.burst_bits(),
            rate_bps: flow.profile.rate_bps(),
        };
        let hop_ports: Vec<PortIdx> = links.iter().filter_map(|&l| net.port_of_link(l)).collect();
        debug_assert_eq!(hop_ports.len(), queues.len());
        for (&port, &q) in hop_ports.iter().zip(&queues) {
            self.aggregates[port.0][q - 1] += tb;
        }
        self.refresh_slopes(net, solution, hop_ports);
        self.admitted.insert(
            flow.id.clone(),
            AdmittedFlow {
                flow,
                links,
                queues,
                d_p_us,
            },
        );
    }

    /// Recomputes the reserved idleSlopes of the given ports from their
    /// aggregates. Must only be called with feasible aggregates.
    fn refresh_slopes(
        &mut self,
        net: &NetworkModel,
        solution: &CandidateSolution,
        ports: impl IntoIterator<Item = PortIdx>,
    ) {
        for port in ports {
            let states = self.port_queue_states(net, solution, port, None);
            let link = net.port_link(port);
            self.idle_slopes[port.0] =
                port_feasible(&states, link.rate_bps, net.reservable_fraction)
                    .expect("slopes refreshed from a feasibility-checked assignment");
        }
    }

    /// Releases an admitted flow. Aggregates and idleSlopes are rebuilt
    /// canonically from the remaining flows, so the state equals the one
    /// that admitting the remaining set (over the same paths) produces.
    pub fn release(
        &mut self,
        flow_id: &str,
        net: &NetworkModel,
        solution: &CandidateSolution,
    ) -> Result<()> {
        if self.admitted.remove(flow_id).is_none() {
            return Err(Error::UnknownFlow(flow_id.to_string()));
        }
        self.rebuild(net, solution);
        Ok(())
    }

    fn rebuild(&mut self, net: &NetworkModel, solution: &CandidateSolution) {
        for port_aggregates in &mut self.aggregates {
            port_aggregates.fill(TokenBucketCurve::ZERO);
        }
        for admitted in self.admitted.values() {
            let tb = TokenBucketCurve {
                burst_bits: admitted.flow.profile.burst_bits(),
                rate_bps: admitted.flow.profile.rate_bps(),
            };
            let hop_ports = admitted.links.iter().filter_map(|&l| net.port_of_link(l));
            for (port, &q) in hop_ports.zip(&admitted.queues) {
                self.aggregates[port.0][q - 1] += tb;
            }
        }
        let all_ports: Vec<PortIdx> = (0..net.ports().len()).map(PortIdx).collect();
        self.refresh_slopes(net, solution, all_ports);
    }

    /// Re-checks every port against the solution; used by tests and the
    /// safety suite.
    pub fn check_all_ports(
        &self,
        net: &NetworkModel,
        solution: &CandidateSolution,
    ) -> std::result::Result<(), (PortIdx, InfeasibleCause)> {
        for p in 0..net.ports().len() {
            let port = PortIdx(p);
            let states = self.port_queue_states(net, solution, port, None);
            let link = net.port_link(port);
            if let Err(e) = port_feasible(&states, link.rate_bps, net.reservable_fraction) {
                return Err((port, e.cause));
            }
        }
        Ok(())
    }
}

struct HopSelection {
    queues: Vec<usize>,
    d_p_us: u32,
}

/// Selects one queue per bridge hop so that the per-hop bounds sum to at
/// most the flow's deadline and the sum is maximal among feasible
/// selections (closest to the deadline from below). Each chosen hop must
/// also keep its port feasible with the flow's arrival added.
///
/// Exhaustive dynamic program over the 10 us bound grid. Ties between
/// equal-sum selections prefer lower-priority (higher-index) queues at
/// earlier hops.
fn assign_priorities(
    path: &PathCandidate,
    flow: &Flow,
    solution: &CandidateSolution,
    state: &ReservationState,
    net: &NetworkModel,
) -> std::result::Result<HopSelection, RejectReason> {
    let hop_ports: Vec<PortIdx> = path
        .links
        .iter()
        .filter_map(|&l| net.port_of_link(l))
        .collect();
    if hop_ports.is_empty() {
        // nothing to configure on a portless path; zero queueing delay
        return Ok(HopSelection {
            queues: Vec::new(),
            d_p_us: 0,
        });
    }

    let tb = TokenBucketCurve {
        burst_bits: flow.profile.burst_bits(),
        rate_bps: flow.profile.rate_bps(),
    };
    let budget = flow.deadline_us() / GRID_US;
    let hops = hop_ports.len();

    // Per hop: bound (in grid units) of every queue, and of the queues
    // that also pass the capacity check with this flow added.
    let mut all_units: Vec<Vec<u32>> = Vec::with_capacity(hops);
    let mut feasible: Vec<Vec<(usize, u32)>> = Vec::with_capacity(hops);
    for &port in &hop_ports {
        let queues = net.port_queues(port);
        let mut all = Vec::with_capacity(queues);
        let mut ok = Vec::new();
        for q in 1..=queues {
            let units = solution.bound_us(port, q) / GRID_US;
            all.push(units);
            if units <= budget && state.queue_can_take(net, solution, port, q, tb) {
                ok.push((q, units));
            }
        }
        all_units.push(all);
        feasible.push(ok);
    }

    // Deadline feasibility ignoring capacity: the cheapest queue at every
    // hop must fit the budget.
    let min_total: u64 = all_units
        .iter()
        .map(|units| u64::from(*units.iter().min().unwrap()))
        .sum();
    let deadline_reachable = min_total <= u64::from(budget);

    // best[h][b]: max bound sum achievable from hop h on with budget b,
    // or -1 when no capacity-feasible completion exists.
    let width = budget as usize + 1;
    let mut best = vec![vec![-1i64; width]; hops + 1];
    best[hops] = vec![0; width];
    for h in (0..hops).rev() {
        for b in 0..width {
            let mut value = -1i64;
            for &(_, units) in &feasible[h] {
                let units = units as usize;
                if units <= b && best[h + 1][b - units] >= 0 {
                    value = value.max(units as i64 + best[h + 1][b - units]);
                }
            }
            best[h][b] = value;
        }
    }

    if best[0][budget as usize] < 0 {
        return Err(if deadline_reachable {
            RejectReason::CapacityInfeasible
        } else {
            RejectReason::DeadlineInfeasible
        });
    }

    // Forward reconstruction; among optimal choices pick the highest
    // queue index at the earliest hop.
    let mut queues = Vec::with_capacity(hops);
    let mut remaining = budget as usize;
    for h in 0..hops {
        let target = best[h][remaining];
        let mut choice: Option<(usize, u32)> = None;
        for &(q, units) in &feasible[h] {
            let u = units as usize;
            if u <= remaining
                && best[h + 1][remaining - u] >= 0
                && units as i64 + best[h + 1][remaining - u] == target
            {
                choice = Some(match choice {
                    Some((cq, cu)) if cq > q => (cq, cu),
                    _ => (q, units),
                });
            }
        }
        let (q, units) = choice.expect("optimal DP value has a witness");
        queues.push(q);
        remaining -= units as usize;
    }
    let d_p_us = (budget as usize - remaining) as u32 * GRID_US;
    Ok(HopSelection { queues, d_p_us })
}
