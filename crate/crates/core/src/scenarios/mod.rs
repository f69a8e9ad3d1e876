//! Seeded topology and flow generators for the benchmark scenarios, all
//! fully determined by their seed.

mod experiments;

pub use experiments::{
    run_experiment, ComparisonRow, ConvergenceSummaryRow, ConvergenceTraceRow, ExperimentConfig,
    ExperimentTables, HeatmapRow, IndividualRow, Preset, ResultTable, RuntimeFlowsRow, TimingRow,
};

use rand::seq::{IndexedRandom, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    profile_by_id, Flow, FlowKind, HeadroomEntry, Link, NetworkModel, Node, NodeIdx, NodeKind,
    SearchSpace, TrafficProfile,
};
use crate::netcalc::{cbs_latency_us, min_idle_slope, TokenBucketCurve, L_LOW_DEFAULT_BITS};
use crate::optim::rng_for;

pub const LINK_RATE_BPS: f64 = 1e9;

/// PROFINET-style backbone-of-lines layout; adjustable through scenario
/// configuration files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProfinetShape {
    /// Bridges on the backbone; one line hangs off each.
    pub backbone: usize,
    /// Bridges per line, each with one end-station.
    pub line_len: usize,
    /// Traffic profile dedicated to each line (length = backbone).
    pub line_profiles: Vec<u8>,
}

impl Default for ProfinetShape {
    fn default() -> Self {
        Self {
            backbone: 3,
            line_len: 3,
            line_profiles: vec![1, 3, 5],
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum TopologyKind {
    Line,
    StarOfStars,
    Ring,
    SingleHop { talkers: usize },
    Profinet(ProfinetShape),
}

struct NetBuilder {
    nodes: Vec<Node>,
    links: Vec<Link>,
    queues: usize,
}

impl NetBuilder {
    fn new(queues: usize) -> Self {
        Self {
            nodes: Vec::new(),
            links: Vec::new(),
            queues,
        }
    }

    fn bridge(&mut self, id: impl Into<String>) -> NodeIdx {
        self.nodes.push(Node {
            id: id.into(),
            kind: NodeKind::Bridge,
            plc: false,
        });
        NodeIdx(self.nodes.len() - 1)
    }

    fn station(&mut self, id: impl Into<String>) -> NodeIdx {
        self.nodes.push(Node {
            id: id.into(),
            kind: NodeKind::EndStation,
            plc: false,
        });
        NodeIdx(self.nodes.len() - 1)
    }

    fn connect_both(&mut self, a: NodeIdx, b: NodeIdx) {
        for (from, to) in [(a, b), (b, a)] {
            self.links.push(Link {
                from,
                to,
                rate_bps: LINK_RATE_BPS,
                queues: self.queues,
            });
        }
    }

    fn build(self, headroom: Vec<HeadroomEntry>) -> Result<NetworkModel> {
        NetworkModel::new(self.nodes, self.links, headroom, 1.0)
    }
}

/// Generates one of the benchmark topologies with 1 Gbit/s links and
/// `queues_per_port` CBS queues on every port.
pub fn generate_topology(
    kind: TopologyKind,
    queues_per_port: usize,
    seed: u64,
) -> Result<NetworkModel> {
    let mut rng = rng_for(seed);
    let mut b = NetBuilder::new(queues_per_port);
    match kind {
        TopologyKind::Line => {
            // four bridges in a chain, one end-station each, PLC at the end
            let bridges: Vec<NodeIdx> = (1..=4).map(|i| b.bridge(format!("b{i}"))).collect();
            for pair in bridges.windows(2) {
                b.connect_both(pair[0], pair[1]);
            }
            for (i, &bridge) in bridges.iter().enumerate() {
                let es = b.station(format!("es{}", i + 1));
                b.connect_both(es, bridge);
            }
            let plc = b.station("plc");
            b.nodes[plc.0].plc = true;
            b.connect_both(plc, bridges[3]);
        }
        TopologyKind::StarOfStars => {
            let center = b.bridge("c");
            let mut stations = Vec::new();
            for i in 1..=4 {
                let leaf = b.bridge(format!("b{i}"));
                b.connect_both(leaf, center);
                for j in 1..=4 {
                    let es = b.station(format!("es{}", (i - 1) * 4 + j));
                    b.connect_both(es, leaf);
                    stations.push(es);
                }
            }
            let plc = *stations.choose(&mut rng).expect("stations exist");
            b.nodes[plc.0].plc = true;
        }
        TopologyKind::Ring => {
            let bridges: Vec<NodeIdx> = (1..=5).map(|i| b.bridge(format!("b{i}"))).collect();
            for i in 0..5 {
                b.connect_both(bridges[i], bridges[(i + 1) % 5]);
            }
            let mut stations = Vec::new();
            for (i, &bridge) in bridges.iter().enumerate() {
                for j in 0..2 {
                    let es = b.station(format!("es{}", i * 2 + j + 1));
                    b.connect_both(es, bridge);
                    stations.push(es);
                }
            }
            let plc = *stations.choose(&mut rng).expect("stations exist");
            b.nodes[plc.0].plc = true;
        }
        TopologyKind::SingleHop { talkers } => {
            if talkers == 0 {
                return Err(Error::Validation(
                    "single-hop topology needs talkers".into(),
                ));
            }
            let bridge = b.bridge("b1");
            for i in 1..=talkers {
                let es = b.station(format!("es{i}"));
                b.connect_both(es, bridge);
            }
            let plc = b.station("plc");
            b.nodes[plc.0].plc = true;
            b.connect_both(plc, bridge);
        }
        TopologyKind::Profinet(shape) => {
            if shape.line_profiles.len() != shape.backbone {
                return Err(Error::Validation(format!(
                    "profinet shape assigns {} line profiles to {} backbone bridges",
                    shape.line_profiles.len(),
                    shape.backbone
                )));
            }
            for &p in &shape.line_profiles {
                profile_by_id(p)?;
            }
            let backbone: Vec<NodeIdx> = (1..=shape.backbone)
                .map(|i| b.bridge(format!("bb{i}")))
                .collect();
            for pair in backbone.windows(2) {
                b.connect_both(pair[0], pair[1]);
            }
            for (i, &head) in backbone.iter().enumerate() {
                let mut prev = head;
                for j in 1..=shape.line_len {
                    let bridge = b.bridge(format!("l{}b{}", i + 1, j));
                    b.connect_both(prev, bridge);
                    let es = b.station(format!("l{}es{}", i + 1, j));
                    b.connect_both(es, bridge);
                    prev = bridge;
                }
            }
            let plc = b.station("plc");
            b.nodes[plc.0].plc = true;
            b.connect_both(plc, backbone[0]);
        }
    }
    b.build(Vec::new())
}

/// Attaches headroom entries to a generated network.
pub fn with_headroom(net: &NetworkModel, headroom: Vec<HeadroomEntry>) -> Result<NetworkModel> {
    NetworkModel::with_queue_cap(
        net.nodes().to_vec(),
        net.links().to_vec(),
        headroom,
        net.reservable_fraction,
        net.max_priority_queues,
    )
}

/// The bridge egress link feeding the PLC, the bottleneck of every
/// scenario.
pub fn plc_ingress_link(net: &NetworkModel) -> Result<crate::model::LinkIdx> {
    let plc = net
        .plc()
        .ok_or_else(|| Error::Validation("network has no PLC".into()))?;
    net.links()
        .iter()
        .enumerate()
        .find(|(_, l)| l.to == plc && net.node(l.from).kind == NodeKind::Bridge)
        .map(|(i, _)| crate::model::LinkIdx(i))
        .ok_or_else(|| Error::Validation("PLC has no bridge ingress link".into()))
}

/// A flow is generatable only if it can be admitted in isolation under
/// some solution in the search space: its evenly split deadline must be
/// reachable on the grid and a single-flow reservation must fit the link.
fn admissible_in_isolation(profile: TrafficProfile, hops: usize) -> bool {
    let space = SearchSpace::default();
    let budget = f64::from(profile.max_latency_us) / hops.max(1) as f64;
    if budget < f64::from(space.lower_us) {
        return false;
    }
    let bound = f64::from(space.snap_down(budget));
    let latency = cbs_latency_us(&[], L_LOW_DEFAULT_BITS, LINK_RATE_BPS);
    let tb = TokenBucketCurve {
        burst_bits: profile.burst_bits(),
        rate_bps: profile.rate_bps(),
    };
    match min_idle_slope(bound, tb, latency) {
        Ok(slope) => slope <= LINK_RATE_BPS,
        Err(_) => false,
    }
}

fn shortest_hops(net: &NetworkModel, source: NodeIdx, destination: NodeIdx) -> Option<usize> {
    let weights = crate::routing::utilization_weights(net, &vec![0.0; net.links().len()]);
    crate::routing::k_shortest_paths(net, &weights, source, destination, 1)
        .ok()
        .map(|paths| paths[0].hops)
}

/// Generates `count` flows addressed to the PLC, sources drawn uniformly
/// from the other end-stations, profiles split evenly over `profile_mix`.
pub fn generate_flows(
    net: &NetworkModel,
    count: usize,
    profile_mix: &[u8],
    seed: u64,
) -> Result<Vec<Flow>> {
    if profile_mix.is_empty() {
        return Err(Error::Validation("profile mix must not be empty".into()));
    }
    let plc = net
        .plc()
        .ok_or_else(|| Error::Validation("network has no PLC".into()))?;
    let sources: Vec<NodeIdx> = net.end_stations().filter(|&es| es != plc).collect();
    if sources.is_empty() && count > 0 {
        return Err(Error::Validation(
            "network has no non-PLC end-stations".into(),
        ));
    }

    let mut rng = rng_for(seed);
    let mut profiles: Vec<u8> = (0..count)
        .map(|i| profile_mix[i % profile_mix.len()])
        .collect();
    profiles.shuffle(&mut rng);

    let mut flows = Vec::with_capacity(count);
    for (i, profile_id) in profiles.into_iter().enumerate() {
        let profile = profile_by_id(profile_id)?;
        let mut source = None;
        for _ in 0..100 {
            let candidate = *sources.choose(&mut rng).expect("sources exist");
            let Some(hops) = shortest_hops(net, candidate, plc) else {
                continue;
            };
            if admissible_in_isolation(profile, hops) {
                source = Some(candidate);
                break;
            }
        }
        let source = source.ok_or_else(|| {
            Error::Validation(format!(
                "profile {profile_id} cannot be admitted in isolation from any end-station"
            ))
        })?;
        flows.push(Flow {
            id: format!("f{i:04}"),
            profile,
            source,
            destination: plc,
            kind: FlowKind::Static,
        });
    }
    Ok(flows)
}

/// Flows for the individual-delay experiment: each line sends its own
/// profile towards the PLC until the PLC-link utilization (sum of
/// leaky-bucket rates over the link rate) reaches `target_utilization`.
pub fn generate_profinet_flows(
    net: &NetworkModel,
    shape: &ProfinetShape,
    target_utilization: f64,
    seed: u64,
) -> Result<Vec<Flow>> {
    if !(0.0..=1.0).contains(&target_utilization) {
        return Err(Error::Validation(format!(
            "target utilization {target_utilization} outside [0, 1]"
        )));
    }
    let plc = net
        .plc()
        .ok_or_else(|| Error::Validation("network has no PLC".into()))?;
    let mut rng = rng_for(seed);

    // end-stations per line, in line order
    let mut lines: Vec<Vec<NodeIdx>> = Vec::with_capacity(shape.backbone);
    for i in 1..=shape.backbone {
        let stations: Vec<NodeIdx> = (1..=shape.line_len)
            .filter_map(|j| net.find_node(&format!("l{i}es{j}")))
            .collect();
        if stations.is_empty() {
            return Err(Error::Validation(format!("line {i} has no end-stations")));
        }
        lines.push(stations);
    }

    let plc_rate = net.link(plc_ingress_link(net)?).rate_bps;
    let mut flows = Vec::new();
    let mut total_rate = 0.0;
    let mut line = 0;
    while total_rate / plc_rate < target_utilization {
        let profile = profile_by_id(shape.line_profiles[line])?;
        let source = *lines[line].choose(&mut rng).expect("line stations exist");
        flows.push(Flow {
            id: format!("f{:04}", flows.len()),
            profile,
            source,
            destination: plc,
            kind: FlowKind::Static,
        });
        total_rate += profile.rate_bps();
        line = (line + 1) % lines.len();
    }
    Ok(flows)
}
