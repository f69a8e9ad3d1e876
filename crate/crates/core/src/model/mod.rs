//! Domain types shared by all modules: topology, traffic, candidate
//! solutions and configuration parameters.
//!
//! All types here are immutable after construction and safe to share
//! across concurrent fitness evaluations.

mod document;

pub use document::{
    load_events, load_flows, load_network, load_solution, save_solution, serialize_network,
    FlowEvent, FlowEventKind,
};

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Index of a node in [`NetworkModel::nodes`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct NodeIdx(pub usize);

/// Index of a directed link in [`NetworkModel::links`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LinkIdx(pub usize);

/// Index of an output port carrying CBS priority queues.
///
/// Every directed link whose source node is a bridge is a port; links
/// leaving end-stations carry no configurable queues.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PortIdx(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeKind {
    Bridge,
    EndStation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub id: String,
    pub kind: NodeKind,
    /// Marks the PLC end-station, the traffic sink of all scenarios.
    pub plc: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Link {
    pub from: NodeIdx,
    pub to: NodeIdx,
    /// Transmission rate C in bit/s.
    pub rate_bps: f64,
    /// Number of CBS priority queues on the egress port (1 = highest
    /// priority). Only meaningful when `from` is a bridge.
    pub queues: usize,
}

/// Requested free-bandwidth share for future flows of one profile on one
/// link.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeadroomEntry {
    pub link: LinkIdx,
    pub profile: u8,
    pub fraction: f64,
}

/// Hard upper limit on priority queues per output port.
pub const MAX_PRIORITY_QUEUES: usize = 8;

/// Directed graph of bridges and end-stations with per-port CBS queue
/// configuration.
#[derive(Clone, Debug, PartialEq)]
pub struct NetworkModel {
    nodes: Vec<Node>,
    links: Vec<Link>,
    /// Links whose source is a bridge, in link order.
    ports: Vec<LinkIdx>,
    port_of_link: Vec<Option<PortIdx>>,
    out_links: Vec<Vec<LinkIdx>>,
    node_index: HashMap<String, NodeIdx>,
    max_path_len: usize,
    pub headroom: Vec<HeadroomEntry>,
    /// Fraction of each link rate available to CBS reservations.
    pub reservable_fraction: f64,
    /// Per-network cap on CBS queues per port, at most
    /// [`MAX_PRIORITY_QUEUES`].
    pub max_priority_queues: usize,
}

impl NetworkModel {
    pub fn new(
        nodes: Vec<Node>,
        links: Vec<Link>,
        headroom: Vec<HeadroomEntry>,
        reservable_fraction: f64,
    ) -> Result<Self> {
        Self::with_queue_cap(
            nodes,
            links,
            headroom,
            reservable_fraction,
            MAX_PRIORITY_QUEUES,
        )
    }

    pub fn with_queue_cap(
        nodes: Vec<Node>,
        links: Vec<Link>,
        headroom: Vec<HeadroomEntry>,
        reservable_fraction: f64,
        max_priority_queues: usize,
    ) -> Result<Self> {
        if max_priority_queues == 0 || max_priority_queues > MAX_PRIORITY_QUEUES {
            return Err(Error::Validation(format!(
                "max_priority_queues {max_priority_queues} outside 1..={MAX_PRIORITY_QUEUES}"
            )));
        }
        let mut node_index = HashMap::new();
        for (i, node) in nodes.iter().enumerate() {
            if node.id.is_empty() {
                return Err(Error::Validation("node with empty id".into()));
            }
            if node_index.insert(node.id.clone(), NodeIdx(i)).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate node id `{}`",
                    node.id
                )));
            }
            if node.plc && node.kind != NodeKind::EndStation {
                return Err(Error::Validation(format!(
                    "node `{}`: only end-stations can be marked as PLC",
                    node.id
                )));
            }
        }

        let mut seen_pairs = HashMap::new();
        let mut out_links = vec![Vec::new(); nodes.len()];
        for (i, link) in links.iter().enumerate() {
            let name = |n: NodeIdx| nodes[n.0].id.clone();
            if link.from.0 >= nodes.len() || link.to.0 >= nodes.len() {
                return Err(Error::Validation(format!(
                    "link {i} references unknown node"
                )));
            }
            if link.from == link.to {
                return Err(Error::Validation(format!(
                    "link `{}->{}` is a self-loop",
                    name(link.from),
                    name(link.to)
                )));
            }
            if !link.rate_bps.is_finite() || link.rate_bps <= 0.0 {
                return Err(Error::Validation(format!(
                    "link `{}->{}` has non-positive rate",
                    name(link.from),
                    name(link.to)
                )));
            }
            if link.queues == 0 || link.queues > max_priority_queues {
                return Err(Error::Validation(format!(
                    "link `{}->{}` has {} priority queues, allowed range is 1..={max_priority_queues}",
                    name(link.from),
                    name(link.to),
                    link.queues
                )));
            }
            if seen_pairs.insert((link.from, link.to), i).is_some() {
                return Err(Error::Validation(format!(
                    "duplicate link `{}->{}`",
                    name(link.from),
                    name(link.to)
                )));
            }
            out_links[link.from.0].push(LinkIdx(i));
        }

        let mut ports = Vec::new();
        let mut port_of_link = vec![None; links.len()];
        for (i, link) in links.iter().enumerate() {
            if nodes[link.from.0].kind == NodeKind::Bridge {
                port_of_link[i] = Some(PortIdx(ports.len()));
                ports.push(LinkIdx(i));
            }
        }

        if !(reservable_fraction > 0.0 && reservable_fraction <= 1.0) {
            return Err(Error::Validation(format!(
                "reservable_fraction {reservable_fraction} outside (0, 1]"
            )));
        }

        for entry in &headroom {
            if entry.link.0 >= links.len() {
                return Err(Error::Validation(
                    "headroom entry references unknown link".into(),
                ));
            }
            if port_of_link[entry.link.0].is_none() {
                return Err(Error::Validation(format!(
                    "headroom entry on link {}: not a bridge egress port",
                    entry.link.0
                )));
            }
            if profile_catalog().iter().all(|p| p.id != entry.profile) {
                return Err(Error::Validation(format!(
                    "headroom entry references unknown profile {}",
                    entry.profile
                )));
            }
            if !(entry.fraction > 0.0 && entry.fraction <= 1.0) {
                return Err(Error::Validation(format!(
                    "headroom fraction {} outside (0, 1]",
                    entry.fraction
                )));
            }
        }

        let max_path_len = bridge_diameter(&nodes, &links) + 1;

        Ok(Self {
            nodes,
            links,
            ports,
            port_of_link,
            out_links,
            node_index,
            max_path_len,
            headroom,
            reservable_fraction,
            max_priority_queues,
        })
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn links(&self) -> &[Link] {
        &self.links
    }

    pub fn node(&self, idx: NodeIdx) -> &Node {
        &self.nodes[idx.0]
    }

    pub fn link(&self, idx: LinkIdx) -> &Link {
        &self.links[idx.0]
    }

    /// Bridge egress links, i.e. the output ports carrying CBS queues.
    pub fn ports(&self) -> &[LinkIdx] {
        &self.ports
    }

    pub fn port_link(&self, port: PortIdx) -> &Link {
        &self.links[self.ports[port.0].0]
    }

    pub fn port_of_link(&self, link: LinkIdx) -> Option<PortIdx> {
        self.port_of_link[link.0]
    }

    pub fn port_queues(&self, port: PortIdx) -> usize {
        self.port_link(port).queues
    }

    pub fn out_links(&self, node: NodeIdx) -> &[LinkIdx] {
        &self.out_links[node.0]
    }

    pub fn find_node(&self, id: &str) -> Option<NodeIdx> {
        self.node_index.get(id).copied()
    }

    pub fn link_between(&self, from: NodeIdx, to: NodeIdx) -> Option<LinkIdx> {
        self.out_links[from.0]
            .iter()
            .copied()
            .find(|&l| self.links[l.0].to == to)
    }

    /// `"from->to"` naming used by documents and trace records.
    pub fn link_id(&self, link: LinkIdx) -> String {
        let l = &self.links[link.0];
        format!("{}->{}", self.nodes[l.from.0].id, self.nodes[l.to.0].id)
    }

    pub fn find_link(&self, id: &str) -> Option<LinkIdx> {
        let (from, to) = id.split_once("->")?;
        let from = self.find_node(from)?;
        let to = self.find_node(to)?;
        self.link_between(from, to)
    }

    /// First end-station marked as PLC, if any.
    pub fn plc(&self) -> Option<NodeIdx> {
        self.nodes.iter().position(|n| n.plc).map(NodeIdx)
    }

    pub fn end_stations(&self) -> impl Iterator<Item = NodeIdx> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter(|(_, n)| n.kind == NodeKind::EndStation)
            .map(|(i, _)| NodeIdx(i))
    }

    /// Largest queue count over all ports (0 when there are no ports).
    pub fn max_queue_count(&self) -> usize {
        self.ports
            .iter()
            .map(|&l| self.links[l.0].queues)
            .max()
            .unwrap_or(0)
    }

    /// Maximum path length in bridge hops: diameter of the bridge graph
    /// plus the final egress hop. Used to split end-to-end deadlines
    /// into per-hop budgets.
    pub fn max_path_len(&self) -> usize {
        self.max_path_len
    }

    pub fn validate_flow(&self, flow: &Flow) -> Result<()> {
        if flow.source == flow.destination {
            return Err(Error::Validation(format!(
                "flow `{}`: source equals destination",
                flow.id
            )));
        }
        for node in [flow.source, flow.destination] {
            if node.0 >= self.nodes.len() {
                return Err(Error::Validation(format!(
                    "flow `{}` references unknown node",
                    flow.id
                )));
            }
            if self.nodes[node.0].kind != NodeKind::EndStation {
                return Err(Error::Validation(format!(
                    "flow `{}`: endpoint `{}` is not an end-station",
                    flow.id, self.nodes[node.0].id
                )));
            }
        }
        Ok(())
    }
}

/// Hop diameter of the bridge-to-bridge subgraph (finite distances only).
fn bridge_diameter(nodes: &[Node], links: &[Link]) -> usize {
    let bridges: Vec<usize> = nodes
        .iter()
        .enumerate()
        .filter(|(_, n)| n.kind == NodeKind::Bridge)
        .map(|(i, _)| i)
        .collect();
    let mut adj: HashMap<usize, Vec<usize>> = HashMap::new();
    for link in links {
        if nodes[link.from.0].kind == NodeKind::Bridge && nodes[link.to.0].kind == NodeKind::Bridge
        {
            adj.entry(link.from.0).or_default().push(link.to.0);
        }
    }
    let mut diameter = 0;
    for &start in &bridges {
        // BFS from each bridge
        let mut dist: HashMap<usize, usize> = HashMap::new();
        dist.insert(start, 0);
        let mut frontier = vec![start];
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for node in frontier {
                let d = dist[&node];
                for &succ in adj.get(&node).map(Vec::as_slice).unwrap_or(&[]) {
                    if let std::collections::hash_map::Entry::Vacant(slot) = dist.entry(succ) {
                        slot.insert(d + 1);
                        next.push(succ);
                    }
                }
            }
            frontier = next;
        }
        diameter = diameter.max(dist.values().copied().max().unwrap_or(0));
    }
    diameter
}

/// Leaky-bucket traffic characterization with an end-to-end deadline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrafficProfile {
    pub id: u8,
    pub sending_interval_us: u32,
    pub max_frame_size_bytes: u32,
    pub max_latency_us: u32,
}

impl TrafficProfile {
    pub fn new(
        id: u8,
        sending_interval_us: u32,
        max_frame_size_bytes: u32,
        max_latency_us: u32,
    ) -> Result<Self> {
        if sending_interval_us == 0 {
            return Err(Error::Validation(format!(
                "profile {id}: sending interval must be > 0"
            )));
        }
        if max_frame_size_bytes < 64 {
            return Err(Error::Validation(format!(
                "profile {id}: frame size below 64 bytes"
            )));
        }
        if max_latency_us == 0 {
            return Err(Error::Validation(format!(
                "profile {id}: max latency must be > 0"
            )));
        }
        Ok(Self {
            id,
            sending_interval_us,
            max_frame_size_bytes,
            max_latency_us,
        })
    }

    /// Leaky-bucket rate r = max_frame_size / sending_interval, in bit/s.
    pub fn rate_bps(&self) -> f64 {
        self.burst_bits() * 1e6 / f64::from(self.sending_interval_us)
    }

    /// Leaky-bucket burst b = max_frame_size, in bits.
    pub fn burst_bits(&self) -> f64 {
        f64::from(self.max_frame_size_bytes) * 8.0
    }
}

/// The five industrial sensor-controller traffic profiles.
pub fn profile_catalog() -> [TrafficProfile; 5] {
    [
        TrafficProfile {
            id: 1,
            sending_interval_us: 250,
            max_frame_size_bytes: 64,
            max_latency_us: 250,
        },
        TrafficProfile {
            id: 2,
            sending_interval_us: 500,
            max_frame_size_bytes: 128,
            max_latency_us: 500,
        },
        TrafficProfile {
            id: 3,
            sending_interval_us: 1000,
            max_frame_size_bytes: 256,
            max_latency_us: 1000,
        },
        TrafficProfile {
            id: 4,
            sending_interval_us: 2000,
            max_frame_size_bytes: 512,
            max_latency_us: 2000,
        },
        TrafficProfile {
            id: 5,
            sending_interval_us: 4000,
            max_frame_size_bytes: 1024,
            max_latency_us: 4000,
        },
    ]
}

pub fn profile_by_id(id: u8) -> Result<TrafficProfile> {
    profile_catalog()
        .into_iter()
        .find(|p| p.id == id)
        .ok_or_else(|| Error::Validation(format!("unknown traffic profile {id}")))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FlowKind {
    Static,
    Dynamic,
}

/// A unidirectional stream from one end-station to another.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Flow {
    pub id: String,
    pub profile: TrafficProfile,
    pub source: NodeIdx,
    pub destination: NodeIdx,
    pub kind: FlowKind,
}

impl Flow {
    /// End-to-end deadline D_tau; equals the profile's max latency.
    pub fn deadline_us(&self) -> u32 {
        self.profile.max_latency_us
    }
}

/// Discrete grid of admissible delay-bound values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpace {
    pub step_us: u32,
    pub lower_us: u32,
    pub upper_us: u32,
}

impl Default for SearchSpace {
    /// Multiples of 10 us in (0, 4000 us]: 400 values.
    fn default() -> Self {
        Self {
            step_us: 10,
            lower_us: 10,
            upper_us: 4000,
        }
    }
}

impl SearchSpace {
    pub fn with_step(step_us: u32) -> Result<Self> {
        let space = Self {
            step_us,
            lower_us: step_us,
            upper_us: 4000,
        };
        space.validate()?;
        Ok(space)
    }

    pub fn validate(&self) -> Result<()> {
        if self.step_us == 0 || self.lower_us == 0 {
            return Err(Error::Validation(
                "search space step and lower bound must be > 0".into(),
            ));
        }
        if !self.lower_us.is_multiple_of(self.step_us)
            || !self.upper_us.is_multiple_of(self.step_us)
            || self.upper_us < self.lower_us
        {
            return Err(Error::Validation(format!(
                "search space [{}, {}] is not aligned to step {}",
                self.lower_us, self.upper_us, self.step_us
            )));
        }
        Ok(())
    }

    pub fn cardinality(&self) -> usize {
        ((self.upper_us - self.lower_us) / self.step_us) as usize + 1
    }

    pub fn values(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.cardinality() as u32).map(move |i| self.lower_us + i * self.step_us)
    }

    pub fn contains(&self, bound_us: u32) -> bool {
        bound_us >= self.lower_us
            && bound_us <= self.upper_us
            && bound_us.is_multiple_of(self.step_us)
    }

    /// Nearest grid point; exact midpoints snap down.
    pub fn snap_nearest(&self, value_us: f64) -> u32 {
        let step = f64::from(self.step_us);
        let clamped = value_us.clamp(f64::from(self.lower_us), f64::from(self.upper_us));
        let ratio = clamped / step;
        let lo = ratio.floor();
        let snapped = if ratio - lo > 0.5 { lo + 1.0 } else { lo };
        ((snapped * step) as u32).clamp(self.lower_us, self.upper_us)
    }

    /// Largest grid point not above `value_us` (clamped into the space).
    pub fn snap_down(&self, value_us: f64) -> u32 {
        let step = f64::from(self.step_us);
        let clamped = value_us.clamp(f64::from(self.lower_us), f64::from(self.upper_us));
        let snapped = (clamped / step).floor() * step;
        (snapped as u32).clamp(self.lower_us, self.upper_us)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolutionMode {
    Uniform,
    Individual,
}

/// The optimizer's decision variable: one delay bound per (port, queue).
///
/// Uniform mode stores a single per-queue vector applied to every port;
/// ports with fewer queues use its prefix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CandidateSolution {
    bounds: Bounds,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
enum Bounds {
    Uniform(Vec<u32>),
    Individual(Vec<Vec<u32>>),
}

impl CandidateSolution {
    pub fn uniform(bounds_us: Vec<u32>) -> Self {
        Self {
            bounds: Bounds::Uniform(bounds_us),
        }
    }

    pub fn individual(bounds_us: Vec<Vec<u32>>) -> Self {
        Self {
            bounds: Bounds::Individual(bounds_us),
        }
    }

    pub fn mode(&self) -> SolutionMode {
        match self.bounds {
            Bounds::Uniform(_) => SolutionMode::Uniform,
            Bounds::Individual(_) => SolutionMode::Individual,
        }
    }

    /// Configured bound of `queue` (1-based priority index) at `port`.
    pub fn bound_us(&self, port: PortIdx, queue: usize) -> u32 {
        match &self.bounds {
            Bounds::Uniform(v) => v[queue - 1],
            Bounds::Individual(v) => v[port.0][queue - 1],
        }
    }

    pub fn uniform_bounds(&self) -> Option<&[u32]> {
        match &self.bounds {
            Bounds::Uniform(v) => Some(v),
            Bounds::Individual(_) => None,
        }
    }

    pub fn port_bounds(&self, port: PortIdx, queues: usize) -> Vec<u32> {
        (1..=queues).map(|q| self.bound_us(port, q)).collect()
    }

    /// Individual-mode copy with identical bounds at every port.
    pub fn expand(&self, net: &NetworkModel) -> CandidateSolution {
        let per_port = (0..net.ports().len())
            .map(|p| self.port_bounds(PortIdx(p), net.port_queues(PortIdx(p))))
            .collect();
        CandidateSolution::individual(per_port)
    }

    pub fn validate(&self, net: &NetworkModel, space: &SearchSpace) -> Result<()> {
        let check = |b: u32| -> Result<()> {
            if !space.contains(b) {
                return Err(Error::Validation(format!(
                    "delay bound {b} us outside the search space (multiples of {} us in [{}, {}])",
                    space.step_us, space.lower_us, space.upper_us
                )));
            }
            Ok(())
        };
        match &self.bounds {
            Bounds::Uniform(v) => {
                if v.len() != net.max_queue_count() {
                    return Err(Error::Validation(format!(
                        "uniform solution has {} bounds, network ports have up to {} queues",
                        v.len(),
                        net.max_queue_count()
                    )));
                }
                v.iter().try_for_each(|&b| check(b))
            }
            Bounds::Individual(v) => {
                if v.len() != net.ports().len() {
                    return Err(Error::Validation(format!(
                        "individual solution covers {} ports, network has {}",
                        v.len(),
                        net.ports().len()
                    )));
                }
                for (p, bounds) in v.iter().enumerate() {
                    let queues = net.port_queues(PortIdx(p));
                    if bounds.len() != queues {
                        return Err(Error::Validation(format!(
                            "port {} expects {} bounds, solution has {}",
                            net.link_id(net.ports()[p]),
                            queues,
                            bounds.len()
                        )));
                    }
                    bounds.iter().try_for_each(|&b| check(b))?;
                }
                Ok(())
            }
        }
    }
}

/// Scalarization weights for the three fitness objectives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitnessWeights {
    pub reservation: f64,
    pub headroom: f64,
    pub deadline_match: f64,
}

impl Default for FitnessWeights {
    fn default() -> Self {
        Self {
            reservation: 0.9,
            headroom: 0.09,
            deadline_match: 0.01,
        }
    }
}

impl FitnessWeights {
    pub fn validate(&self) -> Result<()> {
        let ws = [self.reservation, self.headroom, self.deadline_match];
        if ws.iter().any(|w| !(0.0..=1.0).contains(w)) {
            return Err(Error::Validation(
                "fitness weights must lie in [0, 1]".into(),
            ));
        }
        let sum: f64 = ws.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "fitness weights sum to {sum}, expected 1"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsoParams {
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self {
            inertia: 0.5,
            cognitive: 2.0,
            social: 2.4,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    /// Probability that a mated pair undergoes blend crossover.
    pub crossover_prob: f64,
    /// Blend crossover expansion factor alpha.
    pub blend_alpha: f64,
    /// Probability that an offspring undergoes mutation.
    pub mutation_prob: f64,
    /// Distribution index eta of polynomial bounded mutation.
    pub mutation_eta: f64,
    /// Per-gene mutation probability.
    pub gene_prob: f64,
    /// Fraction of the population selected as parents.
    pub selection_fraction: f64,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            crossover_prob: 0.45,
            blend_alpha: 0.15,
            mutation_prob: 0.45,
            mutation_eta: 70.0,
            gene_prob: 0.3,
            selection_fraction: 0.5,
        }
    }
}

/// Population size and convergence window for one solution mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunScale {
    pub population: usize,
    pub window: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerParams {
    pub pso: PsoParams,
    pub ga: GaParams,
    pub weights: FitnessWeights,
    pub uniform: RunScale,
    pub individual: RunScale,
    /// Safety cap; the convergence window is the intended stop rule.
    pub max_iterations: u32,
}

impl Default for OptimizerParams {
    fn default() -> Self {
        Self {
            pso: PsoParams::default(),
            ga: GaParams::default(),
            weights: FitnessWeights::default(),
            uniform: RunScale {
                population: 100,
                window: 15,
            },
            individual: RunScale {
                population: 200,
                window: 20,
            },
            max_iterations: 500,
        }
    }
}

impl OptimizerParams {
    pub fn scale(&self, mode: SolutionMode) -> RunScale {
        match mode {
            SolutionMode::Uniform => self.uniform,
            SolutionMode::Individual => self.individual,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.weights.validate()?;
        let probs = [
            self.ga.crossover_prob,
            self.ga.mutation_prob,
            self.ga.gene_prob,
            self.ga.selection_fraction,
        ];
        if probs.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::Validation(
                "GA probabilities must lie in [0, 1]".into(),
            ));
        }
        if self.uniform.population == 0 || self.individual.population == 0 {
            return Err(Error::Validation("population size must be > 0".into()));
        }
        Ok(())
    }
}

/// Evaluation knobs shared by admission and fitness.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalConfig {
    /// Candidate paths considered per flow.
    pub k_paths: usize,
    /// Headroom binary-search resolution as a fraction of the link rate.
    pub fa_rate_tolerance: f64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            k_paths: 3,
            fa_rate_tolerance: 0.001,
        }
    }
}
