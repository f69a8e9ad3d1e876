//! Structured-text (TOML) documents: network, flows, solutions and
//! admission event lists. Serialization is deterministic so documents
//! stay diff-stable.

use serde::Deserialize;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{
    profile_by_id, CandidateSolution, Flow, FlowKind, HeadroomEntry, Link, NetworkModel, Node,
    NodeKind, SearchSpace, SolutionMode,
};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkDoc {
    format_version: u32,
    #[serde(default)]
    config: ConfigSection,
    #[serde(default, rename = "node")]
    nodes: Vec<NodeSection>,
    #[serde(default, rename = "link")]
    links: Vec<LinkSection>,
    #[serde(default, rename = "headroom")]
    headroom: Vec<HeadroomSection>,
    #[serde(default, rename = "flow")]
    flows: Vec<FlowSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigSection {
    reservable_fraction: Option<f64>,
    max_priority_queues: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeSection {
    id: String,
    kind: NodeKind,
    #[serde(default)]
    plc: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LinkSection {
    from: String,
    to: String,
    rate_bps: f64,
    #[serde(default = "default_queues")]
    queues: usize,
}

fn default_queues() -> usize {
    1
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct HeadroomSection {
    link: String,
    profile: u8,
    fraction: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FlowSection {
    id: String,
    profile: u8,
    source: String,
    destination: String,
    #[serde(default = "default_kind")]
    kind: FlowKind,
}

fn default_kind() -> FlowKind {
    FlowKind::Static
}

fn parse_toml<'a, T: Deserialize<'a>>(text: &'a str, what: &str) -> Result<T> {
    toml::from_str(text).map_err(|e| Error::Parse(format!("{what}: {e}")))
}

fn check_version(version: u32, what: &str) -> Result<()> {
    if version != FORMAT_VERSION {
        return Err(Error::Parse(format!(
            "{what}: unsupported format_version {version}, expected {FORMAT_VERSION}"
        )));
    }
    Ok(())
}

/// Parses and validates a network document. Flow sections are ignored
/// here; use [`load_flows`] for them.
pub fn load_network(text: &str) -> Result<NetworkModel> {
    let doc: NetworkDoc = parse_toml(text, "network document")?;
    check_version(doc.format_version, "network document")?;

    let nodes: Vec<Node> = doc
        .nodes
        .into_iter()
        .map(|n| Node {
            id: n.id,
            kind: n.kind,
            plc: n.plc,
        })
        .collect();

    let find = |nodes: &[Node], id: &str, ctx: &str| -> Result<super::NodeIdx> {
        nodes
            .iter()
            .position(|n| n.id == id)
            .map(super::NodeIdx)
            .ok_or_else(|| Error::Validation(format!("{ctx} references unknown node `{id}`")))
    };

    let mut links = Vec::with_capacity(doc.links.len());
    for l in &doc.links {
        links.push(Link {
            from: find(&nodes, &l.from, "link")?,
            to: find(&nodes, &l.to, "link")?,
            rate_bps: l.rate_bps,
            queues: l.queues,
        });
    }

    // Headroom needs link indices, which need the validated model; build
    // the model first without headroom, then attach.
    let reservable = doc.config.reservable_fraction.unwrap_or(1.0);
    let queue_cap = doc
        .config
        .max_priority_queues
        .unwrap_or(super::MAX_PRIORITY_QUEUES);
    let net = NetworkModel::with_queue_cap(nodes, links, Vec::new(), reservable, queue_cap)?;

    let mut headroom = Vec::with_capacity(doc.headroom.len());
    for h in &doc.headroom {
        let link = net.find_link(&h.link).ok_or_else(|| {
            Error::Validation(format!(
                "headroom entry references unknown link `{}`",
                h.link
            ))
        })?;
        headroom.push(HeadroomEntry {
            link,
            profile: h.profile,
            fraction: h.fraction,
        });
    }

    let (nodes, links) = net.into_parts();
    NetworkModel::with_queue_cap(nodes, links, headroom, reservable, queue_cap)
}

impl NetworkModel {
    fn into_parts(self) -> (Vec<Node>, Vec<Link>) {
        (self.nodes().to_vec(), self.links().to_vec())
    }
}

/// Parses the flow sections of a document against a loaded network.
pub fn load_flows(text: &str, net: &NetworkModel) -> Result<Vec<Flow>> {
    let doc: NetworkDoc = parse_toml(text, "flows document")?;
    check_version(doc.format_version, "flows document")?;

    let mut flows = Vec::with_capacity(doc.flows.len());
    let mut seen = std::collections::HashSet::new();
    for f in &doc.flows {
        if !seen.insert(f.id.clone()) {
            return Err(Error::Validation(format!("duplicate flow id `{}`", f.id)));
        }
        let flow = Flow {
            id: f.id.clone(),
            profile: profile_by_id(f.profile)?,
            source: net.find_node(&f.source).ok_or_else(|| {
                Error::Validation(format!(
                    "flow `{}` references unknown node `{}`",
                    f.id, f.source
                ))
            })?,
            destination: net.find_node(&f.destination).ok_or_else(|| {
                Error::Validation(format!(
                    "flow `{}` references unknown node `{}`",
                    f.id, f.destination
                ))
            })?,
            kind: f.kind,
        };
        net.validate_flow(&flow)?;
        flows.push(flow);
    }
    Ok(flows)
}

/// Renders a network (and optional flow set) back into document form.
/// `load_network(serialize_network(net, flows))` yields an equal model.
pub fn serialize_network(net: &NetworkModel, flows: &[Flow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format_version = {FORMAT_VERSION}");
    let _ = writeln!(out);
    let _ = writeln!(out, "[config]");
    let _ = writeln!(out, "reservable_fraction = {:?}", net.reservable_fraction);
    let _ = writeln!(out, "max_priority_queues = {}", net.max_priority_queues);
    for node in net.nodes() {
        let _ = writeln!(out);
        let _ = writeln!(out, "[[node]]");
        let _ = writeln!(out, "id = \"{}\"", node.id);
        let kind = match node.kind {
            NodeKind::Bridge => "bridge",
            NodeKind::EndStation => "end-station",
        };
        let _ = writeln!(out, "kind = \"{kind}\"");
        if node.plc {
            let _ = writeln!(out, "plc = true");
        }
    }
    for link in net.links() {
        let _ = writeln!(out);
        let _ = writeln!(out, "[[link]]");
        let _ = writeln!(out, "from = \"{}\"", net.node(link.from).id);
        let _ = writeln!(out, "to = \"{}\"", net.node(link.to).id);
        let _ = writeln!(out, "rate_bps = {:?}", link.rate_bps);
        let _ = writeln!(out, "queues = {}", link.queues);
    }
    for entry in &net.headroom {
        let _ = writeln!(out);
        let _ = writeln!(out, "[[headroom]]");
        let _ = writeln!(out, "link = \"{}\"", net.link_id(entry.link));
        let _ = writeln!(out, "profile = {}", entry.profile);
        let _ = writeln!(out, "fraction = {:?}", entry.fraction);
    }
    for flow in flows {
        let _ = writeln!(out);
        let _ = writeln!(out, "[[flow]]");
        let _ = writeln!(out, "id = \"{}\"", flow.id);
        let _ = writeln!(out, "profile = {}", flow.profile.id);
        let _ = writeln!(out, "source = \"{}\"", net.node(flow.source).id);
        let _ = writeln!(out, "destination = \"{}\"", net.node(flow.destination).id);
        let kind = match flow.kind {
            FlowKind::Static => "static",
            FlowKind::Dynamic => "dynamic",
        };
        let _ = writeln!(out, "kind = \"{kind}\"");
    }
    out
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionDoc {
    format_version: u32,
    mode: SolutionMode,
    #[serde(default)]
    bounds_us: Vec<u32>,
    #[serde(default, rename = "port")]
    ports: Vec<SolutionPortSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct SolutionPortSection {
    link: String,
    bounds_us: Vec<u32>,
}

/// Parses a solution document and checks it against the network (same
/// ports, same queue counts, bounds on the grid).
pub fn load_solution(text: &str, net: &NetworkModel) -> Result<CandidateSolution> {
    let doc: SolutionDoc = parse_toml(text, "solution document")?;
    check_version(doc.format_version, "solution document")?;

    let solution = match doc.mode {
        SolutionMode::Uniform => {
            if !doc.ports.is_empty() {
                return Err(Error::Parse(
                    "solution document: uniform mode must not list per-port bounds".into(),
                ));
            }
            CandidateSolution::uniform(doc.bounds_us)
        }
        SolutionMode::Individual => {
            if !doc.bounds_us.is_empty() {
                return Err(Error::Parse(
                    "solution document: individual mode must list per-port bounds only".into(),
                ));
            }
            let mut per_port = vec![None; net.ports().len()];
            for section in &doc.ports {
                let link = net.find_link(&section.link).ok_or_else(|| {
                    Error::Validation(format!(
                        "solution references unknown link `{}`",
                        section.link
                    ))
                })?;
                let port = net.port_of_link(link).ok_or_else(|| {
                    Error::Validation(format!(
                        "solution references `{}`, which is not a bridge egress port",
                        section.link
                    ))
                })?;
                if per_port[port.0]
                    .replace(section.bounds_us.clone())
                    .is_some()
                {
                    return Err(Error::Validation(format!(
                        "solution lists port `{}` twice",
                        section.link
                    )));
                }
            }
            let mut bounds = Vec::with_capacity(per_port.len());
            for (p, entry) in per_port.into_iter().enumerate() {
                bounds.push(entry.ok_or_else(|| {
                    Error::Validation(format!(
                        "solution is missing port `{}`",
                        net.link_id(net.ports()[p])
                    ))
                })?);
            }
            CandidateSolution::individual(bounds)
        }
    };
    solution.validate(net, &SearchSpace::default())?;
    Ok(solution)
}

/// Renders a solution document.
pub fn save_solution(solution: &CandidateSolution, net: &NetworkModel) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format_version = {FORMAT_VERSION}");
    match solution.mode() {
        SolutionMode::Uniform => {
            let _ = writeln!(out, "mode = \"uniform\"");
            let _ = writeln!(out, "bounds_us = {:?}", solution.uniform_bounds().unwrap());
        }
        SolutionMode::Individual => {
            let _ = writeln!(out, "mode = \"individual\"");
            for (p, &link) in net.ports().iter().enumerate() {
                let port = super::PortIdx(p);
                let _ = writeln!(out);
                let _ = writeln!(out, "[[port]]");
                let _ = writeln!(out, "link = \"{}\"", net.link_id(link));
                let _ = writeln!(
                    out,
                    "bounds_us = {:?}",
                    solution.port_bounds(port, net.port_queues(port))
                );
            }
        }
    }
    out
}

/// One entry of a replayable admission event list.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowEvent {
    pub at: u64,
    pub kind: FlowEventKind,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FlowEventKind {
    Add(Flow),
    Remove(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventsDoc {
    format_version: u32,
    #[serde(default, rename = "event")]
    events: Vec<EventSection>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct EventSection {
    #[serde(default)]
    at: u64,
    action: String,
    flow: String,
    profile: Option<u8>,
    source: Option<String>,
    destination: Option<String>,
}

/// Parses a flow event list for `cmd_admit` replay.
pub fn load_events(text: &str, net: &NetworkModel) -> Result<Vec<FlowEvent>> {
    let doc: EventsDoc = parse_toml(text, "events document")?;
    check_version(doc.format_version, "events document")?;

    let mut events = Vec::with_capacity(doc.events.len());
    for (i, e) in doc.events.iter().enumerate() {
        let kind = match e.action.as_str() {
            "add" => {
                let missing =
                    |field: &str| Error::Parse(format!("event {i}: add requires field `{field}`"));
                let profile = e.profile.ok_or_else(|| missing("profile"))?;
                let source = e.source.as_deref().ok_or_else(|| missing("source"))?;
                let destination = e
                    .destination
                    .as_deref()
                    .ok_or_else(|| missing("destination"))?;
                let flow = Flow {
                    id: e.flow.clone(),
                    profile: profile_by_id(profile)?,
                    source: net.find_node(source).ok_or_else(|| {
                        Error::Validation(format!("event {i} references unknown node `{source}`"))
                    })?,
                    destination: net.find_node(destination).ok_or_else(|| {
                        Error::Validation(format!(
                            "event {i} references unknown node `{destination}`"
                        ))
                    })?,
                    kind: FlowKind::Dynamic,
                };
                net.validate_flow(&flow)?;
                FlowEventKind::Add(flow)
            }
            "remove" => FlowEventKind::Remove(e.flow.clone()),
            other => {
                return Err(Error::Parse(format!(
                    "event {i}: unknown action `{other}` (expected `add` or `remove`)"
                )))
            }
        };
        events.push(FlowEvent { at: e.at, kind });
    }
    Ok(events)
}
