//! Utilization-weighted k-shortest-path computation (Yen's loop-free
//! algorithm over the directed topology).

use std::collections::{BinaryHeap, HashSet};

use crate::error::{Error, Result};
use crate::model::{LinkIdx, NetworkModel, NodeIdx};

/// Baseline weight added to every link so that weights stay strictly
/// positive and hop count breaks ties in an empty network.
pub const UTILIZATION_EPSILON: f64 = 1e-6;

/// A loop-free directed path between two end-stations.
#[derive(Clone, Debug, PartialEq)]
pub struct PathCandidate {
    pub links: Vec<LinkIdx>,
    /// Bridge egress ports traversed, i.e. hops that contribute a
    /// configured delay bound.
    pub hops: usize,
    /// Sum of link utilization weights.
    pub weight: f64,
}

/// Per-link weights: reserved-idleSlope utilization plus
/// [`UTILIZATION_EPSILON`]. Links without CBS ports count as unloaded.
pub fn utilization_weights(net: &NetworkModel, reserved_bps_per_link: &[f64]) -> Vec<f64> {
    net.links()
        .iter()
        .enumerate()
        .map(|(i, link)| reserved_bps_per_link[i] / link.rate_bps + UTILIZATION_EPSILON)
        .collect()
}

/// Up to `k` loop-free paths in non-decreasing weight order; ties break
/// by hop count, then by lexicographic link ids.
pub fn k_shortest_paths(
    net: &NetworkModel,
    link_weights: &[f64],
    source: NodeIdx,
    destination: NodeIdx,
    k: usize,
) -> Result<Vec<PathCandidate>> {
    if source == destination {
        return Err(Error::Validation("path source equals destination".into()));
    }
    if k == 0 {
        return Err(Error::Validation("k must be >= 1".into()));
    }
    debug_assert_eq!(link_weights.len(), net.links().len());

    let no_path = || Error::NoPath {
        from: net.node(source).id.clone(),
        to: net.node(destination).id.clone(),
    };

    let best = dijkstra(
        net,
        link_weights,
        source,
        destination,
        &HashSet::new(),
        &HashSet::new(),
    )
    .ok_or_else(no_path)?;

    let mut accepted: Vec<Vec<LinkIdx>> = vec![best];
    let mut candidates: Vec<Vec<LinkIdx>> = Vec::new();
    let mut seen: HashSet<Vec<LinkIdx>> = HashSet::new();
    seen.insert(accepted[0].clone());

    while accepted.len() < k {
        let previous = accepted.last().unwrap().clone();
        for spur_idx in 0..previous.len() {
            let spur_node = net.link(previous[spur_idx]).from;
            let root = &previous[..spur_idx];

            // Links leaving the spur node on any accepted path that
            // shares this root are banned, forcing a new deviation.
            let mut banned_links: HashSet<LinkIdx> = HashSet::new();
            for path in &accepted {
                if path.len() > spur_idx && path[..spur_idx] == *root {
                    banned_links.insert(path[spur_idx]);
                }
            }
            // Root nodes (except the spur node itself) are banned to
            // keep the joined path simple.
            let banned_nodes: HashSet<NodeIdx> = root.iter().map(|&l| net.link(l).from).collect();

            if let Some(spur) = dijkstra(
                net,
                link_weights,
                spur_node,
                destination,
                &banned_nodes,
                &banned_links,
            ) {
                let mut joined = root.to_vec();
                joined.extend(spur);
                if seen.insert(joined.clone()) {
                    candidates.push(joined);
                }
            }
        }
        // Deterministic pop: full path ordering, best first.
        candidates.sort_by(|a, b| compare_paths(net, link_weights, a, b));
        if candidates.is_empty() {
            break;
        }
        accepted.push(candidates.remove(0));
    }

    accepted.sort_by(|a, b| compare_paths(net, link_weights, a, b));
    Ok(accepted
        .into_iter()
        .map(|links| make_candidate(net, link_weights, links))
        .collect())
}

fn path_weight(link_weights: &[f64], links: &[LinkIdx]) -> f64 {
    links.iter().map(|&l| link_weights[l.0]).sum()
}

fn compare_paths(
    net: &NetworkModel,
    link_weights: &[f64],
    a: &[LinkIdx],
    b: &[LinkIdx],
) -> std::cmp::Ordering {
    let wa = path_weight(link_weights, a);
    let wb = path_weight(link_weights, b);
    wa.total_cmp(&wb)
        .then_with(|| a.len().cmp(&b.len()))
        .then_with(|| {
            let ids_a: Vec<String> = a.iter().map(|&l| net.link_id(l)).collect();
            let ids_b: Vec<String> = b.iter().map(|&l| net.link_id(l)).collect();
            ids_a.cmp(&ids_b)
        })
}

fn make_candidate(net: &NetworkModel, link_weights: &[f64], links: Vec<LinkIdx>) -> PathCandidate {
    let hops = links
        .iter()
        .filter(|&&l| net.port_of_link(l).is_some())
        .count();
    let weight = path_weight(link_weights, &links);
    PathCandidate {
        links,
        hops,
        weight,
    }
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: f64,
    node: NodeIdx,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // reversed: BinaryHeap is a max-heap, we want smallest cost first;
        // node index breaks cost ties deterministically
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra(
    net: &NetworkModel,
    link_weights: &[f64],
    source: NodeIdx,
    destination: NodeIdx,
    banned_nodes: &HashSet<NodeIdx>,
    banned_links: &HashSet<LinkIdx>,
) -> Option<Vec<LinkIdx>> {
    let n = net.nodes().len();
    let mut dist = vec![f64::INFINITY; n];
    let mut via: Vec<Option<LinkIdx>> = vec![None; n];
    let mut done = vec![false; n];
    let mut heap = BinaryHeap::new();
    dist[source.0] = 0.0;
    heap.push(HeapEntry {
        cost: 0.0,
        node: source,
    });

    while let Some(HeapEntry { cost, node }) = heap.pop() {
        if done[node.0] {
            continue;
        }
        done[node.0] = true;
        if node == destination {
            break;
        }
        for &link in net.out_links(node) {
            if banned_links.contains(&link) {
                continue;
            }
            let next = net.link(link).to;
            if banned_nodes.contains(&next) || done[next.0] {
                continue;
            }
            let candidate = cost + link_weights[link.0];
            if candidate < dist[next.0] {
                dist[next.0] = candidate;
                via[next.0] = Some(link);
                heap.push(HeapEntry {
                    cost: candidate,
                    node: next,
                });
            }
        }
    }

    if !dist[destination.0].is_finite() {
        return None;
    }
    let mut links = Vec::new();
    let mut node = destination;
    while node != source {
        let link = via[node.0].expect("predecessor chain is complete");
        links.push(link);
        node = net.link(link).from;
    }
    links.reverse();
    Some(links)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::load_network;

    fn weights_for(net: &NetworkModel) -> Vec<f64> {
        utilization_weights(net, &vec![0.0; net.links().len()])
    }

    fn node(net: &NetworkModel, id: &str) -> NodeIdx {
        net.find_node(id).unwrap()
    }

    #[test]
    fn line_topology_has_a_unique_path() {
        let net = crate::scenarios::generate_topology(crate::scenarios::TopologyKind::Line, 2, 1)
            .unwrap();
        let plc = net.plc().unwrap();
        let src = node(&net, "es1");
        let paths = k_shortest_paths(&net, &weights_for(&net), src, plc, 3).unwrap();
        assert_eq!(paths.len(), 1);
        assert_eq!(paths[0].hops, 4);
        assert_eq!(paths[0].links.len(), 5);
    }

    #[test]
    fn ring_topology_has_exactly_two_paths() {
        let net = crate::scenarios::generate_topology(crate::scenarios::TopologyKind::Ring, 2, 7)
            .unwrap();
        let plc = net.plc().unwrap();
        let plc_bridge = net.link(net.out_links(plc)[0]).to;
        // an end-station on a different bridge sees both ring directions
        let src = net
            .end_stations()
            .find(|&es| !net.node(es).plc && net.link(net.out_links(es)[0]).to != plc_bridge)
            .unwrap();
        let paths = k_shortest_paths(&net, &weights_for(&net), src, plc, 3).unwrap();
        assert_eq!(
            paths.len(),
            2,
            "a ring offers exactly two simple directions"
        );
        assert!(paths[0].weight <= paths[1].weight);
    }

    const TWO_BRANCH_DOC: &str = r#"
format_version = 1

[[node]]
id = "a"
kind = "bridge"
[[node]]
id = "b"
kind = "bridge"
[[node]]
id = "c"
kind = "bridge"
[[node]]
id = "d"
kind = "bridge"
[[node]]
id = "src"
kind = "end-station"
[[node]]
id = "plc"
kind = "end-station"
plc = true

[[link]]
from = "src"
to = "a"
rate_bps = 1e9
queues = 2
[[link]]
from = "a"
to = "b"
rate_bps = 1e9
queues = 2
[[link]]
from = "a"
to = "c"
rate_bps = 1e9
queues = 2
[[link]]
from = "b"
to = "d"
rate_bps = 1e9
queues = 2
[[link]]
from = "c"
to = "d"
rate_bps = 1e9
queues = 2
[[link]]
from = "d"
to = "plc"
rate_bps = 1e9
queues = 2
"#;

    #[test]
    fn utilization_weight_prefers_the_unloaded_branch() {
        let net = load_network(TWO_BRANCH_DOC).unwrap();
        let src = node(&net, "src");
        let plc = node(&net, "plc");

        // Unloaded: the tie breaks lexicographically (a->b before a->c).
        let paths = k_shortest_paths(&net, &weights_for(&net), src, plc, 3).unwrap();
        assert_eq!(paths.len(), 2);
        let via_b = net.find_link("a->b").unwrap();
        assert!(paths[0].links.contains(&via_b));

        // Load the a->b branch: the a->c path must now rank first, and
        // the enumerated weights confirm the ordering.
        let mut reserved = vec![0.0; net.links().len()];
        reserved[via_b.0] = 100e6;
        let weights = utilization_weights(&net, &reserved);
        let paths = k_shortest_paths(&net, &weights, src, plc, 3).unwrap();
        let via_c = net.find_link("a->c").unwrap();
        assert!(paths[0].links.contains(&via_c));
        let w_b: f64 = 4.0 * UTILIZATION_EPSILON + 100e6 / 1e9;
        let w_c: f64 = 4.0 * UTILIZATION_EPSILON;
        assert!((paths[1].weight - w_b).abs() < 1e-12);
        assert!((paths[0].weight - w_c).abs() < 1e-12);
    }

    #[test]
    fn paths_are_distinct_loop_free_and_sorted() {
        let net =
            crate::scenarios::generate_topology(crate::scenarios::TopologyKind::StarOfStars, 2, 3)
                .unwrap();
        let plc = net.plc().unwrap();
        for src in net.end_stations().filter(|&es| !net.node(es).plc) {
            let paths = k_shortest_paths(&net, &weights_for(&net), src, plc, 4).unwrap();
            let mut seen = std::collections::HashSet::new();
            let mut last_key: Option<(f64, usize)> = None;
            for path in &paths {
                assert!(seen.insert(path.links.clone()), "paths must be distinct");
                let mut nodes = vec![net.link(path.links[0]).from];
                for &l in &path.links {
                    nodes.push(net.link(l).to);
                }
                let unique: std::collections::HashSet<_> = nodes.iter().collect();
                assert_eq!(unique.len(), nodes.len(), "paths must be loop-free");
                if let Some((w, h)) = last_key {
                    assert!(
                        w < path.weight || (w == path.weight && h <= path.links.len()),
                        "paths must be sorted"
                    );
                }
                last_key = Some((path.weight, path.links.len()));
            }
        }
    }

    #[test]
    fn disconnected_pair_reports_no_path() {
        let doc = r#"
format_version = 1
[[node]]
id = "a"
kind = "end-station"
[[node]]
id = "b"
kind = "end-station"
[[node]]
id = "x"
kind = "bridge"
[[link]]
from = "a"
to = "x"
rate_bps = 1e9
queues = 1
"#;
        let net = load_network(doc).unwrap();
        let err = k_shortest_paths(
            &net,
            &weights_for(&net),
            net.find_node("a").unwrap(),
            net.find_node("b").unwrap(),
            2,
        )
        .unwrap_err();
        match err {
            Error::NoPath { .. } => {}
            other => panic!("expected NoPath, got {other:?}"),
        }
    }
}
