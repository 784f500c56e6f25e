use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::link::{Link, LinkId, LinkSpec};

pub type NodeId = usize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TopologyKind {
    IndsTree,
    CdnThreeTier,
    LinearDebug,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeRole {
    /// Content origin: the INDS producer or the CDN origin server.
    Producer,
    /// Forwarder (INDS) or switch (CDN).
    Router,
    Consumer,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub name: String,
    pub role: NodeRole,
    /// Hosts a cache: every forwarder in INDS, the access-tier CDN nodes.
    pub caches: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkTier {
    /// Consumer attachment; carries the scenario bandwidth and loss.
    Access,
    Core,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub a: NodeId,
    pub b: NodeId,
    pub tier: LinkTier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyParams {
    pub consumers: usize,
    /// Forwarders for `inds_tree` (must be 10); chain length for `linear_debug`.
    pub forwarders: usize,
}

impl Default for TopologyParams {
    fn default() -> Self {
        Self {
            consumers: 10,
            forwarders: 10,
        }
    }
}

/// Static wiring; faces of a node are indexed in edge insertion order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    pub kind: TopologyKind,
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<EdgeSpec>,
    adjacency: Vec<Vec<(LinkId, NodeId)>>,
}

struct Builder {
    nodes: Vec<NodeSpec>,
    edges: Vec<EdgeSpec>,
}

impl Builder {
    fn node(&mut self, name: String, role: NodeRole, caches: bool) -> NodeId {
        self.nodes.push(NodeSpec { name, role, caches });
        self.nodes.len() - 1
    }

    fn edge(&mut self, a: NodeId, b: NodeId, tier: LinkTier) {
        self.edges.push(EdgeSpec { a, b, tier });
    }
}

impl Topology {
    pub fn build(kind: TopologyKind, params: TopologyParams) -> Result<Self> {
        if params.consumers == 0 {
            return Err(Error::config("topology.consumers", "must be at least 1"));
        }
        let mut b = Builder {
            nodes: Vec::new(),
            edges: Vec::new(),
        };
        match kind {
            TopologyKind::IndsTree => {
                if params.forwarders != 10 {
                    return Err(Error::config(
                        "topology.forwarders",
                        "inds_tree is wired for exactly 10 forwarders; use custom edges otherwise",
                    ));
                }
                let p = b.node("producer".into(), NodeRole::Producer, false);
                let f: Vec<NodeId> = (0..10)
                    .map(|i| b.node(format!("fwd{i}"), NodeRole::Router, true))
                    .collect();
                b.edge(p, f[0], LinkTier::Core);
                for (parent, children) in [(0, &[1, 2][..]), (1, &[3, 4, 5]), (2, &[6, 7, 8]), (3, &[9])] {
                    for &c in children {
                        b.edge(f[parent], f[c], LinkTier::Core);
                    }
                }
                for i in 0..params.consumers {
                    let c = b.node(format!("consumer{i}"), NodeRole::Consumer, false);
                    b.edge(c, f[3 + i % 7], LinkTier::Access);
                }
            }
            TopologyKind::CdnThreeTier => {
                let origin = b.node("origin".into(), NodeRole::Producer, false);
                let core = b.node("core".into(), NodeRole::Router, false);
                b.edge(origin, core, LinkTier::Core);
                let mut access = Vec::new();
                for i in 0..3 {
                    let agg = b.node(format!("agg{i}"), NodeRole::Router, false);
                    b.edge(core, agg, LinkTier::Core);
                    let acc = b.node(format!("access{i}"), NodeRole::Router, true);
                    b.edge(agg, acc, LinkTier::Core);
                    access.push(acc);
                }
                for i in 0..params.consumers {
                    let c = b.node(format!("consumer{i}"), NodeRole::Consumer, false);
                    b.edge(c, access[i % 3], LinkTier::Access);
                }
            }
            TopologyKind::LinearDebug => {
                if params.forwarders == 0 {
                    return Err(Error::config("topology.forwarders", "linear_debug needs at least 1"));
                }
                let p = b.node("producer".into(), NodeRole::Producer, false);
                let mut up = p;
                let mut first = p;
                for i in (0..params.forwarders).rev() {
                    let f = b.node(format!("fwd{i}"), NodeRole::Router, true);
                    b.edge(up, f, LinkTier::Core);
                    up = f;
                    first = f;
                }
                for i in 0..params.consumers {
                    let c = b.node(format!("consumer{i}"), NodeRole::Consumer, false);
                    b.edge(c, first, LinkTier::Access);
                }
            }
            TopologyKind::Custom => {
                return Err(Error::config("topology.kind", "custom topologies need explicit edges"))
            }
        }
        Self::from_parts(kind, b.nodes, b.edges)
    }

    /// Arbitrary wiring; exactly one producer and a connected graph are required.
    pub fn custom(nodes: Vec<NodeSpec>, edges: Vec<EdgeSpec>) -> Result<Self> {
        Self::from_parts(TopologyKind::Custom, nodes, edges)
    }

    fn from_parts(kind: TopologyKind, nodes: Vec<NodeSpec>, edges: Vec<EdgeSpec>) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); nodes.len()];
        for (id, e) in edges.iter().enumerate() {
            if e.a >= nodes.len() || e.b >= nodes.len() || e.a == e.b {
                return Err(Error::config("topology.edges", format!("bad edge {e:?}")));
            }
            adjacency[e.a].push((id, e.b));
            adjacency[e.b].push((id, e.a));
        }
        let t = Self {
            kind,
            nodes,
            edges,
            adjacency,
        };
        let producers = t.nodes.iter().filter(|n| n.role == NodeRole::Producer).count();
        if producers != 1 {
            return Err(Error::config("topology", format!("{producers} producers, need 1")));
        }
        if t.hops_to_producer().iter().any(Option::is_none) {
            return Err(Error::config("topology.edges", "graph is not connected"));
        }
        Ok(t)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn producer(&self) -> NodeId {
        self.nodes.iter().position(|n| n.role == NodeRole::Producer).unwrap()
    }

    pub fn with_role(&self, role: NodeRole) -> Vec<NodeId> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].role == role).collect()
    }

    pub fn consumers(&self) -> Vec<NodeId> {
        self.with_role(NodeRole::Consumer)
    }

    /// `(link, peer)` per face.
    pub fn faces(&self, node: NodeId) -> &[(LinkId, NodeId)] {
        &self.adjacency[node]
    }

    pub fn face_to(&self, node: NodeId, peer: NodeId) -> Option<usize> {
        self.adjacency[node].iter().position(|&(_, p)| p == peer)
    }

    fn hops_to_producer(&self) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.nodes.len()];
        let Some(p) = self.nodes.iter().position(|n| n.role == NodeRole::Producer) else {
            return dist;
        };
        dist[p] = Some(0);
        let mut q = VecDeque::from([p]);
        while let Some(u) = q.pop_front() {
            for &(_, v) in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(dist[u].unwrap() + 1);
                    q.push_back(v);
                }
            }
        }
        dist
    }

    /// Face of `node` on a shortest path toward the producer; none at the producer.
    pub fn upstream_face(&self, node: NodeId) -> Option<usize> {
        let dist = self.hops_to_producer();
        let d = dist[node]?;
        if d == 0 {
            return None;
        }
        self.adjacency[node]
            .iter()
            .position(|&(_, peer)| dist[peer] == Some(d - 1))
    }

    /// Nodes from `node` to the producer inclusive.
    pub fn path_to_producer(&self, node: NodeId) -> Vec<NodeId> {
        let mut path = vec![node];
        let mut cur = node;
        while let Some(f) = self.upstream_face(cur) {
            cur = self.adjacency[cur][f].1;
            path.push(cur);
        }
        path
    }

    pub fn instantiate_links(&self, access: LinkSpec, core: LinkSpec, seed: u64) -> Vec<Link> {
        self.edges
            .iter()
            .enumerate()
            .map(|(id, e)| {
                let spec = match e.tier {
                    LinkTier::Access => access,
                    LinkTier::Core => core,
                };
                Link::new(id, e.a, e.b, spec, seed)
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_tree_counts_and_path_lengths() {
        let t = Topology::build(TopologyKind::IndsTree, TopologyParams::default()).unwrap();
        assert_eq!(t.len(), 21);
        assert_eq!(t.with_role(NodeRole::Router).len(), 10);
        for c in t.consumers() {
            let hops = t.path_to_producer(c).len() - 1;
            assert!((4..=5).contains(&hops), "consumer {c}: {hops} hops");
        }
        // fwd9 sits under fwd3.
        let fwd9 = t.nodes.iter().position(|n| n.name == "fwd9").unwrap();
        let up = t.faces(fwd9)[t.upstream_face(fwd9).unwrap()].1;
        assert_eq!(t.nodes[up].name, "fwd3");
    }

    #[test]
    fn cdn_composition() {
        let t = Topology::build(TopologyKind::CdnThreeTier, TopologyParams::default()).unwrap();
        assert_eq!(t.len(), 18);
        assert_eq!(t.nodes.iter().filter(|n| n.caches).count(), 3);
        for c in t.consumers() {
            assert_eq!(t.path_to_producer(c).len() - 1, 4);
        }
    }

    #[test]
    fn linear_debug_three_nodes() {
        let t = Topology::build(
            TopologyKind::LinearDebug,
            TopologyParams {
                consumers: 1,
                forwarders: 1,
            },
        )
        .unwrap();
        assert_eq!(t.len(), 3);
        let c = t.consumers()[0];
        let names: Vec<&str> = t
            .path_to_producer(c)
            .iter()
            .map(|&n| t.nodes[n].name.as_str())
            .collect();
        assert_eq!(names, vec!["consumer0", "fwd0", "producer"]);
    }

    #[test]
    fn invalid_counts_are_config_errors() {
        let bad = TopologyParams {
            consumers: 0,
            forwarders: 10,
        };
        assert!(matches!(
            Topology::build(TopologyKind::IndsTree, bad),
            Err(Error::Config { .. })
        ));
        let bad = TopologyParams {
            consumers: 3,
            forwarders: 4,
        };
        assert!(Topology::build(TopologyKind::IndsTree, bad).is_err());
    }

    #[test]
    fn custom_requires_connectivity() {
        let n = |name: &str, role| NodeSpec {
            name: name.into(),
            role,
            caches: false,
        };
        let nodes = vec![n("p", NodeRole::Producer), n("c", NodeRole::Consumer)];
        assert!(Topology::custom(nodes.clone(), vec![]).is_err());
        let e = EdgeSpec {
            a: 0,
            b: 1,
            tier: LinkTier::Access,
        };
        assert_eq!(
            Topology::custom(nodes, vec![e]).unwrap().path_to_producer(1),
            vec![1, 0]
        );
    }
}
