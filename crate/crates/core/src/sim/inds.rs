use std::collections::BTreeMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::endpoints::{
    producer_on_interest, Consumer, ConsumerConfig, ConsumerOutput, ConsumerStats, ConsumerTimer, GofLedgerEntry,
    Phase, ProducerStore,
};
use crate::error::{Error, Result};
use crate::icn::{Action, ContentStore, Fib, Forwarder, ForwarderCounters, DEFAULT_CS_CAPACITY};
use crate::naming::{Name, DEFAULT_SERVICE};
use crate::netsim::{
    outcome_label, time, Link, LinkCounters, LinkId, NodeId, NodeRole, Scheduler, SimTime, Topology, TraceRecord,
    TraceSink, TxOutcome,
};
use crate::wire::{DataPacket, Interest, Packet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IndsOptions {
    pub consumer: ConsumerConfig,
    pub cs_capacity: usize,
    /// Consumer-local CS; its lookups are reported separately from forwarder hit rate.
    pub consumer_cs: bool,
    pub trace: bool,
    /// Hard stop for the event loop, in simulated seconds.
    pub max_sim_s: f64,
}

impl Default for IndsOptions {
    fn default() -> Self {
        Self {
            consumer: ConsumerConfig::default(),
            cs_capacity: DEFAULT_CS_CAPACITY,
            consumer_cs: true,
            trace: false,
            max_sim_s: 120.0,
        }
    }
}

#[derive(Debug)]
enum Event {
    Arrive {
        link: LinkId,
        to: NodeId,
        packet: Packet,
    },
    Timer {
        node: NodeId,
        timer: ConsumerTimer,
    },
    Start {
        node: NodeId,
    },
    /// Data served from a consumer's own CS.
    Local {
        node: NodeId,
        data: DataPacket,
    },
}

#[derive(Debug)]
enum Node {
    Producer,
    Router(Box<Forwarder>),
    Consumer(Box<ConsumerNode>),
}

#[derive(Debug)]
struct ConsumerNode {
    c: Consumer,
    cs: ContentStore,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConsumerReport {
    pub node: NodeId,
    pub name: String,
    pub start_ns: SimTime,
    pub phase: String,
    pub ledger: Vec<GofLedgerEntry>,
    pub stats: ConsumerStats,
    pub packets_by_segment: BTreeMap<String, u64>,
    pub local_cs_hits: u64,
    pub local_cs_misses: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ForwarderReport {
    pub node: NodeId,
    pub name: String,
    pub counters: ForwarderCounters,
    pub cs_len: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct LinkReport {
    pub link: LinkId,
    pub a: NodeId,
    pub b: NodeId,
    pub counters: [LinkCounters; 2],
}

#[derive(Debug)]
pub struct IndsRunResult {
    pub consumers: Vec<ConsumerReport>,
    pub forwarders: Vec<ForwarderReport>,
    pub links: Vec<LinkReport>,
    pub trace: TraceSink,
    pub end_ns: SimTime,
    pub events: u64,
    pub producer_interests: u64,
    pub expected_gofs: usize,
}

/// One INDS simulation: forwarders, a producer and adaptive consumers on a topology.
pub struct IndsWorld {
    topo: Topology,
    links: Vec<Link>,
    /// Face index at `link.a` and `link.b`.
    link_faces: Vec<[usize; 2]>,
    nodes: Vec<Node>,
    sched: Scheduler<Event>,
    producer: Arc<ProducerStore>,
    trace: TraceSink,
    max_time: SimTime,
    events: u64,
    producer_interests: u64,
    starts: Vec<(NodeId, SimTime)>,
    expected_gofs: usize,
}

impl IndsWorld {
    /// `starts[k]` is the start time of the k-th consumer (cycled if shorter).
    pub fn new(
        topo: Topology,
        links: Vec<Link>,
        producer: Arc<ProducerStore>,
        opts: &IndsOptions,
        starts: &[SimTime],
        seed: u64,
        expected_gofs: usize,
    ) -> Result<Self> {
        opts.consumer.validate()?;
        if links.len() != topo.edges.len() {
            return Err(Error::contract("one link per topology edge"));
        }
        let link_faces = links
            .iter()
            .map(|l| {
                let fa = topo.faces(l.a).iter().position(|&(id, _)| id == l.id);
                let fb = topo.faces(l.b).iter().position(|&(id, _)| id == l.id);
                Ok([
                    fa.ok_or_else(|| Error::contract("link face"))?,
                    fb.ok_or_else(|| Error::contract("link face"))?,
                ])
            })
            .collect::<Result<Vec<_>>>()?;
        let prefix = Name::from_components(&[DEFAULT_SERVICE])?;
        let mut nodes = Vec::with_capacity(topo.len());
        let mut consumer_index = 0;
        let mut start_list = Vec::new();
        for (id, spec) in topo.nodes.iter().enumerate() {
            nodes.push(match spec.role {
                NodeRole::Producer => Node::Producer,
                NodeRole::Router => {
                    let mut fib = Fib::new();
                    if let Some(f) = topo.upstream_face(id) {
                        fib.add_route(prefix.clone(), f);
                    }
                    let cap = if spec.caches { opts.cs_capacity } else { 0 };
                    Node::Router(Box::new(Forwarder::new(cap, fib)))
                }
                NodeRole::Consumer => {
                    let c = Consumer::new(
                        consumer_index,
                        producer.metadata_name().clone(),
                        opts.consumer.clone(),
                        seed,
                    );
                    let start = if starts.is_empty() {
                        0
                    } else {
                        starts[consumer_index % starts.len()]
                    };
                    start_list.push((id, start));
                    consumer_index += 1;
                    let cap = if opts.consumer_cs { opts.cs_capacity } else { 0 };
                    Node::Consumer(Box::new(ConsumerNode {
                        c,
                        cs: ContentStore::new(cap),
                    }))
                }
            });
        }
        let mut sched = Scheduler::new();
        for &(node, at) in &start_list {
            sched.schedule(at, Event::Start { node })?;
        }
        Ok(Self {
            topo,
            links,
            link_faces,
            nodes,
            sched,
            producer,
            trace: if opts.trace {
                TraceSink::enabled()
            } else {
                TraceSink::disabled()
            },
            max_time: time::from_secs(opts.max_sim_s),
            events: 0,
            producer_interests: 0,
            starts: start_list,
            expected_gofs,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    fn send(&mut self, now: SimTime, node: NodeId, face: usize, packet: Packet) {
        let (link, peer) = self.topo.faces(node)[face];
        let size = packet.wire_size();
        let outcome = self.links[link].transmit(now, node, size);
        let dir = self.links[link].direction_from(node).unwrap_or(0);
        self.trace.record(|| TraceRecord {
            time_ns: now,
            node,
            link,
            dir,
            kind: packet.kind(),
            name: packet.name().to_string(),
            bytes: size,
            outcome: outcome_label(&outcome),
        });
        if let TxOutcome::Delivered { at } = outcome {
            self.sched
                .schedule(at, Event::Arrive { link, to: peer, packet })
                .expect("deliveries are in the future");
        }
    }

    fn apply_consumer_outputs(&mut self, now: SimTime, node: NodeId, outs: Vec<ConsumerOutput>) {
        for o in outs {
            match o {
                ConsumerOutput::Send(i) => {
                    let Node::Consumer(cn) = &mut self.nodes[node] else {
                        unreachable!()
                    };
                    if let Some(d) = cn.cs.lookup(&i.name) {
                        self.sched
                            .schedule(now, Event::Local { node, data: d })
                            .expect("now is not in the past");
                    } else {
                        self.send(now, node, 0, Packet::Interest(i));
                    }
                }
                ConsumerOutput::Timer { at, timer } => {
                    self.sched
                        .schedule(at.max(now), Event::Timer { node, timer })
                        .expect("timers are not in the past");
                }
            }
        }
    }

    fn on_router_actions(&mut self, now: SimTime, node: NodeId, actions: Vec<Action>) {
        for a in actions {
            match a {
                Action::SendData { face, data } => self.send(now, node, face, Packet::Data(data)),
                Action::ForwardInterest { face, interest } => self.send(now, node, face, Packet::Interest(interest)),
                Action::DropNoRoute => log::warn!("node {node}: no route"),
                _ => {}
            }
        }
    }

    fn arrive(&mut self, now: SimTime, link: LinkId, to: NodeId, packet: Packet) {
        let face = if self.links[link].a == to {
            self.link_faces[link][0]
        } else {
            self.link_faces[link][1]
        };
        match &mut self.nodes[to] {
            Node::Producer => {
                if let Packet::Interest(i) = packet {
                    self.producer_interests += 1;
                    if let Some(d) = producer_on_interest(&self.producer, &i) {
                        self.send(now, to, face, Packet::Data(d));
                    }
                }
            }
            Node::Router(f) => {
                f.expire_pit(now);
                let actions = match packet {
                    Packet::Interest(i) => f.on_interest(face, hop(i), now),
                    Packet::Data(d) => f.on_data(face, d, now),
                };
                self.on_router_actions(now, to, actions);
            }
            Node::Consumer(cn) => {
                if let Packet::Data(d) = packet {
                    cn.cs.insert(d.clone());
                    let outs = cn.c.on_data(now, &d);
                    self.apply_consumer_outputs(now, to, outs);
                }
            }
        }
    }

    pub fn run(mut self) -> IndsRunResult {
        let mut end = 0;
        while let Some((now, ev)) = self.sched.pop() {
            if now > self.max_time {
                log::warn!("simulation stopped at the {} s limit", time::to_secs(self.max_time));
                break;
            }
            end = now;
            self.events += 1;
            match ev {
                Event::Arrive { link, to, packet } => self.arrive(now, link, to, packet),
                Event::Timer { node, timer } => {
                    let Node::Consumer(cn) = &mut self.nodes[node] else {
                        unreachable!()
                    };
                    let outs = cn.c.on_timer(now, &timer);
                    self.apply_consumer_outputs(now, node, outs);
                }
                Event::Start { node } => {
                    let Node::Consumer(cn) = &mut self.nodes[node] else {
                        unreachable!()
                    };
                    let outs = cn.c.start(now);
                    self.apply_consumer_outputs(now, node, outs);
                }
                Event::Local { node, data } => {
                    let Node::Consumer(cn) = &mut self.nodes[node] else {
                        unreachable!()
                    };
                    let outs = cn.c.on_data(now, &data);
                    self.apply_consumer_outputs(now, node, outs);
                }
            }
        }
        self.finish(end)
    }

    fn finish(self, end_ns: SimTime) -> IndsRunResult {
        let mut consumers = Vec::new();
        let mut forwarders = Vec::new();
        for (id, n) in self.nodes.into_iter().enumerate() {
            let name = self.topo.nodes[id].name.clone();
            match n {
                Node::Consumer(cn) => {
                    let start_ns = self.starts.iter().find(|s| s.0 == id).map_or(0, |s| s.1);
                    let phase = match cn.c.phase() {
                        Phase::Idle => "idle",
                        Phase::Bootstrap => "bootstrap",
                        Phase::Streaming => "streaming",
                        Phase::Done => "done",
                        Phase::Failed => "failed",
                    };
                    consumers.push(ConsumerReport {
                        node: id,
                        name,
                        start_ns,
                        phase: phase.into(),
                        ledger: cn.c.ledger().to_vec(),
                        stats: cn.c.stats().clone(),
                        packets_by_segment: cn.c.packets_by_segment().clone(),
                        local_cs_hits: cn.cs.hits(),
                        local_cs_misses: cn.cs.misses(),
                    });
                }
                Node::Router(f) => forwarders.push(ForwarderReport {
                    node: id,
                    name,
                    counters: f.counters(),
                    cs_len: f.cs.len(),
                }),
                Node::Producer => {}
            }
        }
        let links = self
            .links
            .iter()
            .map(|l| LinkReport {
                link: l.id,
                a: l.a,
                b: l.b,
                counters: [l.counters(0), l.counters(1)],
            })
            .collect();
        IndsRunResult {
            consumers,
            forwarders,
            links,
            trace: self.trace,
            end_ns,
            events: self.events,
            producer_interests: self.producer_interests,
            expected_gofs: self.expected_gofs,
        }
    }
}

fn hop(mut i: Interest) -> Interest {
    i.hop_count = i.hop_count.saturating_add(1);
    i
}
