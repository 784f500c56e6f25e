use std::collections::{BTreeMap, HashMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::dash::abr::{abr_select, hybrid_select, representations, AbrVariant, Representation};
use crate::dash::cdn::{CdnCache, CdnCounters, ObjectId, DEFAULT_CDN_CAPACITY_BYTES};
use crate::dash::transport::{RenoConfig, RenoSender, SendOut, SenderCounters, StreamReceiver};
use crate::endpoints::{GofLedgerEntry, MetaData};
use crate::error::{Error, Result};
use crate::netsim::{time, Link, NodeId, NodeRole, Scheduler, SimTime, Topology, TraceRecord, TraceSink, TxOutcome};
use crate::sim::LinkReport;
use crate::wire::HEADER_OVERHEAD;

/// Application request size on the wire, excluding the segment header.
pub const REQUEST_BYTES: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DashOptions {
    pub transport: RenoConfig,
    pub cache_capacity_bytes: u64,
    pub safety: f64,
    pub frame_budget_s: f64,
    /// EWMA weight of each new per-object throughput sample.
    pub estimator_alpha: f64,
    /// Buffer target of the buffer-aware variant, in seconds of content.
    pub target_buffer_s: f64,
    pub warmup_s: f64,
    pub trace: bool,
    pub max_sim_s: f64,
}

impl Default for DashOptions {
    fn default() -> Self {
        Self {
            transport: RenoConfig::default(),
            cache_capacity_bytes: DEFAULT_CDN_CAPACITY_BYTES,
            safety: 0.8,
            frame_budget_s: 1.0,
            estimator_alpha: 0.3,
            target_buffer_s: 2.0,
            warmup_s: 0.5,
            trace: false,
            max_sim_s: 120.0,
        }
    }
}

impl DashOptions {
    pub fn validate(&self) -> Result<()> {
        self.transport.validate()?;
        if !(self.safety > 0.0) {
            return Err(Error::config("dash.safety", "must be positive"));
        }
        if !(self.frame_budget_s > 0.0) {
            return Err(Error::config("dash.frame_budget_s", "must be positive"));
        }
        if !(self.estimator_alpha > 0.0 && self.estimator_alpha <= 1.0) {
            return Err(Error::config("dash.estimator_alpha", "must be in (0, 1]"));
        }
        if !(self.target_buffer_s >= 0.0) {
            return Err(Error::config("dash.target_buffer_s", "must be non-negative"));
        }
        if !(self.warmup_s >= 0.0) {
            return Err(Error::config("dash.warmup_s", "must be non-negative"));
        }
        Ok(())
    }
}

type StreamId = usize;

#[derive(Debug, Clone, Copy)]
enum Pkt {
    Seg { stream: StreamId, seq: u64, len: u32 },
    Ack { stream: StreamId, cum: u64 },
}

impl Pkt {
    fn wire_size(&self) -> usize {
        match self {
            Pkt::Seg { len, .. } => HEADER_OVERHEAD + *len as usize,
            Pkt::Ack { .. } => HEADER_OVERHEAD,
        }
    }
}

#[derive(Debug, Clone, Copy)]
enum Msg {
    Request(ObjectId),
    Object(ObjectId, u64),
}

#[derive(Debug)]
struct Stream {
    src: NodeId,
    dst: NodeId,
    tx: RenoSender,
    rx: StreamReceiver,
    /// Undelivered messages with the segment index one past their end.
    messages: VecDeque<(u64, Msg)>,
}

#[derive(Debug)]
enum Event {
    Arrive { to: NodeId, pkt: Pkt },
    Rto { stream: StreamId, epoch: u64 },
    Start { consumer: usize },
    GofStart { consumer: usize, index: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum CState {
    Idle,
    Manifest,
    Streaming,
    Done,
    Failed,
}

#[derive(Debug, Clone)]
struct Fetch {
    index: usize,
    rep: usize,
    entry: GofLedgerEntry,
    retx_base: u64,
}

#[derive(Debug)]
struct DashConsumer {
    node: NodeId,
    cache: NodeId,
    start: SimTime,
    state: CState,
    est_bps: Option<f64>,
    manifest_sent: SimTime,
    first_gof_at: SimTime,
    active: Option<Fetch>,
    deferred: Option<usize>,
    /// Playback deadline of the newest completed GoF.
    buffered_until: SimTime,
    ledger: Vec<GofLedgerEntry>,
    objects_by_level: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DashConsumerReport {
    pub node: NodeId,
    pub name: String,
    pub start_ns: SimTime,
    pub phase: String,
    pub ledger: Vec<GofLedgerEntry>,
    /// Segments retransmitted on streams to and from this consumer.
    pub retransmissions: u64,
    pub timeouts: u64,
    pub objects_by_level: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CacheReport {
    pub node: NodeId,
    pub name: String,
    pub counters: CdnCounters,
    pub used_bytes: u64,
}

#[derive(Debug)]
pub struct DashRunResult {
    pub variant: AbrVariant,
    pub consumers: Vec<DashConsumerReport>,
    pub caches: Vec<CacheReport>,
    pub links: Vec<LinkReport>,
    pub streams: Vec<SenderCounters>,
    pub trace: TraceSink,
    pub end_ns: SimTime,
    pub events: u64,
    pub origin_objects: u64,
    pub expected_gofs: usize,
}

/// DASH-style delivery: consumers fetch whole representations through their
/// access cache over persistent Reno streams; misses are fetched whole from
/// the origin before being served.
pub struct DashWorld {
    topo: Topology,
    links: Vec<Link>,
    /// `route[node][dst]`: face of `node` toward `dst`.
    route: Vec<Vec<usize>>,
    sched: Scheduler<Event>,
    opts: DashOptions,
    variant: AbrVariant,
    mss: u32,
    manifest_bytes: u64,
    reps: Vec<Vec<Representation>>,
    gof_ids: Vec<u32>,
    period: SimTime,
    streams: Vec<Stream>,
    stream_of: HashMap<(NodeId, NodeId), StreamId>,
    caches: HashMap<NodeId, CdnCache>,
    /// Consumers (or caches) waiting on an in-flight origin fetch, per cache and object.
    waiting: HashMap<(NodeId, ObjectId), Vec<NodeId>>,
    consumers: Vec<DashConsumer>,
    consumer_at: HashMap<NodeId, usize>,
    origin: NodeId,
    trace: TraceSink,
    max_time: SimTime,
    events: u64,
    origin_objects: u64,
    /// Scripted one-shot drops: (stream src, stream dst, segment seq).
    injected: Vec<(NodeId, NodeId, u64)>,
}

fn routes(topo: &Topology) -> Vec<Vec<usize>> {
    let n = topo.len();
    let mut route = vec![vec![usize::MAX; n]; n];
    for dst in 0..n {
        let mut seen = vec![false; n];
        seen[dst] = true;
        let mut q = VecDeque::from([dst]);
        while let Some(u) = q.pop_front() {
            for &(_, v) in topo.faces(u) {
                if !seen[v] {
                    seen[v] = true;
                    route[v][dst] = topo.face_to(v, u).expect("adjacent");
                    q.push_back(v);
                }
            }
        }
    }
    route
}

impl DashWorld {
    pub fn new(
        topo: Topology,
        links: Vec<Link>,
        md: &MetaData,
        variant: AbrVariant,
        opts: &DashOptions,
        starts: &[SimTime],
    ) -> Result<Self> {
        opts.validate()?;
        if links.len() != topo.edges.len() {
            return Err(Error::contract("one link per topology edge"));
        }
        let origin = topo.producer();
        let mut caches = HashMap::new();
        for (id, n) in topo.nodes.iter().enumerate() {
            if n.caches && n.role == NodeRole::Router {
                caches.insert(id, CdnCache::new(opts.cache_capacity_bytes));
            }
        }
        let mut consumers = Vec::new();
        let mut consumer_at = HashMap::new();
        let mut sched = Scheduler::new();
        for (k, c) in topo.consumers().into_iter().enumerate() {
            // Nearest cache on the path to the origin, else the origin itself.
            let cache = topo
                .path_to_producer(c)
                .into_iter()
                .find(|n| caches.contains_key(n))
                .unwrap_or(origin);
            let start = if starts.is_empty() { 0 } else { starts[k % starts.len()] };
            sched.schedule(start, Event::Start { consumer: k })?;
            consumer_at.insert(c, k);
            consumers.push(DashConsumer {
                node: c,
                cache,
                start,
                state: CState::Idle,
                est_bps: None,
                manifest_sent: 0,
                first_gof_at: 0,
                active: None,
                deferred: None,
                buffered_until: 0,
                ledger: Vec::new(),
                objects_by_level: BTreeMap::new(),
            });
        }
        let route = routes(&topo);
        Ok(Self {
            route,
            links,
            sched,
            opts: opts.clone(),
            variant,
            mss: md.mtu_payload,
            manifest_bytes: md.to_json().len() as u64,
            reps: representations(md),
            gof_ids: md.gofs.iter().map(|g| g.gof).collect(),
            period: time::from_secs(md.gof_frames as f64 / md.frame_rate.max(1) as f64),
            streams: Vec::new(),
            stream_of: HashMap::new(),
            caches,
            waiting: HashMap::new(),
            consumers,
            consumer_at,
            origin,
            trace: if opts.trace {
                TraceSink::enabled()
            } else {
                TraceSink::disabled()
            },
            max_time: time::from_secs(opts.max_sim_s),
            events: 0,
            origin_objects: 0,
            injected: Vec::new(),
            topo,
        })
    }

    /// Drops the first transmission of segment `seq` on the `src -> dst` stream.
    pub fn inject_loss(&mut self, src: NodeId, dst: NodeId, seq: u64) {
        self.injected.push((src, dst, seq));
    }

    fn object_bytes(&self, obj: ObjectId) -> u64 {
        match obj {
            ObjectId::Manifest => self.manifest_bytes,
            ObjectId::Gof { gof, rep } => {
                let i = self.gof_ids.iter().position(|&g| g == gof).expect("known GoF");
                self.reps[i][rep].bytes
            }
        }
    }

    fn stream(&mut self, src: NodeId, dst: NodeId) -> StreamId {
        if let Some(&s) = self.stream_of.get(&(src, dst)) {
            return s;
        }
        self.streams.push(Stream {
            src,
            dst,
            tx: RenoSender::new(self.opts.transport.clone(), self.mss),
            rx: StreamReceiver::default(),
            messages: VecDeque::new(),
        });
        let id = self.streams.len() - 1;
        self.stream_of.insert((src, dst), id);
        id
    }

    fn write(&mut self, now: SimTime, src: NodeId, dst: NodeId, msg: Msg) {
        let s = self.stream(src, dst);
        let bytes = match msg {
            Msg::Request(_) => REQUEST_BYTES,
            Msg::Object(_, b) => b,
        };
        let end = self.streams[s].tx.write(bytes);
        self.streams[s].messages.push_back((end, msg));
        let mut out = Vec::new();
        self.streams[s].tx.pump(now, &mut out);
        self.apply_send(now, s, out);
    }

    fn apply_send(&mut self, now: SimTime, s: StreamId, out: Vec<SendOut>) {
        let src = self.streams[s].src;
        for o in out {
            match o {
                SendOut::Segment { seq, len, .. } => {
                    self.transmit(now, src, self.streams[s].dst, Pkt::Seg { stream: s, seq, len })
                }
                SendOut::ArmRto { at, epoch } => {
                    self.sched
                        .schedule(at, Event::Rto { stream: s, epoch })
                        .expect("future timer");
                }
            }
        }
    }

    fn transmit(&mut self, now: SimTime, node: NodeId, dst: NodeId, pkt: Pkt) {
        if let Pkt::Seg { stream, seq, .. } = pkt {
            let key = (self.streams[stream].src, self.streams[stream].dst, seq);
            if node == key.0 {
                if let Some(i) = self.injected.iter().position(|&k| k == key) {
                    self.injected.swap_remove(i);
                    return;
                }
            }
        }
        let face = self.route[node][dst];
        let (link, peer) = self.topo.faces(node)[face];
        let size = pkt.wire_size();
        let outcome = self.links[link].transmit(now, node, size);
        let dir = self.links[link].direction_from(node).unwrap_or(0);
        self.trace.record(|| {
            let (kind, name) = match pkt {
                Pkt::Seg { stream, seq, .. } => ("segment", format!("stream{stream}/seq={seq}")),
                Pkt::Ack { stream, cum } => ("ack", format!("stream{stream}/ack={cum}")),
            };
            TraceRecord {
                time_ns: now,
                node,
                link,
                dir,
                kind,
                name,
                bytes: size,
                outcome: crate::netsim::outcome_label(&outcome),
            }
        });
        if let TxOutcome::Delivered { at } = outcome {
            self.sched
                .schedule(at, Event::Arrive { to: peer, pkt })
                .expect("deliveries are in the future");
        }
    }

    fn arrive(&mut self, now: SimTime, to: NodeId, pkt: Pkt) {
        let (stream, dst) = match pkt {
            Pkt::Seg { stream, .. } => (stream, self.streams[stream].dst),
            Pkt::Ack { stream, .. } => (stream, self.streams[stream].src),
        };
        if to != dst {
            self.transmit(now, to, dst, pkt);
            return;
        }
        match pkt {
            Pkt::Seg { seq, .. } => {
                let st = &mut self.streams[stream];
                let cum = st.rx.on_segment(seq);
                let (src, me) = (st.src, st.dst);
                let mut ready = Vec::new();
                while st.messages.front().is_some_and(|&(end, _)| end <= cum) {
                    ready.push(st.messages.pop_front().unwrap().1);
                }
                self.transmit(now, me, src, Pkt::Ack { stream, cum });
                for m in ready {
                    self.on_message(now, me, src, m);
                }
            }
            Pkt::Ack { cum, .. } => {
                let mut out = Vec::new();
                self.streams[stream].tx.on_ack(now, cum, &mut out);
                self.apply_send(now, stream, out);
            }
        }
    }

    fn on_message(&mut self, now: SimTime, at: NodeId, from: NodeId, msg: Msg) {
        match msg {
            Msg::Request(obj) => {
                if at == self.origin {
                    self.origin_objects += 1;
                    let b = self.object_bytes(obj);
                    self.write(now, at, from, Msg::Object(obj, b));
                } else if let Some(cache) = self.caches.get_mut(&at) {
                    if let Some(b) = cache.lookup(&obj) {
                        self.write(now, at, from, Msg::Object(obj, b));
                    } else {
                        let w = self.waiting.entry((at, obj)).or_default();
                        w.push(from);
                        if w.len() == 1 {
                            let up = self.origin;
                            self.write(now, at, up, Msg::Request(obj));
                        }
                    }
                }
            }
            Msg::Object(obj, bytes) => {
                if let Some(&k) = self.consumer_at.get(&at) {
                    self.consumer_object(now, k, obj, bytes);
                } else if let Some(cache) = self.caches.get_mut(&at) {
                    cache.insert(obj, bytes);
                    for w in self.waiting.remove(&(at, obj)).unwrap_or_default() {
                        self.write(now, at, w, Msg::Object(obj, bytes));
                    }
                }
            }
        }
    }

    fn consumer_retx(&self, k: usize) -> (u64, u64) {
        let c = &self.consumers[k];
        let mut r = (0, 0);
        for key in [(c.node, c.cache), (c.cache, c.node)] {
            if let Some(&s) = self.stream_of.get(&key) {
                let k = self.streams[s].tx.counters();
                r.0 += k.retransmissions;
                r.1 += k.timeouts;
            }
        }
        r
    }

    fn scheduled(&self, k: usize, index: usize) -> SimTime {
        self.consumers[k].first_gof_at + self.period * index as SimTime
    }

    /// Earliest request time of GoF `index`: the buffer-aware variant may run
    /// ahead of schedule up to its buffer target.
    fn release_time(&self, k: usize, index: usize) -> SimTime {
        let s = self.scheduled(k, index);
        match self.variant {
            AbrVariant::DashPc => s,
            AbrVariant::PccDash => {
                let lead = time::from_secs(self.opts.target_buffer_s).saturating_sub(self.period);
                s.saturating_sub(lead).max(self.consumers[k].first_gof_at)
            }
        }
    }

    fn consumer_start(&mut self, now: SimTime, k: usize) {
        let c = &mut self.consumers[k];
        if c.state != CState::Idle {
            return;
        }
        c.state = CState::Manifest;
        c.manifest_sent = now;
        let (node, cache) = (c.node, c.cache);
        self.write(now, node, cache, Msg::Request(ObjectId::Manifest));
    }

    fn sample(&mut self, k: usize, bytes: u64, dt: SimTime) {
        let s = bytes as f64 * 8.0 / time::to_secs(dt.max(1));
        let a = self.opts.estimator_alpha;
        let c = &mut self.consumers[k];
        c.est_bps = Some(match c.est_bps {
            None => s,
            Some(e) => a * s + (1.0 - a) * e,
        });
    }

    fn consumer_object(&mut self, now: SimTime, k: usize, obj: ObjectId, bytes: u64) {
        match obj {
            ObjectId::Manifest => {
                if self.consumers[k].state != CState::Manifest {
                    return;
                }
                let dt = now - self.consumers[k].manifest_sent;
                self.sample(k, bytes, dt);
                let c = &mut self.consumers[k];
                c.state = CState::Streaming;
                c.first_gof_at = now + time::from_secs(self.opts.warmup_s);
                let at = self.release_time(k, 0);
                self.sched
                    .schedule(at, Event::GofStart { consumer: k, index: 0 })
                    .expect("future");
            }
            ObjectId::Gof { gof, rep } => {
                let Some(f) = self.consumers[k].active.take() else {
                    return;
                };
                debug_assert_eq!((self.gof_ids[f.index], f.rep), (gof, rep));
                let dt = now - f.entry.first_send_ns;
                self.sample(k, bytes, dt);
                let (retx, _) = self.consumer_retx(k);
                let mut e = f.entry;
                e.completion_ns = Some(now);
                e.unique_chunks = e.chunks_requested;
                e.unique_bytes = bytes;
                e.data_received = e.chunks_requested;
                e.retransmissions = retx - f.retx_base;
                let level = self.reps[f.index][f.rep].level.clone();
                let sch = self.scheduled(k, f.index);
                let c = &mut self.consumers[k];
                *c.objects_by_level.entry(level).or_insert(0) += 1;
                c.buffered_until = c.buffered_until.max(sch + self.period);
                c.ledger.push(e);
                self.after_gof(now, k, f.index);
            }
        }
    }

    fn after_gof(&mut self, now: SimTime, k: usize, index: usize) {
        if index + 1 >= self.gof_ids.len() {
            self.consumers[k].state = CState::Done;
        } else if let Some(next) = self.consumers[k].deferred.take() {
            self.begin_gof(now, k, next);
        }
    }

    fn begin_gof(&mut self, now: SimTime, k: usize, index: usize) {
        let reps = &self.reps[index];
        let est = self.consumers[k].est_bps.unwrap_or(0.0);
        let rep = match self.variant {
            AbrVariant::DashPc => abr_select(est, reps, self.opts.safety, self.opts.frame_budget_s),
            AbrVariant::PccDash => {
                let buffer_s = time::to_secs(self.consumers[k].buffered_until.saturating_sub(now));
                hybrid_select(
                    est,
                    reps,
                    self.opts.safety,
                    self.opts.frame_budget_s,
                    buffer_s,
                    self.opts.target_buffer_s,
                )
            }
        };
        let bytes = reps[rep].bytes;
        let gof = self.gof_ids[index];
        let chunks = bytes.div_ceil(self.mss as u64).max(1);
        let (retx_base, _) = self.consumer_retx(k);
        let entry = GofLedgerEntry {
            consumer: k,
            gof,
            level: format!("L{}", reps[rep].level),
            segments: reps[rep].level.clone(),
            scheduled_ns: self.scheduled(k, index),
            first_send_ns: now,
            completion_ns: None,
            chunks_requested: chunks,
            unique_chunks: 0,
            unique_bytes: 0,
            interests_sent: 1,
            data_received: 0,
            retransmissions: 0,
            incomplete: false,
        };
        self.consumers[k].active = Some(Fetch {
            index,
            rep,
            entry,
            retx_base,
        });
        if index + 1 < self.gof_ids.len() {
            let at = self.release_time(k, index + 1).max(now);
            self.sched
                .schedule(
                    at,
                    Event::GofStart {
                        consumer: k,
                        index: index + 1,
                    },
                )
                .expect("future");
        }
        let (node, cache) = (self.consumers[k].node, self.consumers[k].cache);
        self.write(now, node, cache, Msg::Request(ObjectId::Gof { gof, rep }));
    }

    fn on_gof_timer(&mut self, now: SimTime, k: usize, index: usize) {
        let c = &mut self.consumers[k];
        if c.state != CState::Streaming {
            return;
        }
        if c.active.is_some() {
            c.deferred = Some(index);
        } else {
            self.begin_gof(now, k, index);
        }
    }

    /// Abandons everything carried by a stream that exhausted its timeouts.
    fn fail_stream(&mut self, now: SimTime, s: StreamId) {
        let (src, dst) = (self.streams[s].src, self.streams[s].dst);
        log::warn!("stream {s} ({src}->{dst}) gave up");
        self.stream_of.remove(&(src, dst));
        let msgs: Vec<Msg> = self.streams[s].messages.drain(..).map(|m| m.1).collect();
        for m in msgs {
            let obj = match m {
                Msg::Request(o) | Msg::Object(o, _) => o,
            };
            let mut affected: Vec<NodeId> = Vec::new();
            for end in [src, dst] {
                if self.consumer_at.contains_key(&end) {
                    affected.push(end);
                } else if let Some(w) = self.waiting.remove(&(end, obj)) {
                    affected.extend(w);
                }
            }
            for node in affected {
                if let Some(&k) = self.consumer_at.get(&node) {
                    self.consumer_abort(now, k, obj);
                }
            }
        }
    }

    fn consumer_abort(&mut self, now: SimTime, k: usize, obj: ObjectId) {
        match obj {
            ObjectId::Manifest => {
                if self.consumers[k].state == CState::Manifest {
                    self.consumers[k].state = CState::Failed;
                }
            }
            ObjectId::Gof { gof, rep } => {
                let matches = self.consumers[k]
                    .active
                    .as_ref()
                    .is_some_and(|f| self.gof_ids[f.index] == gof && f.rep == rep);
                if matches {
                    let f = self.consumers[k].active.take().unwrap();
                    let (retx, _) = self.consumer_retx(k);
                    let mut e = f.entry;
                    e.incomplete = true;
                    e.retransmissions = retx.saturating_sub(f.retx_base);
                    self.consumers[k].ledger.push(e);
                    self.after_gof(now, k, f.index);
                }
            }
        }
    }

    pub fn run(mut self) -> DashRunResult {
        let mut end = 0;
        while let Some((now, ev)) = self.sched.pop() {
            if now > self.max_time {
                log::warn!("simulation stopped at the {} s limit", time::to_secs(self.max_time));
                break;
            }
            end = now;
            self.events += 1;
            match ev {
                Event::Arrive { to, pkt } => self.arrive(now, to, pkt),
                Event::Rto { stream, epoch } => {
                    let mut out = Vec::new();
                    self.streams[stream].tx.on_rto(now, epoch, &mut out);
                    self.apply_send(now, stream, out);
                    if self.streams[stream].tx.failed() && !self.streams[stream].messages.is_empty() {
                        self.fail_stream(now, stream);
                    }
                }
                Event::Start { consumer } => self.consumer_start(now, consumer),
                Event::GofStart { consumer, index } => self.on_gof_timer(now, consumer, index),
            }
        }
        self.finish(end)
    }

    fn finish(self, end_ns: SimTime) -> DashRunResult {
        let consumers = (0..self.consumers.len())
            .map(|k| {
                let c = &self.consumers[k];
                let (retransmissions, timeouts) = self.consumer_retx(k);
                DashConsumerReport {
                    node: c.node,
                    name: self.topo.nodes[c.node].name.clone(),
                    start_ns: c.start,
                    phase: match c.state {
                        CState::Idle => "idle",
                        CState::Manifest => "bootstrap",
                        CState::Streaming => "streaming",
                        CState::Done => "done",
                        CState::Failed => "failed",
                    }
                    .into(),
                    ledger: c.ledger.clone(),
                    retransmissions,
                    timeouts,
                    objects_by_level: c.objects_by_level.clone(),
                }
            })
            .collect();
        let mut caches: Vec<CacheReport> = self
            .caches
            .iter()
            .map(|(&node, c)| CacheReport {
                node,
                name: self.topo.nodes[node].name.clone(),
                counters: c.counters(),
                used_bytes: c.used_bytes(),
            })
            .collect();
        caches.sort_by_key(|c| c.node);
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
        DashRunResult {
            variant: self.variant,
            consumers,
            caches,
            links,
            streams: self.streams.iter().map(|s| s.tx.counters()).collect(),
            trace: self.trace,
            end_ns,
            events: self.events,
            origin_objects: self.origin_objects,
            expected_gofs: self.gof_ids.len(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::endpoints::{GofEntry, SegmentInfo};
    use crate::layering::RetentionLadder;
    use crate::netsim::{LinkSpec, LossModel, TopologyKind, TopologyParams};

    fn md(n_gofs: u32, seg: u64) -> MetaData {
        let s = |label: &str, bytes| SegmentInfo {
            label: label.into(),
            bytes,
            chunks: crate::wire::chunk_count(bytes as usize, 1200),
        };
        MetaData {
            dataset: "DS".into(),
            frame_rate: 30,
            octree_depth: 7,
            gof_frames: 30,
            ladder: RetentionLadder::default(),
            color_bytes_per_point: 3,
            mtu_payload: 1200,
            time_windows: vec!["TimeWindow_20240314T120000".into()],
            gofs: (1..=n_gofs)
                .map(|g| GofEntry {
                    gof: g,
                    time_window: "TimeWindow_20240314T120000".into(),
                    top_layer: s("TopLayer", 1000),
                    segments: ["30", "enhanced30-50", "enhanced50-75", "enhanced75-100"]
                        .iter()
                        .map(|l| s(l, seg))
                        .collect(),
                })
                .collect(),
        }
    }

    fn linear(consumers: usize, loss: LossModel, bw: u64) -> (Topology, Vec<Link>) {
        let t = Topology::build(
            TopologyKind::LinearDebug,
            TopologyParams {
                consumers,
                forwarders: 1,
            },
        )
        .unwrap();
        let links = t.instantiate_links(
            LinkSpec::new(bw, 2.0).with_loss(loss),
            LinkSpec::new(1_000_000_000, 2.0),
            5,
        );
        (t, links)
    }

    fn run(consumers: usize, loss: LossModel, bw: u64, md: &MetaData, starts: &[SimTime]) -> DashRunResult {
        let (t, l) = linear(consumers, loss, bw);
        DashWorld::new(t, l, md, AbrVariant::DashPc, &DashOptions::default(), starts)
            .unwrap()
            .run()
    }

    #[test]
    fn lossless_fetch_matches_hand_model() {
        let m = md(2, 60_000);
        let r = run(1, LossModel::None, 10_000_000, &m, &[0]);
        let c = &r.consumers[0];
        assert_eq!(c.phase, "done");
        assert_eq!(c.ledger.len(), 2);
        let e = &c.ledger[1];
        // Bottleneck serialization of the object plus a few path RTTs of slow start.
        let ser_ms = e.chunks_requested as f64 * 1240.0 * 8.0 / 10e6 * 1000.0;
        let d = e.delay_ms().unwrap();
        assert!(d >= ser_ms && d <= ser_ms + 60.0, "delay {d} vs serialization {ser_ms}");
        assert_eq!(c.retransmissions, 0);
    }

    #[test]
    fn second_consumer_hits_warm_cache() {
        let m = md(2, 20_000);
        let starts = [0, 300 * time::NS_PER_MS];
        let r = run(2, LossModel::None, 50_000_000, &m, &starts);
        let cache = &r.caches[0].counters;
        assert_eq!(cache.misses, 2);
        assert_eq!(cache.hits, 2);
        assert_eq!(r.origin_objects, 3);
    }

    fn hol_delay(drop_seq: Option<u64>) -> (f64, u64) {
        let m = md(1, 100_000);
        let (t, l) = linear(1, LossModel::None, 50_000_000);
        let (consumer, cache) = (t.consumers()[0], 1);
        let mut w = DashWorld::new(t, l, &m, AbrVariant::DashPc, &DashOptions::default(), &[0]).unwrap();
        if let Some(seq) = drop_seq {
            w.inject_loss(cache, consumer, seq);
        }
        let r = w.run();
        (
            r.consumers[0].ledger[0].delay_ms().unwrap(),
            r.consumers[0].retransmissions,
        )
    }

    #[test]
    fn head_of_line_loss_costs_at_least_a_recovery() {
        let (d0, _) = hol_delay(None);
        // Segment 0 carries the manifest; the object spans segments 1..=84.
        let (early, retx) = hol_delay(Some(3));
        assert_eq!(retx, 1);
        // One consumer-cache round trip (2 ms each way) at least.
        assert!(early >= d0 + 4.0, "{early} vs {d0}");
        let (tail, _) = hol_delay(Some(84));
        // No later segment produces dupacks, so only the RTO recovers it.
        assert!(tail >= d0 + 200.0, "{tail} vs {d0}");
    }
}
