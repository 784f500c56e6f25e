use std::collections::BTreeMap;

use rustc_hash::FxHashMap;

use bytes::{Bytes, BytesMut};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::endpoints::estimator::BandwidthEstimator;
use crate::endpoints::ledger::GofLedgerEntry;
use crate::endpoints::metadata::MetaData;
use crate::endpoints::selection::{select_tier, DEFAULT_FRAME_BUDGET_S, DEFAULT_SAFETY};
use crate::error::{Error, Result};
use crate::naming::Name;
use crate::netsim::{time, SimTime};
use crate::wire::{DataPacket, Interest};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConsumerConfig {
    /// In-flight Interests per segment pipeline.
    pub window: usize,
    pub initial_timeout_ms: f64,
    pub min_timeout_ms: f64,
    pub rtt_alpha: f64,
    pub max_retries: u32,
    /// Delay between MetaData arrival and the first GoF request.
    pub warmup_s: f64,
    pub frame_budget_s: f64,
    pub safety: f64,
    pub estimator_alpha: f64,
    pub estimator_bin_ms: f64,
    /// Pins the requested tier instead of consulting the estimator.
    pub fixed_tier: Option<usize>,
    /// Keep received segment payloads (for decoding at the receiver).
    pub keep_payloads: bool,
}

impl Default for ConsumerConfig {
    fn default() -> Self {
        Self {
            window: 64,
            initial_timeout_ms: 1000.0,
            min_timeout_ms: 100.0,
            rtt_alpha: 0.125,
            max_retries: 5,
            warmup_s: 0.5,
            frame_budget_s: DEFAULT_FRAME_BUDGET_S,
            safety: DEFAULT_SAFETY,
            estimator_alpha: crate::endpoints::estimator::DEFAULT_ALPHA,
            estimator_bin_ms: crate::endpoints::estimator::DEFAULT_BIN_MS,
            fixed_tier: None,
            keep_payloads: false,
        }
    }
}

impl ConsumerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::config("consumer.window", "must be at least 1"));
        }
        if !(self.initial_timeout_ms > 0.0) {
            return Err(Error::config("consumer.initial_timeout_ms", "must be positive"));
        }
        if !(self.min_timeout_ms > 0.0) {
            return Err(Error::config("consumer.min_timeout_ms", "must be positive"));
        }
        if !(self.rtt_alpha > 0.0 && self.rtt_alpha <= 1.0) {
            return Err(Error::config("consumer.rtt_alpha", "must be in (0, 1]"));
        }
        if !(self.estimator_alpha > 0.0 && self.estimator_alpha <= 1.0) {
            return Err(Error::config("consumer.estimator_alpha", "must be in (0, 1]"));
        }
        if !(self.estimator_bin_ms > 0.0) {
            return Err(Error::config("consumer.estimator_bin_ms", "must be positive"));
        }
        if !(self.safety > 0.0) {
            return Err(Error::config("consumer.safety", "must be positive"));
        }
        if !(self.frame_budget_s > 0.0) {
            return Err(Error::config("consumer.frame_budget_s", "must be positive"));
        }
        if !(self.warmup_s >= 0.0) {
            return Err(Error::config("consumer.warmup_s", "must be non-negative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ConsumerTimer {
    /// Stale when the Interest was answered or reissued since.
    Timeout {
        name: Name,
        issue: u64,
    },
    GofStart {
        index: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConsumerOutput {
    Send(Interest),
    Timer { at: SimTime, timer: ConsumerTimer },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Idle,
    Bootstrap,
    Streaming,
    Done,
    /// MetaData could not be fetched; every GoF counts as incomplete.
    Failed,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConsumerStats {
    pub interests_sent: u64,
    pub retransmissions: u64,
    /// Data for a name with nothing outstanding (late copy after a reissue, or an abandoned GoF).
    pub duplicates: u64,
    pub data_received: u64,
}

#[derive(Debug, Clone)]
struct Pipeline {
    segment: Name,
    label: String,
    total: Option<u32>,
    next: u32,
    in_flight: usize,
    received: u32,
    parts: Option<Vec<Option<Bytes>>>,
}

impl Pipeline {
    fn new(segment: Name, label: String, total: Option<u32>, keep: bool) -> Self {
        Self {
            segment,
            label,
            total,
            next: 0,
            in_flight: 0,
            received: 0,
            parts: keep.then(Vec::new),
        }
    }

    fn complete(&self) -> bool {
        self.total.is_some_and(|t| self.received >= t)
    }

    fn assemble(&self) -> Option<Bytes> {
        let parts = self.parts.as_ref()?;
        let mut out = BytesMut::new();
        for p in parts {
            out.extend_from_slice(p.as_ref()?);
        }
        Some(out.freeze())
    }
}

#[derive(Debug, Clone)]
struct Pending {
    pipeline: usize,
    chunk: u32,
    sent_at: SimTime,
    retries: u32,
    issue: u64,
    interest: Interest,
}

#[derive(Debug, Clone)]
struct ActiveGof {
    index: usize,
    entry: GofLedgerEntry,
}

/// Adaptive consumer as a pure state machine: inputs are `start`, `on_data`
/// and `on_timer`; outputs are Interests to send and timers to arm.
#[derive(Debug)]
pub struct Consumer {
    id: usize,
    cfg: ConsumerConfig,
    rng: ChaCha8Rng,
    metadata_name: Name,
    metadata: Option<MetaData>,
    phase: Phase,
    estimator: BandwidthEstimator,
    srtt_ns: Option<f64>,
    issue_seq: u64,
    outstanding: FxHashMap<Name, Pending>,
    pipelines: Vec<Pipeline>,
    active: Option<ActiveGof>,
    deferred: Option<usize>,
    first_gof_at: SimTime,
    ledger: Vec<GofLedgerEntry>,
    stats: ConsumerStats,
    packets_by_segment: BTreeMap<String, u64>,
    received: FxHashMap<Name, Bytes>,
}

impl Consumer {
    pub fn new(id: usize, metadata_name: Name, cfg: ConsumerConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(0x1000 + id as u64);
        let estimator = BandwidthEstimator::new(cfg.estimator_alpha, cfg.estimator_bin_ms);
        Self {
            id,
            cfg,
            rng,
            metadata_name,
            metadata: None,
            phase: Phase::Idle,
            estimator,
            srtt_ns: None,
            issue_seq: 0,
            outstanding: FxHashMap::default(),
            pipelines: Vec::new(),
            active: None,
            deferred: None,
            first_gof_at: 0,
            ledger: Vec::new(),
            stats: ConsumerStats::default(),
            packets_by_segment: BTreeMap::new(),
            received: FxHashMap::default(),
        }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn ledger(&self) -> &[GofLedgerEntry] {
        &self.ledger
    }

    pub fn stats(&self) -> &ConsumerStats {
        &self.stats
    }

    pub fn metadata(&self) -> Option<&MetaData> {
        self.metadata.as_ref()
    }

    /// Unique Data packets per segment label, over completed and abandoned GoFs.
    pub fn packets_by_segment(&self) -> &BTreeMap<String, u64> {
        &self.packets_by_segment
    }

    /// Reassembled segment payloads; populated only with `keep_payloads`.
    pub fn received_segments(&self) -> &FxHashMap<Name, Bytes> {
        &self.received
    }

    pub fn outstanding(&self) -> usize {
        self.outstanding.len()
    }

    /// Current retransmission timeout.
    pub fn rto(&self) -> SimTime {
        match self.srtt_ns {
            None => time::from_ms(self.cfg.initial_timeout_ms),
            Some(s) => ((2.0 * s).round() as SimTime).max(time::from_ms(self.cfg.min_timeout_ms)),
        }
    }

    pub fn estimate_bps(&mut self, now: SimTime) -> f64 {
        self.estimator.estimate_bps(now)
    }

    /// Bootstrap: request the MetaData object.
    pub fn start(&mut self, now: SimTime) -> Vec<ConsumerOutput> {
        let mut out = Vec::new();
        if self.phase != Phase::Idle {
            return out;
        }
        self.phase = Phase::Bootstrap;
        self.pipelines = vec![Pipeline::new(self.metadata_name.clone(), "MetaData".into(), None, true)];
        self.fill(now, &mut out);
        out
    }

    pub fn on_data(&mut self, now: SimTime, d: &DataPacket) -> Vec<ConsumerOutput> {
        let mut out = Vec::new();
        self.stats.data_received += 1;
        let Some(p) = self.outstanding.remove(&d.name) else {
            self.stats.duplicates += 1;
            return out;
        };
        if p.retries == 0 {
            let sample = (now - p.sent_at) as f64;
            self.srtt_ns = Some(match self.srtt_ns {
                None => sample,
                Some(s) => s + self.cfg.rtt_alpha * (sample - s),
            });
        }
        self.estimator.on_bytes(now, d.payload.len());
        let pl = &mut self.pipelines[p.pipeline];
        pl.in_flight -= 1;
        pl.received += 1;
        if pl.total.is_none() {
            pl.total = Some(d.total_chunks.max(1));
        }
        if let Some(parts) = pl.parts.as_mut() {
            let idx = p.chunk as usize;
            if parts.len() <= idx {
                parts.resize(idx + 1, None);
            }
            parts[idx] = Some(d.payload.clone());
        }
        if let Some(a) = self.active.as_mut() {
            a.entry.unique_chunks += 1;
            a.entry.unique_bytes += d.payload.len() as u64;
            a.entry.data_received += 1;
            *self.packets_by_segment.entry(pl.label.clone()).or_insert(0) += 1;
        }
        if self.pipelines.iter().all(Pipeline::complete) {
            match self.phase {
                Phase::Bootstrap => self.on_metadata(now, &mut out),
                Phase::Streaming => self.finish_gof(now, false, &mut out),
                _ => {}
            }
        } else {
            self.fill(now, &mut out);
        }
        self.estimator.set_busy(now, !self.outstanding.is_empty());
        out
    }

    pub fn on_timer(&mut self, now: SimTime, timer: &ConsumerTimer) -> Vec<ConsumerOutput> {
        let mut out = Vec::new();
        match timer {
            ConsumerTimer::Timeout { name, issue } => {
                let Some(p) = self.outstanding.get_mut(name) else {
                    return out;
                };
                if p.issue != *issue {
                    return out;
                }
                if p.retries >= self.cfg.max_retries {
                    match self.phase {
                        Phase::Bootstrap => {
                            log::warn!("consumer {} could not fetch MetaData", self.id);
                            self.outstanding.clear();
                            self.pipelines.clear();
                            self.phase = Phase::Failed;
                        }
                        Phase::Streaming => self.finish_gof(now, true, &mut out),
                        _ => {}
                    }
                } else {
                    self.issue_seq += 1;
                    p.retries += 1;
                    p.issue = self.issue_seq;
                    p.sent_at = now;
                    p.interest = p.interest.reissue(self.rng.next_u32());
                    let interest = p.interest.clone();
                    self.stats.interests_sent += 1;
                    self.stats.retransmissions += 1;
                    if let Some(a) = self.active.as_mut() {
                        a.entry.interests_sent += 1;
                        a.entry.retransmissions += 1;
                    }
                    let at = now + self.rto();
                    out.push(ConsumerOutput::Send(interest));
                    out.push(ConsumerOutput::Timer {
                        at,
                        timer: ConsumerTimer::Timeout {
                            name: name.clone(),
                            issue: self.issue_seq,
                        },
                    });
                }
            }
            ConsumerTimer::GofStart { index } => {
                if self.phase == Phase::Streaming {
                    if self.active.is_some() {
                        self.deferred = Some(*index);
                    } else {
                        self.begin_gof(now, *index, &mut out);
                    }
                }
            }
        }
        self.estimator.set_busy(now, !self.outstanding.is_empty());
        out
    }

    fn on_metadata(&mut self, now: SimTime, out: &mut Vec<ConsumerOutput>) {
        let payload = self.pipelines[0].assemble().unwrap_or_default();
        self.pipelines.clear();
        match MetaData::from_json(&payload) {
            Ok(md) => {
                self.metadata = Some(md);
                self.phase = Phase::Streaming;
                self.first_gof_at = now + time::from_secs(self.cfg.warmup_s);
                out.push(ConsumerOutput::Timer {
                    at: self.first_gof_at,
                    timer: ConsumerTimer::GofStart { index: 0 },
                });
            }
            Err(e) => {
                log::warn!("consumer {} received malformed MetaData: {e}", self.id);
                self.phase = Phase::Failed;
            }
        }
    }

    fn gof_period(&self) -> SimTime {
        let md = self.metadata.as_ref().expect("streaming implies metadata");
        time::from_secs(md.gof_frames as f64 / md.frame_rate.max(1) as f64)
    }

    fn begin_gof(&mut self, now: SimTime, index: usize, out: &mut Vec<ConsumerOutput>) {
        let period = self.gof_period();
        let md = self.metadata.as_ref().expect("streaming implies metadata");
        let Some(g) = md.gofs.get(index) else {
            self.phase = Phase::Done;
            return;
        };
        let sizes: Vec<u64> = g.segments.iter().map(|s| s.bytes).collect();
        let tier = match self.cfg.fixed_tier {
            Some(t) => t.min(sizes.len() - 1),
            None => {
                let est = self.estimator.estimate_bps(now);
                select_tier(est, g.top_layer.bytes, &sizes, self.cfg.frame_budget_s, self.cfg.safety)
            }
        };
        let keep = self.cfg.keep_payloads;
        let mut pipelines = Vec::with_capacity(tier + 2);
        let top = g.top_name(&md.dataset).expect("metadata names are well-formed");
        pipelines.push(Pipeline::new(
            top,
            g.top_layer.label.clone(),
            Some(g.top_layer.chunks.max(1)),
            keep,
        ));
        for t in 0..=tier {
            let s = &g.segments[t];
            let name = g.segment_name(&md.dataset, t).expect("metadata names are well-formed");
            pipelines.push(Pipeline::new(name, s.label.clone(), Some(s.chunks.max(1)), keep));
        }
        let chunks_requested = pipelines.iter().map(|p| p.total.unwrap_or(0) as u64).sum();
        let segments = g.segments[..=tier]
            .iter()
            .map(|s| s.label.as_str())
            .collect::<Vec<_>>()
            .join("+");
        let entry = GofLedgerEntry {
            consumer: self.id,
            gof: g.gof,
            level: md.ladder.level(tier).label,
            segments,
            scheduled_ns: self.first_gof_at + period * index as SimTime,
            first_send_ns: now,
            completion_ns: None,
            chunks_requested,
            unique_chunks: 0,
            unique_bytes: 0,
            interests_sent: 0,
            data_received: 0,
            retransmissions: 0,
            incomplete: false,
        };
        let has_next = index + 1 < md.gofs.len();
        self.pipelines = pipelines;
        self.active = Some(ActiveGof { index, entry });
        if has_next {
            let at = (self.first_gof_at + period * (index as SimTime + 1)).max(now);
            out.push(ConsumerOutput::Timer {
                at,
                timer: ConsumerTimer::GofStart { index: index + 1 },
            });
        }
        self.fill(now, out);
    }

    fn finish_gof(&mut self, now: SimTime, abandoned: bool, out: &mut Vec<ConsumerOutput>) {
        let Some(mut a) = self.active.take() else {
            return;
        };
        if abandoned {
            log::debug!("consumer {} abandons GoF {}", self.id, a.entry.gof);
            a.entry.incomplete = true;
            self.outstanding.clear();
        } else {
            a.entry.completion_ns = Some(now);
            if self.cfg.keep_payloads {
                for p in &self.pipelines {
                    if let Some(b) = p.assemble() {
                        self.received.insert(p.segment.clone(), b);
                    }
                }
            }
        }
        self.pipelines.clear();
        let last = self.metadata.as_ref().is_some_and(|md| a.index + 1 >= md.gofs.len());
        self.ledger.push(a.entry);
        if last {
            self.phase = Phase::Done;
        } else if let Some(next) = self.deferred.take() {
            self.begin_gof(now, next, out);
        }
    }

    fn fill(&mut self, now: SimTime, out: &mut Vec<ConsumerOutput>) {
        let rto = self.rto();
        for (i, pl) in self.pipelines.iter_mut().enumerate() {
            // Unknown length: probe with chunk 0 only.
            let limit = pl.total.unwrap_or(1);
            while pl.in_flight < self.cfg.window && pl.next < limit {
                let name = pl.segment.with_chunk(pl.next as u64);
                let interest = Interest::new(name.clone(), self.rng.next_u32());
                self.issue_seq += 1;
                self.outstanding.insert(
                    name.clone(),
                    Pending {
                        pipeline: i,
                        chunk: pl.next,
                        sent_at: now,
                        retries: 0,
                        issue: self.issue_seq,
                        interest: interest.clone(),
                    },
                );
                pl.next += 1;
                pl.in_flight += 1;
                self.stats.interests_sent += 1;
                if let Some(a) = self.active.as_mut() {
                    a.entry.interests_sent += 1;
                }
                out.push(ConsumerOutput::Send(interest));
                out.push(ConsumerOutput::Timer {
                    at: now + rto,
                    timer: ConsumerTimer::Timeout {
                        name,
                        issue: self.issue_seq,
                    },
                });
            }
        }
        self.estimator.set_busy(now, !self.outstanding.is_empty());
    }
}
