use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::dash::DashRunResult;
use crate::endpoints::GofLedgerEntry;
use crate::error::{Error, Result};
use crate::experiments::scenario::ScenarioConfig;
use crate::netsim::time;
use crate::sim::IndsRunResult;

pub const RUN_SCHEMA_VERSION: &str = "inds-run/1";

/// One row of the raw results CSV: a single (scenario, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub scenario_id: String,
    pub protocol: String,
    pub bandwidth_mbps: f64,
    pub loss_pct: f64,
    pub seed: u64,
    /// `ok`, or `error: <message>` with every metric NaN.
    pub status: String,
    /// Aggregated over forwarder CSs (INDS) or CDN caches (DASH); consumer-local CS excluded.
    pub cache_hit_rate: f64,
    pub cache_hits: u64,
    pub cache_lookups: u64,
    /// Over completed GoFs of all consumers.
    pub mean_gof_delay_ms: f64,
    pub p95_gof_delay_ms: f64,
    /// Mean over consumers of unique bytes · 8 over the active span.
    pub effective_throughput_mbps: f64,
    pub incomplete_gof_fraction: f64,
    pub retransmissions: u64,
    /// Unique chunks (INDS) or unique transport segments (DASH) received by consumers.
    pub delivered_packets: u64,
    /// `label=count` pairs joined with `;`.
    pub packets_by_segment: String,
    /// Most frequent requested segment set over all GoFs.
    pub modal_segments: String,
    pub events: u64,
}

impl RunMetrics {
    pub fn failed(cfg: &ScenarioConfig, message: &str) -> Self {
        Self {
            scenario_id: cfg.id.clone(),
            protocol: cfg.protocol.label().into(),
            bandwidth_mbps: cfg.bandwidth_mbps,
            loss_pct: cfg.loss_pct,
            seed: cfg.seed,
            status: format!("error: {}", message.replace(['\n', '\r'], " ")),
            cache_hit_rate: f64::NAN,
            cache_hits: 0,
            cache_lookups: 0,
            mean_gof_delay_ms: f64::NAN,
            p95_gof_delay_ms: f64::NAN,
            effective_throughput_mbps: f64::NAN,
            incomplete_gof_fraction: f64::NAN,
            retransmissions: 0,
            delivered_packets: 0,
            packets_by_segment: String::new(),
            modal_segments: String::new(),
            events: 0,
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }

    pub fn segment_counts(&self) -> BTreeMap<String, u64> {
        self.packets_by_segment
            .split(';')
            .filter_map(|kv| kv.split_once('='))
            .filter_map(|(k, v)| Some((k.to_string(), v.parse().ok()?)))
            .collect()
    }
}

struct LedgerSummary {
    mean_delay_ms: f64,
    p95_delay_ms: f64,
    throughput_mbps: f64,
    incomplete_fraction: f64,
    delivered_packets: u64,
    modal_segments: String,
}

/// Nearest-rank percentile of an ascending slice.
pub fn percentile(sorted: &[f64], p: f64) -> f64 {
    if sorted.is_empty() {
        return f64::NAN;
    }
    let rank = ((p / 100.0) * sorted.len() as f64).ceil().max(1.0) as usize;
    sorted[rank.min(sorted.len()) - 1]
}

/// Throughput of one consumer: every unique byte it received over the span from
/// its first GoF request to its last GoF completion. Zero without a completion.
pub fn consumer_throughput_mbps(ledger: &[GofLedgerEntry]) -> f64 {
    let Some(start) = ledger.iter().map(|e| e.first_send_ns).min() else {
        return 0.0;
    };
    let Some(end) = ledger
        .iter()
        .filter(|e| !e.incomplete)
        .filter_map(|e| e.completion_ns)
        .max()
    else {
        return 0.0;
    };
    if end <= start {
        return 0.0;
    }
    let bytes: u64 = ledger.iter().map(|e| e.unique_bytes).sum();
    bytes as f64 * 8.0 / time::to_secs(end - start) / 1e6
}

fn summarize<'a>(
    ledgers: impl Iterator<Item = &'a [GofLedgerEntry]>,
    consumers: usize,
    expected_gofs: usize,
) -> LedgerSummary {
    let mut delays = Vec::new();
    let mut throughputs = Vec::new();
    let mut complete = 0usize;
    let mut delivered = 0u64;
    let mut sets: BTreeMap<&str, usize> = BTreeMap::new();
    for ledger in ledgers {
        throughputs.push(consumer_throughput_mbps(ledger));
        for e in ledger {
            delivered += e.unique_chunks;
            *sets.entry(e.segments.as_str()).or_insert(0) += 1;
            if let Some(d) = e.delay_ms() {
                delays.push(d);
                complete += 1;
            }
        }
    }
    throughputs.resize(consumers, 0.0);
    delays.sort_by(f64::total_cmp);
    let expected = consumers * expected_gofs;
    // Ties go to the lexicographically first set, which keeps output deterministic.
    let modal = sets
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(s, _)| s.to_string())
        .unwrap_or_default();
    LedgerSummary {
        mean_delay_ms: if delays.is_empty() {
            f64::NAN
        } else {
            delays.iter().sum::<f64>() / delays.len() as f64
        },
        p95_delay_ms: percentile(&delays, 95.0),
        throughput_mbps: if consumers == 0 {
            0.0
        } else {
            throughputs.iter().sum::<f64>() / consumers as f64
        },
        incomplete_fraction: if expected == 0 {
            0.0
        } else {
            expected.saturating_sub(complete) as f64 / expected as f64
        },
        delivered_packets: delivered,
        modal_segments: modal,
    }
}

fn join_counts(m: &BTreeMap<String, u64>) -> String {
    m.iter().map(|(k, v)| format!("{k}={v}")).collect::<Vec<_>>().join(";")
}

fn base(cfg: &ScenarioConfig, hits: u64, lookups: u64, s: LedgerSummary) -> RunMetrics {
    RunMetrics {
        scenario_id: cfg.id.clone(),
        protocol: cfg.protocol.label().into(),
        bandwidth_mbps: cfg.bandwidth_mbps,
        loss_pct: cfg.loss_pct,
        seed: cfg.seed,
        status: "ok".into(),
        cache_hit_rate: if lookups == 0 {
            0.0
        } else {
            hits as f64 / lookups as f64
        },
        cache_hits: hits,
        cache_lookups: lookups,
        mean_gof_delay_ms: s.mean_delay_ms,
        p95_gof_delay_ms: s.p95_delay_ms,
        effective_throughput_mbps: s.throughput_mbps,
        incomplete_gof_fraction: s.incomplete_fraction,
        retransmissions: 0,
        delivered_packets: s.delivered_packets,
        packets_by_segment: String::new(),
        modal_segments: s.modal_segments,
        events: 0,
    }
}

pub fn compute_inds_metrics(cfg: &ScenarioConfig, r: &IndsRunResult) -> Result<RunMetrics> {
    let interests: u64 = r.forwarders.iter().map(|f| f.counters.interests).sum();
    if interests == 0 && r.producer_interests == 0 {
        return Err(Error::Metrics(
            "no Interest was processed by any forwarder or the producer".into(),
        ));
    }
    let hits: u64 = r.forwarders.iter().map(|f| f.counters.cs_hits).sum();
    let misses: u64 = r.forwarders.iter().map(|f| f.counters.cs_misses).sum();
    let s = summarize(
        r.consumers.iter().map(|c| c.ledger.as_slice()),
        r.consumers.len(),
        r.expected_gofs,
    );
    let mut segs = BTreeMap::new();
    for c in &r.consumers {
        for (k, v) in &c.packets_by_segment {
            *segs.entry(k.clone()).or_insert(0) += v;
        }
    }
    let mut m = base(cfg, hits, hits + misses, s);
    m.retransmissions = r.consumers.iter().map(|c| c.stats.retransmissions).sum();
    m.packets_by_segment = join_counts(&segs);
    m.events = r.events;
    Ok(m)
}

pub fn compute_dash_metrics(cfg: &ScenarioConfig, r: &DashRunResult) -> Result<RunMetrics> {
    if r.origin_objects == 0 && r.caches.iter().all(|c| c.counters.hits + c.counters.misses == 0) {
        return Err(Error::Metrics("no request reached a cache or the origin".into()));
    }
    let hits: u64 = r.caches.iter().map(|c| c.counters.hits).sum();
    let misses: u64 = r.caches.iter().map(|c| c.counters.misses).sum();
    let s = summarize(
        r.consumers.iter().map(|c| c.ledger.as_slice()),
        r.consumers.len(),
        r.expected_gofs,
    );
    let mut segs = BTreeMap::new();
    for e in r.consumers.iter().flat_map(|c| &c.ledger) {
        *segs.entry(e.level.clone()).or_insert(0) += e.unique_chunks;
    }
    let mut m = base(cfg, hits, hits + misses, s);
    m.retransmissions = r.consumers.iter().map(|c| c.retransmissions).sum();
    m.packets_by_segment = join_counts(&segs);
    m.events = r.events;
    Ok(m)
}

/// Serializes rows under a `# schema=` comment row.
pub fn write_csv_with_schema<T: Serialize>(mut out: impl Write, schema: &str, rows: &[T]) -> Result<()> {
    writeln!(out, "# schema={schema}")?;
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads rows written by [`write_csv_with_schema`], rejecting other schema versions.
pub fn read_csv_with_schema<T: for<'de> Deserialize<'de>>(mut input: impl BufRead, schema: &str) -> Result<Vec<T>> {
    let mut first = String::new();
    input.read_line(&mut first)?;
    let found = first.trim().strip_prefix("# schema=").unwrap_or("");
    if found != schema {
        return Err(Error::Schema(format!(
            "expected schema {schema}, found `{}`",
            first.trim()
        )));
    }
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

pub fn write_runs_csv(out: impl Write, rows: &[RunMetrics]) -> Result<()> {
    write_csv_with_schema(out, RUN_SCHEMA_VERSION, rows)
}

pub fn read_runs_csv(input: impl BufRead) -> Result<Vec<RunMetrics>> {
    read_csv_with_schema(input, RUN_SCHEMA_VERSION)
}
