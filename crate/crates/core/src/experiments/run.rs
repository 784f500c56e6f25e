use std::io::Write;
use std::sync::Arc;

use serde::Serialize;

use crate::content::{encode_dataset, EncodedDataset};
use crate::dash::{DashRunResult, DashWorld};
use crate::endpoints::{GofLedgerEntry, MetaData, ProducerStore};
use crate::error::Result;
use crate::experiments::metrics::{compute_dash_metrics, compute_inds_metrics, write_csv_with_schema, RunMetrics};
use crate::experiments::scenario::{DatasetSpec, ScenarioConfig};
use crate::netsim::{NodeId, TraceSink};
use crate::sim::{IndsRunResult, IndsWorld, LinkReport};

pub const NODE_SCHEMA_VERSION: &str = "inds-node/1";

/// An encoded dataset with its producer index, shared read-only across runs.
#[derive(Debug)]
pub struct PreparedDataset {
    pub dataset: EncodedDataset,
    pub metadata: MetaData,
    pub store: Arc<ProducerStore>,
}

impl PreparedDataset {
    pub fn new(dataset: EncodedDataset) -> Result<Self> {
        let store = Arc::new(ProducerStore::from_dataset(&dataset)?);
        Ok(Self {
            metadata: dataset.metadata(),
            dataset,
            store,
        })
    }

    pub fn from_spec(spec: &DatasetSpec) -> Result<Self> {
        let ds = match spec {
            DatasetSpec::Store { path } => EncodedDataset::load(path)?,
            DatasetSpec::Encode { source, params } => encode_dataset(source, params)?,
        };
        Self::new(ds)
    }

    pub fn n_gofs(&self) -> usize {
        self.metadata.gofs.len()
    }
}

#[derive(Debug)]
pub enum RunDetails {
    Inds(IndsRunResult),
    Dash(DashRunResult),
}

#[derive(Debug)]
pub struct RunOutcome {
    pub metrics: RunMetrics,
    pub details: RunDetails,
}

/// Per-node counters; cache columns are zero for nodes without a cache.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeRow {
    pub node: NodeId,
    pub name: String,
    pub role: &'static str,
    pub cache_hits: u64,
    pub cache_misses: u64,
    pub cache_hit_rate: f64,
    pub interests: u64,
    pub pit_aggregations: u64,
    pub retransmissions: u64,
    pub evictions: u64,
    pub cache_occupancy: u64,
}

fn rate(h: u64, m: u64) -> f64 {
    if h + m == 0 {
        0.0
    } else {
        h as f64 / (h + m) as f64
    }
}

impl RunDetails {
    pub fn trace(&self) -> &TraceSink {
        match self {
            RunDetails::Inds(r) => &r.trace,
            RunDetails::Dash(r) => &r.trace,
        }
    }

    pub fn links(&self) -> &[LinkReport] {
        match self {
            RunDetails::Inds(r) => &r.links,
            RunDetails::Dash(r) => &r.links,
        }
    }

    /// All consumer ledger rows, consumer-major.
    pub fn ledger(&self) -> Vec<GofLedgerEntry> {
        match self {
            RunDetails::Inds(r) => r.consumers.iter().flat_map(|c| c.ledger.clone()).collect(),
            RunDetails::Dash(r) => r.consumers.iter().flat_map(|c| c.ledger.clone()).collect(),
        }
    }

    pub fn node_rows(&self) -> Vec<NodeRow> {
        let mut rows = Vec::new();
        match self {
            RunDetails::Inds(r) => {
                for f in &r.forwarders {
                    let c = &f.counters;
                    rows.push(NodeRow {
                        node: f.node,
                        name: f.name.clone(),
                        role: "forwarder",
                        cache_hits: c.cs_hits,
                        cache_misses: c.cs_misses,
                        cache_hit_rate: rate(c.cs_hits, c.cs_misses),
                        interests: c.interests,
                        pit_aggregations: c.pit_aggregations,
                        retransmissions: c.pit_retransmissions,
                        evictions: c.evictions,
                        cache_occupancy: f.cs_len as u64,
                    });
                }
                for c in &r.consumers {
                    rows.push(NodeRow {
                        node: c.node,
                        name: c.name.clone(),
                        role: "consumer",
                        cache_hits: c.local_cs_hits,
                        cache_misses: c.local_cs_misses,
                        cache_hit_rate: rate(c.local_cs_hits, c.local_cs_misses),
                        interests: c.stats.interests_sent,
                        pit_aggregations: 0,
                        retransmissions: c.stats.retransmissions,
                        evictions: 0,
                        cache_occupancy: 0,
                    });
                }
            }
            RunDetails::Dash(r) => {
                for k in &r.caches {
                    let c = &k.counters;
                    rows.push(NodeRow {
                        node: k.node,
                        name: k.name.clone(),
                        role: "cdn_cache",
                        cache_hits: c.hits,
                        cache_misses: c.misses,
                        cache_hit_rate: rate(c.hits, c.misses),
                        interests: c.hits + c.misses,
                        pit_aggregations: 0,
                        retransmissions: 0,
                        evictions: c.evictions,
                        cache_occupancy: k.used_bytes,
                    });
                }
                for c in &r.consumers {
                    rows.push(NodeRow {
                        node: c.node,
                        name: c.name.clone(),
                        role: "consumer",
                        cache_hits: 0,
                        cache_misses: 0,
                        cache_hit_rate: 0.0,
                        interests: c.ledger.len() as u64,
                        pit_aggregations: 0,
                        retransmissions: c.retransmissions,
                        evictions: 0,
                        cache_occupancy: 0,
                    });
                }
            }
        }
        rows.sort_by_key(|r| r.node);
        rows
    }

    pub fn write_nodes_csv(&self, out: impl Write) -> Result<()> {
        write_csv_with_schema(out, NODE_SCHEMA_VERSION, &self.node_rows())
    }
}

/// Builds and runs one world for `cfg`. Simulation errors propagate; the sweep
/// turns them into status rows.
pub fn run_scenario(cfg: &ScenarioConfig, data: &PreparedDataset) -> Result<RunOutcome> {
    cfg.validate()?;
    let (topo, links) = cfg.build_topology()?;
    let starts = cfg.starts();
    match cfg.protocol.abr() {
        None => {
            let world = IndsWorld::new(
                topo,
                links,
                Arc::clone(&data.store),
                &cfg.inds,
                &starts,
                cfg.seed,
                data.n_gofs(),
            )?;
            let r = world.run();
            Ok(RunOutcome {
                metrics: compute_inds_metrics(cfg, &r)?,
                details: RunDetails::Inds(r),
            })
        }
        Some(variant) => {
            let world = DashWorld::new(topo, links, &data.metadata, variant, &cfg.dash, &starts)?;
            let r = world.run();
            Ok(RunOutcome {
                metrics: compute_dash_metrics(cfg, &r)?,
                details: RunDetails::Dash(r),
            })
        }
    }
}

/// Runs that fail become an error row rather than aborting the caller.
pub fn run_metrics_or_status(cfg: &ScenarioConfig, data: &PreparedDataset) -> RunMetrics {
    match run_scenario(cfg, data) {
        Ok(o) => o.metrics,
        Err(e) => {
            log::warn!("run {} ({}, seed {}) failed: {e}", cfg.id, cfg.protocol, cfg.seed);
            RunMetrics::failed(cfg, &e.to_string())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::SyntheticShape;
    use crate::content::{EncodeParams, FrameSource};
    use crate::experiments::scenario::Protocol;
    use crate::netsim::TopologyKind;

    pub(crate) fn tiny() -> PreparedDataset {
        let params = EncodeParams {
            n_gofs: 2,
            gof_frames: 2,
            window_gofs: 2,
            ..Default::default()
        };
        let src = FrameSource::Synthetic {
            shape: SyntheticShape::SphereShell,
            n_points: 1500,
            seed: 3,
        };
        PreparedDataset::new(encode_dataset(&src, &params).unwrap()).unwrap()
    }

    fn linear(consumers: usize, stagger_ms: f64) -> ScenarioConfig {
        let mut cfg = ScenarioConfig::default();
        cfg.topology.inds = TopologyKind::LinearDebug;
        cfg.topology.forwarders = 1;
        cfg.topology.consumers = consumers;
        cfg.stagger_ms = stagger_ms;
        cfg.inds.consumer.fixed_tier = Some(3);
        cfg
    }

    #[test]
    fn cold_single_consumer_has_zero_hit_rate() {
        let data = tiny();
        let o = run_scenario(&linear(1, 0.0), &data).unwrap();
        assert_eq!(o.metrics.cache_hit_rate, 0.0);
        assert!(o.metrics.cache_lookups > 0);
        assert_eq!(o.metrics.incomplete_gof_fraction, 0.0);
    }

    #[test]
    fn sequential_second_consumer_hits_everything() {
        let data = tiny();
        // The second consumer starts long after the first finished.
        let o = run_scenario(&linear(2, 10_000.0), &data).unwrap();
        assert_eq!(o.metrics.cache_hits * 2, o.metrics.cache_lookups);
        assert_eq!(o.metrics.cache_hit_rate, 0.5);
    }

    #[test]
    fn dash_protocol_dispatch_and_node_rows() {
        let data = tiny();
        let cfg = ScenarioConfig {
            protocol: Protocol::DashPc,
            ..ScenarioConfig::default()
        };
        let o = run_scenario(&cfg, &data).unwrap();
        assert_eq!(o.metrics.protocol, "dash_pc");
        let rows = o.details.node_rows();
        assert_eq!(rows.iter().filter(|r| r.role == "cdn_cache").count(), 3);
        assert_eq!(rows.iter().filter(|r| r.role == "consumer").count(), 10);
    }
}
