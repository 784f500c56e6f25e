use std::io::Write;

use serde::Serialize;

use crate::error::Result;
use crate::netsim::{LinkId, NodeId, SimTime, TxOutcome};

pub const TRACE_SCHEMA_VERSION: &str = "inds-trace/1";

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRecord {
    pub time_ns: SimTime,
    pub node: NodeId,
    pub link: LinkId,
    /// 0 for a→b, 1 for b→a.
    pub dir: usize,
    #[serde(rename = "type")]
    pub kind: &'static str,
    pub name: String,
    pub bytes: usize,
    pub outcome: &'static str,
}

pub fn outcome_label(o: &TxOutcome) -> &'static str {
    match o {
        TxOutcome::Delivered { .. } => "delivered",
        TxOutcome::Lost => "lost",
        TxOutcome::QueueDropped => "queue_dropped",
    }
}

/// Collects per-packet transmit records when enabled; a no-op otherwise.
#[derive(Debug, Default)]
pub struct TraceSink {
    records: Option<Vec<TraceRecord>>,
}

impl TraceSink {
    pub fn enabled() -> Self {
        Self {
            records: Some(Vec::new()),
        }
    }

    pub fn disabled() -> Self {
        Self { records: None }
    }

    pub fn is_enabled(&self) -> bool {
        self.records.is_some()
    }

    /// `make` runs only when tracing is on.
    pub fn record(&mut self, make: impl FnOnce() -> TraceRecord) {
        if let Some(r) = &mut self.records {
            r.push(make());
        }
    }

    pub fn records(&self) -> &[TraceRecord] {
        self.records.as_deref().unwrap_or(&[])
    }

    pub fn write_csv(&self, mut out: impl Write) -> Result<()> {
        writeln!(out, "# schema={TRACE_SCHEMA_VERSION}")?;
        let mut w = csv::Writer::from_writer(out);
        for r in self.records() {
            w.serialize(r)?;
        }
        w.flush()?;
        Ok(())
    }
}
