use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::netsim::{time, SimTime};

/// One GoF fetch as recorded by one consumer. Entries are appended once the
/// GoF completes or is abandoned and never modified afterwards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofLedgerEntry {
    pub consumer: usize,
    pub gof: u32,
    /// Cumulative level label, e.g. `L50`.
    pub level: String,
    /// Requested segment labels joined with `+`.
    pub segments: String,
    pub scheduled_ns: SimTime,
    pub first_send_ns: SimTime,
    pub completion_ns: Option<SimTime>,
    pub chunks_requested: u64,
    pub unique_chunks: u64,
    pub unique_bytes: u64,
    pub interests_sent: u64,
    pub data_received: u64,
    pub retransmissions: u64,
    pub incomplete: bool,
}

impl GofLedgerEntry {
    /// Time to the last byte of the GoF, in ms; `None` for an incomplete GoF.
    pub fn delay_ms(&self) -> Option<f64> {
        gof_delay(self)
    }
}

pub fn gof_delay(e: &GofLedgerEntry) -> Option<f64> {
    match (e.incomplete, e.completion_ns) {
        (false, Some(c)) => Some(time::to_ms(c - e.first_send_ns)),
        _ => None,
    }
}

pub const LEDGER_SCHEMA_VERSION: &str = "inds-ledger/1";

/// Writes ledger rows as CSV with a leading `# schema=` comment row.
pub fn write_ledger_csv(path: &Path, entries: &[GofLedgerEntry]) -> Result<()> {
    let mut buf = format!("# schema={LEDGER_SCHEMA_VERSION}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for e in entries {
            w.serialize(e)?;
        }
        w.flush()?;
    }
    std::fs::write(path, buf)?;
    Ok(())
}
