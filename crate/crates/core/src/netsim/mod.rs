//! Deterministic discrete-event network substrate.
//!
//! Time is integer nanoseconds. Links model a FIFO transmitter per direction
//! analytically: a packet's departure is `max(now, busy_until) + serialization`,
//! so no per-packet service events are needed.

mod engine;
mod link;
pub mod time;
mod topology;
mod trace;

pub use engine::Scheduler;
pub use link::{Link, LinkCounters, LinkId, LinkSpec, LossModel, TxOutcome, DEFAULT_QUEUE_LIMIT};
pub use time::SimTime;
pub use topology::{EdgeSpec, LinkTier, NodeId, NodeRole, NodeSpec, Topology, TopologyKind, TopologyParams};
pub use trace::{outcome_label, TraceRecord, TraceSink, TRACE_SCHEMA_VERSION};
