//! Producer and adaptive consumer.

pub mod consumer;
pub mod estimator;
pub mod ledger;
pub mod metadata;
pub mod producer;
pub mod selection;

pub use consumer::{Consumer, ConsumerConfig, ConsumerOutput, ConsumerStats, ConsumerTimer, Phase};
pub use estimator::BandwidthEstimator;
pub use ledger::{gof_delay, write_ledger_csv, GofLedgerEntry, LEDGER_SCHEMA_VERSION};
pub use metadata::{GofEntry, MetaData, SegmentInfo};
pub use producer::{producer_on_interest, verify_store, ProducerStore};
pub use selection::{select_levels, select_tier};
