//! DASH-style baseline: whole-representation fetches over a Reno-like stream
//! through object caches.

pub mod abr;
pub mod cdn;
pub mod transport;
pub mod world;

pub use abr::{abr_select, hybrid_select, representations, AbrVariant, Representation};
pub use cdn::{CdnCache, CdnCounters, ObjectId, DEFAULT_CDN_CAPACITY_BYTES};
pub use transport::{RenoConfig, RenoSender, SendOut, SenderCounters, StreamReceiver};
pub use world::{CacheReport, DashConsumerReport, DashOptions, DashRunResult, DashWorld};
