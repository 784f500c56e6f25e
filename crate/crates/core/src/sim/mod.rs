//! Simulation worlds that host the endpoints and forwarders on a topology.

pub mod inds;

pub use inds::{ConsumerReport, ForwarderReport, IndsOptions, IndsRunResult, IndsWorld, LinkReport};
