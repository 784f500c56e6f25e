//! Named-data forwarding plane: content store, pending Interest table, FIB.
//!
//! A [`Forwarder`] is a pure state machine. It consumes one packet and returns
//! the actions the hosting simulator must carry out.

pub mod cs;
pub mod fib;
pub mod forwarder;
pub mod pit;

/// Node-local interface index.
pub type FaceId = usize;

pub use cs::{ContentStore, DEFAULT_CS_CAPACITY};
pub use fib::{Fib, FibEntry};
pub use forwarder::{Action, Forwarder, ForwarderCounters};
pub use pit::{Pit, PitEntry};
