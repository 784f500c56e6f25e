use serde::Serialize;

use crate::icn::cs::ContentStore;
use crate::icn::fib::Fib;
use crate::icn::pit::Pit;
use crate::icn::FaceId;
use crate::naming::Name;
use crate::netsim::{time, SimTime};
use crate::wire::{DataPacket, Interest};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Action {
    SendData { face: FaceId, data: DataPacket },
    ForwardInterest { face: FaceId, interest: Interest },
    Aggregate,
    DropDuplicateNonce,
    DropNoRoute,
    CacheInsert { name: Name, evicted: Option<Name> },
    DropUnsolicited,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ForwarderCounters {
    pub interests: u64,
    pub cs_hits: u64,
    pub cs_misses: u64,
    pub pit_aggregations: u64,
    pub pit_expiries: u64,
    /// Same downstream face, fresh nonce, entry still live: resent upstream.
    pub pit_retransmissions: u64,
    pub duplicate_nonces: u64,
    pub no_route: u64,
    pub data_in: u64,
    pub data_out: u64,
    pub unsolicited: u64,
    pub evictions: u64,
}

/// CS + PIT + FIB of one node.
#[derive(Debug)]
pub struct Forwarder {
    pub cs: ContentStore,
    pub pit: Pit,
    pub fib: Fib,
    counters: ForwarderCounters,
}

impl Forwarder {
    pub fn new(cs_capacity: usize, fib: Fib) -> Self {
        Self {
            cs: ContentStore::new(cs_capacity),
            pit: Pit::new(),
            fib,
            counters: ForwarderCounters::default(),
        }
    }

    pub fn counters(&self) -> ForwarderCounters {
        ForwarderCounters {
            cs_hits: self.cs.hits(),
            cs_misses: self.cs.misses(),
            evictions: self.cs.evictions(),
            ..self.counters
        }
    }

    pub fn on_interest(&mut self, face: FaceId, interest: Interest, now: SimTime) -> Vec<Action> {
        self.counters.interests += 1;
        if let Some(data) = self.cs.lookup(&interest.name) {
            self.counters.data_out += 1;
            return vec![Action::SendData { face, data }];
        }
        let expiry = now + interest.lifetime_ms as SimTime * time::NS_PER_MS;
        if let Some(entry) = self.pit.get_live_mut(&interest.name, now) {
            if entry.has_nonce(interest.nonce) {
                self.counters.duplicate_nonces += 1;
                return vec![Action::DropDuplicateNonce];
            }
            let known_face = entry.has_face(face);
            self.pit.merge(&interest.name, face, interest.nonce, expiry);
            if !known_face {
                self.counters.pit_aggregations += 1;
                return vec![Action::Aggregate];
            }
            // A consumer retransmission: the earlier upstream copy may have been lost.
            self.counters.pit_retransmissions += 1;
            return match self.fib.next_hop(&interest.name, face) {
                Some(up) => vec![Action::ForwardInterest {
                    face: up,
                    interest: hop(interest),
                }],
                None => vec![Action::Aggregate],
            };
        }
        match self.fib.next_hop(&interest.name, face) {
            Some(up) => {
                self.pit.remove(&interest.name);
                self.pit.insert(interest.name.clone(), face, interest.nonce, expiry);
                vec![Action::ForwardInterest {
                    face: up,
                    interest: hop(interest),
                }]
            }
            None => {
                self.counters.no_route += 1;
                log::debug!("no route for {}", interest.name);
                vec![Action::DropNoRoute]
            }
        }
    }

    pub fn on_data(&mut self, face: FaceId, data: DataPacket, now: SimTime) -> Vec<Action> {
        self.counters.data_in += 1;
        let live = self.pit.get_live_mut(&data.name, now).is_some();
        let Some(entry) = self.pit.remove(&data.name).filter(|_| live) else {
            self.counters.unsolicited += 1;
            return vec![Action::DropUnsolicited];
        };
        let mut out: Vec<Action> = entry
            .downstream_faces
            .iter()
            .filter(|&&f| f != face)
            .map(|&f| Action::SendData {
                face: f,
                data: data.clone(),
            })
            .collect();
        self.counters.data_out += out.len() as u64;
        let name = data.name.clone();
        let evicted = self.cs.insert(data);
        out.push(Action::CacheInsert { name, evicted });
        out
    }

    pub fn expire_pit(&mut self, now: SimTime) -> Vec<Name> {
        let expired = self.pit.expire(now);
        self.counters.pit_expiries += expired.len() as u64;
        for n in &expired {
            log::trace!("pit expiry {n}");
        }
        expired
    }
}

fn hop(mut i: Interest) -> Interest {
    i.hop_count = i.hop_count.saturating_add(1);
    i
}
