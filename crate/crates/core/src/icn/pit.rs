use std::cmp::Reverse;
use std::collections::BinaryHeap;

use rustc_hash::FxHashMap;

use crate::icn::FaceId;
use crate::naming::Name;
use crate::netsim::SimTime;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PitEntry {
    pub name: Name,
    /// Insertion order, no duplicates.
    pub downstream_faces: Vec<FaceId>,
    pub nonces_seen: Vec<u32>,
    pub expiry: SimTime,
}

impl PitEntry {
    pub fn has_nonce(&self, nonce: u32) -> bool {
        self.nonces_seen.contains(&nonce)
    }

    pub fn has_face(&self, face: FaceId) -> bool {
        self.downstream_faces.contains(&face)
    }
}

/// Pending Interest Table with lazily-pruned expiry index.
#[derive(Debug, Default)]
pub struct Pit {
    entries: FxHashMap<Name, PitEntry>,
    expiries: BinaryHeap<Reverse<(SimTime, Name)>>,
}

impl Pit {
    pub fn new() -> Self {
        Self::default()
    }

    /// Live entry for `name`: present and `expiry > now`.
    pub fn get_live_mut(&mut self, name: &Name, now: SimTime) -> Option<&mut PitEntry> {
        self.entries.get_mut(name).filter(|e| e.expiry > now)
    }

    pub fn get(&self, name: &Name) -> Option<&PitEntry> {
        self.entries.get(name)
    }

    pub fn insert(&mut self, name: Name, face: FaceId, nonce: u32, expiry: SimTime) {
        self.expiries.push(Reverse((expiry, name.clone())));
        self.entries.insert(
            name.clone(),
            PitEntry {
                name,
                downstream_faces: vec![face],
                nonces_seen: vec![nonce],
                expiry,
            },
        );
    }

    /// Adds a face/nonce to a live entry and extends its expiry to the later of the two.
    pub fn merge(&mut self, name: &Name, face: FaceId, nonce: u32, expiry: SimTime) {
        let Some(e) = self.entries.get_mut(name) else {
            return;
        };
        if !e.has_face(face) {
            e.downstream_faces.push(face);
        }
        if !e.has_nonce(nonce) {
            e.nonces_seen.push(nonce);
        }
        if expiry > e.expiry {
            e.expiry = expiry;
            self.expiries.push(Reverse((expiry, name.clone())));
        }
    }

    pub fn remove(&mut self, name: &Name) -> Option<PitEntry> {
        self.entries.remove(name)
    }

    /// Removes and returns every entry with `expiry <= now`, in expiry order.
    pub fn expire(&mut self, now: SimTime) -> Vec<Name> {
        let mut out = Vec::new();
        while let Some(Reverse((t, _))) = self.expiries.peek() {
            if *t > now {
                break;
            }
            let Reverse((t, name)) = self.expiries.pop().unwrap();
            // Stale index records (entry extended, satisfied or replaced) are skipped.
            if self.entries.get(&name).is_some_and(|e| e.expiry == t) {
                self.entries.remove(&name);
                out.push(name);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}
