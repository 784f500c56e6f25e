use std::fmt;

use lru::LruCache;
use serde::Serialize;

use crate::wire::{DEFAULT_MTU_PAYLOAD, HEADER_OVERHEAD};

/// Capacity parity with a 65,536-packet CS.
pub const DEFAULT_CDN_CAPACITY_BYTES: u64 = 65_536 * (DEFAULT_MTU_PAYLOAD + HEADER_OVERHEAD) as u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjectId {
    Manifest,
    /// `rep` indexes the representation ladder (0 = level 30).
    Gof {
        gof: u32,
        rep: usize,
    },
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ObjectId::Manifest => write!(f, "manifest"),
            ObjectId::Gof { gof, rep } => write!(f, "gof{gof:04}/rep{rep}"),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct CdnCounters {
    pub hits: u64,
    pub misses: u64,
    pub evictions: u64,
}

/// Whole-object LRU bounded by bytes. Only GoF objects count toward hit statistics.
#[derive(Debug)]
pub struct CdnCache {
    lru: LruCache<ObjectId, u64>,
    used: u64,
    capacity: u64,
    counters: CdnCounters,
}

impl CdnCache {
    pub fn new(capacity_bytes: u64) -> Self {
        Self {
            lru: LruCache::unbounded(),
            used: 0,
            capacity: capacity_bytes,
            counters: CdnCounters::default(),
        }
    }

    /// Exact-match lookup; refreshes recency on a hit.
    pub fn lookup(&mut self, obj: &ObjectId) -> Option<u64> {
        let hit = self.lru.get(obj).copied();
        if matches!(obj, ObjectId::Gof { .. }) {
            match hit {
                Some(_) => self.counters.hits += 1,
                None => self.counters.misses += 1,
            }
        }
        hit
    }

    pub fn contains(&self, obj: &ObjectId) -> bool {
        self.lru.contains(obj)
    }

    /// Objects larger than the whole cache are not admitted.
    pub fn insert(&mut self, obj: ObjectId, bytes: u64) {
        if bytes > self.capacity {
            return;
        }
        if let Some(old) = self.lru.pop(&obj) {
            self.used -= old;
        }
        while self.used + bytes > self.capacity {
            let (_, b) = self.lru.pop_lru().expect("used > 0 implies entries");
            self.used -= b;
            self.counters.evictions += 1;
        }
        self.lru.put(obj, bytes);
        self.used += bytes;
    }

    pub fn used_bytes(&self) -> u64 {
        self.used
    }

    pub fn capacity_bytes(&self) -> u64 {
        self.capacity
    }

    pub fn counters(&self) -> CdnCounters {
        self.counters
    }
}
