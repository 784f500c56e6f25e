use std::num::NonZeroUsize;

use lru::LruCache;

use crate::naming::Name;
use crate::wire::DataPacket;

pub const DEFAULT_CS_CAPACITY: usize = 65_536;

/// Packet-granular LRU content store keyed by full chunk name.
#[derive(Debug)]
pub struct ContentStore {
    /// `None` when the capacity is zero: caching disabled, every lookup misses.
    cache: Option<LruCache<Name, DataPacket>>,
    hits: u64,
    misses: u64,
    evictions: u64,
}

impl ContentStore {
    pub fn new(capacity_packets: usize) -> Self {
        Self {
            cache: NonZeroUsize::new(capacity_packets).map(LruCache::new),
            hits: 0,
            misses: 0,
            evictions: 0,
        }
    }

    /// Counted lookup; a hit refreshes recency.
    pub fn lookup(&mut self, name: &Name) -> Option<DataPacket> {
        let found = self.cache.as_mut().and_then(|c| c.get(name).cloned());
        if found.is_some() {
            self.hits += 1;
        } else {
            self.misses += 1;
        }
        found
    }

    /// Uncounted membership test that leaves recency untouched.
    pub fn contains(&self, name: &Name) -> bool {
        self.cache.as_ref().is_some_and(|c| c.contains(name))
    }

    /// Inserts or refreshes; returns the evicted name when the store was full.
    pub fn insert(&mut self, data: DataPacket) -> Option<Name> {
        let cache = self.cache.as_mut()?;
        let name = data.name.clone();
        match cache.push(name.clone(), data) {
            Some((old, _)) if old != name => {
                self.evictions += 1;
                Some(old)
            }
            _ => None,
        }
    }

    pub fn len(&self) -> usize {
        self.cache.as_ref().map_or(0, LruCache::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn capacity(&self) -> usize {
        self.cache.as_ref().map_or(0, |c| c.cap().get())
    }

    pub fn hits(&self) -> u64 {
        self.hits
    }

    pub fn misses(&self) -> u64 {
        self.misses
    }

    pub fn evictions(&self) -> u64 {
        self.evictions
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bytes::Bytes;

    fn d(s: &str) -> DataPacket {
        DataPacket {
            name: Name::parse(s).unwrap(),
            payload: Bytes::from_static(b"x"),
            total_chunks: 1,
        }
    }

    #[test]
    fn lru_evicts_oldest_and_hits_refresh() {
        let mut cs = ContentStore::new(2);
        cs.insert(d("/x"));
        cs.insert(d("/y"));
        // Touch x so y becomes the oldest.
        assert!(cs.lookup(&d("/x").name).is_some());
        assert_eq!(cs.insert(d("/z")), Some(d("/y").name));
        assert!(cs.contains(&d("/x").name) && cs.contains(&d("/z").name));
        assert!(!cs.contains(&d("/y").name));
        assert_eq!((cs.hits(), cs.misses(), cs.evictions()), (1, 0, 1));
    }

    #[test]
    fn oldest_evicted_without_access() {
        let mut cs = ContentStore::new(2);
        cs.insert(d("/x"));
        cs.insert(d("/y"));
        assert_eq!(cs.insert(d("/z")), Some(d("/x").name));
        assert_eq!(cs.insert(d("/z")), None);
        assert_eq!(cs.len(), 2);
    }

    #[test]
    fn capacity_bound_holds() {
        let mut cs = ContentStore::new(DEFAULT_CS_CAPACITY);
        for i in 0..DEFAULT_CS_CAPACITY + 500 {
            cs.insert(d(&format!("/n/c={i}")));
            assert!(cs.len() <= DEFAULT_CS_CAPACITY);
        }
        assert_eq!(cs.len(), DEFAULT_CS_CAPACITY);
        assert_eq!(cs.evictions(), 500);
        assert!(!cs.contains(&d("/n/c=499").name));
        assert!(cs.contains(&d("/n/c=500").name));
    }

    #[test]
    fn zero_capacity_disables() {
        let mut cs = ContentStore::new(0);
        assert_eq!(cs.insert(d("/x")), None);
        assert!(cs.lookup(&d("/x").name).is_none());
        assert_eq!((cs.len(), cs.misses()), (0, 1));
    }
}
