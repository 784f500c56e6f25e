use rustc_hash::FxHashMap;

use crate::icn::FaceId;
use crate::naming::Name;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FibEntry {
    pub prefix: Name,
    /// Preference order; ties in prefix length resolve to the first usable hop.
    pub next_hops: Vec<FaceId>,
}

/// Static routing table with component-wise longest-prefix match.
#[derive(Debug, Clone, Default)]
pub struct Fib {
    entries: FxHashMap<Name, FibEntry>,
}

impl Fib {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends `face` to the next hops for `prefix`.
    pub fn add_route(&mut self, prefix: Name, face: FaceId) {
        let e = self.entries.entry(prefix.clone()).or_insert_with(|| FibEntry {
            prefix,
            next_hops: Vec::new(),
        });
        if !e.next_hops.contains(&face) {
            e.next_hops.push(face);
        }
    }

    pub fn longest_prefix_match(&self, name: &Name) -> Option<&FibEntry> {
        std::iter::once(name.as_str())
            .chain(name.ancestors())
            .find_map(|p| self.entries.get(p))
    }

    /// First next hop of the longest match that is not `exclude`.
    pub fn next_hop(&self, name: &Name, exclude: FaceId) -> Option<FaceId> {
        self.longest_prefix_match(name)?
            .next_hops
            .iter()
            .copied()
            .find(|&f| f != exclude)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n(s: &str) -> Name {
        Name::parse(s).unwrap()
    }

    #[test]
    fn longest_prefix_wins() {
        let mut fib = Fib::new();
        fib.add_route(n("/A"), 1);
        fib.add_route(n("/A/B"), 2);
        assert_eq!(fib.next_hop(&n("/A/B/C"), 99), Some(2));
        assert_eq!(fib.next_hop(&n("/A/BC"), 99), Some(1));
        assert_eq!(fib.next_hop(&n("/Z"), 99), None);
    }

    #[test]
    fn order_breaks_ties_and_incoming_face_excluded() {
        let mut fib = Fib::new();
        fib.add_route(n("/A"), 3);
        fib.add_route(n("/A"), 4);
        assert_eq!(fib.next_hop(&n("/A/x"), 99), Some(3));
        assert_eq!(fib.next_hop(&n("/A/x"), 3), Some(4));
    }
}
