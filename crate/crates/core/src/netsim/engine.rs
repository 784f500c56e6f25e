use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::netsim::SimTime;

struct Entry<E> {
    at: SimTime,
    seq: u64,
    event: E,
}

impl<E> PartialEq for Entry<E> {
    fn eq(&self, other: &Self) -> bool {
        (self.at, self.seq) == (other.at, other.seq)
    }
}

impl<E> Eq for Entry<E> {}

impl<E> PartialOrd for Entry<E> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<E> Ord for Entry<E> {
    // Reversed: the max-heap pops the earliest (time, sequence) first.
    fn cmp(&self, other: &Self) -> Ordering {
        (other.at, other.seq).cmp(&(self.at, self.seq))
    }
}

/// Event queue executing in strict (time, insertion sequence) order.
pub struct Scheduler<E> {
    now: SimTime,
    seq: u64,
    heap: BinaryHeap<Entry<E>>,
}

impl<E> Default for Scheduler<E> {
    fn default() -> Self {
        Self {
            now: 0,
            seq: 0,
            heap: BinaryHeap::new(),
        }
    }
}

impl<E> Scheduler<E> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn now(&self) -> SimTime {
        self.now
    }

    pub fn schedule(&mut self, at: SimTime, event: E) -> Result<()> {
        if at < self.now {
            return Err(Error::contract(format!(
                "event scheduled at {at} ns, clock already at {} ns",
                self.now
            )));
        }
        self.heap.push(Entry {
            at,
            seq: self.seq,
            event,
        });
        self.seq += 1;
        Ok(())
    }

    pub fn schedule_in(&mut self, delay: SimTime, event: E) {
        let at = self.now + delay;
        self.heap.push(Entry {
            at,
            seq: self.seq,
            event,
        });
        self.seq += 1;
    }

    /// Advances the clock to the next event and returns it.
    pub fn pop(&mut self) -> Option<(SimTime, E)> {
        let e = self.heap.pop()?;
        self.now = e.at;
        Some((e.at, e.event))
    }

    pub fn peek_time(&self) -> Option<SimTime> {
        self.heap.peek().map(|e| e.at)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Drains the queue, letting the handler schedule follow-up events.
    pub fn run(&mut self, mut handler: impl FnMut(&mut Self, SimTime, E)) {
        while let Some((t, e)) = self.pop() {
            handler(self, t, e);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_times_run_in_insertion_order() {
        let mut s = Scheduler::new();
        s.schedule(5, 'b').unwrap();
        s.schedule(5, 'c').unwrap();
        s.schedule(1, 'a').unwrap();
        let mut order = Vec::new();
        s.run(|_, t, e| order.push((t, e)));
        assert_eq!(order, vec![(1, 'a'), (5, 'b'), (5, 'c')]);
        assert!(s.is_empty());
    }

    #[test]
    fn past_schedule_is_contract_violation() {
        let mut s = Scheduler::new();
        s.schedule(10, ()).unwrap();
        s.pop();
        assert!(matches!(s.schedule(9, ()), Err(Error::Contract(_))));
        assert!(s.schedule(10, ()).is_ok());
    }

    #[test]
    fn handler_follow_ups_are_drained() {
        let mut s = Scheduler::new();
        s.schedule(0, 3u32).unwrap();
        let mut seen = 0;
        s.run(|s, _, n| {
            seen += 1;
            if n > 0 {
                s.schedule_in(10, n - 1);
            }
        });
        assert_eq!(seen, 4);
        assert_eq!(s.now(), 30);
    }
}
