use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::{time, NodeId, SimTime};

pub type LinkId = usize;

pub const DEFAULT_QUEUE_LIMIT: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum LossModel {
    None,
    Bernoulli {
        p: f64,
    },
    /// Two-state burst model; `p_gb`/`p_bg` are per-packet transition probabilities.
    GilbertElliott {
        p_gb: f64,
        p_bg: f64,
        loss_good: f64,
        loss_bad: f64,
    },
}

impl LossModel {
    pub fn bernoulli(p: f64) -> Self {
        if p > 0.0 {
            LossModel::Bernoulli { p }
        } else {
            LossModel::None
        }
    }

    fn validate(&self) -> Result<()> {
        let probs: Vec<f64> = match *self {
            LossModel::None => vec![],
            LossModel::Bernoulli { p } => vec![p],
            LossModel::GilbertElliott {
                p_gb,
                p_bg,
                loss_good,
                loss_bad,
            } => vec![p_gb, p_bg, loss_good, loss_bad],
        };
        if probs.iter().all(|p| (0.0..=1.0).contains(p)) {
            Ok(())
        } else {
            Err(Error::config("loss", "probabilities must lie in [0, 1]"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub bandwidth_bps: u64,
    pub prop_delay_ms: f64,
    pub loss: LossModel,
    pub queue_limit_packets: usize,
}

impl LinkSpec {
    pub fn new(bandwidth_bps: u64, prop_delay_ms: f64) -> Self {
        Self {
            bandwidth_bps,
            prop_delay_ms,
            loss: LossModel::None,
            queue_limit_packets: DEFAULT_QUEUE_LIMIT,
        }
    }

    pub fn with_loss(mut self, loss: LossModel) -> Self {
        self.loss = loss;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.bandwidth_bps == 0 {
            return Err(Error::config("bandwidth", "must be positive"));
        }
        if !(self.prop_delay_ms >= 0.0 && self.prop_delay_ms.is_finite()) {
            return Err(Error::config("prop_delay_ms", "must be finite and non-negative"));
        }
        if self.queue_limit_packets == 0 {
            return Err(Error::config("queue_limit_packets", "must be positive"));
        }
        self.loss.validate()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct LinkCounters {
    pub sent_packets: u64,
    pub sent_bytes: u64,
    pub delivered_packets: u64,
    pub delivered_bytes: u64,
    pub lost_packets: u64,
    pub lost_bytes: u64,
    pub queue_dropped_packets: u64,
    pub queue_dropped_bytes: u64,
}

impl LinkCounters {
    fn add(&mut self, o: &LinkCounters) {
        self.sent_packets += o.sent_packets;
        self.sent_bytes += o.sent_bytes;
        self.delivered_packets += o.delivered_packets;
        self.delivered_bytes += o.delivered_bytes;
        self.lost_packets += o.lost_packets;
        self.lost_bytes += o.lost_bytes;
        self.queue_dropped_packets += o.queue_dropped_packets;
        self.queue_dropped_bytes += o.queue_dropped_bytes;
    }

    pub fn conserved(&self) -> bool {
        self.delivered_bytes + self.lost_bytes + self.queue_dropped_bytes == self.sent_bytes
            && self.delivered_packets + self.lost_packets + self.queue_dropped_packets == self.sent_packets
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TxOutcome {
    Delivered { at: SimTime },
    Lost,
    QueueDropped,
}

#[derive(Debug, Default)]
struct Direction {
    busy_until: SimTime,
    /// Finish times of packets queued or in service.
    pending: VecDeque<SimTime>,
    counters: LinkCounters,
    in_bad_state: bool,
}

/// Full-duplex point-to-point link with one FIFO transmitter per direction.
#[derive(Debug)]
pub struct Link {
    pub id: LinkId,
    pub a: NodeId,
    pub b: NodeId,
    pub spec: LinkSpec,
    prop: SimTime,
    rng: ChaCha8Rng,
    dirs: [Direction; 2],
}

impl Link {
    /// The loss stream depends only on `(seed, id)`.
    pub fn new(id: LinkId, a: NodeId, b: NodeId, spec: LinkSpec, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(id as u64 + 1);
        Self {
            id,
            a,
            b,
            prop: time::from_ms(spec.prop_delay_ms),
            spec,
            rng,
            dirs: Default::default(),
        }
    }

    /// 0 for a→b, 1 for b→a.
    pub fn direction_from(&self, from: NodeId) -> Option<usize> {
        if from == self.a {
            Some(0)
        } else if from == self.b {
            Some(1)
        } else {
            None
        }
    }

    pub fn peer(&self, of: NodeId) -> NodeId {
        if of == self.a {
            self.b
        } else {
            self.a
        }
    }

    fn drop_roll(&mut self, dir: usize) -> bool {
        match self.spec.loss {
            LossModel::None => false,
            LossModel::Bernoulli { p } => self.rng.gen::<f64>() < p,
            LossModel::GilbertElliott {
                p_gb,
                p_bg,
                loss_good,
                loss_bad,
            } => {
                let bad = self.dirs[dir].in_bad_state;
                let flip = self.rng.gen::<f64>() < if bad { p_bg } else { p_gb };
                let bad = bad ^ flip;
                self.dirs[dir].in_bad_state = bad;
                self.rng.gen::<f64>() < if bad { loss_bad } else { loss_good }
            }
        }
    }

    /// A lost packet still occupies the transmitter; a queue-dropped one does not.
    pub fn transmit(&mut self, now: SimTime, from: NodeId, wire_size: usize) -> TxOutcome {
        let dir = self
            .direction_from(from)
            .unwrap_or_else(|| panic!("node {from} is not an endpoint of link {}", self.id));
        let limit = self.spec.queue_limit_packets;
        let ser = time::serialization(wire_size, self.spec.bandwidth_bps);
        let bytes = wire_size as u64;
        let lost = self.drop_roll(dir);
        let d = &mut self.dirs[dir];
        while d.pending.front().is_some_and(|&f| f <= now) {
            d.pending.pop_front();
        }
        d.counters.sent_packets += 1;
        d.counters.sent_bytes += bytes;
        if d.pending.len() >= limit {
            d.counters.queue_dropped_packets += 1;
            d.counters.queue_dropped_bytes += bytes;
            return TxOutcome::QueueDropped;
        }
        let finish = d.busy_until.max(now) + ser;
        d.busy_until = finish;
        d.pending.push_back(finish);
        if lost {
            d.counters.lost_packets += 1;
            d.counters.lost_bytes += bytes;
            return TxOutcome::Lost;
        }
        d.counters.delivered_packets += 1;
        d.counters.delivered_bytes += bytes;
        TxOutcome::Delivered { at: finish + self.prop }
    }

    pub fn counters(&self, dir: usize) -> LinkCounters {
        self.dirs[dir].counters
    }

    pub fn total_counters(&self) -> LinkCounters {
        let mut c = self.dirs[0].counters;
        c.add(&self.dirs[1].counters);
        c
    }

    pub fn queue_len(&self, dir: usize, now: SimTime) -> usize {
        self.dirs[dir].pending.iter().filter(|&&f| f > now).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_packet_delivery_time() {
        let mut l = Link::new(0, 0, 1, LinkSpec::new(10_000_000, 1.0), 7);
        assert_eq!(l.transmit(0, 0, 1240), TxOutcome::Delivered { at: 1_992_000 });
    }

    #[test]
    fn back_to_back_packets_queue_fifo() {
        let mut l = Link::new(0, 0, 1, LinkSpec::new(10_000_000, 1.0), 7);
        l.transmit(0, 0, 1240);
        assert_eq!(l.transmit(0, 0, 1240), TxOutcome::Delivered { at: 2_984_000 });
        // The reverse direction has its own transmitter.
        assert_eq!(l.transmit(0, 1, 1240), TxOutcome::Delivered { at: 1_992_000 });
        assert_eq!(l.queue_len(0, 0), 2);
        assert_eq!(l.queue_len(0, 992_000), 1);
    }

    #[test]
    fn total_loss_never_delivers() {
        let spec = LinkSpec::new(1_000_000_000, 1.0).with_loss(LossModel::bernoulli(1.0));
        let mut l = Link::new(0, 0, 1, spec, 1);
        assert!((0..1000).all(|i| l.transmit(i * 100_000, 0, 100) == TxOutcome::Lost));
        assert!(l.total_counters().conserved());
    }

    #[test]
    fn queue_limit_drops_and_conserves() {
        let mut spec = LinkSpec::new(1_000_000, 0.0);
        spec.queue_limit_packets = 3;
        let mut l = Link::new(0, 0, 1, spec, 1);
        let outcomes: Vec<TxOutcome> = (0..5).map(|_| l.transmit(0, 0, 1000)).collect();
        assert_eq!(outcomes[3], TxOutcome::QueueDropped);
        let c = l.counters(0);
        assert_eq!((c.sent_packets, c.queue_dropped_packets), (5, 2));
        assert!(c.conserved());
    }

    #[test]
    fn empirical_bernoulli_rate() {
        let p = 0.01;
        let spec = LinkSpec::new(100_000_000_000, 0.0).with_loss(LossModel::bernoulli(p));
        let mut l = Link::new(3, 0, 1, spec, 42);
        let n = 200_000u64;
        for i in 0..n {
            l.transmit(i * 1000, 0, 100);
        }
        let rate = l.counters(0).lost_packets as f64 / n as f64;
        assert!((rate - p).abs() <= 0.15 * p, "rate {rate}");
    }

    #[test]
    fn loss_stream_depends_on_seed_and_link() {
        let spec = LinkSpec::new(1_000_000_000, 0.0).with_loss(LossModel::bernoulli(0.5));
        let pattern = |id, seed| {
            let mut l = Link::new(id, 0, 1, spec, seed);
            (0..64)
                .map(|i| l.transmit(i * 10_000, 0, 10) == TxOutcome::Lost)
                .collect::<Vec<_>>()
        };
        assert_eq!(pattern(0, 1), pattern(0, 1));
        assert_ne!(pattern(0, 1), pattern(1, 1));
        assert_ne!(pattern(0, 1), pattern(0, 2));
    }

    #[test]
    fn gilbert_elliott_bursts() {
        let spec = LinkSpec::new(100_000_000_000, 0.0).with_loss(LossModel::GilbertElliott {
            p_gb: 0.01,
            p_bg: 0.3,
            loss_good: 0.0,
            loss_bad: 1.0,
        });
        let mut l = Link::new(0, 0, 1, spec, 5);
        let lost: Vec<bool> = (0..100_000)
            .map(|i| l.transmit(i * 1000, 0, 100) == TxOutcome::Lost)
            .collect();
        let rate = lost.iter().filter(|&&x| x).count() as f64 / lost.len() as f64;
        let stationary = 0.01 / (0.01 + 0.3);
        assert!((rate - stationary).abs() < 0.2 * stationary, "rate {rate}");
        let runs = lost.windows(2).filter(|w| w[0] && w[1]).count();
        assert!(runs > 0);
    }
}
