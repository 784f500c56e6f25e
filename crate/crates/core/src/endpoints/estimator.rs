use crate::netsim::{time, SimTime};

pub const DEFAULT_ALPHA: f64 = 0.3;
pub const DEFAULT_BIN_MS: f64 = 100.0;

/// EWMA of delivered rate over fixed bins.
///
/// Each bin's sample is its bytes divided by the time within the bin during
/// which at least one request was outstanding. Bins with less than a tenth of
/// a bin of busy time carry no sample and leave the estimate unchanged, so
/// idle gaps between GoFs do not decay it.
#[derive(Debug, Clone)]
pub struct BandwidthEstimator {
    pub alpha: f64,
    bin: SimTime,
    ewma_bps: f64,
    has_sample: bool,
    bin_start: SimTime,
    bin_bytes: u64,
    bin_busy: SimTime,
    busy_since: Option<SimTime>,
    last_update: SimTime,
}

impl BandwidthEstimator {
    pub fn new(alpha: f64, bin_ms: f64) -> Self {
        Self {
            alpha,
            bin: time::from_ms(bin_ms).max(1),
            ewma_bps: 0.0,
            has_sample: false,
            bin_start: 0,
            bin_bytes: 0,
            bin_busy: 0,
            busy_since: None,
            last_update: 0,
        }
    }

    fn close_bin(&mut self) {
        let end = self.bin_start + self.bin;
        if let Some(s) = self.busy_since {
            self.bin_busy += end - s.max(self.bin_start);
            self.busy_since = Some(end);
        }
        if self.bin_busy >= self.bin / 10 && self.bin_bytes > 0 {
            let sample = self.bin_bytes as f64 * 8.0 / time::to_secs(self.bin_busy);
            self.ewma_bps = if self.has_sample {
                self.alpha * sample + (1.0 - self.alpha) * self.ewma_bps
            } else {
                sample
            };
            self.has_sample = true;
            self.last_update = end;
        }
        self.bin_start = end;
        self.bin_bytes = 0;
        self.bin_busy = 0;
    }

    fn advance(&mut self, now: SimTime) {
        while now >= self.bin_start + self.bin {
            if self.busy_since.is_none() && self.bin_bytes == 0 && self.bin_busy == 0 {
                // Skip whole idle bins in one step.
                self.bin_start += (now - self.bin_start) / self.bin * self.bin;
                break;
            }
            self.close_bin();
        }
    }

    pub fn on_bytes(&mut self, now: SimTime, bytes: usize) {
        self.advance(now);
        self.bin_bytes += bytes as u64;
    }

    /// Called whenever the outstanding-request count crosses zero.
    pub fn set_busy(&mut self, now: SimTime, busy: bool) {
        self.advance(now);
        match (self.busy_since, busy) {
            (None, true) => self.busy_since = Some(now),
            (Some(s), false) => {
                self.bin_busy += now - s.max(self.bin_start);
                self.busy_since = None;
            }
            _ => {}
        }
    }

    pub fn estimate_bps(&mut self, now: SimTime) -> f64 {
        self.advance(now);
        self.ewma_bps
    }

    pub fn last_update(&self) -> SimTime {
        self.last_update
    }
}

impl Default for BandwidthEstimator {
    fn default() -> Self {
        Self::new(DEFAULT_ALPHA, DEFAULT_BIN_MS)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netsim::time::NS_PER_MS;

    #[test]
    fn steady_rate_converges() {
        let mut e = BandwidthEstimator::default();
        e.set_busy(0, true);
        // 1250 bytes every ms = 10 Mbps.
        for ms in 1..=1000 {
            e.on_bytes(ms * NS_PER_MS, 1250);
        }
        let est = e.estimate_bps(1001 * NS_PER_MS);
        assert!((est - 10e6).abs() < 1e4, "{est}");
    }

    #[test]
    fn idle_gaps_do_not_decay_and_busy_time_normalizes() {
        let mut e = BandwidthEstimator::default();
        // Busy for the first 50 ms of each 100 ms bin at 20 Mbps.
        for bin in 0..10u64 {
            let t0 = bin * 100 * NS_PER_MS;
            e.set_busy(t0, true);
            for ms in 1..=50 {
                e.on_bytes(t0 + ms * NS_PER_MS, 2500);
            }
            e.set_busy(t0 + 50 * NS_PER_MS, false);
        }
        let est = e.estimate_bps(5000 * NS_PER_MS);
        assert!((est - 20e6).abs() < 1e3, "{est}");
    }

    #[test]
    fn ewma_weights_new_bins() {
        let mut e = BandwidthEstimator::new(0.5, 100.0);
        e.set_busy(0, true);
        e.on_bytes(50 * NS_PER_MS, 125_000); // 10 Mbps over the bin
        e.on_bytes(150 * NS_PER_MS, 375_000); // 30 Mbps
        let est = e.estimate_bps(200 * NS_PER_MS);
        assert!((est - 20e6).abs() < 1.0, "{est}");
        assert_eq!(BandwidthEstimator::default().estimate_bps(10 * NS_PER_MS), 0.0);
    }
}
