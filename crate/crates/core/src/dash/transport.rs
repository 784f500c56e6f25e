//! Reno-like reliable byte stream at segment granularity.
//!
//! Messages are written as whole segments (a segment never spans two
//! messages). The receiver acknowledges cumulatively on every segment and
//! delivers strictly in order.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::netsim::{time, SimTime};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RenoConfig {
    pub initial_cwnd: f64,
    pub min_rto_ms: f64,
    /// RTO before the first RTT sample.
    pub initial_rto_ms: f64,
    pub max_rto_ms: f64,
    pub dupack_threshold: u32,
    /// Consecutive timeouts on one segment before the stream gives up.
    pub max_timeouts: u32,
    pub rtt_alpha: f64,
}

impl Default for RenoConfig {
    fn default() -> Self {
        Self {
            initial_cwnd: 10.0,
            min_rto_ms: 200.0,
            initial_rto_ms: 1000.0,
            max_rto_ms: 60_000.0,
            dupack_threshold: 3,
            max_timeouts: 6,
            rtt_alpha: 0.125,
        }
    }
}

impl RenoConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.initial_cwnd >= 1.0) {
            return Err(Error::config("dash.transport.initial_cwnd", "must be at least 1"));
        }
        if !(self.min_rto_ms > 0.0 && self.initial_rto_ms > 0.0 && self.max_rto_ms >= self.min_rto_ms) {
            return Err(Error::config(
                "dash.transport.min_rto_ms",
                "RTO bounds must be positive and ordered",
            ));
        }
        if self.dupack_threshold == 0 {
            return Err(Error::config("dash.transport.dupack_threshold", "must be at least 1"));
        }
        if !(self.rtt_alpha > 0.0 && self.rtt_alpha <= 1.0) {
            return Err(Error::config("dash.transport.rtt_alpha", "must be in (0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SendOut {
    Segment { seq: u64, len: u32, retransmit: bool },
    ArmRto { at: SimTime, epoch: u64 },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct SenderCounters {
    pub segments_sent: u64,
    pub retransmissions: u64,
    pub fast_retransmits: u64,
    pub timeouts: u64,
}

#[derive(Debug, Clone)]
pub struct RenoSender {
    cfg: RenoConfig,
    mss: u32,
    seg_len: Vec<u32>,
    sent_at: Vec<SimTime>,
    retransmitted: Vec<bool>,
    snd_una: u64,
    next_seq: u64,
    high_water: u64,
    cwnd: f64,
    ssthresh: f64,
    dupacks: u32,
    srtt_ns: Option<f64>,
    backoff: u32,
    rto_epoch: u64,
    rto_armed: bool,
    failed: bool,
    counters: SenderCounters,
}

impl RenoSender {
    pub fn new(cfg: RenoConfig, mss: u32) -> Self {
        let cwnd = cfg.initial_cwnd;
        Self {
            cfg,
            mss: mss.max(1),
            seg_len: Vec::new(),
            sent_at: Vec::new(),
            retransmitted: Vec::new(),
            snd_una: 0,
            next_seq: 0,
            high_water: 0,
            cwnd,
            ssthresh: f64::INFINITY,
            dupacks: 0,
            srtt_ns: None,
            backoff: 0,
            rto_epoch: 0,
            rto_armed: false,
            failed: false,
            counters: SenderCounters::default(),
        }
    }

    /// Appends a message; returns the segment index one past its end.
    pub fn write(&mut self, bytes: u64) -> u64 {
        let n = bytes.div_ceil(self.mss as u64).max(1);
        let mut left = bytes;
        for _ in 0..n {
            let len = left.min(self.mss as u64) as u32;
            left -= len as u64;
            self.seg_len.push(len);
            self.sent_at.push(0);
            self.retransmitted.push(false);
        }
        self.seg_len.len() as u64
    }

    pub fn cwnd(&self) -> f64 {
        self.cwnd
    }

    pub fn ssthresh(&self) -> f64 {
        self.ssthresh
    }

    pub fn snd_una(&self) -> u64 {
        self.snd_una
    }

    pub fn failed(&self) -> bool {
        self.failed
    }

    pub fn counters(&self) -> SenderCounters {
        self.counters
    }

    pub fn in_flight(&self) -> u64 {
        self.next_seq - self.snd_una
    }

    pub fn rto(&self) -> SimTime {
        let base = match self.srtt_ns {
            None => time::from_ms(self.cfg.initial_rto_ms),
            Some(s) => ((2.0 * s) as SimTime).max(time::from_ms(self.cfg.min_rto_ms)),
        };
        let scaled = base.saturating_mul(1u64 << self.backoff.min(20));
        scaled.min(time::from_ms(self.cfg.max_rto_ms))
    }

    fn emit(&mut self, now: SimTime, seq: u64, out: &mut Vec<SendOut>) {
        let i = seq as usize;
        let retransmit = seq < self.high_water;
        if retransmit {
            self.retransmitted[i] = true;
            self.counters.retransmissions += 1;
        }
        self.sent_at[i] = now;
        self.counters.segments_sent += 1;
        self.high_water = self.high_water.max(seq + 1);
        out.push(SendOut::Segment {
            seq,
            len: self.seg_len[i],
            retransmit,
        });
    }

    fn arm(&mut self, now: SimTime, out: &mut Vec<SendOut>) {
        self.rto_epoch += 1;
        self.rto_armed = true;
        out.push(SendOut::ArmRto {
            at: now + self.rto(),
            epoch: self.rto_epoch,
        });
    }

    /// Sends new segments while the window allows.
    pub fn pump(&mut self, now: SimTime, out: &mut Vec<SendOut>) {
        if self.failed {
            return;
        }
        let window = self.cwnd.floor().max(1.0) as u64;
        while (self.next_seq as usize) < self.seg_len.len() && self.in_flight() < window {
            let seq = self.next_seq;
            self.next_seq += 1;
            self.emit(now, seq, out);
        }
        if !self.rto_armed && self.in_flight() > 0 {
            self.arm(now, out);
        }
    }

    pub fn on_ack(&mut self, now: SimTime, cum: u64, out: &mut Vec<SendOut>) {
        if self.failed {
            return;
        }
        if cum > self.snd_una {
            let last = (cum - 1) as usize;
            if !self.retransmitted[last] {
                let sample = (now - self.sent_at[last]) as f64;
                self.srtt_ns = Some(match self.srtt_ns {
                    None => sample,
                    Some(s) => s + self.cfg.rtt_alpha * (sample - s),
                });
            }
            for _ in self.snd_una..cum {
                if self.cwnd < self.ssthresh {
                    self.cwnd += 1.0;
                } else {
                    self.cwnd += 1.0 / self.cwnd;
                }
            }
            self.snd_una = cum;
            self.next_seq = self.next_seq.max(cum);
            self.dupacks = 0;
            self.backoff = 0;
            self.rto_armed = false;
            if self.in_flight() > 0 {
                self.arm(now, out);
            } else {
                // Invalidate the outstanding timer.
                self.rto_epoch += 1;
            }
        } else if cum == self.snd_una && self.in_flight() > 0 {
            self.dupacks += 1;
            if self.dupacks == self.cfg.dupack_threshold {
                self.ssthresh = (self.cwnd / 2.0).max(2.0);
                self.cwnd = self.ssthresh;
                self.counters.fast_retransmits += 1;
                let seq = self.snd_una;
                self.emit(now, seq, out);
            }
        }
        self.pump(now, out);
    }

    pub fn on_rto(&mut self, now: SimTime, epoch: u64, out: &mut Vec<SendOut>) {
        if self.failed || epoch != self.rto_epoch || !self.rto_armed || self.in_flight() == 0 {
            return;
        }
        self.counters.timeouts += 1;
        self.backoff += 1;
        if self.backoff > self.cfg.max_timeouts {
            self.failed = true;
            return;
        }
        self.ssthresh = (self.in_flight() as f64 / 2.0).max(2.0);
        self.cwnd = 1.0;
        self.dupacks = 0;
        self.next_seq = self.snd_una;
        self.rto_armed = false;
        self.pump(now, out);
    }
}

/// In-order receiver with an out-of-order buffer.
#[derive(Debug, Clone, Default)]
pub struct StreamReceiver {
    rcv_next: u64,
    ooo: BTreeSet<u64>,
    pub duplicates: u64,
}

impl StreamReceiver {
    /// Returns the cumulative ack to send.
    pub fn on_segment(&mut self, seq: u64) -> u64 {
        if seq < self.rcv_next || self.ooo.contains(&seq) {
            self.duplicates += 1;
        } else if seq == self.rcv_next {
            self.rcv_next += 1;
            while self.ooo.remove(&self.rcv_next) {
                self.rcv_next += 1;
            }
        } else {
            self.ooo.insert(seq);
        }
        self.rcv_next
    }

    pub fn delivered(&self) -> u64 {
        self.rcv_next
    }
}
