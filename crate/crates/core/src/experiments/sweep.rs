use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::metrics::RunMetrics;
use crate::experiments::run::{run_metrics_or_status, PreparedDataset};
use crate::experiments::scenario::{Protocol, ScenarioConfig};

/// Experiment grid. Points enumerate protocol-major, then bandwidth, loss and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSpec {
    pub protocols: Vec<Protocol>,
    pub bandwidths_mbps: Vec<f64>,
    pub loss_pct: Vec<f64>,
    /// Seeds `first_seed..first_seed + seeds`.
    pub seeds: u64,
    pub first_seed: u64,
    /// Worker threads; 0 uses the available parallelism.
    pub threads: usize,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            protocols: Protocol::ALL.to_vec(),
            bandwidths_mbps: vec![10.0, 50.0, 80.0],
            // i / 10 keeps each value the shortest decimal, unlike repeated += 0.1.
            loss_pct: (0..=10).map(|i| i as f64 / 10.0).collect(),
            seeds: 5,
            first_seed: 1,
            threads: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub protocol: Protocol,
    pub bandwidth_mbps: f64,
    pub loss_pct: f64,
    pub seed: u64,
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        for (key, empty) in [
            ("protocols", self.protocols.is_empty()),
            ("bandwidths_mbps", self.bandwidths_mbps.is_empty()),
            ("loss_pct", self.loss_pct.is_empty()),
            ("seeds", self.seeds == 0),
        ] {
            if empty {
                return Err(Error::config(key, "must not be empty"));
            }
        }
        Ok(())
    }

    pub fn points(&self) -> Vec<SweepPoint> {
        let mut out = Vec::new();
        for &protocol in &self.protocols {
            for &bandwidth_mbps in &self.bandwidths_mbps {
                for &loss_pct in &self.loss_pct {
                    for seed in self.first_seed..self.first_seed + self.seeds {
                        out.push(SweepPoint {
                            protocol,
                            bandwidth_mbps,
                            loss_pct,
                            seed,
                        });
                    }
                }
            }
        }
        out
    }

    /// Distinct (protocol, bandwidth, loss) combinations.
    pub fn grid_size(&self) -> usize {
        self.protocols.len() * self.bandwidths_mbps.len() * self.loss_pct.len()
    }

    pub fn scenario(&self, base: &ScenarioConfig, p: &SweepPoint) -> ScenarioConfig {
        ScenarioConfig {
            protocol: p.protocol,
            bandwidth_mbps: p.bandwidth_mbps,
            loss_pct: p.loss_pct,
            seed: p.seed,
            ..base.clone()
        }
    }
}

/// One row per point in [`SweepSpec::points`] order, whatever the thread count.
/// A failing run yields a status row and the sweep continues.
pub fn run_sweep(spec: &SweepSpec, base: &ScenarioConfig, data: &PreparedDataset) -> Result<Vec<RunMetrics>> {
    spec.validate()?;
    let points = spec.points();
    let threads = match spec.threads {
        0 => thread::available_parallelism().map_or(1, |n| n.get()),
        n => n,
    }
    .min(points.len());
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<RunMetrics>>> = Mutex::new(vec![None; points.len()]);
    thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(p) = points.get(i) else { break };
                let cfg = spec.scenario(base, p);
                let m = run_metrics_or_status(&cfg, data);
                log::info!(
                    "[{}/{}] {} {} Mbps {}% seed {}: {}",
                    i + 1,
                    points.len(),
                    p.protocol,
                    p.bandwidth_mbps,
                    p.loss_pct,
                    p.seed,
                    m.status
                );
                slots.lock().unwrap()[i] = Some(m);
            });
        }
    });
    Ok(slots
        .into_inner()
        .unwrap()
        .into_iter()
        .map(|m| m.expect("every point ran"))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_is_495_runs() {
        let s = SweepSpec::default();
        assert_eq!(s.points().len(), 495);
        assert_eq!(s.grid_size(), 99);
        assert_eq!(s.loss_pct[3].to_string(), "0.3");
        let p = s.points();
        assert_eq!((p[0].protocol, p[0].seed), (Protocol::Inds, 1));
        assert_eq!(p[5].loss_pct, 0.1);
        assert_eq!(p[494].protocol, Protocol::PccDash);
    }

    #[test]
    fn empty_lists_rejected() {
        let s = SweepSpec {
            loss_pct: vec![],
            ..Default::default()
        };
        assert!(matches!(s.validate(), Err(Error::Config { key, .. }) if key == "loss_pct"));
    }
}
