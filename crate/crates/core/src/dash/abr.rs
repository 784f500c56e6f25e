use serde::{Deserialize, Serialize};

use crate::endpoints::MetaData;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AbrVariant {
    /// Throughput rule only.
    DashPc,
    /// Throughput rule adjusted by buffer level, with prefetch toward a buffer target.
    PccDash,
}

impl AbrVariant {
    pub fn label(self) -> &'static str {
        match self {
            AbrVariant::DashPc => "dash_pc",
            AbrVariant::PccDash => "pcc_dash",
        }
    }
}

/// A pre-encoded full version of one GoF.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Representation {
    /// `30`, `50`, `75` or `100`.
    pub level: String,
    pub bytes: u64,
}

/// Full versions per GoF: TopLayer plus every last-layer tier up to the level.
pub fn representations(md: &MetaData) -> Vec<Vec<Representation>> {
    md.gofs
        .iter()
        .map(|g| {
            (0..g.segments.len())
                .map(|t| Representation {
                    level: md.ladder.level(t).label.trim_start_matches('L').to_string(),
                    bytes: g.cumulative_bytes(t),
                })
                .collect()
        })
        .collect()
}

/// Highest representation whose bytes fit `safety · est · budget_s / 8`; floor 0.
pub fn abr_select(est_bps: f64, reps: &[Representation], safety: f64, budget_s: f64) -> usize {
    let budget = safety * est_bps.max(0.0) * budget_s / 8.0;
    reps.iter().rposition(|r| r.bytes as f64 <= budget).unwrap_or(0)
}

/// Buffer-aware rule: one step down below half the target, one step up (dropping
/// the safety margin) once the target is met.
pub fn hybrid_select(
    est_bps: f64,
    reps: &[Representation],
    safety: f64,
    budget_s: f64,
    buffer_s: f64,
    target_s: f64,
) -> usize {
    let r = abr_select(est_bps, reps, safety, budget_s);
    if buffer_s < target_s / 2.0 {
        r.saturating_sub(1)
    } else if buffer_s >= target_s {
        let up = (r + 1).min(reps.len() - 1);
        if reps[up].bytes as f64 <= est_bps * budget_s / 8.0 {
            up
        } else {
            r
        }
    } else {
        r
    }
}
