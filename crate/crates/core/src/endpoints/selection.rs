use crate::endpoints::metadata::GofEntry;

pub const DEFAULT_FRAME_BUDGET_S: f64 = 1.0;
pub const DEFAULT_SAFETY: f64 = 0.8;

/// Highest tier whose cumulative bytes (TopLayer included) fit the budget.
/// Tier 0 is always granted.
pub fn select_tier(est_bps: f64, top_bytes: u64, segment_bytes: &[u64], frame_budget_s: f64, safety: f64) -> usize {
    let budget = safety * est_bps.max(0.0) * frame_budget_s / 8.0;
    let mut total = top_bytes as f64;
    let mut tier = 0;
    for (t, &b) in segment_bytes.iter().enumerate() {
        total += b as f64;
        if t == 0 {
            continue;
        }
        if total > budget {
            break;
        }
        tier = t;
    }
    tier
}

/// Segment suffixes to request for one GoF, in ladder order; TopLayer is implied.
pub fn select_levels(est_bps: f64, gof: &GofEntry, frame_budget_s: f64, safety: f64) -> Vec<String> {
    let sizes: Vec<u64> = gof.segments.iter().map(|s| s.bytes).collect();
    let tier = select_tier(est_bps, gof.top_layer.bytes, &sizes, frame_budget_s, safety);
    gof.segments[..=tier].iter().map(|s| s.label.clone()).collect()
}
