use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layering::RetentionLadder;
use crate::naming::{format_name, ContentId, Name};

/// `MetaData` object payload, serialized as canonical (compact, field-ordered) JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetaData {
    pub dataset: String,
    pub frame_rate: u32,
    pub octree_depth: u8,
    pub gof_frames: u32,
    pub ladder: RetentionLadder,
    pub color_bytes_per_point: u32,
    pub mtu_payload: u32,
    pub time_windows: Vec<String>,
    pub gofs: Vec<GofEntry>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GofEntry {
    pub gof: u32,
    pub time_window: String,
    pub top_layer: SegmentInfo,
    /// Ladder order.
    pub segments: Vec<SegmentInfo>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentInfo {
    /// `TopLayer` or the ladder suffix.
    pub label: String,
    pub bytes: u64,
    pub chunks: u32,
}

impl GofEntry {
    pub fn top_name(&self, dataset: &str) -> Result<Name> {
        format_name(&ContentId::top_layer(dataset, &self.time_window, self.gof))
    }

    pub fn segment_name(&self, dataset: &str, tier: usize) -> Result<Name> {
        let s = self
            .segments
            .get(tier)
            .ok_or_else(|| Error::domain(format!("GoF {} has no tier {tier}", self.gof)))?;
        format_name(&ContentId::last_layer(dataset, &self.time_window, self.gof, &s.label))
    }

    /// Bytes of TopLayer plus tiers `0..=tier`.
    pub fn cumulative_bytes(&self, tier: usize) -> u64 {
        self.top_layer.bytes + self.segments[..=tier].iter().map(|s| s.bytes).sum::<u64>()
    }
}

impl MetaData {
    pub fn to_json(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("metadata serializes")
    }

    pub fn from_json(bytes: &[u8]) -> Result<Self> {
        let md: MetaData = serde_json::from_slice(bytes)?;
        for g in &md.gofs {
            if g.segments.len() != md.ladder.tiers() {
                return Err(Error::Schema(format!(
                    "GoF {} lists {} segments for a {}-tier ladder",
                    g.gof,
                    g.segments.len(),
                    md.ladder.tiers()
                )));
            }
        }
        Ok(md)
    }

    pub fn name(&self) -> Result<Name> {
        format_name(&ContentId::metadata(&self.dataset))
    }

    pub fn gof(&self, gof: u32) -> Option<&GofEntry> {
        self.gofs.iter().find(|g| g.gof == gof)
    }
}
