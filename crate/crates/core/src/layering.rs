//! Retention-ladder partition of a Morton-ordered last layer.
//!
//! Point `i` lands in the first tier whose upper ratio exceeds the base-2 radical
//! inverse of `i`. Because the radical inverse is low-discrepancy along the
//! index and Morton order is locality-preserving, every tier is spread evenly
//! over the cloud.
//!
//! Segment payload layout, one block per frame, blocks concatenated per GoF:
//!
//! ```text
//! frame_index u16 LE | count u32 LE | count x (morton varint | color_bytes)
//! ```

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::codec::container::push_color_record;
use crate::codec::{morton, Rgb, VoxelCloud};
use crate::error::{Error, Result};

pub const SEGMENT_HEADER_LEN: usize = 6;

/// Ordered retention ratios; the last one is always 1.0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct RetentionLadder {
    ratios: Vec<f64>,
}

impl Default for RetentionLadder {
    fn default() -> Self {
        Self {
            ratios: vec![0.30, 0.50, 0.75, 1.00],
        }
    }
}

impl TryFrom<Vec<f64>> for RetentionLadder {
    type Error = Error;

    fn try_from(ratios: Vec<f64>) -> Result<Self> {
        Self::new(ratios)
    }
}

impl From<RetentionLadder> for Vec<f64> {
    fn from(l: RetentionLadder) -> Self {
        l.ratios
    }
}

fn percent(r: f64) -> u32 {
    (r * 100.0).round() as u32
}

impl RetentionLadder {
    pub fn new(ratios: Vec<f64>) -> Result<Self> {
        if ratios.is_empty() {
            return Err(Error::domain("retention ladder is empty"));
        }
        if ratios.iter().any(|&r| !(r > 0.0 && r <= 1.0)) {
            return Err(Error::domain("retention ratios must lie in (0, 1]"));
        }
        if ratios.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::domain("retention ratios must be strictly increasing"));
        }
        if *ratios.last().unwrap() != 1.0 {
            return Err(Error::domain("the last retention ratio must be 1.0"));
        }
        let pct: Vec<u32> = ratios.iter().map(|&r| percent(r)).collect();
        if pct.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::domain("retention ratios must differ at percent resolution"));
        }
        Ok(Self { ratios })
    }

    pub fn ratios(&self) -> &[f64] {
        &self.ratios
    }

    pub fn tiers(&self) -> usize {
        self.ratios.len()
    }

    /// Tier for a radical-inverse value in [0, 1).
    pub fn tier_of(&self, u: f64) -> usize {
        self.ratios.iter().position(|&r| u < r).unwrap_or(self.ratios.len() - 1)
    }

    /// Name suffix of a tier: `30` for the base, `enhanced30-50` for a delta.
    pub fn suffix(&self, tier: usize) -> String {
        if tier == 0 {
            percent(self.ratios[0]).to_string()
        } else {
            format!(
                "enhanced{}-{}",
                percent(self.ratios[tier - 1]),
                percent(self.ratios[tier])
            )
        }
    }

    pub fn suffixes(&self) -> Vec<String> {
        (0..self.tiers()).map(|t| self.suffix(t)).collect()
    }

    pub fn tier_for_suffix(&self, suffix: &str) -> Result<usize> {
        (0..self.tiers())
            .find(|&t| self.suffix(t) == suffix)
            .ok_or_else(|| Error::domain(format!("unknown segment suffix `{suffix}`")))
    }

    pub fn level(&self, tier: usize) -> CumulativeLevel {
        CumulativeLevel {
            tier,
            label: format!("L{}", percent(self.ratios[tier])),
            included_segments: (0..=tier).map(|t| self.suffix(t)).collect(),
        }
    }

    pub fn levels(&self) -> Vec<CumulativeLevel> {
        (0..self.tiers()).map(|t| self.level(t)).collect()
    }
}

/// A reconstruction level: the base segment plus every delta up to `tier`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CumulativeLevel {
    pub tier: usize,
    pub label: String,
    pub included_segments: Vec<String>,
}

impl fmt::Display for CumulativeLevel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

/// Disjoint, sorted index lists covering `0..n_total`.
#[derive(Debug, Clone, PartialEq)]
pub struct LayerPartition {
    pub base: Vec<usize>,
    pub enh: Vec<Vec<usize>>,
    pub n_total: usize,
    ladder: RetentionLadder,
}

impl LayerPartition {
    pub fn ladder(&self) -> &RetentionLadder {
        &self.ladder
    }

    pub fn tier(&self, t: usize) -> &[usize] {
        if t == 0 {
            &self.base
        } else {
            &self.enh[t - 1]
        }
    }

    /// Sorted union of tiers `0..=tier`.
    pub fn cumulative_indices(&self, tier: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..=tier).flat_map(|t| self.tier(t).iter().copied()).collect();
        out.sort_unstable();
        out
    }
}

/// Base-2 van der Corput value of `i`: its bits mirrored about the binary point.
pub fn radical_inverse_2(i: u64) -> f64 {
    // Exact for i < 2^53: the mirrored value has no more significant bits than i.
    i.reverse_bits() as f64 * (1.0 / 18_446_744_073_709_551_616.0)
}

pub fn partition_last_layer(n_total: usize, ladder: &RetentionLadder) -> Result<LayerPartition> {
    if n_total == 0 {
        return Err(Error::domain("cannot partition an empty last layer"));
    }
    let mut tiers = vec![Vec::new(); ladder.tiers()];
    for i in 0..n_total {
        tiers[ladder.tier_of(radical_inverse_2(i as u64))].push(i);
    }
    let mut it = tiers.into_iter();
    let base = it.next().unwrap();
    Ok(LayerPartition {
        base,
        enh: it.collect(),
        n_total,
        ladder: ladder.clone(),
    })
}

fn check_size(last_layer: &VoxelCloud, part: &LayerPartition) -> Result<()> {
    if last_layer.len() != part.n_total {
        return Err(Error::contract(format!(
            "partition built for {} points, last layer has {}",
            part.n_total,
            last_layer.len()
        )));
    }
    Ok(())
}

pub fn reassemble(last_layer: &VoxelCloud, part: &LayerPartition, level: &CumulativeLevel) -> Result<VoxelCloud> {
    check_size(last_layer, part)?;
    if level.tier >= part.ladder.tiers() {
        return Err(Error::domain(format!("level {} beyond the ladder", level.label)));
    }
    if level.tier + 1 == part.ladder.tiers() {
        return Ok(last_layer.clone());
    }
    Ok(last_layer.select(&part.cumulative_indices(level.tier)))
}

fn put_varint(out: &mut Vec<u8>, mut v: u64) {
    while v >= 0x80 {
        out.push((v as u8) | 0x80);
        v >>= 7;
    }
    out.push(v as u8);
}

fn get_varint(bytes: &[u8], pos: &mut usize) -> Option<u64> {
    let mut v = 0u64;
    for shift in (0..64).step_by(7) {
        let b = *bytes.get(*pos)?;
        *pos += 1;
        v |= ((b & 0x7f) as u64) << shift;
        if b & 0x80 == 0 {
            return Some(v);
        }
    }
    None
}

/// Appends one frame block holding `indices` of `cloud`.
pub fn encode_block(out: &mut Vec<u8>, cloud: &VoxelCloud, indices: &[usize], frame_index: u16, color_bytes: usize) {
    out.extend_from_slice(&frame_index.to_le_bytes());
    out.extend_from_slice(&(indices.len() as u32).to_le_bytes());
    let colors = cloud.colors();
    for &i in indices {
        put_varint(out, morton::encode(cloud.voxels()[i]));
        push_color_record(out, colors.map(|c| c[i]), color_bytes);
    }
}

/// One frame's block of a serialized segment.
pub fn segment_payload(
    last_layer: &VoxelCloud,
    part: &LayerPartition,
    which: &str,
    frame_index: u16,
    color_bytes: usize,
) -> Result<Vec<u8>> {
    let tier = part.ladder.tier_for_suffix(which)?;
    check_size(last_layer, part)?;
    let mut out = Vec::new();
    encode_block(&mut out, last_layer, part.tier(tier), frame_index, color_bytes);
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SegmentBlock {
    pub frame_index: u16,
    pub codes: Vec<u64>,
    /// First three bytes of each color record, zero-padded when shorter.
    pub colors: Vec<Rgb>,
}

/// Parses concatenated frame blocks.
pub fn decode_segment_payload(bytes: &[u8], color_bytes: usize) -> Result<Vec<SegmentBlock>> {
    let bad = |m: String| Error::Parse { line: 0, message: m };
    let mut pos = 0;
    let mut blocks = Vec::new();
    while pos < bytes.len() {
        let hdr = bytes
            .get(pos..pos + SEGMENT_HEADER_LEN)
            .ok_or_else(|| bad(format!("truncated block header at byte {pos}")))?;
        let frame_index = u16::from_le_bytes([hdr[0], hdr[1]]);
        let count = u32::from_le_bytes(hdr[2..6].try_into().unwrap()) as usize;
        pos += SEGMENT_HEADER_LEN;
        let mut codes = Vec::with_capacity(count);
        let mut colors = Vec::with_capacity(count);
        for _ in 0..count {
            codes.push(
                get_varint(bytes, &mut pos).ok_or_else(|| bad(format!("truncated varint in frame {frame_index}")))?,
            );
            let rec = bytes
                .get(pos..pos + color_bytes)
                .ok_or_else(|| bad(format!("truncated color record in frame {frame_index}")))?;
            let mut rgb = [0u8; 3];
            for (d, s) in rgb.iter_mut().zip(rec) {
                *d = *s;
            }
            colors.push(rgb);
            pos += color_bytes;
        }
        blocks.push(SegmentBlock {
            frame_index,
            codes,
            colors,
        });
    }
    Ok(blocks)
}
