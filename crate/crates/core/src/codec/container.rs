//! Encoded-frame container.
//!
//! ```text
//! "INDS" | version u8 | depth u8 | count[0..depth] u32 LE | occupancy bytes | color block
//! ```
//!
//! The top layer is the header plus occupancy of levels `0..depth-1`; the last
//! layer is the leaf-level occupancy plus the color block. The two are an exact
//! byte partition of the full encoding.

use crate::codec::cloud::{Rgb, VoxelCloud};
use crate::codec::octree::{decode_octree, expand_levels, OctreeFrame};
use crate::error::{Error, Result};

pub const FRAME_MAGIC: &[u8; 4] = b"INDS";
pub const FRAME_VERSION: u8 = 1;
pub const DEFAULT_COLOR_BYTES: usize = 3;

fn header(frame: &OctreeFrame) -> Vec<u8> {
    let mut out = Vec::with_capacity(6 + 4 * frame.depth as usize);
    out.extend_from_slice(FRAME_MAGIC);
    out.push(FRAME_VERSION);
    out.push(frame.depth);
    for level in &frame.level_bytes {
        out.extend_from_slice(&(level.len() as u32).to_le_bytes());
    }
    out
}

/// Modeled attribute payload: `color_bytes` per leaf, cycling through RGB.
pub(crate) fn push_color_record(out: &mut Vec<u8>, color: Option<Rgb>, color_bytes: usize) {
    let rgb = color.unwrap_or_default();
    out.extend((0..color_bytes).map(|j| rgb[j % 3]));
}

fn color_block(frame: &OctreeFrame, color_bytes: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(frame.leaf_count * color_bytes);
    for i in 0..frame.leaf_count {
        let c = frame.leaf_colors.as_ref().map(|c| c[i]);
        push_color_record(&mut out, c, color_bytes);
    }
    out
}

pub fn encode_frame(frame: &OctreeFrame, color_bytes: usize) -> Vec<u8> {
    let mut out = header(frame);
    for level in &frame.level_bytes {
        out.extend_from_slice(level);
    }
    out.extend(color_block(frame, color_bytes));
    out
}

pub fn top_layer_bytes(frame: &OctreeFrame) -> Vec<u8> {
    let mut out = header(frame);
    let top = frame.depth.saturating_sub(1) as usize;
    for level in &frame.level_bytes[..top] {
        out.extend_from_slice(level);
    }
    out
}

pub fn last_layer_bytes(frame: &OctreeFrame, color_bytes: usize) -> Vec<u8> {
    let mut out = frame.level_bytes.last().cloned().unwrap_or_default();
    out.extend(color_block(frame, color_bytes));
    out
}

/// Splits a frame into its top-layer blob and the full-resolution leaf cloud.
pub fn split_layers(frame: &OctreeFrame) -> Result<(Vec<u8>, VoxelCloud)> {
    if frame.depth < 2 {
        return Err(Error::domain("split_layers needs depth >= 2"));
    }
    let last = decode_octree(frame, frame.depth)?;
    Ok((top_layer_bytes(frame), last))
}

/// Parses a top-layer blob (as produced by [`top_layer_bytes`]) into the
/// coarse cloud at depth `depth - 1`.
pub fn decode_top_layer(bytes: &[u8]) -> Result<VoxelCloud> {
    let (cloud, used) = decode_top_layer_prefix(bytes)?;
    if used != bytes.len() {
        return Err(Error::Parse {
            line: 0,
            message: format!("{} trailing bytes after top layer", bytes.len() - used),
        });
    }
    Ok(cloud)
}

/// Like [`decode_top_layer`] but tolerates trailing data; returns bytes consumed.
pub fn decode_top_layer_prefix(bytes: &[u8]) -> Result<(VoxelCloud, usize)> {
    let bad = |m: &str| Error::Parse {
        line: 0,
        message: m.to_string(),
    };
    if bytes.len() < 6 || &bytes[..4] != FRAME_MAGIC {
        return Err(bad("missing INDS magic"));
    }
    if bytes[4] != FRAME_VERSION {
        return Err(bad("unsupported container version"));
    }
    let depth = bytes[5];
    if depth < 2 {
        return Err(bad("top layer needs depth >= 2"));
    }
    let mut pos = 6;
    let mut counts = Vec::with_capacity(depth as usize);
    for _ in 0..depth {
        let raw = bytes.get(pos..pos + 4).ok_or_else(|| bad("truncated level counts"))?;
        counts.push(u32::from_le_bytes(raw.try_into().unwrap()) as usize);
        pos += 4;
    }
    let mut levels = Vec::with_capacity(depth as usize - 1);
    for &n in &counts[..depth as usize - 1] {
        let raw = bytes.get(pos..pos + n).ok_or_else(|| bad("truncated occupancy"))?;
        levels.push(raw.to_vec());
        pos += n;
    }
    let codes = expand_levels(&levels, levels.len())?;
    Ok((VoxelCloud::from_sorted_codes(depth - 1, &codes, None), pos))
}
