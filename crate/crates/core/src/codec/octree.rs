use crate::codec::cloud::{Rgb, VoxelCloud};
use crate::error::{Error, Result};

/// Breadth-first occupancy serialization of a voxel set.
///
/// `level_bytes[l]` holds one byte per occupied node at level `l`, in Morton
/// order; bit `k` is set iff child `k` is occupied. Leaf colors travel
/// alongside in Morton order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OctreeFrame {
    pub depth: u8,
    pub level_bytes: Vec<Vec<u8>>,
    pub leaf_count: usize,
    pub leaf_colors: Option<Vec<Rgb>>,
}

impl OctreeFrame {
    pub fn occupancy_len(&self) -> usize {
        self.level_bytes.iter().map(Vec::len).sum()
    }

    /// Checks the structural invariants: level sizes chain by popcount and no byte is empty.
    pub fn validate(&self) -> Result<()> {
        if self.level_bytes.len() != self.depth as usize {
            return Err(Error::contract(format!(
                "{} levels for depth {}",
                self.level_bytes.len(),
                self.depth
            )));
        }
        let mut expected = 1usize;
        for (l, bytes) in self.level_bytes.iter().enumerate() {
            if bytes.len() != expected {
                return Err(Error::contract(format!(
                    "level {l} has {} bytes, parent popcount says {expected}",
                    bytes.len()
                )));
            }
            if bytes.contains(&0) {
                return Err(Error::contract(format!("level {l} has an empty occupancy byte")));
            }
            expected = bytes.iter().map(|b| b.count_ones() as usize).sum();
        }
        if expected != self.leaf_count {
            return Err(Error::contract(format!(
                "last level popcount {expected} != leaf count {}",
                self.leaf_count
            )));
        }
        Ok(())
    }
}

pub fn build_octree(vc: &VoxelCloud) -> Result<OctreeFrame> {
    if vc.is_empty() {
        return Err(Error::domain("cannot build an octree from an empty cloud"));
    }
    if !vc.is_morton_ordered() {
        return Err(Error::contract("build_octree requires Morton-sorted voxels"));
    }
    let depth = vc.depth();
    let codes = vc.morton_codes();
    let mut level_bytes = Vec::with_capacity(depth as usize);
    for level in 0..depth {
        let parent_shift = 3 * (depth - level) as u32;
        let child_shift = parent_shift - 3;
        let mut bytes = Vec::new();
        let mut current: Option<u64> = None;
        let mut acc = 0u8;
        for &code in &codes {
            let parent = code >> parent_shift;
            let child = ((code >> child_shift) & 7) as u8;
            if current != Some(parent) {
                if current.is_some() {
                    bytes.push(acc);
                }
                current = Some(parent);
                acc = 0;
            }
            acc |= 1 << child;
        }
        bytes.push(acc);
        level_bytes.push(bytes);
    }
    Ok(OctreeFrame {
        depth,
        level_bytes,
        leaf_count: codes.len(),
        leaf_colors: vc.colors().map(<[Rgb]>::to_vec),
    })
}

/// Expands occupancy codes level by level down to `levels` levels below the root.
/// Returns strictly increasing Morton codes at that resolution.
pub(crate) fn expand_levels(level_bytes: &[Vec<u8>], levels: usize) -> Result<Vec<u64>> {
    let mut prefixes = vec![0u64];
    for (l, bytes) in level_bytes.iter().take(levels).enumerate() {
        if bytes.len() != prefixes.len() {
            return Err(Error::contract(format!(
                "level {l}: {} occupancy bytes for {} nodes",
                bytes.len(),
                prefixes.len()
            )));
        }
        let mut next = Vec::with_capacity(bytes.iter().map(|b| b.count_ones() as usize).sum());
        for (&p, &b) in prefixes.iter().zip(bytes) {
            for k in 0..8u64 {
                if b & (1 << k) != 0 {
                    next.push(p << 3 | k);
                }
            }
        }
        prefixes = next;
    }
    Ok(prefixes)
}

/// Decodes the occupied cells at `up_to_level`. At full depth this is the encoded
/// voxel set (with colors); shallower levels yield coarse cell coordinates.
pub fn decode_octree(frame: &OctreeFrame, up_to_level: u8) -> Result<VoxelCloud> {
    if up_to_level == 0 || up_to_level > frame.depth {
        return Err(Error::domain(format!(
            "level {up_to_level} outside 1..={}",
            frame.depth
        )));
    }
    let codes = expand_levels(&frame.level_bytes, up_to_level as usize)?;
    let colors = if up_to_level == frame.depth {
        frame.leaf_colors.clone()
    } else {
        None
    };
    Ok(VoxelCloud::from_sorted_codes(up_to_level, &codes, colors))
}
