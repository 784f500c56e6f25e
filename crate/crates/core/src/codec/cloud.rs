use crate::codec::morton;
use crate::error::{Error, Result};

pub type Rgb = [u8; 3];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RawPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub color: Option<Rgb>,
}

impl RawPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z, color: None }
    }

    pub fn with_color(mut self, color: Rgb) -> Self {
        self.color = Some(color);
        self
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawPointCloud {
    pub points: Vec<RawPoint>,
}

impl RawPointCloud {
    pub fn new(points: Vec<RawPoint>) -> Self {
        Self { points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn has_colors(&self) -> bool {
        !self.points.is_empty() && self.points.iter().all(|p| p.color.is_some())
    }

    /// Axis-aligned bounds. `None` for an empty cloud.
    pub fn bounds(&self) -> Option<Bounds> {
        let first = self.points.first()?;
        let mut b = Bounds {
            min: [first.x, first.y, first.z],
            max: [first.x, first.y, first.z],
        };
        for p in &self.points[1..] {
            for (axis, v) in [p.x, p.y, p.z].into_iter().enumerate() {
                b.min[axis] = b.min[axis].min(v);
                b.max[axis] = b.max[axis].max(v);
            }
        }
        Some(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounds {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Bounds {
    /// Largest edge of the box; the voxel grid is a cube of this size.
    pub fn max_extent(&self) -> f64 {
        (0..3).map(|a| self.max[a] - self.min[a]).fold(0.0, f64::max)
    }
}

/// Integer voxels at a fixed octree depth, optionally with a parallel color list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VoxelCloud {
    depth: u8,
    voxels: Vec<[u32; 3]>,
    colors: Option<Vec<Rgb>>,
    morton_order: bool,
}

impl VoxelCloud {
    /// Checks range and color-length invariants. Morton order is detected, not required.
    pub fn new(depth: u8, voxels: Vec<[u32; 3]>, colors: Option<Vec<Rgb>>) -> Result<Self> {
        if depth == 0 || depth > super::MAX_DEPTH {
            return Err(Error::domain(format!("depth {depth} outside 1..=16")));
        }
        let side = 1u32 << depth;
        if let Some(v) = voxels.iter().find(|v| v.iter().any(|&c| c >= side)) {
            return Err(Error::domain(format!(
                "voxel {v:?} outside [0, {side}) at depth {depth}"
            )));
        }
        if let Some(c) = &colors {
            if c.len() != voxels.len() {
                return Err(Error::domain(format!("{} colors for {} voxels", c.len(), voxels.len())));
            }
        }
        let morton_order = voxels.windows(2).all(|w| morton::encode(w[0]) < morton::encode(w[1]));
        Ok(Self {
            depth,
            voxels,
            colors,
            morton_order,
        })
    }

    /// Builds from Morton codes that the caller guarantees are strictly increasing.
    pub(crate) fn from_sorted_codes(depth: u8, codes: &[u64], colors: Option<Vec<Rgb>>) -> Self {
        debug_assert!(codes.windows(2).all(|w| w[0] < w[1]));
        Self {
            depth,
            voxels: codes.iter().map(|&c| morton::decode(c)).collect(),
            colors,
            morton_order: true,
        }
    }

    pub fn depth(&self) -> u8 {
        self.depth
    }

    pub fn voxels(&self) -> &[[u32; 3]] {
        &self.voxels
    }

    pub fn colors(&self) -> Option<&[Rgb]> {
        self.colors.as_deref()
    }

    pub fn is_morton_ordered(&self) -> bool {
        self.morton_order
    }

    pub fn len(&self) -> usize {
        self.voxels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.voxels.is_empty()
    }

    pub fn morton_codes(&self) -> Vec<u64> {
        self.voxels.iter().map(|&v| morton::encode(v)).collect()
    }

    /// Returns a Morton-sorted, deduplicated copy. The first entry of each
    /// duplicate run in the current order keeps its color.
    pub fn into_morton_order(self) -> Self {
        if self.morton_order {
            return self;
        }
        let mut idx: Vec<(u64, usize)> = self
            .voxels
            .iter()
            .enumerate()
            .map(|(i, &v)| (morton::encode(v), i))
            .collect();
        idx.sort();
        idx.dedup_by_key(|e| e.0);
        let codes: Vec<u64> = idx.iter().map(|e| e.0).collect();
        let colors = self.colors.map(|c| idx.iter().map(|&(_, i)| c[i]).collect());
        Self::from_sorted_codes(self.depth, &codes, colors)
    }

    /// Subset by index list, preserving the order of `indices`.
    pub fn select(&self, indices: &[usize]) -> Self {
        let voxels: Vec<[u32; 3]> = indices.iter().map(|&i| self.voxels[i]).collect();
        let colors = self.colors.as_ref().map(|c| indices.iter().map(|&i| c[i]).collect());
        let morton_order = self.morton_order && indices.windows(2).all(|w| w[0] < w[1]);
        Self {
            depth: self.depth,
            voxels,
            colors,
            morton_order,
        }
    }

    /// Axis-aligned diagonal length of the voxel coordinates.
    pub fn bbox_diagonal(&self) -> f64 {
        let Some(first) = self.voxels.first() else {
            return 0.0;
        };
        let mut lo = *first;
        let mut hi = *first;
        for v in &self.voxels {
            for a in 0..3 {
                lo[a] = lo[a].min(v[a]);
                hi[a] = hi[a].max(v[a]);
            }
        }
        (0..3)
            .map(|a| {
                let d = (hi[a] - lo[a]) as f64;
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}
