use crate::codec::cloud::{Bounds, RawPointCloud, Rgb, VoxelCloud};
use crate::codec::morton;
use crate::error::{Error, Result};

pub const MAX_DEPTH: u8 = 16;

/// Quantizes a cloud into a `2^depth` cube fitted to its own bounding box.
pub fn voxelize(cloud: &RawPointCloud, depth: u8) -> Result<VoxelCloud> {
    let bounds = cloud
        .bounds()
        .ok_or_else(|| Error::domain("cannot voxelize an empty cloud"))?;
    voxelize_with_bounds(cloud, depth, &bounds)
}

/// Quantizes against fixed bounds so that every frame of a sequence shares one grid.
/// Points outside the bounds clamp to the border cells.
pub fn voxelize_with_bounds(cloud: &RawPointCloud, depth: u8, bounds: &Bounds) -> Result<VoxelCloud> {
    if depth == 0 || depth > MAX_DEPTH {
        return Err(Error::domain(format!("depth {depth} outside 1..=16")));
    }
    if cloud.is_empty() {
        return Err(Error::domain("cannot voxelize an empty cloud"));
    }
    let side = 1u64 << depth;
    let extent = bounds.max_extent();
    let scale = if extent > 0.0 { side as f64 / extent } else { 0.0 };
    let max_cell = (side - 1) as f64;

    let mut keyed: Vec<(u64, usize)> = Vec::with_capacity(cloud.len());
    for (i, p) in cloud.points.iter().enumerate() {
        if !(p.x.is_finite() && p.y.is_finite() && p.z.is_finite()) {
            return Err(Error::domain(format!("point {i} has non-finite coordinates")));
        }
        let mut cell = [0u32; 3];
        for (axis, v) in [p.x, p.y, p.z].into_iter().enumerate() {
            let q = ((v - bounds.min[axis]) * scale).floor().clamp(0.0, max_cell);
            cell[axis] = q as u32;
        }
        keyed.push((morton::encode(cell), i));
    }
    // (code, input index) ordering makes the first input point win duplicates.
    keyed.sort_unstable();
    keyed.dedup_by_key(|e| e.0);

    let codes: Vec<u64> = keyed.iter().map(|e| e.0).collect();
    let colors: Option<Vec<Rgb>> = if cloud.has_colors() {
        Some(
            keyed
                .iter()
                .map(|&(_, i)| cloud.points[i].color.unwrap_or_default())
                .collect(),
        )
    } else {
        None
    };
    Ok(VoxelCloud::from_sorted_codes(depth, &codes, colors))
}
