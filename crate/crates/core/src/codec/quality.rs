use std::collections::HashMap;

use crate::codec::cloud::VoxelCloud;
use crate::codec::morton;
use crate::error::{Error, Result};

/// Point-to-point geometry fidelity of a degraded cloud against its reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryQuality {
    /// `+inf` when `mse == 0`.
    pub psnr_db: f64,
    pub peak: f64,
    pub mse: f64,
}

const BUCKET: i64 = 8;

struct NearestIndex {
    buckets: HashMap<[i64; 3], Vec<[i64; 3]>>,
    max_ring: i64,
}

impl NearestIndex {
    fn new(points: &[[u32; 3]]) -> Self {
        let mut buckets: HashMap<[i64; 3], Vec<[i64; 3]>> = HashMap::new();
        let mut lo = [i64::MAX; 3];
        let mut hi = [i64::MIN; 3];
        for v in points {
            let p = [v[0] as i64, v[1] as i64, v[2] as i64];
            let b = [p[0] / BUCKET, p[1] / BUCKET, p[2] / BUCKET];
            for a in 0..3 {
                lo[a] = lo[a].min(b[a]);
                hi[a] = hi[a].max(b[a]);
            }
            buckets.entry(b).or_default().push(p);
        }
        let max_ring = (0..3).map(|a| hi[a] - lo[a]).max().unwrap_or(0) + 1;
        Self { buckets, max_ring }
    }

    fn nearest_sq(&self, v: [u32; 3]) -> f64 {
        let p = [v[0] as i64, v[1] as i64, v[2] as i64];
        let home = [p[0] / BUCKET, p[1] / BUCKET, p[2] / BUCKET];
        let mut best = i64::MAX;
        // Query points may sit outside the reference's bucket range; allow for that.
        let limit = self.max_ring + (0..3).map(|a| home[a].abs()).max().unwrap_or(0) + 1;
        for r in 0..=limit {
            for dx in -r..=r {
                for dy in -r..=r {
                    for dz in -r..=r {
                        if dx.abs().max(dy.abs()).max(dz.abs()) != r {
                            continue;
                        }
                        let key = [home[0] + dx, home[1] + dy, home[2] + dz];
                        if let Some(pts) = self.buckets.get(&key) {
                            for q in pts {
                                let d: i64 = (0..3).map(|a| (q[a] - p[a]).pow(2)).sum();
                                best = best.min(d);
                            }
                        }
                    }
                }
            }
            // Anything in ring r+1 is at least r*BUCKET away.
            let reach = r * BUCKET;
            if best != i64::MAX && best <= reach * reach {
                break;
            }
        }
        best as f64
    }
}

/// Mean squared nearest-neighbour distance from each degraded point to the
/// reference, with the reference bounding-box diagonal as peak.
pub fn geometry_psnr(reference: &VoxelCloud, degraded: &VoxelCloud) -> Result<GeometryQuality> {
    if reference.is_empty() || degraded.is_empty() {
        return Err(Error::domain("geometry_psnr needs two non-empty clouds"));
    }
    if reference.depth() != degraded.depth() {
        return Err(Error::domain(format!(
            "depth mismatch: reference {} vs degraded {}",
            reference.depth(),
            degraded.depth()
        )));
    }
    let index = NearestIndex::new(reference.voxels());
    let total: f64 = degraded.voxels().iter().map(|&v| index.nearest_sq(v)).sum();
    let mse = total / degraded.len() as f64;
    let peak = reference.bbox_diagonal();
    let psnr_db = if mse == 0.0 {
        f64::INFINITY
    } else {
        10.0 * (peak * peak / mse).log10()
    };
    Ok(GeometryQuality { psnr_db, peak, mse })
}

/// Reconstruction a decoder can build from the top layer plus a subset of leaves:
/// every received leaf, and for each coarse cell without a received leaf, the
/// cell's lowest-corner voxel at full resolution.
pub fn reconstruct_progressive(coarse: &VoxelCloud, leaves: &VoxelCloud) -> Result<VoxelCloud> {
    if coarse.depth() + 1 != leaves.depth() {
        return Err(Error::domain(format!(
            "coarse depth {} does not sit directly above leaf depth {}",
            coarse.depth(),
            leaves.depth()
        )));
    }
    let mut codes = leaves.morton_codes();
    let covered: std::collections::HashSet<u64> = codes.iter().map(|c| c >> 3).collect();
    codes.extend(
        coarse
            .morton_codes()
            .into_iter()
            .filter(|c| !covered.contains(c))
            .map(|c| c << 3),
    );
    codes.sort_unstable();
    codes.dedup();
    let voxels = codes.iter().map(|&c| morton::decode(c)).collect();
    VoxelCloud::new(leaves.depth(), voxels, None)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vc(points: &[[u32; 3]]) -> VoxelCloud {
        VoxelCloud::new(5, points.to_vec(), None).unwrap()
    }

    #[test]
    fn identical_is_infinite() {
        let a = vc(&[[1, 2, 3], [4, 5, 6]]);
        let q = geometry_psnr(&a, &a).unwrap();
        assert_eq!(q.mse, 0.0);
        assert!(q.psnr_db.is_infinite() && q.psnr_db > 0.0);
    }

    #[test]
    fn hand_computed_nearest_neighbour() {
        let reference = vc(&[[0, 0, 0], [10, 0, 0]]);
        let degraded = vc(&[[3, 4, 0]]);
        let q = geometry_psnr(&reference, &degraded).unwrap();
        assert_eq!(q.mse, 25.0);
        assert_eq!(q.peak, 10.0);
        assert!((q.psnr_db - 10.0 * (100.0f64 / 25.0).log10()).abs() < 1e-12);
        assert!((q.psnr_db - 6.0206).abs() < 1e-3);
    }

    #[test]
    fn far_query_finds_neighbour() {
        let reference = vc(&[[0, 0, 0]]);
        let degraded = vc(&[[31, 31, 31]]);
        let q = geometry_psnr(&reference, &degraded).unwrap();
        assert_eq!(q.mse, 3.0 * 31.0 * 31.0);
    }

    #[test]
    fn empty_and_depth_mismatch_rejected() {
        let a = vc(&[[0, 0, 0]]);
        let empty = VoxelCloud::new(5, vec![], None).unwrap();
        assert!(geometry_psnr(&a, &empty).is_err());
        let other = VoxelCloud::new(6, vec![[0, 0, 0]], None).unwrap();
        assert!(geometry_psnr(&a, &other).is_err());
    }
}
