use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::codec::{
    build_octree, decode_top_layer, geometry_psnr, reconstruct_progressive, split_layers, voxelize, RawPointCloud,
};
use crate::content::FrameSource;
use crate::error::Result;
use crate::experiments::metrics::{read_csv_with_schema, write_csv_with_schema};
use crate::layering::{partition_last_layer, reassemble, RetentionLadder};

pub const PSNR_SCHEMA_VERSION: &str = "inds-psnr/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsnrRow {
    pub cloud: usize,
    pub level: String,
    pub retained_leaves: usize,
    pub total_leaves: usize,
    pub reconstructed_points: usize,
    /// `inf` when the reconstruction is exact.
    pub psnr_db: f64,
    pub mse: f64,
    pub peak: f64,
}

/// Geometry PSNR of every cumulative level of one cloud. The reference is the
/// full voxelized cloud; each level is decoded as a receiver would: the top
/// layer plus the leaves that level delivers.
pub fn psnr_levels(
    cloud_index: usize,
    cloud: &RawPointCloud,
    depth: u8,
    ladder: &RetentionLadder,
) -> Result<Vec<PsnrRow>> {
    let vc = voxelize(cloud, depth)?;
    let frame = build_octree(&vc)?;
    let (top, leaves) = split_layers(&frame)?;
    let coarse = decode_top_layer(&top)?;
    let part = partition_last_layer(leaves.len(), ladder)?;
    ladder
        .levels()
        .iter()
        .map(|level| {
            let subset = reassemble(&leaves, &part, level)?;
            let degraded = reconstruct_progressive(&coarse, &subset)?;
            let q = geometry_psnr(&leaves, &degraded)?;
            Ok(PsnrRow {
                cloud: cloud_index,
                level: level.label.clone(),
                retained_leaves: subset.len(),
                total_leaves: leaves.len(),
                reconstructed_points: degraded.len(),
                psnr_db: q.psnr_db,
                mse: q.mse,
                peak: q.peak,
            })
        })
        .collect()
}

/// Rows for the first `clouds` frames of `source`, cloud-major.
pub fn psnr_table(source: &FrameSource, clouds: usize, depth: u8, ladder: &RetentionLadder) -> Result<Vec<PsnrRow>> {
    let mut rows = Vec::new();
    for (i, cloud) in source.frames(clouds)?.enumerate() {
        rows.extend(psnr_levels(i, &cloud?, depth, ladder)?);
    }
    Ok(rows)
}

pub fn write_psnr_csv(out: impl Write, rows: &[PsnrRow]) -> Result<()> {
    write_csv_with_schema(out, PSNR_SCHEMA_VERSION, rows)
}

pub fn read_psnr_csv(input: impl std::io::BufRead) -> Result<Vec<PsnrRow>> {
    read_csv_with_schema(input, PSNR_SCHEMA_VERSION)
}
