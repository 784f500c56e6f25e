//! Point-cloud ingest, octree coding and geometry quality.
//!
//! The canonical representation downstream of this module is a [`VoxelCloud`]
//! whose voxels are sorted by Morton code. Octree frames serialize occupancy
//! breadth-first, one byte per internal node, and split into a small
//! structural top layer plus a leaf layer that carries the attributes.

mod cloud;
pub mod container;
pub mod morton;
mod octree;
pub mod ply;
mod quality;
mod synth;
mod voxel;

pub use cloud::{Bounds, RawPoint, RawPointCloud, Rgb, VoxelCloud};
pub use container::{
    decode_top_layer, encode_frame, last_layer_bytes, split_layers, top_layer_bytes, DEFAULT_COLOR_BYTES, FRAME_MAGIC,
    FRAME_VERSION,
};
pub use octree::{build_octree, decode_octree, OctreeFrame};
pub use ply::{load_ply, write_ply_ascii};
pub use quality::{geometry_psnr, reconstruct_progressive, GeometryQuality};
pub use synth::{gen_synthetic, SyntheticShape};
pub use voxel::{voxelize, voxelize_with_bounds, MAX_DEPTH};
