//! Voxelizes a synthetic cloud, builds its octree and checks the top/last byte split.
//!
//! `cargo run --release --example octree_roundtrip -- [n_points] [depth]`

use inds::codec::{
    build_octree, decode_octree, decode_top_layer, encode_frame, gen_synthetic, last_layer_bytes, top_layer_bytes,
    voxelize, SyntheticShape,
};

fn main() -> inds::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n_points = args.first().map_or(Ok(40_000), |s| s.parse()).expect("n_points");
    let depth: u8 = args.get(1).map_or(Ok(7), |s| s.parse()).expect("depth");

    let cloud = gen_synthetic(SyntheticShape::SphereShell, n_points, 1)?;
    let voxels = voxelize(&cloud, depth)?;
    let frame = build_octree(&voxels)?;
    println!("{n_points} points -> {} voxels at depth {depth}", voxels.len());

    let decoded = decode_octree(&frame, depth)?;
    println!("lossless roundtrip: {}", decoded.voxels() == voxels.voxels());

    let top = top_layer_bytes(&frame);
    let last = last_layer_bytes(&frame, 3);
    let full = encode_frame(&frame, 3);
    println!(
        "TopLayer {} bytes + LastLayer {} bytes = full {} bytes",
        top.len(),
        last.len(),
        full.len()
    );
    println!("byte split exact: {}", [top.clone(), last].concat() == full);

    let coarse = decode_top_layer(&top)?;
    println!(
        "TopLayer alone decodes {} voxels at depth {}",
        coarse.len(),
        coarse.depth()
    );
    Ok(())
}
