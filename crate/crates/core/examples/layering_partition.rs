//! Splits a last layer into the base segment and enhancement deltas, then reassembles each level.
//!
//! `cargo run --release --example layering_partition -- [n_points]`

use inds::codec::{gen_synthetic, voxelize, SyntheticShape};
use inds::layering::{
    decode_segment_payload, partition_last_layer, radical_inverse_2, reassemble, segment_payload, RetentionLadder,
};

fn main() -> inds::Result<()> {
    let n_points = std::env::args()
        .nth(1)
        .map_or(Ok(20_000), |s| s.parse())
        .expect("n_points");
    let ladder = RetentionLadder::default();

    let small = partition_last_layer(8, &ladder)?;
    for i in 0..8u64 {
        let u = radical_inverse_2(i);
        println!("index {i}: u = {u:.3} -> {}", ladder.suffix(ladder.tier_of(u)));
    }
    println!("8-point L75 indices {:?}", small.cumulative_indices(2));

    let vc = voxelize(&gen_synthetic(SyntheticShape::SphereShell, n_points, 2)?, 7)?;
    let part = partition_last_layer(vc.len(), &ladder)?;
    for level in ladder.levels() {
        let cloud = reassemble(&vc, &part, &level)?;
        println!(
            "{level}: {:>6} of {} voxels ({:.4}), segments {}",
            cloud.len(),
            vc.len(),
            cloud.len() as f64 / vc.len() as f64,
            level.included_segments.join(" + ")
        );
    }
    for t in 0..ladder.tiers() {
        let suffix = ladder.suffix(t);
        let bytes = segment_payload(&vc, &part, &suffix, 0, 3)?;
        let blocks = decode_segment_payload(&bytes, 3)?;
        println!(
            "segment {suffix:<15} {:>7} bytes, {} points",
            bytes.len(),
            blocks[0].codes.len()
        );
    }
    Ok(())
}
