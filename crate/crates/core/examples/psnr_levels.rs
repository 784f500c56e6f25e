//! Geometry PSNR of each cumulative level against the full-resolution cloud.
//!
//! `cargo run --release --example psnr_levels -- [clouds] [n_points]`

use inds::codec::SyntheticShape;
use inds::content::FrameSource;
use inds::experiments::psnr_table;
use inds::layering::RetentionLadder;

fn main() -> inds::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let clouds = args.first().map_or(Ok(10), |s| s.parse()).expect("clouds");
    let n_points = args.get(1).map_or(Ok(40_000), |s| s.parse()).expect("n_points");
    let source = FrameSource::Synthetic {
        shape: SyntheticShape::SphereShell,
        n_points,
        seed: 1,
    };
    let rows = psnr_table(&source, clouds, 7, &RetentionLadder::default())?;
    for r in &rows {
        println!(
            "cloud {:>2} {:<4} {:>6} / {:>6} leaves retained, {:>6} points, PSNR {:>7.2} dB",
            r.cloud, r.level, r.retained_leaves, r.total_leaves, r.reconstructed_points, r.psnr_db
        );
    }
    Ok(())
}
