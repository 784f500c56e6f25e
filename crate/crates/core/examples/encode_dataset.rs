//! Encodes a synthetic sequence and prints per-level GoF sizes.
//!
//! `cargo run --release --example encode_dataset -- [n_points] [color_bytes] [out_dir]`

use inds::codec::SyntheticShape;
use inds::content::{encode_dataset, EncodeParams, FrameSource};

fn main() -> inds::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n_points = args.first().map_or(Ok(50_000), |s| s.parse()).expect("n_points");
    let color_bytes = args.get(1).map_or(Ok(3), |s| s.parse()).expect("color_bytes");
    let source = FrameSource::Synthetic {
        shape: SyntheticShape::SphereShell,
        n_points,
        seed: 1,
    };
    let params = EncodeParams {
        color_bytes_per_point: color_bytes,
        ..Default::default()
    };
    let t = std::time::Instant::now();
    let ds = encode_dataset(&source, &params)?;
    println!("encoded {} GoFs in {:.2?}", ds.gofs.len(), t.elapsed());
    let md = ds.metadata();
    let g = &md.gofs[0];
    println!("GoF 1 TopLayer {} bytes", g.top_layer.bytes);
    for s in &g.segments {
        println!(
            "GoF 1 segment {:<15} {:>9} bytes {:>5} chunks",
            s.label, s.bytes, s.chunks
        );
    }
    for (level, bytes) in params.ladder.levels().iter().zip(ds.mean_level_bytes()) {
        println!("{level}: mean {:.3} MB per GoF", bytes / 1e6);
    }
    if let Some(dir) = args.get(2) {
        ds.save(std::path::Path::new(dir))?;
        println!("store written to {dir}");
    }
    Ok(())
}
