//! Formats, parses and chunks hierarchical content names.

use bytes::Bytes;
use inds::naming::{enumerate_gof_segments, format_name, parse_name, ContentId};
use inds::wire::{chunk_segment, reassemble_chunks};

fn main() -> inds::Result<()> {
    let window = "TimeWindow_20240314T120000";
    println!("{}", format_name(&ContentId::metadata("DS"))?);
    for name in enumerate_gof_segments("DS", window, 1)? {
        println!("{name}");
    }

    let id = ContentId::last_layer("DS", window, 1, "enhanced30-50").with_chunk(4);
    let name = format_name(&id)?;
    let back = parse_name(name.as_str())?;
    println!("{name} parses back: {}", back == id);

    let segment = format_name(&ContentId::last_layer("DS", window, 1, "30"))?;
    let payload = Bytes::from(vec![0xAB; 3000]);
    let chunks = chunk_segment(&segment, &payload, 1200)?;
    for c in &chunks {
        println!("{} {} bytes of {} chunks", c.name, c.payload.len(), c.total_chunks);
    }
    println!("reassembly exact: {}", reassemble_chunks(&chunks)? == payload);
    Ok(())
}
