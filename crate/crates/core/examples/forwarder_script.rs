//! Drives one forwarder through a miss, an aggregation, a cache hit and a duplicate nonce.

use bytes::Bytes;
use inds::icn::{Fib, Forwarder, DEFAULT_CS_CAPACITY};
use inds::naming::Name;
use inds::wire::{DataPacket, Interest};

const UPSTREAM: usize = 0;

fn main() -> inds::Result<()> {
    let mut fib = Fib::new();
    fib.add_route(Name::parse("/PointCloudService")?, UPSTREAM);
    let mut fwd = Forwarder::new(DEFAULT_CS_CAPACITY, fib);
    let name = Name::parse("/PointCloudService/DS/TimeWindow_20240314T120000/GoF_0001/LastLayer/30")?.with_chunk(0);

    println!(
        "face 1 asks:       {:?}",
        fwd.on_interest(1, Interest::new(name.clone(), 1), 0)
    );
    println!(
        "face 2 asks:       {:?}",
        fwd.on_interest(2, Interest::new(name.clone(), 2), 1)
    );
    println!(
        "face 2 repeats:    {:?}",
        fwd.on_interest(2, Interest::new(name.clone(), 2), 2)
    );
    let data = DataPacket {
        name: name.clone(),
        payload: Bytes::from_static(b"chunk"),
        total_chunks: 1,
    };
    for a in fwd.on_data(UPSTREAM, data, 3) {
        println!("data arrives:      {a:?}");
    }
    println!("face 3 asks:       {:?}", fwd.on_interest(3, Interest::new(name, 3), 4));
    println!("{:?}", fwd.counters());
    Ok(())
}
