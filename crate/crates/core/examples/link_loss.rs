//! Measures queueing delay and empirical loss on a single seeded link.
//!
//! `cargo run --release --example link_loss -- [loss_pct] [packets]`

use inds::netsim::time::NS_PER_MS;
use inds::netsim::{Link, LinkSpec, LossModel, TxOutcome};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let loss_pct: f64 = args.first().map_or(Ok(1.0), |s| s.parse()).expect("loss_pct");
    let packets: u64 = args.get(1).map_or(Ok(200_000), |s| s.parse()).expect("packets");

    let spec = LinkSpec::new(10_000_000, 2.0).with_loss(LossModel::bernoulli(loss_pct / 100.0));
    let mut link = Link::new(0, 0, 1, spec, 1);
    // A 10-packet burst every 20 ms into a 10 Mbps link.
    let mut last_delay = Vec::new();
    for k in 0..packets {
        let now = (k / 10) * 20 * NS_PER_MS;
        if let TxOutcome::Delivered { at } = link.transmit(now, 0, 1240) {
            if k < 10 {
                last_delay.push((at - now) as f64 / NS_PER_MS as f64);
            }
        }
    }
    let c = link.counters(0);
    println!("first burst one-way delays (ms): {last_delay:.3?}");
    println!(
        "sent {} delivered {} lost {} queue-dropped {}",
        c.sent_packets, c.delivered_packets, c.lost_packets, c.queue_dropped_packets
    );
    println!(
        "empirical loss {:.4}% against configured {loss_pct}%",
        100.0 * c.lost_packets as f64 / c.sent_packets as f64
    );
    println!("packet conservation holds: {}", c.conserved());
}
