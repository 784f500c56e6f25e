//! Runs both DASH variants and INDS on one scenario and compares their metrics.
//!
//! `cargo run --release --example dash_baseline -- [bandwidth_mbps] [loss_pct]`

use inds::experiments::{run_scenario, PreparedDataset, Protocol, RunDetails, ScenarioConfig};

fn main() -> inds::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let bandwidth_mbps = args.first().map_or(Ok(10.0), |s| s.parse()).expect("bandwidth_mbps");
    let loss_pct = args.get(1).map_or(Ok(1.0), |s| s.parse()).expect("loss_pct");
    let base = ScenarioConfig {
        bandwidth_mbps,
        loss_pct,
        ..Default::default()
    };
    let data = PreparedDataset::from_spec(&base.dataset)?;
    println!(
        "{:<9} {:>8} {:>12} {:>12} {:>7}  levels",
        "protocol", "hit rate", "delay ms", "Mbps", "retx"
    );
    for protocol in Protocol::ALL {
        let cfg = ScenarioConfig {
            protocol,
            ..base.clone()
        };
        let out = run_scenario(&cfg, &data)?;
        let m = &out.metrics;
        println!(
            "{:<9} {:>8.3} {:>12.1} {:>12.3} {:>7}  {}",
            m.protocol,
            m.cache_hit_rate,
            m.mean_gof_delay_ms,
            m.effective_throughput_mbps,
            m.retransmissions,
            m.modal_segments
        );
        if let RunDetails::Dash(r) = &out.details {
            for c in &r.caches {
                println!(
                    "          {} hits {} misses {} evictions {}",
                    c.name, c.counters.hits, c.counters.misses, c.counters.evictions
                );
            }
        }
    }
    Ok(())
}
