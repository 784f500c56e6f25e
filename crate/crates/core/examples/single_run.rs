//! Runs one scenario on the default dataset and prints its metrics row.
//!
//! `cargo run --release --example single_run -- [inds|dash_pc|pcc_dash] [bandwidth_mbps] [loss_pct] [seed]`

use std::time::Instant;

use inds::experiments::{run_scenario, PreparedDataset, Protocol, ScenarioConfig};

fn main() -> inds::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: &str| args.get(i).cloned().unwrap_or_else(|| default.to_string());
    let cfg = ScenarioConfig {
        protocol: arg(0, "inds").parse::<Protocol>()?,
        bandwidth_mbps: arg(1, "50").parse().expect("bandwidth_mbps"),
        loss_pct: arg(2, "0").parse().expect("loss_pct"),
        seed: arg(3, "1").parse().expect("seed"),
        ..Default::default()
    };
    let t = Instant::now();
    let data = PreparedDataset::from_spec(&cfg.dataset)?;
    println!("dataset ready in {:.2?}", t.elapsed());

    let t = Instant::now();
    let out = run_scenario(&cfg, &data)?;
    let m = &out.metrics;
    println!("simulated {} events in {:.2?}", m.events, t.elapsed());
    println!(
        "cache hit rate     {:.4} ({} / {})",
        m.cache_hit_rate, m.cache_hits, m.cache_lookups
    );
    println!(
        "mean GoF delay     {:.2} ms (p95 {:.2} ms)",
        m.mean_gof_delay_ms, m.p95_gof_delay_ms
    );
    println!("throughput         {:.3} Mbps", m.effective_throughput_mbps);
    println!("incomplete GoFs    {:.3}", m.incomplete_gof_fraction);
    println!("retransmissions    {}", m.retransmissions);
    println!("delivered packets  {}", m.delivered_packets);
    println!("by segment         {}", m.packets_by_segment);
    println!("modal segment set  {}", m.modal_segments);
    for row in out
        .details
        .node_rows()
        .iter()
        .filter(|r| r.cache_hits + r.cache_misses > 0)
    {
        println!(
            "  {:<10} hits {:>7} misses {:>7} rate {:.3}",
            row.name, row.cache_hits, row.cache_misses, row.cache_hit_rate
        );
    }
    Ok(())
}
