//! Runs a reduced protocol × bandwidth × loss grid and prints the aggregate table.
//!
//! `cargo run --release --example sweep_report -- [seeds] [out.csv]`

use inds::experiments::{aggregate, run_sweep, write_aggregate_csv, PreparedDataset, ScenarioConfig, SweepSpec};

fn main() -> inds::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let seeds = args.first().map_or(Ok(2), |s| s.parse()).expect("seeds");
    let base = ScenarioConfig::default();
    let spec = SweepSpec {
        loss_pct: vec![0.0, 0.5, 1.0],
        seeds,
        ..Default::default()
    };
    let data = PreparedDataset::from_spec(&base.dataset)?;
    let t = std::time::Instant::now();
    let rows = run_sweep(&spec, &base, &data)?;
    println!("{} runs in {:.1?}", rows.len(), t.elapsed());
    let agg = aggregate(&rows)?;
    println!(
        "{:<9} {:>5} {:>5} {:>15} {:>17} {:>15}",
        "protocol", "Mbps", "loss", "hit rate", "delay ms", "Mbps out"
    );
    for a in &agg {
        println!(
            "{:<9} {:>5} {:>5} {:>7.3} ± {:<5.3} {:>8.1} ± {:<6.1} {:>7.2} ± {:<5.2}",
            a.protocol,
            a.bandwidth_mbps,
            a.loss_pct,
            a.cache_hit_rate_mean,
            a.cache_hit_rate_std,
            a.mean_gof_delay_ms_mean,
            a.mean_gof_delay_ms_std,
            a.effective_throughput_mbps_mean,
            a.effective_throughput_mbps_std
        );
    }
    if let Some(path) = args.get(1) {
        write_aggregate_csv(std::fs::File::create(path)?, &agg)?;
        println!("aggregate written to {path}");
    }
    Ok(())
}
