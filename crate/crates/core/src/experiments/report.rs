use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiments::metrics::{read_csv_with_schema, write_csv_with_schema, RunMetrics};

pub const AGGREGATE_SCHEMA_VERSION: &str = "inds-aggregate/1";

/// Mean and sample standard deviation over the successful seeds of one grid point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub scenario_id: String,
    pub protocol: String,
    pub bandwidth_mbps: f64,
    pub loss_pct: f64,
    pub runs: usize,
    pub ok_runs: usize,
    pub cache_hit_rate_mean: f64,
    pub cache_hit_rate_std: f64,
    pub mean_gof_delay_ms_mean: f64,
    pub mean_gof_delay_ms_std: f64,
    pub p95_gof_delay_ms_mean: f64,
    pub p95_gof_delay_ms_std: f64,
    pub effective_throughput_mbps_mean: f64,
    pub effective_throughput_mbps_std: f64,
    pub incomplete_gof_fraction_mean: f64,
    pub incomplete_gof_fraction_std: f64,
    pub retransmissions_mean: f64,
    pub retransmissions_std: f64,
    pub delivered_packets_mean: f64,
    pub delivered_packets_std: f64,
    /// Mean count per label, `label=value` joined with `;`.
    pub packets_by_segment_mean: String,
    /// Most frequent modal segment set across seeds.
    pub modal_segments: String,
}

/// NaN for no samples; std is 0 with one sample.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

type Key = (String, String, u64, u64);

fn key(r: &RunMetrics) -> Key {
    (
        r.scenario_id.clone(),
        r.protocol.clone(),
        r.bandwidth_mbps.to_bits(),
        r.loss_pct.to_bits(),
    )
}

/// Groups rows by (scenario, protocol, bandwidth, loss) in first-appearance order.
pub fn aggregate(rows: &[RunMetrics]) -> Result<Vec<AggregateRow>> {
    if rows.is_empty() {
        return Err(Error::Metrics("no runs to aggregate".into()));
    }
    let mut order: Vec<Key> = Vec::new();
    let mut groups: BTreeMap<Key, Vec<&RunMetrics>> = BTreeMap::new();
    for r in rows {
        let k = key(r);
        if !groups.contains_key(&k) {
            order.push(k.clone());
        }
        groups.entry(k).or_default().push(r);
    }
    Ok(order.iter().map(|k| aggregate_group(&groups[k])).collect())
}

fn aggregate_group(g: &[&RunMetrics]) -> AggregateRow {
    let ok: Vec<&RunMetrics> = g.iter().copied().filter(|r| r.is_ok()).collect();
    let stat = |f: &dyn Fn(&RunMetrics) -> f64| {
        let xs: Vec<f64> = ok.iter().map(|r| f(r)).filter(|x| !x.is_nan()).collect();
        mean_std(&xs)
    };
    let (hit_m, hit_s) = stat(&|r| r.cache_hit_rate);
    let (d_m, d_s) = stat(&|r| r.mean_gof_delay_ms);
    let (p_m, p_s) = stat(&|r| r.p95_gof_delay_ms);
    let (t_m, t_s) = stat(&|r| r.effective_throughput_mbps);
    let (i_m, i_s) = stat(&|r| r.incomplete_gof_fraction);
    let (r_m, r_s) = stat(&|r| r.retransmissions as f64);
    let (k_m, k_s) = stat(&|r| r.delivered_packets as f64);

    let mut seg_sum: BTreeMap<String, f64> = BTreeMap::new();
    let mut modal: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &ok {
        for (label, n) in r.segment_counts() {
            *seg_sum.entry(label).or_insert(0.0) += n as f64;
        }
        *modal.entry(r.modal_segments.as_str()).or_insert(0) += 1;
    }
    let seg_mean = seg_sum
        .iter()
        .map(|(k, v)| format!("{k}={}", v / ok.len() as f64))
        .collect::<Vec<_>>()
        .join(";");
    let modal = modal
        .iter()
        .max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0)))
        .map(|(s, _)| s.to_string())
        .unwrap_or_default();
    let first = g[0];
    AggregateRow {
        scenario_id: first.scenario_id.clone(),
        protocol: first.protocol.clone(),
        bandwidth_mbps: first.bandwidth_mbps,
        loss_pct: first.loss_pct,
        runs: g.len(),
        ok_runs: ok.len(),
        cache_hit_rate_mean: hit_m,
        cache_hit_rate_std: hit_s,
        mean_gof_delay_ms_mean: d_m,
        mean_gof_delay_ms_std: d_s,
        p95_gof_delay_ms_mean: p_m,
        p95_gof_delay_ms_std: p_s,
        effective_throughput_mbps_mean: t_m,
        effective_throughput_mbps_std: t_s,
        incomplete_gof_fraction_mean: i_m,
        incomplete_gof_fraction_std: i_s,
        retransmissions_mean: r_m,
        retransmissions_std: r_s,
        delivered_packets_mean: k_m,
        delivered_packets_std: k_s,
        packets_by_segment_mean: seg_mean,
        modal_segments: modal,
    }
}

pub fn write_aggregate_csv(out: impl Write, rows: &[AggregateRow]) -> Result<()> {
    write_csv_with_schema(out, AGGREGATE_SCHEMA_VERSION, rows)
}

pub fn read_aggregate_csv(input: impl BufRead) -> Result<Vec<AggregateRow>> {
    read_csv_with_schema(input, AGGREGATE_SCHEMA_VERSION)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::scenario::ScenarioConfig;

    fn row(protocol: &str, loss: f64, seed: u64, hit: f64) -> RunMetrics {
        let mut m = RunMetrics::failed(&ScenarioConfig::default(), "");
        m.status = "ok".into();
        m.protocol = protocol.into();
        m.loss_pct = loss;
        m.seed = seed;
        m.cache_hit_rate = hit;
        m.mean_gof_delay_ms = 10.0;
        m.packets_by_segment = format!("30={}", seed * 2);
        m.modal_segments = "30".into();
        m
    }

    #[test]
    fn sample_std() {
        let (m, s) = mean_std(&[2.0, 4.0, 4.0, 4.0, 5.0, 5.0, 7.0, 9.0]);
        assert_eq!(m, 5.0);
        assert!((s - (32.0f64 / 7.0).sqrt()).abs() < 1e-12);
        assert_eq!(mean_std(&[3.0]), (3.0, 0.0));
    }

    #[test]
    fn groups_by_point_and_skips_failures() {
        let mut rows = vec![
            row("inds", 0.0, 1, 0.4),
            row("inds", 0.0, 2, 0.6),
            row("inds", 0.1, 1, 0.5),
            row("dash_pc", 0.0, 1, 0.3),
        ];
        rows.push(RunMetrics::failed(&ScenarioConfig::default(), "x"));
        rows[4].loss_pct = 0.1;
        let agg = aggregate(&rows).unwrap();
        assert_eq!(agg.len(), 3);
        assert_eq!((agg[0].runs, agg[0].ok_runs), (2, 2));
        assert!((agg[0].cache_hit_rate_mean - 0.5).abs() < 1e-12);
        assert_eq!(agg[0].packets_by_segment_mean, "30=3");
        assert_eq!((agg[1].runs, agg[1].ok_runs), (2, 1));
        assert_eq!(agg[2].protocol, "dash_pc");
        assert!(aggregate(&[]).is_err());
    }

    #[test]
    fn pure_function_of_rows() {
        let rows = vec![row("inds", 0.0, 1, 0.4), row("inds", 0.0, 2, 0.6)];
        let mut a = Vec::new();
        let mut b = Vec::new();
        write_aggregate_csv(&mut a, &aggregate(&rows).unwrap()).unwrap();
        write_aggregate_csv(&mut b, &aggregate(&rows).unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(read_aggregate_csv(a.as_slice()).unwrap().len(), 1);
    }
}
