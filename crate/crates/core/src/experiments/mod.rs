//! Scenario configuration, metric computation, sweeps and report aggregation.
//!
//! Every CSV written here starts with a `# schema=<name>/<version>` row.
//! Raw rows are one per run; seeds are only averaged in the report stage.

mod metrics;
mod psnr;
mod report;
mod run;
mod scenario;
mod sweep;

pub use metrics::{
    compute_dash_metrics, compute_inds_metrics, consumer_throughput_mbps, percentile, read_csv_with_schema,
    read_runs_csv, write_csv_with_schema, write_runs_csv, RunMetrics, RUN_SCHEMA_VERSION,
};
pub use psnr::{psnr_levels, psnr_table, read_psnr_csv, write_psnr_csv, PsnrRow, PSNR_SCHEMA_VERSION};
pub use report::{
    aggregate, mean_std, read_aggregate_csv, write_aggregate_csv, AggregateRow, AGGREGATE_SCHEMA_VERSION,
};
pub use run::{
    run_metrics_or_status, run_scenario, NodeRow, PreparedDataset, RunDetails, RunOutcome, NODE_SCHEMA_VERSION,
};
pub use scenario::{parse_config, DatasetSpec, LossScope, Protocol, ScenarioConfig, TopologyConfig};
pub use sweep::{run_sweep, SweepPoint, SweepSpec};
