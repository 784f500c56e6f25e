use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use inds::content::{encode_dataset, EncodeParams, FrameSource};
use inds::endpoints::write_ledger_csv;
use inds::experiments::{
    aggregate, parse_config, psnr_table, read_runs_csv, run_scenario, run_sweep, write_aggregate_csv, write_psnr_csv,
    write_runs_csv, DatasetSpec, PreparedDataset, Protocol, ScenarioConfig, SweepSpec,
};
use inds::layering::RetentionLadder;
use inds::{Error, Result};

#[derive(Parser)]
#[command(
    name = "inds",
    version,
    about = "Layered point-cloud streaming over named data: encode, simulate, sweep, report"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Encode a PLY directory or a synthetic sequence into a producer store.
    Encode(EncodeArgs),
    /// Run one scenario and write its metrics row.
    Run(RunArgs),
    /// Run the protocol × bandwidth × loss × seed grid.
    Sweep(SweepArgs),
    /// Aggregate a raw runs CSV into mean ± stddev per grid point.
    Report(ReportArgs),
    /// Per-level geometry PSNR table.
    Psnr(PsnrArgs),
}

#[derive(Args)]
struct SourceArgs {
    /// `shape:n_points[:seed]`, e.g. `sphere_shell:40000`.
    #[arg(long, conflicts_with = "ply_dir")]
    synthetic: Option<String>,
    /// Directory of `.ply` frames, read in name order.
    #[arg(long)]
    ply_dir: Option<PathBuf>,
}

impl SourceArgs {
    fn source(&self) -> Result<FrameSource> {
        match (&self.synthetic, &self.ply_dir) {
            (Some(spec), None) => parse_synthetic(spec),
            (None, Some(path)) => Ok(FrameSource::PlyDir { path: path.clone() }),
            _ => Err(Error::Config {
                key: "--synthetic".into(),
                message: "give exactly one of --synthetic or --ply-dir".into(),
            }),
        }
    }
}

#[derive(Args)]
struct EncodeArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 7)]
    depth: u8,
    /// Frames per GoF.
    #[arg(long, default_value_t = 30)]
    gof: u32,
    #[arg(long, default_value_t = 10)]
    gofs: u32,
    #[arg(long, default_value_t = 3)]
    color_bytes: u32,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario JSON; defaults apply to absent keys.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Producer store written by `encode`; overrides the scenario dataset.
    #[arg(long)]
    store: Option<PathBuf>,
}

impl ScenarioArgs {
    fn load(&self) -> Result<ScenarioConfig> {
        let mut cfg = match &self.scenario {
            Some(p) => ScenarioConfig::from_json(&fs::read_to_string(p)?)?,
            None => ScenarioConfig::default(),
        };
        if let Some(path) = &self.store {
            cfg.dataset = DatasetSpec::Store { path: path.clone() };
        }
        Ok(cfg)
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    protocol: Option<Protocol>,
    #[arg(long)]
    bandwidth: Option<f64>,
    /// Loss probability in percent.
    #[arg(long)]
    loss: Option<f64>,
    /// Metrics CSV (one row).
    #[arg(long)]
    out: PathBuf,
    /// Per-packet trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Per-node counters CSV.
    #[arg(long)]
    nodes: Option<PathBuf>,
    /// Per-GoF consumer ledger CSV.
    #[arg(long)]
    ledger: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scenario: ScenarioArgs,
    /// Sweep grid JSON; defaults to 3 bandwidths × 11 loss points × 3 protocols × 5 seeds.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
    #[arg(long)]
    seeds: Option<u64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Raw runs CSV from `sweep`.
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PsnrArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value_t = 10)]
    clouds: usize,
    #[arg(long, default_value_t = 7)]
    depth: u8,
    #[arg(long)]
    out: PathBuf,
}

fn parse_synthetic(spec: &str) -> Result<FrameSource> {
    let bad = |m: &str| Error::Config {
        key: "--synthetic".into(),
        message: format!("`{spec}`: {m}"),
    };
    let mut parts = spec.split(':');
    let shape = parts
        .next()
        .unwrap_or_default()
        .parse()
        .map_err(|_| bad("unknown shape"))?;
    let n_points = parts
        .next()
        .ok_or_else(|| bad("expected shape:n_points[:seed]"))?
        .parse()
        .map_err(|_| bad("n_points must be an integer"))?;
    let seed = parts
        .next()
        .map_or(Ok(1), str::parse)
        .map_err(|_| bad("seed must be an integer"))?;
    if parts.next().is_some() {
        return Err(bad("too many fields"));
    }
    Ok(FrameSource::Synthetic { shape, n_points, seed })
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn encode(a: &EncodeArgs) -> Result<()> {
    let params = EncodeParams {
        depth: a.depth,
        gof_frames: a.gof,
        n_gofs: a.gofs,
        color_bytes_per_point: a.color_bytes,
        ..Default::default()
    };
    let ds = encode_dataset(&a.source.source()?, &params)?;
    ds.save(&a.out)?;
    let md = ds.metadata();
    println!(
        "{} GoFs, {} segments per GoF, written to {}",
        md.gofs.len(),
        1 + md.gofs[0].segments.len(),
        a.out.display()
    );
    for (level, bytes) in params.ladder.levels().iter().zip(ds.mean_level_bytes()) {
        println!("{}: {:.0} bytes per GoF", level.label, bytes);
    }
    Ok(())
}

fn run(a: &RunArgs) -> Result<()> {
    let mut cfg = a.scenario.load()?;
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    if let Some(p) = a.protocol {
        cfg.protocol = p;
    }
    if let Some(b) = a.bandwidth {
        cfg.bandwidth_mbps = b;
    }
    if let Some(l) = a.loss {
        cfg.loss_pct = l;
    }
    let tracing = a.trace.is_some();
    cfg.inds.trace = tracing;
    cfg.dash.trace = tracing;
    cfg.validate()?;
    let data = PreparedDataset::from_spec(&cfg.dataset)?;
    let out = run_scenario(&cfg, &data)?;
    write_runs_csv(create(&a.out)?, std::slice::from_ref(&out.metrics))?;
    if let Some(p) = &a.trace {
        let mut w = create(p)?;
        out.details.trace().write_csv(&mut w)?;
        w.flush()?;
    }
    if let Some(p) = &a.nodes {
        out.details.write_nodes_csv(create(p)?)?;
    }
    if let Some(p) = &a.ledger {
        write_ledger_csv(p, &out.details.ledger())?;
    }
    let m = &out.metrics;
    println!(
        "{} {} Mbps {}% seed {}: hit rate {:.3}, mean delay {:.1} ms, throughput {:.2} Mbps, segments {}",
        m.protocol,
        m.bandwidth_mbps,
        m.loss_pct,
        m.seed,
        m.cache_hit_rate,
        m.mean_gof_delay_ms,
        m.effective_throughput_mbps,
        m.modal_segments
    );
    Ok(())
}

fn sweep(a: &SweepArgs) -> Result<()> {
    let base = a.scenario.load()?;
    let mut spec: SweepSpec = match &a.spec {
        Some(p) => parse_config(&fs::read_to_string(p)?, "spec")?,
        None => SweepSpec::default(),
    };
    if let Some(t) = a.threads {
        spec.threads = t;
    }
    if let Some(s) = a.seeds {
        spec.seeds = s;
    }
    spec.validate()?;
    let data = PreparedDataset::from_spec(&base.dataset)?;
    let rows = run_sweep(&spec, &base, &data)?;
    write_runs_csv(create(&a.out)?, &rows)?;
    let failed = rows.iter().filter(|r| !r.is_ok()).count();
    println!("{} runs written to {} ({failed} failed)", rows.len(), a.out.display());
    Ok(())
}

fn report(a: &ReportArgs) -> Result<()> {
    let rows = read_runs_csv(BufReader::new(File::open(&a.input)?))?;
    let agg = aggregate(&rows)?;
    write_aggregate_csv(create(&a.out)?, &agg)?;
    println!(
        "{} grid points from {} runs written to {}",
        agg.len(),
        rows.len(),
        a.out.display()
    );
    Ok(())
}

fn psnr(a: &PsnrArgs) -> Result<()> {
    let ladder = RetentionLadder::default();
    let rows = psnr_table(&a.source.source()?, a.clouds, a.depth, &ladder)?;
    write_psnr_csv(create(&a.out)?, &rows)?;
    for level in ladder.levels() {
        let v: Vec<f64> = rows
            .iter()
            .filter(|r| r.level == level.label)
            .map(|r| r.psnr_db)
            .collect();
        println!(
            "{}: mean {:.2} dB over {} clouds",
            level.label,
            v.iter().sum::<f64>() / v.len() as f64,
            v.len()
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Encode(a) => encode(a),
        Command::Run(a) => run(a),
        Command::Sweep(a) => sweep(a),
        Command::Report(a) => report(a),
        Command::Psnr(a) => psnr(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::Config { .. }) => {
            eprintln!("inds: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("inds: {e}");
            ExitCode::from(1)
        }
    }
}
