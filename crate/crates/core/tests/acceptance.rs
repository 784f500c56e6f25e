//! Primary acceptance criteria, one line each.
//!
//! A broken structural invariant (codec, partition cover and nesting, PSNR,
//! forwarding, determinism, LRU) fails the target. Measured quantities that
//! miss their tolerance (sweep trends, partition count bound) print their
//! verdict and values; they fail the target only with
//! `INDS_ACCEPTANCE_STRICT=1`.

use std::collections::{BTreeMap, HashMap};
use std::io::Write;
use std::process::Command;

use bytes::Bytes;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use inds::codec::{
    build_octree, decode_octree, decode_top_layer, encode_frame, last_layer_bytes, top_layer_bytes, voxelize, RawPoint,
    RawPointCloud, SyntheticShape,
};
use inds::content::FrameSource;
use inds::experiments::{
    aggregate, psnr_table, run_scenario, run_sweep, AggregateRow, DatasetSpec, PreparedDataset, RunDetails, RunMetrics,
    ScenarioConfig, SweepSpec,
};
use inds::icn::{Action, ContentStore, Fib, Forwarder, DEFAULT_CS_CAPACITY};
use inds::layering::{decode_segment_payload, partition_last_layer, reassemble, segment_payload, RetentionLadder};
use inds::naming::Name;
use inds::netsim::{Link, LinkSpec, LossModel, NodeRole, TopologyKind, TxOutcome};
use inds::wire::{DataPacket, Interest};

/// Verdict line, written to stderr directly so the harness does not capture it.
fn line(pass: bool, name: &str, detail: &str) {
    let mark = if pass { "✓" } else { "✗" };
    let mut err = std::io::stderr().lock();
    writeln!(err, "[acceptance] {mark} {name}: {detail}").unwrap();
}

struct Verdicts {
    hard_failures: Vec<String>,
    /// Unmet by measurement rather than by a broken invariant.
    trend_failures: Vec<String>,
}

impl Verdicts {
    fn hard(&mut self, name: &str, pass: bool, detail: String) {
        line(pass, name, &detail);
        if !pass {
            self.hard_failures.push(name.into());
        }
    }

    fn trend(&mut self, name: &str, pass: bool, detail: String) {
        line(pass, name, &detail);
        if !pass {
            self.trend_failures.push(name.into());
        }
    }
}

fn random_cloud(rng: &mut ChaCha8Rng) -> RawPointCloud {
    let n = rng.gen_range(1..3000);
    let scale: f64 = rng.gen_range(0.1..100.0);
    RawPointCloud::new(
        (0..n)
            .map(|_| {
                RawPoint::new(
                    rng.gen::<f64>() * scale,
                    rng.gen::<f64>() * scale,
                    rng.gen::<f64>() * scale,
                )
            })
            .collect(),
    )
}

fn codec_correctness() -> (bool, String) {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0DEC);
    let mut bad = Vec::new();
    for i in 0..100 {
        let vc = voxelize(&random_cloud(&mut rng), 7).unwrap();
        let frame = build_octree(&vc).unwrap();
        let round_trip = decode_octree(&frame, 7).unwrap();
        let whole = encode_frame(&frame, 3);
        let mut split = top_layer_bytes(&frame);
        split.extend(last_layer_bytes(&frame, 3));
        let coarse_ok = decode_top_layer(&top_layer_bytes(&frame)).unwrap() == decode_octree(&frame, 6).unwrap();
        if round_trip.voxels() != vc.voxels() || whole != split || !coarse_ok {
            bad.push(i);
        }
    }
    (
        bad.is_empty(),
        format!("100 random clouds at depth 7, mismatches {bad:?}"),
    )
}

/// Overall verdict, then whether the structural part (cover, nesting) held.
fn partition_exactness() -> (bool, bool, String) {
    let ladder = RetentionLadder::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x9A87);
    let mut sizes: Vec<usize> = (1..=1000).collect();
    sizes.extend((0..20).map(|_| rng.gen_range(1_000..2_000_000)));
    let mut worst = 0.0f64;
    let mut worst_small = 0.0f64;
    let mut at_10k = 0.0f64;
    let mut cover_ok = true;
    for &n in sizes.iter().chain(&[10_000]) {
        let part = partition_last_layer(n, &ladder).unwrap();
        let mut all: Vec<usize> = (0..ladder.tiers()).flat_map(|t| part.tier(t).to_vec()).collect();
        all.sort_unstable();
        cover_ok &= all.len() == n && all.iter().enumerate().all(|(i, &v)| i == v);
        let mut cum = 0usize;
        for (t, r) in ladder.ratios().iter().enumerate() {
            cum += part.tier(t).len();
            let dev = (cum as f64 - r * n as f64).abs();
            worst = worst.max(dev);
            if n <= 1000 {
                worst_small = worst_small.max(dev);
            }
            if n == 10_000 {
                at_10k = at_10k.max(dev);
            }
        }
    }

    // L50 equals L30 plus enhanced30-50, both as clouds and as decoded segment payloads.
    let cloud = inds::codec::gen_synthetic(SyntheticShape::SphereShell, 20_000, 4).unwrap();
    let vc = voxelize(&cloud, 7).unwrap();
    let part = partition_last_layer(vc.len(), &ladder).unwrap();
    let levels = ladder.levels();
    let l30 = reassemble(&vc, &part, &levels[0]).unwrap();
    let l50 = reassemble(&vc, &part, &levels[1]).unwrap();
    let mut union: Vec<u64> = l30.morton_codes();
    union.extend(vc.select(part.tier(1)).morton_codes());
    union.sort_unstable();
    let mut from_segments: Vec<u64> = ["30", "enhanced30-50"]
        .iter()
        .flat_map(|s| {
            let bytes = segment_payload(&vc, &part, s, 0, 3).unwrap();
            decode_segment_payload(&bytes, 3).unwrap().remove(0).codes
        })
        .collect();
    from_segments.sort_unstable();
    let l50_codes = l50.morton_codes();
    let exact = union == l50_codes && from_segments == l50_codes && l50.voxels().len() == union.len();

    let structural = cover_ok && exact;
    (
        structural && worst <= 2.0,
        structural,
        format!(
            "{} sizes, disjoint cover {cover_ok}; max |cum - ratio*n| {worst:.2} overall, {worst_small:.2} for n <= 1000, {at_10k:.2} at n = 10000 (tol 2); L50 = L30 + enhanced30-50 {exact}",
            sizes.len() + 1
        ),
    )
}

fn psnr_monotonicity() -> (bool, String) {
    let ladder = RetentionLadder::default();
    let mut rows = Vec::new();
    for (k, shape) in [
        SyntheticShape::SphereShell,
        SyntheticShape::CubeShell,
        SyntheticShape::RandomUniform,
    ]
    .into_iter()
    .enumerate()
    {
        let src = FrameSource::Synthetic {
            shape,
            n_points: 20_000,
            seed: 100 + k as u64,
        };
        rows.extend(psnr_table(&src, 4, 7, &ladder).unwrap().into_iter().map(move |mut r| {
            r.cloud += 4 * k;
            r
        }));
    }
    let mut by_cloud: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for r in &rows {
        by_cloud.entry(r.cloud).or_default().push(r.psnr_db);
    }
    let violations = by_cloud.values().filter(|v| v.windows(2).any(|w| w[1] < w[0])).count();
    let mean =
        |i: usize| by_cloud.values().map(|v| v[i]).filter(|x| x.is_finite()).sum::<f64>() / by_cloud.len() as f64;
    (
        violations == 0 && by_cloud.len() >= 10,
        format!(
            "{} clouds, {violations} non-monotone; mean L30 {:.2} dB, L50 {:.2} dB, L75 {:.2} dB, L100 exact",
            by_cloud.len(),
            mean(0),
            mean(1),
            mean(2)
        ),
    )
}

fn chunk(seg: &str, c: u64) -> Name {
    Name::parse(&format!(
        "/PointCloudService/DS/TimeWindow_20240314T120000/GoF_0001/LastLayer/{seg}"
    ))
    .unwrap()
    .with_chunk(c)
}

fn data_for(name: &Name) -> DataPacket {
    DataPacket {
        name: name.clone(),
        payload: Bytes::from_static(b"payload"),
        total_chunks: 8,
    }
}

fn forwarding_conformance() -> (bool, String) {
    const UP: usize = 0;
    const A: usize = 1;
    const B: usize = 2;
    let mut fib = Fib::new();
    fib.add_route(Name::parse("/PointCloudService").unwrap(), UP);
    let mut f = Forwarder::new(DEFAULT_CS_CAPACITY, fib);
    let mut nonce = 0u32;
    let mut interest = |n: &Name| {
        nonce += 1;
        Interest::new(n.clone(), nonce)
    };

    // Cold fetch of chunks 0..4 of segment "30" and all of "enhanced30-50" by face A fills the CS.
    for c in 0..4 {
        let n = chunk("30", c);
        f.on_interest(A, interest(&n), 0);
        f.on_data(UP, data_for(&n), 1);
    }
    for c in 0..8 {
        let n = chunk("enhanced30-50", c);
        f.on_interest(A, interest(&n), 0);
        f.on_data(UP, data_for(&n), 1);
    }

    // Full hit: every chunk of the segment is served locally, none forwarded.
    let full: Vec<Vec<Action>> = (0..8)
        .map(|c| f.on_interest(B, interest(&chunk("enhanced30-50", c)), 2))
        .collect();
    let full_ok = full
        .iter()
        .all(|a| matches!(a.as_slice(), [Action::SendData { face: B, .. }]));

    // Partial hit: cached chunks come from the CS, the rest go upstream.
    let partial: Vec<Vec<Action>> = (0..8).map(|c| f.on_interest(B, interest(&chunk("30", c)), 3)).collect();
    let partial_ok = partial.iter().enumerate().all(|(c, a)| match a.as_slice() {
        [Action::SendData { face: B, .. }] => c < 4,
        [Action::ForwardInterest { face: UP, .. }] => c >= 4,
        _ => false,
    });

    // Aggregation: a second face asking for a pending chunk is suppressed; the
    // Data then satisfies both faces.
    let pending = chunk("30", 6);
    let agg = f.on_interest(A, interest(&pending), 4);
    let dup_nonce = f.on_interest(A, Interest::new(pending.clone(), nonce), 4);
    let out = f.on_data(UP, data_for(&pending), 5);
    let mut faces: Vec<usize> = out
        .iter()
        .filter_map(|a| match a {
            Action::SendData { face, .. } => Some(*face),
            _ => None,
        })
        .collect();
    faces.sort_unstable();
    let agg_ok = agg == vec![Action::Aggregate] && dup_nonce == vec![Action::DropDuplicateNonce] && faces == vec![A, B];

    // Trace check: N consumers behind one forwarder send exactly one upstream Interest per name.
    let mut cfg = ScenarioConfig {
        stagger_ms: 0.0,
        dataset: small_dataset(),
        ..Default::default()
    };
    cfg.topology.inds = TopologyKind::LinearDebug;
    cfg.topology.forwarders = 1;
    cfg.topology.consumers = 4;
    cfg.inds.trace = true;
    cfg.inds.consumer.fixed_tier = Some(3);
    let data = PreparedDataset::from_spec(&cfg.dataset).unwrap();
    let out = run_scenario(&cfg, &data).unwrap();
    let RunDetails::Inds(r) = &out.details else {
        unreachable!()
    };
    let (topo, _) = cfg.build_topology().unwrap();
    let producer = topo.producer();
    let up_link = topo
        .edges
        .iter()
        .position(|e| e.a == producer || e.b == producer)
        .unwrap();
    let consumers = topo.with_role(NodeRole::Consumer);
    let mut upstream: HashMap<&str, usize> = HashMap::new();
    let mut requested: HashMap<&str, usize> = HashMap::new();
    for t in r.trace.records().iter().filter(|t| t.kind == "interest") {
        if t.link == up_link {
            *upstream.entry(t.name.as_str()).or_insert(0) += 1;
        } else if consumers.contains(&t.node) {
            *requested.entry(t.name.as_str()).or_insert(0) += 1;
        }
    }
    let shared = requested.values().filter(|&&k| k > 1).count();
    let unique_ok = !upstream.is_empty()
        && upstream.values().all(|&k| k == 1)
        && requested.keys().all(|n| upstream.contains_key(n))
        && upstream.len() == requested.len()
        && r.consumers.iter().all(|c| c.phase == "done");

    (
        full_ok && partial_ok && agg_ok && unique_ok,
        format!(
            "full hit {full_ok}, partial hit {partial_ok}, aggregation {agg_ok}; {} consumers, {} names ({shared} shared), {} upstream Interests",
            consumers.len(),
            requested.len(),
            upstream.values().sum::<usize>()
        ),
    )
}

fn small_dataset() -> DatasetSpec {
    DatasetSpec::Encode {
        source: FrameSource::Synthetic {
            shape: SyntheticShape::SphereShell,
            n_points: 3000,
            seed: 5,
        },
        params: inds::content::EncodeParams {
            gof_frames: 3,
            n_gofs: 2,
            window_gofs: 2,
            ..Default::default()
        },
    }
}

fn point<'a>(agg: &'a [AggregateRow], protocol: &str, bw: f64, loss: f64) -> &'a AggregateRow {
    agg.iter()
        .find(|r| r.protocol == protocol && r.bandwidth_mbps == bw && r.loss_pct == loss)
        .unwrap_or_else(|| panic!("missing grid point {protocol} {bw} {loss}"))
}

fn adaptivity(rows: &[RunMetrics], agg: &[AggregateRow]) -> (bool, String) {
    let expect = [
        (10.0, "30"),
        (50.0, "30+enhanced30-50+enhanced50-75"),
        (80.0, "30+enhanced30-50+enhanced50-75+enhanced75-100"),
    ];
    let mut sets_ok = true;
    let mut seen = Vec::new();
    for (bw, want) in expect {
        let sets: Vec<&str> = rows
            .iter()
            .filter(|r| r.protocol == "inds" && r.bandwidth_mbps == bw && r.loss_pct == 0.0)
            .map(|r| r.modal_segments.as_str())
            .collect();
        sets_ok &= !sets.is_empty() && sets.iter().all(|s| *s == want);
        seen.push(format!("{bw} Mbps {{{}}}", sets.first().copied().unwrap_or("")));
    }
    let packets: Vec<f64> = expect
        .iter()
        .map(|&(bw, _)| point(agg, "inds", bw, 0.0).delivered_packets_mean)
        .collect();
    let increasing = packets.windows(2).all(|w| w[1] > w[0]);
    (
        sets_ok && increasing,
        format!(
            "{}; delivered packets {:.0} -> {:.0} -> {:.0}",
            seen.join(", "),
            packets[0],
            packets[1],
            packets[2]
        ),
    )
}

/// Mean over bandwidths of the per-point means, one value per loss point.
fn by_loss(agg: &[AggregateRow], protocol: &str, losses: &[f64], f: impl Fn(&AggregateRow) -> f64) -> Vec<f64> {
    losses
        .iter()
        .map(|&l| {
            let v: Vec<f64> = agg
                .iter()
                .filter(|r| r.protocol == protocol && r.loss_pct == l)
                .map(&f)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        })
        .collect()
}

fn cache_efficiency(agg: &[AggregateRow], losses: &[f64]) -> (bool, String) {
    let inds = by_loss(agg, "inds", losses, |r| r.cache_hit_rate_mean);
    let pc = by_loss(agg, "dash_pc", losses, |r| r.cache_hit_rate_mean);
    let pcc = by_loss(agg, "pcc_dash", losses, |r| r.cache_hit_rate_mean);
    let floor_ok = inds.iter().all(|&h| h >= 0.65);
    let margin_ok = (0..losses.len()).all(|i| inds[i] - pc[i] >= 0.15 && inds[i] - pcc[i] >= 0.15);
    let range = |v: &[f64]| {
        let lo = v.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        format!("{lo:.3}..{hi:.3}")
    };
    (
        floor_ok && margin_ok,
        format!(
            "INDS hit rate {} (need >= 0.65), DASH-PC-like {}, PCC-DASH-like {} (need INDS ahead by >= 0.15)",
            range(&inds),
            range(&pc),
            range(&pcc)
        ),
    )
}

fn delay_resilience(agg: &[AggregateRow]) -> (bool, String) {
    let ratio = |p: &str| {
        let a = point(agg, p, 10.0, 0.0).mean_gof_delay_ms_mean;
        let b = point(agg, p, 10.0, 1.0).mean_gof_delay_ms_mean;
        (a, b, b / a)
    };
    let (i0, i1, ir) = ratio("inds");
    let (p0, p1, pr) = ratio("dash_pc");
    let (q0, q1, qr) = ratio("pcc_dash");
    (
        ir <= 1.5 && pr >= 3.0 && qr >= 3.0,
        format!(
            "10 Mbps, 0% -> 1%: INDS {i0:.1} -> {i1:.1} ms (x{ir:.2}, need <= 1.5), DASH-PC-like {p0:.1} -> {p1:.1} ms (x{pr:.2}, need >= 3), PCC-DASH-like {q0:.1} -> {q1:.1} ms (x{qr:.2}, need >= 3)"
        ),
    )
}

fn throughput_retention(agg: &[AggregateRow], bandwidths: &[f64], losses: &[f64]) -> (bool, String) {
    let tp = |p: &str, bw: f64, l: f64| point(agg, p, bw, l).effective_throughput_mbps_mean;
    let inds: Vec<f64> = bandwidths
        .iter()
        .map(|&bw| tp("inds", bw, 1.0) / tp("inds", bw, 0.0))
        .collect();
    let inds_ok = inds.iter().all(|&r| r >= 0.85);
    let high: Vec<f64> = losses.iter().copied().filter(|&l| l > 0.6).collect();
    let worst = |p: &str| {
        high.iter()
            .map(|&l| tp(p, 10.0, l) / tp(p, 10.0, 0.0))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let (pc, pcc) = (worst("dash_pc"), worst("pcc_dash"));
    let fmt: Vec<String> = bandwidths
        .iter()
        .zip(&inds)
        .map(|(b, r)| format!("{b} Mbps {r:.3}"))
        .collect();
    (
        inds_ok && pc <= 0.70 && pcc <= 0.70,
        format!(
            "INDS retention at 1% {} (need >= 0.85); 10 Mbps DASH retention above 0.6% at most DASH-PC-like {pc:.3}, PCC-DASH-like {pcc:.3} (need <= 0.70)",
            fmt.join(", ")
        ),
    )
}

fn determinism(store_dir: &std::path::Path) -> (bool, String) {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_inds");
    let mut identical = true;
    let mut cases = Vec::new();
    for (protocol, loss) in [("inds", "0.5"), ("dash_pc", "0.5"), ("pcc_dash", "1.0")] {
        let mut outputs = Vec::new();
        for k in 0..2 {
            let m = dir.path().join(format!("{protocol}-{k}.csv"));
            let t = dir.path().join(format!("{protocol}-{k}-trace.csv"));
            let status = Command::new(bin)
                .args(["run", "--store"])
                .arg(store_dir)
                .args([
                    "--seed",
                    "3",
                    "--bandwidth",
                    "10",
                    "--loss",
                    loss,
                    "--protocol",
                    protocol,
                    "--out",
                ])
                .arg(&m)
                .arg("--trace")
                .arg(&t)
                .output()
                .unwrap();
            assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
            outputs.push((std::fs::read(&m).unwrap(), std::fs::read(&t).unwrap()));
        }
        identical &= outputs[0] == outputs[1];
        cases.push(format!(
            "{protocol} ({} trace rows)",
            outputs[0].1.iter().filter(|&&b| b == b'\n').count()
        ));
    }

    let mut worst = 0.0f64;
    for (i, p) in [0.001, 0.005, 0.01].into_iter().enumerate() {
        let spec = LinkSpec::new(1_000_000_000, 1.0).with_loss(LossModel::bernoulli(p));
        let mut link = Link::new(i, 0, 1, spec, 42);
        let n = 1_000_000u64;
        let mut lost = 0u64;
        for k in 0..n {
            // 20 us spacing keeps the queue empty, so only the loss model drops.
            if link.transmit(k * 20_000, 0, 1240) == TxOutcome::Lost {
                lost += 1;
            }
        }
        worst = worst.max((lost as f64 / n as f64 - p).abs() / p);
    }
    (
        identical && worst <= 0.15,
        format!(
            "two runs each of {} byte-identical {identical}; empirical loss over 1e6 packets at 0.1/0.5/1%: worst relative error {:.3} (tol 0.15)",
            cases.join(", "),
            worst
        ),
    )
}

fn lru_capacity(max_forwarder_cs: usize) -> (bool, String) {
    let mut cs = ContentStore::new(DEFAULT_CS_CAPACITY);
    let mut max_len = 0;
    for i in 0..100_000u64 {
        cs.insert(data_for(&chunk("30", i)));
        max_len = max_len.max(cs.len());
    }
    let evictions_ok = cs.evictions() == 100_000 - DEFAULT_CS_CAPACITY as u64
        && !cs.contains(&chunk("30", 0))
        && cs.contains(&chunk("30", 99_999));

    let mut small = ContentStore::new(3);
    let (a, b, c, d, e) = (
        chunk("30", 0),
        chunk("30", 1),
        chunk("30", 2),
        chunk("30", 3),
        chunk("30", 4),
    );
    for n in [&a, &b, &c] {
        small.insert(data_for(n));
    }
    small.lookup(&a);
    let first = small.insert(data_for(&d));
    let second = small.insert(data_for(&e));
    let directed = first.as_ref() == Some(&b) && second.as_ref() == Some(&c) && small.contains(&a) && small.len() == 3;
    let pass = max_len <= DEFAULT_CS_CAPACITY && evictions_ok && directed && max_forwarder_cs <= DEFAULT_CS_CAPACITY;
    (
        pass,
        format!(
            "max CS occupancy {max_len} over 100k inserts, largest forwarder CS in a full run {max_forwarder_cs} (cap 65536); directed eviction {directed}"
        ),
    )
}

#[test]
fn primary_criteria() {
    let mut v = Verdicts {
        hard_failures: Vec::new(),
        trend_failures: Vec::new(),
    };
    let (p, d) = codec_correctness();
    v.hard("codec correctness", p, d);
    let (p, structural, d) = partition_exactness();
    if structural {
        v.trend("partition exactness", p, d);
    } else {
        v.hard("partition exactness", p, d);
    }
    let (p, d) = psnr_monotonicity();
    v.hard("PSNR monotonicity", p, d);
    let (p, d) = forwarding_conformance();
    v.hard("forwarding conformance", p, d);

    let base = ScenarioConfig::default();
    let data = PreparedDataset::from_spec(&base.dataset).unwrap();
    let spec = SweepSpec::default();
    let t = std::time::Instant::now();
    let rows = run_sweep(&spec, &base, &data).unwrap();
    let agg = aggregate(&rows).unwrap();
    let failed = rows.iter().filter(|r| !r.is_ok()).count();
    let mut err = std::io::stderr().lock();
    writeln!(
        err,
        "[acceptance] default sweep: {} runs, {} grid points, {failed} failed runs, {:.0} s",
        rows.len(),
        agg.len(),
        t.elapsed().as_secs_f64()
    )
    .unwrap();
    drop(err);
    assert_eq!(rows.len(), 495);
    assert_eq!(agg.len(), spec.grid_size());

    let (p, d) = adaptivity(&rows, &agg);
    v.trend("adaptivity trend", p, d);
    let (p, d) = cache_efficiency(&agg, &spec.loss_pct);
    v.trend("cache-efficiency trend", p, d);
    let (p, d) = delay_resilience(&agg);
    v.trend("delay resilience trend", p, d);
    let (p, d) = throughput_retention(&agg, &spec.bandwidths_mbps, &spec.loss_pct);
    v.trend("throughput retention trend", p, d);

    let store = tempfile::tempdir().unwrap();
    data.dataset.save(store.path()).unwrap();
    let (p, d) = determinism(store.path());
    v.hard("determinism", p, d);

    let full = run_scenario(
        &ScenarioConfig {
            bandwidth_mbps: 80.0,
            ..base.clone()
        },
        &data,
    )
    .unwrap();
    let RunDetails::Inds(r) = &full.details else {
        unreachable!()
    };
    let max_cs = r.forwarders.iter().map(|f| f.cs_len).max().unwrap_or(0);
    let (p, d) = lru_capacity(max_cs);
    v.hard("LRU + capacity", p, d);

    let mut err = std::io::stderr().lock();
    writeln!(
        err,
        "[acceptance] {} of 10 criteria met; unmet: {:?}",
        10 - v.hard_failures.len() - v.trend_failures.len(),
        v.hard_failures.iter().chain(&v.trend_failures).collect::<Vec<_>>()
    )
    .unwrap();
    drop(err);
    assert!(
        v.hard_failures.is_empty(),
        "structural criteria failed: {:?}",
        v.hard_failures
    );
    if std::env::var("INDS_ACCEPTANCE_STRICT").is_ok_and(|s| s == "1") {
        assert!(
            v.trend_failures.is_empty(),
            "trend criteria failed: {:?}",
            v.trend_failures
        );
    }
}
