//! Encoder to producer to forwarder to consumer, then decode at the receiver.

use std::collections::{BTreeMap, BTreeSet};

use inds::codec::{gen_synthetic, SyntheticShape};
use inds::content::{decode_gof_top_frames, encode_dataset, encode_frame_cloud, EncodeParams, FrameSource};
use inds::endpoints::{producer_on_interest, Consumer, ConsumerConfig, ConsumerOutput, Phase, ProducerStore};
use inds::icn::{Action, Fib, Forwarder, DEFAULT_CS_CAPACITY};
use inds::layering::decode_segment_payload;
use inds::naming::Name;
use inds::netsim::time::NS_PER_MS;
use inds::netsim::Scheduler;
use inds::wire::{DataPacket, Interest};

const PRODUCER_FACE: usize = 0;
const CONSUMER_FACE: usize = 1;

enum Ev {
    Consumer(ConsumerOutput),
    AtForwarder(Interest),
    AtProducer(Interest),
    FromProducer(DataPacket),
    AtConsumer(DataPacket),
}

fn source() -> FrameSource {
    FrameSource::Synthetic {
        shape: SyntheticShape::SphereShell,
        n_points: 4000,
        seed: 11,
    }
}

fn params() -> EncodeParams {
    EncodeParams {
        gof_frames: 3,
        n_gofs: 2,
        window_gofs: 2,
        ..Default::default()
    }
}

/// Consumer and producer one 1 ms hop either side of a forwarder; every
/// `drop_every`-th first transmission of an Interest is lost on the access hop.
fn fetch(store: &ProducerStore, cfg: ConsumerConfig, drop_every: u64) -> (Consumer, Forwarder) {
    let mut fib = Fib::new();
    fib.add_route(Name::parse("/PointCloudService").unwrap(), PRODUCER_FACE);
    let mut fwd = Forwarder::new(DEFAULT_CS_CAPACITY, fib);
    let mut c = Consumer::new(0, store.metadata_name().clone(), cfg, 7);
    let mut sched = Scheduler::new();
    let hop = NS_PER_MS;
    let mut first_sends = 0u64;
    let mut seen = std::collections::HashSet::new();
    for o in c.start(0) {
        sched.schedule(0, Ev::Consumer(o)).unwrap();
    }
    while let Some((now, ev)) = sched.pop() {
        match ev {
            Ev::Consumer(ConsumerOutput::Send(i)) => {
                if seen.insert(i.name.clone()) {
                    first_sends += 1;
                    if first_sends.is_multiple_of(drop_every) {
                        continue;
                    }
                }
                sched.schedule(now + hop, Ev::AtForwarder(i)).unwrap();
            }
            Ev::Consumer(ConsumerOutput::Timer { at, timer }) => {
                if at > now {
                    sched
                        .schedule(at, Ev::Consumer(ConsumerOutput::Timer { at, timer }))
                        .unwrap();
                } else {
                    for o in c.on_timer(now, &timer) {
                        sched.schedule(now, Ev::Consumer(o)).unwrap();
                    }
                }
            }
            Ev::AtForwarder(i) => {
                for a in fwd.on_interest(CONSUMER_FACE, i, now) {
                    match a {
                        Action::SendData { data, .. } => sched.schedule(now + hop, Ev::AtConsumer(data)).unwrap(),
                        Action::ForwardInterest { interest, .. } => {
                            sched.schedule(now + hop, Ev::AtProducer(interest)).unwrap()
                        }
                        _ => {}
                    }
                }
            }
            Ev::AtProducer(i) => {
                let d = producer_on_interest(store, &i).expect("store holds every advertised name");
                sched.schedule(now + hop, Ev::FromProducer(d)).unwrap();
            }
            Ev::FromProducer(d) => {
                for a in fwd.on_data(PRODUCER_FACE, d, now) {
                    if let Action::SendData { data, .. } = a {
                        sched.schedule(now + hop, Ev::AtConsumer(data)).unwrap();
                    }
                }
            }
            Ev::AtConsumer(d) => {
                for o in c.on_data(now, &d) {
                    sched.schedule(now, Ev::Consumer(o)).unwrap();
                }
            }
        }
    }
    (c, fwd)
}

#[test]
fn received_segments_are_byte_exact_and_decode_to_the_source() {
    let ds = encode_dataset(&source(), &params()).unwrap();
    let store = ProducerStore::from_dataset(&ds).unwrap();
    let cfg = ConsumerConfig {
        fixed_tier: Some(3),
        keep_payloads: true,
        ..Default::default()
    };
    let (c, _) = fetch(&store, cfg, 17);
    assert_eq!(c.phase(), Phase::Done);
    assert!(c.stats().retransmissions > 0);
    assert!(c.ledger().iter().all(|e| !e.incomplete));

    let received = c.received_segments();
    // Every GoF name in the store, MetaData aside.
    assert_eq!(received.len(), store.names().len() - 1);
    for (name, bytes) in received {
        assert_eq!(Some(bytes), store.segment(name), "{name}");
    }

    // Rebuild each frame from its four segments and compare with a fresh encode.
    let frames: Vec<_> = source().frames(6).unwrap().collect::<Result<_, _>>().unwrap();
    let bounds = frames[0].bounds().unwrap();
    let md = c.metadata().unwrap();
    for (g, entry) in md.gofs.iter().enumerate() {
        let top = &received[&entry.top_name(&md.dataset).unwrap()];
        let coarse = decode_gof_top_frames(top).unwrap();
        let mut codes: BTreeMap<u16, Vec<u64>> = BTreeMap::new();
        for t in 0..4 {
            let seg = &received[&entry.segment_name(&md.dataset, t).unwrap()];
            for block in decode_segment_payload(seg, 3).unwrap() {
                codes.entry(block.frame_index).or_default().extend(block.codes);
            }
        }
        assert_eq!(coarse.len(), 3);
        for (f, mut got) in codes {
            let expected = encode_frame_cloud(&frames[g * 3 + f as usize], &bounds, 7).unwrap();
            got.sort_unstable();
            assert_eq!(got, expected.voxels.morton_codes(), "GoF {g} frame {f}");
            let parents: BTreeSet<u64> = got.iter().map(|c| c >> 3).collect();
            assert_eq!(coarse[f as usize].morton_codes(), parents.into_iter().collect::<Vec<_>>());
        }
    }
}

#[test]
fn base_tier_fetch_skips_enhancements() {
    let ds = encode_dataset(&source(), &params()).unwrap();
    let store = ProducerStore::from_dataset(&ds).unwrap();
    let cfg = ConsumerConfig {
        fixed_tier: Some(0),
        keep_payloads: true,
        ..Default::default()
    };
    let (c, fwd) = fetch(&store, cfg, u64::MAX);
    assert_eq!(c.stats().retransmissions, 0);
    let labels: BTreeSet<String> = c
        .received_segments()
        .keys()
        .map(|n| n.components().last().unwrap().to_string())
        .collect();
    assert_eq!(labels, ["30", "TopLayer"].map(String::from).into());
    // A single cold consumer never hits.
    assert_eq!(fwd.counters().cs_hits, 0);
}

#[test]
fn synthetic_generator_is_seeded() {
    let a = gen_synthetic(SyntheticShape::SphereShell, 500, 3).unwrap();
    let b = gen_synthetic(SyntheticShape::SphereShell, 500, 3).unwrap();
    let c = gen_synthetic(SyntheticShape::SphereShell, 500, 4).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}
