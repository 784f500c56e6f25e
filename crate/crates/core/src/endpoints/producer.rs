use bytes::Bytes;
use rustc_hash::FxHashMap;

use crate::content::EncodedDataset;
use crate::error::{Error, Result};
use crate::naming::{enumerate_gof_segments_with, Name};
use crate::wire::{chunk_segment, DataPacket, Interest};

/// Highest-quality content only, pre-chunked; responses depend only on the name.
#[derive(Debug, Clone)]
pub struct ProducerStore {
    segments: FxHashMap<Name, Bytes>,
    chunks: FxHashMap<Name, DataPacket>,
    metadata_name: Name,
}

impl ProducerStore {
    pub fn from_dataset(ds: &EncodedDataset) -> Result<Self> {
        let md = ds.metadata();
        let mtu = ds.params.mtu_payload as usize;
        let mut segments = FxHashMap::default();
        let metadata_name = md.name()?;
        segments.insert(metadata_name.clone(), Bytes::from(md.to_json()));
        for g in &ds.gofs {
            let names = enumerate_gof_segments_with(&md.dataset, &g.window, g.gof, &ds.params.ladder)?;
            let payloads = std::iter::once(&g.top).chain(&g.segments);
            for (name, payload) in names.into_iter().zip(payloads) {
                segments.insert(name, payload.clone());
            }
        }
        let mut chunks = FxHashMap::default();
        for (name, payload) in &segments {
            for d in chunk_segment(name, payload, mtu)? {
                chunks.insert(d.name.clone(), d);
            }
        }
        Ok(Self {
            segments,
            chunks,
            metadata_name,
        })
    }

    pub fn metadata_name(&self) -> &Name {
        &self.metadata_name
    }

    /// Segment-level names, sorted.
    pub fn names(&self) -> Vec<Name> {
        let mut v: Vec<Name> = self.segments.keys().cloned().collect();
        v.sort();
        v
    }

    pub fn segment(&self, name: &Name) -> Option<&Bytes> {
        self.segments.get(name)
    }

    pub fn chunk_total(&self) -> usize {
        self.chunks.len()
    }
}

/// Exact chunk for the Interest's name, or `None` for an unknown name.
pub fn producer_on_interest(store: &ProducerStore, interest: &Interest) -> Option<DataPacket> {
    let d = store.chunks.get(&interest.name).cloned();
    if d.is_none() {
        log::warn!("producer has no content for {}", interest.name);
    }
    d
}

/// Checks the store holds exactly the enumerated names of every GoF plus MetaData.
pub fn verify_store(store: &ProducerStore, ds: &EncodedDataset) -> Result<()> {
    let mut want = vec![store.metadata_name.clone()];
    for g in &ds.gofs {
        want.extend(enumerate_gof_segments_with(
            &ds.params.dataset,
            &g.window,
            g.gof,
            &ds.params.ladder,
        )?);
    }
    want.sort();
    if want != store.names() {
        return Err(Error::contract("producer store names differ from the enumeration"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::SyntheticShape;
    use crate::content::{encode_dataset, EncodeParams, FrameSource};

    fn store() -> (ProducerStore, EncodedDataset) {
        let src = FrameSource::Synthetic {
            shape: SyntheticShape::SphereShell,
            n_points: 1500,
            seed: 1,
        };
        let params = EncodeParams {
            gof_frames: 2,
            n_gofs: 2,
            dataset: "DS".into(),
            ..Default::default()
        };
        let ds = encode_dataset(&src, &params).unwrap();
        (ProducerStore::from_dataset(&ds).unwrap(), ds)
    }

    #[test]
    fn serves_exact_chunks_statelessly() {
        let (s, ds) = store();
        verify_store(&s, &ds).unwrap();
        assert_eq!(s.names().len(), 1 + 2 * 5);
        let name = s
            .names()
            .into_iter()
            .find(|n| n.as_str().ends_with("LastLayer/30"))
            .unwrap();
        let i = Interest::new(name.with_chunk(0), 1);
        let a = producer_on_interest(&s, &i).unwrap();
        let b = producer_on_interest(&s, &i.reissue(2)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.name, i.name);
        assert_eq!(&a.payload[..], &s.segment(&name).unwrap()[..a.payload.len()]);
    }

    #[test]
    fn metadata_chunk_and_unknown_name() {
        let (s, _) = store();
        let md = producer_on_interest(&s, &Interest::new(s.metadata_name().with_chunk(0), 1)).unwrap();
        assert!(md.payload.starts_with(b"{\"dataset\":\"DS\""));
        let bogus = Interest::new(Name::parse("/PointCloudService/DS/Nope/c=0").unwrap(), 1);
        assert!(producer_on_interest(&s, &bogus).is_none());
    }
}
