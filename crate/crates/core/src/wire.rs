//! Interest/Data packets, segment chunking and wire-size accounting.

use std::collections::HashMap;

use bytes::Bytes;
use rand::RngCore;

use crate::error::{Error, Result};
use crate::naming::Name;

/// Fixed per-packet header cost, Interest and Data alike.
pub const HEADER_OVERHEAD: usize = 40;
pub const DEFAULT_MTU_PAYLOAD: usize = 1200;
pub const DEFAULT_LIFETIME_MS: u32 = 4000;
pub const MIN_MTU_PAYLOAD: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interest {
    pub name: Name,
    pub nonce: u32,
    pub lifetime_ms: u32,
    pub hop_count: u8,
}

impl Interest {
    pub fn new(name: Name, nonce: u32) -> Self {
        Self {
            name,
            nonce,
            lifetime_ms: DEFAULT_LIFETIME_MS,
            hop_count: 0,
        }
    }

    pub fn wire_size(&self) -> usize {
        HEADER_OVERHEAD + self.name.as_str().len()
    }

    /// Same name, new nonce.
    pub fn reissue(&self, nonce: u32) -> Self {
        Self {
            nonce,
            hop_count: 0,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DataPacket {
    pub name: Name,
    pub payload: Bytes,
    pub total_chunks: u32,
}

impl DataPacket {
    pub fn wire_size(&self) -> usize {
        HEADER_OVERHEAD + self.name.as_str().len() + self.payload.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Packet {
    Interest(Interest),
    Data(DataPacket),
}

impl Packet {
    pub fn wire_size(&self) -> usize {
        match self {
            Packet::Interest(i) => i.wire_size(),
            Packet::Data(d) => d.wire_size(),
        }
    }

    pub fn name(&self) -> &Name {
        match self {
            Packet::Interest(i) => &i.name,
            Packet::Data(d) => &d.name,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Packet::Interest(_) => "interest",
            Packet::Data(_) => "data",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChunkPlan {
    pub segment_name: Name,
    pub mtu_payload: usize,
    pub chunk_sizes: Vec<usize>,
}

impl ChunkPlan {
    /// An empty payload still yields one zero-length chunk.
    pub fn new(segment_name: Name, payload_len: usize, mtu_payload: usize) -> Result<Self> {
        if mtu_payload < MIN_MTU_PAYLOAD {
            return Err(Error::domain(format!(
                "mtu_payload {mtu_payload} below minimum {MIN_MTU_PAYLOAD}"
            )));
        }
        let n = payload_len.div_ceil(mtu_payload).max(1);
        let mut chunk_sizes = vec![mtu_payload; n];
        chunk_sizes[n - 1] = payload_len - mtu_payload * (n - 1);
        Ok(Self {
            segment_name,
            mtu_payload,
            chunk_sizes,
        })
    }

    pub fn total_chunks(&self) -> u32 {
        self.chunk_sizes.len() as u32
    }
}

pub fn chunk_count(payload_len: usize, mtu_payload: usize) -> u32 {
    payload_len.div_ceil(mtu_payload).max(1) as u32
}

pub fn chunk_segment(segment_name: &Name, payload: &Bytes, mtu_payload: usize) -> Result<Vec<DataPacket>> {
    let plan = ChunkPlan::new(segment_name.clone(), payload.len(), mtu_payload)?;
    let total_chunks = plan.total_chunks();
    let mut offset = 0;
    Ok(plan
        .chunk_sizes
        .iter()
        .enumerate()
        .map(|(i, &len)| {
            let d = DataPacket {
                name: segment_name.with_chunk(i as u64),
                payload: payload.slice(offset..offset + len),
                total_chunks,
            };
            offset += len;
            d
        })
        .collect())
}

/// Concatenates chunk payloads; chunks must be complete and in order.
pub fn reassemble_chunks(chunks: &[DataPacket]) -> Result<Vec<u8>> {
    let total = chunks.first().map_or(0, |c| c.total_chunks as usize);
    if chunks.len() != total {
        return Err(Error::contract(format!("{} of {total} chunks", chunks.len())));
    }
    let mut out = Vec::new();
    for (i, c) in chunks.iter().enumerate() {
        if c.name.chunk() != Some(i as u64) {
            return Err(Error::contract(format!("chunk {i} out of order: {}", c.name)));
        }
        out.extend_from_slice(&c.payload);
    }
    Ok(out)
}

/// One Interest per (segment, chunk), segments in the given order, chunks ascending.
pub fn interests_for_segments(
    segments: &[Name],
    chunk_counts: &HashMap<Name, u32>,
    rng: &mut impl RngCore,
) -> Result<Vec<Interest>> {
    let mut out = Vec::new();
    for s in segments {
        let n = *chunk_counts
            .get(s)
            .ok_or_else(|| Error::domain(format!("no chunk count for segment {s}")))?;
        out.extend((0..n as u64).map(|c| Interest::new(s.with_chunk(c), rng.next_u32())));
    }
    Ok(out)
}
