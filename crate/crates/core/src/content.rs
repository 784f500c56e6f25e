//! Sequence encoding into per-GoF layered content, and the on-disk store.
//!
//! Store layout:
//!
//! ```text
//! <dir>/metadata.json
//! <dir>/<TimeWindow>/<GoF>/TopLayer.bin
//! <dir>/<TimeWindow>/<GoF>/LastLayer_<segment>.bin
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use bytes::Bytes;
use chrono::{NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};

use crate::codec::{
    build_octree, gen_synthetic, load_ply, top_layer_bytes, voxelize_with_bounds, Bounds, RawPointCloud,
    SyntheticShape, VoxelCloud,
};
use crate::endpoints::metadata::{GofEntry, MetaData, SegmentInfo};
use crate::error::{Error, Result};
use crate::layering::{encode_block, partition_last_layer, RetentionLadder};
use crate::naming::time_window_token;
use crate::wire::{chunk_count, DEFAULT_MTU_PAYLOAD};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncodeParams {
    pub dataset: String,
    pub depth: u8,
    pub gof_frames: u32,
    pub n_gofs: u32,
    pub frame_rate: u32,
    pub ladder: RetentionLadder,
    pub color_bytes_per_point: u32,
    pub mtu_payload: u32,
    /// GoFs per time window; 10 GoFs of 1 s make a 10 s window.
    pub window_gofs: u32,
    pub window_start: NaiveDateTime,
}

impl Default for EncodeParams {
    fn default() -> Self {
        Self {
            dataset: "synthetic".into(),
            depth: 7,
            gof_frames: 30,
            n_gofs: 10,
            frame_rate: 30,
            ladder: RetentionLadder::default(),
            color_bytes_per_point: 3,
            mtu_payload: DEFAULT_MTU_PAYLOAD as u32,
            window_gofs: 10,
            window_start: NaiveDate::from_ymd_opt(2024, 3, 14)
                .unwrap()
                .and_hms_opt(12, 0, 0)
                .unwrap(),
        }
    }
}

impl EncodeParams {
    pub fn validate(&self) -> Result<()> {
        if !(2..=crate::codec::MAX_DEPTH).contains(&self.depth) {
            return Err(Error::config("depth", "must lie in 2..=16"));
        }
        for (key, v) in [
            ("gof_frames", self.gof_frames),
            ("n_gofs", self.n_gofs),
            ("frame_rate", self.frame_rate),
            ("window_gofs", self.window_gofs),
        ] {
            if v == 0 {
                return Err(Error::config(key, "must be positive"));
            }
        }
        if self.gof_frames > u16::MAX as u32 {
            return Err(Error::config("gof_frames", "must fit a u16 frame index"));
        }
        if self.n_gofs > 9999 {
            return Err(Error::config("n_gofs", "at most 9999 GoFs are nameable"));
        }
        if (self.mtu_payload as usize) < crate::wire::MIN_MTU_PAYLOAD {
            return Err(Error::config("mtu_payload", "must be at least 64"));
        }
        Ok(())
    }

    /// Time-window token of a 1-based GoF number.
    pub fn window_of(&self, gof: u32) -> String {
        let gof_secs = self.gof_frames as f64 / self.frame_rate as f64;
        let offset = ((gof - 1) / self.window_gofs) as f64 * self.window_gofs as f64 * gof_secs;
        let start = self.window_start + chrono::Duration::milliseconds((offset * 1000.0).round() as i64);
        time_window_token(start)
    }
}

/// Where frames come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum FrameSource {
    /// Frame `f` is `gen_synthetic(shape, n_points, seed + f)`.
    Synthetic {
        shape: SyntheticShape,
        n_points: usize,
        seed: u64,
    },
    /// `.ply` files of a directory in name order, cycled to fill the sequence.
    PlyDir { path: PathBuf },
}

impl FrameSource {
    /// The first `count` frames of the sequence.
    pub fn frames(&self, count: usize) -> Result<Box<dyn Iterator<Item = Result<RawPointCloud>> + '_>> {
        match self {
            FrameSource::Synthetic { shape, n_points, seed } => {
                Ok(Box::new((0..count).map(move |f| {
                    gen_synthetic(*shape, *n_points, seed.wrapping_add(f as u64))
                })))
            }
            FrameSource::PlyDir { path } => {
                let mut files: Vec<PathBuf> = fs::read_dir(path)?
                    .filter_map(|e| e.ok().map(|e| e.path()))
                    .filter(|p| p.extension().is_some_and(|x| x.eq_ignore_ascii_case("ply")))
                    .collect();
                files.sort();
                if files.is_empty() {
                    return Err(Error::config(
                        "source.path",
                        format!("no .ply files in {}", path.display()),
                    ));
                }
                Ok(Box::new((0..count).map(move |f| load_ply(&files[f % files.len()]))))
            }
        }
    }
}

/// Per-GoF content: TopLayer blob plus one payload per ladder tier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LayeredGoF {
    pub gof: u32,
    pub window: String,
    pub top: Bytes,
    pub segments: Vec<Bytes>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EncodedDataset {
    pub params: EncodeParams,
    pub gofs: Vec<LayeredGoF>,
}

/// Frame-level encoding result, kept for quality analysis.
#[derive(Debug, Clone)]
pub struct EncodedFrame {
    pub voxels: VoxelCloud,
    pub top: Vec<u8>,
}

pub fn encode_frame_cloud(cloud: &RawPointCloud, bounds: &Bounds, depth: u8) -> Result<EncodedFrame> {
    let voxels = voxelize_with_bounds(cloud, depth, bounds)?;
    let octree = build_octree(&voxels)?;
    Ok(EncodedFrame {
        top: top_layer_bytes(&octree),
        voxels,
    })
}

/// Encodes `n_gofs * gof_frames` frames. Bounds of the first frame fix the grid for all.
pub fn encode_dataset(source: &FrameSource, params: &EncodeParams) -> Result<EncodedDataset> {
    params.validate()?;
    let total = (params.n_gofs * params.gof_frames) as usize;
    let mut frames = source.frames(total)?;
    let mut bounds: Option<Bounds> = None;
    let tiers = params.ladder.tiers();
    let mut gofs = Vec::with_capacity(params.n_gofs as usize);
    for g in 1..=params.n_gofs {
        let mut top = Vec::new();
        let mut segments = vec![Vec::new(); tiers];
        for fi in 0..params.gof_frames {
            let cloud = frames.next().expect("source yields the requested count")?;
            if bounds.is_none() {
                bounds = Some(cloud.bounds().ok_or_else(|| Error::domain("empty first frame"))?);
            }
            let f = encode_frame_cloud(&cloud, bounds.as_ref().unwrap(), params.depth)?;
            top.extend_from_slice(&f.top);
            let part = partition_last_layer(f.voxels.len(), &params.ladder)?;
            for (t, seg) in segments.iter_mut().enumerate() {
                encode_block(
                    seg,
                    &f.voxels,
                    part.tier(t),
                    fi as u16,
                    params.color_bytes_per_point as usize,
                );
            }
        }
        gofs.push(LayeredGoF {
            gof: g,
            window: params.window_of(g),
            top: Bytes::from(top),
            segments: segments.into_iter().map(Bytes::from).collect(),
        });
    }
    Ok(EncodedDataset {
        params: params.clone(),
        gofs,
    })
}

impl EncodedDataset {
    pub fn metadata(&self) -> MetaData {
        let p = &self.params;
        let mtu = p.mtu_payload as usize;
        let info = |label: String, b: &Bytes| SegmentInfo {
            label,
            bytes: b.len() as u64,
            chunks: chunk_count(b.len(), mtu),
        };
        let mut windows: Vec<String> = self.gofs.iter().map(|g| g.window.clone()).collect();
        windows.dedup();
        MetaData {
            dataset: p.dataset.clone(),
            frame_rate: p.frame_rate,
            octree_depth: p.depth,
            gof_frames: p.gof_frames,
            ladder: p.ladder.clone(),
            color_bytes_per_point: p.color_bytes_per_point,
            mtu_payload: p.mtu_payload,
            time_windows: windows,
            gofs: self
                .gofs
                .iter()
                .map(|g| GofEntry {
                    gof: g.gof,
                    time_window: g.window.clone(),
                    top_layer: info("TopLayer".into(), &g.top),
                    segments: g
                        .segments
                        .iter()
                        .enumerate()
                        .map(|(t, s)| info(p.ladder.suffix(t), s))
                        .collect(),
                })
                .collect(),
        }
    }

    /// Per-GoF bytes of each cumulative level, averaged over GoFs.
    pub fn mean_level_bytes(&self) -> Vec<f64> {
        let md = self.metadata();
        (0..self.params.ladder.tiers())
            .map(|t| md.gofs.iter().map(|g| g.cumulative_bytes(t) as f64).sum::<f64>() / md.gofs.len() as f64)
            .collect()
    }

    pub fn save(&self, dir: &Path) -> Result<()> {
        let ladder = &self.params.ladder;
        for g in &self.gofs {
            let gdir = dir.join(&g.window).join(format!("GoF_{:04}", g.gof));
            fs::create_dir_all(&gdir)?;
            fs::write(gdir.join("TopLayer.bin"), &g.top)?;
            for (t, s) in g.segments.iter().enumerate() {
                fs::write(gdir.join(format!("LastLayer_{}.bin", ladder.suffix(t))), s)?;
            }
        }
        let store = StoreFile {
            params: self.params.clone(),
            metadata: self.metadata(),
        };
        fs::write(dir.join("metadata.json"), serde_json::to_vec_pretty(&store)?)?;
        Ok(())
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let store: StoreFile = serde_json::from_slice(&fs::read(dir.join("metadata.json"))?)?;
        let mut gofs = Vec::new();
        for g in &store.metadata.gofs {
            let gdir = dir.join(&g.time_window).join(format!("GoF_{:04}", g.gof));
            let read = |file: String, expect: u64| -> Result<Bytes> {
                let b = fs::read(gdir.join(&file))?;
                if b.len() as u64 != expect {
                    return Err(Error::Schema(format!(
                        "{file} of GoF {} has {} bytes, metadata says {expect}",
                        g.gof,
                        b.len()
                    )));
                }
                Ok(Bytes::from(b))
            };
            gofs.push(LayeredGoF {
                gof: g.gof,
                window: g.time_window.clone(),
                top: read("TopLayer.bin".into(), g.top_layer.bytes)?,
                segments: g
                    .segments
                    .iter()
                    .map(|s| read(format!("LastLayer_{}.bin", s.label), s.bytes))
                    .collect::<Result<_>>()?,
            });
        }
        Ok(Self {
            params: store.params,
            gofs,
        })
    }
}

#[derive(Serialize, Deserialize)]
struct StoreFile {
    params: EncodeParams,
    metadata: MetaData,
}

/// Coarse cloud of one frame recovered from a GoF TopLayer blob.
pub fn decode_gof_top_frames(top: &[u8]) -> Result<Vec<VoxelCloud>> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < top.len() {
        let (cloud, used) = crate::codec::container::decode_top_layer_prefix(&top[pos..])?;
        out.push(cloud);
        pos += used;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::layering::decode_segment_payload;

    fn small() -> (FrameSource, EncodeParams) {
        let src = FrameSource::Synthetic {
            shape: SyntheticShape::SphereShell,
            n_points: 2000,
            seed: 3,
        };
        let params = EncodeParams {
            gof_frames: 3,
            n_gofs: 2,
            dataset: "DS".into(),
            ..Default::default()
        };
        (src, params)
    }

    #[test]
    fn gof_segments_split_every_frame() {
        let (src, params) = small();
        let ds = encode_dataset(&src, &params).unwrap();
        assert_eq!(ds.gofs.len(), 2);
        let g = &ds.gofs[0];
        assert_eq!(g.segments.len(), 4);
        assert_eq!(decode_gof_top_frames(&g.top).unwrap().len(), 3);
        let mut points = 0;
        for s in &g.segments {
            let blocks = decode_segment_payload(s, 3).unwrap();
            assert_eq!(blocks.len(), 3);
            assert_eq!(blocks.iter().map(|b| b.frame_index).collect::<Vec<_>>(), vec![0, 1, 2]);
            points += blocks.iter().map(|b| b.codes.len()).sum::<usize>();
        }
        let coarse = decode_gof_top_frames(&g.top).unwrap();
        assert!(points >= coarse.iter().map(|c| c.len()).sum::<usize>());
        let levels = ds.mean_level_bytes();
        assert!(levels.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn deterministic_and_store_roundtrip() {
        let (src, params) = small();
        let a = encode_dataset(&src, &params).unwrap();
        assert_eq!(a, encode_dataset(&src, &params).unwrap());
        let dir = tempfile::tempdir().unwrap();
        a.save(dir.path()).unwrap();
        assert!(dir
            .path()
            .join("TimeWindow_20240314T120000/GoF_0002/LastLayer_enhanced30-50.bin")
            .exists());
        let b = EncodedDataset::load(dir.path()).unwrap();
        assert_eq!(a, b);
        let md = b.metadata();
        assert_eq!(
            md.gofs[1].segments[0].chunks,
            chunk_count(b.gofs[1].segments[0].len(), 1200)
        );
    }

    #[test]
    fn window_tokens_advance_per_window() {
        let p = EncodeParams {
            window_gofs: 2,
            ..Default::default()
        };
        assert_eq!(p.window_of(1), "TimeWindow_20240314T120000");
        assert_eq!(p.window_of(2), "TimeWindow_20240314T120000");
        assert_eq!(p.window_of(3), "TimeWindow_20240314T120002");
    }
}
