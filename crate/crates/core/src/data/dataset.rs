//! Labeled audio/visual embedding pairs and the `SCFE` binary format.
//!
//! Layout, all integers and floats little-endian:
//!
//! ```text
//! header : "SCFE" | version u32 | count u64 | audio_dim u32 | visual_dim u32
//! record : clip_len u32 | clip bytes | group_len u32 | group bytes | label u8
//!          | audio_dim x f32 | visual_dim x f32
//! ```

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use crate::error::{Result, ScfError};
use crate::trainer::Sample;

pub const MAGIC: &[u8; 4] = b"SCFE";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 8 + 4 + 4;

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingInstance {
    pub clip_id: String,
    pub group_id: String,
    /// 1 = speaking, 0 = not speaking.
    pub label: u8,
    pub audio: Vec<f32>,
    pub visual: Vec<f32>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingDataset {
    pub audio_dim: usize,
    pub visual_dim: usize,
    pub instances: Vec<EmbeddingInstance>,
}

impl EmbeddingDataset {
    pub fn new(audio_dim: usize, visual_dim: usize) -> Self {
        Self {
            audio_dim,
            visual_dim,
            instances: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        let mut clips = HashSet::new();
        for (i, inst) in self.instances.iter().enumerate() {
            if inst.audio.len() != self.audio_dim || inst.visual.len() != self.visual_dim {
                return Err(ScfError::input(format!(
                    "instance {i} ('{}') has dims ({}, {}), dataset declares ({}, {})",
                    inst.clip_id,
                    inst.audio.len(),
                    inst.visual.len(),
                    self.audio_dim,
                    self.visual_dim
                )));
            }
            if inst.group_id.is_empty() {
                return Err(ScfError::input(format!("instance {i} ('{}') has an empty group id", inst.clip_id)));
            }
            if inst.label > 1 {
                return Err(ScfError::input(format!("instance {i} has label {}", inst.label)));
            }
            if !clips.insert(inst.clip_id.as_str()) {
                return Err(ScfError::input(format!("duplicate clip id '{}'", inst.clip_id)));
            }
        }
        Ok(())
    }

    /// Sorted distinct group ids.
    pub fn groups(&self) -> Vec<String> {
        let mut g: Vec<String> = self.instances.iter().map(|i| i.group_id.clone()).collect();
        g.sort();
        g.dedup();
        g
    }

    pub fn subset(&self, indices: &[usize]) -> Self {
        Self {
            audio_dim: self.audio_dim,
            visual_dim: self.visual_dim,
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    /// Training samples with stimuli in (audio, visual) order.
    pub fn samples(&self) -> Vec<Sample> {
        self.instances.iter().map(EmbeddingInstance::sample).collect()
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        self.validate()?;
        let record_floats = 4 * (self.audio_dim + self.visual_dim);
        let mut out = Vec::with_capacity(HEADER_LEN + self.len() * (record_floats + 32));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.len() as u64).to_le_bytes());
        out.extend_from_slice(&dim_u32(self.audio_dim)?.to_le_bytes());
        out.extend_from_slice(&dim_u32(self.visual_dim)?.to_le_bytes());
        for inst in &self.instances {
            for s in [&inst.clip_id, &inst.group_id] {
                out.extend_from_slice(&dim_u32(s.len())?.to_le_bytes());
                out.extend_from_slice(s.as_bytes());
            }
            out.push(inst.label);
            for v in inst.audio.iter().chain(&inst.visual) {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Ok(out)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(4, "magic")?;
        if magic != MAGIC {
            return Err(ScfError::input(format!("offset 0: bad magic {magic:?}, expected \"SCFE\"")));
        }
        let version = r.u32("version")?;
        if version != FORMAT_VERSION {
            return Err(ScfError::input(format!(
                "offset 4: unsupported format version {version}, expected {FORMAT_VERSION}"
            )));
        }
        let count = r.u64("instance count")?;
        let audio_dim = r.u32("audio dimension")? as usize;
        let visual_dim = r.u32("visual dimension")? as usize;
        let mut ds = Self::new(audio_dim, visual_dim);
        ds.instances.reserve(count.min(1 << 20) as usize);
        for i in 0..count {
            let clip_id = r.string(&format!("record {i} clip id"))?;
            let group_id = r.string(&format!("record {i} group id"))?;
            let label = r.take(1, &format!("record {i} label"))?[0];
            let audio = r.floats(audio_dim, &format!("record {i} audio"))?;
            let visual = r.floats(visual_dim, &format!("record {i} visual"))?;
            ds.instances.push(EmbeddingInstance {
                clip_id,
                group_id,
                label,
                audio,
                visual,
            });
        }
        if r.pos != bytes.len() {
            return Err(ScfError::input(format!(
                "offset {}: {} trailing bytes after {count} records",
                r.pos,
                bytes.len() - r.pos
            )));
        }
        ds.validate()?;
        Ok(ds)
    }
}

impl EmbeddingInstance {
    pub fn sample(&self) -> Sample {
        Sample {
            inputs: vec![widen(&self.audio), widen(&self.visual)],
            label: f64::from(self.label),
        }
    }
}

fn widen(v: &[f32]) -> Vec<f64> {
    v.iter().map(|&x| f64::from(x)).collect()
}

fn dim_u32(n: usize) -> Result<u32> {
    u32::try_from(n).map_err(|_| ScfError::input(format!("length {n} does not fit the format")))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize, what: &str) -> Result<&'a [u8]> {
        let available = self.bytes.len() - self.pos;
        if available < n {
            return Err(ScfError::input(format!(
                "truncated at offset {} reading {what}: expected {n} bytes, found {available}",
                self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self, what: &str) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4, what)?.try_into().unwrap()))
    }

    fn u64(&mut self, what: &str) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8, what)?.try_into().unwrap()))
    }

    fn string(&mut self, what: &str) -> Result<String> {
        let len = self.u32(what)? as usize;
        let start = self.pos;
        let raw = self.take(len, what)?;
        String::from_utf8(raw.to_vec())
            .map_err(|_| ScfError::input(format!("offset {start}: {what} is not valid UTF-8")))
    }

    fn floats(&mut self, n: usize, what: &str) -> Result<Vec<f32>> {
        let raw = self.take(n * 4, what)?;
        Ok(raw
            .chunks_exact(4)
            .map(|c| f32::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn write_dataset(dataset: &EmbeddingDataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, dataset.to_bytes()?).map_err(|e| ScfError::io(path, e))
}

pub fn read_dataset(path: impl AsRef<Path>) -> Result<EmbeddingDataset> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| ScfError::io(path, e))?;
    EmbeddingDataset::from_bytes(&bytes)
}
