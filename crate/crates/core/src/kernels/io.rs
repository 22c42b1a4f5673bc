//! Tensor files and golden bundles.
//!
//! A tensor file is a concatenation of records, each a little-endian `u64`
//! rank, `rank` `u64` dimensions and then the `f64` values in row-major order.
//! A bundle is a JSON sidecar that names the records of one tensor file and
//! lists the checks to run against them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{KernelError, Tensor};

pub const BUNDLE_FORMAT: &str = "omnigaze-tensors/1";

pub fn encode_tensor(out: &mut Vec<u8>, t: &Tensor) {
    out.extend_from_slice(&(t.rank() as u64).to_le_bytes());
    for &d in t.shape() {
        out.extend_from_slice(&(d as u64).to_le_bytes());
    }
    for v in t.data() {
        out.extend_from_slice(&v.to_le_bytes());
    }
}

pub fn encode_tensors<'a>(tensors: impl IntoIterator<Item = &'a Tensor>) -> Vec<u8> {
    let mut out = Vec::new();
    for t in tensors {
        encode_tensor(&mut out, t);
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl Reader<'_> {
    fn u64(&mut self) -> Result<u64, KernelError> {
        let end = self.pos + 8;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or_else(|| KernelError::Format(format!("truncated at byte {}", self.pos)))?;
        self.pos = end;
        Ok(u64::from_le_bytes(chunk.try_into().unwrap()))
    }

    fn remaining_words(&self) -> usize {
        (self.bytes.len() - self.pos) / 8
    }
}

/// Decodes every record in `bytes`.
pub fn decode_tensors(bytes: &[u8]) -> Result<Vec<Tensor>, KernelError> {
    let mut r = Reader { bytes, pos: 0 };
    let mut out = Vec::new();
    while r.pos < bytes.len() {
        let rank = r.u64()? as usize;
        if rank > r.remaining_words() {
            return Err(KernelError::Format(format!("rank {rank} exceeds remaining data")));
        }
        let shape = (0..rank).map(|_| r.u64().map(|d| d as usize)).collect::<Result<Vec<_>, _>>()?;
        let len = shape.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        let len = match len {
            Some(n) if n <= r.remaining_words() => n,
            _ => return Err(KernelError::Format(format!("shape {shape:?} exceeds remaining data"))),
        };
        let data = (0..len).map(|_| r.u64().map(f64::from_bits)).collect::<Result<Vec<_>, _>>()?;
        out.push(Tensor::new(shape, data)?);
    }
    Ok(out)
}

/// A JSON string or a list of strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Names {
    One(String),
    Many(Vec<String>),
}

impl Names {
    pub fn as_slice(&self) -> &[String] {
        match self {
            Names::One(s) => std::slice::from_ref(s),
            Names::Many(v) => v,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleCheck {
    pub name: String,
    pub op: String,
    /// Operation argument name to tensor name.
    #[serde(default)]
    pub inputs: BTreeMap<String, String>,
    #[serde(default)]
    pub params: serde_json::Map<String, serde_json::Value>,
    pub expected: Names,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleIndex {
    pub format: String,
    /// Tensor file, relative to the sidecar.
    pub data: PathBuf,
    /// Names of the records in file order.
    pub tensors: Vec<String>,
    #[serde(default)]
    pub checks: Vec<BundleCheck>,
}

#[derive(Debug, Clone)]
pub struct Bundle {
    pub index: BundleIndex,
    pub tensors: BTreeMap<String, Tensor>,
}

fn read(path: &Path) -> Result<Vec<u8>, KernelError> {
    fs::read(path).map_err(|source| KernelError::Io { path: path.display().to_string(), source })
}

impl Bundle {
    pub fn load(sidecar: &Path) -> Result<Self, KernelError> {
        let index: BundleIndex =
            serde_json::from_slice(&read(sidecar)?).map_err(|e| KernelError::Format(e.to_string()))?;
        if index.format != BUNDLE_FORMAT {
            return Err(KernelError::Format(format!("unknown format {:?}", index.format)));
        }
        let data_path = sidecar.parent().unwrap_or(Path::new(".")).join(&index.data);
        let decoded = decode_tensors(&read(&data_path)?)?;
        if decoded.len() != index.tensors.len() {
            return Err(KernelError::Format(format!(
                "sidecar names {} tensors, data file holds {}",
                index.tensors.len(),
                decoded.len()
            )));
        }
        let mut tensors = BTreeMap::new();
        for (name, t) in index.tensors.iter().zip(decoded) {
            if tensors.insert(name.clone(), t).is_some() {
                return Err(KernelError::Format(format!("duplicate tensor name {name:?}")));
            }
        }
        Ok(Self { index, tensors })
    }

    /// Builds a bundle whose tensor file will be `data_file`.
    pub fn new(data_file: impl Into<PathBuf>, tensors: Vec<(String, Tensor)>, checks: Vec<BundleCheck>) -> Self {
        let index = BundleIndex {
            format: BUNDLE_FORMAT.to_string(),
            data: data_file.into(),
            tensors: tensors.iter().map(|(n, _)| n.clone()).collect(),
            checks,
        };
        Self { index, tensors: tensors.into_iter().collect() }
    }

    /// Sidecar JSON and tensor file contents, tensors in index order.
    pub fn encode(&self) -> (String, Vec<u8>) {
        let json = serde_json::to_string_pretty(&self.index).expect("bundle index serializes") + "\n";
        let bin = encode_tensors(self.index.tensors.iter().map(|n| &self.tensors[n]));
        (json, bin)
    }

    /// Writes the sidecar to `sidecar` and the tensor file next to it.
    pub fn save(&self, sidecar: &Path) -> Result<(), KernelError> {
        let (json, bin) = self.encode();
        let data_path = sidecar.parent().unwrap_or(Path::new(".")).join(&self.index.data);
        let io = |path: &Path, source| KernelError::Io { path: path.display().to_string(), source };
        fs::write(&data_path, bin).map_err(|e| io(&data_path, e))?;
        fs::write(sidecar, json).map_err(|e| io(sidecar, e))
    }
}
