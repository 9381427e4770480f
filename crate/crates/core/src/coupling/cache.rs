//! Little-endian binary tensor cache.
//!
//! ```text
//! magic    8 bytes  "CRTENSOR"
//! version  u32
//! family   u32      0 = holomorphic, 1 = radial, 2 = eigenspace
//! level    u32      eigenspace level (0 otherwise)
//! cutoff   u32
//! constant f64
//! count    u64
//! records  count × (u32 n1, u32 n2, u32 n3, u32 n4, f64 weight)
//! checksum 32 bytes SHA-256 of everything above
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{build_tensor, convention_constant, CouplingTensor, TensorEntry};
use crate::basis::BasisFamily;
use crate::error::{Error, Result};

pub const CACHE_FORMAT_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"CRTENSOR";
const HEADER_LEN: usize = 8 + 4 * 4 + 8 + 8;
const RECORD_LEN: usize = 4 * 4 + 8;
const CHECKSUM_LEN: usize = 32;

fn family_code(family: BasisFamily) -> (u32, u32) {
    match family {
        BasisFamily::Holomorphic => (0, 0),
        BasisFamily::Radial => (1, 0),
        BasisFamily::Eigenspace { level } => (2, level as u32),
    }
}

pub fn encode(tensor: &CouplingTensor) -> Vec<u8> {
    let (code, level) = family_code(tensor.family());
    let mut buf = Vec::with_capacity(HEADER_LEN + RECORD_LEN * tensor.entries().len() + CHECKSUM_LEN);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&CACHE_FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&code.to_le_bytes());
    buf.extend_from_slice(&level.to_le_bytes());
    buf.extend_from_slice(&(tensor.cutoff() as u32).to_le_bytes());
    buf.extend_from_slice(&tensor.constant().to_le_bytes());
    buf.extend_from_slice(&(tensor.entries().len() as u64).to_le_bytes());
    for e in tensor.entries() {
        for v in e.n {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        buf.extend_from_slice(&e.weight.to_le_bytes());
    }
    let digest = Sha256::digest(&buf);
    buf.extend_from_slice(&digest);
    buf
}

pub fn decode(buf: &[u8]) -> Result<CouplingTensor> {
    let bad = |msg: String| Error::Cache(msg);
    if buf.len() < HEADER_LEN + CHECKSUM_LEN || &buf[..8] != MAGIC {
        return Err(bad("not a tensor cache file".into()));
    }
    let (body, checksum) = buf.split_at(buf.len() - CHECKSUM_LEN);
    if Sha256::digest(body).as_slice() != checksum {
        return Err(bad("checksum mismatch".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(body[o..o + 4].try_into().unwrap());
    let version = u32_at(8);
    if version != CACHE_FORMAT_VERSION {
        return Err(bad(format!("unsupported format version {version}")));
    }
    let family = match (u32_at(12), u32_at(16)) {
        (0, _) => BasisFamily::Holomorphic,
        (1, _) => BasisFamily::Radial,
        (2, level) => BasisFamily::Eigenspace { level: level as usize },
        (code, _) => return Err(bad(format!("unknown family code {code}"))),
    };
    let cutoff = u32_at(20) as usize;
    let constant = f64::from_le_bytes(body[24..32].try_into().unwrap());
    let count = u64::from_le_bytes(body[32..40].try_into().unwrap()) as usize;
    if body.len() != HEADER_LEN + count * RECORD_LEN {
        return Err(bad(format!("expected {count} records, file length disagrees")));
    }
    let entries = body[HEADER_LEN..]
        .chunks_exact(RECORD_LEN)
        .map(|r| TensorEntry {
            n: [0, 1, 2, 3].map(|i| u32::from_le_bytes(r[4 * i..4 * i + 4].try_into().unwrap())),
            weight: f64::from_le_bytes(r[16..24].try_into().unwrap()),
        })
        .collect();
    Ok(CouplingTensor::from_parts(family, cutoff, constant, entries))
}

pub fn write_tensor(tensor: &CouplingTensor, path: &Path) -> Result<()> {
    fs::write(path, encode(tensor))?;
    Ok(())
}

pub fn read_tensor(path: &Path) -> Result<CouplingTensor> {
    decode(&fs::read(path)?)
}

fn cache_path(dir: &Path, family: BasisFamily, cutoff: usize, constant: f64) -> PathBuf {
    dir.join(format!("tensor-v{CACHE_FORMAT_VERSION}-{}-{cutoff}-{:016x}.bin", family.tag(), constant.to_bits()))
}

/// Cached `build_tensor`, keyed by (family, cutoff, convention constant).
/// A file that fails its checksum is rebuilt.
pub fn load_or_build(dir: &Path, family: BasisFamily, cutoff: usize) -> Result<CouplingTensor> {
    let path = cache_path(dir, family, cutoff, convention_constant());
    if let Ok(t) = read_tensor(&path) {
        if t.family() == family && t.cutoff() == family.max_index(cutoff) {
            return Ok(t);
        }
    }
    let t = build_tensor(family, cutoff)?;
    fs::create_dir_all(dir)?;
    write_tensor(&t, &path)?;
    Ok(t)
}
