//! Binary index file.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic      8 bytes   "NQAVIDX\0"
//! version    u32       1
//! dimension  u32
//! count      u64
//! digest     32 bytes  corpus digest (raw SHA-256)
//! meta_len   u64
//! vectors    count * dimension * f32
//! metadata   meta_len bytes, JSON array of chunks
//! checksum   32 bytes  SHA-256 of everything above
//! ```

use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::{Chunk, IndexEntry, IndexError, VectorIndex};

pub const MAGIC: &[u8; 8] = b"NQAVIDX\0";
pub const FORMAT_VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 4 + 8 + 32 + 8;
const CHECKSUM_LEN: usize = 32;

pub fn encode_index(index: &VectorIndex) -> Vec<u8> {
    let chunks: Vec<&Chunk> = index.entries().iter().map(|e| &e.chunk).collect();
    let meta = serde_json::to_vec(&chunks).expect("chunks serialize");
    let digest = hex::decode(index.digest()).expect("digest is hex");
    let mut buf = Vec::with_capacity(HEADER_LEN + index.len() * index.dimension() * 4 + meta.len() + CHECKSUM_LEN);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
    buf.extend_from_slice(&(index.dimension() as u32).to_le_bytes());
    buf.extend_from_slice(&(index.len() as u64).to_le_bytes());
    buf.extend_from_slice(&digest);
    buf.extend_from_slice(&(meta.len() as u64).to_le_bytes());
    for e in index.entries() {
        for x in &e.vector {
            buf.extend_from_slice(&x.to_le_bytes());
        }
    }
    buf.extend_from_slice(&meta);
    let checksum = Sha256::digest(&buf);
    buf.extend_from_slice(&checksum);
    buf
}

fn read_u32(b: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(b[at..at + 4].try_into().unwrap())
}

fn read_u64(b: &[u8], at: usize) -> u64 {
    u64::from_le_bytes(b[at..at + 8].try_into().unwrap())
}

pub fn decode_index(bytes: &[u8]) -> Result<VectorIndex, IndexError> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        let found = hex::encode(&bytes[..bytes.len().min(MAGIC.len())]);
        return Err(IndexError::FormatVersionMismatch { found });
    }
    if bytes.len() < HEADER_LEN + CHECKSUM_LEN {
        return Err(IndexError::ChecksumMismatch);
    }
    let version = read_u32(bytes, 8);
    if version != FORMAT_VERSION {
        return Err(IndexError::FormatVersionMismatch { found: format!("version {version}") });
    }
    let (body, trailer) = bytes.split_at(bytes.len() - CHECKSUM_LEN);
    if Sha256::digest(body).as_slice() != trailer {
        return Err(IndexError::ChecksumMismatch);
    }
    let dimension = read_u32(body, 12) as usize;
    let count = read_u64(body, 16) as usize;
    let digest = hex::encode(&body[24..56]);
    let meta_len = read_u64(body, 56) as usize;
    let vec_bytes = count
        .checked_mul(dimension)
        .and_then(|n| n.checked_mul(4))
        .ok_or_else(|| IndexError::Malformed("vector block size overflows".into()))?;
    if HEADER_LEN + vec_bytes + meta_len != body.len() {
        return Err(IndexError::Malformed("section lengths disagree with file size".into()));
    }
    let vec_block = &body[HEADER_LEN..HEADER_LEN + vec_bytes];
    let meta: Vec<Chunk> = serde_json::from_slice(&body[HEADER_LEN + vec_bytes..])
        .map_err(|e| IndexError::Malformed(format!("metadata: {e}")))?;
    if meta.len() != count {
        return Err(IndexError::Malformed(format!("{count} vectors but {} metadata records", meta.len())));
    }
    let entries = meta
        .into_iter()
        .enumerate()
        .map(|(i, chunk)| {
            let row = &vec_block[i * dimension * 4..(i + 1) * dimension * 4];
            let vector = row.chunks_exact(4).map(|b| f32::from_le_bytes(b.try_into().unwrap())).collect();
            IndexEntry { chunk, vector }
        })
        .collect();
    let index = VectorIndex::from_parts(dimension, entries)?;
    if index.digest() != digest {
        return Err(IndexError::ChecksumMismatch);
    }
    Ok(index)
}

/// Writes the index to `path` via a temporary file and rename.
pub fn persist_index(index: &VectorIndex, path: &Path) -> Result<(), IndexError> {
    let bytes = encode_index(index);
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(&bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)?;
    Ok(())
}

pub fn open_index(path: &Path) -> Result<VectorIndex, IndexError> {
    decode_index(&std::fs::read(path)?)
}
