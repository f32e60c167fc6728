//! Versioned binary checkpoint container.
//!
//! Layout: 8-byte magic, `u32` format version, `u64` header length, a JSON
//! header, then each named tensor group as little-endian `f64`s in header
//! order, then a SHA-256 digest of all preceding bytes.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dataset::Alphabet;
use crate::error::{Error, Result};
use crate::network::{NetworkDims, NetworkParams};
use crate::scalar::Scalar;

pub const MAGIC: &[u8; 8] = b"WORDOCR\0";
pub const FORMAT_VERSION: u32 = 1;
const DIGEST_LEN: usize = 32;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct GroupHeader {
    name: String,
    len: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
struct Header {
    scalar: String,
    dims: NetworkDims,
    alphabet: Alphabet,
    groups: Vec<GroupHeader>,
    meta: serde_json::Value,
}

/// Decoded checkpoint: network shape, label set, free-form metadata and
/// named parameter vectors in storage order.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    /// Scalar type the values were trained in.
    pub scalar: String,
    pub dims: NetworkDims,
    pub alphabet: Alphabet,
    pub meta: serde_json::Value,
    pub groups: Vec<(String, Vec<f64>)>,
}

impl Checkpoint {
    pub fn new<T: Scalar>(dims: NetworkDims, alphabet: Alphabet, meta: serde_json::Value) -> Self {
        Self {
            scalar: T::NAME.into(),
            dims,
            alphabet,
            meta,
            groups: Vec::new(),
        }
    }

    pub fn push_params<T: Scalar>(&mut self, name: &str, params: &NetworkParams<T>) {
        let values = params.flat().into_iter().map(Scalar::as_f64).collect();
        self.groups.push((name.to_string(), values));
    }

    pub fn group(&self, name: &str) -> Option<&[f64]> {
        self.groups.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }

    /// Rebuilds the named parameter group with this checkpoint's dims.
    pub fn params<T: Scalar>(&self, name: &str) -> Result<NetworkParams<T>> {
        let values = self
            .group(name)
            .ok_or_else(|| Error::Checkpoint(format!("missing tensor group {name}")))?;
        let mut params = NetworkParams::<T>::zeros(self.dims);
        let cast: Vec<T> = values.iter().map(|&v| T::of(v)).collect();
        params
            .set_flat(&cast)
            .map_err(|e| Error::Checkpoint(format!("group {name}: {e}")))?;
        Ok(params)
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let header = Header {
            scalar: self.scalar.clone(),
            dims: self.dims,
            alphabet: self.alphabet.clone(),
            groups: self
                .groups
                .iter()
                .map(|(n, v)| GroupHeader {
                    name: n.clone(),
                    len: v.len(),
                })
                .collect(),
            meta: self.meta.clone(),
        };
        let header = serde_json::to_vec(&header)?;
        let payload: usize = self.groups.iter().map(|(_, v)| v.len() * 8).sum();
        let mut buf = Vec::with_capacity(20 + header.len() + payload + DIGEST_LEN);
        buf.extend_from_slice(MAGIC);
        buf.extend_from_slice(&FORMAT_VERSION.to_le_bytes());
        buf.extend_from_slice(&(header.len() as u64).to_le_bytes());
        buf.extend_from_slice(&header);
        for (_, values) in &self.groups {
            for v in values {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        let digest = Sha256::digest(&buf);
        buf.extend_from_slice(&digest);
        Ok(buf)
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let corrupt = |m: &str| Error::Checkpoint(m.to_string());
        if bytes.len() < 20 + DIGEST_LEN {
            return Err(corrupt("file too short"));
        }
        if &bytes[..8] != MAGIC {
            return Err(corrupt("bad magic"));
        }
        let version = u32::from_le_bytes(bytes[8..12].try_into().expect("4 bytes"));
        if version != FORMAT_VERSION {
            return Err(Error::Checkpoint(format!(
                "format version {version}, this build reads {FORMAT_VERSION}"
            )));
        }
        let (body, digest) = bytes.split_at(bytes.len() - DIGEST_LEN);
        if Sha256::digest(body).as_slice() != digest {
            return Err(corrupt("checksum mismatch (truncated or corrupted)"));
        }
        let header_len = u64::from_le_bytes(body[12..20].try_into().expect("8 bytes")) as usize;
        let header_end = 20usize
            .checked_add(header_len)
            .filter(|&e| e <= body.len())
            .ok_or_else(|| corrupt("header length exceeds file"))?;
        let header: Header = serde_json::from_slice(&body[20..header_end])?;

        let mut offset = header_end;
        let mut groups = Vec::with_capacity(header.groups.len());
        for g in &header.groups {
            let end = offset + g.len * 8;
            if end > body.len() {
                return Err(Error::Checkpoint(format!("group {} truncated", g.name)));
            }
            let values = body[offset..end]
                .chunks_exact(8)
                .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
                .collect();
            groups.push((g.name.clone(), values));
            offset = end;
        }
        if offset != body.len() {
            return Err(corrupt("trailing bytes after tensor data"));
        }
        Ok(Self {
            scalar: header.scalar,
            dims: header.dims,
            alphabet: header.alphabet,
            meta: header.meta,
            groups,
        })
    }
}

/// Writes atomically: a temporary sibling file renamed over `path`.
pub fn checkpoint_save(path: &Path, ckpt: &Checkpoint) -> Result<()> {
    let bytes = ckpt.to_bytes()?;
    let tmp = path.with_extension("tmp");
    {
        let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(&tmp, e))?;
        f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    }
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn checkpoint_load(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(&bytes)
}
