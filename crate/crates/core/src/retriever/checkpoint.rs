//! Binary checkpoint layout (all integers little-endian):
//!
//! ```text
//! magic     8 bytes  "TFRETRV\0"
//! version   u32
//! name_len  u32, then name bytes (UTF-8 base provider name)
//! base_dim  u64
//! out_dim   u64
//! weights   out_dim * base_dim f64, row-major
//! bias      out_dim f64
//! crc32     u32 over every preceding byte
//! ```

use std::path::Path;

use super::RetrieverModel;
use crate::error::{Error, Result};
use crate::similarity::EmbeddingProvider;

const MAGIC: &[u8; 8] = b"TFRETRV\0";
const VERSION: u32 = 1;

pub fn encode_checkpoint(model: &RetrieverModel) -> Vec<u8> {
    let name = model.base_name().as_bytes();
    let mut buf = Vec::with_capacity(40 + name.len() + 8 * (model.weights().len() + model.bias().len()));
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&VERSION.to_le_bytes());
    buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
    buf.extend_from_slice(name);
    buf.extend_from_slice(&(model.base_dim() as u64).to_le_bytes());
    buf.extend_from_slice(&(model.out_dim() as u64).to_le_bytes());
    for v in model.weights().iter().chain(model.bias()) {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    let crc = crc32fast::hash(&buf);
    buf.extend_from_slice(&crc.to_le_bytes());
    buf
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Error::Checkpoint("truncated".into()))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<usize> {
        let v = u64::from_le_bytes(self.take(8)?.try_into().unwrap());
        usize::try_from(v).map_err(|_| Error::Checkpoint("dimension overflow".into()))
    }

    fn f64s(&mut self, n: usize) -> Result<Vec<f64>> {
        let bytes = self.take(
            n.checked_mul(8)
                .ok_or_else(|| Error::Checkpoint("dimension overflow".into()))?,
        )?;
        Ok(bytes
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect())
    }
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<RetrieverModel> {
    if bytes.len() < MAGIC.len() + 4 || &bytes[..MAGIC.len()] != MAGIC {
        return Err(Error::Checkpoint("bad magic".into()));
    }
    let (body, crc) = bytes.split_at(bytes.len() - 4);
    if crc32fast::hash(body) != u32::from_le_bytes(crc.try_into().unwrap()) {
        return Err(Error::Checkpoint("checksum mismatch".into()));
    }
    let mut r = Reader {
        buf: body,
        pos: MAGIC.len(),
    };
    let version = r.u32()?;
    if version != VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let name_len = r.u32()? as usize;
    let name = std::str::from_utf8(r.take(name_len)?)
        .map_err(|_| Error::Checkpoint("provider name is not UTF-8".into()))?
        .to_string();
    let base_dim = r.u64()?;
    let out_dim = r.u64()?;
    let weights = r.f64s(
        out_dim
            .checked_mul(base_dim)
            .ok_or_else(|| Error::Checkpoint("dimension overflow".into()))?,
    )?;
    let bias = r.f64s(out_dim)?;
    if r.pos != body.len() {
        return Err(Error::Checkpoint("trailing bytes".into()));
    }
    RetrieverModel::from_parts(&name, base_dim, out_dim, weights, bias)
}

pub fn save_checkpoint(model: &RetrieverModel, path: &Path) -> Result<()> {
    crate::io::write_atomic(path, &encode_checkpoint(model))
}

pub fn load_checkpoint(path: &Path) -> Result<RetrieverModel> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}

/// Loads and checks that the checkpoint was trained over `provider`.
pub fn load_checkpoint_for<P: EmbeddingProvider + ?Sized>(path: &Path, provider: &P) -> Result<RetrieverModel> {
    let model = load_checkpoint(path)?;
    model.check_base(provider)?;
    Ok(model)
}
