//! Binary checkpoint format for trained parameters.
//!
//! Layout (all integers little-endian):
//!
//! ```text
//! magic            8 bytes   b"KLNCKPT1"
//! descriptor_len   u32
//! descriptor       UTF-8 bytes (ModelSpec::descriptor)
//! tensor_count     u32
//! per tensor:      ndim u32, dims u32 × ndim, data f32 × prod(dims)
//! ```
//!
//! Tensors appear in parameter order: (weight, bias) for each conv block,
//! then for the two dense layers. Loading verifies the descriptor against
//! the expected spec and every shape against the parameter layout.

use std::path::Path;

use kline_core::nn::{Grads, ModelSpec, Params};

use crate::fsutil::atomic_write;
use crate::AppError;

pub const MAGIC: &[u8; 8] = b"KLNCKPT1";

pub fn save(path: &Path, spec: &ModelSpec, params: &Params<f32>) -> Result<(), AppError> {
    let descriptor = spec.descriptor();
    let mut bytes = Vec::with_capacity(16 + descriptor.len() + params.numel() * 4);
    bytes.extend_from_slice(MAGIC);
    bytes.extend_from_slice(&(descriptor.len() as u32).to_le_bytes());
    bytes.extend_from_slice(descriptor.as_bytes());
    let tensor_count = params.layers.len() * 2;
    bytes.extend_from_slice(&(tensor_count as u32).to_le_bytes());
    for (w, b) in &params.layers {
        for t in [w, b] {
            bytes.extend_from_slice(&(t.shape().len() as u32).to_le_bytes());
            for dim in t.shape() {
                bytes.extend_from_slice(&(*dim as u32).to_le_bytes());
            }
            for v in t.data() {
                bytes.extend_from_slice(&v.to_le_bytes());
            }
        }
    }
    atomic_write(path, &bytes)?;
    Ok(())
}

pub fn load(path: &Path, expected: &ModelSpec) -> Result<Params<f32>, AppError> {
    let bytes = std::fs::read(path)
        .map_err(|e| AppError::data(format!("cannot read checkpoint {}: {e}", path.display())))?;
    let mut r = Reader { bytes: &bytes, pos: 0, path };

    if r.take(8)? != MAGIC {
        return Err(r.corrupt("bad magic"));
    }
    let desc_len = r.u32()? as usize;
    let descriptor = std::str::from_utf8(r.take(desc_len)?)
        .map_err(|_| r.corrupt("descriptor is not UTF-8"))?
        .to_string();
    if descriptor != expected.descriptor() {
        return Err(AppError::data(format!(
            "checkpoint spec mismatch: file has `{descriptor}`, expected `{}`",
            expected.descriptor()
        )));
    }

    let mut params: Params<f32> = Grads::zeros_like(expected);
    let tensor_count = r.u32()? as usize;
    if tensor_count != params.layers.len() * 2 {
        return Err(r.corrupt("wrong tensor count"));
    }
    for pair in &mut params.layers {
        for t in [&mut pair.0, &mut pair.1] {
            let ndim = r.u32()? as usize;
            let mut dims = Vec::with_capacity(ndim);
            for _ in 0..ndim {
                dims.push(r.u32()? as usize);
            }
            if dims != t.shape() {
                return Err(AppError::data(format!(
                    "checkpoint tensor shape {:?} does not match expected {:?}",
                    dims,
                    t.shape()
                )));
            }
            let n = t.numel();
            let raw = r.take(n * 4)?;
            for (i, chunk) in raw.chunks_exact(4).enumerate() {
                t.data_mut()[i] = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
            }
        }
    }
    if r.pos != bytes.len() {
        return Err(r.corrupt("trailing bytes"));
    }
    Ok(params)
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    path: &'a Path,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], AppError> {
        if self.pos + n > self.bytes.len() {
            return Err(self.corrupt("truncated"));
        }
        let slice = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(slice)
    }

    fn u32(&mut self) -> Result<u32, AppError> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn corrupt(&self, what: &str) -> AppError {
        AppError::data(format!("corrupt checkpoint {}: {what}", self.path.display()))
    }
}
