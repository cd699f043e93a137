//! `KNM1` model checkpoints.
//!
//! Layout, all integers little-endian:
//!
//! ```text
//! b"KNM1"
//! u64            creation seed
//! u32 u32        input channels, input length
//! u32 + bytes    layer specification, UTF-8, one layer per line
//! u32            tensor count
//! per tensor:    u16 + bytes name ("<layer>.<param>"), u8 rank,
//!                u32 per dimension, f64 per value
//! ```

use std::fs;
use std::path::Path;

use super::layers::LayerSpec;
use super::params::{ModelParams, Param, ParamSet};
use super::tensor::Tensor;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"KNM1";

#[derive(Debug, Clone, PartialEq)]
pub struct Checkpoint {
    pub seed: u64,
    /// `(channels, length)` of one input epoch.
    pub input_shape: [usize; 2],
    pub spec: Vec<LayerSpec>,
    pub params: ModelParams,
}

impl Checkpoint {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&self.seed.to_le_bytes());
        for d in self.input_shape {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        let text: String = self.spec.iter().map(|l| format!("{l}\n")).collect();
        out.extend_from_slice(&(text.len() as u32).to_le_bytes());
        out.extend_from_slice(text.as_bytes());
        let tensors: Vec<_> = self.params.iter().collect();
        out.extend_from_slice(&(tensors.len() as u32).to_le_bytes());
        for (layer, name, t) in tensors {
            let name = format!("{layer}.{name}");
            out.extend_from_slice(&(name.len() as u16).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.push(t.shape().len() as u8);
            for d in t.shape() {
                out.extend_from_slice(&(*d as u32).to_le_bytes());
            }
            for v in t.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4)? != MAGIC {
            return Err(Error::Checkpoint("missing KNM1 header".into()));
        }
        let seed = r.u64()?;
        let input_shape = [r.u32()? as usize, r.u32()? as usize];
        let len = r.u32()? as usize;
        let text = std::str::from_utf8(r.take(len)?)
            .map_err(|_| Error::Checkpoint("layer specification is not UTF-8".into()))?;
        let spec: Vec<LayerSpec> = text
            .lines()
            .map(|l| l.parse().map_err(|e: Error| Error::Checkpoint(e.to_string())))
            .collect::<Result<_>>()?;
        let expected = ParamSet::zeros_for(&spec);
        let count = r.u32()? as usize;
        let want: usize = expected.layers().iter().map(Vec::len).sum();
        if count != want {
            return Err(Error::Checkpoint(format!("{count} tensors, expected {want}")));
        }
        let mut layers: Vec<Vec<Param>> = Vec::with_capacity(spec.len());
        for (li, ps) in expected.layers().iter().enumerate() {
            let mut out = Vec::with_capacity(ps.len());
            for p in ps {
                let nlen = r.u16()? as usize;
                let name = std::str::from_utf8(r.take(nlen)?)
                    .map_err(|_| Error::Checkpoint("tensor name is not UTF-8".into()))?;
                let want_name = format!("{li}.{}", p.name);
                if name != want_name {
                    return Err(Error::Checkpoint(format!(
                        "tensor `{name}` where `{want_name}` was expected"
                    )));
                }
                let rank = r.take(1)?[0] as usize;
                let shape: Vec<usize> =
                    (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<_>>()?;
                if shape != p.tensor.shape() {
                    return Err(Error::Checkpoint(format!(
                        "tensor `{name}` has shape {shape:?}, expected {:?}",
                        p.tensor.shape()
                    )));
                }
                let n: usize = shape.iter().product();
                let data: Vec<f64> = (0..n).map(|_| r.f64()).collect::<Result<_>>()?;
                out.push(Param { name: p.name, tensor: Tensor::new(shape, data)? });
            }
            layers.push(out);
        }
        if r.pos != bytes.len() {
            return Err(Error::Checkpoint("trailing bytes after the last tensor".into()));
        }
        Ok(Self { seed, input_shape, spec, params: ModelParams(ParamSet::from_layers(layers)) })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_bytes()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::from_bytes(&bytes)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self.pos.checked_add(n).filter(|e| *e <= self.bytes.len());
        let end = end.ok_or_else(|| Error::Checkpoint("truncated file".into()))?;
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}
