//! Named parameter tensors and the `ARUW` weights file format:
//!
//! ```text
//! "ARUW"                      4 bytes
//! tensor count                u32 LE
//! per tensor, sorted by name:
//!   name length, name         u32 LE, UTF-8 bytes
//!   rank, dims                u32 LE, rank × u32 LE
//!   values                    f32 LE, row-major
//! ```

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{NplError, Result};

pub const WEIGHTS_MAGIC: &[u8; 4] = b"ARUW";

/// A dense parameter tensor of any rank.
#[derive(Debug, Clone, PartialEq)]
pub struct Param {
    dims: Vec<usize>,
    data: Vec<f32>,
}

impl Param {
    pub fn new(dims: Vec<usize>, data: Vec<f32>) -> Result<Self> {
        let n: usize = dims.iter().product();
        if n != data.len() {
            return Err(NplError::Shape(format!("dims {dims:?} need {n} values, got {}", data.len())));
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Self {
        let n = dims.iter().product();
        Self { dims, data: vec![0.0; n] }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn data(&self) -> &[f32] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f32] {
        &mut self.data
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }
}

/// Parameters keyed by slot name; iteration is in name order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightStore {
    params: BTreeMap<String, Param>,
}

impl WeightStore {
    pub fn new() -> Self {
        Self::default()
    }

    /// Inserts a tensor, rejecting a name already present.
    pub fn insert(&mut self, name: impl Into<String>, param: Param) -> Result<()> {
        let name = name.into();
        if self.params.contains_key(&name) {
            return Err(NplError::DuplicateName(name));
        }
        self.params.insert(name, param);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Result<&Param> {
        self.params.get(name).ok_or_else(|| NplError::MissingWeight(name.to_string()))
    }

    /// The tensor under `name`, which must have exactly `dims`.
    pub fn expect(&self, name: &str, dims: &[usize]) -> Result<&Param> {
        let p = self.get(name)?;
        if p.dims() != dims {
            return Err(NplError::WeightShape { name: name.to_string(), expected: dims.to_vec(), got: p.dims().to_vec() });
        }
        Ok(p)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Param> {
        self.params.get_mut(name)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &Param)> {
        self.params.iter().map(|(k, v)| (k.as_str(), v))
    }

    pub fn scalar_count(&self) -> usize {
        self.params.values().map(Param::len).sum()
    }

    /// Checks that every `(name, dims)` slot is present with its shape.
    pub fn check_slots(&self, slots: &[(String, Vec<usize>)]) -> Result<()> {
        for (name, dims) in slots {
            self.expect(name, dims)?;
        }
        Ok(())
    }

    /// He-normal initialization for every slot: kernels drawn from
    /// `N(0, 2 / fan_in)` with `fan_in = kh·kw·in`, biases zero.
    pub fn he_init(slots: &[(String, Vec<usize>)], seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut store = Self::new();
        for (name, dims) in slots {
            let mut p = Param::zeros(dims.clone());
            if dims.len() == 4 {
                let fan_in = (dims[0] * dims[1] * dims[2]).max(1) as f64;
                let normal = Normal::new(0.0, (2.0 / fan_in).sqrt()).expect("positive std");
                for v in p.data_mut() {
                    *v = normal.sample(&mut rng) as f32;
                }
            }
            store.insert(name.clone(), p).expect("slot names are unique");
        }
        store
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(8 + 4 * self.scalar_count());
        out.extend_from_slice(WEIGHTS_MAGIC);
        out.extend_from_slice(&(self.params.len() as u32).to_le_bytes());
        for (name, p) in &self.params {
            out.extend_from_slice(&(name.len() as u32).to_le_bytes());
            out.extend_from_slice(name.as_bytes());
            out.extend_from_slice(&(p.dims.len() as u32).to_le_bytes());
            for &d in &p.dims {
                out.extend_from_slice(&(d as u32).to_le_bytes());
            }
            for &v in &p.data {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        if r.take(4).ok() != Some(&WEIGHTS_MAGIC[..]) {
            return Err(NplError::BadMagic { expected: "ARUW" });
        }
        let count = r.u32()?;
        let mut store = Self::new();
        for _ in 0..count {
            let len = r.u32()? as usize;
            let name = std::str::from_utf8(r.take(len)?).map_err(|_| NplError::BadName)?.to_string();
            let rank = r.u32()? as usize;
            let dims = (0..rank).map(|_| r.u32().map(|d| d as usize)).collect::<Result<Vec<_>>>()?;
            let n = dims.iter().try_fold(1usize, |a, &d| a.checked_mul(d)).ok_or_else(|| r.truncated(usize::MAX))?;
            let raw = r.take(n.checked_mul(4).ok_or_else(|| r.truncated(usize::MAX))?)?;
            let data = raw.chunks_exact(4).map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]])).collect();
            store.insert(name, Param { dims, data })?;
        }
        if r.pos != bytes.len() {
            return Err(NplError::TrailingBytes(bytes.len() - r.pos));
        }
        Ok(store)
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn truncated(&self, needed: usize) -> NplError {
        NplError::Truncated { offset: self.pos, needed, available: self.bytes.len() - self.pos }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.bytes.len() - self.pos < n {
            return Err(self.truncated(n));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}
