//! The TSF1 binary format and its JSON twin.
//!
//! Layout: `b"TSF1"`, then little-endian `u32` fields `(n, N, K or 0, d)`,
//! `f64` fields `(L, t_min, t_max, q)` and finally complex samples as `f64`
//! pairs `(re, im)`, ordered by grid point, then scale, then component.
//! `q = ∞` is written as `f64::INFINITY`.

use std::io::{Read, Write};

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{HalfSpaceField, SampledFunction, ScaleGrid, SpatialGrid};
use crate::scalar::Real;
use crate::space::{BanachSpaceDesc, Exponent};

pub const MAGIC: &[u8; 4] = b"TSF1";

/// Either payload a TSF1 stream can carry.
#[derive(Debug, Clone, PartialEq)]
pub enum TsfData<T> {
    Function(SampledFunction<T>),
    Field(HalfSpaceField<T>),
}

/// Header common to the binary and JSON forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TsfHeader {
    pub dim: u32,
    pub n: u32,
    /// Number of scales, 0 for a spatial function.
    pub scales: u32,
    pub components: u32,
    pub period: f64,
    pub t_min: f64,
    pub t_max: f64,
    pub q: f64,
}

impl TsfHeader {
    fn sample_count(&self) -> usize {
        let pts = (self.n as usize).pow(self.dim);
        pts * (self.scales.max(1) as usize) * self.components as usize
    }

    fn grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.dim as usize, self.n as usize, self.period)
    }

    fn space(&self) -> Result<BanachSpaceDesc> {
        BanachSpaceDesc::new(self.components as usize, Exponent::from_f64(self.q)?)
    }
}

fn header_of<T: Real>(data: &TsfData<T>) -> TsfHeader {
    let (grid, scales, space) = match data {
        TsfData::Function(f) => (f.grid, None, f.space),
        TsfData::Field(f) => (f.grid, Some(f.scales), f.space),
    };
    TsfHeader {
        dim: grid.dim as u32,
        n: grid.n as u32,
        scales: scales.map_or(0, |s| s.count as u32),
        components: space.dim as u32,
        period: grid.period,
        t_min: scales.map_or(0.0, |s| s.t_min),
        t_max: scales.map_or(0.0, |s| s.t_max),
        q: space.exponent.as_f64(),
    }
}

/// Samples in file order.
fn file_samples<T: Real>(data: &TsfData<T>) -> Vec<Complex<T>> {
    match data {
        TsfData::Function(f) => f.values.clone(),
        TsfData::Field(f) => {
            let mut out = Vec::with_capacity(f.values.len());
            for i in 0..f.grid.len() {
                for k in 0..f.scales.count {
                    out.extend_from_slice(f.value(i, k));
                }
            }
            out
        }
    }
}

fn assemble<T: Real>(h: &TsfHeader, samples: Vec<Complex<T>>) -> Result<TsfData<T>> {
    if samples.len() != h.sample_count() {
        return Err(Error::Format(format!(
            "expected {} samples, found {}",
            h.sample_count(),
            samples.len()
        )));
    }
    let grid = h.grid()?;
    let space = h.space()?;
    if h.scales == 0 {
        return Ok(TsfData::Function(SampledFunction::new(grid, space, samples)?));
    }
    let scales = ScaleGrid::new(h.t_min, h.t_max, h.scales as usize)?;
    let d = space.dim;
    let kk = scales.count;
    let field = HalfSpaceField::from_fn(grid, scales, space, |i, k, c| samples[(i * kk + k) * d + c]);
    Ok(TsfData::Field(field))
}

pub fn write_tsf<T: Real, W: Write>(mut w: W, data: &TsfData<T>) -> Result<()> {
    let h = header_of(data);
    let mut buf = Vec::with_capacity(52 + 16 * h.sample_count());
    buf.extend_from_slice(MAGIC);
    for v in [h.dim, h.n, h.scales, h.components] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for v in [h.period, h.t_min, h.t_max, h.q] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    for z in file_samples(data) {
        buf.extend_from_slice(&z.re.to_f64_lossy().to_le_bytes());
        buf.extend_from_slice(&z.im.to_f64_lossy().to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_tsf<T: Real, R: Read>(mut r: R) -> Result<TsfData<T>> {
    let mut bytes = Vec::new();
    r.read_to_end(&mut bytes)?;
    if bytes.len() < 52 || &bytes[..4] != MAGIC {
        return Err(Error::Format("missing TSF1 magic or truncated header".into()));
    }
    let u = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
    let f = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
    let h = TsfHeader {
        dim: u(4),
        n: u(8),
        scales: u(12),
        components: u(16),
        period: f(20),
        t_min: f(28),
        t_max: f(36),
        q: f(44),
    };
    if h.dim == 0 || h.dim > 2 || h.n == 0 || h.components == 0 {
        return Err(Error::Format(format!("invalid header {h:?}")));
    }
    let body = &bytes[52..];
    if body.len() != 16 * h.sample_count() {
        return Err(Error::Format(format!(
            "payload is {} bytes, header implies {}",
            body.len(),
            16 * h.sample_count()
        )));
    }
    let samples = body
        .chunks_exact(16)
        .map(|c| {
            Complex::new(
                T::lit(f64::from_le_bytes(c[..8].try_into().unwrap())),
                T::lit(f64::from_le_bytes(c[8..].try_into().unwrap())),
            )
        })
        .collect();
    assemble(&h, samples)
}

pub fn save_tsf<T: Real>(path: impl AsRef<std::path::Path>, data: &TsfData<T>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_tsf(std::io::BufWriter::new(file), data)
}

pub fn load_tsf<T: Real>(path: impl AsRef<std::path::Path>) -> Result<TsfData<T>> {
    read_tsf(std::fs::File::open(path)?)
}

#[derive(Serialize, Deserialize)]
struct TsfJson {
    format: String,
    header: TsfHeader,
    /// `[re, im]` pairs in file order.
    samples: Vec<[f64; 2]>,
}

/// JSON text form with the same header and sample order. `q = ∞` is written as the string `"inf"`.
pub fn to_json<T: Real>(data: &TsfData<T>) -> Result<String> {
    let header = header_of(data);
    let doc = TsfJson {
        format: "TSF1".into(),
        header,
        samples: file_samples(data)
            .iter()
            .map(|z| [z.re.to_f64_lossy(), z.im.to_f64_lossy()])
            .collect(),
    };
    let mut v = serde_json::to_value(&doc).map_err(|e| Error::Format(e.to_string()))?;
    if header.q.is_infinite() {
        v["header"]["q"] = serde_json::Value::String("inf".into());
    }
    serde_json::to_string(&v).map_err(|e| Error::Format(e.to_string()))
}

pub fn from_json<T: Real>(text: &str) -> Result<TsfData<T>> {
    let mut v: serde_json::Value = serde_json::from_str(text).map_err(|e| Error::Format(e.to_string()))?;
    if v["header"]["q"].as_str() == Some("inf") {
        v["header"]["q"] = serde_json::Value::from(f64::MAX);
    }
    let mut doc: TsfJson = serde_json::from_value(v).map_err(|e| Error::Format(e.to_string()))?;
    if doc.format != "TSF1" {
        return Err(Error::Format(format!("unknown format tag {}", doc.format)));
    }
    if doc.header.q == f64::MAX {
        doc.header.q = f64::INFINITY;
    }
    let samples = doc
        .samples
        .iter()
        .map(|p| Complex::new(T::lit(p[0]), T::lit(p[1])))
        .collect();
    assemble(&doc.header, samples)
}
