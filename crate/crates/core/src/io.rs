//! Raw 64-bit float files.
//!
//! Layout (all little endian): the 8-byte magic `MLRECF64`, `u32` number of
//! dimensions, `u32` flags (bit 0 set for complex data), one `u64` per
//! dimension, then the samples row-major. Complex samples are stored as
//! interleaved `(re, im)` pairs.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::ImageGrid;

const MAGIC: &[u8; 8] = b"MLRECF64";
const FLAG_COMPLEX: u32 = 1;
const MAX_DIMS: u32 = 8;

/// An n-dimensional array of real or complex samples.
#[derive(Clone, Debug, PartialEq)]
pub struct RawArray {
    pub dims: Vec<u64>,
    pub complex: bool,
    /// Real samples, or interleaved `(re, im)` pairs when `complex`.
    pub data: Vec<f64>,
}

impl RawArray {
    pub fn real(dims: Vec<u64>, data: Vec<f64>) -> Result<Self> {
        let a = Self { dims, complex: false, data };
        a.check()?;
        Ok(a)
    }

    pub fn from_complex(dims: Vec<u64>, data: &[Complex64]) -> Result<Self> {
        let flat = data.iter().flat_map(|z| [z.re, z.im]).collect();
        let a = Self { dims, complex: true, data: flat };
        a.check()?;
        Ok(a)
    }

    /// Number of samples (complex pairs count once).
    pub fn count(&self) -> usize {
        self.dims.iter().product::<u64>() as usize
    }

    /// Samples as complex numbers; real arrays get zero imaginary parts.
    pub fn to_complex(&self) -> Vec<Complex64> {
        if self.complex {
            self.data.chunks_exact(2).map(|p| Complex64::new(p[0], p[1])).collect()
        } else {
            self.data.iter().map(|&x| Complex64::new(x, 0.0)).collect()
        }
    }

    fn check(&self) -> Result<()> {
        if self.dims.is_empty() || self.dims.len() > MAX_DIMS as usize {
            return Err(Error::Format(format!("unsupported dimension count {}", self.dims.len())));
        }
        let want = self.count() * if self.complex { 2 } else { 1 };
        if want != self.data.len() {
            return Err(Error::SizeMismatch { expected: want, found: self.data.len() });
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        self.check()?;
        w.write_all(MAGIC)?;
        w.write_all(&(self.dims.len() as u32).to_le_bytes())?;
        w.write_all(&(if self.complex { FLAG_COMPLEX } else { 0 }).to_le_bytes())?;
        for d in &self.dims {
            w.write_all(&d.to_le_bytes())?;
        }
        for x in &self.data {
            w.write_all(&x.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Format("bad magic, not a raw float file".into()));
        }
        let ndims = read_u32(&mut r)?;
        if ndims == 0 || ndims > MAX_DIMS {
            return Err(Error::Format(format!("unsupported dimension count {ndims}")));
        }
        let flags = read_u32(&mut r)?;
        if flags & !FLAG_COMPLEX != 0 {
            return Err(Error::Format(format!("unknown flags {flags:#x}")));
        }
        let mut dims = Vec::with_capacity(ndims as usize);
        for _ in 0..ndims {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            dims.push(u64::from_le_bytes(b));
        }
        let complex = flags & FLAG_COMPLEX != 0;
        let count = dims
            .iter()
            .try_fold(1u64, |acc, &d| acc.checked_mul(d))
            .and_then(|c| c.checked_mul(if complex { 2 } else { 1 }))
            .filter(|&c| c <= (1 << 32))
            .ok_or_else(|| Error::Format("array too large".into()))?;
        let mut bytes = vec![0u8; count as usize * 8];
        r.read_exact(&mut bytes)?;
        let data = bytes.chunks_exact(8).map(|b| f64::from_le_bytes(b.try_into().unwrap())).collect();
        let a = Self { dims, complex, data };
        a.check()?;
        Ok(a)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

fn read_u32<R: Read>(r: &mut R) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

/// Stores `u` as an `n x n` array, real unless some imaginary part is nonzero.
pub fn image_to_raw(u: &ImageGrid) -> Result<RawArray> {
    let n = u.n() as u64;
    if u.max_imag() == 0.0 {
        RawArray::real(vec![n, n], u.real_part())
    } else {
        RawArray::from_complex(vec![n, n], u.as_slice())
    }
}

pub fn image_from_raw(a: &RawArray) -> Result<ImageGrid> {
    match a.dims[..] {
        [r, c] if r == c => ImageGrid::from_vec(r as usize, a.to_complex()),
        _ => Err(Error::Format(format!("expected a square image, found dims {:?}", a.dims))),
    }
}

pub fn save_image(u: &ImageGrid, path: impl AsRef<Path>) -> Result<()> {
    image_to_raw(u)?.save(path)
}

pub fn load_image(path: impl AsRef<Path>) -> Result<ImageGrid> {
    image_from_raw(&RawArray::load(path)?)
}

/// 8-bit grey levels of `|u|`, mapped linearly from `[lo, hi]` and clamped.
pub fn to_gray8(u: &ImageGrid, lo: f64, hi: f64) -> Vec<u8> {
    let span = if hi > lo { hi - lo } else { 1.0 };
    u.modulus()
        .iter()
        .map(|&m| (((m - lo) / span).clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect()
}
