//! RVDS: a minimal little-endian tensor container.
//!
//! ```text
//! "RVDS" | version u8 = 1 | dtype u8 | ndim u8 | reserved u8 = 0 | ndim × u64 dims | payload
//! ```
//!
//! dtype 0 is `f32`, 1 is `f64`, 2 is `complex64` stored as interleaved
//! `f32` real and imaginary parts. The payload is row-major.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use radar_vitals_core::Complex;

use crate::{Error, Result};

pub const MAGIC: [u8; 4] = *b"RVDS";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dtype {
    F32 = 0,
    F64 = 1,
    Complex64 = 2,
}

impl Dtype {
    pub fn code(self) -> u8 {
        self as u8
    }

    pub fn from_code(code: u8) -> Result<Self> {
        match code {
            0 => Ok(Dtype::F32),
            1 => Ok(Dtype::F64),
            2 => Ok(Dtype::Complex64),
            c => Err(Error::Format(format!("unknown RVDS dtype code {c}"))),
        }
    }

    /// Bytes per element.
    pub fn size(self) -> usize {
        match self {
            Dtype::F32 => 4,
            Dtype::F64 | Dtype::Complex64 => 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Data {
    F32(Vec<f32>),
    F64(Vec<f64>),
    /// `[re, im]` pairs.
    Complex64(Vec<[f32; 2]>),
}

impl Data {
    pub fn dtype(&self) -> Dtype {
        match self {
            Data::F32(_) => Dtype::F32,
            Data::F64(_) => Dtype::F64,
            Data::Complex64(_) => Dtype::Complex64,
        }
    }

    pub fn len(&self) -> usize {
        match self {
            Data::F32(v) => v.len(),
            Data::F64(v) => v.len(),
            Data::Complex64(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// An n-dimensional array as stored on disk. Zero dimensions is a scalar.
#[derive(Debug, Clone, PartialEq)]
pub struct Array {
    pub dims: Vec<u64>,
    pub data: Data,
}

impl Array {
    pub fn new(dims: Vec<u64>, data: Data) -> Result<Self> {
        let a = Array { dims, data };
        a.check()?;
        Ok(a)
    }

    pub fn f64(dims: &[usize], values: Vec<f64>) -> Result<Self> {
        Self::new(dims.iter().map(|&d| d as u64).collect(), Data::F64(values))
    }

    pub fn complex(dims: &[usize], values: &[Complex]) -> Result<Self> {
        let data = values.iter().map(|c| [c.re as f32, c.im as f32]).collect();
        Self::new(dims.iter().map(|&d| d as u64).collect(), Data::Complex64(data))
    }

    pub fn element_count(&self) -> Result<usize> {
        self.dims
            .iter()
            .try_fold(1usize, |n, &d| n.checked_mul(usize::try_from(d).ok()?))
            .ok_or_else(|| Error::Format("RVDS dimensions overflow".into()))
    }

    fn check(&self) -> Result<()> {
        if self.dims.len() > u8::MAX as usize {
            return Err(Error::Format(format!("{} dimensions exceed the RVDS limit", self.dims.len())));
        }
        let n = self.element_count()?;
        if n != self.data.len() {
            return Err(Error::Format(format!(
                "dims {:?} hold {n} elements but the payload has {}",
                self.dims,
                self.data.len()
            )));
        }
        Ok(())
    }

    pub fn shape(&self) -> Vec<usize> {
        self.dims.iter().map(|&d| d as usize).collect()
    }

    /// Values widened to `f64`; complex data is rejected.
    pub fn to_f64(&self) -> Result<Vec<f64>> {
        match &self.data {
            Data::F32(v) => Ok(v.iter().map(|&x| f64::from(x)).collect()),
            Data::F64(v) => Ok(v.clone()),
            Data::Complex64(_) => Err(Error::Format("expected real data, found complex64".into())),
        }
    }

    pub fn to_complex(&self) -> Result<Vec<Complex>> {
        match &self.data {
            Data::Complex64(v) => Ok(v
                .iter()
                .map(|[re, im]| Complex::new(f64::from(*re), f64::from(*im)))
                .collect()),
            _ => Err(Error::Format("expected complex64 data".into())),
        }
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        self.check()?;
        w.write_all(&MAGIC)?;
        w.write_all(&[VERSION, self.data.dtype().code(), self.dims.len() as u8, 0])?;
        for d in &self.dims {
            w.write_all(&d.to_le_bytes())?;
        }
        match &self.data {
            Data::F32(v) => v.iter().try_for_each(|x| w.write_all(&x.to_le_bytes()))?,
            Data::F64(v) => v.iter().try_for_each(|x| w.write_all(&x.to_le_bytes()))?,
            Data::Complex64(v) => v.iter().try_for_each(|[re, im]| {
                w.write_all(&re.to_le_bytes())?;
                w.write_all(&im.to_le_bytes())
            })?,
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut head = [0u8; 8];
        r.read_exact(&mut head)?;
        if head[..4] != MAGIC {
            return Err(Error::Format("missing RVDS magic".into()));
        }
        if head[4] != VERSION {
            return Err(Error::Format(format!("unsupported RVDS version {}", head[4])));
        }
        let dtype = Dtype::from_code(head[5])?;
        let ndim = head[6] as usize;
        let mut dims = Vec::with_capacity(ndim);
        for _ in 0..ndim {
            let mut b = [0u8; 8];
            r.read_exact(&mut b)?;
            dims.push(u64::from_le_bytes(b));
        }
        let probe = Array {
            dims: dims.clone(),
            data: Data::F64(Vec::new()),
        };
        let n = probe.element_count()?;
        let bytes = n
            .checked_mul(dtype.size())
            .ok_or_else(|| Error::Format("RVDS payload size overflows".into()))?;
        let mut payload = Vec::new();
        r.by_ref().take(bytes as u64).read_to_end(&mut payload)?;
        if payload.len() != bytes {
            return Err(Error::Format(format!(
                "RVDS payload truncated: expected {bytes} bytes, found {}",
                payload.len()
            )));
        }
        if r.read(&mut [0u8; 1])? != 0 {
            return Err(Error::Format("trailing bytes after RVDS payload".into()));
        }
        let f32s = || payload.chunks_exact(4).map(|c| f32::from_le_bytes(c.try_into().unwrap()));
        let data = match dtype {
            Dtype::F32 => Data::F32(f32s().collect()),
            Dtype::F64 => Data::F64(
                payload
                    .chunks_exact(8)
                    .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
                    .collect(),
            ),
            Dtype::Complex64 => {
                let flat: Vec<f32> = f32s().collect();
                Data::Complex64(flat.chunks_exact(2).map(|c| [c[0], c[1]]).collect())
            }
        };
        Ok(Array { dims, data })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_to(BufWriter::new(file))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_from(BufReader::new(file))
    }
}
