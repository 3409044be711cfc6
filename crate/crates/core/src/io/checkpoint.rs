//! Binary snapshots of fields, many-body tensors and density matrices.
//!
//! Layout, all little-endian:
//!
//! ```text
//! "FHRT"  u16 version  u8 rank  u32 dims[rank]
//! f64 grid[3]          (spatial dimension, points per axis, half width)
//! u32 n_meta  f64 meta[n_meta]
//! f64 data[2 * Π dims] (re, im interleaved, row-major)
//! u64 checksum         (first 8 bytes of SHA-256 over everything above)
//! ```

use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::many_body::{ManyBodyState, ReducedDensity};
use crate::params::HartreeParams;
use crate::spectral::{Field, Grid};
use crate::C64;

pub const MAGIC: &[u8; 4] = b"FHRT";
pub const VERSION: u16 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub dims: Vec<usize>,
    pub grid: Grid,
    /// Free-form scalars (time, particle number, parameters, …).
    pub meta: Vec<f64>,
    pub data: Vec<C64>,
}

impl Checkpoint {
    pub fn new(dims: Vec<usize>, grid: Grid, meta: Vec<f64>, data: Vec<C64>) -> Result<Self> {
        if dims.is_empty() || dims.len() > u8::MAX as usize {
            return Err(Error::invalid(format!("rank {} not in 1..=255", dims.len())));
        }
        let len: usize = dims.iter().product();
        if len != data.len() {
            return Err(Error::invalid(format!(
                "dims {dims:?} hold {len} entries, data has {}",
                data.len()
            )));
        }
        Ok(Self {
            dims,
            grid,
            meta,
            data,
        })
    }

    pub fn rank(&self) -> usize {
        self.dims.len()
    }

    pub fn from_field(field: &Field, meta: Vec<f64>) -> Self {
        let g = field.grid();
        Self {
            dims: vec![g.points(); g.dim()],
            grid: g.clone(),
            meta,
            data: field.values().to_vec(),
        }
    }

    /// Rank `N·d` tensor; the meta block starts with `N`.
    pub fn from_state(psi: &ManyBodyState, mut meta: Vec<f64>) -> Self {
        let g = psi.grid();
        meta.insert(0, psi.particles() as f64);
        Self {
            dims: vec![g.points(); psi.rank()],
            grid: g.clone(),
            meta,
            data: psi.amplitudes().to_vec(),
        }
    }

    /// Rank-2 matrix in the cell basis.
    pub fn from_density(rho: &ReducedDensity, meta: Vec<f64>) -> Self {
        let (r, c) = rho.matrix.shape();
        // nalgebra is column-major; store row-major.
        let data = (0..r)
            .flat_map(|i| (0..c).map(move |j| (i, j)))
            .map(|(i, j)| rho.matrix[(i, j)])
            .collect();
        Self {
            dims: vec![r, c],
            grid: rho.grid.clone(),
            meta,
            data,
        }
    }

    pub fn to_field(&self) -> Result<Field> {
        if self.dims != vec![self.grid.points(); self.grid.dim()] {
            return Err(Error::invalid(format!(
                "dims {:?} do not describe a field on the stored grid",
                self.dims
            )));
        }
        Field::new(self.grid.clone(), self.data.clone())
    }

    pub fn to_state(&self, params: HartreeParams) -> Result<ManyBodyState> {
        let n = self.meta.first().copied().unwrap_or(0.0) as usize;
        if self.dims != vec![self.grid.points(); n * self.grid.dim()] {
            return Err(Error::invalid(format!(
                "dims {:?} do not describe a {n}-particle state",
                self.dims
            )));
        }
        ManyBodyState::new(n, self.grid.clone(), self.data.clone(), params)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(64 + 16 * self.data.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.push(self.dims.len() as u8);
        for &d in &self.dims {
            out.extend_from_slice(&(d as u32).to_le_bytes());
        }
        for v in [
            self.grid.dim() as f64,
            self.grid.points() as f64,
            self.grid.half_width(),
        ] {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out.extend_from_slice(&(self.meta.len() as u32).to_le_bytes());
        for v in &self.meta {
            out.extend_from_slice(&v.to_le_bytes());
        }
        for c in &self.data {
            out.extend_from_slice(&c.re.to_le_bytes());
            out.extend_from_slice(&c.im.to_le_bytes());
        }
        let sum = checksum(&out);
        out.extend_from_slice(&sum.to_le_bytes());
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let magic = r.take(4)?;
        if magic != MAGIC {
            return Err(corrupt(0, "bad magic bytes"));
        }
        let version = r.u16()?;
        if version != VERSION {
            return Err(corrupt(4, format!("unsupported version {version}")));
        }
        let rank = r.take(1)?[0] as usize;
        if rank == 0 {
            return Err(corrupt(6, "rank 0"));
        }
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(r.u32()? as usize);
        }
        let grid_at = r.pos;
        let (dim, points, half_width) = (r.f64()?, r.f64()?, r.f64()?);
        let grid = Grid::new(dim as usize, points as usize, half_width)
            .map_err(|e| corrupt(grid_at, e.to_string()))?;
        let n_meta = r.u32()? as usize;
        let mut meta = Vec::with_capacity(n_meta.min(1 << 16));
        for _ in 0..n_meta {
            meta.push(r.f64()?);
        }
        let len = dims
            .iter()
            .try_fold(1usize, |acc, &d| acc.checked_mul(d))
            .filter(|&n| n.checked_mul(16).is_some())
            .ok_or_else(|| corrupt(7, "dimension product overflows"))?;
        let data_at = r.pos;
        let raw = r.take(16 * len)?;
        let data = raw
            .chunks_exact(16)
            .map(|c| {
                C64::new(
                    f64::from_le_bytes(c[..8].try_into().unwrap()),
                    f64::from_le_bytes(c[8..].try_into().unwrap()),
                )
            })
            .collect();
        let body_end = r.pos;
        let stored = u64::from_le_bytes(r.take(8)?.try_into().unwrap());
        if r.pos != bytes.len() {
            return Err(corrupt(r.pos, "trailing bytes after checksum"));
        }
        if stored != checksum(&bytes[..body_end]) {
            return Err(corrupt(body_end, "checksum mismatch"));
        }
        debug_assert!(data_at <= body_end);
        Ok(Self {
            dims,
            grid,
            meta,
            data,
        })
    }
}

fn checksum(bytes: &[u8]) -> u64 {
    let digest = Sha256::digest(bytes);
    u64::from_le_bytes(digest[..8].try_into().unwrap())
}

fn corrupt(offset: usize, reason: impl Into<String>) -> Error {
    Error::Checkpoint {
        offset,
        reason: reason.into(),
    }
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.bytes.len())
            .ok_or_else(|| corrupt(self.bytes.len(), format!("truncated: needed {n} bytes at {}", self.pos)))?;
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

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

pub fn write_checkpoint(ckpt: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, ckpt.to_bytes()).map_err(|e| Error::io(path, e))
}

/// Reads and verifies a checkpoint. Nothing is returned unless the whole file
/// parses and the checksum matches.
pub fn read_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    Checkpoint::from_bytes(&bytes)
}
