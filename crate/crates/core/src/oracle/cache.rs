//! On-disk cache of reconstructed densities.
//!
//! File layout (little-endian): magic `GDRH`, then `u32` version, `u32` modes,
//! `u32` cutoff, `u32` grid points `M`, `f64` grid radius `R`, then the raw
//! Hermitized matrix row-major as `(re, im)` `f64` pairs. Files are named by
//! the SHA-256 of the state, cutoff and quadrature rule.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use faer::{c64, Mat};
use sha2::{Digest, Sha256};

use super::density::{raw_density, Density, Quadrature};
use super::fock::{hermitize, CMat};
use crate::error::Result;
use crate::symplectic::GaussianState;

pub const CACHE_ENV: &str = "GAUSSDIST_CACHE_DIR";
pub const CACHE_VERSION: u32 = 1;
const MAGIC: &[u8; 4] = b"GDRH";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CacheHeader {
    pub version: u32,
    pub modes: u32,
    pub cutoff: u32,
    pub points: u32,
    pub radius: f64,
}

#[derive(Debug, Clone)]
pub struct DensityCache {
    dir: PathBuf,
}

impl DensityCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    /// Cache rooted at `$GAUSSDIST_CACHE_DIR`, if set and nonempty.
    pub fn from_env() -> Option<Self> {
        std::env::var_os(CACHE_ENV).filter(|v| !v.is_empty()).map(Self::new)
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn key(state: &GaussianState, cutoff: usize, quadrature: Quadrature) -> Result<String> {
        let mut h = Sha256::new();
        h.update(b"gaussdist-density\0");
        h.update(CACHE_VERSION.to_le_bytes());
        h.update(state.to_json()?.as_bytes());
        h.update((cutoff as u64).to_le_bytes());
        h.update(serde_json::to_string(&quadrature)?.as_bytes());
        Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
    }

    pub fn path(&self, state: &GaussianState, cutoff: usize, quadrature: Quadrature) -> Result<PathBuf> {
        Ok(self.dir.join(format!("{}.rho", Self::key(state, cutoff, quadrature)?)))
    }

    pub fn get_or_build(&self, state: &GaussianState, cutoff: usize, quadrature: Quadrature) -> Result<Density> {
        let path = self.path(state, cutoff, quadrature)?;
        let (points, radius) = quadrature.grid_tag(state, cutoff)?;
        let header = CacheHeader {
            version: CACHE_VERSION,
            modes: state.modes() as u32,
            cutoff: cutoff as u32,
            points: points as u32,
            radius,
        };
        if let Ok((found, raw)) = read_file(&path) {
            if found == header {
                return Density::from_raw(state.modes(), cutoff, raw);
            }
        }
        let raw = hermitize(&raw_density(state, cutoff, quadrature)?);
        fs::create_dir_all(&self.dir)?;
        write_file(&path, &header, &raw)?;
        Density::from_raw(state.modes(), cutoff, raw)
    }
}

pub fn write_file(path: &Path, header: &CacheHeader, matrix: &CMat) -> io::Result<()> {
    let mut buf = Vec::with_capacity(28 + 16 * matrix.nrows() * matrix.ncols());
    buf.extend_from_slice(MAGIC);
    for v in [header.version, header.modes, header.cutoff, header.points] {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    buf.extend_from_slice(&header.radius.to_le_bytes());
    for i in 0..matrix.nrows() {
        for j in 0..matrix.ncols() {
            buf.extend_from_slice(&matrix[(i, j)].re.to_le_bytes());
            buf.extend_from_slice(&matrix[(i, j)].im.to_le_bytes());
        }
    }
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    fs::File::create(&tmp)?.write_all(&buf)?;
    fs::rename(tmp, path)
}

pub fn read_file(path: &Path) -> io::Result<(CacheHeader, CMat)> {
    let mut bytes = Vec::new();
    fs::File::open(path)?.read_to_end(&mut bytes)?;
    let bad = |msg: &str| io::Error::new(io::ErrorKind::InvalidData, msg.to_string());
    if bytes.len() < 28 || &bytes[..4] != MAGIC {
        return Err(bad("not a density cache file"));
    }
    let u32_at = |k: usize| u32::from_le_bytes(bytes[k..k + 4].try_into().unwrap());
    let f64_at = |k: usize| f64::from_le_bytes(bytes[k..k + 8].try_into().unwrap());
    let header = CacheHeader { version: u32_at(4), modes: u32_at(8), cutoff: u32_at(12), points: u32_at(16), radius: f64_at(20) };
    let dim = (header.cutoff as usize)
        .checked_pow(header.modes)
        .ok_or_else(|| bad("dimension overflow"))?;
    if bytes.len() != 28 + 16 * dim * dim {
        return Err(bad("truncated density cache file"));
    }
    let m = Mat::from_fn(dim, dim, |i, j| {
        let k = 28 + 16 * (i * dim + j);
        c64::new(f64_at(k), f64_at(k + 8))
    });
    Ok((header, m))
}
