//! The `TAUC` coefficient cache.
//!
//! Layout (all little-endian): magic `TAUC`, `u32` version = 1, `u64` count,
//! then `count` signed 128-bit values `τ(1)..τ(count)`.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use cuspsum_core::cuspforms::MAX_TABLE_LEN;
use cuspsum_core::CoefficientTable;
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MAGIC: [u8; 4] = *b"TAUC";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;
/// Environment variable naming the default cache directory.
pub const CACHE_DIR_ENV: &str = "CUSPSUM_CACHE_DIR";
/// File name used inside a cache directory.
pub const FILE_NAME: &str = "tau.tauc";

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path}: bad magic bytes (not a TAUC file)")]
    BadMagic { path: PathBuf },
    #[error("{path}: unsupported TAUC version {version}")]
    BadVersion { path: PathBuf, version: u32 },
    #[error("{path}: truncated or oversized ({actual} bytes, header says {expected})")]
    Length { path: PathBuf, expected: u128, actual: usize },
    #[error("{path}: empty table")]
    Empty { path: PathBuf },
}

/// Serializes `τ(1..=tau.len())`.
pub fn encode(tau: &[i128]) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * tau.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(tau.len() as u64).to_le_bytes());
    for t in tau {
        out.extend_from_slice(&t.to_le_bytes());
    }
    out
}

pub fn decode(bytes: &[u8], path: &Path) -> Result<Vec<i128>, CacheError> {
    let path = || path.to_path_buf();
    if bytes.len() < 4 || bytes[..4] != MAGIC {
        return Err(CacheError::BadMagic { path: path() });
    }
    if bytes.len() < HEADER_LEN {
        return Err(CacheError::Length { path: path(), expected: HEADER_LEN as u128, actual: bytes.len() });
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(CacheError::BadVersion { path: path(), version });
    }
    let count = u64::from_le_bytes(bytes[8..16].try_into().unwrap());
    let expected = HEADER_LEN as u128 + 16 * count as u128;
    if bytes.len() as u128 != expected {
        return Err(CacheError::Length { path: path(), expected, actual: bytes.len() });
    }
    if count == 0 {
        return Err(CacheError::Empty { path: path() });
    }
    Ok(bytes[HEADER_LEN..].chunks_exact(16).map(|c| i128::from_le_bytes(c.try_into().unwrap())).collect())
}

/// SHA-256 of the serialized table, hex encoded.
pub fn checksum(tau: &[i128]) -> String {
    hex::encode(Sha256::digest(encode(tau)))
}

pub fn read(path: &Path) -> Result<Vec<i128>, CacheError> {
    let bytes = fs::read(path).map_err(|source| CacheError::Io { path: path.to_path_buf(), source })?;
    decode(&bytes, path)
}

/// Writes through a temporary file in the same directory and renames it into place.
pub fn write(path: &Path, tau: &[i128]) -> Result<(), CliError> {
    let fail = |source| CliError::Write { path: path.to_path_buf(), source };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(fail)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    let result = fs::File::create(&tmp).and_then(|mut f| {
        f.write_all(&encode(tau))?;
        f.sync_all()
    });
    if let Err(e) = result.and_then(|_| fs::rename(&tmp, path)) {
        let _ = fs::remove_file(&tmp);
        return Err(fail(e));
    }
    Ok(())
}

pub fn build(n_max: usize) -> Result<CoefficientTable, CliError> {
    if n_max > MAX_TABLE_LEN {
        return Err(CliError::Resource(format!("table of {n_max} coefficients exceeds the limit {MAX_TABLE_LEN}")));
    }
    CoefficientTable::build(n_max).map_err(CliError::from_core)
}

/// A table together with the checksum of its serialized form.
#[derive(Debug, Clone)]
pub struct LoadedTable {
    pub table: CoefficientTable,
    pub checksum: String,
}

impl LoadedTable {
    pub fn new(table: CoefficientTable) -> Self {
        let checksum = checksum(table.tau_values());
        LoadedTable { table, checksum }
    }
}

/// Where coefficient tables come from: a cache directory, or fresh builds.
#[derive(Debug, Clone, Default)]
pub struct TableSource {
    dir: Option<PathBuf>,
}

impl TableSource {
    pub fn new(dir: Option<PathBuf>) -> Self {
        TableSource { dir }
    }

    /// The explicit directory if given, else `CUSPSUM_CACHE_DIR` if set.
    pub fn from_env(dir: Option<PathBuf>) -> Self {
        TableSource { dir: dir.or_else(|| std::env::var_os(CACHE_DIR_ENV).map(PathBuf::from)) }
    }

    pub fn cache_path(&self) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(FILE_NAME))
    }

    /// Exactly `τ(1..=n)`. A cache holding at least `n` values is reused;
    /// a shorter one is replaced by a fresh build of length `n`.
    pub fn table(&self, n: usize) -> Result<LoadedTable, CliError> {
        let n = n.max(1);
        let Some(path) = self.cache_path() else {
            return Ok(LoadedTable::new(build(n)?));
        };
        if path.exists() {
            let mut tau = read(&path)?;
            if tau.len() >= n {
                tau.truncate(n);
                let table = CoefficientTable::from_tau(tau).map_err(CliError::from_core)?;
                return Ok(LoadedTable::new(table));
            }
        }
        let table = build(n)?;
        write(&path, table.tau_values())?;
        Ok(LoadedTable::new(table))
    }
}
