//! Frozen embedding tables, content-addressed by (rows, dim, seed).
//!
//! A table is fully determined by its id, so any process regenerates the
//! exact same rows; the on-disk cache only avoids recomputation and lets
//! train/eval splits share one file. Cache writes go through a temp file and
//! an atomic rename, first writer wins.

use std::fs;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use nalgebra::DVector;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use mixprior_core::substream;

use crate::error::{Result, TaskGenError};

pub const STREAM_EMBED: u64 = 0x73;

/// Environment variable overriding the cache directory.
pub const CACHE_ENV: &str = "ICL_LAB_CACHE";

const MAGIC: &[u8; 8] = b"ICLEMB1\n";

/// Content address of a table: row count, dimension, generation seed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct EmbeddingId {
    pub n: usize,
    pub d: usize,
    pub seed: u64,
}

/// An N×d table of standard-normal rows.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    id: EmbeddingId,
    rows: Vec<DVector<f64>>,
}

/// Cache directory: `ICL_LAB_CACHE` if set, else a fixed spot under the
/// system temp dir.
pub fn default_cache_dir() -> PathBuf {
    match std::env::var_os(CACHE_ENV) {
        Some(dir) => PathBuf::from(dir),
        None => std::env::temp_dir().join("icl-lab-embeddings"),
    }
}

impl EmbeddingTable {
    pub fn generate(id: EmbeddingId) -> Self {
        let mut rng = substream(id.seed, STREAM_EMBED, 0);
        let rows = (0..id.n)
            .map(|_| DVector::from_fn(id.d, |_, _| rng.sample::<f64, _>(StandardNormal)))
            .collect();
        EmbeddingTable { id, rows }
    }

    /// Load from `cache_dir` when present, otherwise generate and try to
    /// populate the cache (losing the race is fine).
    pub fn load_or_generate(id: EmbeddingId, cache_dir: &Path) -> Result<Self> {
        let path = cache_dir.join(format!("emb_{}_{}_{}.bin", id.n, id.d, id.seed));
        if let Ok(table) = Self::read_from(&path, id) {
            return Ok(table);
        }
        let table = Self::generate(id);
        if fs::create_dir_all(cache_dir).is_ok() {
            let tmp = cache_dir.join(format!(
                "emb_{}_{}_{}.tmp.{}",
                id.n,
                id.d,
                id.seed,
                std::process::id()
            ));
            if table.write_to(&tmp).is_ok() {
                let _ = fs::rename(&tmp, &path);
            }
            let _ = fs::remove_file(&tmp);
        }
        Ok(table)
    }

    fn write_to(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(MAGIC)?;
        f.write_all(&(self.id.n as u64).to_le_bytes())?;
        f.write_all(&(self.id.d as u64).to_le_bytes())?;
        f.write_all(&self.id.seed.to_le_bytes())?;
        let mut buf = Vec::with_capacity(self.id.n * self.id.d * 8);
        for row in &self.rows {
            for v in row.iter() {
                buf.extend_from_slice(&v.to_le_bytes());
            }
        }
        f.write_all(&buf)?;
        Ok(())
    }

    fn read_from(path: &Path, id: EmbeddingId) -> Result<Self> {
        let mut f = fs::File::open(path)?;
        let mut magic = [0u8; 8];
        f.read_exact(&mut magic)?;
        let mut header = [0u8; 24];
        f.read_exact(&mut header)?;
        let n = u64::from_le_bytes(header[0..8].try_into().unwrap()) as usize;
        let d = u64::from_le_bytes(header[8..16].try_into().unwrap()) as usize;
        let seed = u64::from_le_bytes(header[16..24].try_into().unwrap());
        if magic != *MAGIC || (EmbeddingId { n, d, seed }) != id {
            return Err(TaskGenError::SchemaMismatch {
                found: format!("{path:?}"),
                expected: "embedding cache entry matching the id".into(),
            });
        }
        let mut buf = Vec::new();
        f.read_to_end(&mut buf)?;
        if buf.len() != n * d * 8 {
            return Err(TaskGenError::SchemaMismatch {
                found: format!("{} payload bytes", buf.len()),
                expected: format!("{}", n * d * 8),
            });
        }
        let rows = (0..n)
            .map(|r| {
                DVector::from_fn(d, |k, _| {
                    let off = (r * d + k) * 8;
                    f64::from_le_bytes(buf[off..off + 8].try_into().unwrap())
                })
            })
            .collect();
        Ok(EmbeddingTable { id, rows })
    }

    pub fn id(&self) -> EmbeddingId {
        self.id
    }
    pub fn n(&self) -> usize {
        self.id.n
    }
    pub fn dim(&self) -> usize {
        self.id.d
    }

    pub fn row(&self, index: usize) -> Result<&DVector<f64>> {
        self.rows.get(index).ok_or(TaskGenError::IndexOverflow {
            what: "embedding row",
            index: index as i64,
            n: self.id.n,
        })
    }

    /// Row index of an exact vector match, if any.
    pub fn find_row(&self, v: &DVector<f64>) -> Option<usize> {
        self.rows.iter().position(|r| r == v)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_content_addressed() {
        let id = EmbeddingId { n: 50, d: 4, seed: 9 };
        assert_eq!(EmbeddingTable::generate(id), EmbeddingTable::generate(id));
        let other = EmbeddingId { n: 50, d: 4, seed: 10 };
        assert_ne!(EmbeddingTable::generate(id), EmbeddingTable::generate(other));
    }

    #[test]
    fn cache_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let id = EmbeddingId { n: 20, d: 3, seed: 5 };
        let a = EmbeddingTable::load_or_generate(id, dir.path()).unwrap();
        // Second load must come out of the cache identically.
        let b = EmbeddingTable::load_or_generate(id, dir.path()).unwrap();
        assert_eq!(a, b);
        assert!(dir.path().join("emb_20_3_5.bin").exists());
    }

    #[test]
    fn row_bounds_are_checked() {
        let table = EmbeddingTable::generate(EmbeddingId { n: 3, d: 2, seed: 1 });
        assert!(table.row(2).is_ok());
        assert!(matches!(
            table.row(3),
            Err(TaskGenError::IndexOverflow { .. })
        ));
    }
}
