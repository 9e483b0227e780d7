//! Content-addressed cache of two-body matrices.
//!
//! Keyed by the exact production inputs (rates, time, window, engine,
//! tolerance, grid). The binary payload is checksummed; a mismatch on read
//! falls back to recomputation and overwrites the entry.

use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use dqw::rho::TwoBodyRho;

use crate::CliError;

pub struct Cache {
    dir: PathBuf,
    enabled: bool,
    pub hits: usize,
    pub misses: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct CacheKeyInputs<'a> {
    pub omega_rate: f64,
    pub d_rate: f64,
    pub t: f64,
    pub window_l: i64,
    pub engine: &'a str,
    pub eps: f64,
    pub grid_n: Option<usize>,
}

impl Cache {
    pub fn new(dir: PathBuf, enabled: bool) -> Result<Self, CliError> {
        if enabled {
            std::fs::create_dir_all(&dir)
                .map_err(|e| CliError::Io(format!("cache dir {}: {e}", dir.display())))?;
        }
        Ok(Cache {
            dir,
            enabled,
            hits: 0,
            misses: 0,
            warnings: Vec::new(),
        })
    }

    fn key(inputs: &CacheKeyInputs) -> String {
        let canonical = format!(
            "omega_rate={:e};d_rate={:e};t={:e};window={};engine={};eps={:e};grid_n={:?}",
            inputs.omega_rate,
            inputs.d_rate,
            inputs.t,
            inputs.window_l,
            inputs.engine,
            inputs.eps,
            inputs.grid_n,
        );
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        hex(&hasher.finalize())
    }

    /// Fetch or compute a matrix. The producer runs on a miss or on a
    /// checksum mismatch.
    pub fn get_or_compute<F>(
        &mut self,
        inputs: CacheKeyInputs,
        producer: F,
    ) -> Result<TwoBodyRho, CliError>
    where
        F: FnOnce() -> Result<TwoBodyRho, CliError>,
    {
        if !self.enabled {
            return producer();
        }
        let key = Self::key(&inputs);
        let bin = self.dir.join(format!("{key}.bin"));
        let sidecar = self.dir.join(format!("{key}.json"));
        let sumfile = self.dir.join(format!("{key}.sha256"));
        if bin.exists() && sidecar.exists() && sumfile.exists() {
            match self.try_read(&bin, &sidecar, &sumfile) {
                Ok(rho) => {
                    self.hits += 1;
                    return Ok(rho);
                }
                Err(msg) => {
                    self.warnings
                        .push(format!("cache entry {key} rejected ({msg}); recomputing"));
                }
            }
        }
        self.misses += 1;
        let rho = producer()?;
        dqw::export::write_rho_binary(&bin, &sidecar, &rho)
            .map_err(|e| CliError::Io(format!("cache write: {e}")))?;
        let digest = file_sha256(&bin)?;
        std::fs::write(&sumfile, digest)
            .map_err(|e| CliError::Io(format!("cache write {}: {e}", sumfile.display())))?;
        Ok(rho)
    }

    fn try_read(&self, bin: &Path, sidecar: &Path, sumfile: &Path) -> Result<TwoBodyRho, String> {
        let want = std::fs::read_to_string(sumfile).map_err(|e| e.to_string())?;
        let got = file_sha256(bin).map_err(|e| e.to_string())?;
        if want.trim() != got {
            return Err("checksum mismatch".to_string());
        }
        dqw::export::read_rho_binary(bin, sidecar).map_err(|e| e.to_string())
    }
}

fn file_sha256(path: &Path) -> Result<String, CliError> {
    let bytes = std::fs::read(path)
        .map_err(|e| CliError::Io(format!("read {}: {e}", path.display())))?;
    let mut hasher = Sha256::new();
    hasher.update(&bytes);
    Ok(hex(&hasher.finalize()))
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}
