//! On-disk cache of Monte Carlo profiles, one JSON file per parameter set.

use std::path::{Path, PathBuf};

use crate::error::Result;

use super::profile::{entropy_profile_mc, EntropyProfile, ProfileMethod};

/// Environment variable naming the cache directory.
pub const CACHE_ENV: &str = "KEYSHARE_PROFILE_CACHE";

#[derive(Debug, Clone, Default)]
pub struct ProfileCache {
    dir: Option<PathBuf>,
}

impl ProfileCache {
    /// A cache that only computes.
    pub fn disabled() -> Self {
        ProfileCache { dir: None }
    }

    pub fn at(dir: impl Into<PathBuf>) -> Self {
        ProfileCache { dir: Some(dir.into()) }
    }

    /// Uses `KEYSHARE_PROFILE_CACHE` when set and nonempty.
    pub fn from_env() -> Self {
        match std::env::var_os(CACHE_ENV) {
            Some(d) if !d.is_empty() => Self::at(d),
            _ => Self::disabled(),
        }
    }

    pub fn dir(&self) -> Option<&Path> {
        self.dir.as_deref()
    }

    fn path(dir: &Path, p: f64, n: usize, samples: usize, seed: u64) -> PathBuf {
        dir.join(format!("profile_p{:016x}_n{n}_s{samples}_seed{seed:x}.json", p.to_bits()))
    }

    /// The Monte Carlo profile for these parameters, read from disk when a
    /// matching entry exists. Unreadable or mismatched entries are recomputed
    /// and overwritten.
    pub fn monte_carlo(&self, p: f64, n: usize, samples: usize, seed: u64) -> Result<EntropyProfile> {
        let Some(dir) = &self.dir else {
            return entropy_profile_mc(p, n, samples, seed);
        };
        let path = Self::path(dir, p, n, samples, seed);
        if let Ok(text) = std::fs::read_to_string(&path) {
            match serde_json::from_str::<EntropyProfile>(&text) {
                Ok(prof)
                    if prof.n == n
                        && prof.p.to_bits() == p.to_bits()
                        && prof.method == (ProfileMethod::MonteCarlo { samples, seed }) =>
                {
                    log::debug!("profile cache hit: {}", path.display());
                    return Ok(prof);
                }
                _ => log::warn!("ignoring stale profile cache entry {}", path.display()),
            }
        }
        let prof = entropy_profile_mc(p, n, samples, seed)?;
        std::fs::create_dir_all(dir)?;
        std::fs::write(&path, serde_json::to_string(&prof)?)?;
        Ok(prof)
    }
}
