//! Content-addressed result cache for segment-set computations. Keys mix the
//! module version, the config hash, and the operation descriptor; values are
//! canonical `lamlang v1` files, re-validated on every read.

use std::fs;
use std::path::PathBuf;

use lamlab_core::LamApprox;

use crate::report::sha256_hex;

pub struct Cache {
    dir: Option<PathBuf>,
    pub hits: usize,
    pub misses: usize,
}

impl Cache {
    /// `LAMLAB_CACHE` overrides; an unset default directory disables nothing,
    /// it just lands next to the other outputs.
    pub fn open(default_dir: PathBuf) -> Cache {
        let dir = match std::env::var_os("LAMLAB_CACHE") {
            Some(d) => PathBuf::from(d),
            None => default_dir,
        };
        Cache {
            dir: Some(dir),
            hits: 0,
            misses: 0,
        }
    }

    pub fn disabled() -> Cache {
        Cache {
            dir: None,
            hits: 0,
            misses: 0,
        }
    }

    pub fn key(parts: &[&str]) -> String {
        let joined = format!("{}|{}", lamlab_core::MODULE_VERSION, parts.join("|"));
        sha256_hex(joined.as_bytes())
    }

    fn path_for(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("{key}.lamlang")))
    }

    pub fn get(&mut self, key: &str) -> Option<LamApprox> {
        let path = self.path_for(key)?;
        let text = fs::read_to_string(path).ok()?;
        match LamApprox::parse(&text) {
            Ok(lam) => {
                self.hits += 1;
                Some(lam)
            }
            Err(_) => None, // stale or corrupt entries are recomputed
        }
    }

    pub fn put(&mut self, key: &str, lam: &LamApprox) {
        self.misses += 1;
        let Some(path) = self.path_for(key) else {
            return;
        };
        if let Some(parent) = path.parent() {
            let _ = fs::create_dir_all(parent);
        }
        let _ = fs::write(path, lam.canonical_bytes());
    }

    /// Run `compute` through the cache.
    pub fn lam_cached<E>(
        &mut self,
        key: &str,
        compute: impl FnOnce() -> Result<LamApprox, E>,
    ) -> Result<LamApprox, E> {
        if let Some(hit) = self.get(key) {
            return Ok(hit);
        }
        let lam = compute()?;
        self.put(key, &lam);
        Ok(lam)
    }
}
