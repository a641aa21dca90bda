//! Zero-table cache: an in-process memo backed by optional JSON files.
//!
//! The directory comes from [`set_cache_dir`] or, failing that, the
//! `FPT_CACHE_DIR` environment variable. Files are replaced atomically
//! (write to a temporary file, then rename), so concurrent readers only
//! ever see complete tables.

use std::collections::HashMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, OnceLock, RwLock};

use serde::{Deserialize, Serialize};

use crate::Result;

pub const CACHE_ENV: &str = "FPT_CACHE_DIR";

type Memo = Mutex<HashMap<String, Arc<Vec<f64>>>>;

fn memo() -> &'static Memo {
    static MEMO: OnceLock<Memo> = OnceLock::new();
    MEMO.get_or_init(|| Mutex::new(HashMap::new()))
}

fn dir_override() -> &'static RwLock<Option<PathBuf>> {
    static DIR: OnceLock<RwLock<Option<PathBuf>>> = OnceLock::new();
    DIR.get_or_init(|| RwLock::new(None))
}

/// Overrides the cache directory for this process (`None` restores the
/// environment-variable default).
pub fn set_cache_dir(dir: Option<PathBuf>) {
    *dir_override().write().expect("cache dir lock poisoned") = dir;
}

pub fn cache_dir() -> Option<PathBuf> {
    if let Some(d) = dir_override().read().expect("cache dir lock poisoned").clone() {
        return Some(d);
    }
    std::env::var_os(CACHE_ENV).map(PathBuf::from)
}

#[derive(Debug, Serialize, Deserialize)]
struct CacheFile {
    family: String,
    param: Option<f64>,
    zeros: Vec<f64>,
}

fn key(family: &str, param: Option<f64>) -> String {
    match param {
        Some(p) => format!("{family}_{p:?}"),
        None => family.to_string(),
    }
}

fn load(path: &Path, family: &str, param: Option<f64>) -> Option<Vec<f64>> {
    let text = fs::read_to_string(path).ok()?;
    let file: CacheFile = serde_json::from_str(&text).ok()?;
    let sorted = file.zeros.windows(2).all(|w| w[0] != w[1]);
    if file.family != family || file.param != param || !sorted {
        log::warn!("ignoring mismatched zero cache {}", path.display());
        return None;
    }
    Some(file.zeros)
}

fn store(dir: &Path, path: &Path, file: &CacheFile) -> std::io::Result<()> {
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(serde_json::to_string(file)?.as_bytes())?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

/// Returns at least `n` zeros for `(family, param)`, extending a memoized or
/// on-disk prefix with `compute(prefix, n)` when necessary.
pub(crate) fn get_or_compute<F>(
    family: &str,
    param: Option<f64>,
    n: usize,
    compute: F,
) -> Result<Arc<Vec<f64>>>
where
    F: FnOnce(&[f64], usize) -> Result<Vec<f64>>,
{
    let k = key(family, param);
    let mut memo = memo().lock().expect("zero cache poisoned");
    if let Some(z) = memo.get(&k) {
        if z.len() >= n {
            return Ok(z.clone());
        }
    }
    let dir = cache_dir();
    let path = dir.as_ref().map(|d| d.join(format!("{k}.json")));
    let mut prefix: Vec<f64> = memo.get(&k).map(|z| z.to_vec()).unwrap_or_default();
    if let Some(p) = &path {
        if let Some(disk) = load(p, family, param) {
            if disk.len() > prefix.len() {
                prefix = disk;
            }
        }
    }
    let zeros = if prefix.len() >= n {
        prefix
    } else {
        let z = compute(&prefix, n)?;
        if let (Some(d), Some(p)) = (&dir, &path) {
            let file = CacheFile {
                family: family.to_string(),
                param,
                zeros: z.clone(),
            };
            if let Err(e) = store(d, p, &file) {
                log::warn!("could not write zero cache {}: {e}", p.display());
            }
        }
        z
    };
    let zeros = Arc::new(zeros);
    memo.insert(k, zeros.clone());
    Ok(zeros)
}
