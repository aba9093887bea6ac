use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use sdmcap_core::gue_spectral::CoefficientCache;
use sdmcap_core::CoefficientTable;

pub const CACHE_ENV: &str = "SDMCAP_CACHE_DIR";
const COEFFICIENT_FILE: &str = "gue_coefficients.json";
const TABLE_FILE: &str = "gamma_table.json";

/// `$SDMCAP_CACHE_DIR`, else `$XDG_CACHE_HOME/sdmcap`, else `~/.cache/sdmcap`.
pub fn cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_ENV) {
        return dir.into();
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME") {
        return Path::new(&dir).join("sdmcap");
    }
    let home = std::env::var_os("HOME").unwrap_or_else(|| ".".into());
    Path::new(&home).join(".cache").join("sdmcap")
}

fn ensure_parent(path: &Path) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
    }
    Ok(())
}

pub fn coefficient_path() -> PathBuf {
    cache_dir().join(COEFFICIENT_FILE)
}

pub fn load_coefficients() -> Result<CoefficientCache> {
    let path = coefficient_path();
    if !path.exists() {
        return Ok(CoefficientCache::new());
    }
    let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub fn save_coefficients(cache: &CoefficientCache) -> Result<()> {
    let path = coefficient_path();
    ensure_parent(&path)?;
    fs::write(&path, serde_json::to_string_pretty(cache)?).with_context(|| format!("writing {}", path.display()))
}

pub fn table_path(explicit: Option<&Path>) -> PathBuf {
    explicit.map(Path::to_path_buf).unwrap_or_else(|| cache_dir().join(TABLE_FILE))
}

/// The table at `path`, or the built-in table when the file does not exist.
pub fn load_table(path: &Path) -> Result<CoefficientTable> {
    if !path.exists() {
        return Ok(CoefficientTable::builtin());
    }
    CoefficientTable::load(path).with_context(|| format!("reading {}", path.display()))
}

pub fn save_table(table: &CoefficientTable, path: &Path) -> Result<()> {
    ensure_parent(path)?;
    table.save(path).with_context(|| format!("writing {}", path.display()))
}
