//! Run manifests: what ran, what it produced, and a hash identifying the
//! configuration.
//!
//! The hash covers the *parsed* config (canonical field order), so TOML key
//! reordering, whitespace, and comments do not change it, while every
//! semantically meaningful field does.

use std::fs;
use std::io::Read;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::ExperimentConfig;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FileEntry {
    /// Relative to the run directory, `/`-separated.
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub code_version: String,
    pub started_unix_ms: u64,
    pub finished_unix_ms: u64,
    /// `reached-horizon`, `blowup-detected`, `corrupted`, or `error`.
    pub outcome: String,
    /// Guard or corruption time, when the run stopped early.
    pub outcome_time: Option<f64>,
    pub steps: Option<usize>,
    /// Renormalized gradient at the last sample.
    pub final_renorm_gradient: Option<f64>,
    /// Renormalized mass-energy at the last sample.
    pub final_renorm_mass_energy: Option<f64>,
    pub error: Option<String>,
    pub files: Vec<FileEntry>,
    pub config: ExperimentConfig,
}

pub fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

pub fn config_hash(cfg: &ExperimentConfig) -> String {
    // serde_json writes struct fields in declaration order: canonical
    let json = serde_json::to_vec(cfg).expect("config serializes");
    format!("sha256:{}", hex(&Sha256::digest(&json)))
}

pub fn file_sha256(path: &Path) -> Result<String> {
    let mut f = fs::File::open(path)
        .with_context(|| format!("hashing {}", path.display()))?;
    let mut hasher = Sha256::new();
    let mut buf = [0u8; 64 * 1024];
    loop {
        let n = f.read(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(&buf[..n]);
    }
    Ok(hex(&hasher.finalize()))
}

/// Subdirectory holding the shared ground-state cache when the caller did
/// not pick one; it is infrastructure, not a run product.
pub const CACHE_DIR_NAME: &str = "gs_cache";

/// Every regular file under `dir` except the manifest itself and the
/// ground-state cache, sorted by path so the inventory is deterministic.
pub fn file_inventory(dir: &Path) -> Result<Vec<FileEntry>> {
    let mut paths = Vec::new();
    collect_files(dir, dir, &mut paths)?;
    paths.sort();
    paths
        .into_iter()
        .map(|rel| {
            let full = dir.join(&rel);
            let bytes = fs::metadata(&full)?.len();
            Ok(FileEntry {
                path: rel,
                bytes,
                sha256: file_sha256(&full)?,
            })
        })
        .collect()
}

fn collect_files(root: &Path, dir: &Path, out: &mut Vec<String>) -> Result<()> {
    for entry in fs::read_dir(dir).with_context(|| format!("listing {}", dir.display()))? {
        let entry = entry?;
        let path = entry.path();
        if path.is_dir() {
            if dir == root && entry.file_name() == CACHE_DIR_NAME {
                continue;
            }
            collect_files(root, &path, out)?;
        } else {
            let rel = path
                .strip_prefix(root)
                .expect("entry under root")
                .components()
                .map(|c| c.as_os_str().to_string_lossy())
                .collect::<Vec<_>>()
                .join("/");
            if rel != MANIFEST_FILE {
                out.push(rel);
            }
        }
    }
    Ok(())
}

pub fn now_unix_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

/// Serialize to `<dir>/manifest.json` via a temp file and rename, so a
/// manifest on disk is always complete.
pub fn write_manifest_atomic(dir: &Path, manifest: &RunManifest) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest)?;
    write_atomic(&dir.join(MANIFEST_FILE), json.as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp = dir.join(format!(
        ".{}.tmp{}",
        path.file_name().unwrap_or_default().to_string_lossy(),
        std::process::id()
    ));
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

pub fn read_manifest(dir: &Path) -> Result<RunManifest> {
    let path = dir.join(MANIFEST_FILE);
    let text = fs::read_to_string(&path)
        .with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{load_config, parse_table, table_to_config};

    const BASE: &str = r#"
        seed = 7

        [params]
        d = 1
        p = 7.0

        [grid]
        n = 256
        l = 20.0

        [initial]
        kind = "soliton-multiple"
        c = 1.0

        [propagator]
        dt = 1e-3
        t_end = 0.5
    "#;

    // same content: sections and keys shuffled, comments added (top-level
    // `seed` must stay above the first table header to remain top-level)
    const REORDERED: &str = r#"
        # reordered but identical
        seed = 7

        [propagator]
        t_end = 0.5
        dt = 1e-3

        [initial]
        c = 1.0
        kind = "soliton-multiple"

        [grid]
        l = 20.0
        n = 256

        [params]
        p = 7.0
        d = 1
    "#;

    fn cfg_of(text: &str) -> ExperimentConfig {
        table_to_config(&parse_table(text).unwrap(), Path::new(".")).unwrap()
    }

    #[test]
    fn hash_ignores_key_order_but_sees_value_changes() {
        let a = cfg_of(BASE);
        let b = cfg_of(REORDERED);
        assert_eq!(config_hash(&a).len(), "sha256:".len() + 64);
        assert_eq!(config_hash(&a), config_hash(&b));
        let c = cfg_of(&BASE.replace("c = 1.0", "c = 1.2"));
        assert_ne!(config_hash(&a), config_hash(&c));
        let d = cfg_of(&BASE.replace("seed = 7", "seed = 8"));
        assert_ne!(config_hash(&a), config_hash(&d));
    }

    #[test]
    fn inventory_is_sorted_and_skips_the_manifest() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("b.csv"), b"x").unwrap();
        fs::create_dir(dir.path().join("sub")).unwrap();
        fs::write(dir.path().join("sub/a.nlsf"), b"yz").unwrap();
        fs::write(dir.path().join(MANIFEST_FILE), b"{}").unwrap();
        fs::create_dir(dir.path().join(CACHE_DIR_NAME)).unwrap();
        fs::write(dir.path().join(CACHE_DIR_NAME).join("gs.json"), b"{}").unwrap();
        let inv = file_inventory(dir.path()).unwrap();
        let names: Vec<&str> = inv.iter().map(|e| e.path.as_str()).collect();
        assert_eq!(names, vec!["b.csv", "sub/a.nlsf"]);
        assert_eq!(inv[1].bytes, 2);
        assert_eq!(inv[0].sha256.len(), 64);
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.json");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn load_config_round_trip_feeds_the_hash() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("exp.toml");
        fs::write(&p, BASE).unwrap();
        let (a, _) = load_config(&p, &[], &[]).unwrap();
        let (b, _) = load_config(&p, &["initial.c=1.2".into()], &[]).unwrap();
        assert_ne!(config_hash(&a), config_hash(&b));
        let (c, _) = load_config(&p, &["initial.c=1.0".into()], &[]).unwrap();
        assert_eq!(config_hash(&a), config_hash(&c));
    }
}
