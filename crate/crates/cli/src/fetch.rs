//! Dataset download with a checksum-verified local cache.

use std::fs;
use std::io::Read;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use sha2::{Digest, Sha256};

pub struct RemoteFile {
    pub name: &'static str,
    pub sha256: &'static str,
}

pub struct KnownDataset {
    pub name: &'static str,
    pub base_url: &'static str,
    pub files: &'static [RemoteFile],
    /// Schema written next to the data so `--schema` can point at it.
    pub schema: &'static str,
}

pub const ADULT_SCHEMA: &str = include_str!("../../../data/adult/adult.schema.toml");

pub const DATASETS: &[KnownDataset] = &[KnownDataset {
    name: "adult",
    base_url: "https://archive.ics.uci.edu/ml/machine-learning-databases/adult/",
    files: &[
        RemoteFile {
            name: "adult.data",
            sha256: "5b00264637dbfec36bdeaab5676b0b309ff9eb788d63554ca0a249491c86603d",
        },
        RemoteFile {
            name: "adult.test",
            sha256: "a2a9044bc167a35b2361efbabec64e89d69ce82d9790d2980119aac5fd7e9c05",
        },
    ],
    schema: ADULT_SCHEMA,
}];

const MAX_DOWNLOAD_BYTES: u64 = 64 << 20;

pub fn lookup(name: &str) -> Result<&'static KnownDataset> {
    DATASETS.iter().find(|d| d.name.eq_ignore_ascii_case(name)).with_context(|| {
        let names: Vec<_> = DATASETS.iter().map(|d| d.name).collect();
        format!("unknown dataset {name:?}; supported: {}", names.join(", "))
    })
}

/// `$XDG_CACHE_HOME/fairfm`, else `$HOME/.cache/fairfm`, else `.fairfm-cache`.
pub fn default_cache_dir() -> PathBuf {
    if let Some(x) = std::env::var_os("XDG_CACHE_HOME").filter(|v| !v.is_empty()) {
        return PathBuf::from(x).join("fairfm");
    }
    if let Some(h) = std::env::var_os("HOME").filter(|v| !v.is_empty()) {
        return PathBuf::from(h).join(".cache").join("fairfm");
    }
    PathBuf::from(".fairfm-cache")
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_hex(&bytes))
}

#[derive(Debug)]
pub struct Fetched {
    pub dir: PathBuf,
    pub files: Vec<PathBuf>,
    pub schema: PathBuf,
    /// Files retrieved this call; 0 on a full cache hit.
    pub retrieved: usize,
}

/// Cached paths for `ds` if every file is present (no verification).
pub fn cached_paths(ds: &KnownDataset, cache_dir: &Path) -> Option<Vec<PathBuf>> {
    let dir = cache_dir.join(ds.name);
    let paths: Vec<PathBuf> = ds.files.iter().map(|f| dir.join(f.name)).collect();
    paths.iter().all(|p| p.is_file()).then_some(paths)
}

/// Make every file of `ds` available under `cache_dir/<name>/`.
///
/// Files already cached are verified and never re-fetched. `source`
/// overrides the origin: an `http(s)://` base URL or a local directory.
pub fn fetch(ds: &KnownDataset, cache_dir: &Path, source: Option<&str>) -> Result<Fetched> {
    let dir = cache_dir.join(ds.name);
    fs::create_dir_all(&dir).with_context(|| format!("creating cache directory {}", dir.display()))?;
    let mut files = Vec::new();
    let mut retrieved = 0;
    for f in ds.files {
        let path = dir.join(f.name);
        if path.is_file() {
            verify(&path, &sha256_file(&path)?, f.sha256)?;
            log::info!("cache hit: {}", path.display());
        } else {
            let bytes = retrieve(ds, f.name, source)?;
            verify(&path, &sha256_hex(&bytes), f.sha256)?;
            let tmp = path.with_extension("part");
            fs::write(&tmp, &bytes).with_context(|| format!("writing {}", tmp.display()))?;
            fs::rename(&tmp, &path).with_context(|| format!("moving {} into place", tmp.display()))?;
            retrieved += 1;
        }
        files.push(path);
    }
    let schema = dir.join(format!("{}.schema.toml", ds.name));
    if fs::read_to_string(&schema).ok().as_deref() != Some(ds.schema) {
        fs::write(&schema, ds.schema).with_context(|| format!("writing {}", schema.display()))?;
    }
    Ok(Fetched {
        dir,
        files,
        schema,
        retrieved,
    })
}

fn verify(path: &Path, actual: &str, expected: &str) -> Result<()> {
    if actual != expected {
        bail!(
            "checksum mismatch for {}: expected sha256 {expected}, got {actual}",
            path.display()
        );
    }
    Ok(())
}

fn retrieve(ds: &KnownDataset, file: &str, source: Option<&str>) -> Result<Vec<u8>> {
    let base = source.unwrap_or(ds.base_url);
    if base.starts_with("http://") || base.starts_with("https://") {
        let url = format!("{}/{file}", base.trim_end_matches('/'));
        log::info!("downloading {url}");
        let mut resp = ureq::get(&url).call().with_context(|| format!("downloading {url}"))?;
        let mut bytes = Vec::new();
        resp.body_mut()
            .as_reader()
            .take(MAX_DOWNLOAD_BYTES)
            .read_to_end(&mut bytes)
            .with_context(|| format!("reading body of {url}"))?;
        Ok(bytes)
    } else {
        let path = Path::new(base).join(file);
        fs::read(&path).with_context(|| format!("reading {}", path.display()))
    }
}
