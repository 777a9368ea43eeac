//! Report files under the cache directory.
//!
//! Layout: `<cache>/reports/<command>/<param-hash>/<content-hash>.json`, where
//! both hashes are the first 16 hex digits of a SHA-256. The parameter hash
//! covers the command's configuration; the content hash covers the report
//! bytes. Thread count, output format and cache location are not part of
//! either.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use quadk::Error;

pub const REPORT_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize)]
pub struct Report<'a> {
    pub tool: &'static str,
    pub version: &'static str,
    pub report_format: u32,
    pub command: &'a str,
    pub config: &'a Value,
    pub passed: Option<bool>,
    pub result: &'a Value,
}

pub fn hash16(bytes: &[u8]) -> String {
    hex::encode(&Sha256::digest(bytes)[..8])
}

/// Serialized report bytes; identical inputs give identical bytes.
pub fn render(command: &str, config: &Value, passed: Option<bool>, result: &Value) -> Vec<u8> {
    let report = Report {
        tool: "quadk",
        version: env!("CARGO_PKG_VERSION"),
        report_format: REPORT_FORMAT_VERSION,
        command,
        config,
        passed,
        result,
    };
    let mut bytes = serde_json::to_vec_pretty(&report).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

pub fn write(cache_dir: &Path, command: &str, config: &Value, bytes: &[u8]) -> Result<PathBuf, Error> {
    let params = serde_json::to_vec(config).expect("config serializes");
    let dir = cache_dir.join("reports").join(command).join(hash16(&params));
    let io = |path: &Path| {
        let path = path.to_path_buf();
        move |source| Error::CacheIo { path, source }
    };
    fs::create_dir_all(&dir).map_err(io(&dir))?;
    let path = dir.join(format!("{}.json", hash16(bytes)));
    if !path.exists() {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, bytes).map_err(io(&tmp))?;
        fs::rename(&tmp, &path).map_err(io(&path))?;
    }
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stable_names() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = serde_json::json!({"p": 3});
        let res = serde_json::json!({"x": [1, 2]});
        let a = render("alpha", &cfg, Some(true), &res);
        assert_eq!(a, render("alpha", &cfg, Some(true), &res));
        let p1 = write(dir.path(), "alpha", &cfg, &a).unwrap();
        let p2 = write(dir.path(), "alpha", &cfg, &a).unwrap();
        assert_eq!(p1, p2);
        assert_eq!(fs::read(&p1).unwrap(), a);
        let b = render("alpha", &cfg, Some(false), &res);
        assert_ne!(write(dir.path(), "alpha", &cfg, &b).unwrap(), p1);
    }
}
