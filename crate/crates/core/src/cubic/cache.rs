//! On-disk cache of cubic fields.
//!
//! Format: the first line is a JSON header
//! `{"format_version", "bound", "records", "counts"}`; every following line is
//! a record in the CSV layout of [`CubicFieldRecord::CSV_HEADER`], sorted by
//! `(|d_L|, form)`. The cache holds every field of either sign with
//! `|d_L| < bound`. `counts` tallies nowhere totally ramified fields by
//! `"sign|coset|split3"` and is checked on load.

use std::collections::BTreeMap;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{enumerate_cubic_fields_range, CubicFieldRecord};
use crate::error::{Error, Result};
use crate::exactmath::{Coset3, Sign};

pub const CACHE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct Header {
    format_version: u32,
    bound: u64,
    records: u64,
    counts: BTreeMap<String, u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CubicCache {
    bound: u64,
    records: Vec<CubicFieldRecord>,
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> Error + '_ {
    move |source| Error::CacheIo {
        path: path.to_path_buf(),
        source,
    }
}

impl CubicCache {
    /// Cache with `bound = 1` and no records.
    pub fn empty() -> Self {
        CubicCache {
            bound: 1,
            records: Vec::new(),
        }
    }

    /// All cubic fields with `|d_L| < bound`.
    pub fn build(bound: u64, threads: usize) -> Result<Self> {
        let mut c = CubicCache::empty();
        c.extend(bound, threads)?;
        Ok(c)
    }

    pub fn bound(&self) -> u64 {
        self.bound
    }

    pub fn records(&self) -> &[CubicFieldRecord] {
        &self.records
    }

    /// Enumerates `bound ≤ |d_L| < new_bound` and merges it in.
    pub fn extend(&mut self, new_bound: u64, threads: usize) -> Result<()> {
        if new_bound <= self.bound {
            return Ok(());
        }
        for sign in [Sign::Negative, Sign::Positive] {
            let more = enumerate_cubic_fields_range(self.bound, new_bound, sign, threads)?;
            self.records.extend(more);
        }
        self.records.sort_unstable_by_key(|r| r.sort_key());
        self.bound = new_bound;
        Ok(())
    }

    /// Tally of nowhere totally ramified fields by sign, coset and splitting type.
    pub fn counts(&self) -> BTreeMap<String, u64> {
        let mut out = BTreeMap::new();
        for r in self.records.iter().filter(|r| r.nowhere_totally_ramified) {
            let coset = Coset3::of(r.d_l).expect("fundamental discriminant");
            let key = format!("{}|{}|{}", Sign::of(r.d_l), coset, r.split3);
            *out.entry(key).or_insert(0) += 1;
        }
        out
    }

    fn header(&self) -> Header {
        Header {
            format_version: CACHE_FORMAT_VERSION,
            bound: self.bound,
            records: self.records.len() as u64,
            counts: self.counts(),
        }
    }

    /// Writes the cache atomically (temporary file, then rename).
    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let tmp: PathBuf = path.with_extension("tmp");
        {
            let file = fs::File::create(&tmp).map_err(io_err(&tmp))?;
            let mut w = std::io::BufWriter::new(file);
            let header = serde_json::to_string(&self.header()).expect("header serializes");
            writeln!(w, "{header}").map_err(io_err(&tmp))?;
            for r in &self.records {
                writeln!(w, "{}", r.to_csv()).map_err(io_err(&tmp))?;
            }
            w.flush().map_err(io_err(&tmp))?;
        }
        fs::rename(&tmp, path).map_err(io_err(path))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let file = fs::File::open(path).map_err(io_err(path))?;
        let mut lines = BufReader::new(file).lines();
        let first = lines
            .next()
            .ok_or_else(|| Error::CacheCorrupt(format!("{} is empty", path.display())))?
            .map_err(io_err(path))?;
        let header: Header = serde_json::from_str(&first)
            .map_err(|e| Error::CacheCorrupt(format!("bad header in {}: {e}", path.display())))?;
        if header.format_version != CACHE_FORMAT_VERSION {
            return Err(Error::CacheCorrupt(format!(
                "format version {} (expected {CACHE_FORMAT_VERSION})",
                header.format_version
            )));
        }
        let mut records = Vec::with_capacity(header.records as usize);
        for line in lines {
            let line = line.map_err(io_err(path))?;
            if line.is_empty() {
                continue;
            }
            records.push(CubicFieldRecord::from_csv(&line)?);
        }
        let cache = CubicCache {
            bound: header.bound,
            records,
        };
        if cache.records.len() as u64 != header.records {
            return Err(Error::CacheCorrupt(format!(
                "header lists {} records, file has {}",
                header.records,
                cache.records.len()
            )));
        }
        if cache.records.windows(2).any(|w| w[0].sort_key() >= w[1].sort_key())
            || cache.records.iter().any(|r| r.d_l.unsigned_abs() >= cache.bound)
        {
            return Err(Error::CacheCorrupt(
                "records unsorted, duplicated or out of bound".into(),
            ));
        }
        if cache.counts() != header.counts {
            return Err(Error::CacheCorrupt("header counts do not match records".into()));
        }
        Ok(cache)
    }

    /// Loads the cache at `path` if present, extends it to `bound` if needed,
    /// and saves any change.
    pub fn load_or_build(path: &Path, bound: u64, threads: usize) -> Result<Self> {
        let mut cache = if path.exists() {
            CubicCache::load(path)?
        } else {
            CubicCache::empty()
        };
        if cache.bound < bound {
            cache.extend(bound, threads)?;
            cache.save(path)?;
        }
        Ok(cache)
    }
}
