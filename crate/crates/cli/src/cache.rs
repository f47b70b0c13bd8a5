//! Append-only JSON-lines store of colengths `c(q, f^a)`.
//!
//! Each line is one complete entry, written with a single append, so
//! concurrent writers can interleave lines but never split one. Unreadable
//! lines (e.g. a torn final line after a crash) are skipped with a warning.

use std::collections::HashMap;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use hkfractal::colength::{colength_table_with, ColengthTable, DenseLimit};
use hkfractal::{Error, Poly, Result};
use serde::{Deserialize, Serialize};

pub const CACHE_FILE: &str = "colength.jsonl";

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CacheEntry {
    pub p: u32,
    pub s: usize,
    pub poly: String,
    pub q: usize,
    pub a: usize,
    pub value: u64,
}

type Key = (u32, usize, String, usize, usize);

impl CacheEntry {
    fn key(&self) -> Key {
        (self.p, self.s, self.poly.clone(), self.q, self.a)
    }
}

pub struct Cache {
    file: Option<PathBuf>,
    map: HashMap<Key, u64>,
    verify: bool,
    pub hits: usize,
    pub computed: usize,
}

impl Cache {
    pub fn in_memory(verify: bool) -> Cache {
        Cache { file: None, map: HashMap::new(), verify, hits: 0, computed: 0 }
    }

    /// Opens `dir/colength.jsonl`, creating the directory if needed. Any I/O
    /// failure leaves an in-memory cache and a warning on stderr.
    pub fn open(dir: Option<&Path>, verify: bool) -> Cache {
        let mut cache = Cache::in_memory(verify);
        let Some(dir) = dir else { return cache };
        if let Err(e) = fs::create_dir_all(dir) {
            eprintln!("warning: cache directory {}: {e}; using an in-memory cache", dir.display());
            return cache;
        }
        let path = dir.join(CACHE_FILE);
        match File::open(&path) {
            Ok(file) => {
                for (i, line) in BufReader::new(file).lines().enumerate() {
                    let parsed = line
                        .map_err(|e| e.to_string())
                        .and_then(|l| serde_json::from_str::<CacheEntry>(&l).map_err(|e| e.to_string()));
                    match parsed {
                        Ok(entry) => {
                            cache.map.entry(entry.key()).or_insert(entry.value);
                        }
                        Err(e) => eprintln!("warning: {}:{}: skipping entry: {e}", path.display(), i + 1),
                    }
                }
            }
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
            Err(e) => {
                eprintln!("warning: reading {}: {e}; using an in-memory cache", path.display());
                return cache;
            }
        }
        cache.file = Some(path);
        cache
    }

    fn key(q: usize, f: &Poly, a: usize) -> Key {
        (f.modulus().get(), f.nvars(), f.canonical_string(), q, a)
    }

    /// `c(q, f^a)` for `a <= amax`, computing only when some entry is missing
    /// (or always, in verify mode, failing on any disagreement).
    pub fn table(&mut self, q: usize, f: &Poly, amax: usize, limit: DenseLimit) -> Result<ColengthTable> {
        let cached: Vec<Option<u64>> =
            (0..=amax).map(|a| self.map.get(&Cache::key(q, f, a)).copied()).collect();
        if !self.verify && cached.iter().all(Option::is_some) {
            self.hits += cached.len();
            let values = cached.into_iter().map(Option::unwrap).collect();
            return Ok(ColengthTable { q, f: f.clone(), values });
        }
        let table = colength_table_with(q, f, amax, limit)?;
        self.computed += table.values.len();
        let mut fresh = Vec::new();
        for (a, (&value, old)) in table.values.iter().zip(&cached).enumerate() {
            match old {
                Some(old) if *old != value => {
                    return Err(Error::Mismatch(format!(
                        "cache entry for {f} at q = {q}, a = {a} holds {old}, recomputed {value}"
                    )));
                }
                Some(_) => {}
                None => fresh.push(CacheEntry {
                    p: f.modulus().get(),
                    s: f.nvars(),
                    poly: f.canonical_string(),
                    q,
                    a,
                    value,
                }),
            }
        }
        self.store(fresh);
        Ok(table)
    }

    fn store(&mut self, entries: Vec<CacheEntry>) {
        if let Some(path) = &self.file {
            let written = OpenOptions::new().create(true).append(true).open(path).and_then(|mut file| {
                for e in &entries {
                    let mut line = serde_json::to_string(e).expect("entries serialize");
                    line.push('\n');
                    file.write_all(line.as_bytes())?;
                }
                Ok(())
            });
            if let Err(e) = written {
                eprintln!("warning: writing {}: {e}; continuing in memory", path.display());
                self.file = None;
            }
        }
        for e in entries {
            self.map.insert(e.key(), e.value);
        }
    }
}
