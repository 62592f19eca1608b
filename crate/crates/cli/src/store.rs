// Copyright 2026 ptomo Contributors
// SPDX-License-Identifier: Apache-2.0

//! Append-only results store: `store.jsonl` plus content-addressed sidecar
//! files under `tensors/`.

use std::collections::HashSet;
use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

/// Record schema version written by this build.
pub const SCHEMA_VERSION: &str = "1.0";

const STORE_FILE: &str = "store.jsonl";
const SIDECAR_DIR: &str = "tensors";

/// One line of the store.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Record {
    pub schema: String,
    pub plan: String,
    pub stage: String,
    pub seed: u64,
    pub kind: String,
    pub key: String,
    pub payload: Value,
}

impl Record {
    pub fn new(plan: &str, stage: &str, seed: u64, kind: &str, key: impl Into<String>, payload: Value) -> Self {
        Self { schema: SCHEMA_VERSION.into(), plan: plan.into(), stage: stage.into(), seed, kind: kind.into(), key: key.into(), payload }
    }

    pub fn decode<T: DeserializeOwned>(&self) -> Result<T> {
        self.decode_value(self.payload.clone())
    }

    /// Decodes `value` in place of the payload, reporting errors against
    /// this record.
    pub fn decode_value<T: DeserializeOwned>(&self, value: Value) -> Result<T> {
        serde_json::from_value(value).map_err(|e| CliError::Store {
            path: PathBuf::from(STORE_FILE),
            line: 0,
            message: format!("{} record {:?}: {e}", self.kind, self.key),
        })
    }
}

/// Reference to a sidecar file stored in a record payload.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SidecarRef {
    pub sha256: String,
    pub path: String,
}

fn check_schema(version: &str) -> std::result::Result<(), String> {
    let major = SCHEMA_VERSION.split('.').next();
    if version.split('.').next() == major {
        Ok(())
    } else {
        Err(format!("unsupported schema version {version:?} (this build reads {SCHEMA_VERSION})"))
    }
}

pub struct ResultsStore {
    root: PathBuf,
    records: Vec<Record>,
    keys: HashSet<(String, String, String)>,
}

impl ResultsStore {
    /// Opens (or creates) the store under `root` and loads existing records.
    pub fn open(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        let path = root.join(STORE_FILE);
        let mut records = Vec::new();
        if path.exists() {
            let file = File::open(&path).map_err(|e| CliError::io(&path, e))?;
            for (k, line) in BufReader::new(file).lines().enumerate() {
                let line = line.map_err(|e| CliError::io(&path, e))?;
                if line.trim().is_empty() {
                    continue;
                }
                let store_err = |message: String| CliError::Store { path: path.clone(), line: k + 1, message };
                let rec: Record = serde_json::from_str(&line).map_err(|e| store_err(e.to_string()))?;
                check_schema(&rec.schema).map_err(store_err)?;
                records.push(rec);
            }
        }
        let keys = records.iter().map(|r| (r.plan.clone(), r.kind.clone(), r.key.clone())).collect();
        Ok(Self { root: root.to_path_buf(), records, keys })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn records(&self) -> &[Record] {
        &self.records
    }

    pub fn contains(&self, plan: &str, kind: &str, key: &str) -> bool {
        self.keys.contains(&(plan.to_string(), kind.to_string(), key.to_string()))
    }

    /// Appends the records not yet present (by plan, kind and key) and
    /// returns how many were written.
    pub fn append(&mut self, batch: Vec<Record>) -> Result<usize> {
        let path = self.root.join(STORE_FILE);
        let mut fresh = Vec::new();
        for rec in batch {
            let id = (rec.plan.clone(), rec.kind.clone(), rec.key.clone());
            if self.keys.insert(id) {
                fresh.push(rec);
            }
        }
        if fresh.is_empty() {
            return Ok(0);
        }
        let mut buf = String::new();
        for rec in &fresh {
            buf.push_str(&serde_json::to_string(rec).expect("record serialises"));
            buf.push('\n');
        }
        let mut file = OpenOptions::new().create(true).append(true).open(&path).map_err(|e| CliError::io(&path, e))?;
        file.write_all(buf.as_bytes()).map_err(|e| CliError::io(&path, e))?;
        let n = fresh.len();
        self.records.extend(fresh);
        Ok(n)
    }

    pub fn find<'a>(&'a self, plan: &'a str, kind: &'a str) -> impl Iterator<Item = &'a Record> + 'a {
        self.records.iter().filter(move |r| r.plan == plan && r.kind == kind)
    }

    pub fn get(&self, plan: &str, kind: &str, key: &str) -> Option<&Record> {
        self.records.iter().find(|r| r.plan == plan && r.kind == kind && r.key == key)
    }

    /// Writes `value` as JSON to `tensors/<sha256>.json` (once) and returns
    /// the reference.
    pub fn write_sidecar<T: Serialize>(&self, value: &T) -> Result<SidecarRef> {
        let text = serde_json::to_string(value).expect("sidecar serialises");
        let sha = hex::encode(Sha256::digest(text.as_bytes()));
        let rel = format!("{SIDECAR_DIR}/{sha}.json");
        let dir = self.root.join(SIDECAR_DIR);
        fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
        let path = self.root.join(&rel);
        if !path.exists() {
            fs::write(&path, text).map_err(|e| CliError::io(&path, e))?;
        }
        Ok(SidecarRef { sha256: sha, path: rel })
    }

    /// Reads a sidecar and checks its content hash.
    pub fn read_sidecar<T: DeserializeOwned>(&self, r: &SidecarRef) -> Result<T> {
        let path = self.root.join(&r.path);
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let sha = hex::encode(Sha256::digest(text.as_bytes()));
        if sha != r.sha256 {
            return Err(CliError::Store { path, line: 0, message: format!("content hash {sha} does not match {}", r.sha256) });
        }
        serde_json::from_str(&text).map_err(|e| CliError::Store { path, line: 0, message: e.to_string() })
    }
}
