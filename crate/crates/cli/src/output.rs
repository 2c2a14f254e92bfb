//! Output files are written next to their destination with a `.partial`
//! suffix and renamed into place only once complete, so an interrupted
//! stage never leaves a half-written file under the final name.

use std::fs;
use std::path::{Path, PathBuf};

use gsd_core::{save_bundle, GraphBundle};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::CliResult;

/// Paths written by one command, in write order.
#[derive(Debug, Default)]
pub struct Outputs {
    pub paths: Vec<PathBuf>,
}

fn partial_path(path: &Path) -> PathBuf {
    let mut name = path.file_name().unwrap_or_default().to_os_string();
    name.push(".partial");
    path.with_file_name(name)
}

fn ensure_parent(path: &Path) -> CliResult<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(())
}

impl Outputs {
    pub fn write(&mut self, path: &Path, bytes: &[u8]) -> CliResult<()> {
        ensure_parent(path)?;
        let tmp = partial_path(path);
        fs::write(&tmp, bytes)?;
        fs::rename(&tmp, path)?;
        self.paths.push(path.to_path_buf());
        Ok(())
    }

    pub fn json<T: Serialize>(&mut self, path: &Path, value: &T) -> CliResult<()> {
        self.write(path, &json_bytes(value)?)
    }

    pub fn csv(&mut self, path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> CliResult<()> {
        self.write(path, &csv_bytes(b',', header, rows)?)
    }

    pub fn tsv(&mut self, path: &Path, header: &[&str], rows: Vec<Vec<String>>) -> CliResult<()> {
        self.write(path, &csv_bytes(b'\t', header, rows)?)
    }

    pub fn bundle(&mut self, g: &GraphBundle, dir: &Path) -> CliResult<()> {
        ensure_parent(dir)?;
        let tmp = partial_path(dir);
        if tmp.exists() {
            fs::remove_dir_all(&tmp)?;
        }
        save_bundle(g, &tmp)?;
        if dir.exists() {
            fs::remove_dir_all(dir)?;
        }
        fs::rename(&tmp, dir)?;
        self.paths.push(dir.to_path_buf());
        Ok(())
    }
}

pub fn json_bytes<T: Serialize>(value: &T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn csv_bytes(delimiter: u8, header: &[&str], rows: Vec<Vec<String>>) -> CliResult<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().delimiter(delimiter).from_writer(Vec::new());
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.into_inner().map_err(|e| crate::error::CliError::runtime(e.to_string()))
}

/// Empty cell for absent values.
pub fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Hex SHA-256 of every regular file under `path` (itself when a file),
/// keyed by path and sorted.
pub fn hash_tree(path: &Path) -> CliResult<Vec<(PathBuf, String)>> {
    let mut out = Vec::new();
    if path.is_dir() {
        let mut entries: Vec<PathBuf> = fs::read_dir(path)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
        entries.sort();
        for entry in entries {
            out.extend(hash_tree(&entry)?);
        }
    } else {
        let digest = Sha256::digest(fs::read(path)?);
        out.push((path.to_path_buf(), hex::encode(digest)));
    }
    Ok(out)
}
