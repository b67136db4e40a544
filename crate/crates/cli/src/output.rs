//! CSV artifacts and run manifests, written atomically.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

use crate::config::{fmt_f64, Config};

/// A CSV table held in memory until it is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_f64(&mut self, row: &[f64]) {
        self.rows.push(row.iter().map(|x| fmt_f64(*x)).collect());
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.header)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.into_inner()
            .map_err(|e| anyhow::anyhow!("csv buffer: {e}"))
    }
}

/// Writes `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).with_context(|| format!("writing {}", tmp.display()))?;
    fs::rename(&tmp, path).with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// Collects artifacts for one subcommand run.
pub struct Artifacts {
    dir: PathBuf,
    files: Vec<String>,
}

impl Artifacts {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn table(&mut self, name: &str, table: &Table) -> Result<PathBuf> {
        let path = self.dir.join(name);
        write_atomic(&path, &table.to_bytes()?)?;
        self.files.push(name.to_string());
        Ok(path)
    }

    /// `manifest.txt`: tool version, subcommand, every resolved parameter and the artifact list.
    pub fn manifest(self, subcommand: &str, cfg: &Config) -> Result<PathBuf> {
        let mut text = String::new();
        text.push_str(&format!("tool.name = {}\n", env!("CARGO_PKG_NAME")));
        text.push_str(&format!("tool.version = {}\n", env!("CARGO_PKG_VERSION")));
        text.push_str(&format!("subcommand = {subcommand}\n"));
        for (k, v) in cfg.resolved() {
            text.push_str(&format!("{k} = {v}\n"));
        }
        for f in &self.files {
            text.push_str(&format!("artifact = {f}\n"));
        }
        let path = self.dir.join("manifest.txt");
        write_atomic(&path, text.as_bytes())?;
        Ok(path)
    }
}

/// Reads a CSV with a header into named columns of floats.
pub fn read_columns(path: &Path, wanted: &[&str]) -> Result<Vec<Vec<f64>>> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("reading {}", path.display()))?;
    let header = r.headers()?.clone();
    let idx: Vec<usize> = wanted
        .iter()
        .map(|w| {
            header
                .iter()
                .position(|h| h == *w)
                .with_context(|| format!("{} has no column `{w}`", path.display()))
        })
        .collect::<Result<_>>()?;
    let mut cols = vec![Vec::new(); wanted.len()];
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        for (c, &i) in cols.iter_mut().zip(&idx) {
            let field = rec.get(i).unwrap_or("");
            c.push(field.parse::<f64>().with_context(|| {
                format!(
                    "{} row {}: cannot parse `{field}`",
                    path.display(),
                    line + 2
                )
            })?);
        }
    }
    Ok(cols)
}
