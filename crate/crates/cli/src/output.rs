//! Atomic file output and run manifests.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use tempfile::NamedTempFile;

pub fn sha256_bytes(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(sha256_bytes(&bytes))
}

/// A file that only appears at its destination once committed.
pub struct AtomicFile {
    dest: PathBuf,
    writer: BufWriter<NamedTempFile>,
}

impl AtomicFile {
    pub fn create(dest: &Path) -> Result<Self> {
        let dir = match dest.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        let tmp = NamedTempFile::new_in(dir).with_context(|| format!("creating a temporary file in {}", dir.display()))?;
        Ok(Self { dest: dest.to_path_buf(), writer: BufWriter::new(tmp) })
    }

    pub fn writer(&mut self) -> &mut impl Write {
        &mut self.writer
    }

    pub fn commit(self) -> Result<()> {
        let tmp = self.writer.into_inner().map_err(|e| e.into_error())?;
        tmp.as_file().sync_all()?;
        tmp.persist(&self.dest).with_context(|| format!("writing {}", self.dest.display()))?;
        Ok(())
    }
}

pub fn staged(dest: &Path, bytes: &[u8]) -> Result<AtomicFile> {
    let mut f = AtomicFile::create(dest)?;
    f.writer().write_all(bytes)?;
    Ok(f)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct FileDigest {
    pub path: PathBuf,
    pub sha256: String,
}

/// Everything needed to reproduce a command's output files.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    /// Arguments after the program name, as given.
    pub argv: Vec<String>,
    /// Working directory that relative paths in `argv` refer to.
    pub cwd: PathBuf,
    pub graph: Option<FileDigest>,
    pub parameters: serde_json::Value,
    pub outputs: Vec<FileDigest>,
    pub created: String,
}

impl RunManifest {
    pub fn path_for(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
        serde_json::from_reader(f).with_context(|| format!("parsing manifest {}", path.display()))
    }
}

/// Commits staged outputs, then writes a manifest next to the first one.
pub fn commit_with_manifest(
    ctx: &crate::Invocation,
    command: &str,
    graph: Option<&Path>,
    parameters: serde_json::Value,
    outputs: Vec<(PathBuf, AtomicFile)>,
) -> Result<()> {
    let Some((first, _)) = outputs.first() else { return Ok(()) };
    let manifest_path = RunManifest::path_for(first);
    let mut digests = Vec::new();
    for (path, file) in outputs {
        file.commit()?;
        digests.push(FileDigest { sha256: sha256_file(&path)?, path });
    }
    let graph = match graph {
        Some(p) => Some(FileDigest { path: p.to_path_buf(), sha256: sha256_file(p)? }),
        None => None,
    };
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        argv: ctx.argv.clone(),
        cwd: ctx.cwd.clone(),
        graph,
        parameters,
        outputs: digests,
        created: chrono::Utc::now().to_rfc3339(),
    };
    let json = serde_json::to_string_pretty(&manifest)? + "\n";
    staged(&manifest_path, json.as_bytes())?.commit()
}
