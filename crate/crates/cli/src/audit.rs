//! File access goes through [`FileAudit`], which remembers every path read
//! or written so tests can check which files a command touched.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    Read,
    Write,
    List,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FileAccess {
    pub path: PathBuf,
    pub kind: AccessKind,
}

#[derive(Debug, Default)]
pub struct FileAudit {
    log: Mutex<Vec<FileAccess>>,
}

impl FileAudit {
    pub fn new() -> Self {
        Self::default()
    }

    fn record(&self, path: &Path, kind: AccessKind) {
        self.log
            .lock()
            .expect("audit log poisoned")
            .push(FileAccess {
                path: path.to_path_buf(),
                kind,
            });
    }

    pub fn read_to_string(&self, path: &Path) -> Result<String> {
        self.record(path, AccessKind::Read);
        fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
    }

    /// Writes through a temporary file in the target directory and renames it
    /// into place, so readers never see a partial file.
    pub fn write_atomic(&self, path: &Path, contents: &[u8]) -> Result<()> {
        self.record(path, AccessKind::Write);
        let dir = match path.parent() {
            Some(p) if !p.as_os_str().is_empty() => p,
            _ => Path::new("."),
        };
        fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
        let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| HarnessError::io(dir, e))?;
        tmp.write_all(contents)
            .map_err(|e| HarnessError::io(tmp.path(), e))?;
        tmp.as_file()
            .sync_all()
            .map_err(|e| HarnessError::io(tmp.path(), e))?;
        tmp.persist(path)
            .map_err(|e| HarnessError::io(path, e.error))?;
        Ok(())
    }

    /// Sorted entries of `dir`.
    pub fn list_dir(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        self.record(dir, AccessKind::List);
        let mut out = Vec::new();
        for entry in fs::read_dir(dir).map_err(|e| HarnessError::io(dir, e))? {
            out.push(entry.map_err(|e| HarnessError::io(dir, e))?.path());
        }
        out.sort();
        Ok(out)
    }

    pub fn accesses(&self) -> Vec<FileAccess> {
        self.log.lock().expect("audit log poisoned").clone()
    }

    pub fn reads(&self) -> Vec<PathBuf> {
        self.accesses()
            .into_iter()
            .filter(|a| a.kind == AccessKind::Read)
            .map(|a| a.path)
            .collect()
    }
}
