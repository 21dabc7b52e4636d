//! Output directories: a lock file, a FAILED marker and a checksum manifest.

use std::fs::{self, File, OpenOptions};
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{CliError, Result};

pub const LOCK: &str = ".lock";
pub const FAILED: &str = "FAILED";
pub const MANIFEST: &str = "manifest.sha256";

/// Holds the lock of an output directory until dropped.
#[derive(Debug)]
pub struct OutDir {
    root: PathBuf,
    lock: PathBuf,
}

impl OutDir {
    /// Creates `root` if needed and takes its lock.
    pub fn lock(root: &Path) -> Result<Self> {
        fs::create_dir_all(root).map_err(|e| CliError::io(root, e))?;
        let lock = root.join(LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&lock) {
            Ok(mut f) => {
                let _ = writeln!(f, "{}", std::process::id());
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => {
                return Err(CliError::Config(format!(
                    "{} is locked by another run (remove {} if no run is active)",
                    root.display(),
                    lock.display()
                )))
            }
            Err(e) => return Err(CliError::io(&lock, e)),
        }
        Ok(OutDir {
            root: root.to_path_buf(),
            lock,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: &str) -> PathBuf {
        self.root.join(rel)
    }

    /// Creates the file `rel`, with its parent directories.
    pub fn create(&self, rel: &str) -> Result<File> {
        let p = self.path(rel);
        if let Some(parent) = p.parent() {
            fs::create_dir_all(parent).map_err(|e| CliError::io(parent, e))?;
        }
        File::create(&p).map_err(|e| CliError::io(&p, e))
    }

    pub fn write(&self, rel: &str, contents: &str) -> Result<()> {
        let mut f = self.create(rel)?;
        f.write_all(contents.as_bytes()).map_err(|e| CliError::io(self.path(rel), e))
    }

    /// Removes stale markers and manifests before a new run writes.
    pub fn start(&self) -> Result<()> {
        for name in [FAILED, MANIFEST] {
            let p = self.path(name);
            if p.exists() {
                fs::remove_file(&p).map_err(|e| CliError::io(&p, e))?;
            }
        }
        Ok(())
    }

    /// Leaves the artifacts in place and records why the run stopped.
    pub fn mark_failed(&self, err: &CliError) -> Result<()> {
        self.write(FAILED, &format!("{err}\n"))
    }

    /// Writes the manifest over `files` (paths relative to the root).
    pub fn seal(&self, files: &[String]) -> Result<()> {
        let mut sorted = files.to_vec();
        sorted.sort();
        sorted.dedup();
        let mut out = String::new();
        for rel in &sorted {
            out.push_str(&format!("{}  {rel}\n", sha256_file(&self.path(rel))?));
        }
        self.write(MANIFEST, &out)
    }
}

impl Drop for OutDir {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.lock);
    }
}

pub fn sha256_file(path: &Path) -> Result<String> {
    let mut f = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut h = Sha256::new();
    io::copy(&mut f, &mut h).map_err(|e| CliError::io(path, e))?;
    Ok(h.finalize().iter().map(|b| format!("{b:02x}")).collect())
}

/// Whether `root` holds a sealed build.
pub fn is_sealed(root: &Path) -> bool {
    root.join(MANIFEST).is_file() && !root.join(FAILED).exists()
}

/// Checks that `root` holds a complete build and that no listed file changed.
/// Returns the listed files.
pub fn check_manifest(root: &Path) -> Result<Vec<String>> {
    if root.join(FAILED).exists() {
        return Err(CliError::MissingArtifacts {
            dir: root.to_path_buf(),
            hint: "the last build failed (see FAILED); rerun `corrugate build`".into(),
        });
    }
    let m = root.join(MANIFEST);
    let text = fs::read_to_string(&m).map_err(|_| CliError::MissingArtifacts {
        dir: root.to_path_buf(),
        hint: "no manifest; run `corrugate build` first".into(),
    })?;
    let mut files = Vec::new();
    for line in text.lines() {
        let (sum, rel) = line.split_once("  ").ok_or_else(|| CliError::Checksum {
            dir: root.to_path_buf(),
            file: format!("malformed manifest line '{line}'"),
        })?;
        let p = root.join(rel);
        if !p.is_file() {
            return Err(CliError::Checksum {
                dir: root.to_path_buf(),
                file: format!("{rel} (missing)"),
            });
        }
        if sha256_file(&p)? != sum {
            return Err(CliError::Checksum {
                dir: root.to_path_buf(),
                file: rel.to_string(),
            });
        }
        files.push(rel.to_string());
    }
    Ok(files)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> PathBuf {
        let d = std::env::temp_dir().join(format!("corrugate-outdir-{name}-{}", std::process::id()));
        let _ = fs::remove_dir_all(&d);
        d
    }

    #[test]
    fn sha256_of_abc() {
        let d = tmp("abc");
        let o = OutDir::lock(&d).unwrap();
        o.write("a.txt", "abc").unwrap();
        assert_eq!(
            sha256_file(&o.path("a.txt")).unwrap(),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn second_lock_is_refused_until_release() {
        let d = tmp("lock");
        let a = OutDir::lock(&d).unwrap();
        assert_eq!(OutDir::lock(&d).unwrap_err().exit_code(), 2);
        drop(a);
        OutDir::lock(&d).unwrap();
    }

    #[test]
    fn tampering_is_detected() {
        let d = tmp("tamper");
        let o = OutDir::lock(&d).unwrap();
        o.write("sub/m.obj", "v 0 0 0\n").unwrap();
        o.seal(&["sub/m.obj".into()]).unwrap();
        assert_eq!(check_manifest(&d).unwrap(), vec!["sub/m.obj".to_string()]);
        o.write("sub/m.obj", "v 0 0 1\n").unwrap();
        let e = check_manifest(&d).unwrap_err();
        assert!(matches!(e, CliError::Checksum { .. }), "{e}");
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn missing_and_failed_builds_say_what_to_run() {
        let d = tmp("missing");
        let o = OutDir::lock(&d).unwrap();
        let e = check_manifest(&d).unwrap_err();
        assert!(e.to_string().contains("corrugate build"), "{e}");
        o.mark_failed(&CliError::Config("x".into())).unwrap();
        assert!(matches!(check_manifest(&d), Err(CliError::MissingArtifacts { .. })));
        assert!(!is_sealed(&d));
    }
}
