//! Output directory handling: overwrite protection, provenance metadata and
//! atomic writes (temp file + rename).

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

pub struct OutputDir {
    root: PathBuf,
    force: bool,
    metadata: Vec<(&'static str, String)>,
}

impl OutputDir {
    pub fn new(root: PathBuf, force: bool, command: &str, seed: u64, config_hash: &str) -> Self {
        OutputDir {
            root,
            force,
            metadata: vec![
                ("command", command.to_string()),
                ("seed", seed.to_string()),
                ("config_hash", config_hash.to_string()),
            ],
        }
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    /// Refuses to proceed if any of `names` already exists, unless forced.
    /// Call before doing any work so a refusal leaves nothing behind.
    pub fn claim(&self, names: &[String]) -> CliResult<()> {
        if self.force {
            return Ok(());
        }
        for name in names {
            let path = self.root.join(name);
            if path.exists() {
                return Err(CliError::Usage(format!(
                    "{} already exists; pass --force to overwrite",
                    path.display()
                )));
            }
        }
        Ok(())
    }

    /// Provenance lines shared by every file, followed by `extra`.
    pub fn metadata<'a>(&'a self, extra: &[(&'a str, String)]) -> Vec<(&'a str, String)> {
        self.metadata.iter().map(|(k, v)| (*k, v.clone())).chain(extra.iter().cloned()).collect()
    }

    /// Renders a file in memory, then writes it atomically under `rel`.
    pub fn write<F>(&self, rel: &str, render: F) -> CliResult<PathBuf>
    where
        F: FnOnce(&mut Vec<u8>) -> topic_privacy::Result<()>,
    {
        let mut buf = Vec::new();
        render(&mut buf).map_err(|e| CliError::Internal(format!("rendering {rel}: {e}")))?;
        let path = self.root.join(rel);
        let internal = |e: std::io::Error| CliError::Internal(format!("writing {}: {e}", path.display()));
        let dir = path.parent().unwrap_or(&self.root);
        fs::create_dir_all(dir).map_err(internal)?;
        let file_name = path.file_name().and_then(|n| n.to_str()).unwrap_or("out");
        let tmp = dir.join(format!(".{file_name}.tmp{}", std::process::id()));
        let result = fs::File::create(&tmp)
            .and_then(|mut f| f.write_all(&buf).and_then(|_| f.sync_all()))
            .and_then(|_| fs::rename(&tmp, &path));
        if let Err(e) = result {
            let _ = fs::remove_file(&tmp);
            return Err(internal(e));
        }
        Ok(path)
    }

    /// A text file that starts with the provenance block.
    pub fn write_text(&self, rel: &str, extra: &[(&str, String)], body: &str) -> CliResult<PathBuf> {
        let meta = self.metadata(extra);
        self.write(rel, |out| {
            topic_privacy::corpus::write_comment_header(&meta, &mut *out)?;
            out.extend_from_slice(body.as_bytes());
            Ok(())
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn refuses_existing_files_unless_forced() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::new(dir.path().to_path_buf(), false, "test", 1, "abc");
        out.write_text("a.txt", &[], "x\n").unwrap();
        assert!(matches!(out.claim(&["a.txt".into()]), Err(CliError::Usage(_))));
        assert!(out.claim(&["b.txt".into()]).is_ok());
        let forced = OutputDir::new(dir.path().to_path_buf(), true, "test", 1, "abc");
        assert!(forced.claim(&["a.txt".into()]).is_ok());
    }

    #[test]
    fn writes_provenance_and_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let out = OutputDir::new(dir.path().to_path_buf(), false, "test", 7, "abc");
        out.write_text("sub/a.txt", &[("mode", "x".into())], "body\n").unwrap();
        let text = fs::read_to_string(dir.path().join("sub/a.txt")).unwrap();
        assert_eq!(text, "# command=test\n# seed=7\n# config_hash=abc\n# mode=x\nbody\n");
        let names: Vec<_> = fs::read_dir(dir.path().join("sub")).unwrap().map(|e| e.unwrap().file_name()).collect();
        assert_eq!(names.len(), 1);
    }
}
