//! Reading, atomic writing and hashing of files.

use std::fs;
use std::io::Write;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{ToolError, ToolResult};

pub fn read_bytes(path: &Path) -> ToolResult<Vec<u8>> {
    fs::read(path).map_err(|e| ToolError::io(path, e))
}

pub fn read_text(path: &Path) -> ToolResult<String> {
    let bytes = read_bytes(path)?;
    String::from_utf8(bytes).map_err(|_| ToolError::input(format!("{}: not valid UTF-8", path.display())))
}

/// Writes through a temporary sibling file and renames it into place, so
/// readers never observe a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> ToolResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let name = path
        .file_name()
        .ok_or_else(|| ToolError::input(format!("{}: not a file path", path.display())))?;
    let tmp = dir.join(format!(".{}.tmp{}", name.to_string_lossy(), std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    if let Err(e) = result {
        let _ = fs::remove_file(&tmp);
        return Err(ToolError::io(path, e));
    }
    Ok(())
}

pub fn create_dir_all(path: &Path) -> ToolResult<()> {
    fs::create_dir_all(path).map_err(|e| ToolError::io(path, e))
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes to `out`, or to stdout when `out` is `None`.
pub fn emit(out: Option<&Path>, bytes: &[u8]) -> ToolResult<()> {
    match out {
        Some(p) => write_atomic(p, bytes),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| ToolError::io(Path::new("<stdout>"), e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_replaces_and_leaves_no_temp() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(fs::read(&p).unwrap(), b"two");
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
    }

    #[test]
    fn missing_directory_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = write_atomic(&dir.path().join("nope/a.txt"), b"x").unwrap_err();
        assert_eq!(err.exit_code(), 4);
    }

    #[test]
    fn sha256_of_empty_input() {
        assert_eq!(
            sha256_hex(b""),
            "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855"
        );
    }
}
