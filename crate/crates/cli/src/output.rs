//! Output plumbing: provenance headers, config hashing, and writer
//! selection.
//!
//! Every emitted file starts with a `#` header row carrying the tool
//! version, command, seed, and a hash of the resolved parameters, followed
//! by a `# generated_at=` row. Reruns with identical parameters are
//! byte-identical apart from that timestamp row.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use sha2::{Digest, Sha256};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Hex SHA-256 of the canonical parameter string (first 16 chars).
pub fn config_hash(canonical_params: &str) -> String {
    let digest = Sha256::digest(canonical_params.as_bytes());
    hex::encode(digest)[..16].to_string()
}

/// Round-trip-exact float formatting that stays compact for tiny values
/// (plain Display expands 1e-130 into a 130-character decimal).
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 1e-4 && v.abs() < 1e15) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Provenance lines for one output file.
pub fn header_lines(command: &str, seed: u64, config_hash: &str) -> [String; 2] {
    let ts = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    [
        format!(
            "# grwlab v{TOOL_VERSION} command={command} seed={seed} config_sha256={config_hash}"
        ),
        format!("# generated_at={ts}"),
    ]
}

/// Buffered writer to the given path, or stdout when no path is given.
pub fn open_sink(out: Option<&PathBuf>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)
                    .with_context(|| format!("creating {}", parent.display()))?;
            }
            Box::new(BufWriter::new(
                File::create(path).with_context(|| format!("creating {}", path.display()))?,
            ))
        }
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Writes the provenance header.
pub fn write_header(w: &mut dyn Write, command: &str, seed: u64, hash: &str) -> io::Result<()> {
    for line in header_lines(command, seed, hash) {
        writeln!(w, "{line}")?;
    }
    Ok(())
}

/// Writer for a file inside an output directory.
pub fn open_in_dir(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    Ok(BufWriter::new(
        File::create(&path).with_context(|| format!("creating {}", path.display()))?,
    ))
}
