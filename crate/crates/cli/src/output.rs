//! Output plumbing: stdout or a file, JSON or line formats.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use collider_core::Result;

pub fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

/// Pretty-printed JSON document plus trailing newline.
pub fn emit_json<T: serde::Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut out = writer(path)?;
    serde_json::to_writer_pretty(&mut out, value)
        .map_err(|e| collider_core::Error::InvalidInput(format!("serialization: {e}")))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
