//! Atomic file output and the run record embedded in every JSON artifact.

use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

use crate::args::Command;

/// Write through a temporary file in the destination directory, then rename
/// over `path`, so readers never see a partial file.
pub fn write_atomic(path: &Path, fill: impl FnOnce(&mut dyn Write) -> anyhow::Result<()>) -> anyhow::Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let tmp = tempfile::NamedTempFile::new_in(dir)
        .with_context(|| format!("cannot create a temporary file in {}", dir.display()))?;
    {
        let mut w = BufWriter::new(tmp.as_file());
        fill(&mut w)?;
        w.flush()?;
    }
    tmp.as_file().sync_all()?;
    tmp.persist(path)
        .map_err(|e| e.error)
        .with_context(|| format!("cannot write {}", path.display()))?;
    Ok(())
}

pub fn write_json(path: &Path, value: &Value) -> anyhow::Result<()> {
    write_atomic(path, |w| {
        serde_json::to_writer_pretty(&mut *w, value)?;
        writeln!(w)?;
        Ok(())
    })
}

/// JSON to `path`, or to stdout when no path is given.
pub fn emit_json(path: Option<&Path>, value: &Value) -> anyhow::Result<()> {
    match path {
        Some(p) => write_json(p, value),
        None => {
            let mut out = std::io::stdout().lock();
            serde_json::to_writer_pretty(&mut out, value)?;
            writeln!(out)?;
            Ok(())
        }
    }
}

pub fn write_csv_rows<R: Serialize>(path: &Path, rows: &[R]) -> anyhow::Result<()> {
    write_atomic(path, |w| {
        let mut cw = csv::Writer::from_writer(w);
        for r in rows {
            cw.serialize(r)?;
        }
        cw.flush()?;
        Ok(())
    })
}

/// `path` with `suffix` appended to its file name (`a.csv` → `a.csv.json`).
pub fn sidecar(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

/// The exact command that produced an artifact plus the library version.
pub fn run_record(cmd: &Command) -> Value {
    json!({
        "version": excerptlab::VERSION,
        "config": cmd,
    })
}

/// `{"run": <record>, ...fields}`
pub fn with_run(cmd: &Command, body: Value) -> Value {
    let mut out = serde_json::Map::new();
    out.insert("run".into(), run_record(cmd));
    match body {
        Value::Object(m) => out.extend(m),
        other => {
            out.insert("result".into(), other);
        }
    }
    Value::Object(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sidecar_appends_to_file_name() {
        assert_eq!(sidecar(Path::new("out/a.csv"), ".json"), PathBuf::from("out/a.csv.json"));
    }

    #[test]
    fn failed_fill_leaves_target_untouched() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.txt");
        std::fs::write(&path, "old").unwrap();
        let err = write_atomic(&path, |w| {
            w.write_all(b"partial")?;
            anyhow::bail!("interrupted")
        });
        assert!(err.is_err());
        assert_eq!(std::fs::read_to_string(&path).unwrap(), "old");
        assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 1);
    }
}
