use std::io::Write;
use std::path::Path;

use anyhow::Context;
use serde::Serialize;
use serde_json::{json, Value};

/// Writes to `path` through a sibling temp file and a rename, or to stdout.
pub fn emit(out: Option<&Path>, contents: &str) -> anyhow::Result<()> {
    let Some(path) = out else {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(contents.as_bytes())?;
        return Ok(stdout.flush()?);
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).with_context(|| format!("creating temp file in {}", dir.display()))?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}

pub fn json_doc<T: Serialize>(config: &Value, key: &str, result: &T) -> String {
    let mut doc = serde_json::to_string_pretty(&json!({ "config": config, key: result })).expect("output serializes");
    doc.push('\n');
    doc
}

/// CSV body preceded by a `# config:` comment line.
pub fn csv_doc(config: &Value, body: &str) -> String {
    format!("# config: {config}\n{body}")
}
