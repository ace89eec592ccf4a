//! Output plumbing: atomic file writes, CSV with a reproducibility header,
//! JSON with a metadata block. No timestamps anywhere — identical inputs
//! must produce byte-identical outputs.

use serde_json::{Map, Value};
use std::io::Write;
use std::path::{Path, PathBuf};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Resolved run metadata echoed into every artifact.
#[derive(Debug, Clone, Default)]
pub struct Meta {
    pub command: String,
    /// Resolved (key, value) pairs: config plus effective flags.
    pub params: Vec<(String, String)>,
}

impl Meta {
    pub fn new(command: &str) -> Self {
        Meta {
            command: command.to_string(),
            params: Vec::new(),
        }
    }

    pub fn push(&mut self, key: &str, value: impl ToString) {
        self.params.push((key.to_string(), value.to_string()));
    }

    fn csv_header(&self) -> String {
        let mut s = format!("# adtrw {TOOL_VERSION}\n# command = {}\n", self.command);
        for (k, v) in &self.params {
            s.push_str(&format!("# {k} = {v}\n"));
        }
        s
    }

    fn json_value(&self) -> Value {
        let mut m = Map::new();
        m.insert(
            "tool".into(),
            Value::String(format!("adtrw {TOOL_VERSION}")),
        );
        m.insert("command".into(), Value::String(self.command.clone()));
        let mut params = Map::new();
        for (k, v) in &self.params {
            params.insert(k.clone(), Value::String(v.clone()));
        }
        m.insert("params".into(), Value::Object(params));
        Value::Object(m)
    }
}

/// 17 significant digits: round-trip exact for f64.
pub fn fmt_f64(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        v.to_string()
    }
}

/// Write atomically: temp file in the target directory, then rename.
fn atomic_write(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let dir = path.parent().unwrap_or_else(|| Path::new("."));
    let tmp: PathBuf = dir.join(format!(
        ".{}.tmp-{}",
        path.file_name().and_then(|s| s.to_str()).unwrap_or("out"),
        std::process::id()
    ));
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

/// Emit to a file (atomic) or stdout when no path is given.
pub fn emit(path: Option<&Path>, content: &str) -> std::io::Result<()> {
    match path {
        Some(p) => atomic_write(p, content.as_bytes()),
        None => {
            print!("{content}");
            std::io::stdout().flush()
        }
    }
}

/// A CSV table with the metadata comment block on top.
pub fn csv_table(meta: &Meta, columns: &[&str], rows: &[Vec<String>]) -> String {
    let mut s = meta.csv_header();
    s.push_str(&columns.join(","));
    s.push('\n');
    for row in rows {
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

/// A JSON document with `meta` plus caller fields.
pub fn json_doc(meta: &Meta, body: Map<String, Value>) -> String {
    let mut root = Map::new();
    root.insert("meta".into(), meta.json_value());
    for (k, v) in body {
        root.insert(k, v);
    }
    let mut s = serde_json::to_string_pretty(&Value::Object(root)).expect("serializable");
    s.push('\n');
    s
}

/// JSON number or null for infinities (JSON has no Inf literal).
pub fn json_num(v: f64) -> Value {
    if v.is_finite() {
        serde_json::Number::from_f64(v)
            .map(Value::Number)
            .unwrap_or(Value::Null)
    } else {
        Value::Null
    }
}
