//! CSV tables and the run manifest.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

/// Seventeen significant digits, enough to round-trip an `f64`.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "NaN".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

/// A cell of a CSV row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

fn escape(text: &str) -> String {
    if text.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", text.replace('"', "\"\""))
    } else {
        text.to_string()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    header: Vec<String>,
    body: String,
    rows: usize,
}

impl Table {
    pub fn new(name: &str, header: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            body: String::new(),
            rows: 0,
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.header.len(), "row width of {}", self.name);
        let cells: Vec<String> = row
            .into_iter()
            .map(|c| match c {
                Cell::Int(v) => v.to_string(),
                Cell::Float(v) => format_float(v),
                Cell::Text(t) => escape(&t),
                Cell::Empty => String::new(),
            })
            .collect();
        self.body.push_str(&cells.join(","));
        self.body.push_str("\r\n");
        self.rows += 1;
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn render(&self) -> String {
        let header: Vec<String> = self.header.iter().map(|h| escape(h)).collect();
        format!("{}\r\n{}", header.join(","), self.body)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Writes `tables` into `dir` and returns `(file name, digest)` pairs.
pub fn write_tables(dir: &Path, tables: &[Table]) -> std::io::Result<Vec<(String, String)>> {
    std::fs::create_dir_all(dir)?;
    let mut digests = Vec::with_capacity(tables.len());
    for table in tables {
        let text = table.render();
        std::fs::write(dir.join(&table.name), &text)?;
        digests.push((table.name.clone(), sha256_hex(text.as_bytes())));
    }
    Ok(digests)
}

/// Plain-text manifest: config echo, version, wall-clock time and one
/// `file <name> sha256 <digest>` line per output.
pub fn render_manifest(
    echo: &[(String, String)],
    files: &[(String, String)],
    checks: &[(String, bool)],
) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "memwave {}", env!("CARGO_PKG_VERSION"));
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let _ = writeln!(out, "timestamp_unix {timestamp}");
    out.push_str("[config]\n");
    for (k, v) in echo {
        let _ = writeln!(out, "{k} = {v}");
    }
    out.push_str("[checks]\n");
    for (name, ok) in checks {
        let _ = writeln!(out, "{name} {}", if *ok { "pass" } else { "fail" });
    }
    out.push_str("[files]\n");
    for (name, digest) in files {
        let _ = writeln!(out, "file {name} sha256 {digest}");
    }
    out
}
