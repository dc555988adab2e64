//! Set files: one element per line as `0x` followed by 32 hex digits;
//! `#` starts a comment; blank lines are ignored.

use std::fmt::Write as _;
use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum SetFileError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: expected 0x followed by 32 hex digits, found {text:?}")]
    BadElement { line: usize, text: String },
    #[error("line {line}: duplicate element")]
    Duplicate { line: usize },
}

pub fn parse_set(text: &str) -> Result<Vec<u128>, SetFileError> {
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let bad = || SetFileError::BadElement {
            line: i + 1,
            text: line.to_string(),
        };
        let hex = line
            .strip_prefix("0x")
            .or_else(|| line.strip_prefix("0X"))
            .ok_or_else(bad)?;
        if hex.len() != 32 || !hex.bytes().all(|b| b.is_ascii_hexdigit()) {
            return Err(bad());
        }
        let v = u128::from_str_radix(hex, 16).map_err(|_| bad())?;
        if !seen.insert(v) {
            return Err(SetFileError::Duplicate { line: i + 1 });
        }
        out.push(v);
    }
    Ok(out)
}

pub fn format_element(v: u128) -> String {
    format!("0x{v:032x}")
}

pub fn format_set(elements: &[u128], comment: Option<&str>) -> String {
    let mut s = String::with_capacity(35 * elements.len() + 64);
    if let Some(c) = comment {
        for line in c.lines() {
            let _ = writeln!(s, "# {line}");
        }
    }
    for &e in elements {
        s.push_str(&format_element(e));
        s.push('\n');
    }
    s
}

pub fn read_set(path: &Path) -> Result<Vec<u128>, SetFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| SetFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_set(&text)
}

pub fn write_set(
    path: &Path,
    elements: &[u128],
    comment: Option<&str>,
) -> Result<(), SetFileError> {
    std::fs::write(path, format_set(elements, comment)).map_err(|source| SetFileError::Io {
        path: path.display().to_string(),
        source,
    })
}
