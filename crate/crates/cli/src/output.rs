//! Deterministic artifact serialization.
//!
//! Floats are written with 17 significant digits (`{:.16e}`) in both CSV
//! and JSON so that round-tripping is lossless and repeated runs are
//! byte-identical. JSON objects serialize with sorted keys. Files are
//! written to a temp file in the target directory and renamed into place.

use std::io::{self, Write};
use std::path::Path;

use serde_json::Value;

/// 17-significant-digit scientific notation, lossless for f64.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// One CSV table: header plus rows, comma separated, LF line endings.
pub struct CsvTable {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out.into_bytes()
    }
}

struct SciFloatFormatter;

impl serde_json::ser::Formatter for SciFloatFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serializes a JSON value (object keys already sorted by serde_json's
/// BTreeMap) with the fixed float format and a trailing newline.
pub fn json_to_bytes(value: &Value) -> Vec<u8> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SciFloatFormatter);
    serde::Serialize::serialize(value, &mut ser).expect("JSON serialization cannot fail");
    out.push(b'\n');
    out
}

/// Writes via a temp file in the same directory followed by a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d)?,
        None => tempfile::NamedTempFile::new_in(".")?,
    };
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_17_digits_and_lossless() {
        let cases = [0.5, 1.0 / 3.0, 3.990268054304591, -1.2345678901234567e-8];
        for v in cases {
            let s = fmt_f64(v);
            assert_eq!(s.parse::<f64>().unwrap(), v, "round trip failed for {s}");
        }
        assert_eq!(fmt_f64(0.5), "5.0000000000000000e-1");
    }

    #[test]
    fn json_floats_use_fixed_format() {
        let value = serde_json::json!({ "b": 0.5, "a": 1 });
        let bytes = json_to_bytes(&value);
        let text = String::from_utf8(bytes).unwrap();
        // Keys sorted, float in scientific form.
        assert_eq!(text, "{\"a\":1,\"b\":5.0000000000000000e-1}\n");
    }
}
