//! JSON with every float written to 17 significant digits, so values survive
//! a write/read cycle bit for bit and identical data gives identical bytes.

use std::fs;
use std::io;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::Formatter;

use crate::FormatError;

/// Every JSON and CSV float in this crate goes through here.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

struct FullPrecision;

impl Formatter for FullPrecision {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(fmt_f64(value).as_bytes())
    }
}

/// Serializes `value` followed by a newline.
pub fn to_string<T: Serialize + ?Sized>(value: &T) -> Result<String, FormatError> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FullPrecision);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_file<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), FormatError> {
    let text = to_string(value)?;
    fs::write(path, text).map_err(|e| FormatError::io(path, e))
}

pub fn read_file<T: DeserializeOwned>(path: &Path) -> Result<T, FormatError> {
    let text = fs::read_to_string(path).map_err(|e| FormatError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| FormatError::Parse { path: path.display().to_string(), source: e })
}
