//! Matrix interchange.
//!
//! Binary `RISM` container, all integers and floats little-endian:
//!
//! | offset | size | field                                   |
//! |--------|------|-----------------------------------------|
//! | 0      | 4    | magic `b"RISM"`                         |
//! | 4      | 4    | version, `u32`, currently 1             |
//! | 8      | 4    | rows, `u32`                             |
//! | 12     | 4    | cols, `u32`                             |
//! | 16     | 16·rows·cols | entries row-major, each `(re: f64, im: f64)` |
//!
//! The text form is CSV with the header `row,col,re,im` and one line per
//! entry in row-major order. Floats are written with the shortest
//! representation that parses back to the same bits, so both formats are
//! lossless. A CSV without entries decodes to a 0 x 0 matrix.

use std::fmt::Write as _;

use crate::{CMatrix, C64};

pub const MAGIC: [u8; 4] = *b"RISM";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 16;
pub const ENTRY_LEN: usize = 16;
pub const CSV_HEADER: &str = "row,col,re,im";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MatrixIoError {
    #[error("input shorter than the {HEADER_LEN}-byte header ({0} bytes)")]
    ShortHeader(usize),
    #[error("bad magic bytes {0:02x?}")]
    BadMagic([u8; 4]),
    #[error("unsupported container version {0}")]
    UnsupportedVersion(u32),
    #[error("dimensions {rows} x {cols} overflow the addressable size")]
    TooLarge { rows: u32, cols: u32 },
    #[error("payload is {got} bytes, expected {expected}")]
    PayloadLength { expected: usize, got: usize },
    #[error("matrix dimension {0} does not fit in u32")]
    DimensionOverflow(usize),
    #[error("CSV line {line}: {msg}")]
    Csv { line: usize, msg: String },
}

/// Encodes `m` as a `RISM` container.
pub fn encode_rism(m: &CMatrix) -> Result<Vec<u8>, MatrixIoError> {
    let rows = u32::try_from(m.nrows()).map_err(|_| MatrixIoError::DimensionOverflow(m.nrows()))?;
    let cols = u32::try_from(m.ncols()).map_err(|_| MatrixIoError::DimensionOverflow(m.ncols()))?;
    let mut out = Vec::with_capacity(HEADER_LEN + ENTRY_LEN * m.len());
    out.extend_from_slice(&MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&rows.to_le_bytes());
    out.extend_from_slice(&cols.to_le_bytes());
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            out.extend_from_slice(&z.re.to_le_bytes());
            out.extend_from_slice(&z.im.to_le_bytes());
        }
    }
    Ok(out)
}

fn u32_at(bytes: &[u8], at: usize) -> u32 {
    u32::from_le_bytes(bytes[at..at + 4].try_into().expect("4-byte slice"))
}

fn f64_at(bytes: &[u8], at: usize) -> f64 {
    f64::from_le_bytes(bytes[at..at + 8].try_into().expect("8-byte slice"))
}

/// Decodes a `RISM` container. The payload length must match the header
/// exactly; nothing is allocated before that check.
pub fn decode_rism(bytes: &[u8]) -> Result<CMatrix, MatrixIoError> {
    if bytes.len() < HEADER_LEN {
        return Err(MatrixIoError::ShortHeader(bytes.len()));
    }
    let magic: [u8; 4] = bytes[0..4].try_into().expect("4-byte slice");
    if magic != MAGIC {
        return Err(MatrixIoError::BadMagic(magic));
    }
    let version = u32_at(bytes, 4);
    if version != VERSION {
        return Err(MatrixIoError::UnsupportedVersion(version));
    }
    let (rows, cols) = (u32_at(bytes, 8), u32_at(bytes, 12));
    let expected = (rows as usize)
        .checked_mul(cols as usize)
        .and_then(|n| n.checked_mul(ENTRY_LEN))
        .ok_or(MatrixIoError::TooLarge { rows, cols })?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != expected {
        return Err(MatrixIoError::PayloadLength { expected, got: payload.len() });
    }
    let (rows, cols) = (rows as usize, cols as usize);
    Ok(CMatrix::from_fn(rows, cols, |r, c| {
        let at = (r * cols + c) * ENTRY_LEN;
        C64::new(f64_at(payload, at), f64_at(payload, at + 8))
    }))
}

/// Writes `m` as CSV.
pub fn write_csv(m: &CMatrix) -> String {
    let mut out = String::with_capacity(32 * (m.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in 0..m.nrows() {
        for c in 0..m.ncols() {
            let z = m[(r, c)];
            writeln!(out, "{r},{c},{:?},{:?}", z.re, z.im).expect("writing to a String");
        }
    }
    out
}

fn csv_err<T>(line: usize, msg: impl Into<String>) -> Result<T, MatrixIoError> {
    Err(MatrixIoError::Csv { line, msg: msg.into() })
}

/// Parses the CSV written by [`write_csv`]. Entries must appear exactly once
/// each, in row-major order, and cover a full rectangle. Blank lines and a
/// trailing newline are ignored.
pub fn parse_csv(text: &str) -> Result<CMatrix, MatrixIoError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, h)) if h.trim() == CSV_HEADER => {}
        Some((i, _)) => return csv_err(i + 1, format!("expected header '{CSV_HEADER}'")),
        None => return csv_err(1, "missing header"),
    }
    let mut entries: Vec<(usize, usize, C64)> = Vec::new();
    for (i, line) in lines {
        let no = i + 1;
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 4 {
            return csv_err(no, format!("expected 4 fields, found {}", fields.len()));
        }
        let idx = |s: &str, what: &str| s.parse::<usize>().or_else(|_| csv_err(no, format!("invalid {what} index '{s}'")));
        let num = |s: &str| s.parse::<f64>().or_else(|_| csv_err(no, format!("invalid number '{s}'")));
        entries.push((idx(fields[0], "row")?, idx(fields[1], "column")?, C64::new(num(fields[2])?, num(fields[3])?)));
    }
    if entries.is_empty() {
        return Ok(CMatrix::zeros(0, 0));
    }
    // the first row fixes the column count
    let cols = entries.iter().take_while(|e| e.0 == 0).count();
    if cols == 0 || !entries.len().is_multiple_of(cols) {
        return csv_err(0, "entries do not form a full rectangle");
    }
    let rows = entries.len() / cols;
    for (pos, &(r, c, _)) in entries.iter().enumerate() {
        if (r, c) != (pos / cols, pos % cols) {
            return csv_err(pos + 2, format!("entry ({r}, {c}) out of row-major order"));
        }
    }
    Ok(CMatrix::from_fn(rows, cols, |r, c| entries[r * cols + c].2))
}
