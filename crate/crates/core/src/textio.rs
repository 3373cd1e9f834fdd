//! Crate-private helpers shared by the text model formats.
//!
//! Reals are written with `{:.16e}` — 17 significant digits — which
//! round-trips every finite f64 exactly; parsers reject non-finite values
//! so a loaded model always satisfies the finiteness invariants.

use std::str::FromStr;

use crate::error::{Error, Result};

/// Formats a real for model files (17 significant digits, exact round-trip).
pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Parses a finite real, reporting the 1-based `line` on failure.
pub(crate) fn parse_f64(s: &str, line: u64) -> Result<f64> {
    match f64::from_str(s) {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(Error::model(line, format!("expected a finite real, found `{s}`"))),
    }
}

/// Parses an unsigned integer field, naming `what` on failure.
pub(crate) fn parse_int<T>(s: &str, line: u64, what: &str) -> Result<T>
where
    T: FromStr,
{
    s.parse()
        .map_err(|_| Error::model(line, format!("expected {what}, found `{s}`")))
}

/// Sequential reader over pre-split lines with 1-based position tracking.
pub(crate) struct LineCursor<'a> {
    lines: &'a [String],
    pos: usize,
}

impl<'a> LineCursor<'a> {
    pub fn new(lines: &'a [String]) -> Self {
        LineCursor { lines, pos: 0 }
    }

    /// 1-based number of the line most recently returned by [`next`](Self::next).
    pub fn line_no(&self) -> u64 {
        self.pos as u64
    }

    /// Next line, or a ModelFormat error at EOF.
    pub fn next(&mut self) -> Result<&'a str> {
        let line = self
            .lines
            .get(self.pos)
            .ok_or_else(|| Error::model(self.pos as u64 + 1, "unexpected end of file"))?;
        self.pos += 1;
        Ok(line)
    }

    /// Next line split on spaces, with its 1-based number.
    pub fn next_fields(&mut self) -> Result<(Vec<&'a str>, u64)> {
        let line = self.next()?;
        Ok((line.split(' ').collect(), self.line_no()))
    }

    /// True once every line has been consumed.
    pub fn done(&self) -> bool {
        self.pos >= self.lines.len()
    }
}

/// Splits full text into lines for a [`LineCursor`] (no trailing empty line
/// for files ending in a newline).
pub(crate) fn split_lines(text: &str) -> Vec<String> {
    text.lines().map(str::to_string).collect()
}
