//! Tab-separated table helpers shared by the report writers and parsers.

use std::fmt::Write as _;

/// Full-precision float rendering. `f64`'s `Display` is the shortest
/// decimal that parses back to the same bits.
pub fn full(x: f64) -> String {
    format!("{x}")
}

/// Two-decimal rendering used by the human-readable tables.
pub fn two(x: f64) -> String {
    format!("{x:.2}")
}

/// Joins rows of cells with tabs and newlines. Every line, including the
/// last, is newline-terminated.
pub fn render<R, C>(rows: R) -> String
where
    R: IntoIterator<Item = C>,
    C: IntoIterator,
    C::Item: AsRef<str>,
{
    let mut out = String::new();
    for row in rows {
        for (i, cell) in row.into_iter().enumerate() {
            if i > 0 {
                out.push('\t');
            }
            out.push_str(cell.as_ref());
        }
        out.push('\n');
    }
    out
}

/// Pads columns to a common width for terminal display.
pub fn align(rows: &[Vec<String>]) -> String {
    let ncol = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut widths = vec![0; ncol];
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let mut out = String::new();
    for row in rows {
        let mut line = String::new();
        for (i, cell) in row.iter().enumerate() {
            if i > 0 {
                line.push_str("  ");
            }
            let _ = write!(line, "{cell:>width$}", width = widths[i]);
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Cells that would break the tab/newline framing.
pub fn is_safe_cell(s: &str) -> bool {
    !s.is_empty() && !s.contains(['\t', '\n', '\r'])
}
