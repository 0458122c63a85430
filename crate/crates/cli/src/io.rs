//! Text input and fixed-precision output.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::CliError;

/// Significant digits of every number the tool prints.
pub const SIG_DIGITS: usize = 9;

/// Format with [`SIG_DIGITS`] significant digits. Plain decimal for moderate
/// magnitudes, exponent form otherwise. Does not depend on the locale.
pub fn fmt_num(x: f64) -> String {
    if x == 0.0 {
        return "0".to_owned();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", SIG_DIGITS - 1, x);
    let exp: i32 = sci[sci.find('e').expect("exponent form") + 1..].parse().expect("integer exponent");
    if (-5..9).contains(&exp) {
        let decimals = (SIG_DIGITS as i32 - 1 - exp).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

pub fn fmt_row(values: &[f64]) -> String {
    values.iter().map(|v| fmt_num(*v)).collect::<Vec<_>>().join(" ")
}

/// Read a whole file, or standard input for `-`.
pub fn read_text(path: &Path) -> Result<String, CliError> {
    if path == Path::new("-") {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Data(format!("reading standard input: {e}")))?;
        return Ok(s);
    }
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Rows of numbers, skipping blank and `#` lines. Every row must have one of `widths` columns.
pub fn read_rows(text: &str, widths: &[usize]) -> Result<Vec<Vec<f64>>, CliError> {
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect::<Option<Vec<f64>>>()
            .ok_or_else(|| CliError::Data(format!("line {}: expected numbers, got {line:?}", i + 1)))?;
        if !widths.contains(&row.len()) {
            return Err(CliError::Data(format!(
                "line {}: expected {} values, got {}",
                i + 1,
                widths.iter().map(|w| w.to_string()).collect::<Vec<_>>().join(" or "),
                row.len()
            )));
        }
        rows.push(row);
    }
    Ok(rows)
}

/// Write to `out`, or standard output when absent.
pub fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Data(format!("{}: {e}", p.display()))),
        None => {
            let mut stdout = io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Data(format!("writing standard output: {e}")))
        }
    }
}
