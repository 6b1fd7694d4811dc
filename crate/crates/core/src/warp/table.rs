//! Two-column `t,phi` text tables.

use super::WarpSolution;
use crate::error::{GeomError, Result};

pub const TABLE_HEADER: &str = "t,phi";

/// `t,phi` rows with 17 significant digits.
pub fn write_warp_table(sol: &WarpSolution, ts: &[f64]) -> Result<String> {
    let mut out = String::with_capacity(48 * (ts.len() + 1));
    out.push_str(TABLE_HEADER);
    out.push('\n');
    for &t in ts {
        let v = sol.phi(t)?;
        out.push_str(&format!("{t:.16e},{v:.16e}\n"));
    }
    Ok(out)
}

/// Reads a table written by [`write_warp_table`].
///
/// Blank lines and `#` comments are skipped, the header is optional, fields
/// may be separated by commas or tabs, and `t` must increase strictly.
pub fn parse_warp_table(text: &str) -> Result<Vec<(f64, f64)>> {
    let mut rows: Vec<(f64, f64)> = Vec::new();
    let mut seen_data = false;
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let err = |message: String| GeomError::Parse {
            line: idx + 1,
            message,
        };
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_data && line.replace('\t', ",").eq_ignore_ascii_case(TABLE_HEADER) {
            seen_data = true;
            continue;
        }
        seen_data = true;
        let fields: Vec<&str> = line.split([',', '\t']).map(str::trim).collect();
        if fields.len() != 2 {
            return Err(err(format!("expected 2 fields, found {}", fields.len())));
        }
        let parse = |s: &str| -> Result<f64> {
            let v: f64 = s.parse().map_err(|_| err(format!("not a number: {s:?}")))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(err(format!("non-finite value {s:?}")))
            }
        };
        let (t, v) = (parse(fields[0])?, parse(fields[1])?);
        if let Some(&(prev, _)) = rows.last() {
            if !(t > prev) {
                return Err(err(format!("t must increase ({t} after {prev})")));
            }
        }
        rows.push((t, v));
    }
    Ok(rows)
}
