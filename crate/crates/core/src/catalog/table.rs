//! Leaderboard and bounds tables.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::Serialize;

use crate::bounds::best_lower_bound;
use crate::error::{Error, Result};
use crate::frame::Field;

use super::CatalogEntry;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Text,
    Csv,
    Json,
}

impl FromStr for TableFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "text" => Ok(TableFormat::Text),
            "csv" => Ok(TableFormat::Csv),
            "json" => Ok(TableFormat::Json),
            _ => Err(Error::InvalidArgument(format!(
                "unknown table format `{s}`"
            ))),
        }
    }
}

/// `%.{sig}g`: `sig` significant digits, trailing zeros dropped, exponent
/// form outside `[1e-5, 10^sig)`.
pub fn format_sig(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -5 || exp >= sig as i32 {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (sig as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

const SIG: usize = 12;

fn cell(x: Option<f64>) -> String {
    x.map(|v| format_sig(v, SIG)).unwrap_or_default()
}

#[derive(Serialize)]
struct LeaderboardRow<'a> {
    d: usize,
    n: usize,
    field: Field,
    coherence: String,
    lower_bound: String,
    gap: String,
    creator_note: &'a str,
}

const LEADERBOARD_COLUMNS: [&str; 7] = [
    "d",
    "n",
    "field",
    "coherence",
    "lower_bound",
    "gap",
    "creator_note",
];

/// Renders entries sorted by `(field, d, n)`.
pub fn render_leaderboard<'a>(
    entries: impl IntoIterator<Item = &'a CatalogEntry>,
    format: TableFormat,
) -> String {
    let mut rows: Vec<&CatalogEntry> = entries.into_iter().collect();
    rows.sort_by_key(|e| (e.field, e.d, e.n));
    let rows: Vec<LeaderboardRow> = rows
        .into_iter()
        .map(|e| LeaderboardRow {
            d: e.d,
            n: e.n,
            field: e.field,
            coherence: format_sig(e.coherence, SIG),
            lower_bound: format_sig(e.lower_bound, SIG),
            gap: format_sig(e.coherence - e.lower_bound, SIG),
            creator_note: &e.creator_note,
        })
        .collect();
    match format {
        TableFormat::Json => {
            let mut s = serde_json::to_string_pretty(&rows).expect("rows serialize");
            s.push('\n');
            s
        }
        TableFormat::Csv => {
            let mut s = LEADERBOARD_COLUMNS.join(",");
            s.push('\n');
            for r in &rows {
                let _ = writeln!(
                    s,
                    "{},{},{},{},{},{},{}",
                    r.d,
                    r.n,
                    r.field,
                    r.coherence,
                    r.lower_bound,
                    r.gap,
                    csv_escape(r.creator_note)
                );
            }
            s
        }
        TableFormat::Text => {
            let cells: Vec<[String; 7]> = rows
                .iter()
                .map(|r| {
                    [
                        r.d.to_string(),
                        r.n.to_string(),
                        r.field.to_string(),
                        r.coherence.clone(),
                        r.lower_bound.clone(),
                        r.gap.clone(),
                        r.creator_note.to_string(),
                    ]
                })
                .collect();
            let mut widths = LEADERBOARD_COLUMNS.map(str::len);
            for row in &cells {
                for (w, c) in widths.iter_mut().zip(row) {
                    *w = (*w).max(c.len());
                }
            }
            let mut s = String::new();
            let header: Vec<String> = LEADERBOARD_COLUMNS
                .iter()
                .zip(widths)
                .map(|(h, w)| format!("{h:<w$}"))
                .collect();
            s.push_str(header.join("  ").trim_end());
            s.push('\n');
            for row in &cells {
                let line: Vec<String> = row
                    .iter()
                    .zip(widths)
                    .map(|(c, w)| format!("{c:<w$}"))
                    .collect();
                s.push_str(line.join("  ").trim_end());
                s.push('\n');
            }
            s
        }
    }
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

pub const BOUNDS_COLUMNS: &str = "d,n,field,bukh_cox,welch,orthoplex,levenstein,best,best_name";

/// CSV of every bound for `d_min <= d <= d_max` and `d < n <= n_max`.
/// Inapplicable bounds are empty cells.
pub fn bounds_table(d_min: usize, d_max: usize, n_max: usize, field: Field) -> Result<String> {
    if d_min < 2 || d_min > d_max {
        return Err(Error::InvalidArgument(format!(
            "need 2 <= d_min <= d_max, got {d_min}..{d_max}"
        )));
    }
    if n_max <= d_max {
        return Err(Error::InvalidArgument(format!(
            "n_max = {n_max} must exceed d_max = {d_max}"
        )));
    }
    let mut s = String::from(BOUNDS_COLUMNS);
    s.push('\n');
    for d in d_min..=d_max {
        for n in d + 1..=n_max {
            let r = best_lower_bound(d, n, field);
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                d,
                n,
                field,
                cell(r.bukh_cox),
                cell(r.welch),
                cell(r.orthoplex),
                cell(r.levenstein),
                format_sig(r.best, SIG),
                r.best_name.map(|k| k.name()).unwrap_or("")
            );
        }
    }
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn significant_digits() {
        assert_eq!(format_sig(0.5, 12), "0.5");
        assert_eq!(format_sig(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_sig(2f64.sqrt(), 12), "1.41421356237");
        assert_eq!(format_sig(1.5e-9, 12), "1.5e-9");
        assert_eq!(format_sig(-2.5e-11, 3), "-2.5e-11");
        assert_eq!(format_sig(123456.0, 12), "123456");
        assert_eq!(format_sig(0.0, 12), "0");
    }

    #[test]
    fn empty_leaderboard_is_header_only() {
        let none: Vec<CatalogEntry> = vec![];
        assert_eq!(
            render_leaderboard(&none, TableFormat::Csv),
            "d,n,field,coherence,lower_bound,gap,creator_note\n"
        );
        assert_eq!(
            render_leaderboard(&none, TableFormat::Text).lines().count(),
            1
        );
        assert_eq!(render_leaderboard(&none, TableFormat::Json), "[]\n");
    }

    #[test]
    fn c3_row_nine() {
        let t = bounds_table(3, 3, 9, Field::Complex).unwrap();
        let row = t.lines().find(|l| l.starts_with("3,9,")).unwrap();
        let cells: Vec<&str> = row.split(',').collect();
        assert_eq!(cells[4], "0.5");
        assert_eq!(cells[5], "");
        assert_eq!(cells[6], "");
    }

    #[test]
    fn rejects_bad_ranges() {
        assert!(bounds_table(1, 3, 10, Field::Real).is_err());
        assert!(bounds_table(4, 3, 10, Field::Real).is_err());
        assert!(bounds_table(3, 5, 5, Field::Real).is_err());
    }
}
