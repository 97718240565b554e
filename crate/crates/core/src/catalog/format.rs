//! Plain-text packing files.
//!
//! ```text
//! # projpack v1
//! C 3 4
//! re_1 im_1 re_2 im_2 re_3 im_3      <- vector 1
//! ...                                <- n rows in total
//! ```
//!
//! Numbers use the shortest decimal that round-trips to the same `f64`.
//! Lines starting with `#` after the shape line are comments. Files end with
//! a single LF.

use nalgebra::DMatrix;

use crate::error::{Error, ParseKind, Result};
use crate::frame::{Field, UnitFrame};
use crate::C64;

pub const HEADER: &str = "# projpack v1";

/// Column-norm tolerance when reading files.
pub const FILE_NORM_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ParseOptions {
    /// Rescale columns to unit norm instead of rejecting them.
    pub normalize: bool,
}

/// Shortest round-trip decimal; exponent form below `1e-5`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else if x.abs() < 1e-5 {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

/// Canonical bytes of a frame. Deterministic for a given frame.
pub fn serialize_packing(frame: &UnitFrame) -> String {
    let d = frame.d();
    let mut out = String::with_capacity(64 + frame.n() * d * 2 * 20);
    out.push_str(HEADER);
    out.push('\n');
    out.push_str(&format!("{} {} {}\n", frame.field(), d, frame.n()));
    for j in 0..frame.n() {
        let row: Vec<String> = frame
            .column(j)
            .iter()
            .flat_map(|z| [format_number(z.re), format_number(z.im)])
            .collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

pub fn parse_packing(text: &str) -> Result<UnitFrame> {
    parse_packing_with(text, ParseOptions::default())
}

pub fn parse_packing_with(text: &str, opts: ParseOptions) -> Result<UnitFrame> {
    let lines: Vec<&str> = text.split('\n').collect();
    // split leaves an empty final piece when the text ends with LF
    let body = match lines.split_last() {
        Some((&"", rest)) => rest,
        _ => {
            return Err(Error::parse(
                lines.len(),
                ParseKind::MissingNewline,
                "file must end with a newline",
            ))
        }
    };
    let line_count = body.len();

    match body.first() {
        Some(h) if h.trim_end() == HEADER => {}
        _ => {
            return Err(Error::parse(
                1,
                ParseKind::Header,
                format!("expected `{HEADER}`"),
            ))
        }
    }
    let shape = body
        .get(1)
        .ok_or_else(|| Error::parse(2, ParseKind::Shape, "missing `<C|R> <d> <n>` line"))?;
    let (field, d, n) = parse_shape(shape)?;

    let mut data = Vec::with_capacity(2 * d * n);
    let mut rows = 0;
    for (i, raw) in body.iter().enumerate().skip(2) {
        let line_no = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if rows == n {
            return Err(Error::parse(
                line_no,
                ParseKind::RowCount,
                format!("expected {n} data rows, found more"),
            ));
        }
        let tokens: Vec<&str> = line.split_whitespace().collect();
        if tokens.len() != 2 * d {
            return Err(Error::parse(
                line_no,
                ParseKind::ColumnCount,
                format!("expected {} numbers, found {}", 2 * d, tokens.len()),
            ));
        }
        for pair in tokens.chunks(2) {
            let re = parse_number(pair[0], line_no)?;
            let im = parse_number(pair[1], line_no)?;
            if field == Field::Real && im != 0.0 {
                return Err(Error::parse(
                    line_no,
                    ParseKind::FieldMismatch,
                    format!("imaginary part {im} in a real packing"),
                ));
            }
            data.push(C64::new(re, im));
        }
        let col = &data[rows * d..];
        let norm = col.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !opts.normalize && (norm - 1.0).abs() > FILE_NORM_TOL {
            return Err(Error::parse(
                line_no,
                ParseKind::NotUnitNorm,
                format!("vector {} has norm {norm}", rows + 1),
            ));
        }
        rows += 1;
    }
    if rows != n {
        return Err(Error::parse(
            line_count,
            ParseKind::RowCount,
            format!("expected {n} data rows, found {rows}"),
        ));
    }
    let m = DMatrix::from_vec(d, n, data);
    let frame = if opts.normalize {
        UnitFrame::normalized(field, m)
    } else {
        UnitFrame::with_tolerance(field, m, FILE_NORM_TOL)
    };
    frame.map_err(|e| Error::parse(line_count, ParseKind::NotUnitNorm, e.to_string()))
}

fn parse_shape(line: &str) -> Result<(Field, usize, usize)> {
    let bad = |detail: String| Error::parse(2, ParseKind::Shape, detail);
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != 3 {
        return Err(bad(format!("expected `<C|R> <d> <n>`, found `{line}`")));
    }
    let field = match tokens[0] {
        "C" => Field::Complex,
        "R" => Field::Real,
        t => return Err(bad(format!("unknown field `{t}`"))),
    };
    let d: usize = tokens[1]
        .parse()
        .map_err(|_| bad(format!("bad d `{}`", tokens[1])))?;
    let n: usize = tokens[2]
        .parse()
        .map_err(|_| bad(format!("bad n `{}`", tokens[2])))?;
    if d == 0 || n == 0 {
        return Err(bad("d and n must be positive".into()));
    }
    Ok((field, d, n))
}

fn parse_number(token: &str, line: usize) -> Result<f64> {
    let x: f64 = token
        .parse()
        .map_err(|_| Error::parse(line, ParseKind::Number, format!("`{token}`")))?;
    if !x.is_finite() {
        return Err(Error::parse(
            line,
            ParseKind::NonFinite,
            format!("`{token}`"),
        ));
    }
    Ok(x)
}
