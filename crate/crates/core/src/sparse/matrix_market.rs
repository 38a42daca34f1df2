//! Matrix Market ingestion (`coordinate real general|symmetric`).
//!
//! Indices are 1-based on the wire and 0-based in the returned [`CsrMatrix`].
//! Symmetric files store one triangle; the parser mirrors every off-diagonal
//! entry so SPMV can walk full rows. Duplicate coordinates are summed.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::CsrMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_header(line_no: usize, line: &str) -> Result<Symmetry> {
    let tokens: Vec<String> = line
        .split_whitespace()
        .map(str::to_ascii_lowercase)
        .collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" {
        return Err(parse_err(
            line_no,
            "expected `%%MatrixMarket matrix coordinate <field> <symmetry>`",
        ));
    }
    if tokens[1] != "matrix" {
        return Err(parse_err(
            line_no,
            format!("unsupported object `{}`", tokens[1]),
        ));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(
            line_no,
            format!(
                "unsupported format `{}`, only coordinate is read",
                tokens[2]
            ),
        ));
    }
    if tokens[3] != "real" {
        return Err(parse_err(
            line_no,
            format!("unsupported field `{}`, only real is read", tokens[3]),
        ));
    }
    match tokens[4].as_str() {
        "general" => Ok(Symmetry::General),
        "symmetric" => Ok(Symmetry::Symmetric),
        other => Err(parse_err(
            line_no,
            format!("unsupported symmetry `{other}`"),
        )),
    }
}

fn parse_index(line_no: usize, token: &str, bound: usize, axis: &str) -> Result<usize> {
    let idx: usize = token
        .parse()
        .map_err(|_| parse_err(line_no, format!("invalid {axis} index `{token}`")))?;
    if idx == 0 || idx > bound {
        return Err(parse_err(
            line_no,
            format!("{axis} index {idx} outside declared bounds 1..={bound}"),
        ));
    }
    Ok(idx - 1)
}

/// Parses a Matrix Market coordinate stream into CSR.
pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<CsrMatrix> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));

    let (header_no, header) = match lines.next() {
        Some((no, line)) => (no, line?),
        None => return Err(parse_err(1, "empty stream, missing header")),
    };
    let symmetry = parse_header(header_no, &header)?;

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets: Vec<(usize, usize, f64)> = Vec::new();
    let mut seen = 0usize;
    let mut last_line = header_no;

    for (line_no, line) in lines {
        let line = line?;
        last_line = line_no;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let tokens: Vec<&str> = trimmed.split_whitespace().collect();
        match size {
            None => {
                if tokens.len() != 3 {
                    return Err(parse_err(
                        line_no,
                        "size line must hold `rows cols entries`",
                    ));
                }
                let parse = |t: &str| {
                    t.parse::<usize>()
                        .map_err(|_| parse_err(line_no, format!("invalid size token `{t}`")))
                };
                let (rows, cols, entries) =
                    (parse(tokens[0])?, parse(tokens[1])?, parse(tokens[2])?);
                if rows == 0 || cols == 0 || entries == 0 {
                    return Err(parse_err(line_no, "empty matrix"));
                }
                if symmetry == Symmetry::Symmetric && rows != cols {
                    return Err(parse_err(line_no, "symmetric matrix must be square"));
                }
                let mirrored = if symmetry == Symmetry::Symmetric {
                    2
                } else {
                    1
                };
                triplets.reserve(entries.saturating_mul(mirrored));
                size = Some((rows, cols, entries));
            }
            Some((rows, cols, entries)) => {
                if tokens.len() != 3 {
                    return Err(parse_err(line_no, "entry line must hold `row col value`"));
                }
                if seen == entries {
                    return Err(parse_err(
                        line_no,
                        format!("more than the declared {entries} entries"),
                    ));
                }
                let i = parse_index(line_no, tokens[0], rows, "row")?;
                let j = parse_index(line_no, tokens[1], cols, "column")?;
                let v: f64 = tokens[2].parse().map_err(|_| {
                    parse_err(line_no, format!("invalid real value `{}`", tokens[2]))
                })?;
                if !v.is_finite() {
                    return Err(parse_err(line_no, "non-finite value"));
                }
                triplets.push((i, j, v));
                if symmetry == Symmetry::Symmetric && i != j {
                    triplets.push((j, i, v));
                }
                seen += 1;
            }
        }
    }

    let (rows, cols, entries) = size.ok_or_else(|| parse_err(last_line, "missing size line"))?;
    if seen != entries {
        return Err(parse_err(
            last_line,
            format!("declared {entries} entries but found {seen}"),
        ));
    }
    CsrMatrix::from_triplets(rows, cols, triplets)
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<CsrMatrix> {
    let file = File::open(path)?;
    parse_matrix_market(BufReader::new(file))
}
