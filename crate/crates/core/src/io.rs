//! Text formats shared by the library and the command line: CSV matrices
//! (one row per line, no header, dimensions inferred) and fixed-precision
//! number formatting for reproducible reports.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Parses a matrix from CSV text. Rows are lines, entries are separated by
/// commas, the decimal separator is always `.`. Blank lines are skipped so
/// trailing newlines are harmless.
pub fn parse_matrix_csv(text: &str) -> Result<Matrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let mut row = Vec::new();
        for (col, field) in trimmed.split(',').enumerate() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::parse(format!(
                    "line {}, field {}: '{}' is not a number",
                    lineno + 1,
                    col + 1,
                    field.trim()
                ))
            })?;
            row.push(v);
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                return Err(Error::parse(format!(
                    "line {}: expected {} fields, found {}",
                    lineno + 1,
                    first.len(),
                    row.len()
                )));
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::parse("no rows in matrix text"));
    }
    Matrix::from_rows(&rows)
}

pub fn read_matrix_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::parse(format!("cannot read {}: {e}", path.display())))?;
    parse_matrix_csv(&text).map_err(|e| Error::parse(format!("{}: {e}", path.display())))
}

/// Parses a single-row CSV of numbers (vectors, φ tables).
pub fn parse_vector_csv(text: &str) -> Result<Vec<f64>> {
    let m = parse_matrix_csv(text)?;
    if m.rows() != 1 {
        return Err(Error::parse(format!(
            "expected a single-row CSV, found {} rows",
            m.rows()
        )));
    }
    Ok(m.data().to_vec())
}

pub fn read_vector_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)
        .map_err(|e| Error::parse(format!("cannot read {}: {e}", path.display())))?;
    parse_vector_csv(&text).map_err(|e| Error::parse(format!("{}: {e}", path.display())))
}

/// Renders a matrix in the shared CSV format with full-precision entries.
pub fn matrix_to_csv(m: &Matrix) -> String {
    let mut out = String::new();
    for i in 0..m.rows() {
        for j in 0..m.cols() {
            if j > 0 {
                out.push(',');
            }
            out.push_str(&format_significant(m[(i, j)], 17));
        }
        out.push('\n');
    }
    out
}

/// Formats `x` with `digits` significant digits, shortest-form (no trailing
/// zeros), locale independent. Used everywhere a report number is emitted so
/// identical runs serialize byte-identically.
pub fn format_significant(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".to_string()
        } else if x > 0.0 {
            "inf".to_string()
        } else {
            "-inf".to_string()
        };
    }
    let formatted = format!("{:.*e}", digits.saturating_sub(1), x);
    // Normalize "1.200000000000e2" to "1.2e2" and strip the mantissa point
    // when nothing follows it.
    let (mantissa, exp) = formatted
        .split_once('e')
        .expect("exponential format always contains e");
    let mantissa = if mantissa.contains('.') {
        mantissa.trim_end_matches('0').trim_end_matches('.')
    } else {
        mantissa
    };
    let exp: i32 = exp.parse().expect("exponent is an integer");
    // Prefer plain notation for moderate exponents; it reads better in CSV
    // and JSON alike.
    if (-4..=15).contains(&exp) {
        let shifted = format!("{mantissa}e{exp}");
        let v: f64 = shifted.parse().expect("normalized float reparses");
        let plain = format!("{v}");
        // v was rounded to `digits` significant digits already, so Rust's
        // shortest-roundtrip Display gives a stable plain form.
        plain
    } else {
        format!("{mantissa}e{exp}")
    }
}

/// Rounds to 12 significant digits; the precision every CLI report uses.
pub fn round_report(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("rounded float reparses")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matrix_roundtrip() {
        let m = Matrix::from_rows(&[vec![1.5, -2.0, 3.25], vec![0.0, 1e-3, 7.0]]).unwrap();
        let text = matrix_to_csv(&m);
        let back = parse_matrix_csv(&text).unwrap();
        assert_eq!(back.rows(), 2);
        assert_eq!(back.cols(), 3);
        for i in 0..2 {
            for j in 0..3 {
                assert_eq!(back[(i, j)], m[(i, j)]);
            }
        }
    }

    #[test]
    fn parse_reports_line_and_field() {
        let err = parse_matrix_csv("1,2\n3,oops\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("line 2"), "{msg}");
        assert!(msg.contains("field 2"), "{msg}");
        let err = parse_matrix_csv("1,2\n3\n").unwrap_err();
        assert!(err.to_string().contains("expected 2 fields"), "{err}");
        assert!(parse_matrix_csv("\n\n").is_err());
    }

    #[test]
    fn parse_skips_blank_lines_and_spaces() {
        let m = parse_matrix_csv(" 1 , 2 \n\n 3 , 4 \n").unwrap();
        assert_eq!(m[(0, 1)], 2.0);
        assert_eq!(m[(1, 0)], 3.0);
    }

    #[test]
    fn vector_requires_single_row() {
        assert_eq!(
            parse_vector_csv("0,1,2,3").unwrap(),
            vec![0.0, 1.0, 2.0, 3.0]
        );
        assert!(parse_vector_csv("1,2\n3,4").is_err());
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(format_significant(0.0, 12), "0");
        assert_eq!(format_significant(3.0, 12), "3");
        assert_eq!(format_significant(-1.5, 12), "-1.5");
        assert_eq!(format_significant(1.0 / 3.0, 12), "0.333333333333");
        assert_eq!(format_significant(1e20, 12), "1e20");
        // Values that differ past the 12th digit collapse to one string.
        let a = format_significant(1.000000000000111, 12);
        let b = format_significant(1.000000000000222, 12);
        assert_eq!(a, b);
    }

    #[test]
    fn report_rounding_is_idempotent() {
        for &x in &[std::f64::consts::PI, 1e-9, -123.456789, 2.0f64.sqrt() * 1e8] {
            let r = round_report(x);
            assert_eq!(round_report(r), r);
            assert!((r - x).abs() <= 1e-11 * x.abs());
        }
    }
}
