//! Plain-text matrix files.
//!
//! One line per matrix row, cells separated by commas, `.` as decimal point,
//! no header, LF line endings. Values are written in scientific notation with
//! 17 significant digits, which round-trips every finite `f64` exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{IcaError, Result};

pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_matrix<W: Write>(m: &DMatrix<f64>, mut out: W) -> std::io::Result<()> {
    let mut line = String::new();
    for row in m.row_iter() {
        line.clear();
        for (j, v) in row.iter().enumerate() {
            if j > 0 {
                line.push(',');
            }
            line.push_str(&format_value(*v));
        }
        line.push('\n');
        out.write_all(line.as_bytes())?;
    }
    Ok(())
}

pub fn write_matrix_file(path: impl AsRef<Path>, m: &DMatrix<f64>) -> Result<()> {
    let path = path.as_ref();
    let io_err = |source| IcaError::Io { path: path.to_path_buf(), source };
    let file = fs::File::create(path).map_err(io_err)?;
    let mut out = std::io::BufWriter::new(file);
    write_matrix(m, &mut out).map_err(io_err)?;
    out.flush().map_err(io_err)
}

/// Parse matrix text. `origin` only labels error messages.
pub fn parse_matrix(text: &str, origin: &Path) -> Result<DMatrix<f64>> {
    let parse_err = |row: usize, column: usize, message: String| IcaError::Parse {
        path: origin.to_path_buf(),
        row,
        column,
        message,
    };

    let body = text.strip_suffix('\n').unwrap_or(text);
    if body.is_empty() {
        return Err(parse_err(1, 1, "empty matrix".into()));
    }
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (i, line) in body.split('\n').enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let mut count = 0;
        for (j, cell) in line.split(',').enumerate() {
            let cell = cell.trim();
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(i + 1, j + 1, format!("not a number: '{cell}'")))?;
            if !v.is_finite() {
                return Err(parse_err(i + 1, j + 1, format!("non-finite value '{cell}'")));
            }
            values.push(v);
            count += 1;
        }
        match width {
            None => width = Some(count),
            Some(w) if w != count => {
                return Err(parse_err(
                    i + 1,
                    count.min(w) + 1,
                    format!("row has {count} columns, expected {w}"),
                ))
            }
            _ => {}
        }
        rows += 1;
    }
    Ok(DMatrix::from_row_slice(rows, width.unwrap_or(0), &values))
}

pub fn read_matrix_file(path: impl AsRef<Path>) -> Result<DMatrix<f64>> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| IcaError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_matrix(&text, path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn origin() -> &'static Path {
        Path::new("test.csv")
    }

    #[test]
    fn writes_documented_layout() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, -0.5, 0.0, 1e-300]);
        let mut buf = Vec::new();
        write_matrix(&m, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "1.0000000000000000e0,-5.0000000000000000e-1\n0.0000000000000000e0,1.0000000000000000e-300\n"
        );
    }

    #[test]
    fn ragged_rows_name_the_row() {
        match parse_matrix("1,2,3\n4,5\n", origin()).unwrap_err() {
            IcaError::Parse { row, column, .. } => assert_eq!((row, column), (2, 3)),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn bad_cell_names_row_and_column() {
        match parse_matrix("1,2\n3,x\n", origin()).unwrap_err() {
            IcaError::Parse { row, column, .. } => assert_eq!((row, column), (2, 2)),
            e => panic!("unexpected {e}"),
        }
        assert!(parse_matrix("1,nan\n", origin()).is_err());
        assert!(parse_matrix("", origin()).is_err());
    }

    #[test]
    fn tolerates_crlf_and_spaces() {
        let m = parse_matrix("1, 2\r\n3 ,4\r\n", origin()).unwrap();
        assert_eq!(m, DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 3.0, 4.0]));
    }

    proptest! {
        #[test]
        fn round_trip_is_bit_exact(
            rows in 1usize..5,
            bits in prop::collection::vec(any::<u64>(), 1..40),
        ) {
            let vals: Vec<f64> = bits.iter().map(|&b| f64::from_bits(b)).filter(|v| v.is_finite()).collect();
            let cols = vals.len() / rows;
            prop_assume!(cols > 0);
            let m = DMatrix::from_row_slice(rows, cols, &vals[..rows * cols]);
            let mut buf = Vec::new();
            write_matrix(&m, &mut buf).unwrap();
            let back = parse_matrix(std::str::from_utf8(&buf).unwrap(), origin()).unwrap();
            prop_assert!(m.iter().zip(back.iter()).all(|(a, b)| a.to_bits() == b.to_bits()));
            prop_assert_eq!(m.shape(), back.shape());
        }
    }
}
