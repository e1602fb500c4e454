use std::fs::File;
use std::io::Read;
use std::path::Path;

use super::IngestError;
use crate::matrix::{Dtype, EmbeddingMatrix};

/// Reads a rectangular comma-separated numeric file. Values are always
/// parsed as `f64`.
pub fn load_csv(path: &Path, has_header: bool) -> Result<EmbeddingMatrix, IngestError> {
    let file = File::open(path).map_err(|e| IngestError::io(path, e))?;
    parse_csv(file, has_header).map(|m| m.with_label(path.display().to_string()))
}

pub fn parse_csv<R: Read>(reader: R, has_header: bool) -> Result<EmbeddingMatrix, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(has_header)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut data = Vec::new();
    let mut n_cols = None;
    let mut n_rows = 0;
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| IngestError::ParseError {
            row,
            col: 0,
            value: e.to_string(),
        })?;
        // A trailing blank line parses as a single empty field.
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        let expected = *n_cols.get_or_insert(record.len());
        if record.len() != expected {
            return Err(IngestError::RaggedRows {
                row,
                expected,
                found: record.len(),
            });
        }
        for (col, field) in record.iter().enumerate() {
            let v: f64 = field.parse().map_err(|_| IngestError::ParseError {
                row,
                col,
                value: field.to_string(),
            })?;
            if !v.is_finite() {
                return Err(IngestError::NonFiniteData { row, col });
            }
            data.push(v);
        }
        n_rows += 1;
    }
    let n_cols = n_cols.ok_or_else(|| IngestError::ShapeError("CSV has no data rows".into()))?;
    EmbeddingMatrix::new(n_rows, n_cols, data, Dtype::F64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_rows() {
        let m = parse_csv("1,2\n3,4\n".as_bytes(), false).unwrap();
        assert_eq!(m.shape(), (2, 2));
        assert_eq!(m.as_slice(), &[1.0, 2.0, 3.0, 4.0]);
    }

    #[test]
    fn header_is_skipped() {
        let m = parse_csv("a,b\n1,2\n".as_bytes(), true).unwrap();
        assert_eq!(m.shape(), (1, 2));
        assert_eq!(m.as_slice(), &[1.0, 2.0]);
    }

    #[test]
    fn crlf_and_scientific_notation() {
        let m = parse_csv("1e-3, -2.5\r\n3,4E2\r\n".as_bytes(), false).unwrap();
        assert_eq!(m.as_slice(), &[1e-3, -2.5, 3.0, 400.0]);
    }

    #[test]
    fn ragged_rows() {
        let err = parse_csv("1,2\n3\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, IngestError::RaggedRows { row: 1, expected: 2, found: 1 }));
    }

    #[test]
    fn bad_cell_reports_position() {
        let err = parse_csv("1,2\n3,x\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, IngestError::ParseError { row: 1, col: 1, .. }));
        let err = parse_csv("1,inf\n".as_bytes(), false).unwrap_err();
        assert!(matches!(err, IngestError::NonFiniteData { row: 0, col: 1 }));
    }

    #[test]
    fn header_only_is_empty() {
        assert!(matches!(
            parse_csv("a,b\n".as_bytes(), true),
            Err(IngestError::ShapeError(_))
        ));
    }
}
