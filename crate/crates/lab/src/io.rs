//! Score arrays as CSV files.

use std::path::Path;

#[derive(Debug, thiserror::Error)]
pub enum ArrayIoError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("row {row}, column {col}: cannot parse {text:?} as a number")]
    Number { row: usize, col: usize, text: String },
    #[error("row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, got: usize, expected: usize },
    #[error("expected {expected} rows, found {got}")]
    NotSquare { got: usize, expected: usize },
}

/// `n` rows of `n` comma-separated numbers, no header.
pub fn read_array_csv(path: &Path) -> Result<Vec<Vec<f64>>, ArrayIoError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_path(path)?;
    parse_records(reader.records())
}

pub fn parse_array_csv(text: &str) -> Result<Vec<Vec<f64>>, ArrayIoError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    parse_records(reader.records())
}

fn parse_records<I>(records: I) -> Result<Vec<Vec<f64>>, ArrayIoError>
where
    I: Iterator<Item = csv::Result<csv::StringRecord>>,
{
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (row, rec) in records.enumerate() {
        let rec = rec?;
        let mut values = Vec::with_capacity(rec.len());
        for (col, field) in rec.iter().enumerate() {
            let v = field.parse::<f64>().map_err(|_| ArrayIoError::Number { row, col, text: field.into() })?;
            values.push(v);
        }
        if let Some(first) = rows.first() {
            if first.len() != values.len() {
                return Err(ArrayIoError::Ragged { row, got: values.len(), expected: first.len() });
            }
        }
        rows.push(values);
    }
    if let Some(first) = rows.first() {
        if first.len() != rows.len() {
            return Err(ArrayIoError::NotSquare { got: rows.len(), expected: first.len() });
        }
    }
    Ok(rows)
}

pub fn write_array_csv(path: &Path, rows: &[Vec<f64>]) -> Result<(), csv::Error> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for r in rows {
        w.write_record(r.iter().map(|v| format!("{v:?}")))?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_square_arrays() {
        let rows = parse_array_csv("1, -1, 0\n-1,1,0\n0,0,0\n").unwrap();
        assert_eq!(rows[0], vec![1.0, -1.0, 0.0]);
        assert!(matches!(parse_array_csv("1,2\n3\n"), Err(ArrayIoError::Csv(_)) | Err(ArrayIoError::Ragged { .. })));
        assert!(matches!(parse_array_csv("1,2\n"), Err(ArrayIoError::NotSquare { .. })));
        assert!(matches!(parse_array_csv("1,x\n3,4\n"), Err(ArrayIoError::Number { row: 0, col: 1, .. })));
    }

    #[test]
    fn round_trips_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.csv");
        let rows = vec![vec![0.1, -0.30000000000000004], vec![1e-300, 2.5]];
        write_array_csv(&path, &rows).unwrap();
        assert_eq!(read_array_csv(&path).unwrap(), rows);
    }
}
