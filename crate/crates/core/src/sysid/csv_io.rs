use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::narx::IoData;
use crate::error::{Error, Result};

/// Zero-based column indices of the input and output sequences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvColumns {
    pub u: usize,
    pub y: usize,
}

impl Default for CsvColumns {
    fn default() -> Self {
        Self { u: 0, y: 1 }
    }
}

pub fn load_csv(path: impl AsRef<Path>, columns: CsvColumns) -> Result<IoData> {
    read_csv(std::fs::File::open(path)?, columns)
}

/// Parses comma-separated records. The first line is taken as a header when
/// none of its cells is a number.
pub fn read_csv(reader: impl Read, columns: CsvColumns) -> Result<IoData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut data = IoData::default();
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        if std::mem::take(&mut first) && rec.iter().all(|c| c.parse::<f64>().is_err()) {
            continue;
        }
        let cell = |column: usize| -> Result<f64> {
            let text = rec.get(column).ok_or(Error::MissingColumn { line, column })?;
            text.parse().map_err(|_| Error::Parse {
                line,
                message: format!("column {column}: {text:?} is not a number"),
            })
        };
        data.u.push(cell(columns.u)?);
        data.y.push(cell(columns.y)?);
    }
    log::debug!("read {} rows", data.len());
    Ok(data)
}

pub fn write_csv(path: impl AsRef<Path>, data: &IoData) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv_to(std::io::BufWriter::new(file), data)
}

/// Writes a `u,y` header and one row per sample, floats in shortest
/// round-trip form.
pub fn write_csv_to(writer: impl Write, data: &IoData) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let map = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(["u", "y"]).map_err(map)?;
    for (u, y) in data.u.iter().zip(&data.y) {
        w.write_record([u.to_string(), y.to_string()]).map_err(map)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn read(text: &str, columns: CsvColumns) -> Result<IoData> {
        read_csv(text.as_bytes(), columns)
    }

    #[test]
    fn two_columns_headerless() {
        let d = read("0.1,0.2\n0.3,0.4", CsvColumns::default()).unwrap();
        assert_eq!(d.u, [0.1, 0.3]);
        assert_eq!(d.y, [0.2, 0.4]);
    }

    #[test]
    fn header_is_skipped() {
        let d = read("u,y\n1,2\n3,4\n", CsvColumns::default()).unwrap();
        assert_eq!(d.len(), 2);
    }

    #[test]
    fn swapped_mapping() {
        let d = read("0.1,0.2\n0.3,0.4", CsvColumns { u: 1, y: 0 }).unwrap();
        assert_eq!(d.u, [0.2, 0.4]);
        assert_eq!(d.y, [0.1, 0.3]);
    }

    #[test]
    fn bad_cell_reports_line() {
        let err = read("1,2\n3,4\n5,abc\n", CsvColumns::default()).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn missing_column() {
        let err = read("1,2\n3\n", CsvColumns::default()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn { line: 2, column: 1 }));
    }

    #[test]
    fn round_trip_is_exact() {
        let data = IoData::new(vec![0.1, 1.0 / 3.0, -2e-300], vec![f64::MAX, 0.0, -7.25]).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&mut buf, &data).unwrap();
        assert_eq!(read_csv(buf.as_slice(), CsvColumns::default()).unwrap(), data);
    }
}
