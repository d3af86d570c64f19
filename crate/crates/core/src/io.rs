//! CSV ingestion of observation tables.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::matrix::DataTable;

/// Reads one observation per row, comma-delimited. A first row that does not
/// parse as numbers is treated as a header.
pub fn read_data_csv(path: &Path) -> Result<DataTable> {
    let file = File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_data_csv(file)
}

pub fn parse_data_csv<R: Read>(reader: R) -> Result<DataTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut width: Option<usize> = None;
    let mut rows = 0usize;
    for (index, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| Error::Parse {
            line: e.position().map_or(index + 1, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(index + 1, |p| p.line() as usize);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let parsed: std::result::Result<Vec<f64>, _> =
            record.iter().map(|f| f.parse::<f64>()).collect();
        let row = match parsed {
            Ok(row) => row,
            Err(_) if index == 0 => continue,
            Err(e) => {
                return Err(Error::Parse {
                    line,
                    message: format!("non-numeric field ({e})"),
                })
            }
        };
        if let Some(bad) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line,
                message: format!("non-finite value in column {}", bad + 1),
            });
        }
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {w} fields, found {}", row.len()),
                })
            }
            Some(_) => {}
        }
        values.extend(row);
        rows += 1;
    }
    let p = width.ok_or_else(|| Error::invalid("no data rows"))?;
    DataTable::new(rows, p, values)
}

/// Writes a header `x1,…,xp` and one row per observation.
pub fn write_data_csv<W: Write>(data: &DataTable, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let csv_err = |e: csv::Error| Error::invalid(format!("csv: {e}"));
    w.write_record((1..=data.p()).map(|j| format!("x{j}"))).map_err(csv_err)?;
    for i in 0..data.n() {
        w.write_record(data.row(i).iter().map(|v| v.to_string())).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::invalid(format!("csv: {e}")))?;
    Ok(())
}

pub fn save_data_csv(data: &DataTable, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_data_csv(data, std::io::BufWriter::new(file))
}
