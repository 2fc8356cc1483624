//! Label-first CSV files: column 1 is the class label in `1..=C`, the rest are features.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::Dataset;

fn csv_error(source: &str, row: usize, column: usize, message: impl Into<String>) -> Error {
    Error::Csv {
        path: source.to_string(),
        row,
        column,
        message: message.into(),
    }
}

/// Parses a dataset from any reader. `source` names the input in error messages;
/// rows and columns in errors are 1-based and count the header row if present.
pub fn read_csv<R: Read>(reader: R, has_header: bool, source: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut labels = Vec::new();
    let mut values = Vec::new();
    let mut width = None;
    for (idx, record) in rdr.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| csv_error(source, row, 0, e.to_string()))?;
        if has_header && idx == 0 {
            continue;
        }
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() < 2 {
            return Err(csv_error(
                source,
                row,
                record.len(),
                "need a label and at least one feature",
            ));
        }
        match width {
            None => width = Some(record.len()),
            Some(w) if w != record.len() => {
                return Err(csv_error(
                    source,
                    row,
                    record.len().min(w) + 1,
                    format!("expected {w} columns, found {}", record.len()),
                ))
            }
            _ => {}
        }
        let label_text = &record[0];
        let label: usize = label_text.parse().map_err(|_| {
            csv_error(
                source,
                row,
                1,
                format!("label '{label_text}' is not a positive integer"),
            )
        })?;
        if label == 0 {
            return Err(csv_error(source, row, 1, "labels start at 1"));
        }
        labels.push(label);
        for (col, cell) in record.iter().enumerate().skip(1) {
            if cell.is_empty() {
                return Err(csv_error(source, row, col + 1, "missing value"));
            }
            let v: f64 = cell.parse().map_err(|_| {
                csv_error(
                    source,
                    row,
                    col + 1,
                    format!("cannot parse '{cell}' as a number"),
                )
            })?;
            if !v.is_finite() {
                return Err(csv_error(
                    source,
                    row,
                    col + 1,
                    format!("non-finite value '{cell}'"),
                ));
            }
            values.push(v);
        }
    }
    let p = match width {
        Some(w) => w - 1,
        None => return Err(Error::InvalidDataset(format!("{source}: no data rows"))),
    };
    let class_count = labels.iter().copied().max().unwrap_or(0).max(2);
    let features = Array2::from_shape_vec((labels.len(), p), values)
        .map_err(|e| Error::InvalidDataset(format!("{source}: {e}")))?;
    Dataset::new(features, labels, class_count)
}

/// Loads a dataset; the number of classes is the largest label present (at least 2).
pub fn load_csv(path: impl AsRef<Path>, has_header: bool) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    read_csv(file, has_header, &path.display().to_string())
}

/// Writes `label,x1,..,xp` rows with a header line and 17 significant digits.
pub fn write_csv_to<W: Write>(dataset: &Dataset, out: W) -> std::io::Result<()> {
    let mut wtr = csv::Writer::from_writer(out);
    let p = dataset.n_features();
    let mut header = Vec::with_capacity(p + 1);
    header.push("label".to_string());
    header.extend((1..=p).map(|j| format!("x{j}")));
    wtr.write_record(&header)?;
    let mut record = Vec::with_capacity(p + 1);
    for (i, &y) in dataset.labels().iter().enumerate() {
        record.clear();
        record.push(y.to_string());
        record.extend(dataset.row(i).iter().map(|v| format!("{v:.16e}")));
        wtr.write_record(&record)?;
    }
    wtr.flush()
}

pub fn write_csv(dataset: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    write_csv_to(dataset, std::io::BufWriter::new(file)).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_small_file() {
        let text = "label,a,b\n1,0.5,2\n2,1e-3,-4.25\r\n2,3,0\n";
        let ds = read_csv(text.as_bytes(), true, "mem").unwrap();
        assert_eq!((ds.n_cases(), ds.n_features(), ds.class_count()), (3, 2, 2));
        assert_eq!(ds.features()[[1, 0]], 1e-3);
        assert_eq!(ds.labels(), &[1, 2, 2]);
    }

    #[test]
    fn label_zero_names_row() {
        let err = read_csv("1,0.5\n0,1.0\n".as_bytes(), false, "mem").unwrap_err();
        match err {
            Error::Csv { row, column, .. } => assert_eq!((row, column), (2, 1)),
            other => panic!("unexpected {other}"),
        }
    }

    #[test]
    fn bad_cells_and_ragged_rows() {
        let err = read_csv("1,0.5,abc\n".as_bytes(), false, "mem").unwrap_err();
        assert!(matches!(
            err,
            Error::Csv {
                row: 1,
                column: 3,
                ..
            }
        ));
        let err = read_csv("1,0.5,1\n2,0.1\n".as_bytes(), false, "mem").unwrap_err();
        assert!(matches!(err, Error::Csv { row: 2, .. }));
        let err = read_csv("1,0.5,\n".as_bytes(), false, "mem").unwrap_err();
        assert!(matches!(
            err,
            Error::Csv {
                row: 1,
                column: 3,
                ..
            }
        ));
        let err = read_csv("1.5,0.5\n".as_bytes(), false, "mem").unwrap_err();
        assert!(matches!(
            err,
            Error::Csv {
                row: 1,
                column: 1,
                ..
            }
        ));
    }

    #[test]
    fn round_trip_keeps_bits() {
        let x = Array2::from_shape_vec(
            (2, 3),
            vec![0.1 + 0.2, -1e-310, 12345.678901234567, 1.0 / 3.0, 0.0, -7.0],
        )
        .unwrap();
        let ds = Dataset::new(x, vec![3, 1], 3).unwrap();
        let mut buf = Vec::new();
        write_csv_to(&ds, &mut buf).unwrap();
        let back = read_csv(buf.as_slice(), true, "mem").unwrap();
        assert_eq!(back.labels(), ds.labels());
        for (a, b) in back.features().iter().zip(ds.features().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
    }
}
