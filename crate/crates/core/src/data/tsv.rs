use std::fs::File;
use std::io::{BufReader, BufWriter, Read};
use std::path::Path;

use crate::data::Dataset;
use crate::error::{Error, Result};

const TARGET: &str = "target";

/// Reads a tab-separated file with a header row. The column literally named
/// `target` is the regression target; every other column is a feature.
pub fn load_tsv(path: impl AsRef<Path>) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path)?;
    read_tsv(BufReader::new(file), path)
}

pub(crate) fn read_tsv<R: Read>(reader: R, path: &Path) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(b'\t')
        .has_headers(true)
        .from_reader(reader);
    let header: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if header.iter().all(|h| h.is_empty()) {
        return Err(Error::Data(format!("{}: empty file", path.display())));
    }
    let target_col = header
        .iter()
        .position(|h| h == TARGET)
        .ok_or_else(|| Error::Data(format!("{}: no column named '{TARGET}'", path.display())))?;
    let feature_names: Vec<String> = header
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != target_col)
        .map(|(_, h)| h.clone())
        .collect();

    let mut features = Vec::new();
    let mut targets = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        for (col, cell) in record.iter().enumerate() {
            let value: f64 = cell.trim().parse().map_err(|_| Error::Parse {
                path: path.to_path_buf(),
                row: row + 1,
                column: header[col].clone(),
                value: cell.to_string(),
            })?;
            if col == target_col {
                targets.push(value);
            } else {
                features.push(value);
            }
        }
    }
    if targets.is_empty() {
        return Err(Error::Data(format!("{}: no data rows", path.display())));
    }
    log::debug!(
        "{}: {} rows, {} features",
        path.display(),
        targets.len(),
        feature_names.len()
    );
    Dataset::new(feature_names, features, targets)
}

/// Writes features then `target`, with shortest round-trip float formatting.
pub fn write_tsv(data: &Dataset, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .delimiter(b'\t')
        .from_writer(BufWriter::new(File::create(path)?));
    let mut header: Vec<&str> = data.feature_names.iter().map(String::as_str).collect();
    header.push(TARGET);
    w.write_record(&header)?;
    for i in 0..data.len() {
        let mut rec: Vec<String> = data.row(i).iter().map(|x| x.to_string()).collect();
        rec.push(data.targets[i].to_string());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write(dir: &tempfile::TempDir, name: &str, text: &str) -> std::path::PathBuf {
        let p = dir.path().join(name);
        std::fs::File::create(&p).unwrap().write_all(text.as_bytes()).unwrap();
        p
    }

    #[test]
    fn reads_small_file_exactly() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.tsv", "a\ttarget\tb\n1.5\t2\t-3\n0.1\t0.2\t0.3\n1e-3\t7\t8\n");
        let d = load_tsv(&p).unwrap();
        assert_eq!(d.feature_names, vec!["a", "b"]);
        assert_eq!(d.features, vec![1.5, -3.0, 0.1, 0.3, 1e-3, 8.0]);
        assert_eq!(d.targets, vec![2.0, 0.2, 7.0]);
    }

    #[test]
    fn missing_target_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.tsv", "a\tb\n1\t2\n");
        assert!(matches!(load_tsv(&p), Err(Error::Data(m)) if m.contains("target")));
    }

    #[test]
    fn bad_cell_names_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.tsv", "a\ttarget\n1\t2\n3\tfoo\n");
        match load_tsv(&p) {
            Err(Error::Parse { row, column, .. }) => {
                assert_eq!(row, 2);
                assert_eq!(column, "target");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn empty_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(&dir, "a.tsv", "");
        assert!(load_tsv(&p).is_err());
        let p = write(&dir, "b.tsv", "a\ttarget\n");
        assert!(load_tsv(&p).is_err());
    }
}
