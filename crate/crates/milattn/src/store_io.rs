//! Embedding store files and CSV import.

use std::path::Path;

use milattn_core::embed::{decode_store, encode_store, Embedding, EmbeddingStore};

use crate::error::{Error, Result};
use crate::imageio::{read_file, write_file};

pub fn write_store(store: &EmbeddingStore, path: &Path) -> Result<()> {
    write_file(path, &encode_store(store))
}

pub fn read_store(path: &Path, slide_id: &str) -> Result<EmbeddingStore> {
    let bytes = read_file(path)?;
    decode_store(&bytes, slide_id).map_err(|e| Error::at(path, e))
}

/// Reads a CSV with header `x,y,f0,…,f{dim−1}`, one patch per row.
/// Errors carry the 1-based line number of the offending row.
pub fn import_csv(path: &Path, slide_id: &str) -> Result<EmbeddingStore> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, 1, e))?;
    let header = reader.headers().map_err(|e| csv_error(path, 1, e))?.clone();
    let names: Vec<&str> = header.iter().collect();
    if names.len() < 2 || names[0] != "x" || names[1] != "y" {
        return Err(bad_line(path, 1, "header must start with x,y"));
    }
    for (i, name) in names[2..].iter().enumerate() {
        if *name != format!("f{i}") {
            return Err(bad_line(path, 1, format!("expected column f{i}, found {name:?}")));
        }
    }
    let dim = names.len() - 2;
    let mut store = EmbeddingStore::new(slide_id, dim);
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            csv_error(path, line, e)
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != names.len() {
            return Err(bad_line(
                path,
                line,
                format!("expected {} fields, found {}", names.len(), record.len()),
            ));
        }
        let coord = |i: usize| -> Result<u32> {
            record[i]
                .parse::<u32>()
                .map_err(|_| bad_line(path, line, format!("{}: not a coordinate: {:?}", names[i], &record[i])))
        };
        let (x, y) = (coord(0)?, coord(1)?);
        let values = (2..record.len())
            .map(|i| {
                record[i]
                    .parse::<f32>()
                    .map_err(|_| bad_line(path, line, format!("{}: not a number: {:?}", names[i], &record[i])))
            })
            .collect::<Result<Vec<f32>>>()?;
        let embedding = Embedding::new(values).map_err(|e| bad_line(path, line, e.to_string()))?;
        store
            .push(x, y, embedding)
            .map_err(|e| bad_line(path, line, e.to_string()))?;
    }
    Ok(store)
}

/// Writes a store as CSV in the import layout.
pub fn export_csv(store: &EmbeddingStore, path: &Path) -> Result<()> {
    let mut out = String::from("x,y");
    for i in 0..store.dim() {
        out.push_str(&format!(",f{i}"));
    }
    out.push('\n');
    for e in store.entries() {
        out.push_str(&format!("{},{}", e.x, e.y));
        for v in e.embedding.values() {
            out.push_str(&format!(",{v:?}"));
        }
        out.push('\n');
    }
    write_file(path, out.as_bytes())
}

fn bad_line(path: &Path, line: u64, message: impl Into<String>) -> Error {
    Error::Csv {
        path: path.into(),
        line,
        message: message.into(),
    }
}

fn csv_error(path: &Path, line: u64, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => bad_line(path, line, format!("{other:?}")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::fs;

    fn write(dir: &Path, name: &str, body: &str) -> std::path::PathBuf {
        let p = dir.join(name);
        fs::write(&p, body).unwrap();
        p
    }

    #[test]
    fn two_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(
            dir.path(),
            "a.csv",
            "x,y,f0,f1,f2,f3\n0,0,1,2,3,4\n16,0,0.5,0.25,0,1e-3\n",
        );
        let s = import_csv(&p, "a").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dim(), 4);
        assert_eq!(s.entries()[1].x, 16);
        assert_eq!(s.entries()[1].embedding.values(), &[0.5, 0.25, 0.0, 1e-3]);
    }

    #[test]
    fn header_only_is_empty() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "x,y,f0,f1\n");
        let s = import_csv(&p, "a").unwrap();
        assert!(s.is_empty());
        assert_eq!(s.dim(), 2);
    }

    #[test]
    fn ragged_row_names_line() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "x,y,f0,f1\n0,0,1,2\n1,0,1\n");
        let err = import_csv(&p, "a").unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }), "{err}");
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn non_numeric_and_duplicate_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "x,y,f0\n0,0,abc\n");
        assert!(matches!(import_csv(&p, "a").unwrap_err(), Error::Csv { line: 2, .. }));
        let p = write(dir.path(), "b.csv", "x,y,f0\n0,0,1\n0,0,2\n");
        let err = import_csv(&p, "a").unwrap_err();
        assert!(matches!(err, Error::Csv { line: 3, .. }));
        assert!(err.to_string().contains("duplicate patch coordinate"));
        let p = write(dir.path(), "c.csv", "x,y,f0\n0,0,NaN\n");
        assert!(matches!(import_csv(&p, "a").unwrap_err(), Error::Csv { line: 2, .. }));
    }

    #[test]
    fn bad_header_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "a.csv", "x,y,g0\n0,0,1\n");
        assert!(matches!(import_csv(&p, "a").unwrap_err(), Error::Csv { line: 1, .. }));
    }

    #[test]
    fn csv_export_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = EmbeddingStore::new("s", 3);
        s.push(0, 0, Embedding::new(vec![0.1, 1.0 / 3.0, -2.5e-7]).unwrap())
            .unwrap();
        s.push(8, 4, Embedding::new(vec![f32::MAX, 0.0, 7.0]).unwrap()).unwrap();
        let p = dir.path().join("s.csv");
        export_csv(&s, &p).unwrap();
        assert_eq!(import_csv(&p, "s").unwrap(), s);
    }

    #[test]
    fn binary_roundtrip_and_size() {
        let dir = tempfile::tempdir().unwrap();
        let mut s = EmbeddingStore::new("s", 64);
        for i in 0..3 {
            s.push(i, 0, Embedding::new(vec![i as f32; 64]).unwrap()).unwrap();
        }
        let p = dir.path().join("s.mile");
        write_store(&s, &p).unwrap();
        assert_eq!(fs::metadata(&p).unwrap().len(), 24 + 3 * (8 + 64 * 4));
        assert_eq!(read_store(&p, "s").unwrap(), s);
    }
}
