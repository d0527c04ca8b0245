//! File helpers: JSON Lines, delimited tables and plain-text id lists.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};

pub fn read_to_string(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let value = serde_json::from_str(&line).map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        out.push(value);
    }
    Ok(out)
}

pub fn write_jsonl<T: Serialize>(mut w: impl Write, values: &[T]) -> Result<()> {
    for v in values {
        serde_json::to_writer(&mut w, v)?;
        w.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    Ok(())
}

pub fn write_jsonl_file<T: Serialize>(path: &Path, values: &[T]) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    write_jsonl(&mut w, values)?;
    w.flush().map_err(|e| Error::io(path, e))
}

/// Tab for `.tsv`/`.txt`, comma otherwise.
pub fn delimiter_for(path: &Path) -> u8 {
    match path.extension().and_then(|e| e.to_str()) {
        Some("tsv") | Some("txt") | Some("tab") => b'\t',
        _ => b',',
    }
}

/// A header-indexed table read from a CSV or TSV file.
pub(crate) struct Table {
    pub path: std::path::PathBuf,
    headers: Vec<String>,
    /// `(1-based line number, fields)`
    pub rows: Vec<(usize, Vec<String>)>,
}

impl Table {
    pub fn read(path: &Path) -> Result<Table> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .delimiter(delimiter_for(path))
            .flexible(true)
            .quoting(delimiter_for(path) == b',')
            .comment(Some(b'#'))
            .from_reader(file);
        let headers = reader
            .headers()?
            .iter()
            .map(|h| h.trim().to_ascii_lowercase())
            .collect::<Vec<_>>();
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec.map_err(|e| {
                let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
                Error::parse(path, line, e.to_string())
            })?;
            let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            if rec.iter().all(|f| f.trim().is_empty()) {
                continue;
            }
            if rec.len() != headers.len() {
                return Err(Error::parse(
                    path,
                    line,
                    format!("expected {} fields, found {}", headers.len(), rec.len()),
                ));
            }
            rows.push((line, rec.iter().map(|f| f.to_string()).collect()));
        }
        Ok(Table {
            path: path.to_path_buf(),
            headers,
            rows,
        })
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.headers.iter().position(|h| h == name)
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.column(name).ok_or_else(|| {
            Error::parse(&self.path, 1, format!("missing required column `{name}`"))
        })
    }
}

/// Reads a two-column `id <TAB> score` file without a header.
/// Blank lines and `#` comments are skipped.
pub fn read_id_scores(path: &Path) -> Result<Vec<(usize, String, f64)>> {
    let text = read_to_string(path)?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(id), Some(score), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(path, line_no, "expected `id<TAB>score`"));
        };
        let score: f64 = score
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, line_no, format!("bad score `{}`", score.trim())))?;
        out.push((line_no, id.trim().to_string(), score));
    }
    Ok(out)
}

/// One id per line; blank lines and `#` comments ignored.
pub fn read_id_list(path: &Path) -> Result<Vec<String>> {
    Ok(read_to_string(path)?
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(String::from)
        .collect())
}

/// File stem used as the source key in record ids.
pub fn source_key(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("input")
        .to_string()
}
