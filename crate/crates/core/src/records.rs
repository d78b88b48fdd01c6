//! Raw record files: a flat CSV for analysis and a versioned JSON-lines twin
//! that round-trips every field.

use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::harness::RunRecord;

pub const CSV_HEADER: &str = "replication,strategy,rule,ur,rr,uragg,vs,ejr,pjr,minority_preserved,variance,disagreement,attempts,ms";
pub const FORMAT_NAME: &str = "delib-records";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
}

fn format_err(path: &Path, reason: impl Into<String>) -> Error {
    Error::Format {
        path: path.to_path_buf(),
        reason: reason.into(),
    }
}

fn csv_row(r: &RunRecord) -> String {
    let s = &r.scores;
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        r.replication,
        r.strategy,
        r.rule,
        s.ur,
        s.rr,
        s.uragg,
        s.vs,
        u8::from(s.ejr_ok),
        u8::from(s.pjr_ok),
        s.minority_preserved,
        r.consensus.utility_variance,
        r.consensus.intergroup_disagreement,
        r.attempts,
        r.ms
    )
}

/// First line of an existing non-empty file, or `None` for a missing or empty file.
fn first_line(path: &Path) -> Result<Option<String>> {
    let file = match File::open(path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(Error::io(path, e)),
    };
    let mut line = String::new();
    BufReader::new(file).read_line(&mut line).map_err(|e| Error::io(path, e))?;
    Ok(if line.is_empty() { None } else { Some(line.trim_end().to_string()) })
}

fn open(path: &Path, append: bool) -> Result<BufWriter<File>> {
    let file = OpenOptions::new()
        .create(true)
        .write(true)
        .append(append)
        .truncate(!append)
        .open(path)
        .map_err(|e| Error::io(path, e))?;
    Ok(BufWriter::new(file))
}

fn check_csv_header(path: &Path) -> Result<bool> {
    match first_line(path)? {
        None => Ok(false),
        Some(h) if h == CSV_HEADER => Ok(true),
        Some(h) => Err(format_err(path, format!("unexpected CSV header {h:?}"))),
    }
}

fn check_jsonl_header(path: &Path, line: &str) -> Result<()> {
    let header: Header = serde_json::from_str(line).map_err(|e| format_err(path, format!("bad header: {e}")))?;
    if header.format != FORMAT_NAME {
        return Err(format_err(path, format!("format {:?} is not {FORMAT_NAME:?}", header.format)));
    }
    if header.version != FORMAT_VERSION {
        return Err(format_err(path, format!("version {} is not {FORMAT_VERSION}", header.version)));
    }
    Ok(())
}

pub fn write_csv(records: &[RunRecord], path: &Path, append: bool) -> Result<()> {
    let has_header = append && check_csv_header(path)?;
    let mut w = open(path, append)?;
    let mut body = String::new();
    if !has_header {
        body.push_str(CSV_HEADER);
        body.push('\n');
    }
    for r in records {
        body.push_str(&csv_row(r));
        body.push('\n');
    }
    w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

pub fn write_jsonl(records: &[RunRecord], path: &Path, append: bool) -> Result<()> {
    let has_header = if append {
        match first_line(path)? {
            Some(line) => {
                check_jsonl_header(path, &line)?;
                true
            }
            None => false,
        }
    } else {
        false
    };
    let mut w = open(path, append)?;
    let mut body = String::new();
    if !has_header {
        let header = Header {
            format: FORMAT_NAME.to_string(),
            version: FORMAT_VERSION,
        };
        body.push_str(&serde_json::to_string(&header)?);
        body.push('\n');
    }
    for r in records {
        body.push_str(&serde_json::to_string(r)?);
        body.push('\n');
    }
    w.write_all(body.as_bytes()).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
}

/// Write (or append to) the JSON-lines file at `path` and its CSV twin
/// alongside it with the `.csv` extension.
pub fn persist_records(records: &[RunRecord], path: &Path, append: bool) -> Result<()> {
    write_jsonl(records, path, append)?;
    write_csv(records, &path.with_extension("csv"), append)
}

pub fn load_records(path: &Path) -> Result<Vec<RunRecord>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(line) => line.map_err(|e| Error::io(path, e))?,
        None => return Err(format_err(path, "missing header")),
    };
    check_jsonl_header(path, &header)?;
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|e| format_err(path, format!("line {}: {e}", i + 2)))?;
        out.push(record);
    }
    Ok(out)
}
