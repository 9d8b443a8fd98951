//! CSV and JSON artifacts.
//!
//! CSV files start with `# key: value` metadata lines (the protocol first,
//! then the cluster parameters as JSON under `params`), followed by a header
//! row and comma-separated numeric rows with LF line endings. Files are
//! written to a temporary sibling and renamed into place.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::IoError;
use crate::signal::{Meta, Signal, Spectrum};

/// Metadata, column names and numeric columns of one CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub meta: Meta,
    pub headers: Vec<String>,
    pub columns: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(meta: Meta, headers: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self, IoError> {
        if headers.len() != columns.len() || headers.is_empty() {
            return Err(IoError::Parse(format!("{} headers for {} columns", headers.len(), columns.len())));
        }
        let n = columns[0].len();
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(IoError::Parse(format!("ragged columns: {} vs {}", c.len(), n)));
        }
        Ok(Self { meta, headers, columns })
    }

    pub fn rows(&self) -> usize {
        self.columns[0].len()
    }

    /// Column by header name.
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.headers.iter().position(|h| h == name).map(|k| self.columns[k].as_slice())
    }
}

/// Writes `bytes` to `path` via a temporary file in the same directory.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(bytes)?;
    tmp.flush()?;
    tmp.persist(path).map_err(|e| IoError::Io(e.error))?;
    Ok(())
}

pub fn table_to_string(table: &Table) -> Result<String, IoError> {
    let mut out = String::new();
    out.push_str(&format!("# protocol: {}\n", table.meta.protocol));
    for (k, v) in &table.meta.entries {
        out.push_str(&format!("# {k}: {}\n", v.replace('\n', " ")));
    }
    let mut writer = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    writer.write_record(&table.headers)?;
    for r in 0..table.rows() {
        writer.write_record(table.columns.iter().map(|c| c[r].to_string()))?;
    }
    let body = writer.into_inner().map_err(|e| IoError::Io(e.into_error()))?;
    out.push_str(std::str::from_utf8(&body).expect("ascii numbers"));
    Ok(out)
}

pub fn write_table(path: &Path, table: &Table) -> Result<(), IoError> {
    write_atomic(path, table_to_string(table)?.as_bytes())
}

pub fn parse_table(text: &str) -> Result<Table, IoError> {
    let mut meta = Meta::default();
    for line in text.lines().take_while(|l| l.starts_with('#')) {
        let body = line.trim_start_matches('#').trim();
        let Some((k, v)) = body.split_once(':') else { continue };
        let (k, v) = (k.trim(), v.trim());
        if k == "protocol" {
            meta.protocol = v.to_string();
        } else {
            meta.entries.push((k.to_string(), v.to_string()));
        }
    }
    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).trim(csv::Trim::All).from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(IoError::Parse("missing header row".into()));
    }
    let mut columns = vec![Vec::new(); headers.len()];
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(IoError::Parse(format!(
                "row {}: {} fields, expected {}",
                line + 1,
                record.len(),
                headers.len()
            )));
        }
        for (col, field) in columns.iter_mut().zip(record.iter()) {
            let v: f64 =
                field.parse().map_err(|_| IoError::Parse(format!("row {}: bad number {field:?}", line + 1)))?;
            col.push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(IoError::Parse("no data rows".into()));
    }
    Table::new(meta, headers, columns)
}

pub fn read_table(path: &Path) -> Result<Table, IoError> {
    parse_table(&fs::read_to_string(path)?)
}

fn signal_headers(protocol: &str) -> [&'static str; 2] {
    match protocol {
        "sedor" | "polarization_transfer" => ["tau_us", "contrast"],
        "hartmann_hahn" => ["spinlock_us", "contrast"],
        "deer_rabi" => ["pulse_us", "contrast"],
        "nv_rabi" => ["pulse_us", "population"],
        _ => ["time_us", "value"],
    }
}

pub fn signal_table(signal: &Signal) -> Table {
    Table {
        meta: signal.meta.clone(),
        headers: signal_headers(&signal.meta.protocol).iter().map(|h| h.to_string()).collect(),
        columns: vec![signal.times.clone(), signal.values.clone()],
    }
}

pub fn spectrum_table(spectrum: &Spectrum) -> Table {
    let value = match spectrum.meta.protocol.as_str() {
        "nv_esr" => "population",
        "deer_esr" => "contrast",
        _ => "magnitude",
    };
    Table {
        meta: spectrum.meta.clone(),
        headers: vec!["freq_mhz".into(), value.into()],
        columns: vec![spectrum.freqs.clone(), spectrum.magnitudes.clone()],
    }
}

pub fn write_signal_csv(path: &Path, signal: &Signal) -> Result<(), IoError> {
    write_table(path, &signal_table(signal))
}

pub fn write_spectrum_csv(path: &Path, spectrum: &Spectrum) -> Result<(), IoError> {
    write_table(path, &spectrum_table(spectrum))
}

/// First two columns as a time-domain signal.
pub fn table_to_signal(table: &Table) -> Result<Signal, IoError> {
    if table.columns.len() < 2 {
        return Err(IoError::Parse("need at least two columns".into()));
    }
    Ok(Signal::new(table.columns[0].clone(), table.columns[1].clone(), table.meta.clone())?)
}

pub fn read_signal_csv(path: &Path) -> Result<Signal, IoError> {
    table_to_signal(&read_table(path)?)
}

pub fn read_spectrum_csv(path: &Path) -> Result<Spectrum, IoError> {
    let table = read_table(path)?;
    if table.columns.len() < 2 {
        return Err(IoError::Parse("need at least two columns".into()));
    }
    Ok(Spectrum::new(table.columns[0].clone(), table.columns[1].clone(), table.meta.clone())?)
}

/// Pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), IoError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_atomic(path, text.as_bytes())
}
