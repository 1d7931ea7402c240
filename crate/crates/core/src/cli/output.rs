//! CSV and JSON emission of result rows.
//!
//! CSV columns follow the field order of [`ResultRow`]. Reals are written
//! with 17 significant digits so that reparsing is exact; empty cells mean
//! "not applicable".

use std::io::{Read, Write};

use super::config::Format;
use super::sweep::ResultRow;
use super::CliError;

pub const COLUMNS: [&str; 16] = [
    "scenario",
    "topology",
    "M",
    "Mx",
    "My",
    "spacing",
    "p_sh",
    "method",
    "kappa",
    "std_err",
    "n_samples",
    "trunc_order",
    "converged",
    "seed",
    "runtime_ms",
    "error",
];

fn real(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T>(x: Option<T>, f: impl Fn(T) -> String) -> String {
    x.map(f).unwrap_or_default()
}

fn record(r: &ResultRow) -> [String; 16] {
    [
        r.scenario.clone(),
        r.topology.clone(),
        r.m.to_string(),
        opt(r.mx, |v| v.to_string()),
        opt(r.my, |v| v.to_string()),
        real(r.spacing),
        real(r.p_sh),
        r.method.clone(),
        opt(r.kappa, real),
        opt(r.std_err, real),
        opt(r.n_samples, |v| v.to_string()),
        opt(r.trunc_order, |v| v.to_string()),
        r.converged.to_string(),
        opt(r.seed, |v| v.to_string()),
        opt(r.runtime_ms, real),
        r.error.clone().unwrap_or_default(),
    ]
}

pub fn write_rows<W: Write>(rows: &[ResultRow], format: Format, mut out: W) -> Result<(), CliError> {
    let io = |e: std::io::Error| CliError::Io(e.to_string());
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(COLUMNS).map_err(|e| CliError::Io(e.to_string()))?;
            for r in rows {
                w.write_record(record(r)).map_err(|e| CliError::Io(e.to_string()))?;
            }
            w.flush().map_err(io)
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut out, rows).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(out).map_err(io)
        }
    }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<Option<T>, CliError> {
    let s = rec.get(i).unwrap_or("");
    if s.is_empty() {
        return Ok(None);
    }
    s.parse()
        .map(Some)
        .map_err(|_| CliError::Validation(format!("line {line}: bad {} value {s:?}", COLUMNS[i])))
}

fn required<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: u64) -> Result<T, CliError> {
    field(rec, i, line)?
        .ok_or_else(|| CliError::Validation(format!("line {line}: missing {}", COLUMNS[i])))
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>, CliError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header = rdr.headers().map_err(|e| CliError::Io(e.to_string()))?;
    if header.iter().ne(COLUMNS) {
        return Err(CliError::Validation(format!(
            "unexpected CSV header {:?}",
            header.iter().collect::<Vec<_>>()
        )));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| CliError::Validation(e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push(ResultRow {
            scenario: required(&rec, 0, line)?,
            topology: required(&rec, 1, line)?,
            m: required(&rec, 2, line)?,
            mx: field(&rec, 3, line)?,
            my: field(&rec, 4, line)?,
            spacing: required(&rec, 5, line)?,
            p_sh: required(&rec, 6, line)?,
            method: required(&rec, 7, line)?,
            kappa: field(&rec, 8, line)?,
            std_err: field(&rec, 9, line)?,
            n_samples: field(&rec, 10, line)?,
            trunc_order: field(&rec, 11, line)?,
            converged: required(&rec, 12, line)?,
            seed: field(&rec, 13, line)?,
            runtime_ms: field(&rec, 14, line)?,
            error: field(&rec, 15, line)?,
        });
    }
    Ok(rows)
}

pub fn read_json<R: Read>(input: R) -> Result<Vec<ResultRow>, CliError> {
    serde_json::from_reader(input).map_err(|e| CliError::Validation(e.to_string()))
}
