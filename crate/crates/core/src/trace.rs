//! Convergence telemetry rows and their CSV form.

use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// One row of a convergence trace. Optional errors serialize as empty cells.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    #[serde(rename = "t")]
    pub inner_iteration: u64,
    #[serde(rename = "restart")]
    pub restart_index: u64,
    #[serde(rename = "i")]
    pub grid_i: i64,
    #[serde(rename = "j")]
    pub grid_j: u64,
    #[serde(rename = "k")]
    pub grid_k: u64,
    #[serde(rename = "f")]
    pub objective_value: f64,
    #[serde(rename = "ferr")]
    pub objective_error: Option<f64>,
    #[serde(rename = "gap")]
    pub feasibility_gap: f64,
    #[serde(rename = "rerr")]
    pub reconstruction_error: Option<f64>,
}

pub const TRACE_HEADER: &str = "t,restart,i,j,k,f,ferr,gap,rerr";

pub fn write_trace<W: Write>(writer: W, records: &[TraceRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if records.is_empty() {
        w.write_record(TRACE_HEADER.split(','))?;
    }
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_trace<R: Read>(reader: R) -> Result<Vec<TraceRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for row in rdr.deserialize() {
        out.push(row?);
    }
    Ok(out)
}

pub fn write_trace_file(path: &Path, records: &[TraceRecord]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    write_trace(BufWriter::new(File::create(path)?), records)
}

pub fn read_trace_file(path: &Path) -> Result<Vec<TraceRecord>> {
    read_trace(File::open(path)?)
}
