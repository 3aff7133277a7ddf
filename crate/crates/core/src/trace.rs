//! Trace export: one record per iteration, as JSON lines or flat CSV.
//!
//! Both formats carry the same fields in the same order:
//! `iteration, temperature, k, log_post, best_log_post, move_kind,
//! inner_accepted, outer_accepted, train_mse, test_mse`. In CSV an absent
//! `test_mse` is an empty field; in JSON it is `null`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::annealing::TraceRecord;
use crate::error::{Error, Result};

pub fn write_jsonl<F: Serialize>(mut out: impl Write, trace: &[TraceRecord<F>]) -> std::io::Result<()> {
    for record in trace {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn write_csv<F: Serialize>(out: impl Write, trace: &[TraceRecord<F>]) -> std::io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for record in trace {
        writer.serialize(record).map_err(std::io::Error::other)?;
    }
    if trace.is_empty() {
        writer.write_record(COLUMNS)?;
    }
    writer.flush()
}

pub const COLUMNS: [&str; 10] = [
    "iteration",
    "temperature",
    "k",
    "log_post",
    "best_log_post",
    "move_kind",
    "inner_accepted",
    "outer_accepted",
    "train_mse",
    "test_mse",
];

/// Writes the trace to `path`, as CSV when the extension is `csv` and as
/// JSON lines otherwise.
pub fn write_trace_file<F: Serialize>(path: impl AsRef<Path>, trace: &[TraceRecord<F>]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let out = BufWriter::new(file);
    let is_csv = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"));
    if is_csv {
        write_csv(out, trace)
    } else {
        write_jsonl(out, trace)
    }
    .map_err(|e| Error::io(path, e))
}
