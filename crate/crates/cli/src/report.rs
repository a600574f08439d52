use std::fs;

use anyhow::{Context, Result};
use serde::Serialize;

use crate::args::{OutFormat, OutputArgs};

/// Bumped whenever a report field changes meaning or disappears.
pub const SCHEMA_VERSION: u32 = 1;

/// Writes `report` (JSON) or `rows` (CSV) to `--out`, or to stdout when no
/// path is given. With a path, `summary` is printed instead.
pub fn emit<R: Serialize, Row: Serialize>(output: &OutputArgs, report: &R, rows: &[Row], summary: &str) -> Result<()> {
    let body = match output.out_format {
        OutFormat::Json => {
            let mut s = serde_json::to_string_pretty(report)?;
            s.push('\n');
            s.into_bytes()
        }
        OutFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for row in rows {
                w.serialize(row)?;
            }
            w.into_inner().context("flushing CSV")?
        }
    };
    match &output.out {
        Some(path) => {
            fs::write(path, body).with_context(|| format!("cannot write {}", path.display()))?;
            print!("{summary}");
        }
        None => print!("{}", String::from_utf8(body).expect("reports are UTF-8")),
    }
    Ok(())
}
