//! Versioned JSON envelopes and commented CSV headers shared by all outputs.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;
pub const TOOLKIT_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema_version: u32,
    pub toolkit_version: &'a str,
    pub kind: &'a str,
    pub config: &'a serde_json::Value,
    pub data: &'a T,
}

pub fn write_json<W: Write, T: Serialize>(out: W, kind: &str, config: &serde_json::Value, data: &T) -> Result<()> {
    let env = Envelope { schema_version: SCHEMA_VERSION, toolkit_version: TOOLKIT_VERSION, kind, config, data };
    serde_json::to_writer_pretty(out, &env).map_err(|e| Error::Domain(format!("json output: {e}")))
}

/// `# key: value` lines placed before a CSV header.
pub fn write_csv_preamble<W: Write>(out: &mut W, kind: &str, config: &serde_json::Value) -> Result<()> {
    let io = |e: std::io::Error| Error::Domain(format!("csv output: {e}"));
    writeln!(out, "# kind: {kind}").map_err(io)?;
    writeln!(out, "# schema_version: {SCHEMA_VERSION}").map_err(io)?;
    writeln!(out, "# toolkit_version: {TOOLKIT_VERSION}").map_err(io)?;
    writeln!(out, "# config: {config}").map_err(io)?;
    Ok(())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Domain(format!("csv output: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_round_trips() {
        let cfg = serde_json::json!({"alpha": 0.05});
        let mut buf = Vec::new();
        write_json(&mut buf, "test", &cfg, &vec![1.0, 2.0]).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["schema_version"], SCHEMA_VERSION);
        assert_eq!(v["config"]["alpha"], 0.05);
        assert_eq!(v["data"][1], 2.0);
    }

    #[test]
    fn preamble_lines_are_comments() {
        let mut buf = Vec::new();
        write_csv_preamble(&mut buf, "sweep", &serde_json::json!({})).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().all(|l| l.starts_with("# ")));
    }
}
