use std::io::Write;
use std::path::Path;
use std::time::Duration;

use serde::Serialize;

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Envelope printed on stdout by every command.
#[derive(Debug, Serialize)]
pub struct CliReport<T> {
    pub command: &'static str,
    pub inputs: Vec<String>,
    pub outputs: T,
    pub tool_version: &'static str,
    /// Only present with `--timing`; never part of the reproducible output.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timing_ms: Option<f64>,
}

impl<T: Serialize> CliReport<T> {
    pub fn new(command: &'static str, inputs: Vec<String>, outputs: T) -> Self {
        Self {
            command,
            inputs,
            outputs,
            tool_version: TOOL_VERSION,
            timing_ms: None,
        }
    }

    pub fn with_timing(mut self, elapsed: Option<Duration>) -> Self {
        self.timing_ms = elapsed.map(|d| d.as_secs_f64() * 1e3);
        self
    }

    pub fn write_json<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        serde_json::to_writer_pretty(&mut w, self)?;
        w.write_all(b"\n")
    }
}

pub fn display_path(p: &Path) -> String {
    p.display().to_string()
}
