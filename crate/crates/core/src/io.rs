//! Shared conventions for the delimited files the pipeline reads and writes.
//!
//! Every artifact may start with `#` comment lines (the provenance header);
//! readers skip them. Floats are written with Rust's shortest round-trip
//! formatting, so re-reading a file reproduces the exact bits.

use std::io::{self, Read, Write};

use crate::scalar::Scalar;

pub const TIMESTAMP_KEY: &str = "timestamp";

/// Provenance header written at the top of every pipeline artifact.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ArtifactHeader {
    pub tool_version: String,
    pub seed: u64,
    pub config_digest: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl ArtifactHeader {
    pub fn new(seed: u64, config_digest: impl Into<String>) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        ArtifactHeader {
            tool_version: format!("{} {}", env!("CARGO_PKG_NAME"), env!("CARGO_PKG_VERSION")),
            seed,
            config_digest: config_digest.into(),
            timestamp,
        }
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "# tool: {}", self.tool_version)?;
        writeln!(w, "# seed: {}", self.seed)?;
        writeln!(w, "# config_digest: {}", self.config_digest)?;
        writeln!(w, "# {}: {}", TIMESTAMP_KEY, self.timestamp)
    }
}

/// True for the header line that legitimately differs between two otherwise
/// identical runs.
pub fn is_timestamp_line(line: &str) -> bool {
    line.trim_start()
        .strip_prefix('#')
        .map(|rest| rest.trim_start().starts_with(TIMESTAMP_KEY))
        .unwrap_or(false)
}

/// File contents with timestamp header lines removed.
pub fn strip_timestamps(contents: &str) -> String {
    contents
        .lines()
        .filter(|l| !is_timestamp_line(l))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Shortest representation that parses back to the same value; scientific
/// notation for very small or very large magnitudes.
pub fn fmt_num<T: Scalar>(x: T) -> String {
    let a = x.abs();
    if a != T::zero() && a.is_finite() && (a < T::lit(1e-4) || a >= T::lit(1e15)) {
        format!("{x:e}")
    } else {
        format!("{x}")
    }
}

pub fn csv_reader<R: Read>(r: R, delimiter: u8) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(r)
}

pub fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}
