//! CSV artifacts. Every table carries a header row and ends with a
//! `# seed=…, version=…` comment line.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// An in-memory CSV table.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub seed: Option<u64>,
}

impl CsvTable {
    pub fn new(header: &[&str], seed: Option<u64>) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            seed,
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(w);
        writer.write_record(&self.header)?;
        for row in &self.rows {
            writer.write_record(row)?;
        }
        writer.flush()?;
        let mut inner = writer.into_inner().map_err(|e| e.into_error())?;
        let seed = match self.seed {
            Some(s) => s.to_string(),
            None => "none".to_string(),
        };
        writeln!(inner, "# seed={seed}, version={VERSION}")?;
        inner.flush()?;
        Ok(())
    }

    pub fn to_bytes(&self) -> Result<Vec<u8>> {
        let mut buf = Vec::new();
        self.write_to(&mut buf)?;
        Ok(buf)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let file = File::create(path)?;
        self.write_to(BufWriter::new(file))
    }
}

/// Shortest round-trip representation, so output is reproducible bit for bit.
pub fn num(x: f64) -> String {
    format!("{x}")
}
