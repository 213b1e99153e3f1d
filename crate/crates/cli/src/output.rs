use std::fs;
use std::io::Write;
use std::path::Path;

use cdforge::format::sig17_csv;
use serde::Serialize;

use crate::args::Format;
use crate::{CliError, CliResult};

/// A CSV cell.
pub enum Cell {
    Num(f64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => sig17_csv(*x),
            Cell::Text(s) => s.clone(),
        }
    }
}

pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Table { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    fn to_csv(&self) -> CliResult<Vec<u8>> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let fail = |e: csv::Error| CliError::Validation(format!("csv output: {e}"));
        w.write_record(&self.header).map_err(fail)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render)).map_err(fail)?;
        }
        w.into_inner().map_err(|e| CliError::Validation(format!("csv output: {e}")))
    }
}

/// Wraps a report with the schema version and command name.
#[derive(Serialize)]
pub struct Envelope<'a, T: Serialize> {
    pub schema: u32,
    pub command: &'a str,
    #[serde(flatten)]
    pub body: T,
}

pub fn json<T: Serialize>(command: &str, body: T) -> CliResult<Vec<u8>> {
    let mut bytes = serde_json::to_vec_pretty(&Envelope { schema: 1, command, body })
        .map_err(|e| CliError::Validation(format!("json output: {e}")))?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Renders in the requested format; `table` builds the CSV mirror lazily.
pub fn render<T: Serialize>(
    format: Format,
    command: &str,
    body: T,
    table: impl FnOnce() -> Table,
) -> CliResult<Vec<u8>> {
    match format {
        Format::Json => json(command, body),
        Format::Csv => table().to_csv(),
    }
}

pub fn emit(bytes: &[u8], out: Option<&Path>) -> CliResult<()> {
    match out {
        Some(path) => fs::write(path, bytes)
            .map_err(|e| CliError::Validation(format!("cannot write {}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(bytes)
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Validation(format!("cannot write to stdout: {e}")))
        }
    }
}
