//! CSV and JSON rendering with stable formatting, plus atomic file
//! output.
//!
//! Both formats emit floats with 17 significant digits so that identical
//! invocations produce byte-identical files and round-trip exactly.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::CliError;

/// One cell of an output table.
#[derive(Clone, Debug)]
pub enum Value {
    Int(u64),
    Float(f64),
    Str(&'static str),
    /// Rendered as an empty CSV cell; omitted from JSON objects.
    Missing,
}

#[derive(Clone, Debug)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Value>>,
}

impl Table {
    pub fn new(columns: Vec<&'static str>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Value>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }
}

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn render_csv(table: &Table) -> String {
    let mut out = String::new();
    out.push_str(&table.columns.join(","));
    out.push('\n');
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|v| match v {
                Value::Int(i) => i.to_string(),
                Value::Float(x) => format_float(*x),
                Value::Str(s) => (*s).to_string(),
                Value::Missing => String::new(),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// JSON array of objects mirroring the CSV records. Every numeric field
/// must be finite.
pub fn render_json(table: &Table) -> Result<String, CliError> {
    let mut out = String::from("[\n");
    for (r, row) in table.rows.iter().enumerate() {
        let mut fields = Vec::new();
        for (col, v) in table.columns.iter().zip(row) {
            match v {
                Value::Int(i) => fields.push(format!("\"{col}\": {i}")),
                Value::Float(x) => {
                    if !x.is_finite() {
                        return Err(CliError::numeric(format!(
                            "refusing to serialize non-finite value in column {col}"
                        )));
                    }
                    fields.push(format!("\"{col}\": {}", format_float(*x)));
                }
                Value::Str(s) => fields.push(format!("\"{col}\": \"{s}\"")),
                Value::Missing => {}
            }
        }
        out.push_str("  {");
        out.push_str(&fields.join(", "));
        out.push('}');
        if r + 1 < table.rows.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    Ok(out)
}

/// Write to `path` atomically (temp file in the same directory, then
/// rename), or to stdout when no path is given.
pub fn emit(text: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(path) => {
            let dir = path.parent().filter(|d| !d.as_os_str().is_empty());
            let tmp = match dir {
                Some(d) => d.join(format!(
                    ".{}.tmp-{}",
                    path.file_name().and_then(|f| f.to_str()).unwrap_or("out"),
                    std::process::id()
                )),
                None => Path::new(&format!(".{}.tmp-{}", path.display(), std::process::id()))
                    .to_path_buf(),
            };
            let write = (|| -> std::io::Result<()> {
                let mut f = fs::File::create(&tmp)?;
                f.write_all(text.as_bytes())?;
                f.sync_all()?;
                fs::rename(&tmp, path)
            })();
            write.map_err(|e| {
                let _ = fs::remove_file(&tmp);
                CliError::numeric(format!("failed to write {}: {e}", path.display()))
            })
        }
    }
}
