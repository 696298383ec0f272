use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde_json::{json, Map, Value};

use crate::config::{Format, OutputCfg};
use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Text(String),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Self::Num(x) => format!("{x:.16e}"),
            Self::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Self::Num(x) => json!(x),
            Self::Text(s) => json!(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Self::Num(x)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Self::Text(s.to_owned())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or_else(|| Self::Text("none".into()), Self::Num)
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::csv)).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("cells are UTF-8")
    }

    fn to_json(&self, meta: &Map<String, Value>) -> String {
        let rows: Vec<Value> = self.rows.iter().map(|r| Value::Array(r.iter().map(Cell::json).collect())).collect();
        let doc = json!({ "meta": meta, "columns": self.columns, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("tables serialize");
        s.push('\n');
        s
    }
}

/// Names for per-component columns: `re_z1, im_z1, re_z2, …`.
pub fn complex_columns(prefix: &str, n: usize) -> Vec<String> {
    (1..=n).flat_map(|j| [format!("re_{prefix}{j}"), format!("im_{prefix}{j}")]).collect()
}

pub fn push_complex(row: &mut Vec<Cell>, v: impl IntoIterator<Item = kahlerflow::C64>) {
    for x in v {
        row.push(Cell::Num(x.re));
        row.push(Cell::Num(x.im));
    }
}

/// Everything a command produces.
pub struct Outcome {
    pub table: Table,
    pub meta: Map<String, Value>,
    /// 0 for a normal run, 3 for an abnormal termination that still
    /// produced output.
    pub exit: u8,
}

fn sidecar(path: &Path, ext: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(ext);
    PathBuf::from(s)
}

/// Write the table to `path` (stdout when absent) together with the
/// `.meta.json` sidecar and, if requested, a `.gp` gnuplot script.
pub fn emit(outcome: &Outcome, cfg: &OutputCfg, path: Option<&Path>) -> Result<(), CliError> {
    let body = match cfg.format {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => outcome.table.to_json(&outcome.meta),
    };
    let meta = serde_json::to_string_pretty(&outcome.meta).expect("metadata serializes") + "\n";
    match path {
        Some(p) => {
            fs::write(p, body)?;
            fs::write(sidecar(p, ".meta.json"), meta)?;
            if cfg.gnuplot {
                fs::write(sidecar(p, ".gp"), gnuplot_script(&outcome.table, p, cfg.format))?;
            }
            log::info!("wrote {} rows to {}", outcome.table.rows.len(), p.display());
        }
        None => {
            if cfg.gnuplot {
                return Err(CliError::Config("a gnuplot script needs an output path".into()));
            }
            io::stdout().lock().write_all(body.as_bytes())?;
            if cfg.format == Format::Csv {
                io::stderr().lock().write_all(meta.as_bytes())?;
            }
        }
    }
    Ok(())
}

fn gnuplot_script(table: &Table, data: &Path, format: Format) -> String {
    let name = data.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let mut s = String::new();
    if format == Format::Json {
        s.push_str("# gnuplot reads the CSV format; rerun with \"format\": \"csv\" to plot this table.\n");
    }
    s.push_str("set datafile separator ','\n");
    s.push_str("set key autotitle columnhead\n");
    s.push_str("set grid\n");
    s.push_str(&format!("set xlabel '{}'\n", table.columns.first().map(String::as_str).unwrap_or("")));
    let numeric: Vec<usize> = (1..table.columns.len()).filter(|&c| table.rows.first().is_some_and(|r| matches!(r[c], Cell::Num(_)))).collect();
    let plots: Vec<String> = numeric.iter().map(|c| format!("'{name}' using 1:{} with lines", c + 1)).collect();
    if plots.is_empty() {
        s.push_str("# no numeric columns to plot\n");
    } else {
        s.push_str(&format!("plot {}\n", plots.join(", \\\n     ")));
    }
    s.push_str("pause mouse close\n");
    s
}
