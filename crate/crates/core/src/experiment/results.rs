//! Sweep output: the in-memory result table, the results CSV, and a
//! plot-ready wide CSV (one x column, one PCMS column per method).

use std::path::{Path, PathBuf};

use super::config::Method;
use crate::io::{self, IoError};

/// One (grid point, method) aggregate.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub grid_variable: &'static str,
    pub grid_value: f64,
    pub method: Method,
    /// Fraction of completed trials whose selected support equals the true
    /// support as a set.
    pub pcms: f64,
    /// √(p̂(1−p̂)/trials).
    pub stderr: f64,
    /// Completed (non-excluded) trials behind this row.
    pub trials: usize,
    pub mean_k: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Grid-major, method-minor order, matching the configured method list.
    pub rows: Vec<ResultRow>,
    /// Trials excluded across the whole sweep (zero in every shipped
    /// configuration; exclusions are counted, never silently dropped).
    pub excluded: usize,
    pub first_exclusion: Option<String>,
}

fn method_column(method: &Method) -> String {
    match method {
        Method::EbicR { zeta } => format!("pcms_ebicr_zeta{zeta}"),
        Method::Oracle => "pcms_oracle".to_string(),
        Method::Exhaustive => "pcms_exhaustive".to_string(),
    }
}

/// Renders the long-form results CSV. The zeta column is empty for methods
/// without a tuning parameter.
pub fn results_csv_string(result: &SweepResult) -> String {
    let mut out = String::from("grid_variable,grid_value,method,zeta,pcms,stderr,trials,mean_k\n");
    for r in &result.rows {
        let zeta = match r.method {
            Method::EbicR { zeta } => io::format_full(zeta),
            _ => String::new(),
        };
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.grid_variable,
            io::format_full(r.grid_value),
            r.method.label(),
            zeta,
            io::format_full(r.pcms),
            io::format_full(r.stderr),
            r.trials,
            io::format_full(r.mean_k),
        ));
    }
    out
}

/// Renders the wide plot CSV: the grid variable as x plus one PCMS column
/// per method, rows in grid order.
pub fn plot_csv_string(result: &SweepResult) -> String {
    let Some(first) = result.rows.first() else {
        return String::new();
    };
    let methods: Vec<Method> = {
        let mut m = Vec::new();
        for r in &result.rows {
            if r.grid_value != first.grid_value {
                break;
            }
            m.push(r.method);
        }
        m
    };
    let mut out = first.grid_variable.to_string();
    for m in &methods {
        out.push(',');
        out.push_str(&method_column(m));
    }
    out.push('\n');
    for chunk in result.rows.chunks(methods.len()) {
        out.push_str(&io::format_full(chunk[0].grid_value));
        for r in chunk {
            out.push(',');
            out.push_str(&io::format_full(r.pcms));
        }
        out.push('\n');
    }
    out
}

/// Writes `results.csv` and `plot.csv` into `dir`, returning their paths.
pub fn write_results(result: &SweepResult, dir: &Path) -> Result<(PathBuf, PathBuf), IoError> {
    std::fs::create_dir_all(dir).map_err(|e| IoError::Io {
        path: dir.to_path_buf(),
        source: e,
    })?;
    let results_path = dir.join("results.csv");
    let plot_path = dir.join("plot.csv");
    io::atomic_write(&results_path, &results_csv_string(result))?;
    io::atomic_write(&plot_path, &plot_csv_string(result))?;
    Ok((results_path, plot_path))
}

/// A results-CSV row parsed back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedResultRow {
    pub grid_variable: String,
    pub grid_value: f64,
    pub method: String,
    pub zeta: Option<f64>,
    pub pcms: f64,
    pub stderr: f64,
    pub trials: usize,
    pub mean_k: f64,
}

/// Parses a results CSV written by [`write_results`].
pub fn parse_results_csv(path: &Path) -> Result<Vec<ParsedResultRow>, IoError> {
    let text = std::fs::read_to_string(path).map_err(|e| IoError::Io {
        path: path.to_path_buf(),
        source: e,
    })?;
    let bad = |line: usize, token: &str| IoError::BadNumber {
        path: path.to_path_buf(),
        line,
        token: token.to_string(),
    };
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if i == 0 || line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 8 {
            return Err(IoError::RaggedRow {
                path: path.to_path_buf(),
                line: i + 1,
                got: fields.len(),
                expected: 8,
            });
        }
        let num = |idx: usize| -> Result<f64, IoError> {
            fields[idx].parse().map_err(|_| bad(i + 1, fields[idx]))
        };
        rows.push(ParsedResultRow {
            grid_variable: fields[0].to_string(),
            grid_value: num(1)?,
            method: fields[2].to_string(),
            zeta: if fields[3].is_empty() {
                None
            } else {
                Some(num(3)?)
            },
            pcms: num(4)?,
            stderr: num(5)?,
            trials: fields[6].parse().map_err(|_| bad(i + 1, fields[6]))?,
            mean_k: num(7)?,
        });
    }
    Ok(rows)
}
