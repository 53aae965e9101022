//! CSV rows, the aligned console table and the resolved-config sidecar.

use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::experiment::ResultRow;
use crate::RunError;

pub const HEADER: [&str; 10] = [
    "table",
    "row",
    "K_or_ab",
    "estimate",
    "std_error",
    "rel_error",
    "var_ratio",
    "weights",
    "tilts",
    "flags",
];

/// `%g`-style formatting with six significant digits.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        trim_zeros(&format!("{x:.*}", (5 - exp) as usize)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn join(values: &[f64], sep: &str) -> String {
    values
        .iter()
        .map(|v| fmt_g(*v))
        .collect::<Vec<_>>()
        .join(sep)
}

/// One CSV record. Weights are space-separated; tilts are separated by
/// `;` with their coordinates space-separated.
pub fn record(row: &ResultRow) -> [String; 10] {
    let theta = row.theta();
    [
        row.table.clone(),
        row.row.clone(),
        row.label.clone(),
        fmt_g(row.ce.estimate),
        fmt_g(row.ce.std_error),
        fmt_g(row.ce.relative_error),
        row.var_ratio.map_or_else(String::new, fmt_g),
        join(theta.weights(), " "),
        theta
            .tilts()
            .iter()
            .map(|t| join(&t.alpha, " "))
            .collect::<Vec<_>>()
            .join(";"),
        row.flags.join(";"),
    ]
}

/// Record for a row whose run failed.
pub fn failed_record(cfg: &ExperimentConfig, err: &RunError) -> [String; 10] {
    let nan = fmt_g(f64::NAN);
    [
        cfg.output.table.clone(),
        cfg.output.row.clone(),
        cfg.model.label(),
        nan.clone(),
        nan.clone(),
        nan.clone(),
        nan,
        String::new(),
        String::new(),
        err.flag().into(),
    ]
}

pub fn write_csv(path: &Path, records: &[[String; 10]]) -> Result<(), RunError> {
    let mut w = csv::Writer::from_path(path).map_err(|e| RunError::Io(e.to_string()))?;
    w.write_record(HEADER)
        .map_err(|e| RunError::Io(e.to_string()))?;
    for r in records {
        w.write_record(r).map_err(|e| RunError::Io(e.to_string()))?;
    }
    w.flush().map_err(|e| RunError::Io(e.to_string()))
}

/// `<output>.resolved.jsonl`.
pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(".resolved.jsonl");
    PathBuf::from(name)
}

#[derive(Serialize)]
struct Echo<'a> {
    table: &'a str,
    row: &'a str,
    #[serde(rename = "K_or_ab")]
    label: String,
    config: &'a ExperimentConfig,
    init_stages: Option<usize>,
    error: Option<String>,
}

/// One JSON line per row carrying the fully resolved config.
pub fn write_sidecar(
    path: &Path,
    rows: &[(&ExperimentConfig, Result<&ResultRow, &RunError>)],
) -> Result<(), RunError> {
    let mut f = std::fs::File::create(path).map_err(|e| RunError::Io(e.to_string()))?;
    for (cfg, out) in rows {
        let echo = Echo {
            table: &cfg.output.table,
            row: &cfg.output.row,
            label: cfg.model.label(),
            config: cfg,
            init_stages: out.as_ref().ok().map(|r| r.init_stages),
            error: out.as_ref().err().map(|e| e.to_string()),
        };
        let line = serde_json::to_string(&echo).map_err(|e| RunError::Io(e.to_string()))?;
        writeln!(f, "{line}").map_err(|e| RunError::Io(e.to_string()))?;
    }
    Ok(())
}

/// Longest field shown in the console table; the CSV keeps everything.
const MAX_CELL: usize = 36;

/// Human-readable table with aligned columns.
pub fn aligned(records: &[[String; 10]]) -> String {
    let shorten = |s: &str| {
        if s.chars().count() > MAX_CELL {
            format!("{}...", s.chars().take(MAX_CELL - 3).collect::<String>())
        } else {
            s.to_string()
        }
    };
    let mut cells: Vec<Vec<String>> = vec![HEADER.iter().map(|h| h.to_string()).collect()];
    cells.extend(
        records
            .iter()
            .map(|r| r.iter().map(|c| shorten(c)).collect()),
    );
    let widths: Vec<usize> = (0..HEADER.len())
        .map(|j| {
            cells
                .iter()
                .map(|r| r[j].chars().count())
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    for r in &cells {
        let line: Vec<String> = r
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect();
        out.push_str(line.join("  ").trim_end());
        out.push('\n');
    }
    out
}
