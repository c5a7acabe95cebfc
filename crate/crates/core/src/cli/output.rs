//! CSV and JSON rendering. Floats carry 12 significant digits; JSON
//! quantities are `{"value": x, "unit": u}` objects.

use std::io::Write;

use serde_json::{json, Map, Value};

use super::config::{Format, RunConfig};

pub const ENERGY: &str = "hopping";
pub const MOMENTUM: &str = "rad";
pub const DIMENSIONLESS: &str = "1";

/// `x` with 12 significant digits: fixed notation for moderate magnitudes,
/// scientific otherwise.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}").to_lowercase();
    }
    if x == 0.0 {
        return "0".into();
    }
    let exp = x.abs().log10().floor() as i32;
    let s = format!("{:.11e}", x);
    // Rounding can bump the exponent; read it back from the formatted string.
    let exp = s
        .rsplit_once('e')
        .and_then(|(_, e)| e.parse::<i32>().ok())
        .unwrap_or(exp);
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        format!("{:.*}", decimals, x)
    } else {
        s
    }
}

/// `x` rounded to 12 significant digits.
pub fn round12(x: f64) -> f64 {
    fmt12(x).parse().unwrap_or(x)
}

pub fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(round12(x))
    } else {
        Value::Null
    }
}

/// Quantity with its unit.
pub fn q(x: f64, unit: &str) -> Value {
    json!({ "value": num(x), "unit": unit })
}

pub fn q_opt(x: Option<f64>, unit: &str) -> Value {
    json!({ "value": x.map_or(Value::Null, num), "unit": unit })
}

/// Quantity holding a vector.
pub fn qv(x: &[f64], unit: &str) -> Value {
    json!({ "value": x.iter().map(|&v| num(v)).collect::<Vec<_>>(), "unit": unit })
}

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Float)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.into())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(x) => fmt12(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

/// Everything a command emits.
#[derive(Clone, Debug, Default)]
pub struct Report {
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
    pub results: Value,
    pub diagnostics: Map<String, Value>,
    /// One-line `key: value` summaries, appended as trailing comments in CSV.
    pub summary: Vec<(String, String)>,
}

impl Report {
    pub fn new(header: &[&str]) -> Self {
        Self {
            header: header.iter().map(|s| s.to_string()).collect(),
            ..Default::default()
        }
    }

    pub fn row(&mut self, cells: Vec<Cell>) {
        debug_assert_eq!(cells.len(), self.header.len());
        self.rows.push(cells);
    }

    pub fn summary(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.into(), value.to_string()));
    }
}

pub fn config_json(config: &RunConfig) -> Value {
    json!({
        "command": config.command,
        "d": config.d,
        "mu": q(config.mu, DIMENSIONLESS),
        "k": qv(&config.k, MOMENTUM),
        "n": config.n,
        "nk": config.nk,
        "L": config.ls,
        "oracle": config.oracle,
        "tol": q(config.tol, ENERGY),
        "particles": config.particles,
        "format": config.format,
        "out": config.out.as_ref().map(|p| p.display().to_string()),
        "jobs": config.jobs,
        "quick": config.quick,
    })
}

/// CSV: `# key=value` config lines, the header, the rows and `# key: value`
/// summary lines, LF-terminated.
pub fn render_csv(config: &RunConfig, report: &Report) -> String {
    let mut out = String::new();
    for (k, v) in config.echo() {
        out.push_str(&format!("# {k}={v}\n"));
    }
    out.push_str(&report.header.join(","));
    out.push('\n');
    for row in &report.rows {
        let cells: Vec<String> = row.iter().map(Cell::render).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    for (k, v) in &report.summary {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    out
}

pub fn render_json(config: &RunConfig, report: &Report) -> String {
    let mut diagnostics = report.diagnostics.clone();
    if !report.summary.is_empty() {
        let s: Map<String, Value> = report
            .summary
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        diagnostics.insert("summary".into(), Value::Object(s));
    }
    let doc = json!({
        "config": config_json(config),
        "results": report.results,
        "diagnostics": diagnostics,
    });
    let mut s = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
    s.push('\n');
    s
}

pub fn render(config: &RunConfig, report: &Report) -> String {
    match config.format {
        Format::Csv => render_csv(config, report),
        Format::Json => render_json(config, report),
    }
}

/// Writes to `--out` or stdout.
pub fn emit(config: &RunConfig, text: &str) -> std::io::Result<()> {
    match &config.out {
        Some(path) => std::fs::write(path, text),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()
        }
    }
}
