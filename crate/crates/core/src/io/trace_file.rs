use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::config::{emit_pairs, parse_config, RunConfig};
use crate::error::{Error, Result};
use crate::quantities::UNIT_CONVENTION;

pub const ARTIFACT_VERSION: &str = env!("CARGO_PKG_VERSION");

/// `%.16e`-style scientific notation: 17 significant digits, signed
/// two-digit exponent.
pub fn format_sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let s = format!("{x:.16e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

pub fn parse_sci(s: &str) -> Option<f64> {
    match s {
        "nan" => Some(f64::NAN),
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        _ => s.parse().ok(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub values: Vec<f64>,
    /// Written as an integer (flags, indices, counts).
    pub integer: bool,
}

impl Column {
    pub fn real(name: &str, values: Vec<f64>) -> Self {
        Column { name: name.into(), values, integer: false }
    }

    pub fn flag(name: &str, values: impl IntoIterator<Item = bool>) -> Self {
        Column { name: name.into(), values: values.into_iter().map(|b| if b { 1.0 } else { 0.0 }).collect(), integer: true }
    }

    pub fn integer(name: &str, values: impl IntoIterator<Item = usize>) -> Self {
        Column { name: name.into(), values: values.into_iter().map(|v| v as f64).collect(), integer: true }
    }
}

/// Plot layout carried with a trace: a solid and a dashed curve plus a
/// horizontal threshold.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotHint {
    pub x: String,
    pub solid: String,
    pub dashed: String,
    pub threshold: f64,
    pub x_label: String,
    pub y_label: String,
}

/// A CSV file with `# key = value` metadata lines.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceFile {
    pub file_name: String,
    pub header: Vec<(String, String)>,
    pub columns: Vec<Column>,
    pub plot: Option<PlotHint>,
}

impl TraceFile {
    /// Header built from the run parameters, followed by `meta.*` lines.
    pub fn new(file_name: impl Into<String>, config: &RunConfig, columns: Vec<Column>) -> Self {
        let mut header = emit_pairs(config, false);
        header.push(("meta.unit_convention".into(), UNIT_CONVENTION.into()));
        header.push(("meta.artifact_version".into(), ARTIFACT_VERSION.into()));
        TraceFile { file_name: file_name.into(), header, columns, plot: None }
    }

    pub fn with_meta(mut self, key: &str, value: impl Into<String>) -> Self {
        self.header.push((format!("meta.{key}"), value.into()));
        self
    }

    pub fn with_plot(mut self, plot: PlotHint) -> Self {
        self.plot = Some(plot);
        self
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns.iter().find(|c| c.name == name).map(|c| c.values.as_slice())
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.header {
            let _ = writeln!(s, "# {k} = {v}");
        }
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        let _ = writeln!(s, "{}", names.join(","));
        for r in 0..self.rows() {
            let cells: Vec<String> = self
                .columns
                .iter()
                .map(|c| if c.integer { format!("{}", c.values[r] as i64) } else { format_sci(c.values[r]) })
                .collect();
            let _ = writeln!(s, "{}", cells.join(","));
        }
        s
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(&self.file_name);
        std::fs::write(&path, self.to_csv())?;
        Ok(path)
    }

    /// Reads back a file produced by [`TraceFile::to_csv`].
    pub fn parse(file_name: &str, text: &str) -> Result<TraceFile> {
        let mut header = Vec::new();
        let mut lines = text.lines().enumerate();
        let mut names = None;
        for (i, line) in lines.by_ref() {
            if let Some(rest) = line.strip_prefix("# ") {
                let (k, v) = rest
                    .split_once(" = ")
                    .ok_or_else(|| Error::Parse { line: i + 1, message: "malformed header line".into() })?;
                header.push((k.to_string(), v.to_string()));
            } else {
                names = Some(line.split(',').map(str::to_string).collect::<Vec<_>>());
                break;
            }
        }
        let names = names.ok_or_else(|| Error::Parse { line: 0, message: "missing column row".into() })?;
        let mut columns: Vec<Column> =
            names.iter().map(|n| Column { name: n.clone(), values: Vec::new(), integer: false }).collect();
        let mut first = true;
        for (i, line) in lines {
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != columns.len() {
                return Err(Error::Parse { line: i + 1, message: "wrong number of cells".into() });
            }
            for (c, cell) in columns.iter_mut().zip(cells) {
                let v = parse_sci(cell).ok_or_else(|| Error::Parse { line: i + 1, message: format!("bad number `{cell}`") })?;
                if first {
                    c.integer = !cell.contains(['e', '.', 'n', 'i']);
                }
                c.values.push(v);
            }
            first = false;
        }
        Ok(TraceFile { file_name: file_name.into(), header, columns, plot: None })
    }
}

/// Rebuilds the run configuration from a trace header.
pub fn from_trace_header(text: &str) -> Result<RunConfig> {
    let mut body = String::new();
    for line in text.lines() {
        let Some(rest) = line.strip_prefix("# ") else { break };
        if rest.starts_with("meta.") {
            continue;
        }
        body.push_str(rest);
        body.push('\n');
    }
    parse_config(&body)
}

/// Plain-text table of computed quantities next to reference values.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub file_name: String,
    pub notes: Vec<String>,
    pub rows: Vec<ReportRow>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub quantity: String,
    pub unit: String,
    pub computed: f64,
    pub reference: Option<f64>,
    pub note: String,
}

impl ReportRow {
    pub fn new(quantity: &str, unit: &str, computed: f64) -> Self {
        ReportRow { quantity: quantity.into(), unit: unit.into(), computed, reference: None, note: String::new() }
    }

    pub fn against(mut self, reference: Option<f64>) -> Self {
        self.reference = reference;
        self
    }

    pub fn note(mut self, note: impl Into<String>) -> Self {
        self.note = note.into();
        self
    }

    /// computed / reference.
    pub fn ratio(&self) -> Option<f64> {
        self.reference.map(|r| self.computed / r)
    }
}

impl Report {
    pub fn row(&self, quantity: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.quantity == quantity)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for n in &self.notes {
            let _ = writeln!(s, "# {n}");
        }
        let _ = writeln!(s, "quantity,unit,computed,reference,ratio,note");
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map(format_sci).unwrap_or_default();
            let _ = writeln!(
                s,
                "{},{},{},{},{},{}",
                r.quantity,
                r.unit,
                format_sci(r.computed),
                opt(r.reference),
                opt(r.ratio()),
                r.note.replace(',', ";")
            );
        }
        s
    }
}
