//! Tables, summaries and the all-or-nothing writer.

use anyhow::{bail, Context, Result};
use serde_json::{Map, Number, Value};
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    /// Comma-separated values with a header row.
    Csv,
    /// One JSON object per line.
    Jsonl,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Jsonl => "jsonl",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    F(f64),
    I(i64),
    S(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::F(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::I(x)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::S(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::S(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        Cell::F(x.unwrap_or(f64::NAN))
    }
}

/// Seventeen significant digits, enough to round-trip any double.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

/// JSON number with the same formatting; non-finite values become `null`.
pub fn num(x: f64) -> Value {
    if !x.is_finite() {
        return Value::Null;
    }
    fmt_f64(x).parse::<Number>().map(Value::Number).unwrap_or(Value::Null)
}

pub fn opt(x: Option<f64>) -> Value {
    x.map(num).unwrap_or(Value::Null)
}

impl Cell {
    fn text(&self) -> String {
        match self {
            Cell::F(x) => fmt_f64(*x),
            Cell::I(i) => i.to_string(),
            Cell::S(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::F(x) => num(*x),
            Cell::I(i) => Value::from(*i),
            Cell::S(s) => Value::from(s.as_str()),
        }
    }
}

pub struct Table {
    pub name: &'static str,
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &'static str, columns: &[&'static str]) -> Self {
        Self { name, columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn file_name(&self, format: Format) -> String {
        format!("{}.{}", self.name, format.extension())
    }

    pub fn render(&self, format: Format) -> Result<Vec<u8>> {
        match format {
            Format::Csv => {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(&self.columns)?;
                for row in &self.rows {
                    w.write_record(row.iter().map(Cell::text))?;
                }
                Ok(w.into_inner().context("flushing CSV buffer")?)
            }
            Format::Jsonl => {
                let mut out = Vec::new();
                for row in &self.rows {
                    let obj: Map<String, Value> =
                        self.columns.iter().zip(row).map(|(c, v)| (c.to_string(), v.json())).collect();
                    serde_json::to_writer(&mut out, &Value::Object(obj))?;
                    out.push(b'\n');
                }
                Ok(out)
            }
        }
    }
}

/// Everything a command produces; nothing touches the disk until
/// [`Report::write`].
pub struct Report {
    pub command: &'static str,
    pub inputs: Map<String, Value>,
    pub tolerances: (f64, f64),
    pub results: Map<String, Value>,
    pub tables: Vec<Table>,
}

impl Report {
    pub fn new(command: &'static str, tolerances: (f64, f64)) -> Self {
        Self { command, inputs: Map::new(), tolerances, results: Map::new(), tables: Vec::new() }
    }

    pub fn input(&mut self, key: &str, v: Value) {
        self.inputs.insert(key.into(), v);
    }

    pub fn result(&mut self, key: &str, v: Value) {
        self.results.insert(key.into(), v);
    }

    fn summary(&self, format: Format) -> Result<Vec<u8>> {
        let mut m = Map::new();
        m.insert("command".into(), self.command.into());
        m.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        m.insert("inputs".into(), Value::Object(self.inputs.clone()));
        let mut tol = Map::new();
        tol.insert("rtol".into(), num(self.tolerances.0));
        tol.insert("atol".into(), num(self.tolerances.1));
        m.insert("tolerances".into(), Value::Object(tol));
        m.insert("results".into(), Value::Object(self.results.clone()));
        let files: Vec<Value> = self.tables.iter().map(|t| Value::from(t.file_name(format))).collect();
        m.insert("files".into(), Value::Array(files));
        let mut out = serde_json::to_vec_pretty(&Value::Object(m))?;
        out.push(b'\n');
        Ok(out)
    }

    /// Render every file, then write them through temporary names so a
    /// failure leaves no partial output behind.
    pub fn write(&self, dir: &Path, format: Format) -> Result<Vec<PathBuf>> {
        let mut files = vec![(format!("{}_summary.json", self.command.replace('-', "_")), self.summary(format)?)];
        for t in &self.tables {
            files.push((t.file_name(format), t.render(format)?));
        }
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        let mut staged = Vec::new();
        for (name, bytes) in &files {
            let tmp = dir.join(format!(".{name}.partial"));
            if let Err(e) = fs::write(&tmp, bytes) {
                for (t, _) in &staged {
                    let _ = fs::remove_file(t);
                }
                let _ = fs::remove_file(&tmp);
                return Err(e).with_context(|| format!("writing {}", tmp.display()));
            }
            staged.push((tmp, dir.join(name)));
        }
        let mut written = Vec::new();
        for (tmp, dest) in staged {
            fs::rename(&tmp, &dest).with_context(|| format!("moving output into {}", dest.display()))?;
            written.push(dest);
        }
        Ok(written)
    }
}

/// The output directory must exist as a directory or be creatable under an
/// existing directory.
pub fn check_output_dir(dir: &Path) -> Result<()> {
    if dir.exists() {
        let meta = fs::metadata(dir)?;
        if !meta.is_dir() {
            bail!("output path {} is not a directory", dir.display());
        }
        if meta.permissions().readonly() {
            bail!("output directory {} is read-only", dir.display());
        }
        return Ok(());
    }
    let mut parent = dir.parent();
    while let Some(p) = parent {
        if p.as_os_str().is_empty() || p.exists() {
            let p = if p.as_os_str().is_empty() { Path::new(".") } else { p };
            if !p.is_dir() {
                bail!("{} is not a directory", p.display());
            }
            return Ok(());
        }
        parent = p.parent();
    }
    Ok(())
}
