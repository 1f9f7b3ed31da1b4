//! Tabular output in CSV and JSON.
//!
//! Every report is a [`Table`]: named columns and rows of [`Cell`]s. CSV
//! output is a header line followed by one line per row; JSON output is an
//! array of objects whose keys are the column names. Floats are written with
//! 17 significant digits, so values survive a round trip bit for bit.
//! Non-finite floats and missing values become an empty CSV cell or JSON
//! `null`.
//!
//! Sweep results use the fixed column order in [`SWEEP_COLUMNS`].

use std::fmt::Write as _;
use std::io::Write;
use std::path::Path;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::experiments::SweepRow;
use crate::model::Mode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(Error::invalid("format", format!("unknown format {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Int(i64),
    UInt(u64),
    Float(f64),
    Text(String),
    /// Rendered verbatim as a number (arbitrary-precision integers).
    BigInt(String),
    Empty,
}

impl Cell {
    fn render(&self) -> Option<String> {
        match self {
            Cell::Int(v) => Some(v.to_string()),
            Cell::UInt(v) => Some(v.to_string()),
            Cell::Float(v) if v.is_finite() => Some(format!("{v:.16e}")),
            Cell::Float(_) | Cell::Empty => None,
            Cell::Text(s) => Some(s.clone()),
            Cell::BigInt(s) => Some(s.clone()),
        }
    }

    fn json(&self) -> String {
        match (self, self.render()) {
            (_, None) => "null".to_string(),
            (Cell::Text(s), _) => serde_json::to_string(s).expect("string encodes"),
            (_, Some(r)) => r,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::UInt(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::UInt(v as u64)
    }
}

impl From<i64> for Cell {
    fn from(v: i64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(v: Option<T>) -> Self {
        v.map_or(Cell::Empty, Into::into)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: AsRef<str>>(columns: &[S]) -> Self {
        Table {
            columns: columns.iter().map(|c| c.as_ref().to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width must match header");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for row in &self.rows {
            w.write_record(row.iter().map(|c| c.render().unwrap_or_default()))
                .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 input")
    }

    pub fn to_json(&self) -> String {
        let keys: Vec<String> = self
            .columns
            .iter()
            .map(|c| serde_json::to_string(c).expect("string encodes"))
            .collect();
        let mut out = String::from("[");
        for (i, row) in self.rows.iter().enumerate() {
            out.push_str(if i == 0 { "\n  {" } else { ",\n  {" });
            for (j, (key, cell)) in keys.iter().zip(row).enumerate() {
                if j > 0 {
                    out.push(',');
                }
                let _ = write!(out, "{key}:{}", cell.json());
            }
            out.push('}');
        }
        out.push_str(if self.rows.is_empty() { "]\n" } else { "\n]\n" });
        out
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

/// Column order of sweep output. `error` is empty unless the row failed.
pub const SWEEP_COLUMNS: [&str; 16] = [
    "n",
    "k",
    "alpha",
    "a_n",
    "p",
    "mode",
    "trials",
    "basis_prob_hat",
    "ci_lo",
    "ci_hi",
    "exact_lambda",
    "asympt_lambda",
    "limit_prob",
    "tv_hat",
    "seed",
    "error",
];

pub fn sweep_table(rows: &[SweepRow]) -> Table {
    let mut t = Table::new(&SWEEP_COLUMNS);
    for r in rows {
        t.push(vec![
            r.n.into(),
            r.k.into(),
            r.alpha.into(),
            r.a_n.into(),
            r.p.into(),
            r.mode.as_str().into(),
            r.trials.into(),
            r.basis_prob_hat.into(),
            r.ci_lo.into(),
            r.ci_hi.into(),
            r.exact_lambda.into(),
            r.asympt_lambda.into(),
            r.limit_prob.into(),
            r.tv_hat.into(),
            r.seed.into(),
            r.error.clone().into(),
        ]);
    }
    t
}

pub fn serialize_sweep(rows: &[SweepRow], format: Format) -> String {
    sweep_table(rows).render(format)
}

fn parse_err(msg: impl std::fmt::Display) -> Error {
    Error::Parse(msg.to_string())
}

/// Access to one record's fields by column name, for either format.
trait Fields {
    fn text(&self, key: &str) -> Result<Option<String>>;

    fn float(&self, key: &str) -> Result<Option<f64>> {
        self.text(key)?
            .map(|s| s.parse::<f64>().map_err(|e| parse_err(format!("{key}: {e}"))))
            .transpose()
    }

    fn uint(&self, key: &str) -> Result<u64> {
        let s = self.text(key)?.ok_or_else(|| parse_err(format!("{key}: missing")))?;
        s.parse::<u64>().map_err(|e| parse_err(format!("{key}: {e}")))
    }

    fn row(&self) -> Result<SweepRow> {
        let mode: Mode = self
            .text("mode")?
            .ok_or_else(|| parse_err("mode: missing"))?
            .parse()
            .map_err(parse_err)?;
        Ok(SweepRow {
            n: self.uint("n")?,
            k: self.uint("k")?,
            alpha: self.float("alpha")?.ok_or_else(|| parse_err("alpha: missing"))?,
            a_n: self.float("a_n")?,
            p: self.float("p")?,
            mode,
            trials: self.uint("trials")?,
            basis_prob_hat: self.float("basis_prob_hat")?,
            ci_lo: self.float("ci_lo")?,
            ci_hi: self.float("ci_hi")?,
            exact_lambda: self.float("exact_lambda")?,
            asympt_lambda: self.float("asympt_lambda")?,
            limit_prob: self.float("limit_prob")?,
            tv_hat: self.float("tv_hat")?,
            seed: self.uint("seed")?,
            error: self.text("error")?,
        })
    }
}

struct CsvRecord<'a> {
    header: &'a csv::StringRecord,
    record: &'a csv::StringRecord,
}

impl Fields for CsvRecord<'_> {
    fn text(&self, key: &str) -> Result<Option<String>> {
        let idx = self
            .header
            .iter()
            .position(|h| h == key)
            .ok_or_else(|| parse_err(format!("missing column {key}")))?;
        Ok(self.record.get(idx).filter(|s| !s.is_empty()).map(str::to_string))
    }
}

impl Fields for serde_json::Map<String, Value> {
    fn text(&self, key: &str) -> Result<Option<String>> {
        match self.get(key) {
            None | Some(Value::Null) => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(Value::Number(n)) => Ok(Some(n.to_string())),
            Some(other) => Err(parse_err(format!("{key}: unexpected value {other}"))),
        }
    }
}

pub fn parse_sweep_csv(text: &str) -> Result<Vec<SweepRow>> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().map_err(parse_err)?.clone();
    r.records()
        .map(|rec| {
            let record = rec.map_err(parse_err)?;
            CsvRecord { header: &header, record: &record }.row()
        })
        .collect()
}

pub fn parse_sweep_json(text: &str) -> Result<Vec<SweepRow>> {
    let value: Value = serde_json::from_str(text).map_err(parse_err)?;
    let items = value.as_array().ok_or_else(|| parse_err("expected a JSON array"))?;
    items
        .iter()
        .map(|item| item.as_object().ok_or_else(|| parse_err("expected an object"))?.row())
        .collect()
}

pub fn parse_sweep(text: &str, format: Format) -> Result<Vec<SweepRow>> {
    match format {
        Format::Csv => parse_sweep_csv(text),
        Format::Json => parse_sweep_json(text),
    }
}
