//! Comma-separated result tables with a `#`-prefixed metadata header.
//!
//! ```text
//! # kind = evolve
//! # K = 6.2831853071795862e0
//! # columns = t:int,mean_theta:float
//! t,mean_theta
//! 1,1.5000000000000000e0
//! ```
//!
//! Metadata lines are `# key = value`, in insertion order. The `columns`
//! entry declares the schema; readers locate columns by name.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColumnType {
    Int,
    Float,
    Text,
}

impl ColumnType {
    fn name(self) -> &'static str {
        match self {
            ColumnType::Int => "int",
            ColumnType::Float => "float",
            ColumnType::Text => "text",
        }
    }
}

impl FromStr for ColumnType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "int" => Ok(ColumnType::Int),
            "float" => Ok(ColumnType::Float),
            "text" => Ok(ColumnType::Text),
            other => Err(Error::Table(format!("unknown column type `{other}`"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Column {
    pub name: String,
    pub ty: ColumnType,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Int(i) => Some(*i as f64),
            Value::Float(x) => Some(*x),
            Value::Text(_) => None,
        }
    }

    fn ty(&self) -> ColumnType {
        match self {
            Value::Int(_) => ColumnType::Int,
            Value::Float(_) => ColumnType::Float,
            Value::Text(_) => ColumnType::Text,
        }
    }
}

impl From<f64> for Value {
    fn from(x: f64) -> Self {
        Value::Float(x)
    }
}

impl From<i64> for Value {
    fn from(i: i64) -> Self {
        Value::Int(i)
    }
}

impl From<usize> for Value {
    fn from(i: usize) -> Self {
        Value::Int(i as i64)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => f.write_str(&format_float(*x)),
            Value::Text(s) => f.write_str(s),
        }
    }
}

/// Seventeen significant digits: enough for an exact `f64` round trip.
pub fn format_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ResultTable {
    metadata: Vec<(String, String)>,
    columns: Vec<Column>,
    rows: Vec<Vec<Value>>,
}

impl ResultTable {
    pub fn new(columns: &[(&str, ColumnType)]) -> Self {
        Self {
            metadata: Vec::new(),
            columns: columns
                .iter()
                .map(|(name, ty)| Column {
                    name: name.to_string(),
                    ty: *ty,
                })
                .collect(),
            rows: Vec::new(),
        }
    }

    /// Set a metadata entry, replacing an existing one with the same key.
    pub fn set_meta(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        let value = value.into();
        if key == "columns" || key.contains('=') || key.contains('\n') || value.contains('\n') {
            return Err(Error::Table(format!("invalid metadata entry `{key}`")));
        }
        match self.metadata.iter_mut().find(|(k, _)| k == key) {
            Some(slot) => slot.1 = value,
            None => self.metadata.push((key.to_string(), value)),
        }
        Ok(())
    }

    pub fn set_meta_f64(&mut self, key: &str, value: f64) -> Result<()> {
        self.set_meta(key, format_float(value))
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn meta_f64(&self, key: &str) -> Option<f64> {
        self.meta(key)?.parse().ok()
    }

    pub fn metadata(&self) -> &[(String, String)] {
        &self.metadata
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn rows(&self) -> &[Vec<Value>] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn push(&mut self, row: Vec<Value>) -> Result<()> {
        if row.len() != self.columns.len() {
            return Err(Error::Table(format!(
                "row has {} values, schema has {} columns",
                row.len(),
                self.columns.len()
            )));
        }
        for (v, c) in row.iter().zip(&self.columns) {
            if v.ty() != c.ty {
                return Err(Error::Table(format!(
                    "column `{}` expects {}, got {}",
                    c.name,
                    c.ty.name(),
                    v.ty().name()
                )));
            }
            if let Value::Text(s) = v {
                if s.contains(',') || s.contains('\n') {
                    return Err(Error::Table(format!(
                        "text in column `{}` must not contain commas or newlines",
                        c.name
                    )));
                }
            }
        }
        self.rows.push(row);
        Ok(())
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    /// A numeric column by name.
    pub fn column_f64(&self, name: &str) -> Result<Vec<f64>> {
        let i = self
            .column_index(name)
            .ok_or_else(|| Error::Table(format!("no column `{name}`")))?;
        self.rows
            .iter()
            .map(|r| {
                r[i].as_f64()
                    .ok_or_else(|| Error::Table(format!("column `{name}` is not numeric")))
            })
            .collect()
    }

    /// Header and data lines, each ending in a newline.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        let schema: Vec<String> = self
            .columns
            .iter()
            .map(|c| format!("{}:{}", c.name, c.ty.name()))
            .collect();
        out.push_str(&format!("# columns = {}\n", schema.join(",")));
        out.push_str(&self.data_text());
        out
    }

    /// Column header plus data rows, without metadata.
    pub fn data_text(&self) -> String {
        let mut out = String::new();
        let names: Vec<&str> = self.columns.iter().map(|c| c.name.as_str()).collect();
        out.push_str(&names.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Value::to_string).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut metadata = Vec::new();
        let mut schema = None;
        let mut lines = text.lines();
        let header = loop {
            let line = lines
                .next()
                .ok_or_else(|| Error::Table("missing column header".into()))?;
            let Some(rest) = line.strip_prefix('#') else {
                break line;
            };
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| Error::Table(format!("bad metadata line `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            if k == "columns" {
                schema = Some(parse_schema(v)?);
            } else {
                metadata.push((k.to_string(), v.to_string()));
            }
        };
        let columns = schema.ok_or_else(|| Error::Table("header lacks a columns entry".into()))?;
        let names: Vec<&str> = header.split(',').collect();
        if names.len() != columns.len() || names.iter().zip(&columns).any(|(n, c)| *n != c.name) {
            return Err(Error::Table(format!(
                "column header `{header}` does not match the declared schema"
            )));
        }
        let mut table = Self {
            metadata,
            columns,
            rows: Vec::new(),
        };
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != table.columns.len() {
                return Err(Error::Table(format!(
                    "data row {} has {} cells",
                    i + 1,
                    cells.len()
                )));
            }
            let row = cells
                .iter()
                .zip(&table.columns)
                .map(|(cell, col)| parse_cell(cell, col))
                .collect::<Result<Vec<_>>>()?;
            table.rows.push(row);
        }
        Ok(table)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }
}

fn parse_schema(spec: &str) -> Result<Vec<Column>> {
    spec.split(',')
        .map(|entry| {
            let (name, ty) = entry
                .split_once(':')
                .ok_or_else(|| Error::Table(format!("bad schema entry `{entry}`")))?;
            Ok(Column {
                name: name.trim().to_string(),
                ty: ty.trim().parse()?,
            })
        })
        .collect()
}

fn parse_cell(cell: &str, col: &Column) -> Result<Value> {
    let bad = || Error::Table(format!("column `{}`: cannot parse `{cell}`", col.name));
    Ok(match col.ty {
        ColumnType::Int => Value::Int(cell.parse().map_err(|_| bad())?),
        ColumnType::Float => Value::Float(cell.parse().map_err(|_| bad())?),
        ColumnType::Text => Value::Text(cell.to_string()),
    })
}
